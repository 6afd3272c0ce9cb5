import init, { simulate, green_profiles } from "./pkg/shelab_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let field = null;

function status(msg) {
  $("status").textContent = msg;
}

// diverging blue-white-red map, symmetric around zero
function color(v, scale) {
  const s = Math.max(-1, Math.min(1, v / scale));
  const a = Math.round(255 * (1 - Math.abs(s)));
  return s >= 0 ? [255, a, a] : [a, a, 255];
}

function drawHeat() {
  const c = $("heat"), ctx = c.getContext("2d");
  const nt = field.nt, nx = field.nx, vals = field.values();
  const sorted = Array.from(vals, Math.abs).sort((a, b) => a - b);
  const scale = sorted[Math.floor(0.98 * (sorted.length - 1))] || 1;
  const img = ctx.createImageData(c.width, c.height);
  for (let py = 0; py < c.height; py++) {
    const k = Math.floor((py / c.height) * nx);
    for (let px = 0; px < c.width; px++) {
      const j = Math.floor((px / c.width) * nt);
      const [r, g, b] = color(vals[j * nx + k], scale);
      const o = 4 * (py * c.width + px);
      img.data[o] = r; img.data[o + 1] = g; img.data[o + 2] = b; img.data[o + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
  const ts = field.jump_times(), xs = field.jump_positions();
  ctx.fillStyle = "rgba(0,0,0,.5)";
  for (let i = 0; i < ts.length; i++) {
    ctx.fillRect((ts[i] / field.horizon) * c.width - 1, (xs[i] / Math.PI) * c.height - 1, 2, 2);
  }
}

function plotLines(canvas, series, xs) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let lo = Infinity, hi = -Infinity;
  for (const s of series) for (const v of s.ys) if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (hi === lo) hi = lo + 1;
  const X = (x) => ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * (canvas.width - 20) + 10;
  const Y = (y) => canvas.height - 10 - ((y - lo) / (hi - lo)) * (canvas.height - 20);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    s.ys.forEach((y, i) => (i ? ctx.lineTo(X(xs[i]), Y(y)) : ctx.moveTo(X(xs[i]), Y(y))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#555";
  ctx.fillText(hi.toPrecision(3), 12, 12);
  ctx.fillText(lo.toPrecision(3), 12, canvas.height - 12);
}

function runSim() {
  try {
    const t0 = performance.now();
    field?.free();
    field = simulate(num("alpha"), num("eps"), num("horizon"), num("tanh"), BigInt(num("seed")), 300, 128);
    drawHeat();
    status(`${field.jump_times().length} jumps, ${(performance.now() - t0).toFixed(0)} ms`);
    runTraj();
  } catch (e) {
    status(String(e));
  }
}

function runTraj() {
  if (!field) return;
  try {
    const norms = field.sobolev_norms(num("r"), num("nmax"));
    const ts = Array.from({ length: norms.length }, (_, j) => (j * field.horizon) / (norms.length - 1));
    plotLines($("norm"), [{ ys: norms, color: "#1f77b4" }], ts);
    const ctx = $("norm").getContext("2d");
    ctx.strokeStyle = "rgba(214,39,40,.35)";
    for (const t of field.annotated_jump_times(num("r"), num("nmax"))) {
      const x = (t / field.horizon) * ($("norm").width - 20) + 10;
      ctx.beginPath(); ctx.moveTo(x, 0); ctx.lineTo(x, $("norm").height); ctx.stroke();
    }
  } catch (e) {
    status(String(e));
  }
}

function runGreen() {
  try {
    const n = 400;
    const v = green_profiles(num("gt"), num("gy"), n, num("gmodes"), 8);
    const xs = Array.from({ length: n }, (_, i) => (Math.PI * i) / (n - 1));
    plotLines($("greenplot"), [
      { ys: v.slice(2 * n), color: "#999", dash: [4, 4] },
      { ys: v.slice(n, 2 * n), color: "#d62728" },
      { ys: v.slice(0, n), color: "#1f77b4", dash: [2, 3] },
    ], xs);
  } catch (e) {
    status(String(e));
  }
}

await init();
status("");
$("run").onclick = runSim;
$("traj").onclick = runTraj;
$("green").onclick = runGreen;
runSim();
runGreen();
