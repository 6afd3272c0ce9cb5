use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Jump, LargeCutoff, PointMeasure, SimRegion};
use crate::error::{Error, Result};
use crate::util::fmt_f64;

/// Metadata written next to the jump CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub region: SimRegion,
    pub small_cutoff: f64,
    pub large_cutoff: LargeCutoff,
    pub b: f64,
    pub b_eps: f64,
    pub seed: u64,
    pub jumps: usize,
}

impl PointMeasure {
    /// CSV with header `t,x1[,x2[,x3]],z`, one row per jump, in time order.
    pub fn to_csv(&self) -> String {
        let dim = self.dim();
        let mut out = String::from("t");
        for k in 1..=dim {
            out.push_str(&format!(",x{k}"));
        }
        out.push_str(",z\n");
        for j in &self.jumps {
            out.push_str(&fmt_f64(j.t));
            for v in j.pos(dim) {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push(',');
            out.push_str(&fmt_f64(j.z));
            out.push('\n');
        }
        out
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            region: self.region,
            small_cutoff: self.small_cutoff,
            large_cutoff: self.large_cutoff,
            b: self.b,
            b_eps: self.b_eps,
            seed: self.seed,
            jumps: self.jumps.len(),
        }
    }

    /// Write `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        std::fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&self.sidecar())?,
        )?;
        Ok(())
    }

    pub fn from_csv(csv: &str, sidecar: &str) -> Result<Self> {
        let meta: Sidecar = serde_json::from_str(sidecar)?;
        let dim = meta.region.dim();
        let mut lines = csv.lines();
        let header = lines.next().ok_or_else(|| Error::config("empty jump CSV"))?;
        let mut expect = vec!["t".to_string()];
        expect.extend((1..=dim).map(|k| format!("x{k}")));
        expect.push("z".into());
        if header.split(',').collect::<Vec<_>>() != expect {
            return Err(Error::config(format!("jump CSV header '{header}' does not match dimension {dim}")));
        }
        let mut jumps = Vec::new();
        for (n, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| Error::config(format!("jump CSV row {}: {e}", n + 1)))?;
            if vals.len() != dim + 2 {
                return Err(Error::config(format!("jump CSV row {} has {} fields", n + 1, vals.len())));
            }
            jumps.push(Jump::new(vals[0], &vals[1..=dim], vals[dim + 1]));
        }
        if jumps.len() != meta.jumps {
            return Err(Error::config("jump CSV row count disagrees with sidecar"));
        }
        let mut pm = PointMeasure::from_jumps(meta.region, jumps)?;
        pm.small_cutoff = meta.small_cutoff;
        pm.large_cutoff = meta.large_cutoff;
        pm.b = meta.b;
        pm.b_eps = meta.b_eps;
        pm.seed = meta.seed;
        Ok(pm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasureSpec;
    use crate::noise::sample_prm;

    #[test]
    fn csv_roundtrip_is_exact() {
        let spec = LevyMeasureSpec::stable_asym(0.7, 1.0, 0.3).unwrap().with_drift(0.1);
        let r = SimRegion::boxed(0.5, 2, 1.0).unwrap();
        let pm = sample_prm(&spec, r, 0.2, LargeCutoff::Fixed { n: 5.0 }, 77).unwrap();
        let csv = pm.to_csv();
        assert!(csv.starts_with("t,x1,x2,z\n"));
        let side = serde_json::to_string(&pm.sidecar()).unwrap();
        let back = PointMeasure::from_csv(&csv, &side).unwrap();
        assert_eq!(back, pm);
    }
}
