use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use shelab::experiment::{run_experiment, ExperimentConfig};
use shelab::Error;

#[derive(Parser)]
#[command(name = "shelab", version, about = "Stochastic heat equation with Lévy noise: experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its report and artifacts.
    Run {
        config: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long, env = "SHELAB_THREADS")]
        threads: Option<usize>,
        /// Override `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Override `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration and print its resolved form without computing anything.
    Validate { config: PathBuf },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    let kind = match e {
        Error::Config(_) => "config",
        Error::Precondition(_) => "precondition",
        Error::Json(_) => "parse",
        Error::Io(_) => "io",
        Error::Numerical(_) => "numerical",
        Error::NonConvergence { .. } => "non_convergence",
    };
    let mut v = json!({ "exit_code": exit_code(e), "kind": kind, "message": e.to_string() });
    if let Error::NonConvergence { iters, residual, history } = e {
        v["iterations"] = json!(iters);
        v["residual"] = json!(residual);
        v["residual_history"] = json!(history);
    }
    json!({ "errors": [v] })
}

// a closed pipe (e.g. `| head`) is not an error worth a panic
fn print_out(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn load(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn report_error(dir: Option<&Path>, e: &Error) -> ExitCode {
    eprintln!("shelab: {e}");
    if let Some(dir) = dir {
        let body = serde_json::to_vec_pretty(&error_json(e)).expect("error json");
        if let Err(w) = write_all(dir, &[("errors.json".into(), body)]) {
            eprintln!("shelab: could not write errors.json: {w}");
        }
    }
    ExitCode::from(exit_code(e))
}

fn run(config: &Path, threads: Option<usize>, seed: Option<u64>, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match load(config) {
        Ok(c) => c,
        Err(e) => return report_error(out.as_deref(), &e),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let dir = out.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("shelab-out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return report_error(Some(&dir), &Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return report_error(Some(&dir), &Error::Numerical(format!("thread pool: {e}"))),
    };
    let result = pool.install(|| run_experiment(&cfg));
    let output = match result {
        Ok(o) => o,
        Err(e) => return report_error(Some(&dir), &e),
    };
    let mut files: Vec<(String, Vec<u8>)> = output.artifacts.into_iter().map(|a| (a.name, a.bytes)).collect();
    let report = serde_json::to_vec_pretty(&output.report).expect("report json");
    files.push(("report.json".into(), report));
    let _ = fs::remove_file(dir.join("errors.json"));
    if let Err(e) = write_all(&dir, &files) {
        return report_error(None, &e);
    }
    print_out(&dir.join("report.json").display().to_string());
    for w in &output.report.warnings {
        eprintln!("warning: {w}");
    }
    ExitCode::SUCCESS
}

fn validate(config: &Path) -> ExitCode {
    match load(config).and_then(|c| c.validate()) {
        Ok(v) => {
            let body = json!({
                "valid": true,
                "config_hash": v.config_hash,
                "resolved": v.resolved,
                "hypothesis": v.hypothesis,
                "warnings": v.warnings,
            });
            print_out(&serde_json::to_string_pretty(&body).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            print_out(&serde_json::to_string_pretty(&error_json(&e)).expect("json"));
            eprintln!("shelab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, threads, seed, out } => run(&config, threads, seed, out),
        Command::Validate { config } => validate(&config),
    }
}
