use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use plap_cli::run::{load_potential, run, RunError};

/// Principal eigenvalues of -Δ_p + V: solves, sweeps, certificates and the
/// verification suite.
#[derive(Parser)]
#[command(name = "plap", version)]
struct Args {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding `solver.rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn fail(err: impl std::fmt::Display, code: u8) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", args.config.display()), 2),
    };
    let mut cfg = match plap_cli::parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(format!("{}: {e}", args.config.display()), 2),
    };
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = args.seed {
        cfg.solver.rng_seed = seed;
    }
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    if let Err(e) = load_potential(&mut cfg, &base) {
        return fail(e, 2);
    }

    let threads = match std::env::var("PLAP_THREADS") {
        Ok(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return fail(format!("PLAP_THREADS must be a positive integer, got `{s}`"), 2),
        },
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");

    match pool.install(|| run(&cfg)) {
        Ok(message) => {
            println!("{}", message.trim_end());
            ExitCode::SUCCESS
        }
        Err(RunError::Verification(table)) => {
            println!("{}", table.trim_end());
            eprintln!("error: verification failed; see {}", cfg.out_dir.join("result.json").display());
            ExitCode::from(4)
        }
        Err(e) => {
            let code = e.exit_code() as u8;
            fail(e, code)
        }
    }
}
