use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use setderiv::cli::config::ExperimentConfig;
use setderiv::cli::{experiments, exit_code, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use setderiv::Error;

/// Run a registered experiment from a configuration file.
///
/// Exit codes: 0 all checks pass, 1 a check failed, 2 usage, 3 config parse error,
/// 4 unknown experiment, 5 I/O error, 10-25 errors raised by the geometry layers.
#[derive(Parser, Debug)]
#[command(name = "setderiv", version)]
struct Args {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overridden by SETDERIV_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all available).
    #[arg(long)]
    threads: Option<usize>,
    /// List the registry and exit.
    #[arg(long)]
    list: bool,
    /// Only list entries whose name, group or anchor contains this string.
    #[arg(long)]
    filter: Option<String>,
    /// Treat inconclusive checks as failures.
    #[arg(long)]
    strict: bool,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e) as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    if args.list || args.config.is_none() {
        if !args.list {
            eprintln!("no --config given; listing experiments");
        }
        for e in experiments::list(args.filter.as_deref()) {
            println!("{:<26} [{}] {}: {}", e.name, e.group, e.anchor, e.summary);
        }
        return ExitCode::from(EXIT_OK as u8);
    }
    let path = args.config.expect("checked above");
    let cfg = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let out = std::env::var_os("SETDERIV_OUT")
        .map(PathBuf::from)
        .or(args.out)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    let report = match experiments::run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Err(e) = report.write(&out, args.strict) {
        return fail(&e);
    }
    print!("{}", report.to_summary(args.strict));
    println!("artifacts in {}", out.display());
    if report.passed(args.strict) {
        ExitCode::from(EXIT_OK as u8)
    } else {
        ExitCode::from(EXIT_CHECK_FAILED as u8)
    }
}
