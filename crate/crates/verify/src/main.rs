use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use geodesic_verify::{emit, run, Format, Scenario, EXIT_USAGE};

/// Run a verification scenario and write its report.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
struct Args {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = Format::Json)]
    format: Format,
    /// Seed for randomized checks; overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = Scenario::load(&args.scenario).and_then(|s| {
        let report = run(&s, args.seed)?;
        let stem = args
            .scenario
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "report".into());
        let path = emit(&report, args.format, &args.out, &stem)?;
        Ok((report, path))
    });
    match result {
        Ok((report, path)) => {
            for c in &report.checks {
                eprintln!("{:<18} {:?} ({:?})", c.name.as_str(), c.status, c.outcome);
            }
            eprintln!("wrote {}", path.display());
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
