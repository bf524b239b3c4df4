use clap::Parser;
use paraflow_cli::config::parse_config;
use paraflow_cli::runner::{run_scenario, TolOverrides};
use paraflow_cli::selftest;
use std::path::PathBuf;
use std::process::ExitCode;

/// Reduced mean curvature flow of isoparametric hypersurfaces: scenario
/// runner and verification suite.
#[derive(Parser, Debug)]
#[command(name = "paraflow", version)]
struct Cli {
    /// Scenario config file (key = value lines; see the README schema).
    #[arg(long, value_name = "PATH", required_unless_present = "selftest")]
    config: Option<PathBuf>,

    /// Output directory for CSV trajectories and summaries.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Run the full verification suite (criteria 1-9) with fixed seeds.
    #[arg(long)]
    selftest: bool,

    /// Seed for randomized sweeps and the self-test draws.
    #[arg(long, value_name = "N", default_value_t = 42)]
    seed: u64,

    /// Override a named tolerance, e.g. `--tol-override riccati.tol=1e-5`
    /// (repeatable).
    #[arg(long = "tol-override", value_name = "KEY=VAL")]
    tol_override: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut tols = TolOverrides::default();
    for spec in &cli.tol_override {
        let Some((key, val)) = spec.split_once('=') else {
            eprintln!("error: --tol-override expects KEY=VAL, got {spec:?}");
            return ExitCode::from(2);
        };
        let value: f64 = match val.parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("error: --tol-override {key}: {val:?} is not a number");
                return ExitCode::from(2);
            }
        };
        if let Err(e) = tols.set(key.trim(), value) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    if cli.selftest {
        let outcomes = selftest::run_all(cli.seed, &tols);
        let mut ok = true;
        for o in &outcomes {
            println!("{}", o.line());
            for d in &o.details {
                println!("    {d}");
            }
            ok &= o.passed;
        }
        return if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    }

    let path = cli.config.expect("clap enforces --config without --selftest");
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let scenario = match parse_config(&text) {
        Ok(s) => s,
        Err(issues) => {
            eprintln!("error: invalid config {} ({} problems):", path.display(), issues.len());
            for issue in issues {
                eprintln!("  {issue}");
            }
            return ExitCode::from(2);
        }
    };

    match run_scenario(&scenario, &cli.out, cli.seed, &tols) {
        Ok(outcome) => {
            for artifact in &outcome.artifacts {
                println!("wrote {}", artifact.display());
            }
            if outcome.ok {
                println!("status: ok");
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    println!("{f}");
                }
                println!("status: failed ({} checks)", outcome.failures.len());
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
