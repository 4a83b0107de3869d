use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use squeezeprep_cli::{execute, RunConfig, Verb, EXIT_CONFIG};

/// Spectra, analytic zero-energy states, ramp evolution and phase-space maps
/// for a driven two-level system coupled to an oscillator or a large spin.
#[derive(Parser, Debug)]
#[command(name = "squeezeprep", version)]
struct Args {
    verb: Verb,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `outputs.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set system.n_cut=400`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Comma-separated `u` values for evolve snapshots.
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut overrides = args.set.clone();
    if let Some(out) = &args.out {
        overrides.push(format!("outputs.dir={:?}", out.display().to_string()));
    }
    if let Some(list) = &args.snapshots {
        let items: Vec<String> = list.iter().map(|u| format!("{u:?}")).collect();
        overrides.push(format!("outputs.snapshots=[{}]", items.join(", ")));
    }
    let cfg = match RunConfig::load(args.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match execute(args.verb, &cfg) {
        Ok(report) => {
            if report.exit_code != 0 {
                eprintln!(
                    "error: {}",
                    report.manifest["results"]["error"].as_str().unwrap_or("numerical guard")
                );
            } else {
                for flag in report.manifest["flags"].as_array().into_iter().flatten() {
                    eprintln!("note: {}", flag.as_str().unwrap_or_default());
                }
            }
            println!("{}", cfg.outputs.dir.join(squeezeprep_cli::manifest::MANIFEST_NAME).display());
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
