//! `oddm-sim <experiment> --config <file> [--set key=value ...] --out <dir>`
//!
//! Experiments: waveform, psd, ambiguity, gram, ber. Exit codes: 0 on
//! success, 2 on configuration errors, 3 on runtime failures.

use std::path::PathBuf;
use std::process::ExitCode;

use oddm::harness::{run_experiment, validate_config, Experiment};

const USAGE: &str = "\
usage: oddm-sim <experiment> [--config <file>] [--set key=value ...] --out <dir>

experiments:
  waveform   dump one random frame per system (CSV)
  psd        analytic + empirical power spectral densities and OOBE metrics
  ambiguity  auto- and cross-ambiguity surfaces of the pulse trains
  gram       offset-averaged orthogonality surfaces over the ta sweep
  ber        bit error rate over a doubly-selective channel

options:
  --config <file>     key = value configuration (defaults: full-scale preset)
  --set key=value     override one configuration key (repeatable)
  --out <dir>         output directory (created if missing)
  --help              this text

configuration keys:
  preset (full|desk), m, n, t, q, beta, ns, lcp, systems, ta_factors,
  ebn0_db, trials, ber_bits, detector (mp|lmmse), seed, kmax,
  thresholds_db, channel (fixed4|eva), fc_hz, speed_kmh
";

struct Args {
    experiment: Experiment,
    config_path: Option<PathBuf>,
    overrides: Vec<(String, String)>,
    out_dir: PathBuf,
}

enum ArgOutcome {
    Run(Args),
    Help,
}

fn parse_args() -> Result<ArgOutcome, String> {
    let mut argv = std::env::args().skip(1);
    let first = argv.next().ok_or_else(|| USAGE.to_string())?;
    if first == "--help" || first == "-h" {
        return Ok(ArgOutcome::Help);
    }
    let experiment = Experiment::from_name(&first)
        .ok_or_else(|| format!("unknown experiment `{first}`\n\n{USAGE}"))?;
    let mut config_path = None;
    let mut overrides = Vec::new();
    let mut out_dir = None;
    while let Some(arg) = argv.next() {
        match arg.as_str() {
            "--config" => {
                let v = argv.next().ok_or("--config needs a file path")?;
                config_path = Some(PathBuf::from(v));
            }
            "--set" => {
                let v = argv.next().ok_or("--set needs key=value")?;
                let (k, val) = v
                    .split_once('=')
                    .ok_or_else(|| format!("--set `{v}`: expected key=value"))?;
                overrides.push((k.trim().to_string(), val.trim().to_string()));
            }
            "--out" => {
                let v = argv.next().ok_or("--out needs a directory")?;
                out_dir = Some(PathBuf::from(v));
            }
            "--help" | "-h" => return Ok(ArgOutcome::Help),
            other => return Err(format!("unknown argument `{other}`\n\n{USAGE}")),
        }
    }
    Ok(ArgOutcome::Run(Args {
        experiment,
        config_path,
        overrides,
        out_dir: out_dir.ok_or("missing required --out <dir>")?,
    }))
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(ArgOutcome::Run(a)) => a,
        Ok(ArgOutcome::Help) => {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let config_text = match &args.config_path {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cannot read config {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => String::new(),
    };
    let cfg = match validate_config(&config_text, args.experiment, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    match run_experiment(&cfg, &args.out_dir) {
        Ok(manifest) => {
            println!(
                "{}: wrote {} data file(s) + manifest.json to {}",
                manifest.experiment,
                manifest.files.len(),
                args.out_dir.display()
            );
            for f in &manifest.files {
                println!("  {}  {} bytes  sha256:{}", f.name, f.bytes, &f.sha256[..16]);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
