use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photoqpt::harness::{self, ExperimentConfig, RunManifest};
use photoqpt::lmg::{statics, LmgParams};
use photoqpt::{Error, Result};

#[derive(Parser)]
#[command(name = "photoqpt", version, about = "Single-photon triggered QPT simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one registered experiment.
    Run {
        experiment: String,
        /// TOML configuration; the experiment's defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
    /// Full 2^N diagonalisation next to the Dicke-sector result.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        jx: f64,
        #[arg(long)]
        jy: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        bx: f64,
    },
    /// Print the experiment registry.
    List,
    /// Print an experiment's default configuration as TOML.
    Defaults { experiment: String },
    /// Recheck the digests recorded in a run directory's manifest.
    Verify { dir: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            out,
            svg,
        } => {
            let cfg = match config {
                Some(path) => ExperimentConfig::load(&path).map_err(|e| e.context("stage config"))?,
                None => harness::default_config(&experiment).map_err(|e| e.context("stage config"))?,
            };
            if cfg.experiment != experiment {
                return Err(Error::Config(format!(
                    "config is for {}, not {experiment}",
                    cfg.experiment
                ))
                .context("stage config"));
            }
            let manifest = harness::run_experiment(&cfg, out.as_deref(), svg)?;
            for s in &manifest.stages {
                println!("{:<20} {:>10.3} s", s.stage, s.seconds);
            }
            for f in &manifest.outputs {
                println!("{}  {}", &f.sha256[..16], f.path);
            }
        }
        Command::Oracle { n, jx, jy, bx } => {
            let full = harness::brute_force_statics(n, jx, jy, bx).map_err(|e| e.context("stage oracle"))?;
            let dicke = statics(&LmgParams::new(n, jx, jy, bx)).map_err(|e| e.context("stage statics"))?;
            let rows = [
                ("e0", full.e0, dicke.e0),
                ("gap", full.gap, dicke.gap),
                ("zeta_x", full.zeta_x, dicke.order.zeta_x),
                ("zeta_y", full.zeta_y, dicke.order.zeta_y),
                ("c_xy", full.c_xy, dicke.correlations.c_xy),
                ("c_xxyy", full.c_xxyy, dicke.correlations.c_xxyy),
            ];
            println!("{:<8} {:>24} {:>24} {:>10}", "quantity", "full space", "dicke sector", "|diff|");
            for (name, a, b) in rows {
                println!("{name:<8} {a:>24.16e} {b:>24.16e} {:>10.2e}", (a - b).abs());
            }
        }
        Command::List => {
            for e in harness::REGISTRY {
                println!("{:<24} {}", e.name, e.description);
            }
        }
        Command::Defaults { experiment } => {
            print!("{}", harness::default_config(&experiment)?.to_toml()?);
        }
        Command::Verify { dir } => {
            RunManifest::load(&dir)?.verify(&dir)?;
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
