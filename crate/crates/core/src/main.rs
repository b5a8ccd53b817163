//! Threshold-sweep runner for outage-probability estimation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};

use outage_sim::runner::{self, RunConfig};

/// Estimates left-tail outage probabilities of diversity receivers over
/// bimodal fading via cross-entropy-optimized importance sampling, sweeping
/// a threshold grid and writing one CSV row per threshold.
#[derive(Debug, Parser)]
#[command(name = "outage-sim", version)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
struct Cli {
    /// Built-in scenario preset: exp-ln-l2, exp-ln-l4, exp-gg-l2, exp-gg-l4.
    #[arg(long)]
    preset: Option<String>,

    /// TOML configuration file (schema in the README).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed for all sampling.
    #[arg(long)]
    seed: Option<u64>,

    /// Importance-sampling samples per threshold.
    #[arg(long)]
    n_production: Option<u64>,

    /// Naive Monte Carlo samples per threshold.
    #[arg(long)]
    n_naive: Option<u64>,

    /// Cross-entropy rarity parameter.
    #[arg(long)]
    rho: Option<f64>,

    /// Relative accuracy target of the efficiency comparison.
    #[arg(long)]
    eps0: Option<f64>,

    /// Also write the per-iteration optimizer trace CSV next to the output.
    #[arg(long)]
    trace: bool,
}

fn build_config(cli: &Cli) -> outage_sim::Result<RunConfig> {
    let mut cfg = match (&cli.preset, &cli.config) {
        (Some(name), None) => runner::preset(name)?,
        (None, Some(path)) => runner::load_config(path)?,
        _ => unreachable!("clap enforces exactly one source"),
    };
    if let Some(out) = &cli.out {
        cfg.output_path = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.n_production {
        cfg.n_production = n;
    }
    if let Some(n) = cli.n_naive {
        cfg.n_naive = n;
    }
    if let Some(rho) = cli.rho {
        cfg.ce.rho = rho;
    }
    if let Some(eps0) = cli.eps0 {
        cfg.eps0 = eps0;
    }
    cfg.emit_trace |= cli.trace;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    eprintln!(
        "sweeping {} thresholds (L = {}, seed {}) -> {}",
        cfg.scenario.thresholds_db.len(),
        cfg.scenario.num_branches(),
        cfg.seed,
        cfg.output_path.display()
    );
    match runner::run_sweep(&cfg) {
        Ok(outcome) => {
            for row in &outcome.rows {
                match &row.failure {
                    None => eprintln!(
                        "gamma_th {:>6} dB: IS p_hat {:.6e} (rel err {:.2}%), naive p_hat {:.6e}, runs N {:.4e} vs N* {:.4e}",
                        row.gamma_th_db,
                        row.is_p_hat,
                        100.0 * row.is_rel_err,
                        row.naive_p_hat,
                        row.runs_naive,
                        row.runs_is,
                    ),
                    Some(reason) => {
                        eprintln!("gamma_th {:>6} dB: FAILED ({reason})", row.gamma_th_db)
                    }
                }
            }
            if outcome.failed_rows > 0 {
                eprintln!(
                    "{} of {} rows flagged",
                    outcome.failed_rows,
                    outcome.rows.len()
                );
            }
            ExitCode::from(outcome.exit_status() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
