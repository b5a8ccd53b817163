//! Configuration-driven threshold sweeps with CSV output.
//!
//! A sweep walks the threshold grid of a [`Scenario`]; for each threshold it
//! optimizes the biased scales, runs the production importance-sampling
//! estimate on fresh streams, runs the naive Monte Carlo baseline, computes
//! the efficiency comparison, and appends one CSV row. Four compiled-in
//! presets cover the standard two- and four-branch parameter sets of both
//! mixture models, so the reference curves can be reproduced without any
//! external configuration file.
//!
//! The sweep over thresholds is sequential to keep seed derivation
//! auditable; the estimators inside each threshold parallelize on their own
//! terms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ce::{ce_optimize, CEConfig, CETrace};
use crate::distributions::{threshold_linear, BranchParams};
use crate::efficiency::{EfficiencyReport, DEFAULT_EPS0};
use crate::error::{Error, Result};
use crate::estimators::{is_estimate, naive_mc, Scenario};
use crate::rng::derive_seed;
use crate::CONFIDENCE_C;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N_PRODUCTION: u64 = 10_000;
pub const DEFAULT_N_NAIVE: u64 = 10_000_000;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["exp-ln-l2", "exp-ln-l4", "exp-gg-l2", "exp-gg-l4"];

// seed-derivation tags; one namespace per sampling purpose
const TAG_CE: u64 = 1;
const TAG_IS: u64 = 2;
const TAG_NAIVE: u64 = 3;

/// Everything one sweep needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Cross-entropy settings; the per-threshold pilot seed is derived from
    /// `seed`, so the `ce.seed` field is ignored by the sweep.
    pub ce: CEConfig,
    /// Production IS samples per threshold.
    pub n_production: u64,
    /// Naive Monte Carlo samples per threshold.
    pub n_naive: u64,
    /// Relative accuracy target of the efficiency comparison.
    pub eps0: f64,
    /// Confidence constant of the efficiency comparison.
    pub c: f64,
    /// Master seed; every stream of the sweep derives from it.
    pub seed: u64,
    pub output_path: PathBuf,
    /// Also write a companion CSV with the per-iteration optimizer trace.
    pub emit_trace: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.scenario.thresholds_db.is_empty() {
            return Err(Error::validation("threshold grid must be non-empty"));
        }
        self.ce.validate()?;
        if self.n_production == 0 {
            return Err(Error::validation("n_production must be at least 1"));
        }
        if self.n_naive == 0 {
            return Err(Error::validation("n_naive must be at least 1"));
        }
        if !(self.eps0.is_finite() && self.eps0 > 0.0) {
            return Err(Error::validation(format!(
                "eps0 must be strictly positive, got {}",
                self.eps0
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::validation(format!(
                "c must be strictly positive, got {}",
                self.c
            )));
        }
        if let Some(parent) = self.output_path.parent() {
            if !parent.as_os_str().is_empty() && !parent.is_dir() {
                return Err(Error::validation(format!(
                    "output directory {} does not exist",
                    parent.display()
                )));
            }
        }
        Ok(())
    }
}

const TABLE_LAMBDAS: [f64; 4] = [0.5389, 0.9786, 0.4854, 0.224];
const EXPLN_OMEGA: f64 = 0.2045;
const EXPLN_MU: f64 = 0.1117;
const EXPLN_SIGMA: f64 = 0.0253;
const EXPGG_OMEGA: f64 = 0.4876;
const EXPGG_ALPHA: f64 = 3.275;
const EXPGG_BETA: f64 = 1.45;
const EXPGG_SCALE: f64 = 1.0;

fn default_thresholds() -> Vec<f64> {
    (-10..=5).map(f64::from).collect()
}

fn preset_scenario(name: &str) -> Result<Scenario> {
    let branches: Vec<BranchParams> = match name {
        "exp-ln-l2" | "exp-ln-l4" => {
            let l = if name.ends_with("l2") { 2 } else { 4 };
            TABLE_LAMBDAS[..l]
                .iter()
                .map(|&lambda| BranchParams::ExpLogNormal {
                    omega: EXPLN_OMEGA,
                    lambda,
                    mu: EXPLN_MU,
                    sigma: EXPLN_SIGMA,
                })
                .collect()
        }
        "exp-gg-l2" | "exp-gg-l4" => {
            let l = if name.ends_with("l2") { 2 } else { 4 };
            TABLE_LAMBDAS[..l]
                .iter()
                .map(|&lambda| BranchParams::ExpGenGamma {
                    omega: EXPGG_OMEGA,
                    lambda,
                    alpha: EXPGG_ALPHA,
                    beta: EXPGG_BETA,
                    gg_scale: EXPGG_SCALE,
                })
                .collect()
        }
        other => {
            return Err(Error::validation(format!(
                "unknown preset {other:?}; expected one of {PRESET_NAMES:?}"
            )))
        }
    };
    Ok(Scenario {
        branches,
        snr_per_symbol_db: 10.0,
        thresholds_db: default_thresholds(),
    })
}

/// A compiled-in scenario with default sweep settings.
pub fn preset(name: &str) -> Result<RunConfig> {
    Ok(RunConfig {
        scenario: preset_scenario(name)?,
        ce: CEConfig::default(),
        n_production: DEFAULT_N_PRODUCTION,
        n_naive: DEFAULT_N_NAIVE,
        eps0: DEFAULT_EPS0,
        c: CONFIDENCE_C,
        seed: DEFAULT_SEED,
        output_path: PathBuf::from("sweep.csv"),
        emit_trace: false,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCeSection {
    rho: Option<f64>,
    n_pilot: Option<u64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Scenario,
    ce: Option<RawCeSection>,
    n_production: Option<u64>,
    n_naive: Option<u64>,
    eps0: Option<f64>,
    c: Option<f64>,
    seed: Option<u64>,
    output_path: Option<PathBuf>,
    emit_trace: Option<bool>,
}

/// Loads and validates a TOML configuration file (schema in the README).
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut ce = CEConfig::default();
    if let Some(s) = raw.ce {
        if let Some(rho) = s.rho {
            ce.rho = rho;
        }
        if let Some(n_pilot) = s.n_pilot {
            ce.n_pilot = n_pilot;
        }
        if let Some(max_iter) = s.max_iter {
            ce.max_iter = max_iter;
        }
    }
    let cfg = RunConfig {
        scenario: raw.scenario,
        ce,
        n_production: raw.n_production.unwrap_or(DEFAULT_N_PRODUCTION),
        n_naive: raw.n_naive.unwrap_or(DEFAULT_N_NAIVE),
        eps0: raw.eps0.unwrap_or(DEFAULT_EPS0),
        c: raw.c.unwrap_or(CONFIDENCE_C),
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        output_path: raw
            .output_path
            .unwrap_or_else(|| PathBuf::from("sweep.csv")),
        emit_trace: raw.emit_trace.unwrap_or(false),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One CSV row of a sweep. Failed stages leave NaN in their columns; a
/// zero-hit naive run reports `p_hat` 0 with an infinite relative error.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub gamma_th_db: f64,
    pub gamma0: f64,
    pub is_p_hat: f64,
    pub is_rel_err: f64,
    pub naive_p_hat: f64,
    pub naive_rel_err: f64,
    pub runs_naive: f64,
    pub runs_is: f64,
    pub ce_iterations: usize,
    pub seed: u64,
    /// Why the importance-sampling stage failed, when it did.
    pub failure: Option<String>,
}

/// Result of a full sweep.
#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// One optimizer trace per successfully converged threshold.
    pub traces: Vec<CETrace>,
    pub failed_rows: usize,
}

impl SweepOutcome {
    /// Process exit status: 0 for a clean sweep, 1 when rows were flagged.
    pub fn exit_status(&self) -> i32 {
        if self.failed_rows == 0 {
            0
        } else {
            1
        }
    }
}

/// Runs the sweep and writes the CSV outputs.
///
/// A threshold whose optimizer or production estimate degenerates is
/// flagged and the sweep continues; I/O failures abort with an error after
/// a best-effort partial-file marker.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let l = cfg.scenario.num_branches();
    let mut rows = Vec::with_capacity(cfg.scenario.thresholds_db.len());
    let mut traces = Vec::new();
    let mut failed = 0usize;

    for (i, &gamma_th_db) in cfg.scenario.thresholds_db.iter().enumerate() {
        let gamma0 = threshold_linear(gamma_th_db, cfg.scenario.snr_per_symbol_db);
        let mut row = SweepRow {
            gamma_th_db,
            gamma0,
            is_p_hat: f64::NAN,
            is_rel_err: f64::NAN,
            naive_p_hat: f64::NAN,
            naive_rel_err: f64::NAN,
            runs_naive: f64::NAN,
            runs_is: f64::NAN,
            ce_iterations: 0,
            seed: cfg.seed,
            failure: None,
        };

        let ce_cfg = CEConfig {
            seed: derive_seed(cfg.seed, TAG_CE, i as u64),
            ..cfg.ce
        };
        match ce_optimize(&cfg.scenario, gamma0, &ce_cfg) {
            Ok((nu, trace)) => {
                row.ce_iterations = trace.iterations.len();
                traces.push(trace);
                // production run on fresh streams, never the pilot sample
                let is_seed = derive_seed(cfg.seed, TAG_IS, i as u64);
                match is_estimate(&cfg.scenario, gamma0, &nu, cfg.n_production, is_seed) {
                    Ok(is) => {
                        row.is_p_hat = is.p_hat;
                        row.is_rel_err = is.relative_error;
                        match EfficiencyReport::from_is_estimate(&is, cfg.eps0, cfg.c) {
                            Ok(eff) => {
                                row.runs_naive = eff.runs_naive;
                                row.runs_is = eff.runs_is;
                            }
                            Err(e) => row.failure = Some(e.to_string()),
                        }
                    }
                    Err(e) => row.failure = Some(e.to_string()),
                }
            }
            Err(e) => row.failure = Some(e.to_string()),
        }

        let naive_seed = derive_seed(cfg.seed, TAG_NAIVE, i as u64);
        let naive = naive_mc(&cfg.scenario, gamma0, cfg.n_naive, naive_seed)?;
        row.naive_p_hat = naive.p_hat;
        row.naive_rel_err = naive.relative_error;

        if row.failure.is_some() {
            failed += 1;
        }
        rows.push(row);
    }

    write_csv(&rows, &cfg.output_path)?;
    if cfg.emit_trace {
        write_trace_csv(&traces, l, &trace_path(&cfg.output_path))?;
    }
    Ok(SweepOutcome {
        rows,
        traces,
        failed_rows: failed,
    })
}

/// Companion trace file path: `sweep.csv` -> `sweep.trace.csv`.
pub fn trace_path(output: &Path) -> PathBuf {
    let mut p = output.to_path_buf();
    p.set_extension("trace.csv");
    p
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes sweep rows in the fixed column order. Floats are printed in
/// shortest round-trip decimal form (`inf` and `NaN` for the sentinels);
/// lines end with LF.
pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let result = (|| -> std::io::Result<()> {
        w.write_all(
            b"gamma_th_db,gamma0,is_p_hat,is_rel_err,naive_p_hat,naive_rel_err,runs_naive,runs_is,ce_iterations,seed\n",
        )?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.gamma_th_db,
                r.gamma0,
                r.is_p_hat,
                r.is_rel_err,
                r.naive_p_hat,
                r.naive_rel_err,
                r.runs_naive,
                r.runs_is,
                r.ce_iterations,
                r.seed
            )?;
        }
        w.flush()
    })();
    if let Err(source) = result {
        // best-effort marker so a truncated file is recognizable
        let _ = w.write_all(b"# aborted\n");
        let _ = w.flush();
        return Err(Error::Io {
            path: path.to_path_buf(),
            source,
        });
    }
    Ok(())
}

/// Writes optimizer traces: one block of rows per threshold, `t` restarting
/// at 1 at each block boundary.
pub fn write_trace_csv(traces: &[CETrace], l: usize, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let result = (|| -> std::io::Result<()> {
        write!(w, "t,gamma_hat")?;
        for i in 1..=l {
            write!(w, ",nu_{i}")?;
        }
        writeln!(w)?;
        for trace in traces {
            for it in &trace.iterations {
                write!(w, "{},{}", it.t, it.gamma_hat)?;
                for v in &it.nu_hat {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()
    })();
    result.map_err(io_err(path))
}
