//! Experiment sweeps: every cell of a protocol × family × (n, m) grid is run
//! for a number of seeded trials, each output is checked by the protocol's
//! declared fairness checker, and per-cell statistics are aggregated.
//!
//! Trial `t` of a cell draws its instance from seed
//! `derive_seed(master, "instance/<family>/<n>/<m>", t)` and runs the
//! protocol with common random string `derive_seed(master, "<protocol>", t)`,
//! so trials are independent and rows are reproducible from the master seed
//! alone. Trials run in parallel; aggregation follows trial order.

use std::time::Instant;

use fairbits_core::channel::{derive_seed, Crs};
use fairbits_core::protocols::{ProtocolError, ProtocolId};
use fairbits_core::shares::{check, ShareError};
use rayon::prelude::*;
use serde::Deserialize;

use crate::format::serialize_instance;
use crate::names::{FamilySpec, NameError};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub trials: usize,
    #[serde(default, rename = "cell")]
    pub cells: Vec<CellConfig>,
}

/// One block of the grid. `m` lists item counts directly; `m_per_n` lists
/// ratios `m / n`. The `precondition` family ignores both and `n`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub protocol: Vec<String>,
    pub family: Vec<String>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default)]
    pub m_per_n: Vec<usize>,
    pub trials: Option<usize>,
}

/// A fully resolved grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub protocol: ProtocolId,
    pub family: FamilySpec,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub integer_bits: u64,
    pub idealized_bits: f64,
    pub pass: bool,
    pub sad: Option<usize>,
    pub attempts: usize,
    pub queries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub protocol: String,
    pub family: String,
    /// Configured grid point; 0 for the precondition family, whose trials
    /// pick their own sizes.
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mean_integer_bits: f64,
    pub mean_idealized_bits: f64,
    pub mean_bits_per_agent: f64,
    pub max_bits: u64,
    pub fairness_pass_rate: f64,
    /// Mean sad-agent count of the binary protocol.
    pub mean_sad: Option<f64>,
    pub mean_attempts: f64,
    pub mean_queries: f64,
    /// Seconds, only when timing is requested.
    pub wall_time: Option<f64>,
    pub records: Vec<TrialRecord>,
}

/// Everything needed to rerun a failing trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reproducer {
    pub protocol: String,
    pub family: String,
    pub trial: usize,
    pub instance_seed: u64,
    pub crs_seed: u64,
    pub instance: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("bad sweep configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Name(#[from] NameError),
    #[error("unknown protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("cannot generate {family} with n = {n}, m = {m}: {why}")]
    Generate { family: String, n: usize, m: usize, why: String },
    #[error("{protocol} failed on trial {} (instance seed {}, crs seed {}): {why}", .reproducer.trial, .reproducer.instance_seed, .reproducer.crs_seed)]
    Run { protocol: String, why: String, reproducer: Box<Reproducer> },
    #[error("{protocol} output is unfair on trial {} (instance seed {}, crs seed {})", .reproducer.trial, .reproducer.instance_seed, .reproducer.crs_seed)]
    Unfair { protocol: String, reproducer: Box<Reproducer> },
    #[error("checker unavailable: {0}")]
    Checker(#[from] ShareError),
}

impl SweepError {
    pub fn reproducer(&self) -> Option<&Reproducer> {
        match self {
            SweepError::Run { reproducer, .. } | SweepError::Unfair { reproducer, .. } => Some(reproducer),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub timing: bool,
    /// Record unfair trials in the pass rate instead of aborting the row.
    pub keep_going: bool,
    /// Keep per-trial records in the rows.
    pub records: bool,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        toml::from_str(text).map_err(|e| SweepError::Config(e.to_string()))
    }

    /// The grid in emission order: cells in file order, then protocol,
    /// family, `n` and `m`.
    pub fn cells(&self) -> Result<Vec<Cell>, SweepError> {
        let mut out = Vec::new();
        for c in &self.cells {
            let trials = c.trials.unwrap_or(self.trials);
            if trials == 0 {
                return Err(SweepError::Config("trials must be at least 1".into()));
            }
            if !c.m.is_empty() && !c.m_per_n.is_empty() {
                return Err(SweepError::Config("give either m or m_per_n, not both".into()));
            }
            for p in &c.protocol {
                let protocol: ProtocolId = p.parse()?;
                for f in &c.family {
                    let family: FamilySpec = f.parse()?;
                    if family == FamilySpec::Precondition {
                        out.push(Cell { protocol, family, n: 0, m: 0, trials });
                        continue;
                    }
                    for &n in &c.n {
                        let ms: Vec<usize> =
                            if c.m_per_n.is_empty() { c.m.clone() } else { c.m_per_n.iter().map(|r| r * n).collect() };
                        out.extend(ms.into_iter().map(|m| Cell { protocol, family, n, m, trials }));
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn run_sweep(config: &SweepConfig, options: SweepOptions) -> Result<Vec<ExperimentRow>, SweepError> {
    config.cells()?.into_iter().map(|cell| run_cell(cell, config.seed, options)).collect()
}

fn trial_seeds(cell: &Cell, master: u64, trial: usize) -> (u64, u64) {
    let label = format!("instance/{}/{}/{}", cell.family, cell.n, cell.m);
    (derive_seed(master, &label, trial as u64), derive_seed(master, &cell.protocol.to_string(), trial as u64))
}

pub fn run_cell(cell: Cell, master: u64, options: SweepOptions) -> Result<ExperimentRow, SweepError> {
    let start = Instant::now();
    let results: Vec<Result<TrialRecord, SweepError>> =
        (0..cell.trials).into_par_iter().map(|t| run_trial(&cell, master, t, options)).collect();
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let wall = start.elapsed().as_secs_f64();

    let count = records.len() as f64;
    let mean = |f: &dyn Fn(&TrialRecord) -> f64| records.iter().map(f).sum::<f64>() / count;
    let sads: Vec<usize> = records.iter().filter_map(|r| r.sad).collect();
    Ok(ExperimentRow {
        protocol: cell.protocol.to_string(),
        family: cell.family.to_string(),
        n: cell.n,
        m: cell.m,
        trials: cell.trials,
        mean_integer_bits: mean(&|r| r.integer_bits as f64),
        mean_idealized_bits: mean(&|r| r.idealized_bits),
        mean_bits_per_agent: mean(&|r| r.integer_bits as f64 / r.n as f64),
        max_bits: records.iter().map(|r| r.integer_bits).max().unwrap_or(0),
        fairness_pass_rate: records.iter().filter(|r| r.pass).count() as f64 / count,
        mean_sad: (!sads.is_empty()).then(|| sads.iter().sum::<usize>() as f64 / sads.len() as f64),
        mean_attempts: mean(&|r| r.attempts as f64),
        mean_queries: mean(&|r| r.queries as f64),
        wall_time: options.timing.then_some(wall),
        records: if options.records { records } else { Vec::new() },
    })
}

fn run_trial(cell: &Cell, master: u64, trial: usize, options: SweepOptions) -> Result<TrialRecord, SweepError> {
    let (instance_seed, crs_seed) = trial_seeds(cell, master, trial);
    let inst = cell.family.generate(cell.protocol, cell.n, cell.m, instance_seed).map_err(|e| {
        SweepError::Generate { family: cell.family.to_string(), n: cell.n, m: cell.m, why: e.to_string() }
    })?;
    let reproducer = || {
        Box::new(Reproducer {
            protocol: cell.protocol.to_string(),
            family: cell.family.to_string(),
            trial,
            instance_seed,
            crs_seed,
            instance: serialize_instance(&inst),
        })
    };
    let out = cell.protocol.run(&inst, &Crs::new(crs_seed)).map_err(|e| SweepError::Run {
        protocol: cell.protocol.to_string(),
        why: e.to_string(),
        reproducer: reproducer(),
    })?;
    let pass = check(&inst, &out.allocation, cell.protocol.declared_notion(inst.n()))?.iter().all(|v| v.pass);
    if !pass && !options.keep_going {
        return Err(SweepError::Unfair { protocol: cell.protocol.to_string(), reproducer: reproducer() });
    }
    Ok(TrialRecord {
        trial,
        n: inst.n(),
        m: inst.m(),
        integer_bits: out.transcript.integer_bits(),
        idealized_bits: out.transcript.idealized_bits(),
        pass,
        sad: out.diagnostics.sad,
        attempts: out.diagnostics.attempts,
        queries: out.diagnostics.queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_gives_no_rows() {
        let cfg = SweepConfig::from_toml("seed = 1\ntrials = 5\n").unwrap();
        assert!(run_sweep(&cfg, SweepOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn grid_expansion_order() {
        let cfg = SweepConfig::from_toml(
            "seed = 1\ntrials = 5\n[[cell]]\nprotocol = [\"rud\", \"ud-det\"]\nfamily = [\"ud-top-n\"]\nn = [2, 3]\nm_per_n = [2, 4]\n",
        )
        .unwrap();
        let cells = cfg.cells().unwrap();
        let got: Vec<(String, usize, usize)> = cells.iter().map(|c| (c.protocol.to_string(), c.n, c.m)).collect();
        assert_eq!(got[..4], [("rud".into(), 2, 4), ("rud".into(), 2, 8), ("rud".into(), 3, 6), ("rud".into(), 3, 12)]);
        assert_eq!(cells.len(), 8);
    }

    #[test]
    fn rows_are_reproducible() {
        let cfg = SweepConfig::from_toml(
            "seed = 9\ntrials = 20\n[[cell]]\nprotocol = [\"prop1-det\"]\nfamily = [\"uniform-additive:9\"]\nn = [3]\nm = [12]\n",
        )
        .unwrap();
        let opts = SweepOptions { records: true, ..Default::default() };
        let a = run_sweep(&cfg, opts).unwrap();
        assert_eq!(a, run_sweep(&cfg, opts).unwrap());
        assert_eq!(a[0].fairness_pass_rate, 1.0);
        assert_eq!(a[0].records.len(), 20);
    }

    #[test]
    fn config_errors() {
        assert!(SweepConfig::from_toml("seed = 1\n").is_err());
        let bad =
            SweepConfig::from_toml("seed = 1\ntrials = 1\n[[cell]]\nprotocol = [\"nope\"]\nfamily = [\"ud-top-n\"]\n")
                .unwrap();
        assert!(bad.cells().is_err());
    }
}
