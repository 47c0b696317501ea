//! Replication engine for empirical size/power tables and calibration
//! diagnostics.
//!
//! A grid cell is one (scenario, n, p, v) configuration; each cell runs
//! `reps` independent replications (draw, test, record). Replication `r` of
//! a cell seeds its own RNG substream from
//! `derive_seed(master_seed, [scenario, n, p, v, r])`, so no sequential RNG
//! state crosses replications and results are byte-identical for any thread
//! count. Aggregation happens in replication order after a join barrier.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use sphericity_core::diag;
use sphericity_core::dist::{derive_seed, sample, Scenario, ScenarioSpec};
use sphericity_core::testing::{
    john_statistic, sigma0, spearman_kendall_tests, Method, TestResult,
};

/// Full description of a simulation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenarios: Vec<Scenario>,
    pub n_list: Vec<usize>,
    pub p_list: Vec<usize>,
    pub v_list: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    /// Worker threads for the replication loop; `None` uses the rayon
    /// default for the machine.
    pub threads: Option<usize>,
    /// Mixture weight passed to scenario III.
    pub kappa: f64,
}

impl ExperimentConfig {
    /// A one-cell template with the defaults used throughout: alpha 0.05,
    /// 2000 replications, SR and SK.
    pub fn single(scenario: Scenario, n: usize, p: usize, v: f64, master_seed: u64) -> Self {
        ExperimentConfig {
            scenarios: vec![scenario],
            n_list: vec![n],
            p_list: vec![p],
            v_list: vec![v],
            reps: 2000,
            alpha: 0.05,
            methods: vec![Method::Spearman, Method::Kendall],
            master_seed,
            threads: None,
            kappa: 0.8,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.to_string()));
        if self.scenarios.is_empty() {
            return bad("scenarios must be non-empty");
        }
        if self.n_list.is_empty() || self.p_list.is_empty() || self.v_list.is_empty() {
            return bad("n_list, p_list, and v_list must be non-empty");
        }
        if self.reps < 1 {
            return bad("reps must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must be in (0, 1)");
        }
        if self.methods.is_empty() {
            return bad("methods must be non-empty");
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa must be in (0, 1)");
        }
        if self.v_list.iter().any(|v| !(*v >= 0.0 && *v <= 1.0)) {
            return bad("every v must be in [0, 1]");
        }
        Ok(())
    }

    /// Number of grid cells (scenario x n x p x v).
    pub fn cell_count(&self) -> usize {
        self.scenarios.len() * self.n_list.len() * self.p_list.len() * self.v_list.len()
    }
}

/// One statistic from one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    pub v: f64,
    pub rep: usize,
    pub method: Method,
    pub statistic: f64,
    pub sigma0: Option<f64>,
    pub z: Option<f64>,
    pub reject: Option<bool>,
}

/// Aggregates for one (cell, method) combination.
///
/// `rejection_rate` and `variance_ratio` are absent for John's statistic,
/// which carries no high-dimensional null calibration here; `mean_sd_ratio`
/// and `variance_ratio` are absent when fewer than two replications ran.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    pub v: f64,
    pub method: Method,
    pub reps: usize,
    pub rejection_rate: Option<f64>,
    pub mean_sd_ratio: Option<f64>,
    pub variance_ratio: Option<f64>,
    /// Wall time of the whole cell (shared across its methods). Not part
    /// of any emitted report, which must stay byte-deterministic.
    pub wall: Duration,
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub alpha: f64,
    pub master_seed: u64,
    pub cells: Vec<CellSummary>,
}

/// Errors from the replication engine.
#[derive(Debug)]
pub enum HarnessError {
    Config(String),
    /// A replication failed; the whole cell is aborted rather than
    /// silently shrinking the rejection-rate denominator.
    Cell {
        scenario: Scenario,
        n: usize,
        p: usize,
        v: f64,
        rep: usize,
        source: sphericity_core::Error,
    },
    Internal(String),
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(msg) => write!(f, "config error: {msg}"),
            HarnessError::Cell { scenario, n, p, v, rep, source } => write!(
                f,
                "cell ({scenario}, n={n}, p={p}, v={v}) failed at replication {rep}: {source}"
            ),
            HarnessError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for HarnessError {}

/// Run the experiment grid and aggregate per-cell summaries.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<McReport, HarnessError> {
    run_experiment_full(cfg).map(|(report, _)| report)
}

/// As [`run_experiment`], additionally returning the full per-replication
/// record stream (cell-major, then replication, then method order).
pub fn run_experiment_full(
    cfg: &ExperimentConfig,
) -> Result<(McReport, Vec<ReplicationRecord>), HarnessError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Internal(format!("thread pool: {e}")))?;
    pool.install(|| run_grid(cfg))
}

fn run_grid(cfg: &ExperimentConfig) -> Result<(McReport, Vec<ReplicationRecord>), HarnessError> {
    let mut cells = Vec::new();
    let mut records = Vec::new();
    for (scenario_idx, &scenario) in cfg.scenarios.iter().enumerate() {
        for &n in &cfg.n_list {
            for &p in &cfg.p_list {
                for &v in &cfg.v_list {
                    run_cell(cfg, scenario_idx, scenario, n, p, v, &mut cells, &mut records)?;
                }
            }
        }
    }
    Ok((
        McReport {
            alpha: cfg.alpha,
            master_seed: cfg.master_seed,
            cells,
        },
        records,
    ))
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    cfg: &ExperimentConfig,
    scenario_idx: usize,
    scenario: Scenario,
    n: usize,
    p: usize,
    v: f64,
    cells: &mut Vec<CellSummary>,
    records: &mut Vec<ReplicationRecord>,
) -> Result<(), HarnessError> {
    let start = Instant::now();
    let cell_err = |rep: usize, source: sphericity_core::Error| HarnessError::Cell {
        scenario,
        n,
        p,
        v,
        rep,
        source,
    };
    let wants_rank = cfg
        .methods
        .iter()
        .any(|m| matches!(m, Method::Spearman | Method::Kendall));

    let outcomes: Vec<Result<Vec<TestResult>, HarnessError>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(
                cfg.master_seed,
                &[scenario_idx as u64, n as u64, p as u64, v.to_bits(), rep as u64],
            );
            let spec = ScenarioSpec::new(scenario, n, p, v, seed).with_kappa(cfg.kappa);
            let x = sample(&spec).map_err(|e| cell_err(rep, e))?;

            let rank_pair = if wants_rank {
                Some(spearman_kendall_tests(&x, cfg.alpha).map_err(|e| cell_err(rep, e))?)
            } else {
                None
            };
            cfg.methods
                .iter()
                .map(|method| match method {
                    Method::Spearman => Ok(rank_pair.as_ref().unwrap().0.clone()),
                    Method::Kendall => Ok(rank_pair.as_ref().unwrap().1.clone()),
                    Method::John => john_statistic(&x).map_err(|e| cell_err(rep, e)),
                })
                .collect()
        })
        .collect();
    // fold after the join barrier, in replication order
    let mut per_rep = Vec::with_capacity(cfg.reps);
    for outcome in outcomes {
        per_rep.push(outcome?);
    }
    let wall = start.elapsed();

    for (m_idx, &method) in cfg.methods.iter().enumerate() {
        let mut stats = Vec::with_capacity(cfg.reps);
        let mut rejections = 0usize;
        for results in &per_rep {
            let r = &results[m_idx];
            stats.push(r.statistic);
            if r.reject == Some(true) {
                rejections += 1;
            }
        }
        let rejection_rate = match method {
            Method::John => None,
            _ => Some(rejections as f64 / cfg.reps as f64),
        };
        let variance_ratio = match method {
            Method::John => None,
            _ => {
                let s0 = sigma0(n, p).map_err(|e| cell_err(0, e))?;
                diag::variance_ratio(&stats, s0 * s0).ok()
            }
        };
        cells.push(CellSummary {
            scenario,
            n,
            p,
            v,
            method,
            reps: cfg.reps,
            rejection_rate,
            mean_sd_ratio: diag::mean_sd_ratio(&stats).ok(),
            variance_ratio,
            wall,
        });
    }

    for (rep, results) in per_rep.iter().enumerate() {
        for r in results {
            records.push(ReplicationRecord {
                scenario,
                n,
                p,
                v,
                rep,
                method: r.method,
                statistic: r.statistic,
                sigma0: r.sigma0,
                z: r.z,
                reject: r.reject,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rep_gives_binary_rates() {
        let mut cfg = ExperimentConfig::single(Scenario::StandardNormal, 8, 5, 0.0, 7);
        cfg.reps = 1;
        let (report, records) = run_experiment_full(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2); // SR and SK
        for cell in &report.cells {
            let rate = cell.rejection_rate.unwrap();
            assert!(rate == 0.0 || rate == 1.0);
            assert_eq!(cell.mean_sd_ratio, None); // needs >= 2 reps
        }
        assert_eq!(records.len(), 2);
    }

    #[test]
    fn rates_recompute_exactly_from_records() {
        let mut cfg = ExperimentConfig::single(Scenario::StandardNormal, 10, 8, 0.0, 3);
        cfg.reps = 25;
        let (report, records) = run_experiment_full(&cfg).unwrap();
        for cell in &report.cells {
            let rejections = records
                .iter()
                .filter(|r| r.method == cell.method && r.reject == Some(true))
                .count();
            assert_eq!(cell.rejection_rate.unwrap(), rejections as f64 / 25.0);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut one = ExperimentConfig::single(Scenario::MultivariateT4, 8, 10, 0.15, 11);
        one.reps = 16;
        one.threads = Some(1);
        let mut eight = one.clone();
        eight.threads = Some(8);
        let (ra, recs_a) = run_experiment_full(&one).unwrap();
        let (rb, recs_b) = run_experiment_full(&eight).unwrap();
        assert_eq!(recs_a, recs_b);
        assert_eq!(ra.cells.len(), rb.cells.len());
        for (a, b) in ra.cells.iter().zip(&rb.cells) {
            assert_eq!(
                (a.rejection_rate, a.mean_sd_ratio, a.variance_ratio),
                (b.rejection_rate, b.mean_sd_ratio, b.variance_ratio)
            );
        }
    }

    #[test]
    fn john_rows_have_no_rate() {
        let mut cfg = ExperimentConfig::single(Scenario::StandardNormal, 8, 4, 0.0, 5);
        cfg.reps = 4;
        cfg.methods = vec![Method::Spearman, Method::John];
        let report = run_experiment(&cfg).unwrap();
        let john = report.cells.iter().find(|c| c.method == Method::John).unwrap();
        assert_eq!(john.rejection_rate, None);
        assert_eq!(john.variance_ratio, None);
        assert!(john.mean_sd_ratio.is_some());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let ok = ExperimentConfig::single(Scenario::StandardNormal, 8, 4, 0.0, 5);
        for broken in [
            ExperimentConfig { reps: 0, ..ok.clone() },
            ExperimentConfig { alpha: 1.0, ..ok.clone() },
            ExperimentConfig { n_list: vec![], ..ok.clone() },
            ExperimentConfig { methods: vec![], ..ok.clone() },
            ExperimentConfig { v_list: vec![1.5], ..ok.clone() },
        ] {
            match run_experiment(&broken) {
                Err(HarnessError::Config(_)) => {}
                other => panic!("expected config error, got {other:?}"),
            }
        }
    }

    #[test]
    fn cell_failure_carries_coordinates() {
        // n = 3 is below the SR/SK minimum, so the first replication fails
        let cfg = ExperimentConfig::single(Scenario::StandardNormal, 3, 4, 0.0, 5);
        match run_experiment(&cfg) {
            Err(HarnessError::Cell { n: 3, p: 4, .. }) => {}
            other => panic!("expected cell error, got {other:?}"),
        }
    }

    #[test]
    fn grid_arithmetic() {
        let cfg = ExperimentConfig {
            scenarios: Scenario::ALL.to_vec(),
            n_list: vec![20, 30],
            p_list: vec![100, 200, 400, 800],
            v_list: vec![0.0, 0.15, 0.3],
            ..ExperimentConfig::single(Scenario::StandardNormal, 8, 4, 0.0, 5)
        };
        assert_eq!(cfg.cell_count(), 120);
    }
}
