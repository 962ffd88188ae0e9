//! Seeded Monte Carlo harness: for every `(h, trial)` pair, draw uniform nodes, sample
//! the test function, and record the leave-one-out score next to the quadrature risk.
//!
//! Trial `t` of grid point `j` always draws its nodes from ChaCha stream
//! `(j << 32) | t` of the configured seed, so results do not depend on thread count or
//! completion order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    epsilon_bound, gamma_gumbel, gamma_upper_or_gumbel, ALPHA_CV, ALPHA_DIFF, ALPHA_RISK,
};
use crate::cross_validation::loo_cv_fast;
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelFamily;
use crate::shepard::{default_grid_size, SampleSet, ShepardModel, TestFunction, UndefinedPolicy};
use crate::torus::{sample_uniform_with, substream_rng, NodeSet};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SHEPARD_CV_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSource {
    #[serde(alias = "sum")]
    ExactSum,
    Gumbel,
    #[serde(alias = "mc")]
    MonteCarlo,
}

impl std::str::FromStr for GammaSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" | "exact_sum" => Ok(GammaSource::ExactSum),
            "gumbel" => Ok(GammaSource::Gumbel),
            "mc" | "monte_carlo" => Ok(GammaSource::MonteCarlo),
            other => Err(invalid(format!(
                "unknown gamma source '{other}' (expected sum|gumbel|mc)"
            ))),
        }
    }
}

/// Named test function plus optional overrides of its declared constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestFunctionSpec {
    pub preset: String,
    /// Level of the `constant` preset.
    pub value: Option<f64>,
    pub lipschitz: Option<f64>,
    pub sup_norm: Option<f64>,
}

impl Default for TestFunctionSpec {
    fn default() -> Self {
        TestFunctionSpec {
            preset: "sine".into(),
            value: None,
            lipschitz: None,
            sup_norm: None,
        }
    }
}

impl TestFunctionSpec {
    pub fn build(&self) -> Result<TestFunction> {
        TestFunction::preset(&self.preset, self.value)?
            .with_constants(self.lipschitz, self.sup_norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub trials: usize,
    pub h_grid: Vec<f64>,
    pub seed: u64,
    /// Risk quadrature points; `None` means `10 n`.
    pub grid_size: Option<usize>,
    pub kernel: String,
    pub test_function: TestFunctionSpec,
    pub gamma_source: GammaSource,
    pub p_fail: f64,
    pub policy: UndefinedPolicy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 10_000,
            trials: 1_000,
            h_grid: log_spaced(50.0, 2500.0, 50),
            seed: 0,
            grid_size: None,
            kernel: "hat".into(),
            test_function: TestFunctionSpec::default(),
            gamma_source: GammaSource::MonteCarlo,
            p_fail: 0.1,
            policy: UndefinedPolicy::NearestNode,
        }
    }
}

impl ExperimentConfig {
    /// A laptop-sized run: `n = 2000`, 200 trials, 20 values of `h` in `[80, 260]`.
    pub fn desk() -> Self {
        ExperimentConfig {
            n: 2000,
            trials: 200,
            h_grid: log_spaced(80.0, 260.0, 20),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        if self.trials < 1 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.h_grid.is_empty() {
            return Err(invalid("h_grid must not be empty"));
        }
        if let Some(h) = self.h_grid.iter().find(|h| !(**h > 0.0) || !h.is_finite()) {
            return Err(invalid(format!(
                "every h must be positive and finite, got {h}"
            )));
        }
        if self.grid_size == Some(0) {
            return Err(invalid("grid_size must be at least 1"));
        }
        if !(self.p_fail > 0.0 && self.p_fail < 1.0) {
            return Err(invalid(format!(
                "p_fail must lie in (0, 1), got {}",
                self.p_fail
            )));
        }
        if self.h_grid.len() > u32::MAX as usize || self.trials > u32::MAX as usize {
            return Err(invalid("h_grid and trials must each fit in 32 bits"));
        }
        KernelFamily::by_name(&self.kernel, 1.0)?;
        self.test_function.build()?;
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size.unwrap_or_else(|| default_grid_size(self.n))
    }
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            v[0] = lo;
            v[count - 1] = hi;
            v
        }
    }
}

/// Stream index of trial `trial` at grid position `h_index`.
pub fn trial_stream(h_index: usize, trial: usize) -> u64 {
    ((h_index as u64) << 32) | trial as u64
}

/// Nodes of one trial.
pub fn trial_nodes(seed: u64, h_index: usize, trial: usize, n: usize) -> Result<NodeSet> {
    sample_uniform_with(&mut substream_rng(seed, trial_stream(h_index, trial)), n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub h: f64,
    pub trial: u64,
    /// `NaN` if the trial failed under the `error` policy.
    pub cv: f64,
    pub risk: f64,
    pub in_xi: bool,
    pub skipped_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub h: f64,
    pub mean_cv: f64,
    pub mean_risk: f64,
    pub q05_cv: f64,
    pub q95_cv: f64,
    pub q05_risk: f64,
    pub q95_risk: f64,
    pub q90_absdiff: f64,
    pub gamma: f64,
    /// `NaN` where the bound is vacuous (`gamma >= p_fail / 2`).
    pub eps_risk: f64,
    pub eps_cv: f64,
    pub eps_diff: f64,
}

/// Order statistic at position `ceil(q len) - 1` (clamped) of the ascending sort.
///
/// A `1e-9` allowance absorbs floating-point noise in `q len`, so `q = 0.95` of 200
/// values selects the 190th, not the 191st.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("quantile of an empty list"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!(
            "quantile level must lie in [0, 1], got {q}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q * sorted.len() as f64 - 1e-9).ceil() as isize - 1;
    let idx = rank.clamp(0, sorted.len() as isize - 1) as usize;
    Ok(sorted[idx])
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn quantile_or_nan(values: &[f64], q: f64) -> f64 {
    quantile(values, q).unwrap_or(f64::NAN)
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.or_else(threads_from_env) {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn run_trial(
    cfg: &ExperimentConfig,
    f: &TestFunction,
    h_index: usize,
    h: f64,
    trial: usize,
) -> Result<ExperimentRecord> {
    let nodes = trial_nodes(cfg.seed, h_index, trial, cfg.n)?;
    let in_xi = nodes.xi_membership(h)?;
    let samples = SampleSet::from_function(nodes, f);
    let kernel = KernelFamily::by_name(&cfg.kernel, h)?;
    let (cv, skipped_count) = match loo_cv_fast(&samples, &kernel, cfg.policy) {
        Ok(res) => (res.score, res.skipped.len()),
        Err(_) => (f64::NAN, 0),
    };
    let model = ShepardModel::fit(samples, kernel, cfg.policy)?;
    let risk = model.risk_estimate(f, cfg.grid_size()).unwrap_or(f64::NAN);
    Ok(ExperimentRecord {
        h,
        trial: trial as u64,
        cv,
        risk,
        in_xi,
        skipped_count,
    })
}

/// Runs every `(h, trial)` pair and aggregates per `h`.
///
/// Records come back ordered by `h` index, then trial. Uses [`THREADS_ENV`] workers
/// when set, otherwise rayon's default.
pub fn run_experiment(
    cfg: &ExperimentConfig,
) -> Result<(Vec<ExperimentRecord>, Vec<AggregateRow>)> {
    run_experiment_with_threads(cfg, None)
}

pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<(Vec<ExperimentRecord>, Vec<AggregateRow>)> {
    cfg.validate()?;
    let f = cfg.test_function.build()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.h_grid.len())
        .flat_map(|j| (0..cfg.trials).map(move |t| (j, t)))
        .collect();
    let records = with_pool(threads, || {
        jobs.par_iter()
            .map(|&(j, t)| run_trial(cfg, &f, j, cfg.h_grid[j], t))
            .collect::<Result<Vec<_>>>()
    })??;
    let rows = cfg
        .h_grid
        .iter()
        .zip(records.chunks(cfg.trials))
        .map(|(&h, chunk)| aggregate(cfg, &f, h, chunk))
        .collect::<Result<Vec<_>>>()?;
    Ok((records, rows))
}

fn aggregate(
    cfg: &ExperimentConfig,
    f: &TestFunction,
    h: f64,
    chunk: &[ExperimentRecord],
) -> Result<AggregateRow> {
    let cvs: Vec<f64> = chunk
        .iter()
        .map(|r| r.cv)
        .filter(|v| v.is_finite())
        .collect();
    let risks: Vec<f64> = chunk
        .iter()
        .map(|r| r.risk)
        .filter(|v| v.is_finite())
        .collect();
    let diffs: Vec<f64> = chunk
        .iter()
        .map(|r| (r.cv - r.risk).abs())
        .filter(|v| v.is_finite())
        .collect();
    let n = cfg.n as u64;
    let gamma = match cfg.gamma_source {
        GammaSource::ExactSum => gamma_upper_or_gumbel(n, h)?.value,
        GammaSource::Gumbel => gamma_gumbel(n, h)?.value,
        GammaSource::MonteCarlo => {
            chunk.iter().filter(|r| !r.in_xi).count() as f64 / chunk.len() as f64
        }
    };
    let eps = |alpha| match epsilon_bound(alpha, f.lipschitz(), h, n, gamma, cfg.p_fail) {
        Ok(v) => Ok(v),
        Err(Error::BoundVacuous { .. }) => Ok(f64::NAN),
        Err(e) => Err(e),
    };
    Ok(AggregateRow {
        h,
        mean_cv: mean(&cvs),
        mean_risk: mean(&risks),
        q05_cv: quantile_or_nan(&cvs, 0.05),
        q95_cv: quantile_or_nan(&cvs, 0.95),
        q05_risk: quantile_or_nan(&risks, 0.05),
        q95_risk: quantile_or_nan(&risks, 0.95),
        q90_absdiff: quantile_or_nan(&diffs, 0.9),
        gamma,
        eps_risk: eps(ALPHA_RISK)?,
        eps_cv: eps(ALPHA_CV)?,
        eps_diff: eps(ALPHA_DIFF)?,
    })
}

/// Fraction of trials, per `h`, in which some leave-one-out mesh norm exceeds `1/h`.
///
/// Trial nodes come from the same streams as [`run_experiment`] with this seed.
pub fn estimate_event_probability(
    n: usize,
    h_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    estimate_event_probability_with_threads(n, h_grid, trials, seed, None)
}

pub fn estimate_event_probability_with_threads(
    n: usize,
    h_grid: &[f64],
    trials: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    if trials < 1 {
        return Err(invalid("trials must be at least 1"));
    }
    if let Some(h) = h_grid.iter().find(|h| !(**h > 0.0) || !h.is_finite()) {
        return Err(invalid(format!(
            "every h must be positive and finite, got {h}"
        )));
    }
    with_pool(threads, || {
        h_grid
            .par_iter()
            .enumerate()
            .map(|(j, &h)| {
                let hits = (0..trials)
                    .into_par_iter()
                    .map(|t| Ok(!trial_nodes(seed, j, t, n)?.xi_membership(h)?))
                    .collect::<Result<Vec<bool>>>()?
                    .into_iter()
                    .filter(|&hit| hit)
                    .count();
                Ok((h, hits as f64 / trials as f64))
            })
            .collect()
    })?
}
