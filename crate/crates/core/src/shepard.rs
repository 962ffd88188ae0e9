//! Shepard's model (the Nadaraya-Watson estimator) on the torus:
//!
//! ```text
//! R_h(z)(x) = sum_i K_h(x, x_i) f(x_i) / sum_i K_h(x, x_i)
//! ```
//!
//! Evaluation only visits nodes inside the kernel window `[x - 1/h, x + 1/h]`, found by
//! binary search over the sorted nodes and split into at most two index ranges where
//! the window wraps around `0`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelFamily;
use crate::torus::{NodeSet, TorusPoint};

/// What to do where the kernel window is empty and the quotient is 0/0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedPolicy {
    /// Fail with [`Error::UncoveredPoint`] (or [`Error::IsolatedNode`] in cross-validation).
    #[default]
    Error,
    /// Fall back to the value of the nearest node.
    NearestNode,
}

impl std::str::FromStr for UndefinedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(UndefinedPolicy::Error),
            "nearest_node" | "nearest" => Ok(UndefinedPolicy::NearestNode),
            other => Err(invalid(format!(
                "unknown policy '{other}' (expected error|nearest_node)"
            ))),
        }
    }
}

/// Nodes paired with function values, sorted by node position.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    nodes: NodeSet,
    values: Vec<f64>,
}

impl SampleSet {
    /// Pairs `xs[i]` with `ys[i]` and sorts the pairs by position.
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid(format!(
                "{} nodes but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(invalid("sample set must not be empty"));
        }
        if let Some(v) = ys.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("sample value {v} is not finite")));
        }
        if let Some(v) = xs.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("node coordinate {v} is not finite")));
        }
        let mut pairs: Vec<(TorusPoint, f64)> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| (TorusPoint::new(x), y))
            .collect();
        pairs.sort_by(|a, b| a.0.value().total_cmp(&b.0.value()));
        let (nodes, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Ok(SampleSet {
            nodes: NodeSet::from_sorted(nodes),
            values,
        })
    }

    /// Samples `f` at every node.
    pub fn from_function(nodes: NodeSet, f: &TestFunction) -> Self {
        let values = nodes.values().map(|x| f.eval(x)).collect();
        SampleSet { nodes, values }
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// A copy without the sample at sorted index `i`.
    pub fn without(&self, i: usize) -> Result<SampleSet> {
        if self.len() < 2 {
            return Err(invalid("cannot remove a sample from a set of size < 2"));
        }
        let mut nodes = self.nodes.nodes().to_vec();
        let mut values = self.values.clone();
        nodes.remove(i);
        values.remove(i);
        Ok(SampleSet {
            nodes: NodeSet::from_sorted(nodes),
            values,
        })
    }
}

/// A function on the torus with its declared Lipschitz constant and sup-norm.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lipschitz: f64,
    sup_norm: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl TestFunction {
    pub fn new<F>(name: impl Into<String>, lipschitz: f64, sup_norm: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
            return Err(invalid(format!(
                "Lipschitz constant must be >= 0, got {lipschitz}"
            )));
        }
        if !(sup_norm >= 0.0) || !sup_norm.is_finite() {
            return Err(invalid(format!("sup-norm must be >= 0, got {sup_norm}")));
        }
        Ok(TestFunction {
            name: name.into(),
            evaluator: Arc::new(f),
            lipschitz,
            sup_norm,
        })
    }

    /// `sqrt(2) sin(2 pi x)` declared with `L = sqrt(2)`, the constant the reference
    /// experiments plot their bounds with. The true Lipschitz constant is larger; see
    /// [`TestFunction::sine_analytic`].
    pub fn sine() -> Self {
        Self::sine_with_lipschitz("sine", SQRT_2)
    }

    /// `sqrt(2) sin(2 pi x)` with its true Lipschitz constant `2 sqrt(2) pi`.
    pub fn sine_analytic() -> Self {
        Self::sine_with_lipschitz("sine_analytic", 2.0 * SQRT_2 * PI)
    }

    fn sine_with_lipschitz(name: &str, l: f64) -> Self {
        TestFunction {
            name: name.into(),
            evaluator: Arc::new(|x| SQRT_2 * (2.0 * PI * x).sin()),
            lipschitz: l,
            sup_norm: SQRT_2,
        }
    }

    pub fn constant(c: f64) -> Self {
        TestFunction {
            name: "constant".into(),
            evaluator: Arc::new(move |_| c),
            lipschitz: 0.0,
            sup_norm: c.abs(),
        }
    }

    /// `"sine"`, `"sine_analytic"` or `"constant"` (the latter takes `value`, default 1).
    pub fn preset(name: &str, value: Option<f64>) -> Result<Self> {
        match name {
            "sine" => Ok(Self::sine()),
            "sine_analytic" => Ok(Self::sine_analytic()),
            "constant" => Ok(Self::constant(value.unwrap_or(1.0))),
            other => Err(invalid(format!(
                "unknown test function '{other}' (expected sine|sine_analytic|constant)"
            ))),
        }
    }

    /// Same function, different declared Lipschitz constant / sup-norm.
    pub fn with_constants(mut self, lipschitz: Option<f64>, sup_norm: Option<f64>) -> Result<Self> {
        if let Some(l) = lipschitz {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(invalid(format!("Lipschitz constant must be >= 0, got {l}")));
            }
            self.lipschitz = l;
        }
        if let Some(s) = sup_norm {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(invalid(format!("sup-norm must be >= 0, got {s}")));
            }
            self.sup_norm = s;
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.evaluator)(x)
    }
}

/// Kernel-weighted sums over one window.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WindowSums {
    pub num: f64,
    pub den: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Visits, in ascending index order, every node whose distance to `x` may be below `r`.
pub(crate) fn for_each_in_window(
    nodes: &[TorusPoint],
    x: f64,
    r: f64,
    mut visit: impl FnMut(usize),
) {
    let n = nodes.len();
    // a few ulps of slack; the kernel itself zeroes anything at or beyond 1/h
    let r = r * (1.0 + 1e-12) + 1e-15;
    if r >= 0.5 {
        (0..n).for_each(visit);
        return;
    }
    let lower = |v: f64| nodes.partition_point(|p| p.value() < v);
    let upper = |v: f64| nodes.partition_point(|p| p.value() <= v);
    let (lo, hi) = (x - r, x + r);
    if lo < 0.0 {
        (0..upper(hi)).for_each(&mut visit);
        (lower(lo + 1.0)..n).for_each(&mut visit);
    } else if hi >= 1.0 {
        (0..upper(hi - 1.0)).for_each(&mut visit);
        (lower(lo)..n).for_each(&mut visit);
    } else {
        (lower(lo)..upper(hi)).for_each(visit);
    }
}

pub(crate) fn window_sums(
    samples: &SampleSet,
    kernel: &KernelFamily,
    x: TorusPoint,
    skip: Option<usize>,
) -> WindowSums {
    let nodes = samples.nodes.nodes();
    let mut s = WindowSums {
        num: 0.0,
        den: 0.0,
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    for_each_in_window(nodes, x.value(), kernel.support_radius(), |j| {
        let w = kernel.eval_pair(x, nodes[j]);
        if w > 0.0 {
            let v = samples.values[j];
            s.num += w * v;
            s.den += w;
            if skip != Some(j) {
                s.lo = s.lo.min(v);
                s.hi = s.hi.max(v);
            }
        }
    });
    s
}

/// A fitted Shepard model. Immutable; evaluation is thread-safe.
#[derive(Debug, Clone)]
pub struct ShepardModel {
    samples: SampleSet,
    kernel: KernelFamily,
    policy: UndefinedPolicy,
}

impl ShepardModel {
    pub fn fit(samples: SampleSet, kernel: KernelFamily, policy: UndefinedPolicy) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("cannot fit a model on an empty sample set"));
        }
        Ok(ShepardModel {
            samples,
            kernel,
            policy,
        })
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn kernel(&self) -> &KernelFamily {
        &self.kernel
    }

    pub fn policy(&self) -> UndefinedPolicy {
        self.policy
    }

    /// `R_h(z)(x)` using only nodes within the kernel window.
    pub fn evaluate(&self, x: impl Into<TorusPoint>) -> Result<f64> {
        let x = x.into();
        let s = window_sums(&self.samples, &self.kernel, x, None);
        if s.den > 0.0 {
            // the quotient is a convex combination; clamp away rounding
            Ok((s.num / s.den).clamp(s.lo, s.hi))
        } else {
            self.undefined_at(x)
        }
    }

    /// Reference evaluation summing over every node, without the window search.
    pub fn evaluate_dense(&self, x: impl Into<TorusPoint>) -> Result<f64> {
        let x = x.into();
        let (num, den) = self.dense_sums(x);
        if den > 0.0 {
            Ok(num / den)
        } else {
            self.undefined_at(x)
        }
    }

    /// Numerator and denominator of the quotient, summed over all nodes.
    pub(crate) fn dense_sums(&self, x: TorusPoint) -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for (p, v) in self.samples.nodes.nodes().iter().zip(&self.samples.values) {
            let w = self.kernel.eval_pair(x, *p);
            num += w * v;
            den += w;
        }
        (num, den)
    }

    fn undefined_at(&self, x: TorusPoint) -> Result<f64> {
        match self.policy {
            UndefinedPolicy::Error => Err(Error::UncoveredPoint { x: x.value() }),
            UndefinedPolicy::NearestNode => {
                Ok(self.samples.values[self.samples.nodes.nearest_index(x)])
            }
        }
    }

    /// Evaluates at the equispaced grid `j / grid_size`, `j = 0..grid_size`.
    pub fn evaluate_grid(&self, grid_size: usize) -> Result<Vec<f64>> {
        if grid_size == 0 {
            return Err(invalid("grid_size must be at least 1"));
        }
        (0..grid_size)
            .map(|j| self.evaluate(j as f64 / grid_size as f64))
            .collect()
    }

    /// `max_j |R_h(z)(t_j) - f(t_j)|` over the equispaced grid.
    pub fn sup_error(&self, f: &TestFunction, grid_size: usize) -> Result<f64> {
        if grid_size == 0 {
            return Err(invalid("grid_size must be at least 1"));
        }
        let mut worst: f64 = 0.0;
        for j in 0..grid_size {
            let t = j as f64 / grid_size as f64;
            worst = worst.max((self.evaluate(t)? - f.eval(t)).abs());
        }
        Ok(worst)
    }

    /// Left-endpoint quadrature of the squared-error risk `∫ |R_h(z) - f|^2` under
    /// the uniform measure.
    pub fn risk_estimate(&self, f: &TestFunction, grid_size: usize) -> Result<f64> {
        if grid_size == 0 {
            return Err(invalid("grid_size must be at least 1"));
        }
        let mut acc = 0.0;
        for j in 0..grid_size {
            let t = j as f64 / grid_size as f64;
            let e = self.evaluate(t)? - f.eval(t);
            acc += e * e;
        }
        Ok(acc / grid_size as f64)
    }
}

pub fn fit(
    samples: SampleSet,
    kernel: KernelFamily,
    policy: UndefinedPolicy,
) -> Result<ShepardModel> {
    ShepardModel::fit(samples, kernel, policy)
}

/// Default risk quadrature size: ten points per node.
pub fn default_grid_size(n: usize) -> usize {
    10 * n.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::sample_uniform;

    fn model(xs: &[f64], ys: &[f64], h: f64, policy: UndefinedPolicy) -> ShepardModel {
        ShepardModel::fit(
            SampleSet::new(xs, ys).unwrap(),
            KernelFamily::hat(h).unwrap(),
            policy,
        )
        .unwrap()
    }

    #[test]
    fn constant_values_reproduce_constant() {
        let ns = sample_uniform(3, 40).unwrap();
        let s = SampleSet::from_function(ns, &TestFunction::constant(2.5));
        let m =
            ShepardModel::fit(s, KernelFamily::hat(5.0).unwrap(), UndefinedPolicy::Error).unwrap();
        for j in 0..100 {
            assert_eq!(m.evaluate(j as f64 / 100.0).unwrap(), 2.5);
        }
    }

    #[test]
    fn single_node() {
        let m = model(&[0.3], &[4.0], 4.0, UndefinedPolicy::Error);
        assert_eq!(m.evaluate(0.3).unwrap(), 4.0);
        assert_eq!(m.evaluate(0.5).unwrap(), 4.0);
        assert!(matches!(m.evaluate(0.9), Err(Error::UncoveredPoint { .. })));
    }

    #[test]
    fn equidistant_nodes_average() {
        let m = model(&[0.375, 0.625], &[1.0, 3.0], 4.0, UndefinedPolicy::Error);
        assert_eq!(m.evaluate(0.5).unwrap(), 2.0);
        // across the wrap point
        let m = model(&[0.875, 0.125], &[1.0, 3.0], 4.0, UndefinedPolicy::Error);
        assert_eq!(m.evaluate(0.0).unwrap(), 2.0);
    }

    #[test]
    fn isolated_node_returns_own_value() {
        let m = model(
            &[0.1, 0.5, 0.8],
            &[1.0, -2.0, 7.0],
            10.0,
            UndefinedPolicy::Error,
        );
        assert_eq!(m.evaluate(0.5).unwrap(), -2.0);
    }

    #[test]
    fn nearest_node_policy() {
        let m = model(&[0.1, 0.5], &[1.0, 2.0], 50.0, UndefinedPolicy::NearestNode);
        assert_eq!(m.evaluate(0.2).unwrap(), 1.0);
        assert_eq!(m.evaluate(0.45).unwrap(), 2.0);
        assert_eq!(m.evaluate(0.9).unwrap(), 1.0);
    }

    #[test]
    fn sparse_matches_dense() {
        let f = TestFunction::sine();
        for (seed, n, h) in [(1, 100, 20.0), (2, 100, 150.0), (3, 37, 3.0), (4, 200, 1.0)] {
            let s = SampleSet::from_function(sample_uniform(seed, n).unwrap(), &f);
            let m = ShepardModel::fit(
                s,
                KernelFamily::hat(h).unwrap(),
                UndefinedPolicy::NearestNode,
            )
            .unwrap();
            for j in 0..997 {
                let x = j as f64 / 997.0;
                let (a, b) = (m.evaluate(x).unwrap(), m.evaluate_dense(x).unwrap());
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300),
                    "{a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn risk_and_sup_error_basics() {
        let f = TestFunction::constant(1.0);
        let s = SampleSet::from_function(sample_uniform(9, 30).unwrap(), &f);
        let m =
            ShepardModel::fit(s, KernelFamily::hat(4.0).unwrap(), UndefinedPolicy::Error).unwrap();
        assert_eq!(m.sup_error(&f, 300).unwrap(), 0.0);
        assert_eq!(m.risk_estimate(&f, 300).unwrap(), 0.0);

        // model identically 0 against f = 1
        let zero = model(&[0.0, 0.5], &[0.0, 0.0], 1.0, UndefinedPolicy::Error);
        assert_eq!(zero.risk_estimate(&f, 64).unwrap(), 1.0);
        assert!(zero.risk_estimate(&f, 0).is_err());
    }

    #[test]
    fn policy_parsing() {
        assert_eq!(
            "error".parse::<UndefinedPolicy>().unwrap(),
            UndefinedPolicy::Error
        );
        assert_eq!(
            "nearest_node".parse::<UndefinedPolicy>().unwrap(),
            UndefinedPolicy::NearestNode
        );
        assert!("zero".parse::<UndefinedPolicy>().is_err());
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(SampleSet::new(&[0.1, 0.2], &[1.0]).is_err());
        assert!(SampleSet::new(&[], &[]).is_err());
        assert!(SampleSet::new(&[0.1], &[f64::NAN]).is_err());
    }
}
