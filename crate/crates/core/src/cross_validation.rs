//! Leave-one-out cross-validation for Shepard's model.
//!
//! The fast path computes the full-sample numerator and denominator at every node and
//! removes the node's own contribution `k_h(0) f(x_i)` / `k_h(0)` afterwards, so the whole
//! score costs two windowed kernel sums per node instead of `n` model fits.

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelFamily;
use crate::shepard::{window_sums, SampleSet, ShepardModel, UndefinedPolicy};
use crate::torus::torus_distance;

/// Below this fraction of the full denominator, the leave-one-out denominator is
/// treated as zero: the subtraction has lost all significant digits.
pub const CANCELLATION_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// `(1/n) sum_i |r_i - f(x_i)|^2`.
    pub score: f64,
    /// `r_i = R_h(z_{-i})(x_i)`, indexed like the (sorted) samples.
    pub loo_predictions: Vec<f64>,
    /// Nodes whose leave-one-out denominator vanished and were resolved by policy.
    pub skipped: Vec<usize>,
}

fn score(samples: &SampleSet, r: &[f64]) -> f64 {
    let n = samples.len();
    r.iter()
        .zip(samples.values())
        .map(|(ri, fi)| (ri - fi) * (ri - fi))
        .sum::<f64>()
        / n as f64
}

/// Value of the nearest node other than `i` (ties go to the predecessor).
fn nearest_other_value(samples: &SampleSet, i: usize) -> f64 {
    let n = samples.len();
    let nodes = samples.nodes().nodes();
    let (pred, succ) = ((i + n - 1) % n, (i + 1) % n);
    let j = if torus_distance(nodes[pred], nodes[i]) <= torus_distance(nodes[succ], nodes[i]) {
        pred
    } else {
        succ
    };
    samples.values()[j]
}

/// Single-pass leave-one-out score.
pub fn loo_cv_fast(
    samples: &SampleSet,
    kernel: &KernelFamily,
    policy: UndefinedPolicy,
) -> Result<CvResult> {
    let n = samples.len();
    if n < 2 {
        return Err(invalid("cross-validation needs at least 2 samples"));
    }
    let k0 = kernel.at_zero();
    let nodes = samples.nodes().nodes();
    let values = samples.values();
    let mut r = Vec::with_capacity(n);
    let mut skipped = Vec::new();
    for i in 0..n {
        let s = window_sums(samples, kernel, nodes[i], Some(i));
        let den = s.den - k0;
        if den > CANCELLATION_GUARD * s.den {
            let num = s.num - k0 * values[i];
            r.push((num / den).clamp(s.lo, s.hi));
        } else {
            match policy {
                UndefinedPolicy::Error => return Err(Error::IsolatedNode { index: i }),
                UndefinedPolicy::NearestNode => {
                    r.push(nearest_other_value(samples, i));
                    skipped.push(i);
                }
            }
        }
    }
    Ok(CvResult {
        score: score(samples, &r),
        loo_predictions: r,
        skipped,
    })
}

/// Reference implementation: fits `n` separate models on `z_{-i}` and evaluates each at
/// `x_i` with a dense sum over all remaining nodes.
pub fn loo_cv_naive(
    samples: &SampleSet,
    kernel: &KernelFamily,
    policy: UndefinedPolicy,
) -> Result<CvResult> {
    let n = samples.len();
    if n < 2 {
        return Err(invalid("cross-validation needs at least 2 samples"));
    }
    let k0 = kernel.at_zero();
    let nodes = samples.nodes().nodes();
    let mut r = Vec::with_capacity(n);
    let mut skipped = Vec::new();
    for (i, &x) in nodes.iter().enumerate() {
        let model = ShepardModel::fit(
            samples.without(i)?,
            kernel.clone(),
            UndefinedPolicy::NearestNode,
        )?;
        let (num, den) = model.dense_sums(x);
        if den > CANCELLATION_GUARD * (den + k0) {
            r.push(num / den);
        } else {
            match policy {
                UndefinedPolicy::Error => return Err(Error::IsolatedNode { index: i }),
                UndefinedPolicy::NearestNode => {
                    r.push(model.evaluate_dense(nodes[i])?);
                    skipped.push(i);
                }
            }
        }
    }
    Ok(CvResult {
        score: score(samples, &r),
        loo_predictions: r,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shepard::TestFunction;
    use crate::torus::{sample_uniform, NodeSet};

    #[test]
    fn constant_function_scores_zero() {
        let s =
            SampleSet::from_function(sample_uniform(1, 50).unwrap(), &TestFunction::constant(3.0));
        let k = KernelFamily::hat(5.0).unwrap();
        let fast = loo_cv_fast(&s, &k, UndefinedPolicy::Error).unwrap();
        assert_eq!(fast.score, 0.0);
        assert!(fast.loo_predictions.iter().all(|&r| r == 3.0));
        assert!(fast.skipped.is_empty());
        // the oracle does not clamp, so only rounding separates it from 3
        let naive = loo_cv_naive(&s, &k, UndefinedPolicy::Error).unwrap();
        assert!(naive.score < 1e-28);
        assert!(naive
            .loo_predictions
            .iter()
            .all(|&r| (r - 3.0).abs() < 1e-14));
    }

    #[test]
    fn three_equispaced_nodes_by_hand() {
        // h = 1: every pair is 1/3 apart with weight 2/3, so r_i is the mean of the other two
        let s = SampleSet::new(&[0.0, 1.0 / 3.0, 2.0 / 3.0], &[1.0, 2.0, 6.0]).unwrap();
        let k = KernelFamily::hat(1.0).unwrap();
        let fast = loo_cv_fast(&s, &k, UndefinedPolicy::Error).unwrap();
        let expect = [4.0, 3.5, 1.5];
        for (a, b) in fast.loo_predictions.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let want = ((4.0f64 - 1.0).powi(2) + (3.5f64 - 2.0).powi(2) + (1.5f64 - 6.0).powi(2)) / 3.0;
        assert!((fast.score - want).abs() < 1e-13);
        let naive = loo_cv_naive(&s, &k, UndefinedPolicy::Error).unwrap();
        assert!((naive.score - fast.score).abs() < 1e-13);
    }

    #[test]
    fn isolated_node_under_error_policy() {
        // two clusters; node 3 sits alone
        let s = SampleSet::new(&[0.10, 0.11, 0.12, 0.60], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let k = KernelFamily::hat(20.0).unwrap();
        for res in [
            loo_cv_fast(&s, &k, UndefinedPolicy::Error),
            loo_cv_naive(&s, &k, UndefinedPolicy::Error),
        ] {
            assert!(matches!(res, Err(Error::IsolatedNode { index: 3 })));
        }
    }

    #[test]
    fn isolated_node_under_nearest_policy() {
        let s = SampleSet::new(&[0.10, 0.11, 0.12, 0.60], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let k = KernelFamily::hat(20.0).unwrap();
        let fast = loo_cv_fast(&s, &k, UndefinedPolicy::NearestNode).unwrap();
        let naive = loo_cv_naive(&s, &k, UndefinedPolicy::NearestNode).unwrap();
        assert_eq!(fast.skipped, vec![3]);
        assert_eq!(naive.skipped, vec![3]);
        // nearest other node to 0.60 is 0.12
        assert_eq!(fast.loo_predictions[3], 3.0);
        assert_eq!(naive.loo_predictions[3], 3.0);
        assert!((fast.score - naive.score).abs() < 1e-14);
    }

    #[test]
    fn too_few_samples() {
        let s = SampleSet::new(&[0.2], &[1.0]).unwrap();
        let k = KernelFamily::hat(2.0).unwrap();
        assert!(loo_cv_fast(&s, &k, UndefinedPolicy::Error).is_err());
        assert!(loo_cv_naive(&s, &k, UndefinedPolicy::Error).is_err());
    }

    #[test]
    fn two_nodes_predict_each_other() {
        let s = SampleSet::from_function(NodeSet::equispaced(2).unwrap(), &TestFunction::sine());
        let k = KernelFamily::hat(1.0).unwrap();
        let res = loo_cv_fast(&s, &k, UndefinedPolicy::Error).unwrap();
        assert_eq!(res.loo_predictions[0], s.values()[1]);
        assert_eq!(res.loo_predictions[1], s.values()[0]);
    }
}
