//! Geometry of the one-dimensional unit torus `T = [0, 1)` with endpoints identified.
//!
//! Node sets are kept sorted together with their cyclic gaps, which makes the mesh
//! norm and every leave-one-out mesh norm an `O(n)` computation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// A position on the torus, canonicalised into `[0, 1)` on construction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TorusPoint(f64);

impl TorusPoint {
    /// Wraps `x` modulo 1.
    ///
    /// # Panics
    /// If `x` is not finite.
    pub fn new(x: f64) -> Self {
        assert!(x.is_finite(), "torus coordinate must be finite, got {x}");
        let mut v = x.rem_euclid(1.0);
        // rem_euclid rounds tiny negative inputs up to exactly 1.0
        if v >= 1.0 {
            v = 0.0;
        }
        TorusPoint(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Periodic distance to `other`, in `[0, 1/2]`.
    pub fn distance(self, other: TorusPoint) -> f64 {
        torus_distance(self, other)
    }
}

impl From<f64> for TorusPoint {
    fn from(x: f64) -> Self {
        TorusPoint::new(x)
    }
}

/// `min(|a - b|, 1 - |a - b|)`.
pub fn torus_distance(a: TorusPoint, b: TorusPoint) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(1.0 - d)
}

/// Sorted nodes on the torus with their cyclic gaps.
///
/// `gaps[i]` is the distance from node `i` forward to node `i + 1`; the last gap wraps
/// around from the largest node back to the smallest. Duplicates give zero gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    nodes: Vec<TorusPoint>,
    gaps: Vec<f64>,
}

impl NodeSet {
    /// Canonicalises and sorts `values`. Fails on an empty or non-finite input.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("node set must contain at least one node"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("node coordinate {bad} is not finite")));
        }
        let mut nodes: Vec<TorusPoint> = values.iter().map(|&v| TorusPoint::new(v)).collect();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted(nodes))
    }

    /// Builds from points already sorted ascending.
    pub(crate) fn from_sorted(nodes: Vec<TorusPoint>) -> Self {
        debug_assert!(!nodes.is_empty());
        debug_assert!(nodes.windows(2).all(|w| w[0].0 <= w[1].0));
        let n = nodes.len();
        let mut gaps = Vec::with_capacity(n);
        for i in 0..n - 1 {
            gaps.push(nodes[i + 1].0 - nodes[i].0);
        }
        gaps.push(nodes[0].0 + 1.0 - nodes[n - 1].0);
        NodeSet { nodes, gaps }
    }

    /// `n` equispaced nodes `0, 1/n, ..., (n-1)/n`.
    pub fn equispaced(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        let nodes = (0..n)
            .map(|i| TorusPoint::new(i as f64 / n as f64))
            .collect();
        Ok(Self::from_sorted(nodes))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TorusPoint] {
        &self.nodes
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|p| p.0)
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Half the largest cyclic gap, i.e. `max_x min_i d(x, x_i)`.
    pub fn mesh_norm(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max) / 2.0
    }

    /// Mesh norm of the set with node `i` removed, for every `i`.
    ///
    /// Removing node `i` merges gaps `i - 1` and `i`; the answer is the larger of the
    /// merged gap and the largest untouched gap, halved. Runs in `O(n)` by tracking the
    /// three largest gaps.
    pub fn loo_mesh_norms(&self) -> Result<Vec<f64>> {
        let n = self.len();
        if n < 2 {
            return Err(invalid("leave-one-out mesh norms need at least 2 nodes"));
        }
        let top = top_three(&self.gaps);
        let out = (0..n)
            .map(|i| {
                let prev = (i + n - 1) % n;
                let merged = self.gaps[prev] + self.gaps[i];
                let untouched = top
                    .iter()
                    .flatten()
                    .find(|(j, _)| *j != prev && *j != i)
                    .map_or(0.0, |&(_, g)| g);
                merged.max(untouched) / 2.0
            })
            .collect();
        Ok(out)
    }

    /// `max_i (g_{i-1} + g_i) / 2`, the largest leave-one-out mesh norm.
    pub fn max_loo_mesh_norm(&self) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(invalid("leave-one-out mesh norms need at least 2 nodes"));
        }
        let m = (0..n)
            .map(|i| self.gaps[(i + n - 1) % n] + self.gaps[i])
            .fold(0.0, f64::max);
        Ok(m / 2.0)
    }

    /// Whether every leave-one-out mesh norm is strictly below `1/h`.
    pub fn xi_membership(&self, h: f64) -> Result<bool> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("h must be positive and finite, got {h}")));
        }
        Ok(self.max_loo_mesh_norm()? < 1.0 / h)
    }

    /// Index of the node nearest to `x`; ties go to the predecessor.
    pub fn nearest_index(&self, x: TorusPoint) -> usize {
        let n = self.len();
        let succ = self.nodes.partition_point(|p| p.0 < x.0) % n;
        let pred = (succ + n - 1) % n;
        if torus_distance(self.nodes[pred], x) <= torus_distance(self.nodes[succ], x) {
            pred
        } else {
            succ
        }
    }
}

fn top_three(gaps: &[f64]) -> [Option<(usize, f64)>; 3] {
    let mut top: [Option<(usize, f64)>; 3] = [None; 3];
    for (j, &g) in gaps.iter().enumerate() {
        let mut cand = Some((j, g));
        for slot in top.iter_mut() {
            match (*slot, cand) {
                (None, _) => {
                    *slot = cand;
                    break;
                }
                (Some((_, s)), Some((_, c))) if c > s => {
                    std::mem::swap(slot, &mut cand);
                }
                _ => {}
            }
        }
    }
    top
}

/// Free function form of [`NodeSet::mesh_norm`].
pub fn mesh_norm(ns: &NodeSet) -> f64 {
    ns.mesh_norm()
}

/// Free function form of [`NodeSet::loo_mesh_norms`].
pub fn loo_mesh_norms(ns: &NodeSet) -> Result<Vec<f64>> {
    ns.loo_mesh_norms()
}

/// Free function form of [`NodeSet::xi_membership`].
pub fn xi_membership(ns: &NodeSet, h: f64) -> Result<bool> {
    ns.xi_membership(h)
}

/// The generator behind every random draw in the crate.
///
/// ChaCha8 seeded through `seed_from_u64`, with `stream` selecting an independent
/// ChaCha stream. Output is identical across platforms for the same `(seed, stream)`.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `n` uniform nodes from `rng`.
pub fn sample_uniform_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<NodeSet> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let mut nodes: Vec<TorusPoint> = (0..n).map(|_| TorusPoint::new(rng.gen::<f64>())).collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(NodeSet::from_sorted(nodes))
}

/// `n` independent uniform nodes, deterministic in `seed` (stream 0 of [`substream_rng`]).
pub fn sample_uniform(seed: u64, n: usize) -> Result<NodeSet> {
    sample_uniform_with(&mut substream_rng(seed, 0), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> TorusPoint {
        TorusPoint::new(x)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn distance_examples() {
        assert!(close(torus_distance(p(0.1), p(0.9)), 0.2));
        assert_eq!(torus_distance(p(0.3), p(0.3)), 0.0);
        assert_eq!(torus_distance(p(0.0), p(0.5)), 0.5);
    }

    #[test]
    fn canonicalisation() {
        assert!(close(p(1.25).value(), 0.25));
        assert!(close(p(-0.25).value(), 0.75));
        assert_eq!(p(-1e-20).value(), 0.0);
        assert_eq!(p(1.0).value(), 0.0);
    }

    #[test]
    fn gaps_sum_to_one() {
        let ns = NodeSet::new(&[0.7, 0.1, 0.2, 0.95]).unwrap();
        let s: f64 = ns.gaps().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(ns.gaps().len(), 4);
        assert!(ns.gaps().iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn sample_uniform_shape_and_determinism() {
        let a = sample_uniform(7, 5).unwrap();
        assert_eq!(a.len(), 5);
        assert!(a.values().all(|v| (0.0..1.0).contains(&v)));
        assert!(a.nodes().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a, sample_uniform(7, 5).unwrap());
        assert!(sample_uniform(7, 0).is_err());
    }

    #[test]
    fn sample_uniform_mean() {
        // binomial-style SE of the mean of 10^4 uniforms is 1/sqrt(12e4) ~ 0.0029; 0.02 is ~7 SE
        let ns = sample_uniform(7, 10_000).unwrap();
        let mean = ns.values().sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn mesh_norm_examples() {
        for n in [1, 2, 7, 100] {
            let ns = NodeSet::equispaced(n).unwrap();
            assert!(close(ns.mesh_norm(), 0.5 / n as f64));
        }
        assert!(close(NodeSet::new(&[0.0, 0.5]).unwrap().mesh_norm(), 0.25));
        assert!(close(
            NodeSet::new(&[0.0, 0.1, 0.2]).unwrap().mesh_norm(),
            0.4
        ));
        assert!(NodeSet::new(&[]).is_err());
    }

    #[test]
    fn loo_examples() {
        let ns = NodeSet::new(&[0.0, 0.25, 0.5, 0.75]).unwrap();
        for v in ns.loo_mesh_norms().unwrap() {
            assert!(close(v, 0.25));
        }
        let two = NodeSet::new(&[0.0, 0.5]).unwrap();
        assert_eq!(two.loo_mesh_norms().unwrap(), vec![0.5, 0.5]);
        assert!(NodeSet::new(&[0.3]).unwrap().loo_mesh_norms().is_err());
    }

    #[test]
    fn loo_with_duplicates_and_dominant_gap() {
        // the big gap 0.3 -> 1.0 must survive removal of nodes far from it
        let ns = NodeSet::new(&[0.0, 0.1, 0.1, 0.2, 0.3]).unwrap();
        let loo = ns.loo_mesh_norms().unwrap();
        assert!(close(loo[2], 0.35));
        assert!(close(loo[0], 0.4)); // merges 0.7 with 0.1
        assert!(close(loo[4], 0.4)); // merges 0.1 with 0.7
    }

    #[test]
    fn xi_membership_examples() {
        let ns = NodeSet::equispaced(100).unwrap();
        assert!(ns.xi_membership(10.0).unwrap());
        assert!(!ns.xi_membership(120.0).unwrap());
        assert!(ns.xi_membership(0.0).is_err());
    }

    #[test]
    fn nearest_index_wraps() {
        let ns = NodeSet::new(&[0.1, 0.5, 0.9]).unwrap();
        assert_eq!(ns.nearest_index(p(0.99)), 2);
        assert_eq!(ns.nearest_index(p(0.01)), 0);
        assert_eq!(ns.nearest_index(p(0.96)), 2);
        assert_eq!(ns.nearest_index(p(0.04)), 0);
        // ties go to the predecessor, also across 0
        let ns = NodeSet::new(&[0.25, 0.75]).unwrap();
        assert_eq!(ns.nearest_index(p(0.5)), 0);
        assert_eq!(ns.nearest_index(p(0.0)), 1);
    }
}
