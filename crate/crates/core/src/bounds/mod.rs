//! Closed-form concentration bounds for the risk, the cross-validation score, and
//! their difference, together with the failure probability `gamma` they depend on.
//!
//! All bounds live on the event where every leave-one-out reconstruction has uniform
//! error below `C1` and changing one sample moves a reconstruction by at most `C2`.
//! For Shepard's model with a kernel supported on `[0, 1/h]` and an `L`-Lipschitz
//! target, `C1 = L/h` and `C2 <= 2 C1`.

mod gamma;

pub use gamma::{
    gamma_gumbel, gamma_upper, gamma_upper_or_gumbel, gamma_upper_with, GammaMethod, GammaOptions,
    GammaResult, DEFAULT_MAX_PRECISION_BITS,
};

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Multiplier in [`epsilon_bound`] for the risk.
pub const ALPHA_RISK: f64 = 2.0 * SQRT_2;
/// Multiplier in [`epsilon_bound`] for the cross-validation score.
pub const ALPHA_CV: f64 = 3.0;
/// Multiplier in [`epsilon_bound`] for `|CV - risk|`.
pub const ALPHA_DIFF: f64 = 12.0;

/// Constants entering the tail bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub h: f64,
    pub lipschitz: f64,
    pub sup_norm_f: f64,
    /// Uniform error bound of every leave-one-out reconstruction.
    pub c1: f64,
    /// Stability of a reconstruction under replacing one sample.
    pub c2: f64,
    pub gamma: f64,
    /// Uniform bound on any reconstruction.
    pub m: f64,
}

impl BoundParams {
    /// Shepard defaults: `C1 = L/h`, `C2 = 2 C1`, `M = ||f||_inf`.
    pub fn shepard(n: u64, h: f64, lipschitz: f64, sup_norm_f: f64, gamma: f64) -> Result<Self> {
        let c1 = lipschitz / h;
        let p = BoundParams {
            n,
            h,
            lipschitz,
            sup_norm_f,
            c1,
            c2: 2.0 * c1,
            gamma,
            m: sup_norm_f,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_c2(mut self, c2: f64) -> Result<Self> {
        self.c2 = c2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_m(mut self, m: f64) -> Result<Self> {
        self.m = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.h,
            self.lipschitz,
            self.sup_norm_f,
            self.c1,
            self.c2,
            self.gamma,
            self.m,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(invalid("bound parameters must be finite"));
        }
        if self.n < 1 {
            return Err(invalid("n must be at least 1"));
        }
        if !(self.h > 0.0) {
            return Err(invalid(format!("h must be positive, got {}", self.h)));
        }
        if self.lipschitz < 0.0 || self.sup_norm_f < 0.0 || self.m < 0.0 {
            return Err(invalid("L, ||f||_inf and M must be nonnegative"));
        }
        if !(self.c1 > 0.0) || !(self.c2 > 0.0) {
            return Err(invalid(format!(
                "C1 and C2 must be positive, got {} and {}",
                self.c1, self.c2
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Which quantity a tail bound concentrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// Risk of a leave-one-out reconstruction around its conditional mean.
    Risk,
    /// Cross-validation score around its conditional mean.
    Cv,
    /// `|CV - risk|`.
    Diff,
}

impl std::str::FromStr for TailKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "risk" => Ok(TailKind::Risk),
            "cv" => Ok(TailKind::Cv),
            "diff" => Ok(TailKind::Diff),
            other => Err(invalid(format!(
                "unknown bound kind '{other}' (expected risk|cv|diff)"
            ))),
        }
    }
}

/// Smallest `eps` for which the tail bound of `kind` holds.
///
/// With `use_two_constants = false`, `C2` is replaced by `2 C1` throughout.
pub fn validity_threshold(kind: TailKind, p: &BoundParams, use_two_constants: bool) -> f64 {
    let n = p.n as f64;
    let (c1, g) = (p.c1, p.gamma);
    let c2 = if use_two_constants { p.c2 } else { 2.0 * c1 };
    match kind {
        TailKind::Risk => 2.0 * g * n * c1 * c2,
        TailKind::Cv => 2.0 * g * n * c1 * c2 + g * c1 * c1,
        TailKind::Diff => {
            let spread = p.m + p.sup_norm_f;
            2.0 * g * (4.0 * n * c1 * c2 + c1 * c1).max(spread * spread)
        }
    }
}

/// `P(|X - m| > eps) <= 2 gamma + 2 exp(-(eps / scale - sqrt(2n) gamma)^2)`, clamped to `[0, 1]`.
///
/// The single-constant forms need `n >= 5` (cv) or `n >= 3` (diff). Just above the
/// threshold the single-constant bracket can be negative; it is floored at 0 there,
/// which makes the bound trivially 1.
pub fn tail_probability(
    kind: TailKind,
    eps: f64,
    p: &BoundParams,
    use_two_constants: bool,
) -> Result<f64> {
    p.validate()?;
    if eps.is_nan() {
        return Err(invalid("eps must not be NaN"));
    }
    let n = p.n as f64;
    if !use_two_constants {
        match kind {
            TailKind::Cv if p.n < 5 => {
                return Err(invalid("single-constant CV bound needs n >= 5"))
            }
            TailKind::Diff if p.n < 3 => {
                return Err(invalid("single-constant difference bound needs n >= 3"))
            }
            _ => {}
        }
    }
    let threshold = validity_threshold(kind, p, use_two_constants);
    if !(eps > threshold) {
        return Err(Error::ValidityViolation { eps, threshold });
    }
    let (c1, c2, g) = (p.c1, p.c2, p.gamma);
    let sn = n.sqrt();
    let scaled = match (kind, use_two_constants) {
        (TailKind::Risk, true) => eps / ((2.0 * n).sqrt() * c1 * c2),
        (TailKind::Risk, false) => eps / ((8.0 * n).sqrt() * c1 * c1),
        (TailKind::Cv, true) => SQRT_2 * eps / (c1 * (c1 / sn + 2.0 * sn * c2)),
        (TailKind::Cv, false) => eps / (3.0 * sn * c1 * c1),
        (TailKind::Diff, true) => eps / (SQRT_2 * c1 * (c1 / sn + 4.0 * sn * c2)),
        (TailKind::Diff, false) => eps / (12.0 * sn * c1 * c1),
    };
    let bracket = (scaled - (2.0 * n).sqrt() * g).max(0.0);
    Ok((2.0 * g + 2.0 * (-bracket * bracket).exp()).clamp(0.0, 1.0))
}

/// Radius `eps` certified with failure probability `p_fail`:
///
/// ```text
/// alpha (L^2 / h^2) (sqrt(2) n gamma + sqrt(-n log(p_fail/2 - gamma)))
/// ```
///
/// Use [`ALPHA_RISK`], [`ALPHA_CV`] or [`ALPHA_DIFF`] for `alpha`.
pub fn epsilon_bound(
    alpha: f64,
    lipschitz: f64,
    h: f64,
    n: u64,
    gamma: f64,
    p_fail: f64,
) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("h must be positive and finite, got {h}")));
    }
    if !(alpha >= 0.0) || !(lipschitz >= 0.0) || !alpha.is_finite() || !lipschitz.is_finite() {
        return Err(invalid("alpha and L must be nonnegative and finite"));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let slack = p_fail / 2.0 - gamma;
    if !(slack < 1.0) {
        return Err(invalid(format!(
            "p_fail/2 - gamma must be below 1, got {slack}"
        )));
    }
    if !(slack > 0.0) {
        return Err(Error::BoundVacuous {
            gamma,
            half_p: p_fail / 2.0,
        });
    }
    let n = n as f64;
    Ok(alpha * lipschitz * lipschitz / (h * h) * (SQRT_2 * n * gamma + (-n * slack.ln()).sqrt()))
}

/// For Shepard's model: with probability above `1 - 2(gamma + delta)`,
///
/// ```text
/// |CV - risk| <= max(4 gamma ||f||^2, (12 sqrt(n) L^2 / h^2)(sqrt(2n) gamma + sqrt(-log delta)))
/// ```
pub fn quantile_bound_shepard(p: &BoundParams, delta: f64) -> Result<f64> {
    p.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(p.gamma + delta < 0.5) {
        return Err(invalid(format!(
            "gamma + delta must be below 1/2, got {}",
            p.gamma + delta
        )));
    }
    let n = p.n as f64;
    let outside = 4.0 * p.gamma * p.sup_norm_f * p.sup_norm_f;
    let inside = 12.0 * n.sqrt() * p.lipschitz * p.lipschitz / (p.h * p.h)
        * ((2.0 * n).sqrt() * p.gamma + (-delta.ln()).sqrt());
    Ok(outside.max(inside))
}
