//! Failure probability `gamma` of the leave-one-out mesh-norm event for uniform nodes.
//!
//! The upper bound is the inclusion-exclusion sum
//!
//! ```text
//! sum_{k=1}^{floor(h)} (-1)^{k+1} C(n, k) (1 - k/(2h))^{n-1}
//! ```
//!
//! whose terms grow to roughly `2^(cancellation bits)` before the sum settles near a
//! number in `[0, 1]`. Doubles are useless there, so the sum is evaluated in
//! arbitrary-precision floating point with a two-precision agreement test.

use astro_float::{BigFloat, RoundingMode, Word};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_MAX_PRECISION_BITS: usize = 4096;

const RM: RoundingMode = RoundingMode::ToEven;
const REL_TOL: f64 = 1e-9;
const ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMethod {
    ExactSum,
    Gumbel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaResult {
    pub value: f64,
    pub method: GammaMethod,
    /// Working precision of the accepted evaluation; 0 when none was needed.
    pub precision_bits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaOptions {
    /// Escalation stops with [`Error::NumericInstability`] beyond this precision.
    pub max_precision_bits: usize,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            max_precision_bits: DEFAULT_MAX_PRECISION_BITS,
        }
    }
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("h must be positive and finite, got {h}")))
    }
}

/// Number of terms actually summed: `k <= floor(h)`, `k <= n`, and `k < 2h`.
fn last_term(n: u64, h: f64) -> u64 {
    let mut k = (h.floor() as u64).min(n);
    while k > 0 && (k as f64) >= 2.0 * h {
        k -= 1;
    }
    k
}

/// `max_k log2 |term_k|`, estimated in double precision.
fn peak_log2_term(n: u64, h: f64, k_max: u64) -> f64 {
    let mut log_binom = 0.0f64;
    let mut peak = f64::NEG_INFINITY;
    for k in 1..=k_max {
        log_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
        let t = log_binom + (n - 1) as f64 * (-(k as f64) / (2.0 * h)).ln_1p();
        peak = peak.max(t);
    }
    peak / std::f64::consts::LN_2
}

fn starting_precision(n: u64, h: f64, k_max: u64) -> usize {
    let floor = 64.0 + n as f64 * std::f64::consts::LOG2_E / 1000.0;
    let needed = peak_log2_term(n, h, k_max).max(0.0) + 64.0 + ((k_max + 1) as f64).log2();
    let bits = floor.max(needed).ceil() as usize;
    bits.div_ceil(64) * 64
}

/// Rounds a finite `BigFloat` to the nearest double.
fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let mut y = x.clone();
    y.set_precision(64, RM).expect("rounding to 64 bits");
    let (words, _, sign, exp, _) = y.as_raw_parts().expect("finite value");
    let word_bits = (std::mem::size_of::<Word>() * 8) as i32;
    // mantissa is a fraction in [1/2, 1) stored little-endian
    let mut frac = 0.0f64;
    for w in words.iter().rev() {
        frac = frac * 2f64.powi(word_bits) + *w as f64;
    }
    frac *= 2f64.powi(-word_bits * words.len() as i32);
    let v = frac * 2f64.powi(exp);
    if sign.is_negative() {
        -v
    } else {
        v
    }
}

/// The alternating sum at `p` bits, ascending in `k`.
fn alternating_sum(n: u64, h: f64, k_max: u64, p: usize) -> f64 {
    let one = BigFloat::from_u64(1, p);
    let two_h = BigFloat::from_f64(2.0 * h, p);
    let mut binom = one.clone();
    let mut sum = BigFloat::from_u64(0, p);
    for k in 1..=k_max {
        binom = binom.mul(&BigFloat::from_u64(n - k + 1, p), p, RM).div(
            &BigFloat::from_u64(k, p),
            p,
            RM,
        );
        let base = one.sub(&BigFloat::from_u64(k, p).div(&two_h, p, RM), p, RM);
        let term = binom.mul(&base.powi((n - 1) as usize, p, RM), p, RM);
        sum = if k % 2 == 1 {
            sum.add(&term, p, RM)
        } else {
            sum.sub(&term, p, RM)
        };
    }
    to_f64(&sum)
}

fn agree(a: f64, b: f64) -> bool {
    let d = (a - b).abs();
    d <= ABS_TOL || d <= REL_TOL * a.abs().max(b.abs())
}

/// Upper bound on the probability that some leave-one-out mesh norm exceeds `1/h`.
pub fn gamma_upper(n: u64, h: f64) -> Result<GammaResult> {
    gamma_upper_with(n, h, GammaOptions::default())
}

pub fn gamma_upper_with(n: u64, h: f64, opts: GammaOptions) -> Result<GammaResult> {
    if n < 2 {
        return Err(invalid(format!("n must be at least 2, got {n}")));
    }
    check_h(h)?;
    let k_max = last_term(n, h);
    if k_max == 0 {
        return Ok(GammaResult {
            value: 0.0,
            method: GammaMethod::ExactSum,
            precision_bits: 0,
        });
    }
    let cap = opts.max_precision_bits.max(64);
    let mut p = starting_precision(n, h, k_max);
    if p > cap {
        return Err(Error::NumericInstability {
            max_bits: cap,
            estimate: alternating_sum(n, h, k_max, cap).clamp(0.0, 1.0),
        });
    }
    let mut prev = alternating_sum(n, h, k_max, p);
    while p < cap {
        let next_p = (2 * p).min(cap);
        let next = alternating_sum(n, h, k_max, next_p);
        if agree(prev, next) {
            return Ok(GammaResult {
                value: next.clamp(0.0, 1.0),
                method: GammaMethod::ExactSum,
                precision_bits: next_p,
            });
        }
        prev = next;
        p = next_p;
    }
    Err(Error::NumericInstability {
        max_bits: cap,
        estimate: prev.clamp(0.0, 1.0),
    })
}

/// Large-`n` limit `1 - exp(-n exp(-n/(2h)))`.
pub fn gamma_gumbel(n: u64, h: f64) -> Result<GammaResult> {
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    check_h(h)?;
    let n = n as f64;
    let value = -(-n * (-n / (2.0 * h)).exp()).exp_m1();
    Ok(GammaResult {
        value: value.clamp(0.0, 1.0),
        method: GammaMethod::Gumbel,
        precision_bits: 0,
    })
}

/// [`gamma_upper`], falling back to [`gamma_gumbel`] (flagged in `method`) when the
/// precision escalation does not settle.
pub fn gamma_upper_or_gumbel(n: u64, h: f64) -> Result<GammaResult> {
    match gamma_upper(n, h) {
        Err(Error::NumericInstability { .. }) => gamma_gumbel(n, h),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sum_below_one() {
        let g = gamma_upper(100, 0.5).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.method, GammaMethod::ExactSum);
    }

    #[test]
    fn single_term() {
        // 10 * (2/3)^9
        let want = 10.0 * (2.0f64 / 3.0).powi(9);
        let g = gamma_upper(10, 1.5).unwrap();
        assert!((g.value - want).abs() < 1e-12, "{}", g.value);
    }

    #[test]
    fn two_terms_by_hand() {
        // n = 20, h = 2.5: 20 (0.8)^19 - 190 (0.6)^19
        let want = 20.0 * 0.8f64.powi(19) - 190.0 * 0.6f64.powi(19);
        let g = gamma_upper(20, 2.5).unwrap();
        assert!((g.value - want).abs() < 1e-13);
    }

    #[test]
    fn big_float_conversion() {
        for v in [0.75, -3.5e-7, 1.0, 123456.789, 1e-300] {
            assert_eq!(to_f64(&BigFloat::from_f64(v, 256)), v);
        }
        assert_eq!(to_f64(&BigFloat::from_u64(0, 128)), 0.0);
    }

    #[test]
    fn gumbel_values() {
        assert_eq!(gamma_gumbel(100, 0.01).unwrap().value, 0.0);
        let g = gamma_gumbel(10_000, 700.0).unwrap().value;
        let want = 1.0 - (-1e4 * (-1e4f64 / 1400.0).exp()).exp();
        assert!((g - want).abs() < 1e-15);
        assert!((g - 0.999631).abs() < 1e-6);
        assert!(gamma_gumbel(0, 1.0).is_err());
        assert!(gamma_gumbel(10, 0.0).is_err());
    }

    #[test]
    fn cap_too_small_reports_instability() {
        let err = gamma_upper_with(
            10_000,
            2500.0,
            GammaOptions {
                max_precision_bits: 128,
            },
        )
        .unwrap_err();
        match err {
            Error::NumericInstability { max_bits, estimate } => {
                assert_eq!(max_bits, 128);
                assert!((0.0..=1.0).contains(&estimate));
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = gamma_upper_or_gumbel(10, 1.5).unwrap();
        assert_eq!(g.method, GammaMethod::ExactSum);
    }

    #[test]
    fn invalid_inputs() {
        assert!(gamma_upper(1, 3.0).is_err());
        assert!(gamma_upper(10, -1.0).is_err());
        assert!(gamma_upper(10, f64::NAN).is_err());
    }
}
