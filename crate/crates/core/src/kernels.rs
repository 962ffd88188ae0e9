//! Positive radial kernels `K_h(x, x') = k_h(d(x, x'))` with support `[0, 1/h]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::torus::{torus_distance, TorusPoint};

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A kernel profile `k_h` together with its support parameter `h`.
///
/// The profile is only consulted on `[0, 1/h)`; evaluation returns 0 from `1/h` on,
/// so user-supplied profiles need not handle the tail themselves.
#[derive(Clone)]
pub struct KernelFamily {
    name: String,
    h: f64,
    profile: Profile,
}

impl fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelFamily")
            .field("name", &self.name)
            .field("h", &self.h)
            .finish()
    }
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "support parameter h must be positive and finite, got {h}"
        )))
    }
}

impl KernelFamily {
    /// `k_h(t) = max(0, 1 - h t)`.
    pub fn hat(h: f64) -> Result<Self> {
        check_h(h)?;
        Ok(KernelFamily {
            name: "hat".into(),
            h,
            profile: Arc::new(move |t| (1.0 - h * t).max(0.0)),
        })
    }

    /// A user-supplied profile on `[0, 1/h)`; must be nonnegative with `profile(0) > 0`.
    pub fn custom<F>(name: impl Into<String>, h: f64, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_h(h)?;
        let k0 = profile(0.0);
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(invalid(format!(
                "kernel profile must be positive at 0, got {k0}"
            )));
        }
        Ok(KernelFamily {
            name: name.into(),
            h,
            profile: Arc::new(profile),
        })
    }

    /// Looks up a built-in kernel by name. Only `"hat"` exists.
    pub fn by_name(name: &str, h: f64) -> Result<Self> {
        match name {
            "hat" => Self::hat(h),
            other => Err(invalid(format!(
                "unknown kernel '{other}' (expected 'hat')"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `1/h`.
    pub fn support_radius(&self) -> f64 {
        1.0 / self.h
    }

    /// `k_h(t)` for a distance `t >= 0`.
    #[inline]
    pub fn profile(&self, t: f64) -> f64 {
        if t >= self.support_radius() {
            0.0
        } else {
            (self.profile)(t).max(0.0)
        }
    }

    /// `k_h(0)`.
    pub fn at_zero(&self) -> f64 {
        self.profile(0.0)
    }

    /// `K_h(a, b) = k_h(d(a, b))`.
    #[inline]
    pub fn eval_pair(&self, a: TorusPoint, b: TorusPoint) -> f64 {
        self.profile(torus_distance(a, b))
    }
}

pub fn hat_kernel(h: f64) -> Result<KernelFamily> {
    KernelFamily::hat(h)
}

pub fn eval_pair(k: &KernelFamily, a: TorusPoint, b: TorusPoint) -> f64 {
    k.eval_pair(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_values() {
        let k = KernelFamily::hat(2.0).unwrap();
        assert_eq!(k.profile(0.0), 1.0);
        assert_eq!(k.profile(0.5), 0.0);
        assert_eq!(k.profile(0.25), 0.5);
        assert_eq!(k.profile(3.0), 0.0);
        assert!(KernelFamily::hat(0.0).is_err());
        assert!(KernelFamily::hat(-1.0).is_err());
    }

    #[test]
    fn pair_values() {
        let k = KernelFamily::hat(4.0).unwrap();
        let p = TorusPoint::new;
        assert_eq!(k.eval_pair(p(0.0), p(0.125)), 0.5);
        assert_eq!(k.eval_pair(p(0.3), p(0.3)), 1.0);
        assert_eq!(k.eval_pair(p(0.0), p(0.5)), 0.0);
        assert_eq!(k.eval_pair(p(0.95), p(0.075)), 0.5);
    }

    #[test]
    fn custom_profile_is_cut_at_support() {
        let k = KernelFamily::custom("box", 5.0, |_| 1.0).unwrap();
        assert_eq!(k.profile(0.1999), 1.0);
        assert_eq!(k.profile(0.2), 0.0);
        assert!(KernelFamily::custom("zero", 5.0, |_| 0.0).is_err());
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(KernelFamily::by_name("hat", 3.0).unwrap().name(), "hat");
        assert!(KernelFamily::by_name("gauss", 3.0).is_err());
    }
}
