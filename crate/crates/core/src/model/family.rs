//! Zero sequences in the upper half-plane. The zeros of E are the conjugates.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Enumeration `t ↦ z(t)` of a user-defined zero family. It is evaluated at
/// integers for the enumerated zeros and at real `t` for the continuum tail,
/// so it must interpolate smoothly for large `|t|`.
pub type ZeroGenerator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct CustomFamily {
    pub label: String,
    pub generator: ZeroGenerator,
    /// Whether index 0 is part of the sequence.
    pub include_zero_index: bool,
    /// `|Re z(t)| ~ |t|^x_exponent` for large `|t|`.
    pub x_exponent: f64,
    /// `Im z(t) ~ |t|^(-y_exponent)` for large `|t|`.
    pub y_exponent: f64,
    /// `z(-t) = -conj(z(t))` for all `t`.
    pub symmetric: bool,
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily")
            .field("label", &self.label)
            .field("x_exponent", &self.x_exponent)
            .field("y_exponent", &self.y_exponent)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

/// Zero data of a Hermite–Biehler function, stored as the upper half-plane
/// points `z_n` (E vanishes at `conj(z_n)`).
#[derive(Debug, Clone)]
pub enum ZeroFamily {
    FiniteList(Vec<Complex64>),
    /// `E(z) = exp(-i a z)`, no zeros.
    PwExponential { a: f64 },
    /// `z_n = |n|^alpha sign(n) + i` for `n != 0`, `z_0 = i`.
    Power { alpha: f64 },
    /// `z_n = n - delta + i n^(-4 delta)` (n > 0), `n + delta + i |n|^(-4 delta)` (n < 0), `z_0 = i`.
    Ls { delta: f64 },
    Custom(CustomFamily),
}

impl ZeroFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            ZeroFamily::FiniteList(z) => {
                if let Some(bad) = z.iter().find(|z| !(z.im > 0.0) || !z.re.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "zero {bad} is not in the open upper half-plane"
                    )));
                }
            }
            ZeroFamily::PwExponential { a } => {
                if !(*a > 0.0) {
                    return Err(Error::InvalidModel(format!("exponential type a = {a} must be > 0")));
                }
            }
            ZeroFamily::Power { alpha } => {
                if !(*alpha > 0.5 && *alpha < 1.0) {
                    return Err(Error::InvalidModel(format!("alpha = {alpha} must lie in (1/2, 1)")));
                }
            }
            ZeroFamily::Ls { delta } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(Error::InvalidModel(format!("delta = {delta} must lie in (0, 1)")));
                }
            }
            ZeroFamily::Custom(c) => {
                if !(c.x_exponent > 0.0) || c.y_exponent < 0.0 {
                    return Err(Error::InvalidModel("custom family needs x_exponent > 0 and y_exponent >= 0".into()));
                }
                // Blaschke summability of y/|z|^2 ~ t^-(q+2p).
                if c.y_exponent + 2.0 * c.x_exponent <= 1.0 {
                    return Err(Error::InvalidModel(
                        "declared tail exponents violate the Blaschke condition".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ZeroFamily::Power { .. } | ZeroFamily::Ls { .. } | ZeroFamily::Custom(_))
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            ZeroFamily::Power { .. } | ZeroFamily::Ls { .. } => true,
            ZeroFamily::Custom(c) => c.symmetric,
            _ => false,
        }
    }

    /// Continuous interpolation of the sequence; `t` may be negative.
    pub fn zero_cont(&self, t: f64) -> Complex64 {
        match self {
            ZeroFamily::Power { alpha } => Complex64::new(t.abs().powf(*alpha) * t.signum(), 1.0),
            ZeroFamily::Ls { delta } => {
                let a = t.abs();
                Complex64::new(t.signum() * (a - delta), a.powf(-4.0 * delta))
            }
            ZeroFamily::Custom(c) => (c.generator)(t),
            _ => panic!("zero_cont called on a finite family"),
        }
    }

    /// The n-th zero, if `n` is a valid index.
    pub fn zero(&self, n: i64) -> Option<Complex64> {
        match self {
            ZeroFamily::FiniteList(z) => usize::try_from(n).ok().and_then(|i| z.get(i).copied()),
            ZeroFamily::PwExponential { .. } => None,
            ZeroFamily::Power { .. } | ZeroFamily::Ls { .. } => {
                if n == 0 {
                    Some(Complex64::new(0.0, 1.0))
                } else {
                    Some(self.zero_cont(n as f64))
                }
            }
            ZeroFamily::Custom(c) => {
                if n == 0 && !c.include_zero_index {
                    None
                } else {
                    Some((c.generator)(n as f64))
                }
            }
        }
    }

    /// Zeros with `|n| <= n_max`, in index order (-n_max..=n_max for infinite families).
    pub fn enumerate(&self, n_max: usize) -> Vec<Complex64> {
        match self {
            ZeroFamily::FiniteList(z) => z.clone(),
            ZeroFamily::PwExponential { .. } => Vec::new(),
            _ => {
                let n = n_max as i64;
                (-n..=n).filter_map(|k| self.zero(k)).collect()
            }
        }
    }

    /// Declared asymptotic exponents `(p, q)`: `|Re z_n| ~ n^p`, `Im z_n ~ n^-q`.
    pub fn tail_exponents(&self) -> (f64, f64) {
        match self {
            ZeroFamily::Power { alpha } => (*alpha, 0.0),
            ZeroFamily::Ls { delta } => (1.0, 4.0 * delta),
            ZeroFamily::Custom(c) => (c.x_exponent, c.y_exponent),
            _ => (1.0, 0.0),
        }
    }

    /// True when the tail zeros stay a unit distance away from the real axis,
    /// so that continuum sums over the tail are smooth at every evaluation point.
    pub fn smooth_tail(&self) -> bool {
        match self {
            ZeroFamily::Power { .. } => true,
            ZeroFamily::Custom(c) => c.y_exponent == 0.0,
            _ => false,
        }
    }

    /// For the tail on one side: real part `xi > 0` (taken as `|Re z|`) mapped to
    /// `(Im z, dt/dxi)`.
    pub fn tail_side_at(&self, xi: f64, positive: bool) -> (f64, f64) {
        match self {
            ZeroFamily::Power { alpha } => {
                let inv = 1.0 / alpha;
                (1.0, inv * xi.powf(inv - 1.0))
            }
            ZeroFamily::Ls { delta } => ((xi + delta).powf(-4.0 * delta), 1.0),
            ZeroFamily::Custom(c) => {
                let sign = if positive { 1.0 } else { -1.0 };
                let t = invert_real_part(c, xi, sign);
                let h = 1e-4 * t.max(1.0);
                let dxdt = ((c.generator)(sign * (t + h)).re - (c.generator)(sign * (t - h)).re).abs()
                    / (2.0 * h);
                ((c.generator)(sign * t).im, 1.0 / dxdt)
            }
            _ => (0.0, 0.0),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ZeroFamily::FiniteList(z) => format!("finite[{}]", z.len()),
            ZeroFamily::PwExponential { a } => format!("pw(a={a})"),
            ZeroFamily::Power { alpha } => format!("power(alpha={alpha})"),
            ZeroFamily::Ls { delta } => format!("ls(delta={delta})"),
            ZeroFamily::Custom(c) => format!("custom({})", c.label),
        }
    }
}

fn invert_real_part(c: &CustomFamily, xi: f64, sign: f64) -> f64 {
    let re = |t: f64| ((c.generator)(sign * t).re).abs();
    let mut lo = 1.0;
    let mut hi = 2.0;
    while re(hi) < xi && hi < 1e300 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if re(mid) < xi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ls_family_matches_definition() {
        let f = ZeroFamily::Ls { delta: 0.3 };
        let z5 = f.zero(5).unwrap();
        assert!((z5.re - 4.7).abs() < 1e-15);
        assert!((z5.im - 5f64.powf(-1.2)).abs() < 1e-15);
        let zm5 = f.zero(-5).unwrap();
        assert!((zm5.re + 4.7).abs() < 1e-15);
        assert_eq!(f.zero(0).unwrap(), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn power_family_is_mirror_symmetric() {
        let f = ZeroFamily::Power { alpha: 0.75 };
        let a = f.zero(7).unwrap();
        let b = f.zero(-7).unwrap();
        assert!((b + a.conj()).norm() < 1e-15);
    }

    #[test]
    fn validation_rejects_lower_half_plane_zeros() {
        let f = ZeroFamily::FiniteList(vec![Complex64::new(0.0, -1.0)]);
        assert!(f.validate().is_err());
        assert!(ZeroFamily::Power { alpha: 0.4 }.validate().is_err());
    }

    #[test]
    fn tail_side_density_inverts_power_law() {
        let f = ZeroFamily::Power { alpha: 0.75 };
        let (y, rho) = f.tail_side_at(1000.0, true);
        assert_eq!(y, 1.0);
        // dt/dxi at xi = t^alpha
        let t = 1000f64.powf(1.0 / 0.75);
        assert!((rho - 1.0 / (0.75 * t.powf(-0.25))).abs() / rho < 1e-12);
    }
}
