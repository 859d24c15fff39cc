//! Hermite–Biehler functions given by their zeros.
//!
//! For zeros `z_n` in the upper half-plane the inner function is
//!
//! ```text
//! Θ(z) = exp(iτz) Π ε_n (z - z_n) / (z - conj(z_n)),   ε_n = |z_n² + 1| / (z_n² + 1)
//! ```
//!
//! with `τ = 2a` where `E(z) = exp(-iaz) Π (...)`. Everything is accumulated as
//! `L(z) = log Θ(z)`; evaluation of the Blaschke part goes through a multipole
//! tree over the enumerated zeros and the zeros beyond `n_max` are handled by
//! the tail module.

mod config;
mod family;
mod tail;
pub(crate) mod tree;

pub use config::{ModelConfig, ModelSpec};
pub use family::{CustomFamily, ZeroFamily, ZeroGenerator};

use crate::error::{Error, Result};
use crate::quadrature::adaptive::{integrate, Tolerance};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use tail::Tail;
use tree::ZeroTree;

/// How many zeros are enumerated and how accurately the rest is approximated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Truncation {
    pub n_max: usize,
    pub tail_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n_max: 100_000, tail_tol: 1e-6 }
    }
}

/// `Θ(z)` together with `log Θ(z)` and an estimate of the truncation error of
/// the logarithm (equivalently, the relative error of the value).
#[derive(Debug, Clone, Copy)]
pub struct ThetaValue {
    pub value: Complex64,
    pub log: Complex64,
    pub tail_error: f64,
}

#[derive(Debug, Clone)]
pub struct HermiteBiehlerModel {
    family: ZeroFamily,
    a_phase: f64,
    tau: f64,
    truncation: Truncation,
    zeros: Vec<Complex64>,
    tree: ZeroTree,
    /// `Σ log ε_n` over the enumerated zeros (purely imaginary).
    log_eps: f64,
    /// Sum of the unimodular phases attached to the factors of E.
    e_phase: f64,
    tail: Option<Tail>,
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

impl HermiteBiehlerModel {
    /// Builds a model. For the Paley–Wiener family `a_phase` is taken from the family.
    pub fn new(family: ZeroFamily, a_phase: f64, truncation: Truncation) -> Result<Self> {
        family.validate()?;
        let a_phase = match family {
            ZeroFamily::PwExponential { a } => a,
            _ => a_phase,
        };
        if !(a_phase >= 0.0) || !a_phase.is_finite() {
            return Err(Error::InvalidModel(format!("a_phase must be nonnegative, got {a_phase}")));
        }
        if family.is_infinite() {
            if truncation.n_max == 0 {
                return Err(Error::InvalidModel("n_max must be positive".into()));
            }
            let (p, q) = family.tail_exponents();
            if 2.0 * p + q <= 1.0 {
                return Err(Error::InvalidModel(format!(
                    "declared tail exponents ({p}, {q}) violate the Blaschke condition"
                )));
            }
        }
        if !(truncation.tail_tol > 0.0 && truncation.tail_tol < 1.0) {
            return Err(Error::InvalidModel("tail_tol must lie in (0, 1)".into()));
        }
        let zeros = family.enumerate(truncation.n_max);
        let infinite = family.is_infinite();
        let mut log_eps = 0.0;
        let mut e_phase = 0.0;
        for z in &zeros {
            let w = z * z + 1.0;
            let arg_w = if w.norm() <= 1e-14 { 0.0 } else { w.arg() };
            log_eps -= arg_w;
            if infinite {
                // ε_n z_n / conj(z_n) has argument 2 Arg z_n - Arg(z_n² + 1).
                e_phase -= 0.5 * (2.0 * z.arg() - arg_w);
            } else {
                e_phase += 0.5 * arg_w;
            }
        }
        let tail = if infinite { Some(Tail::new(&family, truncation.n_max, truncation.tail_tol)?) } else { None };
        let tree = ZeroTree::new(zeros.clone());
        Ok(HermiteBiehlerModel {
            family,
            a_phase,
            tau: 2.0 * a_phase,
            truncation,
            zeros,
            tree,
            log_eps: wrap(log_eps),
            e_phase: wrap(e_phase),
            tail,
        })
    }

    /// `E(z) = exp(-iaz)`.
    pub fn paley_wiener(a: f64) -> Result<Self> {
        Self::new(ZeroFamily::PwExponential { a }, a, Truncation::default())
    }

    pub fn finite(zeros: Vec<Complex64>, a_phase: f64) -> Result<Self> {
        Self::new(ZeroFamily::FiniteList(zeros), a_phase, Truncation::default())
    }

    pub fn power(alpha: f64, truncation: Truncation) -> Result<Self> {
        Self::new(ZeroFamily::Power { alpha }, 0.0, truncation)
    }

    pub fn ls(delta: f64, truncation: Truncation) -> Result<Self> {
        Self::new(ZeroFamily::Ls { delta }, 0.0, truncation)
    }

    pub fn family(&self) -> &ZeroFamily {
        &self.family
    }

    pub fn a_phase(&self) -> f64 {
        self.a_phase
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Enumerated zeros of Θ in index order.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// Enumerated zeros of Θ sorted by real part.
    pub fn zeros_by_real_part(&self) -> &[Complex64] {
        self.tree.zeros()
    }

    /// Modulus of the smallest zero that is not enumerated (`+inf` when all are).
    pub fn tail_radius(&self) -> f64 {
        self.tail.as_ref().map_or(f64::INFINITY, |t| t.radius())
    }

    pub fn label(&self) -> String {
        match self.family {
            ZeroFamily::FiniteList(_) | ZeroFamily::PwExponential { .. } => self.family.label(),
            _ => format!("{}[N={}]", self.family.label(), self.truncation.n_max),
        }
    }

    /// `log Θ(z)` and the tail error estimate. The imaginary part is reduced to (-π, π].
    pub fn log_theta(&self, z: Complex64) -> Result<(Complex64, f64)> {
        let mut l = Complex64::new(0.0, self.tau) * z + Complex64::new(0.0, self.log_eps);
        l += self.tree.log_blaschke(z)?;
        let mut err = 0.0;
        if let Some(t) = &self.tail {
            let (v, e) = t.log_theta(z)?;
            l += v;
            err = e;
        }
        Ok((Complex64::new(l.re, wrap(l.im)), err))
    }

    pub fn eval_theta(&self, z: Complex64) -> Result<ThetaValue> {
        let (log, tail_error) = self.log_theta(z)?;
        Ok(ThetaValue { value: log.exp(), log, tail_error })
    }

    pub fn theta(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_theta(z)?.value)
    }

    /// `log |Θ(z)|`; exact zero on the real axis.
    pub fn log_abs_theta(&self, z: Complex64) -> Result<f64> {
        Ok(self.log_abs_theta_est(z)?.0)
    }

    pub fn log_abs_theta_est(&self, z: Complex64) -> Result<(f64, f64)> {
        let mut v = -self.tau * z.im + self.tree.log_abs_blaschke(z)?;
        let mut err = 0.0;
        if let Some(t) = &self.tail {
            let (tv, te) = t.log_abs_theta(z)?;
            v += tv;
            err = te;
        }
        Ok((v, err))
    }

    /// `1 - |Θ(z)|²` without cancellation.
    pub fn one_minus_abs_theta_sq(&self, z: Complex64) -> Result<f64> {
        Ok(-(2.0 * self.log_abs_theta(z)?).exp_m1())
    }

    /// `Θ'(z) / Θ(z)`.
    pub fn dlog_theta(&self, z: Complex64) -> Result<Complex64> {
        let mut v = Complex64::new(0.0, self.tau) + self.tree.dlog_blaschke(z)?;
        if let Some(t) = &self.tail {
            v += t.dlog_theta(z)?.0;
        }
        Ok(v)
    }

    /// `log Θ(z) - log Θ(w)` modulo 2πi, accurate when `z` and `w` are close.
    pub fn log_theta_diff(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        let mut v = Complex64::new(0.0, self.tau) * (z - w) + self.tree.ldiff_blaschke(z, w)?;
        if let Some(t) = &self.tail {
            v += t.ldiff(z, w)?.0;
        }
        Ok(v)
    }

    /// `φ'(x) = a + Σ y_n / |x - conj(z_n)|²`.
    pub fn phase_derivative(&self, x: f64) -> Result<f64> {
        Ok(self.phase_derivative_est(x)?.0)
    }

    pub fn phase_derivative_est(&self, x: f64) -> Result<(f64, f64)> {
        let z = Complex64::new(x, 0.0);
        let mut v = 0.5 * (self.tau + self.tree.dlog_blaschke(z)?.im);
        let mut err = 0.0;
        if let Some(t) = &self.tail {
            let (d, e) = t.dlog_theta(z)?;
            v += 0.5 * d.im;
            err = 0.5 * e;
        }
        Ok((v, err))
    }

    /// `(log |E(z)|, arg E(z))`. The argument is the continuous branch on the
    /// closed upper half-plane, without reduction modulo 2π.
    pub fn eval_e(&self, z: Complex64) -> Result<(f64, f64)> {
        let mut log_mod = self.a_phase * z.im;
        let mut arg = -self.a_phase * z.re + self.e_phase;
        if self.zeros.iter().any(|zn| z == zn.conj()) {
            return Err(Error::PoleHit(z));
        }
        if self.family.is_infinite() {
            let zz = z.norm_sqr();
            let mut m = 0.0;
            let mut a = 0.0;
            for zn in self.zeros.iter().rev() {
                let r2 = zn.norm_sqr();
                m += 0.5 * ((zz - 2.0 * (z * zn).re) / r2).ln_1p();
                a += (1.0 - z / zn.conj()).arg();
            }
            log_mod += m;
            arg += a;
            if let Some(t) = &self.tail {
                let (v, _) = t.log_e(z)?;
                log_mod += v.re;
                arg += v.im;
            }
        } else {
            for zn in &self.zeros {
                let d = z - zn.conj();
                log_mod += d.norm().ln();
                arg += d.arg();
            }
        }
        Ok((log_mod, arg))
    }

    /// `φ(x) = -arg E(0) + ∫_0^x φ'`.
    pub fn phase(&self, x: f64) -> Result<f64> {
        let (_, arg0) = self.eval_e(Complex64::new(0.0, 0.0))?;
        Ok(-arg0 + self.phase_increment(0.0, x)?)
    }

    /// `∫_a^b φ'` by adaptive quadrature, with break points at nearby zeros.
    pub fn phase_increment(&self, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if self.zeros.is_empty() {
            return Ok((b - a) * self.a_phase);
        }
        let sorted = self.zeros_by_real_part();
        let start = sorted.partition_point(|z| z.re < lo);
        let end = sorted.partition_point(|z| z.re <= hi);
        let mut breaks: Vec<f64> = vec![lo, hi];
        if end - start <= 100_000 {
            breaks.extend(sorted[start..end].iter().map(|z| z.re));
        }
        let err = std::sync::Mutex::new(None);
        let f = |t: f64| match self.phase_derivative(t) {
            Ok(v) => v,
            Err(e) => {
                err.lock().unwrap().get_or_insert(e);
                0.0
            }
        };
        let q = integrate(&f, &breaks, 1.0, Tolerance { abs: 1e-14, rel: 1e-12 });
        if let Some(e) = err.into_inner().unwrap() {
            return Err(e);
        }
        if !q.converged {
            return Err(Error::NonConvergent(format!("phase integral on [{lo}, {hi}]")));
        }
        Ok(if a < b { q.value } else { -q.value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn paley_wiener_theta_at_i() {
        let m = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        assert_relative_eq!(m.theta(c(0.0, 1.0)).unwrap().re, (-2.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn single_factor_values() {
        let m = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let t = m.theta(c(0.0, 2.0)).unwrap();
        assert!((t - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((m.theta(c(5.0, 0.0)).unwrap().norm() - 1.0).abs() < 1e-12);
        assert_eq!(m.phase_derivative(0.0).unwrap(), 1.0);
        let (lm, _) = m.eval_e(c(0.0, 0.0)).unwrap();
        assert!(lm.abs() < 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        let m = HermiteBiehlerModel::finite(vec![c(1.0, 0.5)], 0.0).unwrap();
        assert!(matches!(m.theta(c(1.0, -0.5)), Err(Error::PoleHit(_))));
    }

    #[test]
    fn e_sharp_over_e_is_theta() {
        let zs = vec![c(0.0, 1.0), c(2.0, 0.3), c(-1.5, 2.0), c(0.3, 0.05)];
        let m = HermiteBiehlerModel::finite(zs, 0.7).unwrap();
        for z in [c(0.4, 0.2), c(-3.0, 1.0), c(1.0, 4.0)] {
            let (lm, arg) = m.eval_e(z).unwrap();
            let (lms, args) = m.eval_e(z.conj()).unwrap();
            let ratio = c(lms - lm, -args - arg).exp();
            assert!((ratio - m.theta(z).unwrap()).norm() < 1e-12, "{ratio} {}", m.theta(z).unwrap());
        }
    }

    #[test]
    fn infinite_family_e_normalization_reproduces_theta() {
        let m = HermiteBiehlerModel::ls(0.3, Truncation { n_max: 2000, tail_tol: 1e-8 }).unwrap();
        for z in [c(0.5, 0.3), c(10.5, 1.0), c(-7.2, 0.1)] {
            let (lm, arg) = m.eval_e(z).unwrap();
            let (lms, args) = m.eval_e(z.conj()).unwrap();
            let ratio = c(lms - lm, -args - arg).exp();
            let t = m.theta(z).unwrap();
            assert!((ratio.norm() - t.norm()).abs() < 1e-8, "{ratio} {t}");
        }
    }

    #[test]
    fn lower_half_plane_reflection() {
        let m = HermiteBiehlerModel::power(0.75, Truncation { n_max: 3000, tail_tol: 1e-8 }).unwrap();
        for z in [c(1.0, 0.5), c(-40.0, 2.0), c(90.0, 0.01)] {
            let a = m.theta(z).unwrap();
            let b = m.theta(z.conj()).unwrap();
            assert!((b * a.conj() - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn phase_of_single_factor_is_arctan() {
        let m = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        for x in [-3.0, 0.5, 10.0] {
            let d = m.phase(x).unwrap() - m.phase(0.0).unwrap();
            assert!((d - f64::atan(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn pw_phase_is_linear() {
        let m = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        assert!((m.phase(2.5).unwrap() - m.phase(0.0).unwrap() - 2.5).abs() < 1e-12);
    }
}
