//! Contribution of the zeros with `|n| > n_max`.
//!
//! Sums over the tail are replaced by integrals over the continuous
//! interpolation `t ↦ z(t)` plus the midpoint Euler–Maclaurin correction:
//!
//! ```text
//! sum_{n > N} f(n) ≈ ∫_{N+1/2}^∞ f(t) dt + f'(N+1/2) / 24
//! ```
//!
//! Near the origin (`|z| <= R/4`, `R` the smallest tail modulus) the tail of
//! `log Θ` and `log E` is a Taylor series whose coefficients are such integrals.
//! Farther out only families whose tail zeros stay away from the real axis are
//! supported, by integrating the per-point summand directly.

use super::family::ZeroFamily;
use crate::error::{Error, Result};
use crate::numeric::clog1p;
use crate::quadrature::adaptive::{integrate, integrate_semi_infinite, QuadValue, Tolerance};
use num_complex::Complex64;

const ORDER: usize = 20;
const TAYLOR_FRACTION: f64 = 0.25;

#[derive(Debug, Clone)]
pub(crate) struct Tail {
    family: ZeroFamily,
    t0: f64,
    radius: f64,
    /// `log Θ` tail is `sum_k theta[k-1] z^k`.
    theta: Vec<Complex64>,
    theta_err: Vec<f64>,
    /// `log E` tail is `-sum_k e[k-1] z^k`; `None` when the sums do not converge.
    e: Option<Vec<Complex64>>,
    e_err: Vec<f64>,
    tol: f64,
}

/// A tail value with its error estimate.
pub(crate) type Est<T> = (T, f64);

impl Tail {
    pub fn new(family: &ZeroFamily, n_max: usize, tol: f64) -> Result<Self> {
        let t0 = n_max as f64 + 0.5;
        let radius = family.zero_cont(t0).norm().min(family.zero_cont(-t0).norm());
        let coeff_tol = Tolerance { abs: 1e-300, rel: (tol * 1e-3).max(1e-13) };
        let mut theta = Vec::with_capacity(ORDER);
        let mut theta_err = Vec::with_capacity(ORDER);
        let mut e = Vec::with_capacity(ORDER);
        let mut e_err = Vec::with_capacity(ORDER);
        let mut e_ok = true;
        for k in 1..=ORDER as i32 {
            let kf = k as f64;
            let g = |z: Complex64| (z.conj().powi(-k) - z.powi(-k)) / kf;
            let (v, err, ok) = tail_sum(family, t0, &g, coeff_tol);
            if !ok {
                return Err(Error::TailNotConvergent {
                    at: Complex64::new(0.0, 0.0),
                    reason: format!("tail coefficient {k} of log Θ did not converge"),
                });
            }
            theta.push(v);
            theta_err.push(err);
            let h = |z: Complex64| z.conj().powi(-k) / kf;
            let (v, err, ok) = tail_sum(family, t0, &h, coeff_tol);
            e_ok &= ok;
            e.push(v);
            e_err.push(err);
        }
        Ok(Tail {
            family: family.clone(),
            t0,
            radius,
            theta,
            theta_err,
            e: e_ok.then_some(e),
            e_err,
            tol,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn taylor_ok(&self, z: Complex64) -> bool {
        z.norm() <= TAYLOR_FRACTION * self.radius
    }

    fn not_convergent(&self, z: Complex64) -> Error {
        Error::TailNotConvergent {
            at: z,
            reason: format!(
                "|z| exceeds the tail expansion radius {:.4e} and the family tail is not smooth",
                TAYLOR_FRACTION * self.radius
            ),
        }
    }

    fn series(&self, c: &[Complex64], cerr: &[f64], z: Complex64) -> Est<Complex64> {
        let mut v = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            v = (v + a) * z;
        }
        let r = z.norm();
        let mut err = 0.0;
        let mut p = r;
        for e in cerr {
            err += e * p;
            p *= r;
        }
        err += c[ORDER - 1].norm() * r.powi(ORDER as i32) * 2.0;
        (v, err)
    }

    fn series_diff(&self, c: &[Complex64], cerr: &[f64], z: Complex64, w: Complex64) -> Est<Complex64> {
        let d = z - w;
        let mut diff = Complex64::new(0.0, 0.0);
        let mut pw = Complex64::new(1.0, 0.0);
        let mut v = Complex64::new(0.0, 0.0);
        let r = z.norm().max(w.norm());
        let mut err = 0.0;
        let mut pr = 1.0;
        for (k, a) in c.iter().enumerate() {
            diff = z * diff + d * pw;
            pw *= w;
            v += a * diff;
            pr *= r;
            err += cerr[k] * (k + 1) as f64 * pr / r.max(1e-300) * d.norm();
        }
        err += c[ORDER - 1].norm() * r.powi(ORDER as i32) * 2.0;
        (v, err)
    }

    /// Tail of `log Θ(z)` (without a unimodular constant).
    pub fn log_theta(&self, z: Complex64) -> Result<Est<Complex64>> {
        if !self.taylor_ok(z) {
            return Err(Error::TailNotConvergent {
                at: z,
                reason: "the phase of the tail is only available inside the expansion radius".into(),
            });
        }
        Ok(self.series(&self.theta, &self.theta_err, z))
    }

    pub fn log_abs_theta(&self, z: Complex64) -> Result<Est<f64>> {
        if self.taylor_ok(z) {
            let (v, e) = self.series(&self.theta, &self.theta_err, z);
            return Ok((v.re, e));
        }
        if !self.family.smooth_tail() {
            return Err(self.not_convergent(z));
        }
        let y = z.im;
        self.continuum(
            z,
            &[z.re],
            |off, yn| 0.5 * (-4.0 * y * yn / (off * off + (y + yn) * (y + yn))).ln_1p(),
            |zn| 0.5 * (-4.0 * y * zn.im / (z - zn.conj()).norm_sqr()).ln_1p(),
        )
    }

    pub fn dlog_theta(&self, z: Complex64) -> Result<Est<Complex64>> {
        if self.taylor_ok(z) {
            let mut v = Complex64::new(0.0, 0.0);
            for (k, a) in self.theta.iter().enumerate().rev() {
                v = v * z + a * (k + 1) as f64;
            }
            let r = z.norm();
            let err = self
                .theta_err
                .iter()
                .enumerate()
                .map(|(k, e)| e * (k + 1) as f64 * r.powi(k as i32))
                .sum::<f64>()
                + self.theta[ORDER - 1].norm() * ORDER as f64 * r.powi(ORDER as i32 - 1) * 2.0;
            return Ok((v, err));
        }
        if !self.family.smooth_tail() {
            return Err(self.not_convergent(z));
        }
        let y = z.im;
        self.continuum(
            z,
            &[z.re],
            |off, yn| {
                Complex64::new(0.0, 2.0 * yn) / (Complex64::new(-off, y - yn) * Complex64::new(-off, y + yn))
            },
            |zn| Complex64::new(0.0, 2.0 * zn.im) / ((z - zn) * (z - zn.conj())),
        )
    }

    pub fn ldiff(&self, z: Complex64, w: Complex64) -> Result<Est<Complex64>> {
        if self.taylor_ok(z) && self.taylor_ok(w) {
            return Ok(self.series_diff(&self.theta, &self.theta_err, z, w));
        }
        if !self.family.smooth_tail() {
            return Err(self.not_convergent(if self.taylor_ok(z) { w } else { z }));
        }
        let d = z - w;
        let dre = w.re - z.re;
        self.continuum(
            z,
            &[z.re, w.re],
            |off, yn| {
                let a = Complex64::new(-off, z.im + yn);
                let b = Complex64::new(dre - off, w.im - yn);
                clog1p(d * Complex64::new(0.0, 2.0 * yn) / (a * b))
            },
            |zn| clog1p(d * Complex64::new(0.0, 2.0 * zn.im) / ((z - zn.conj()) * (w - zn))),
        )
    }

    /// Tail of `log E(z)` in the infinite-product normalization.
    pub fn log_e(&self, z: Complex64) -> Result<Est<Complex64>> {
        let Some(e) = &self.e else {
            return Err(Error::TailNotConvergent { at: z, reason: "tail of log E diverges".into() });
        };
        if !self.taylor_ok(z) {
            return Err(self.not_convergent(z));
        }
        let (v, err) = self.series(e, &self.e_err, z);
        Ok((-v, err))
    }

    /// Per-point continuum sum over both tails. `summand(off, y_n)` gets the
    /// signed offset `Re z_n - Re z` computed without cancellation; `direct`
    /// evaluates the same summand at an actual zero and is used for the
    /// Euler–Maclaurin correction.
    fn continuum<T, S, D>(&self, z: Complex64, peaks: &[f64], summand: S, direct: D) -> Result<Est<T>>
    where
        T: QuadValue,
        S: Fn(f64, f64) -> T + Sync,
        D: Fn(Complex64) -> T,
    {
        let anchor = z.re;
        let tol = Tolerance { abs: 1e-300, rel: self.tol };
        let mut total = T::default();
        let mut err = 0.0;
        for s in [1.0, -1.0] {
            let xi_t = self.family.zero_cont(s * self.t0).re.abs();
            let v0 = xi_t - s * anchor;
            let f = |v: f64| {
                let xi = v + s * anchor;
                let (yn, dens) = self.family.tail_side_at(xi, s > 0.0);
                summand(s * v, yn) * dens
            };
            let mut breaks = vec![v0];
            let mut top = v0;
            for &p in peaks {
                if p * s < 0.0 {
                    continue;
                }
                let vp = s * (p - anchor);
                let reach = 2.0 * ((vp - v0).abs() + 1.0);
                let mut h = 0.5;
                if vp > v0 {
                    breaks.push(vp);
                }
                while h <= reach {
                    for c in [vp - h, vp + h] {
                        if c > v0 {
                            breaks.push(c);
                        }
                    }
                    h *= 2.0;
                }
                top = top.max(vp + reach);
            }
            breaks.push(top);
            breaks.sort_by(f64::total_cmp);
            let mut value = T::default();
            if top > v0 {
                let q = integrate(&f, &breaks, f64::INFINITY, tol);
                if !q.converged {
                    return Err(Error::TailNotConvergent { at: z, reason: "tail quadrature failed".into() });
                }
                value = value + q.value;
                err += q.abs_error;
            }
            let start = top.max(v0);
            let scale = (start - v0).max(0.5 * (xi_t + anchor.abs())).max(1.0);
            let q = integrate_semi_infinite(&f, start, 1.0, scale, tol);
            if !q.converged {
                return Err(Error::TailNotConvergent { at: z, reason: "tail integral does not decay".into() });
            }
            total = total + value + q.value;
            err += q.abs_error;
        }
        let h = 1e-3 * self.t0;
        let g = |t: f64| direct(self.family.zero_cont(t)) + direct(self.family.zero_cont(-t));
        let corr = (g(self.t0 + h) - g(self.t0 - h)) * (1.0 / (2.0 * h * 24.0));
        err += corr.magnitude();
        Ok((total + corr, err))
    }
}

/// `sum_{|n| > N} g(z_n)` for a tail of a single function, with error estimate.
fn tail_sum<G>(family: &ZeroFamily, t0: f64, g: &G, tol: Tolerance) -> (Complex64, f64, bool)
where
    G: Fn(Complex64) -> Complex64 + Sync,
{
    let f = |t: f64| g(family.zero_cont(t)) + g(family.zero_cont(-t));
    let q = integrate_semi_infinite(&f, t0, 1.0, t0, tol);
    let h = 1e-3 * t0;
    let corr = (f(t0 + h) - f(t0 - h)) / (2.0 * h * 24.0);
    (q.value + corr, q.abs_error + corr.norm(), q.converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(family: &ZeroFamily, n0: i64, n1: i64, g: impl Fn(Complex64) -> Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for n in (n0..=n1).rev() {
            s += g(family.zero(n).unwrap()) + g(family.zero(-n).unwrap());
        }
        s
    }

    #[test]
    fn first_coefficients_match_long_partial_sums() {
        let fam = ZeroFamily::Power { alpha: 0.75 };
        let tail = Tail::new(&fam, 1000, 1e-8).unwrap();
        // The sum to 2e6 plus its own asymptotic remainder stands in for the full tail.
        let far = Tail::new(&fam, 2_000_000, 1e-8).unwrap();
        for k in 1..=3 {
            let kf = k as f64;
            let g = |z: Complex64| (z.conj().powi(-k) - z.powi(-k)) / kf;
            let exact = brute(&fam, 1001, 2_000_000, g) + far.theta[k as usize - 1];
            let got = tail.theta[k as usize - 1];
            assert!((got - exact).norm() <= 1e-6 * exact.norm() + 1e-18, "k={k}: {got} vs {exact}");
            assert!((got - exact).norm() <= 3.0 * tail.theta_err[k as usize - 1] + 1e-9 * exact.norm());
        }
    }

    #[test]
    fn continuum_matches_taylor_where_both_apply() {
        let fam = ZeroFamily::Power { alpha: 0.75 };
        let tail = Tail::new(&fam, 2000, 1e-9).unwrap();
        let z = Complex64::new(0.2 * tail.radius(), 0.3);
        let (a, _) = tail.log_abs_theta(z).unwrap();
        let y = z.im;
        let (b, eb) = tail
            .continuum(
                z,
                &[z.re],
                |off, yn| 0.5 * (-4.0 * y * yn / (off * off + (y + yn) * (y + yn))).ln_1p(),
                |zn| 0.5 * (-4.0 * y * zn.im / (z - zn.conj()).norm_sqr()).ln_1p(),
            )
            .unwrap();
        assert!((a - b).abs() <= 1e-6 * a.abs() + eb, "{a} {b}");
    }

    #[test]
    fn continuum_log_abs_matches_direct_sum_far_out() {
        let fam = ZeroFamily::Power { alpha: 0.75 };
        let tail = Tail::new(&fam, 200, 1e-8).unwrap();
        let z = Complex64::new(3000.0, 0.05);
        let (v, e) = tail.log_abs_theta(z).unwrap();
        let mut exact = 0.0;
        for n in (201..2_000_000i64).rev() {
            for m in [n, -n] {
                let zn = fam.zero(m).unwrap();
                exact += 0.5 * (-4.0 * z.im * zn.im / (z - zn.conj()).norm_sqr()).ln_1p();
            }
        }
        assert!((v - exact).abs() <= 1e-4 * exact.abs() + e, "{v} {exact} {e}");
    }

    #[test]
    fn ls_tail_refuses_far_points() {
        let tail = Tail::new(&ZeroFamily::Ls { delta: 0.3 }, 100, 1e-6).unwrap();
        assert!(tail.log_abs_theta(Complex64::new(1e4, 1.0)).is_err());
        assert!(tail.log_abs_theta(Complex64::new(5.0, 1.0)).is_ok());
    }
}
