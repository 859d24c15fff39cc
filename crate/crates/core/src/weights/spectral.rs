//! Real nodes of `A_α = (e^{iα} E + e^{-iα} E♯)/2`, their masses, disc radii and
//! the sampling expansion built on them.

use crate::error::{Error, Result};
use crate::levelset::d0;
use crate::model::HermiteBiehlerModel;
use crate::numeric::cexpm1;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SpectralData {
    nodes: Vec<f64>,
    masses: Vec<f64>,
    radii: Vec<f64>,
    range: (f64, f64),
    rotation: f64,
}

/// Partial sums of a positive series ordered by `|t_n|`, with a fitted tail.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCheck {
    /// `(|t| cut-off, partial sum)` at doubling node counts.
    pub partial: Vec<(f64, f64)>,
    /// Power-law fit of the remaining tail, `None` if the fitted decay is not summable.
    pub tail: Option<f64>,
}

impl SeriesCheck {
    pub(crate) fn from_terms(t: &[f64], terms: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..t.len()).collect();
        order.sort_by(|&a, &b| t[a].abs().total_cmp(&t[b].abs()));
        let mut partial = Vec::new();
        let mut s = 0.0;
        let mut next = 1;
        for (k, &i) in order.iter().enumerate() {
            s += terms[i];
            if k + 1 == next || k + 1 == order.len() {
                partial.push((t[i].abs(), s));
                next *= 2;
            }
        }
        // Fit terms ~ C n^-p on the outer half of the nodes.
        let n = order.len();
        let tail = if n >= 16 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = (n / 2..n)
                .filter(|&k| terms[order[k]] > 0.0)
                .map(|k| (((k + 1) as f64).ln(), terms[order[k]].ln()))
                .unzip();
            let p = -crate::numeric::ls_slope(&xs, &ys);
            let c = (ys.iter().zip(&xs).map(|(y, x)| y + p * x).sum::<f64>() / xs.len() as f64).exp();
            (p > 1.0).then(|| c * (n as f64).powf(1.0 - p) / (p - 1.0))
        } else {
            None
        };
        SeriesCheck { partial, tail }
    }

    pub fn total(&self) -> f64 {
        self.partial.last().map_or(0.0, |p| p.1)
    }

    /// Partial sums never decrease and the fitted tail exists.
    pub fn is_certified(&self) -> bool {
        self.partial.windows(2).all(|w| w[1].1 >= w[0].1) && self.tail.is_some()
    }
}

impl SpectralData {
    /// Nodes on `range` where `Θ(t) = -e^{2iα}`, found by following the
    /// continuous phase with steps small against `1/φ'` and `d_0`.
    pub fn build(model: &HermiteBiehlerModel, range: (f64, f64), rotation: f64) -> Result<Self> {
        let (lo, hi) = range;
        if !(hi > lo) {
            return Err(Error::InvalidParameter("empty spectral range".into()));
        }
        let target0 = PI + 2.0 * rotation;
        let arg = |t: f64| -> Result<f64> { Ok(model.log_theta(Complex64::new(t, 0.0))?.0.im) };
        let mut t = lo;
        let mut a = arg(t)?;
        // Continuous 2φ, anchored so that targets sit at target0 + 2πk.
        let mut psi = a;
        let mut nodes = Vec::new();
        while t < hi {
            let dp = model.phase_derivative(t)?;
            let mut h = (0.4 / dp).min(0.5 * d0(model, Complex64::new(t, 0.0))?).min(hi - t);
            h = h.max(1e-12 * (1.0 + t.abs()));
            let tn = (t + h).min(hi);
            let an = arg(tn)?;
            // Re-anchored on the fresh argument so rounding does not accumulate.
            let raw = psi + wrap(an - a);
            let psin = an + 2.0 * PI * ((raw - an) / (2.0 * PI)).round();
            let k = ((psin - target0) / (2.0 * PI)).floor();
            let target = target0 + 2.0 * PI * k;
            if psi < target && psin >= target {
                nodes.push(solve(model, t, tn, target0)?);
            }
            t = tn;
            a = an;
            psi = psin;
        }
        if nodes.is_empty() {
            return Err(Error::RootBracketFailure(format!("no node of A on [{lo}, {hi}]")));
        }
        let masses = nodes.iter().map(|&t| Ok(1.0 / model.phase_derivative(t)?)).collect::<Result<Vec<_>>>()?;
        let gap = nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let r0 = 0.25f64.min(gap / 4.0);
        let radii = nodes.iter().map(|t| r0 / (1.0 + t.abs())).collect();
        Ok(SpectralData { nodes, masses, radii, range, rotation })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    /// `|A_α(z)| / |E(z)| = |1 + e^{-2iα} Θ(z)| / 2` for `Im z >= 0`.
    pub fn a_over_e(&self, model: &HermiteBiehlerModel, z: Complex64) -> Result<f64> {
        let th = model.theta(z)?;
        Ok(0.5 * (1.0 + Complex64::from_polar(1.0, -2.0 * self.rotation) * th).norm())
    }

    /// The disc containing `z`, if any.
    pub fn disc(&self, z: Complex64) -> Option<usize> {
        let k = self.nodes.partition_point(|t| *t < z.re);
        [k.wrapping_sub(1), k]
            .into_iter()
            .filter(|&i| i < self.nodes.len())
            .find(|&i| (z - self.nodes[i]).norm() < self.radii[i])
    }

    /// `W_T(z)·|E(z)| = μ_n^{-1/2} r_n^{-1} |z - t_n| |E(z)|/|A(z)|` on the
    /// disc around `t_n`, zero elsewhere; `Im z >= 0`.
    pub fn disc_term(&self, model: &HermiteBiehlerModel, z: Complex64) -> Result<f64> {
        if !(z.re >= self.range.0 && z.re <= self.range.1) {
            return Err(Error::OutOfCoveredRange(z));
        }
        let Some(n) = self.disc(z) else { return Ok(0.0) };
        let d = (z - self.nodes[n]).norm();
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(d / (self.masses[n].sqrt() * self.radii[n] * self.a_over_e(model, z)?))
    }

    /// `c_n = F(t_n) / (μ_n^{1/2} A'(t_n))` from samples of `f = F/E` at the
    /// nodes. Since `A'(t_n) = -i e^{iα} φ'(t_n) E(t_n)`, this is
    /// `c_n = i e^{-iα} μ_n^{1/2} f(t_n)`.
    pub fn coefficients(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let rot = Complex64::from_polar(1.0, -self.rotation);
        samples.iter().zip(&self.masses).map(|(f, m)| Complex64::i() * rot * m.sqrt() * f).collect()
    }

    /// `π Σ |c_n|²`.
    pub fn norm2(&self, samples: &[Complex64]) -> f64 {
        PI * self.coefficients(samples).iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `f(z) = (A_α/E)(z) Σ_n c_n μ_n^{1/2} / (z - t_n)` in ratio form, `Im z >= 0`.
    pub fn reconstruct(&self, model: &HermiteBiehlerModel, samples: &[Complex64], z: Complex64) -> Result<Complex64> {
        self.reconstruct_within(model, samples, z, f64::INFINITY)
    }

    /// [`reconstruct`](Self::reconstruct) with the truncation error removed to
    /// leading order. Samples decaying like `1/t` leave a tail of order `1/R`
    /// on nodes in `[-R, R]`; the sums over `R` and `R/2` are combined to cancel it.
    pub fn reconstruct_extrapolated(&self, model: &HermiteBiehlerModel, samples: &[Complex64], z: Complex64) -> Result<Complex64> {
        let r = self.range.0.abs().min(self.range.1.abs());
        let full = self.reconstruct_within(model, samples, z, r)?;
        let half = self.reconstruct_within(model, samples, z, 0.5 * r)?;
        Ok(2.0 * full - half)
    }

    fn reconstruct_within(&self, model: &HermiteBiehlerModel, samples: &[Complex64], z: Complex64, r: f64) -> Result<Complex64> {
        if samples.len() != self.nodes.len() {
            return Err(Error::InvalidParameter("one sample per node required".into()));
        }
        let rot = Complex64::from_polar(1.0, self.rotation);
        let coef = self.coefficients(samples);
        // The nearest node is summed in the cancellation-free form
        // (1 + e^{-2iα}Θ(z)) / (z - t) = -expm1(log Θ(z) - log Θ(t)) / (z - t).
        let near = self.nearest(z.re);
        let tn = Complex64::new(self.nodes[near], 0.0);
        let d = z - tn;
        if d.norm() <= 1e-14 * (1.0 + tn.re.abs()) {
            return Ok(samples[near]);
        }
        let factor = -cexpm1(model.log_theta_diff(z, tn)?);
        let mut s = Complex64::new(0.0, 0.0);
        for (n, (c, t)) in coef.iter().zip(&self.nodes).enumerate() {
            if n != near && t.abs() <= r {
                s += c * self.masses[n].sqrt() / (z - t);
            }
        }
        let nearest = coef[near] * self.masses[near].sqrt() / d;
        Ok(0.5 * rot * factor * (s + nearest))
    }

    fn nearest(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|&t| t < x);
        if i == 0 {
            0
        } else if i == self.nodes.len() || x - self.nodes[i - 1] <= self.nodes[i] - x {
            i - 1
        } else {
            i
        }
    }

    /// Partial sums of `Σ_n (r_n²/μ_n) Σ_{j≠n} μ_j / |t_n - t_j|²`.
    pub fn radii_condition(&self) -> SeriesCheck {
        let n = self.nodes.len();
        let terms: Vec<f64> = (0..n)
            .map(|i| {
                let inner: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.masses[j] / (self.nodes[i] - self.nodes[j]).powi(2))
                    .sum();
                self.radii[i].powi(2) / self.masses[i] * inner
            })
            .collect();
        SeriesCheck::from_terms(&self.nodes, &terms)
    }

    /// Partial sums of `Σ_n μ_n / (t_n² + 1)`.
    pub fn mass_condition(&self) -> SeriesCheck {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.masses).map(|(t, m)| m / (t * t + 1.0)).collect();
        SeriesCheck::from_terms(&self.nodes, &terms)
    }
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI { r - 2.0 * PI } else { r }
}

/// Safeguarded Newton for `2φ(t) = target0 (mod 2π)` on `[a, b]`, where the
/// phase moves by less than π.
fn solve(model: &HermiteBiehlerModel, a: f64, b: f64, target0: f64) -> Result<f64> {
    let g = |t: f64| -> Result<f64> { Ok(wrap(model.log_theta(Complex64::new(t, 0.0))?.0.im - target0)) };
    let (mut lo, mut hi) = (a, b);
    let mut t = 0.5 * (a + b);
    for _ in 0..200 {
        let v = g(t)?;
        if v == 0.0 {
            return Ok(t);
        }
        if v < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let next = t - v / (2.0 * model.phase_derivative(t)?);
        if v.abs() <= 1e-15 && next > lo && next < hi {
            return Ok(next);
        }
        t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + t.abs()) {
            return Ok(t);
        }
    }
    Err(Error::RootBracketFailure(format!("no convergence on [{a}, {b}]")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paley_wiener_pi_nodes_are_half_integers() {
        let m = HermiteBiehlerModel::paley_wiener(PI).unwrap();
        let s = SpectralData::build(&m, (-20.0, 20.0), 0.0).unwrap();
        assert_eq!(s.nodes().len(), 40);
        for (k, t) in s.nodes().iter().enumerate() {
            assert!((t - (k as f64 - 19.5)).abs() < 1e-10, "{t}");
            assert!((m.theta(Complex64::new(*t, 0.0)).unwrap() + 1.0).norm() <= 1e-10);
        }
        for mu in s.masses() {
            assert!((mu - 1.0 / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn paley_wiener_one_nodes() {
        let m = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let s = SpectralData::build(&m, (-10.0, 10.0), 0.0).unwrap();
        let expect: Vec<f64> = (-3..3).map(|n| PI * (n as f64 + 0.5)).collect();
        assert_eq!(s.nodes().len(), expect.len());
        for (t, e) in s.nodes().iter().zip(&expect) {
            assert!((t - e).abs() < 1e-10);
        }
        for mu in s.masses() {
            assert!((mu - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn node_count_matches_phase_increase() {
        let m = HermiteBiehlerModel::finite(vec![Complex64::new(0.0, 1.0)], 0.0).unwrap();
        let s = SpectralData::build(&m, (-10.0, 10.0), 0.0).unwrap();
        let inc = m.phase_increment(-10.0, 10.0).unwrap();
        assert_eq!(s.nodes().len() as f64, (inc / PI).round());
    }

    #[test]
    fn disc_term_closed_form() {
        // E = e^{-iπz}: A = cos(πz), so the disc term at t_n + r_n/2 is √π / (2|cos πz|).
        let m = HermiteBiehlerModel::paley_wiener(PI).unwrap();
        let s = SpectralData::build(&m, (-10.0, 10.0), 0.0).unwrap();
        let n = 12;
        let z = Complex64::new(s.nodes()[n] + 0.5 * s.radii()[n], 0.0);
        let want = PI.sqrt() / (2.0 * (PI * z.re).cos().abs());
        assert!((s.disc_term(&m, z).unwrap() - want).abs() < 1e-9 * want);
        assert_eq!(s.disc_term(&m, Complex64::new(s.nodes()[n], 0.0)).unwrap(), 0.0);
        assert!(s.radii_condition().is_certified());
    }
}
