//! Sublevel sets `Ω_ε = {|Θ| < ε}` and the distances `d_0`, `d_ε`.

mod geometry;

pub use geometry::{LevelCurve, LevelSetGeometry, Rect};

use crate::error::{Error, Result};
use crate::kernels::KernelEval;
use crate::model::{HermiteBiehlerModel, ZeroFamily};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Heuristic stand-in for the unknown constant of the two-sided distance estimate.
pub const A2_HEURISTIC: f64 = 2.0;
const RAYS: usize = 64;
const WINDOW_DOUBLINGS: usize = 6;
/// Target for `||Θ| - ε|` at reported boundary points.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Distance from `z` to the zero set of Θ; `+inf` when Θ has no zeros.
pub fn d0(model: &HermiteBiehlerModel, z: Complex64) -> Result<f64> {
    let zs = model.zeros_by_real_part();
    let mut best2 = f64::INFINITY;
    let start = zs.partition_point(|w| w.re < z.re);
    for w in zs[start..].iter() {
        let dx = w.re - z.re;
        if dx * dx >= best2 {
            break;
        }
        best2 = best2.min((z - w).norm_sqr());
    }
    for w in zs[..start].iter().rev() {
        let dx = z.re - w.re;
        if dx * dx >= best2 {
            break;
        }
        best2 = best2.min((z - w).norm_sqr());
    }
    let best = best2.sqrt();
    let family = model.family();
    if !family.is_infinite() || model.tail_radius() - z.norm() >= best {
        return Ok(best);
    }
    Ok(best.min(tail_d0(family, model.truncation().n_max as i64, z, best)))
}

/// Nearest zero with index beyond `n_max`, found by inverting the real part.
fn tail_d0(family: &ZeroFamily, n_max: i64, z: Complex64, mut best: f64) -> f64 {
    for side in [1i64, -1] {
        let s = side as f64;
        let re = |t: f64| family.zero_cont(s * t).re * s;
        let target = z.re * s;
        let mut lo = (n_max + 1) as f64;
        let mut hi = lo * 2.0;
        let centre = if re(lo) >= target {
            lo
        } else {
            while re(hi) < target && hi < 1e300 {
                lo = hi;
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if re(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 0.5 {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        let c = (centre.round() as i64).max(n_max + 1);
        for dir in [1i64, -1] {
            let mut n = if dir > 0 { c } else { c - 1 };
            while n > n_max {
                let Some(w) = family.zero(side * n) else { break };
                let dx = (w.re - z.re).abs();
                best = best.min((w - z).norm());
                if dx > best {
                    break;
                }
                n += dir;
            }
        }
    }
    best
}

/// Result of a `d_ε` query: the distance lies in `[lo, hi]`, `value` is the midpoint.
#[derive(Debug, Clone, Copy)]
pub struct DistanceResult {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Boundary point realizing `hi` (`z` itself when inside `Ω_ε`).
    pub witness: Complex64,
}

impl DistanceResult {
    fn inside(z: Complex64) -> Self {
        DistanceResult { value: 0.0, lo: 0.0, hi: 0.0, witness: z }
    }
}

/// `min(d_0(z), 1/‖k_z‖²)`, the scale of `d_ε` predicted by the two-sided estimate.
pub fn distance_bound(model: &HermiteBiehlerModel, z: Complex64) -> Result<f64> {
    let k = KernelEval::new(model).knorm2(z)?;
    Ok(d0(model, z)?.min(1.0 / k))
}

struct Level<'a> {
    model: &'a HermiteBiehlerModel,
    log_eps: f64,
}

impl Level<'_> {
    fn u(&self, p: Complex64) -> Result<f64> {
        Ok(self.model.log_abs_theta(p)? - self.log_eps)
    }

    /// Bisection on the segment `[a, b]` with `u(a) > 0 >= u(b)`.
    fn bisect(&self, mut a: Complex64, mut b: Complex64) -> Result<Complex64> {
        let tol = (BOUNDARY_TOL / self.log_eps.exp()).min(1e-9);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let um = self.u(m)?;
            if um.abs() <= tol || (a - b).norm() <= 1e-15 * (1.0 + m.norm()) {
                return Ok(m);
            }
            if um > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Newton steps along the gradient of `log|Θ|` back onto the level curve,
    /// each at most `cap` long.
    fn snap(&self, mut p: Complex64, cap: f64) -> Result<Complex64> {
        for _ in 0..8 {
            let u = self.u(p)?;
            let g = self.model.dlog_theta(p)?.conj();
            let gn = g.norm();
            if gn == 0.0 {
                break;
            }
            let mut step = g * (u / (gn * gn));
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            p -= step;
            if p.im < 0.0 {
                p.im = 0.0;
            }
            if u.abs() <= 1e-12 || step.norm() <= 1e-15 * (1.0 + p.norm()) {
                break;
            }
        }
        Ok(p)
    }

    /// Moves a boundary point towards the point of the level curve closest to `z`.
    fn project(&self, z: Complex64, mut p: Complex64) -> Result<Complex64> {
        let mut best = (z - p).norm();
        for _ in 0..60 {
            let g = self.model.dlog_theta(p)?.conj();
            if g.norm() == 0.0 {
                break;
            }
            let n = g / g.norm();
            let t = Complex64::new(-n.im, n.re);
            let r = z - p;
            let along = r.re * t.re + r.im * t.im;
            if along.abs() <= 1e-10 * r.norm() {
                break;
            }
            let mut step = along;
            let mut accepted = false;
            for _ in 0..20 {
                // Evaluation failures far from z only reject the candidate.
                let Ok(q) = self.snap(p + t * step, 0.25 * best) else {
                    step *= 0.5;
                    continue;
                };
                let d = (z - q).norm();
                if d < best && self.u(q).is_ok_and(|u| u.abs() <= 1e-9) {
                    best = d;
                    p = q;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok(p)
    }
}

/// `d_ε(z) = dist(z, Ω_ε)` by a ray search in a window of radius
/// `4 A_2 min(d_0, 1/‖k_z‖²)`, bisection onto the level curve and projection to
/// the closest boundary point. `z` is taken in the closed upper half-plane.
pub fn d_eps(model: &HermiteBiehlerModel, z: Complex64, eps: f64) -> Result<DistanceResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let z = Complex64::new(z.re, z.im.abs());
    let level = Level { model, log_eps: eps.ln() };
    let u0 = level.u(z)?;
    if u0 < 0.0 {
        return Ok(DistanceResult::inside(z));
    }
    let bound = distance_bound(model, z)?;
    let mut radius = 4.0 * A2_HEURISTIC * bound;
    let mut dirs: Vec<Complex64> = (0..RAYS)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / RAYS as f64))
        .collect();
    for w in nearest_zeros(model, z, 8) {
        if w != z {
            dirs.push((w - z) / (w - z).norm());
        }
    }
    for _ in 0..=WINDOW_DOUBLINGS {
        let hits: Vec<Option<Complex64>> = dirs
            .par_iter()
            .map(|d| march(&level, z, *d, radius, bound))
            .collect::<Result<_>>()?;
        let best = hits
            .into_iter()
            .flatten()
            .min_by(|a, b| (z - a).norm().total_cmp(&(z - b).norm()));
        if let Some(p) = best {
            let p = level.project(z, p)?;
            let hi = (z - p).norm();
            // Distance from p to the exact curve, to first order.
            let g = model.dlog_theta(p)?.norm();
            let slack = if g > 0.0 { level.u(p)?.abs() / g } else { 0.0 };
            let lo = (hi - slack - 1e-12 * hi).max(0.0);
            return Ok(DistanceResult { value: 0.5 * (lo + hi), lo, hi: hi + slack, witness: p });
        }
        radius *= 2.0;
    }
    Err(Error::WindowExhausted { at: z, radius })
}

fn nearest_zeros(model: &HermiteBiehlerModel, z: Complex64, k: usize) -> Vec<Complex64> {
    let zs = model.zeros_by_real_part();
    let i = zs.partition_point(|w| w.re < z.re);
    let lo = i.saturating_sub(4 * k);
    let hi = (i + 4 * k).min(zs.len());
    let mut near: Vec<Complex64> = zs[lo..hi].to_vec();
    near.sort_by(|a, b| (z - a).norm().total_cmp(&(z - b).norm()));
    near.truncate(k);
    near
}

/// Marches from `z` along `dir` until `|Θ| < ε` or the radius is reached, then
/// bisects the last step.
fn march(level: &Level, z: Complex64, dir: Complex64, radius: f64, bound: f64) -> Result<Option<Complex64>> {
    let model = level.model;
    let h_min = 1e-4 * bound;
    let mut s = 0.0;
    let mut p = z;
    let mut u = level.u(p)?;
    while s < radius {
        let grad = model.dlog_theta(p)?.norm();
        let mut step = (bound / 8.0).min(0.5 * d0(model, p)?);
        if grad > 0.0 {
            step = step.min(0.5 * u / grad);
        }
        step = step.max(h_min).min(radius - s + h_min);
        let s_next = s + step;
        let q = z + dir * s_next;
        if q.im < 0.0 {
            return Ok(None);
        }
        let uq = level.u(q)?;
        if uq < 0.0 {
            return level.bisect(p, q).map(Some);
        }
        s = s_next;
        p = q;
        u = uq;
    }
    Ok(None)
}

/// Per-sample comparison of `d_ε` with `min(d_0, 1/‖k_z‖²)`.
#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub z: Complex64,
    pub d0: f64,
    pub d_eps: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct LevStats {
    pub reports: Vec<DistanceReport>,
    pub min: f64,
    pub max: f64,
    /// Counts in log2-spaced bins `[2^k, 2^(k+1))`, as `(k, count)`.
    pub histogram: Vec<(i32, usize)>,
}

impl LevStats {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    pub fn from_reports(reports: Vec<DistanceReport>) -> Self {
        let min = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let max = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let mut bins = std::collections::BTreeMap::new();
        for r in &reports {
            *bins.entry(r.ratio.log2().floor() as i32).or_insert(0) += 1;
        }
        LevStats { reports, min, max, histogram: bins.into_iter().collect() }
    }
}

/// Ratios `d_ε(z) / min(d_0(z), 1/‖k_z‖²)` over samples outside `Ω_δ`.
pub fn verify_lev_bounds(model: &HermiteBiehlerModel, samples: &[Complex64], eps: f64, delta: f64) -> Result<LevStats> {
    if !(0.0 < eps && eps < delta && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < delta < 1, got {eps}, {delta}")));
    }
    let reports: Vec<DistanceReport> = samples
        .par_iter()
        .map(|&z| {
            if model.log_abs_theta(z)? < delta.ln() {
                return Err(Error::InvalidParameter(format!("sample {z} lies in the delta sublevel set")));
            }
            let d0v = d0(model, z)?;
            let k = KernelEval::new(model).knorm2(z)?;
            let bound = d0v.min(1.0 / k);
            let d = d_eps(model, z, eps)?.value;
            let ratio = d / bound;
            if !(ratio.is_finite() && ratio > 0.0) {
                return Err(Error::NonConvergent(format!("distance ratio {ratio} at {z}")));
            }
            Ok(DistanceReport { z, d0: d0v, d_eps: d, bound, ratio })
        })
        .collect::<Result<_>>()?;
    Ok(LevStats::from_reports(reports))
}

/// Estimate of the local doubling constant of `φ'(x) dx` on `[a, b]`: the largest
/// ratio `μ(I)/μ(I')` over adjacent intervals of equal length `cap / 2^j`, `j < levels`,
/// whose common endpoint runs over a grid of step `cap / 2^levels`.
pub fn one_component_doubling(model: &HermiteBiehlerModel, range: (f64, f64), cap: f64, levels: u32) -> Result<f64> {
    let (a, b) = range;
    if !(b > a && cap > 0.0) {
        return Err(Error::InvalidParameter("empty range or cap".into()));
    }
    let h = cap / 2f64.powi(levels as i32);
    let n = ((b - a) / h).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
    let cells: Vec<f64> = grid
        .par_windows(2)
        .map(|w| model.phase_increment(w[0], w[1]))
        .collect::<Result<_>>()?;
    let mut cum = vec![0.0; cells.len() + 1];
    for (i, c) in cells.iter().enumerate() {
        cum[i + 1] = cum[i] + c;
    }
    let mut sup: f64 = 1.0;
    for j in 0..levels {
        let m = 1usize << (levels - j);
        for c in m..=(cum.len() - 1).saturating_sub(m) {
            let left = cum[c] - cum[c - m];
            let right = cum[c + m] - cum[c];
            sup = sup.max(left / right).max(right / left);
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Truncation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn d0_examples() {
        let m = HermiteBiehlerModel::finite(vec![c(0.0, 1.0), c(2.0, 1.0)], 0.0).unwrap();
        assert_eq!(d0(&m, c(0.0, 0.0)).unwrap(), 1.0);
        let pw = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        assert_eq!(d0(&pw, c(0.0, 0.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn d0_sees_tail_zeros() {
        let m = HermiteBiehlerModel::ls(0.3, Truncation { n_max: 50, tail_tol: 1e-6 }).unwrap();
        let z = c(80.5, 0.0);
        let direct = (60..100)
            .map(|n| (z - m.family().zero(n).unwrap()).norm())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(d0(&m, z).unwrap(), direct);
    }

    #[test]
    fn d_eps_single_factor_disk() {
        let m = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let r = d_eps(&m, c(0.0, 0.0), eps).unwrap();
            let want = (1.0 - eps) / (1.0 + eps);
            assert!((r.value - want).abs() < 1e-6, "eps {eps}: {} vs {want}", r.value);
            assert!(r.lo <= want + 1e-9 && want <= r.hi + 1e-9);
        }
        assert_eq!(d_eps(&m, c(0.0, 1.0), 0.5).unwrap().value, 0.0);
    }

    #[test]
    fn d_eps_paley_wiener_strip() {
        let m = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let eps = (-2.0f64).exp();
        for x in [-3.0, 0.0, 17.5] {
            let r = d_eps(&m, c(x, 0.0), eps).unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
        }
    }

    #[test]
    fn lev_ratio_single_factor() {
        let m = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let s = verify_lev_bounds(&m, &[c(0.0, 0.0)], 0.1, 0.5).unwrap();
        assert!((s.min - 9.0 / 11.0).abs() < 1e-6);
    }

    #[test]
    fn doubling_of_constant_density_is_one() {
        let pw = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let d = one_component_doubling(&pw, (0.0, 10.0), 1.0, 3).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
    }
}
