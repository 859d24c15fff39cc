//! de Branges line norms, inner products and weighted area norms.

use super::adaptive::{integrate_line, QuadValue, Tolerance};
use super::cubature::{integrate_cells, Cell};
use crate::error::{Error, Result};
use crate::kernels::TestFunction;
use crate::levelset::d0;
use crate::model::HermiteBiehlerModel;
use crate::weights::WeightField;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Mutex;

const MAX_CELLS: usize = 400_000;
const MAX_SHELLS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub abs_error: f64,
    /// Largest `|x|` (line) or `max(|x|, y)` (area) reached before extrapolation.
    pub truncation_radius: f64,
    pub subdivisions: usize,
    pub converged: bool,
}

/// Keeps the first error raised inside an integrand, which itself must return a number.
pub(crate) struct Guard(Mutex<Option<Error>>);

impl Guard {
    pub(crate) fn new() -> Self {
        Guard(Mutex::new(None))
    }

    pub(crate) fn check<T: Default>(&self, r: Result<T>) -> T {
        r.unwrap_or_else(|e| {
            self.0.lock().unwrap().get_or_insert(e);
            T::default()
        })
    }

    pub(crate) fn finish(self) -> Result<()> {
        match self.0.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Refinement never settles on a NaN or infinite integrand.
fn finite(x: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergent(format!("integrand is {v} at x = {x}")))
    }
}

/// Length scale of a test function near `p`: `min(1, 1/φ'(p), d_0(p))`, or the
/// height of a kernel node if that is larger.
fn local_scale(model: &HermiteBiehlerModel, p: Complex64) -> Result<f64> {
    let x = Complex64::new(p.re, 0.0);
    let s = (1.0 / model.phase_derivative(p.re)?).min(d0(model, x)?).min(1.0);
    Ok(s.max(p.im.min(1.0)))
}

/// Break points on the real line: graded around the focus points of the
/// functions and around zeros close to the axis.
struct Layout {
    core: (f64, f64),
    breaks: Vec<f64>,
}

fn layout(fs: &[&TestFunction], extra: &[f64]) -> Result<Layout> {
    let model = fs[0].model();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for f in fs {
        for p in f.focus_points() {
            pts.push((p.re, local_scale(model, p)?));
        }
    }
    let smax = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min) - 8.0f64.max(64.0 * smax);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + 8.0f64.max(64.0 * smax);
    let zs = model.zeros_by_real_part();
    let a = zs.partition_point(|w| w.re < lo);
    let b = zs.partition_point(|w| w.re <= hi);
    for w in &zs[a..b] {
        if w.im < 0.25 {
            pts.push((w.re, w.im));
        }
    }
    let mut breaks = vec![lo, hi];
    for (p, s) in pts {
        let mut h = s;
        breaks.push(p);
        while h < hi - lo {
            breaks.push(p - h);
            breaks.push(p + h);
            h *= 2.0;
        }
    }
    breaks.extend(extra.iter().copied());
    breaks.retain(|x| *x >= lo && *x <= hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    Ok(Layout { core: (lo, hi), breaks })
}

fn line_integral<T: QuadValue + Default>(fs: &[&TestFunction], tol: Tolerance, g: impl Fn(f64) -> Result<T> + Sync) -> Result<(T, NormReport)> {
    let lay = layout(fs, &[])?;
    let guard = Guard::new();
    let f = |x: f64| guard.check(g(x));
    let q = integrate_line(&f, lay.core, &lay.breaks, 1.0, tol);
    guard.finish()?;
    if !q.converged {
        return Err(Error::NonConvergent(format!(
            "line integral: error {:.3e} after {} panels",
            q.abs_error, q.regions
        )));
    }
    let radius = lay.core.0.abs().max(lay.core.1.abs());
    Ok((q.value, NormReport { value: q.value.magnitude(), abs_error: q.abs_error, truncation_radius: radius, subdivisions: q.regions, converged: q.converged }))
}

/// `‖F‖²_E = ∫_ℝ |F/E|²`.
pub fn line_norm2(f: &TestFunction, tol: Tolerance) -> Result<NormReport> {
    let (v, mut r) = line_integral(&[f], tol, |x| finite(x, f.abs_ratio(Complex64::new(x, 0.0))?.powi(2)))?;
    r.value = v;
    Ok(r)
}

/// `⟨F, G⟩_E = ∫_ℝ (F/E) conj(G/E)` and its error estimate.
pub fn inner_product_line(f: &TestFunction, g: &TestFunction, tol: Tolerance) -> Result<(Complex64, f64)> {
    let (v, r) = line_integral(&[f, g], tol, |x| {
        let z = Complex64::new(x, 0.0);
        Ok(f.ratio(z)? * g.ratio(z)?.conj())
    })?;
    Ok((v, r.abs_error))
}

/// Running sum of shell contributions with geometric extrapolation of the rest.
/// `piece(j, abs_tol)` integrates shell `j` and returns `(value, error, cells, converged)`.
fn shell_series(rel: f64, start: f64, mut piece: impl FnMut(usize, f64) -> Result<(f64, f64, usize, bool)>) -> Result<(f64, f64, usize, usize, bool)> {
    let mut total = start;
    let mut err = 0.0;
    let mut cells = 0;
    let mut prev: Option<f64> = None;
    let mut prev_tail: Option<f64> = None;
    let mut all_converged = true;
    for j in 0..MAX_SHELLS {
        let target = rel * total.abs();
        let (v, e, c, ok) = piece(j, 0.25 * target)?;
        all_converged &= ok;
        total += v;
        err += e;
        cells += c;
        let target = rel * total.abs();
        if j >= 1 {
            if v.abs() <= 1e-3 * target {
                return Ok((total - start, err, cells, j, all_converged));
            }
            if let Some(p) = prev {
                let rho = p / v.abs();
                if rho > 1.05 {
                    let t = v.abs() / (rho - 1.0);
                    if let Some(pt) = prev_tail {
                        let gap = (t - (pt - v.abs())).abs();
                        if gap <= 0.5 * target {
                            return Ok((total - start + v / (rho - 1.0), err + gap, cells, j, all_converged));
                        }
                    }
                    prev_tail = Some(t);
                } else {
                    prev_tail = None;
                }
            }
        }
        prev = Some(v.abs());
    }
    Err(Error::NonConvergent("shell contributions do not decay".into()))
}

/// Columns `[u, v]` of `breaks`, each split into cells graded towards `y0`
/// (heights `y0 + w 2^j`, `w` the column width) plus the given column heights.
fn graded_cells(breaks: &[f64], y0: f64, y1: f64, heights: impl Fn(f64, f64) -> Vec<f64>) -> Vec<Cell> {
    let mut cells = Vec::new();
    for c in breaks.windows(2) {
        let (u, v) = (c[0], c[1]);
        let mut ys = vec![y0, y1];
        let mut h = v - u;
        while y0 + h < y1 {
            ys.push(y0 + h);
            h *= 2.0;
        }
        ys.extend(heights(u, v).into_iter().filter(|h| *h > y0 && *h < y1));
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        for w in ys.windows(2) {
            cells.push(Cell::new(u, v, w[0], w[1]));
        }
    }
    cells
}

fn uniform_cells(x0: f64, x1: f64, y0: f64, y1: f64, extra: &[f64]) -> Vec<Cell> {
    let h = y1 - y0;
    let n = (((x1 - x0) / h).ceil() as usize).clamp(1, 256);
    let mut xs: Vec<f64> = (0..=n).map(|k| x0 + (x1 - x0) * k as f64 / n as f64).collect();
    xs.extend(extra.iter().copied().filter(|x| *x > x0 && *x < x1));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.windows(2).map(|w| Cell::new(w[0], w[1], y0, y1)).collect()
}

/// `‖F‖²_{F_W} = ∫_ℂ |F W|² dm`.
///
/// The upper and lower half-planes are folded together:
/// `(|F/E|²(z) + |F/E♯|²(z̄)) (W|E|)²(z)` on `Im z >= 0`. The plane is cut into
/// strips `2^k - 1 <= y < 2^{k+1} - 1`, each integrated over a core window and
/// dyadic shells in `x`; shells and strips beyond the last one are extrapolated.
pub fn area_norm2(f: &TestFunction, w: &WeightField, tol: Tolerance) -> Result<NormReport> {
    let lay = layout(&[f], &[])?;
    let (lo, hi) = lay.core;
    let mut breaks = lay.breaks.clone();
    breaks.extend(w.x_breaks(lo, hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let guard = Guard::new();
    let density = |x: f64, y: f64| -> f64 {
        let r = (|| -> Result<f64> {
            let up = f.abs_ratio(Complex64::new(x, y))?;
            let down = f.abs_ratio(Complex64::new(x, -y))?;
            if up == 0.0 && down == 0.0 {
                return Ok(0.0);
            }
            finite(x, (up * up + down * down) * w.relative(Complex64::new(x, y))?.powi(2))
        })();
        guard.check(r)
    };
    let rel = tol.rel;
    let mut radius: f64 = 0.0;
    let mut strip = |k: usize, abs_tol: f64| -> Result<(f64, f64, usize, bool)> {
        let y0 = 2f64.powi(k as i32) - 1.0;
        let y1 = 2f64.powi(k as i32 + 1) - 1.0;
        let t = Tolerance { abs: abs_tol.max(tol.abs), rel: if k == 0 { rel } else { 0.25 * rel } };
        let cells = if k == 0 {
            graded_cells(&breaks, 0.0, 1.0, |u, v| w.column_heights(u, v))
        } else {
            uniform_cells(lo, hi, y0, y1, &w.x_breaks(lo, hi))
        };
        let core = integrate_cells(&density, cells, t, MAX_CELLS);
        let half = 0.5 * (hi - lo).max(y1 - y0);
        let mut side = |dir: f64| {
            shell_series(0.5 * rel, core.value.max(tol.abs), |j, a| {
                let s0 = half * (2f64.powi(j as i32) - 1.0);
                let s1 = half * (2f64.powi(j as i32 + 1) - 1.0);
                let (x0, x1) = if dir > 0.0 { (hi + s0, hi + s1) } else { (lo - s1, lo - s0) };
                radius = radius.max(x0.abs().max(x1.abs())).max(y1);
                let cells = uniform_cells(x0, x1, y0, y1, &w.x_breaks(x0, x1));
                let q = integrate_cells(&density, cells, Tolerance { abs: a.max(tol.abs), rel: 0.25 * rel }, MAX_CELLS);
                Ok((q.value, q.abs_error, q.cells, q.converged))
            })
        };
        let (rv, re, rc, _, rok) = side(1.0)?;
        let (lv, le, lc, _, lok) = side(-1.0)?;
        Ok((core.value + rv + lv, core.abs_error + re + le, core.cells + rc + lc, core.converged && rok && lok))
    };
    let first = strip(0, tol.abs)?;
    let (rest, err, cells, _, ok) = shell_series(rel, first.0.max(tol.abs), |k, a| strip(k + 1, a))?;
    guard.finish()?;
    let value = first.0 + rest;
    Ok(NormReport {
        value,
        abs_error: first.1 + err,
        truncation_radius: radius,
        subdivisions: first.2 + cells,
        converged: first.3 && ok,
    })
}
