//! Deterministic adaptive integration over a work queue of regions.
//!
//! Regions are refined worst-error-first in small batches that are evaluated
//! in parallel; the final value is summed in region-key order, so results do not
//! depend on the number of worker threads.

use crate::numeric::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Result of a one-dimensional integration.
#[derive(Debug, Clone, Copy)]
pub struct Quad1d<T> {
    pub value: T,
    pub abs_error: f64,
    pub evaluations: usize,
    pub regions: usize,
    pub converged: bool,
}

/// Tolerance: the integration stops once `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance { abs: 1e-300, rel }
    }
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value)
    }
}

pub(crate) trait Region: Sized + Send + Sync + Clone {
    /// Children of the region; `hint` comes from its evaluation (e.g. a split axis).
    fn split(&self, hint: u8) -> Vec<Self>;
    fn sort_key(&self) -> (f64, f64);
    fn too_small(&self) -> bool;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Region for Interval {
    fn split(&self, _hint: u8) -> Vec<Self> {
        let m = 0.5 * (self.a + self.b);
        vec![Interval { a: self.a, b: m }, Interval { a: m, b: self.b }]
    }
    fn sort_key(&self) -> (f64, f64) {
        (self.a, 0.0)
    }
    fn too_small(&self) -> bool {
        (self.b - self.a).abs() <= 1e-13 * self.a.abs().max(self.b.abs()).max(1e-300)
    }
}

struct HeapItem {
    err: f64,
    idx: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.idx.cmp(&self.idx))
    }
}

pub(crate) struct AdaptiveOutcome<T> {
    pub value: T,
    pub abs_error: f64,
    pub regions: usize,
    pub converged: bool,
}

const BATCH: usize = 16;

/// Core engine. `eval` returns the high-order value, an error estimate and a
/// split hint for the region.
pub(crate) fn refine<R, T, E>(initial: Vec<R>, eval: E, tol: Tolerance, max_regions: usize) -> AdaptiveOutcome<T>
where
    R: Region,
    T: QuadValue,
    E: Fn(&R) -> (T, f64, u8) + Sync,
{
    struct Entry<R, T> {
        region: R,
        value: T,
        err: f64,
        hint: u8,
        alive: bool,
    }
    let evaluated: Vec<(T, f64, u8)> = initial.par_iter().map(&eval).collect();
    let mut entries: Vec<Entry<R, T>> = initial
        .into_iter()
        .zip(evaluated)
        .map(|(region, (value, err, hint))| Entry { region, value, err, hint, alive: true })
        .collect();
    let mut heap: BinaryHeap<HeapItem> = entries
        .iter()
        .enumerate()
        .map(|(idx, e)| HeapItem { err: e.err, idx })
        .collect();
    let mut alive = entries.len();
    let mut converged = false;
    let (mut total, mut err) = totals(&entries);
    let mut rounds = 0usize;
    loop {
        // Resynchronise the running sums now and then to avoid drift.
        rounds += 1;
        if rounds % 256 == 0 || err <= tol.target(total.magnitude()) {
            (total, err) = totals(&entries);
        }
        if err <= tol.target(total.magnitude()) {
            converged = true;
            break;
        }
        if alive >= max_regions || heap.is_empty() {
            break;
        }
        let mut batch = Vec::with_capacity(BATCH);
        while batch.len() < BATCH {
            match heap.pop() {
                Some(item) => {
                    let e = &entries[item.idx];
                    // Too small to split: it stays alive with its error.
                    if e.region.too_small() {
                        continue;
                    }
                    batch.push(item.idx);
                }
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        let children: Vec<Vec<(R, T, f64, u8)>> = batch
            .par_iter()
            .map(|&i| {
                entries[i]
                    .region
                    .split(entries[i].hint)
                    .into_iter()
                    .map(|r| {
                        let (v, e, h) = eval(&r);
                        (r, v, e, h)
                    })
                    .collect()
            })
            .collect();
        for (&i, kids) in batch.iter().zip(children) {
            entries[i].alive = false;
            alive -= 1;
            total = total - entries[i].value;
            err -= entries[i].err;
            for (region, value, e, hint) in kids {
                total = total + value;
                err += e;
                heap.push(HeapItem { err: e, idx: entries.len() });
                entries.push(Entry { region, value, err: e, hint, alive: true });
                alive += 1;
            }
        }
    }
    let mut live: Vec<&Entry<R, T>> = entries.iter().filter(|e| e.alive).collect();
    live.sort_by(|a, b| {
        let ka = a.region.sort_key();
        let kb = b.region.sort_key();
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let mut value = T::default();
    let mut abs_error = 0.0;
    for e in &live {
        value = value + e.value;
        abs_error += e.err;
    }
    return AdaptiveOutcome { value, abs_error, regions: live.len(), converged };

    fn totals<R, T: QuadValue>(entries: &[Entry<R, T>]) -> (T, f64) {
        let mut v = T::default();
        let mut e = 0.0;
        for x in entries.iter().filter(|x| x.alive) {
            v = v + x.value;
            e += x.err;
        }
        (v, e)
    }
}

/// Embedded Gauss–Legendre 10/20 estimate on one interval.
pub(crate) fn gl_pair<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let (lo, hi) = GaussLegendre::pair();
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut s10 = T::default();
    for (x, w) in lo.nodes.iter().zip(&lo.weights) {
        s10 = s10 + f(c + h * x) * *w;
    }
    let mut s20 = T::default();
    for (x, w) in hi.nodes.iter().zip(&hi.weights) {
        s20 = s20 + f(c + h * x) * *w;
    }
    let v10 = s10 * h;
    let v20 = s20 * h;
    (v20, (v20 - v10).magnitude())
}

const MAX_REGIONS_1D: usize = 200_000;

/// Integrates `f` over `[breaks[0], breaks.last()]`, splitting at every break and
/// additionally so that no initial panel is wider than `max_panel`.
pub fn integrate<T, F>(f: &F, breaks: &[f64], max_panel: f64, tol: Tolerance) -> Quad1d<T>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    let mut initial = Vec::new();
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = (((b - a) / max_panel).ceil() as usize).clamp(1, 100_000);
        for i in 0..n {
            let lo = a + (b - a) * i as f64 / n as f64;
            let hi = if i + 1 == n { b } else { a + (b - a) * (i + 1) as f64 / n as f64 };
            initial.push(Interval { a: lo, b: hi });
        }
    }
    if initial.is_empty() {
        return Quad1d { value: T::default(), abs_error: 0.0, evaluations: 0, regions: 0, converged: true };
    }
    let out = refine(
        initial,
        |r: &Interval| {
            let (v, e) = gl_pair(f, r.a, r.b);
            (v, e, 0)
        },
        tol,
        MAX_REGIONS_1D,
    );
    Quad1d {
        value: out.value,
        abs_error: out.abs_error,
        evaluations: out.regions * 30,
        regions: out.regions,
        converged: out.converged,
    }
}

/// Integrates over `[a, a + dir * inf)` (dir = ±1) using dyadic shells of growing
/// width starting at `scale`; the remainder beyond the last shell is extrapolated
/// from the geometric decay of successive shell integrals.
pub fn integrate_semi_infinite<T, F>(f: &F, a: f64, dir: f64, scale: f64, tol: Tolerance) -> Quad1d<T>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    const MAX_SHELLS: usize = 64;
    let mut total = T::default();
    let mut err = 0.0;
    let mut evals = 0;
    let mut regions = 0;
    let mut prev: Option<f64> = None;
    let mut prev_tail: Option<f64> = None;
    let mut converged = false;
    let mut tail = T::default();
    for j in 0..MAX_SHELLS {
        let lo = scale * (2f64.powi(j as i32) - 1.0);
        let hi = scale * (2f64.powi(j as i32 + 1) - 1.0);
        let (x0, x1) = if dir > 0.0 { (a + lo, a + hi) } else { (a - hi, a - lo) };
        let shell_tol = Tolerance { abs: tol.target(total.magnitude()) * 0.25, rel: tol.rel * 0.25 };
        let q = integrate(f, &[x0, x1], (hi - lo) / 8.0, shell_tol);
        evals += q.evaluations;
        regions += q.regions;
        err += q.abs_error;
        total = total + q.value;
        let m = q.value.magnitude();
        let target = tol.target(total.magnitude());
        if j >= 2 {
            if m <= 1e-3 * target {
                tail = T::default();
                converged = true;
                break;
            }
            if let Some(p) = prev {
                let rho = p / m;
                if rho > 1.05 {
                    let t = m / (rho - 1.0);
                    if let Some(pt) = prev_tail {
                        let consistency = (t - (pt - m)).abs();
                        if consistency <= target {
                            tail = q.value * (1.0 / (rho - 1.0));
                            err += consistency;
                            converged = true;
                            break;
                        }
                    }
                    prev_tail = Some(t);
                } else {
                    prev_tail = None;
                }
            }
        }
        prev = Some(m);
    }
    Quad1d { value: total + tail, abs_error: err, evaluations: evals, regions, converged }
}

/// Integrates over the whole real line: a core window `[lo, hi]` with interior
/// breakpoints, plus two extrapolated semi-infinite tails.
pub fn integrate_line<T, F>(f: &F, core: (f64, f64), breaks: &[f64], max_panel: f64, tol: Tolerance) -> Quad1d<T>
where
    T: QuadValue,
    F: Fn(f64) -> T + Sync,
{
    let (lo, hi) = core;
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    let mid = integrate(f, &pts, max_panel, tol);
    let scale = (hi - lo).max(1.0) / 2.0;
    let tail_tol = Tolerance { abs: tol.target(mid.value.magnitude()) * 0.5, rel: tol.rel * 0.5 };
    let right = integrate_semi_infinite(f, hi, 1.0, scale, tail_tol);
    let left = integrate_semi_infinite(f, lo, -1.0, scale, tail_tol);
    Quad1d {
        value: mid.value + right.value + left.value,
        abs_error: mid.abs_error + right.abs_error + left.abs_error,
        evaluations: mid.evaluations + right.evaluations + left.evaluations,
        regions: mid.regions + right.regions + left.regions,
        converged: mid.converged && right.converged && left.converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_peaked_function() {
        let eps = 1e-4;
        let f = |x: f64| eps / (x * x + eps * eps);
        let q = integrate(&f, &[-1.0, 1.0], 0.5, Tolerance::rel(1e-10));
        let exact = 2.0 * (1.0 / eps).atan();
        assert!(q.converged);
        assert!((q.value - exact).abs() < 1e-8, "{} vs {}", q.value, exact);
    }

    #[test]
    fn line_integral_with_power_tail() {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let q = integrate_line(&f, (-4.0, 4.0), &[], 1.0, Tolerance::rel(1e-9));
        assert!((q.value - std::f64::consts::PI).abs() < 1e-7, "{}", q.value);
    }

    #[test]
    fn oscillatory_sinc_square_line_integral() {
        let f = |x: f64| {
            if x == 0.0 {
                1.0
            } else {
                let s = (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x);
                s * s
            }
        };
        let q = integrate_line(&f, (-8.0, 8.0), &[], 1.0, Tolerance::rel(1e-8));
        assert!((q.value - 1.0).abs() < 1e-6, "{}", q.value);
    }

    #[test]
    fn complex_integrand() {
        let f = |x: f64| Complex64::new(0.0, x).exp();
        let q = integrate(&f, &[0.0, std::f64::consts::PI], 1.0, Tolerance::rel(1e-12));
        assert!((q.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
