//! Cached level curves `{|Θ| = ε}` traced by adaptive quadtree marching.

use super::{d0, d_eps, BOUNDARY_TOL};
use crate::error::{Error, Result};
use crate::model::HermiteBiehlerModel;
use num_complex::Complex64;
use rayon::prelude::*;
use rstar::primitives::Line;
use rstar::{PointDistance, RTree, AABB};

const MAX_DEPTH: u32 = 40;

/// Axis-parallel rectangle in the closed upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn centre(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn quarters(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect::new(self.x0, xm, self.y0, ym),
            Rect::new(xm, self.x1, self.y0, ym),
            Rect::new(xm, self.x1, ym, self.y1),
            Rect::new(self.x0, xm, ym, self.y1),
        ]
    }
}

/// Piecewise linear approximation of `{|Θ| = ε}` inside a traced rectangle.
#[derive(Debug)]
pub struct LevelCurve {
    eps: f64,
    traced: Rect,
    segments: RTree<Line<[f64; 2]>>,
    samples: Vec<Complex64>,
    cells: usize,
}

#[derive(Default)]
struct Trace {
    segments: Vec<(Complex64, Complex64)>,
    cells: usize,
}

struct Tracer<'a> {
    model: &'a HermiteBiehlerModel,
    eps: f64,
    log_eps: f64,
}

impl Tracer<'_> {
    fn u(&self, p: Complex64) -> Result<f64> {
        Ok(self.model.log_abs_theta(p)? - self.log_eps)
    }

    fn lowest_zero_in(&self, r: &Rect) -> Option<f64> {
        let zs = self.model.zeros_by_real_part();
        let a = zs.partition_point(|w| w.re < r.x0);
        let b = zs.partition_point(|w| w.re <= r.x1);
        zs[a..b]
            .iter()
            .filter(|w| w.im >= r.y0 && w.im <= r.y1)
            .map(|w| w.im)
            .reduce(f64::min)
    }

    /// Cell values: `u` at the four corners (counter-clockwise from the lower
    /// left) and at the centre.
    fn values(&self, r: &Rect) -> Result<([f64; 4], f64)> {
        let mut u = [0.0; 4];
        for (v, c) in u.iter_mut().zip(&r.corners()) {
            *v = self.u(*c)?;
        }
        Ok((u, self.u(r.centre())?))
    }

    fn refine(&self, r: Rect, u: [f64; 4], uc: f64, depth: u32, out: &mut Trace) -> Result<()> {
        out.cells += 1;
        let centre = r.centre();
        let size = r.width().max(r.height());
        let diag = r.width().hypot(r.height());
        let mixed = u.iter().chain(std::iter::once(&uc)).any(|v| *v < 0.0)
            && u.iter().chain(std::iter::once(&uc)).any(|v| *v >= 0.0);
        let split = if depth >= MAX_DEPTH {
            false
        } else if let Some(y) = self.lowest_zero_in(&r) {
            size > 0.25 * self.eps * y || mixed
        } else {
            let g = self.model.dlog_theta(centre)?.norm();
            let near = mixed || uc.abs() < 0.75 * g * diag;
            if near {
                // ‖k_z‖² = (1 - |Θ(z)|²) / (4π Im z)
                let knorm2 = -(2.0 * (uc + self.log_eps)).exp_m1() / (4.0 * std::f64::consts::PI * centre.im);
                let scale = d0(self.model, centre)?.min(1.0 / knorm2);
                size > 0.25 * scale
            } else {
                false
            }
        };
        if split {
            let (xm, ym) = (centre.re, centre.im);
            let m = [
                self.u(Complex64::new(xm, r.y0))?,
                self.u(Complex64::new(r.x1, ym))?,
                self.u(Complex64::new(xm, r.y1))?,
                self.u(Complex64::new(r.x0, ym))?,
            ];
            let corners = [
                [u[0], m[0], uc, m[3]],
                [m[0], u[1], m[1], uc],
                [uc, m[1], u[2], m[2]],
                [m[3], uc, m[2], u[3]],
            ];
            for (q, cu) in r.quarters().into_iter().zip(corners) {
                let qc = self.u(q.centre())?;
                self.refine(q, cu, qc, depth + 1, out)?;
            }
            return Ok(());
        }
        let inside = u.map(|v| v < 0.0);
        if inside.iter().all(|b| *b) || inside.iter().all(|b| !*b) {
            return Ok(());
        }
        let corners = r.corners();
        let mut cross = [None; 4];
        for e in 0..4 {
            let (i, j) = (e, (e + 1) % 4);
            if inside[i] != inside[j] {
                cross[e] = Some(self.crossing(corners[i], u[i], corners[j], u[j])?);
            }
        }
        let pts: Vec<(usize, Complex64)> = cross.iter().enumerate().filter_map(|(e, p)| p.map(|p| (e, p))).collect();
        match pts.len() {
            2 => out.segments.push((pts[0].1, pts[1].1)),
            4 => {
                let p = |e: usize| cross[e].unwrap();
                if (uc < 0.0) == inside[0] {
                    out.segments.push((p(0), p(1)));
                    out.segments.push((p(2), p(3)));
                } else {
                    out.segments.push((p(3), p(0)));
                    out.segments.push((p(1), p(2)));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Zero of `u` on the segment `[a, b]` where `u` changes sign (Illinois method).
    fn crossing(&self, a: Complex64, mut ua: f64, b: Complex64, mut ub: f64) -> Result<Complex64> {
        let tol = 0.5 * BOUNDARY_TOL / self.eps;
        let (mut ta, mut tb) = (0.0, 1.0);
        let mut side = 0;
        let mut t = 0.5;
        for _ in 0..100 {
            t = (ta * ub - tb * ua) / (ub - ua);
            if !(t > ta && t < tb) {
                t = 0.5 * (ta + tb);
            }
            let ut = self.u(a + (b - a) * t)?;
            if ut.abs() <= tol || tb - ta <= 1e-15 {
                break;
            }
            if (ut < 0.0) == (ub < 0.0) {
                tb = t;
                ub = ut;
                if side == -1 {
                    ua *= 0.5;
                }
                side = -1;
            } else {
                ta = t;
                ua = ut;
                if side == 1 {
                    ub *= 0.5;
                }
                side = 1;
            }
        }
        Ok(a + (b - a) * t)
    }
}

impl LevelCurve {
    pub fn trace(model: &HermiteBiehlerModel, eps: f64, traced: Rect) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
        }
        if !(traced.width() > 0.0 && traced.height() > 0.0 && traced.y0 >= 0.0) {
            return Err(Error::InvalidParameter("degenerate trace window".into()));
        }
        let tracer = Tracer { model, eps, log_eps: eps.ln() };
        let h0 = traced.height() / 4.0;
        let nx = ((traced.width() / h0).ceil() as usize).clamp(1, 1 << 20);
        let ny = 4;
        let cells: Vec<Rect> = (0..nx)
            .flat_map(|i| {
                let xa = traced.x0 + traced.width() * i as f64 / nx as f64;
                let xb = traced.x0 + traced.width() * (i + 1) as f64 / nx as f64;
                (0..ny).map(move |j| {
                    Rect::new(
                        xa,
                        xb,
                        traced.y0 + traced.height() * j as f64 / ny as f64,
                        traced.y0 + traced.height() * (j + 1) as f64 / ny as f64,
                    )
                })
            })
            .collect();
        let traces: Vec<Trace> = cells
            .par_iter()
            .map(|r| {
                let mut t = Trace::default();
                let (u, uc) = tracer.values(r)?;
                tracer.refine(*r, u, uc, 0, &mut t)?;
                Ok(t)
            })
            .collect::<Result<_>>()?;
        let mut segs = Vec::new();
        let mut samples = Vec::new();
        let mut count = 0;
        for t in traces {
            count += t.cells;
            for (a, b) in t.segments {
                samples.push(a);
                samples.push(b);
                segs.push(Line::new([a.re, a.im], [b.re, b.im]));
            }
        }
        Ok(LevelCurve { eps, traced, segments: RTree::bulk_load(segs), samples, cells: count })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn traced(&self) -> Rect {
        self.traced
    }

    /// Number of quadtree cells visited while tracing.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Boundary points; each satisfies `||Θ| - ε| <= 1e-8`.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.segments.iter().map(|l| {
            let (a, b) = (l.from, l.to);
            (Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1]))
        })
    }

    /// Distance from `z` to the traced curve, if any was found.
    pub fn nearest(&self, z: Complex64) -> Option<f64> {
        let p = [z.re, z.im];
        self.segments.nearest_neighbor(&p).map(|l| l.distance_2(&p).sqrt())
    }

    /// Whether some traced segment meets the closed rectangle `r`.
    pub fn meets(&self, r: &Rect) -> bool {
        let env = AABB::from_corners([r.x0, r.y0], [r.x1, r.y1]);
        self.segments.locate_in_envelope_intersecting(&env).any(|l| clip(l.from, l.to, r))
    }

    /// `d_ε(z)`: zero inside `Ω_ε`, the distance to the traced curve when the
    /// corresponding disk stays in the traced region, otherwise a direct query.
    pub fn distance(&self, model: &HermiteBiehlerModel, z: Complex64) -> Result<f64> {
        let z = Complex64::new(z.re, z.im.abs());
        if model.log_abs_theta(z)? < self.eps.ln() {
            return Ok(0.0);
        }
        if let Some(d) = self.nearest(z) {
            let t = &self.traced;
            if z.re - d >= t.x0 && z.re + d <= t.x1 && z.im + d <= t.y1 {
                return Ok(d);
            }
        }
        Ok(d_eps(model, z, self.eps)?.value)
    }
}

/// Liang–Barsky test of the segment `[p, q]` against `r`.
fn clip(p: [f64; 2], q: [f64; 2], r: &Rect) -> bool {
    let d = [q[0] - p[0], q[1] - p[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (num, den) in [
        (p[0] - r.x0, -d[0]),
        (r.x1 - p[0], d[0]),
        (p[1] - r.y0, -d[1]),
        (r.y1 - p[1], d[1]),
    ] {
        if den == 0.0 {
            if num < 0.0 {
                return false;
            }
        } else {
            let t = num / den;
            if den < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    t0 <= t1
}

/// Traced `ε`- and `δ`-level curves over a working window, with fast distance queries.
#[derive(Debug)]
pub struct LevelSetGeometry<'a> {
    model: &'a HermiteBiehlerModel,
    eps: f64,
    delta: f64,
    window: Rect,
    curve_eps: LevelCurve,
    curve_delta: LevelCurve,
}

impl<'a> LevelSetGeometry<'a> {
    /// Traces both curves over `window` enlarged by its height on every side but the bottom.
    pub fn build(model: &'a HermiteBiehlerModel, eps: f64, delta: f64, window: Rect) -> Result<Self> {
        if !(0.0 < eps && eps < delta && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < eps < delta < 1, got {eps}, {delta}")));
        }
        let m = window.height();
        let traced = Rect::new(window.x0 - m, window.x1 + m, 0.0, window.y1 + m);
        let curve_eps = LevelCurve::trace(model, eps, traced)?;
        let curve_delta = LevelCurve::trace(model, delta, traced)?;
        Ok(LevelSetGeometry { model, eps, delta, window, curve_eps, curve_delta })
    }

    pub fn model(&self) -> &'a HermiteBiehlerModel {
        self.model
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn curve_eps(&self) -> &LevelCurve {
        &self.curve_eps
    }

    pub fn curve_delta(&self) -> &LevelCurve {
        &self.curve_delta
    }

    fn check(&self, z: Complex64) -> Result<Complex64> {
        let zu = Complex64::new(z.re, z.im.abs());
        if !self.window.contains(zu) {
            return Err(Error::OutOfCoveredRange(z));
        }
        Ok(zu)
    }

    pub fn d_eps(&self, z: Complex64) -> Result<f64> {
        let z = self.check(z)?;
        self.curve_eps.distance(self.model, z)
    }

    pub fn d_delta(&self, z: Complex64) -> Result<f64> {
        let z = self.check(z)?;
        self.curve_delta.distance(self.model, z)
    }

    /// `|Θ(z)| < δ` (after reflection to the upper half-plane).
    pub fn in_omega_delta(&self, z: Complex64) -> Result<bool> {
        Ok(self.model.log_abs_theta(Complex64::new(z.re, z.im.abs()))? < self.delta.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn traced_samples_lie_on_the_curve() {
        let m = HermiteBiehlerModel::finite(vec![c(0.0, 1.0), c(3.0, 0.2), c(-2.0, 0.5)], 0.0).unwrap();
        let curve = LevelCurve::trace(&m, 0.3, Rect::new(-6.0, 6.0, 0.0, 4.0)).unwrap();
        assert!(!curve.samples().is_empty());
        for p in curve.samples() {
            assert!((m.theta(*p).unwrap().norm() - 0.3).abs() <= 1e-8);
        }
    }

    #[test]
    fn cached_distance_matches_disk_oracle() {
        let m = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let g = LevelSetGeometry::build(&m, 0.1, 0.5, Rect::new(-4.0, 4.0, 0.0, 3.0)).unwrap();
        for z in [c(0.0, 0.0), c(1.0, 0.3), c(-2.5, 0.0)] {
            // Ω_ε is the disk with centre i(1+ε²)/(1−ε²) and radius 2ε/(1−ε²).
            let e: f64 = 0.1;
            let centre = c(0.0, (1.0 + e * e) / (1.0 - e * e));
            let want = (z - centre).norm() - 2.0 * e / (1.0 - e * e);
            let got = g.d_eps(z).unwrap();
            assert!((got - want).abs() < 1e-3 * want, "{z}: {got} vs {want}");
        }
        assert!(g.d_eps(c(100.0, 0.0)).is_err());
    }

    #[test]
    fn paley_wiener_strip_distance() {
        let m = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let eps = (-2.0f64).exp();
        let g = LevelSetGeometry::build(&m, eps, (-1.0f64).exp(), Rect::new(-5.0, 5.0, 0.0, 2.0)).unwrap();
        for x in [-4.0, 0.3, 4.9] {
            assert!((g.d_eps(c(x, 0.0)).unwrap() - 1.0).abs() < 1e-7);
            assert!((g.d_delta(c(x, 0.1)).unwrap() - 0.4).abs() < 1e-7);
        }
    }
}
