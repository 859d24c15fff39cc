//! Box test `μ(S(I)) ≲ |I|` over dyadic Carleson squares meeting `Ω_ε`.

use super::adaptive::Tolerance;
use super::cubature::{integrate_cells, Cell};
use super::norms::Guard;
use crate::error::{Error, Result};
use crate::levelset::{LevelSetGeometry, Rect};
use crate::weights::WeightField;
use num_complex::Complex64;
use serde::Serialize;

/// A positive density on the upper half-plane.
pub enum Measure<'w, 'a> {
    /// `d_ε(z)^{-1} 1[z ∉ Ω_δ] dm`, with `ε, δ` from the geometry.
    DistanceInverse(&'w LevelSetGeometry<'a>),
    /// `W(z)² dm`.
    WeightSquared(&'w WeightField<'a>),
}

impl Measure<'_, '_> {
    pub fn label(&self) -> String {
        match self {
            Measure::DistanceInverse(g) => format!("inv_d_eps(eps={},delta={})", g.eps(), g.delta()),
            Measure::WeightSquared(w) => format!("{}^2", w.kind()),
        }
    }

    pub fn density(&self, z: Complex64) -> Result<f64> {
        match self {
            Measure::DistanceInverse(g) => {
                if g.in_omega_delta(z)? {
                    Ok(0.0)
                } else {
                    Ok(1.0 / g.d_eps(z)?)
                }
            }
            Measure::WeightSquared(w) => Ok(w.eval(z)?.powi(2)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarlesonSquare {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub ratio: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub measure: String,
    pub squares: Vec<CarlesonSquare>,
    pub max_ratio: f64,
}

impl CarlesonReport {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for s in &self.squares {
            out.serialize(s)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Dyadic intervals `[k 2^j, (k+1) 2^j]` inside `range` with `min_len <= 2^j <= max_len`.
pub fn dyadic_squares(range: (f64, f64), min_len: f64, max_len: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut j = min_len.log2().ceil() as i32;
    while 2f64.powi(j) <= max_len {
        let h = 2f64.powi(j);
        let mut k = (range.0 / h).ceil();
        while (k + 1.0) * h <= range.1 {
            out.push((k * h, (k + 1.0) * h));
            k += 1.0;
        }
        j += 1;
    }
    out
}

/// For each interval whose square `S(I)` meets `Ω_ε`, integrates the measure
/// over `S(I)` and reports `μ(S(I))/|I|`. Squares missing `Ω_ε` are skipped.
pub fn carleson_test(measure: &Measure, geometry: &LevelSetGeometry, intervals: &[(f64, f64)], tol: Tolerance) -> Result<CarlesonReport> {
    let mut squares = Vec::new();
    for &(a, b) in intervals {
        let h = b - a;
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
        }
        let rect = Rect::new(a, b, 0.0, h);
        if !geometry.window().contains(Complex64::new(a, h)) || !geometry.window().contains(Complex64::new(b, 0.0)) {
            return Err(Error::OutOfCoveredRange(Complex64::new(a, h)));
        }
        if !geometry.curve_eps().meets(&rect) {
            continue;
        }
        let guard = Guard::new();
        let f = |x: f64, y: f64| guard.check(measure.density(Complex64::new(x, y)));
        let mut ys = vec![0.0, h];
        let mut t = h;
        for _ in 0..12 {
            t *= 0.5;
            ys.push(t);
        }
        ys.sort_by(f64::total_cmp);
        let mut cells = Vec::new();
        for k in 0..4 {
            let (u, v) = (a + h * k as f64 / 4.0, a + h * (k + 1) as f64 / 4.0);
            for w in ys.windows(2) {
                cells.push(Cell::new(u, v, w[0], w[1]));
            }
        }
        let q = integrate_cells(&f, cells, tol, 200_000);
        guard.finish()?;
        squares.push(CarlesonSquare { a, b, mu: q.value, ratio: q.value / h, abs_error: q.abs_error });
    }
    let max_ratio = squares.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(CarlesonReport { measure: measure.label(), squares, max_ratio })
}
