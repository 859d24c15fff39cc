//! Representing Fock weights as pointwise-evaluable fields.
//!
//! Every weight is defined on the closed upper half-plane and extended by
//! `W(z̄) = W(z)`. The quadrature works with `W(z)|E(z)|` (evaluated at the
//! reflected point), which avoids overflow of `|E|` far from the axis.

mod cover;
mod spectral;

pub use cover::{CoverCheck, CoverInterval, CoverParams, IntervalCover};
pub use spectral::{SeriesCheck, SpectralData};

use crate::error::{Error, Result};
use crate::kernels::KernelEval;
use crate::levelset::LevelSetGeometry;
use crate::model::HermiteBiehlerModel;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    W0,
    Main,
    Tilde,
    One1,
    One2,
    W2,
    Spec,
}

impl WeightKind {
    pub const ALL: [WeightKind; 7] = [
        WeightKind::W0,
        WeightKind::Main,
        WeightKind::Tilde,
        WeightKind::One1,
        WeightKind::One2,
        WeightKind::W2,
        WeightKind::Spec,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::W0 => "w0",
            WeightKind::Main => "w_main",
            WeightKind::Tilde => "w_tilde",
            WeightKind::One1 => "w_one1",
            WeightKind::One2 => "w_one2",
            WeightKind::W2 => "w2",
            WeightKind::Spec => "w_spec",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        WeightKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown weight {s:?}")))
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

enum Extra<'a> {
    None,
    Geometry(LevelSetGeometry<'a>),
    Delta(f64),
    Cover(IntervalCover),
    Spectral(SpectralData),
}

/// A weight `W` on `ℂ`. Outside the working range of its geometry, cover or
/// spectral data the weight falls back to `W_0` unless built strict.
pub struct WeightField<'a> {
    kind: WeightKind,
    model: &'a HermiteBiehlerModel,
    extra: Extra<'a>,
    strict: bool,
}

impl<'a> WeightField<'a> {
    /// `W_0(z) = 1 / (|E(z)| (1 + |Im z|))`.
    pub fn w0(model: &'a HermiteBiehlerModel) -> Self {
        WeightField { kind: WeightKind::W0, model, extra: Extra::None, strict: false }
    }

    /// `W_0 (1 + d_ε^{-1/2} 1[Ω_δ^c])`, with `ε, δ` taken from the geometry.
    pub fn main(geometry: LevelSetGeometry<'a>) -> Self {
        WeightField { kind: WeightKind::Main, model: geometry.model(), extra: Extra::Geometry(geometry), strict: false }
    }

    /// `W_0 (1 + Σ_n |I_n|^{-1/2} 1[S(I_n)])`.
    pub fn tilde(model: &'a HermiteBiehlerModel, cover: IntervalCover) -> Self {
        WeightField { kind: WeightKind::Tilde, model, extra: Extra::Cover(cover), strict: false }
    }

    /// `W_0 (1 + ‖k_z‖ 1[Ω_δ^c])`.
    pub fn one1(model: &'a HermiteBiehlerModel, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(WeightField { kind: WeightKind::One1, model, extra: Extra::Delta(delta), strict: false })
    }

    /// `W_0 (1 + φ'(x)^{1/2} 1[|y| ≤ 1/φ'(x)])`.
    pub fn one2(model: &'a HermiteBiehlerModel) -> Self {
        WeightField { kind: WeightKind::One2, model, extra: Extra::None, strict: false }
    }

    /// `W_0 (1 + ‖k_z‖)`.
    pub fn w2(model: &'a HermiteBiehlerModel) -> Self {
        WeightField { kind: WeightKind::W2, model, extra: Extra::None, strict: false }
    }

    /// `W_0 + W_T` with `W_T` supported on the discs `D(t_n, r_n)`.
    pub fn spec(model: &'a HermiteBiehlerModel, data: SpectralData) -> Self {
        WeightField { kind: WeightKind::Spec, model, extra: Extra::Spectral(data), strict: false }
    }

    /// Raise `OutOfCoveredRange` instead of falling back to `W_0`.
    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn model(&self) -> &'a HermiteBiehlerModel {
        self.model
    }

    pub fn geometry(&self) -> Option<&LevelSetGeometry<'a>> {
        match &self.extra {
            Extra::Geometry(g) => Some(g),
            _ => None,
        }
    }

    pub fn cover(&self) -> Option<&IntervalCover> {
        match &self.extra {
            Extra::Cover(c) => Some(c),
            _ => None,
        }
    }

    pub fn spectral(&self) -> Option<&SpectralData> {
        match &self.extra {
            Extra::Spectral(s) => Some(s),
            _ => None,
        }
    }

    fn fallback(&self, r: Result<f64>) -> Result<f64> {
        match r {
            Err(Error::OutOfCoveredRange(_)) if !self.strict => Ok(0.0),
            r => r,
        }
    }

    /// `W(z)|E(ẑ)|` where `ẑ` is `z` reflected into the closed upper half-plane.
    pub fn relative(&self, z: Complex64) -> Result<f64> {
        let z = Complex64::new(z.re, z.im.abs());
        let base = 1.0 / (1.0 + z.im);
        let m = self.model;
        let extra = match &self.extra {
            Extra::Geometry(g) => {
                let outside = m.log_abs_theta(z)? >= g.delta().ln();
                if outside {
                    self.fallback(g.d_eps(z).map(|d| d.powf(-0.5)))?
                } else {
                    0.0
                }
            }
            Extra::Delta(delta) => {
                if m.log_abs_theta(z)? >= delta.ln() {
                    KernelEval::new(m).knorm2(z)?.sqrt()
                } else {
                    0.0
                }
            }
            Extra::Cover(c) => self.fallback(c.square_term(z))?,
            Extra::Spectral(s) => return Ok(base + self.fallback(s.disc_term(m, z))?),
            Extra::None => match self.kind {
                WeightKind::One2 => {
                    let p = m.phase_derivative(z.re)?;
                    if z.im * p <= 1.0 { p.sqrt() } else { 0.0 }
                }
                WeightKind::W2 => KernelEval::new(m).knorm2(z)?.sqrt(),
                _ => 0.0,
            },
        };
        Ok(base * (1.0 + extra))
    }

    /// `W(z)`, computed as `exp(log W|E| - log|E|)`.
    pub fn eval(&self, z: Complex64) -> Result<f64> {
        let zu = Complex64::new(z.re, z.im.abs());
        let (log_e, _) = self.model.eval_e(zu)?;
        Ok((self.relative(z)?.ln() - log_e).exp())
    }

    /// Real abscissae where the weight jumps inside `[x0, x1]`.
    pub fn x_breaks(&self, x0: f64, x1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.extra {
            Extra::Cover(c) => {
                out.extend(c.intervals().iter().map(|i| i.a).filter(|a| *a > x0 && *a < x1));
                let (lo, hi) = c.range();
                out.extend([lo, hi].into_iter().filter(|a| *a > x0 && *a < x1));
            }
            Extra::Spectral(s) => {
                for (t, r) in s.nodes().iter().zip(s.radii()) {
                    out.extend([t - r, *t, t + r].into_iter().filter(|a| *a > x0 && *a < x1));
                }
            }
            Extra::Geometry(g) => {
                let w = g.window();
                out.extend([w.x0, w.x1].into_iter().filter(|a| *a > x0 && *a < x1));
            }
            _ => {}
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Heights where the weight jumps inside the column `[u, v]`: the top of a
    /// cover square or of a disc.
    pub fn column_heights(&self, u: f64, v: f64) -> Vec<f64> {
        let m = 0.5 * (u + v);
        match &self.extra {
            Extra::Cover(c) => c.locate(m).map(|i| vec![i.len()]).unwrap_or_default(),
            Extra::Spectral(s) => s
                .nodes()
                .iter()
                .zip(s.radii())
                .filter(|(t, r)| (m - **t).abs() < **r)
                .map(|(_, r)| *r)
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::Rect;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn w0_examples() {
        let pw = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let w = WeightField::w0(&pw);
        assert!((w.eval(c(0.0, 1.0)).unwrap() - (-1.0f64).exp() / 2.0).abs() < 1e-15);
        let f = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        assert!((WeightField::w0(&f).eval(c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        for k in 0..100 {
            let z = c((k as f64 * 0.37).sin() * 9.0, (k as f64 * 0.71).cos() * 4.0);
            assert_eq!(w.eval(z).unwrap(), w.eval(z.conj()).unwrap());
        }
    }

    #[test]
    fn w_main_examples() {
        let pw = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let g = LevelSetGeometry::build(&pw, (-2.0f64).exp(), (-1.0f64).exp(), Rect::new(-5.0, 5.0, 0.0, 2.0)).unwrap();
        let w = WeightField::main(g);
        for x in [-3.0, 0.0, 2.5] {
            assert!((w.eval(c(x, 0.0)).unwrap() - 2.0).abs() < 1e-6);
        }
        let f = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let g = LevelSetGeometry::build(&f, 0.5, 0.6, Rect::new(-4.0, 4.0, 0.0, 3.0)).unwrap();
        let w = WeightField::main(g);
        assert!((w.eval(c(0.0, 0.0)).unwrap() - (1.0 + 3f64.sqrt())).abs() < 1e-5);
        // z = i lies in Ω_δ.
        let w0 = WeightField::w0(&f);
        assert_eq!(w.eval(c(0.0, 1.0)).unwrap(), w0.eval(c(0.0, 1.0)).unwrap());
        // Outside the window: W_0, or an error when strict.
        assert_eq!(w.eval(c(50.0, 0.5)).unwrap(), w0.eval(c(50.0, 0.5)).unwrap());
        assert!(matches!(w.strict().eval(c(50.0, 0.5)), Err(Error::OutOfCoveredRange(_))));
    }

    #[test]
    fn w_one2_and_w2_examples() {
        let pw = HermiteBiehlerModel::paley_wiener(PI).unwrap();
        let w = WeightField::one2(&pw);
        let w0 = WeightField::w0(&pw);
        assert!((w.eval(c(1.3, 0.0)).unwrap() - w0.eval(c(1.3, 0.0)).unwrap() * (1.0 + PI.sqrt())).abs() < 1e-12);
        assert_eq!(w.eval(c(1.3, 0.5)).unwrap(), w0.eval(c(1.3, 0.5)).unwrap());

        let pw1 = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let want = (-1.0f64).exp() / 2.0 * (1.0 + ((1.0 - (-4.0f64).exp()) / (4.0 * PI)).sqrt());
        assert!((WeightField::w2(&pw1).eval(c(0.0, 1.0)).unwrap() - want).abs() < 1e-14);

        let f = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let one1 = WeightField::one1(&f, 0.5).unwrap();
        let w2 = WeightField::w2(&f);
        for x in [-3.0, 0.5, 2.0] {
            let want = WeightField::w0(&f).eval(c(x, 0.0)).unwrap() * (1.0 + (f.phase_derivative(x).unwrap() / PI).sqrt());
            assert!((w2.eval(c(x, 0.0)).unwrap() - want).abs() < 1e-12 * want);
        }
        for z in [c(0.0, 1.0), c(0.3, 0.2), c(-2.0, 1.5)] {
            assert!(w2.eval(z).unwrap() >= one1.eval(z).unwrap());
        }
    }

    #[test]
    fn w_tilde_square_term() {
        let pw = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let g = LevelSetGeometry::build(&pw, (-2.0f64).exp(), (-1.0f64).exp(), Rect::new(-6.0, 6.0, 0.0, 1.0)).unwrap();
        let cover = IntervalCover::build(&g, (-4.0, 4.0), CoverParams::default()).unwrap();
        let h = cover.intervals()[0].len();
        let w = WeightField::tilde(&pw, cover);
        let w0 = WeightField::w0(&pw);
        let z = c(0.3 * h, 0.5 * h);
        assert!((w.eval(z).unwrap() - w0.eval(z).unwrap() * (1.0 + h.powf(-0.5))).abs() < 1e-12);
        let above = c(0.1, 2.0 * h);
        assert_eq!(w.eval(above).unwrap(), w0.eval(above).unwrap());
    }

    #[test]
    fn names_round_trip() {
        for k in WeightKind::ALL {
            assert_eq!(WeightKind::from_name(k.name()).unwrap(), k);
        }
    }
}
