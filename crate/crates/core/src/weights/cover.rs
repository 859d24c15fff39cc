//! Stopping-time dyadic cover of a real range by intervals comparable to their
//! distance from `Ω_δ`.

use crate::error::{Error, Result};
use crate::levelset::LevelSetGeometry;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverParams {
    pub kappa: f64,
    pub l_max: f64,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams { kappa: 0.25, l_max: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverInterval {
    pub a: f64,
    pub b: f64,
    /// Lower estimate of `dist(I, Ω_δ)`.
    pub dist: f64,
    depth: u32,
    /// Never bisected because of the distance rule: only the upper band applies.
    capped: bool,
}

impl CoverInterval {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_capped(&self) -> bool {
        self.capped
    }

    /// `z ∈ S(I)` for `z` in the closed upper half-plane.
    pub fn square_contains(&self, z: Complex64) -> bool {
        z.re >= self.a && z.re <= self.b && z.im >= 0.0 && z.im <= self.len()
    }
}

/// Violations found by [`IntervalCover::check`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverCheck {
    pub band: Vec<usize>,
    pub neighbour: Vec<usize>,
    pub containment: Vec<usize>,
    pub gaps: Vec<usize>,
}

impl CoverCheck {
    pub fn is_ok(&self) -> bool {
        self.band.is_empty() && self.neighbour.is_empty() && self.containment.is_empty() && self.gaps.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct IntervalCover {
    intervals: Vec<CoverInterval>,
    range: (f64, f64),
    params: CoverParams,
    delta: f64,
}

struct Builder<'g, 'a> {
    geometry: &'g LevelSetGeometry<'a>,
    params: CoverParams,
    log_delta: f64,
}

impl Builder<'_, '_> {
    /// `min d_δ` over nine points of `[a, b]`, lowered by the Lipschitz slack.
    fn dist(&self, a: f64, b: f64) -> Result<f64> {
        let mut m = f64::INFINITY;
        for k in 0..9 {
            let x = a + (b - a) * k as f64 / 8.0;
            m = m.min(self.geometry.d_delta(Complex64::new(x, 0.0))?);
        }
        Ok((m - (b - a) / 16.0).max(0.0))
    }

    /// Samples of the doubled square `S(2I)` lying in `Ω_δ`.
    fn square_hits(&self, a: f64, b: f64) -> Result<bool> {
        let (c, h) = (0.5 * (a + b), b - a);
        let model = self.geometry.model();
        for x in [c - h, c, c + h] {
            for y in [2.0 * h / 3.0, 4.0 * h / 3.0, 2.0 * h] {
                if model.log_abs_theta(Complex64::new(x, y))? < self.log_delta {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn make(&self, a: f64, b: f64, depth: u32, capped: bool) -> Result<CoverInterval> {
        Ok(CoverInterval { a, b, dist: self.dist(a, b)?, depth, capped })
    }

    fn needs_split(&self, i: &CoverInterval) -> Result<bool> {
        Ok(i.len() > self.params.kappa * i.dist || self.square_hits(i.a, i.b)?)
    }

    fn split(&self, i: &CoverInterval) -> Result<[CoverInterval; 2]> {
        if i.depth >= MAX_DEPTH {
            return Err(Error::ResolutionExceeded { x: 0.5 * (i.a + i.b), depth: i.depth as usize });
        }
        let m = 0.5 * (i.a + i.b);
        Ok([self.make(i.a, m, i.depth + 1, false)?, self.make(m, i.b, i.depth + 1, false)?])
    }

    fn refine(&self, i: CoverInterval, out: &mut Vec<CoverInterval>) -> Result<()> {
        if !self.needs_split(&i)? {
            out.push(i);
            return Ok(());
        }
        for c in self.split(&i)? {
            self.refine(c, out)?;
        }
        Ok(())
    }
}

impl IntervalCover {
    /// Builds the cover of `range` from the `δ`-curve of `geometry`, whose window
    /// must contain the range on the real axis.
    pub fn build(geometry: &LevelSetGeometry, range: (f64, f64), params: CoverParams) -> Result<Self> {
        let (lo, hi) = range;
        if !(hi > lo) || !(params.kappa > 0.0) || !(params.l_max > 0.0) {
            return Err(Error::InvalidParameter("empty cover range or non-positive kappa, l_max".into()));
        }
        let b = Builder { geometry, params, log_delta: geometry.delta().ln() };
        let n = ((hi - lo) / params.l_max).ceil() as usize;
        let mut out = Vec::new();
        for k in 0..n {
            let a = lo + (hi - lo) * k as f64 / n as f64;
            let e = if k + 1 == n { hi } else { lo + (hi - lo) * (k + 1) as f64 / n as f64 };
            let i = b.make(a, e, 0, true)?;
            b.refine(i, &mut out)?;
        }
        // Balance: neighbours may differ by at most two dyadic generations.
        loop {
            let bad = (0..out.len().saturating_sub(1)).find(|&k| {
                let r = out[k].len() / out[k + 1].len();
                !(0.25 - 1e-12..=4.0 + 1e-12).contains(&r)
            });
            let Some(k) = bad else { break };
            let big = if out[k].len() > out[k + 1].len() { k } else { k + 1 };
            let halves = b.split(&out[big])?;
            out.splice(big..=big, halves);
        }
        Ok(IntervalCover { intervals: out, range, params, delta: geometry.delta() })
    }

    pub fn intervals(&self) -> &[CoverInterval] {
        &self.intervals
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn params(&self) -> CoverParams {
        self.params
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The interval containing `x`, or `OutOfCoveredRange`.
    pub fn locate(&self, x: f64) -> Result<&CoverInterval> {
        if !(x >= self.range.0 && x <= self.range.1) {
            return Err(Error::OutOfCoveredRange(Complex64::new(x, 0.0)));
        }
        let k = self.intervals.partition_point(|i| i.b < x);
        Ok(&self.intervals[k.min(self.intervals.len() - 1)])
    }

    /// `Σ_n |I_n|^{-1/2} 1[z ∈ S(I_n)]` for `z` in the closed upper half-plane.
    pub fn square_term(&self, z: Complex64) -> Result<f64> {
        let i = self.locate(z.re)?;
        Ok(if i.square_contains(z) { i.len().powf(-0.5) } else { 0.0 })
    }

    /// Asserts the cover invariants: the band `κ/4 ≤ |I|/dist ≤ κ` (upper half
    /// only for capped intervals), neighbour ratios in `[1/4, 4]`, sampled
    /// containment `S(2I) ⊂ Ω_δ^c` and contiguity.
    pub fn check(&self, geometry: &LevelSetGeometry) -> Result<CoverCheck> {
        let b = Builder { geometry, params: self.params, log_delta: self.delta.ln() };
        let k = self.params.kappa;
        let mut c = CoverCheck::default();
        for (n, i) in self.intervals.iter().enumerate() {
            let r = i.len() / i.dist;
            if r > k * (1.0 + 1e-12) || (!i.capped && r < 0.25 * k) {
                c.band.push(n);
            }
            if b.square_hits(i.a, i.b)? {
                c.containment.push(n);
            }
            if let Some(j) = self.intervals.get(n + 1) {
                let q = i.len() / j.len();
                if !(0.25 - 1e-12..=4.0 + 1e-12).contains(&q) {
                    c.neighbour.push(n);
                }
                if j.a != i.b {
                    c.gaps.push(n);
                }
            }
        }
        Ok(c)
    }

    /// CSV rows `a,b,dist`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["a", "b", "dist"])?;
        for i in &self.intervals {
            out.write_record([i.a.to_string(), i.b.to_string(), i.dist.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}
