//! Adaptive cubature on rectangles with the embedded degree 7/5 Genz–Malik rule.

use super::adaptive::{refine, QuadValue, Region, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Cell {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Cell { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

impl Region for Cell {
    fn split(&self, hint: u8) -> Vec<Self> {
        if hint == 0 {
            let m = 0.5 * (self.x0 + self.x1);
            vec![Cell { x1: m, ..*self }, Cell { x0: m, ..*self }]
        } else {
            let m = 0.5 * (self.y0 + self.y1);
            vec![Cell { y1: m, ..*self }, Cell { y0: m, ..*self }]
        }
    }

    fn sort_key(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }

    fn too_small(&self) -> bool {
        let sx = 1e-13 * self.x0.abs().max(self.x1.abs()).max(1e-3);
        let sy = 1e-13 * self.y0.abs().max(self.y1.abs()).max(1e-3);
        self.x1 - self.x0 <= sx || self.y1 - self.y0 <= sy
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quad2d<T> {
    pub value: T,
    pub abs_error: f64,
    pub cells: usize,
    pub converged: bool,
}

const L2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const L3: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const L5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)
const W1: f64 = -3816.0 / 19683.0;
const W2: f64 = 980.0 / 6561.0;
const W3: f64 = 1020.0 / 19683.0;
const W4: f64 = 200.0 / 19683.0;
const W5: f64 = 6859.0 / 19683.0 / 4.0;
const V1: f64 = -971.0 / 729.0;
const V2: f64 = 245.0 / 486.0;
const V3: f64 = 65.0 / 1458.0;
const V4: f64 = 25.0 / 729.0;

/// Degree-7 value, `|I7 - I5|`, and the axis with the larger fourth difference.
pub(crate) fn genz_malik<T: QuadValue, F: Fn(f64, f64) -> T>(f: &F, c: &Cell) -> (T, f64, u8) {
    let (cx, cy) = (0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1));
    let (hx, hy) = (0.5 * (c.x1 - c.x0), 0.5 * (c.y1 - c.y0));
    let f0 = f(cx, cy);
    let ax2 = [f(cx - L2 * hx, cy), f(cx + L2 * hx, cy)];
    let ay2 = [f(cx, cy - L2 * hy), f(cx, cy + L2 * hy)];
    let ax3 = [f(cx - L3 * hx, cy), f(cx + L3 * hx, cy)];
    let ay3 = [f(cx, cy - L3 * hy), f(cx, cy + L3 * hy)];
    let mut s4 = T::default();
    let mut s5 = T::default();
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            s4 = s4 + f(cx + sx * L3 * hx, cy + sy * L3 * hy);
            s5 = s5 + f(cx + sx * L5 * hx, cy + sy * L5 * hy);
        }
    }
    let s2 = ax2[0] + ax2[1] + ay2[0] + ay2[1];
    let s3 = ax3[0] + ax3[1] + ay3[0] + ay3[1];
    let vol = 4.0 * hx * hy;
    let i7 = (f0 * W1 + s2 * W2 + s3 * W3 + s4 * W4 + s5 * W5) * vol;
    let i5 = (f0 * V1 + s2 * V2 + s3 * V3 + s4 * V4) * vol;
    let r = (L2 * L2) / (L3 * L3);
    let fourth = |a: [T; 2], b: [T; 2]| (a[0] + a[1] - f0 * 2.0 - (b[0] + b[1] - f0 * 2.0) * r).magnitude();
    let (dx, dy) = (fourth(ax2, ax3), fourth(ay2, ay3));
    let axis = if (dx - dy).abs() <= 0.1 * dx.max(dy) {
        u8::from(hy > hx)
    } else {
        u8::from(dy > dx)
    };
    (i7, (i7 - i5).magnitude(), axis)
}

/// Adaptive integration of `f(x, y)` over the union of `cells`.
pub fn integrate_cells<T, F>(f: &F, cells: Vec<Cell>, tol: Tolerance, max_cells: usize) -> Quad2d<T>
where
    T: QuadValue,
    F: Fn(f64, f64) -> T + Sync,
{
    if cells.is_empty() {
        return Quad2d { value: T::default(), abs_error: 0.0, cells: 0, converged: true };
    }
    let out = refine(cells, |c: &Cell| genz_malik(f, c), tol, max_cells);
    Quad2d { value: out.value, abs_error: out.abs_error, cells: out.regions, converged: out.converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_degree_seven() {
        let c = Cell::new(-0.3, 1.1, 0.2, 0.9);
        let f = |x: f64, y: f64| x.powi(7) + x.powi(3) * y.powi(4) + y.powi(6) * x - 2.0;
        let exact = {
            let ix = |p: i32| (1.1f64.powi(p + 1) - (-0.3f64).powi(p + 1)) / (p + 1) as f64;
            let iy = |p: i32| (0.9f64.powi(p + 1) - 0.2f64.powi(p + 1)) / (p + 1) as f64;
            ix(7) * iy(0) + ix(3) * iy(4) + iy(6) * ix(1) - 2.0 * ix(0) * iy(0)
        };
        let (v, _, _) = genz_malik(&f, &c);
        assert!((v - exact).abs() < 1e-13, "{v} {exact}");
    }

    #[test]
    fn adaptive_gaussian_peak() {
        let s = 1e-2;
        let f = |x: f64, y: f64| (-(x * x + y * y) / (s * s)).exp();
        let q: Quad2d<f64> = integrate_cells(&f, vec![Cell::new(-1.0, 1.0, -0.7, 1.3)], Tolerance::rel(1e-9), 100_000);
        let exact = std::f64::consts::PI * s * s;
        assert!(q.converged);
        assert!((q.value - exact).abs() < 1e-8 * exact, "{}", q.value / exact - 1.0);
    }
}
