//! Reproducing kernels of H(E) and K_Θ, and test functions.
//!
//! A function `F ∈ H(E)` is handled through `F/E` on the closed upper
//! half-plane and `F/E♯` on the lower one; `|F W|` at `z` and `z̄` then only
//! needs `W |E|` on the upper half-plane.

use crate::error::{Error, Result};
use crate::model::{HermiteBiehlerModel, ZeroFamily};
use crate::numeric::cexpm1;
use num_complex::Complex64;
use std::f64::consts::PI;

const I_2PI: Complex64 = Complex64 { re: 0.0, im: 0.5 / PI };

#[derive(Debug, Clone, Copy)]
pub struct KernelEval<'a> {
    model: &'a HermiteBiehlerModel,
}

impl<'a> KernelEval<'a> {
    pub fn new(model: &'a HermiteBiehlerModel) -> Self {
        KernelEval { model }
    }

    pub fn model(&self) -> &'a HermiteBiehlerModel {
        self.model
    }

    /// `k_w(z) = (i/2π) (1 - conj(Θ(w)) Θ(z)) / (z - w̄)`.
    pub fn k_small(&self, w: Complex64, z: Complex64) -> Result<Complex64> {
        let d = z - w.conj();
        if d == Complex64::new(0.0, 0.0) {
            return Ok(-I_2PI * self.model.dlog_theta(z)?);
        }
        let l = self.model.log_theta_diff(z, w.conj())?;
        Ok(-I_2PI * cexpm1(l) / d)
    }

    /// `k_w(z) / Θ(z)` for `z` in the lower half-plane, given `Θ(w)`.
    pub fn k_small_over_theta(&self, w: Complex64, theta_w: Complex64, z: Complex64) -> Result<Complex64> {
        let zc = z.conj();
        let d = zc - w;
        let q = if d == Complex64::new(0.0, 0.0) {
            theta_w * self.model.dlog_theta(w)?
        } else {
            theta_w * cexpm1(self.model.log_theta_diff(zc, w)?) / d
        };
        Ok((-I_2PI * q).conj())
    }

    /// `‖k_z‖² = (1 - |Θ(z)|²) / (4π Im z)`, and `φ'(x)/π` on the real line.
    /// Points below the axis are reflected.
    pub fn knorm2(&self, z: Complex64) -> Result<f64> {
        let y = z.im.abs();
        if y == 0.0 {
            return Ok(self.model.phase_derivative(z.re)? / PI);
        }
        let zu = Complex64::new(z.re, y);
        Ok(self.model.one_minus_abs_theta_sq(zu)? / (4.0 * PI * y))
    }

    /// `K_w(z) = E(z) conj(E(w)) k_w(z)`.
    pub fn k_big(&self, w: Complex64, z: Complex64) -> Result<Complex64> {
        let (lz, az) = self.model.eval_e(z)?;
        let (lw, aw) = self.model.eval_e(w)?;
        Ok(Complex64::new(lz + lw, az - aw).exp() * self.k_small(w, z)?)
    }
}

#[derive(Debug, Clone)]
pub enum TestKind {
    /// `f_n = E √y_n / (z - z̄_n)`.
    Fn { index: i64 },
    /// `g_x = K_x / conj(E(x)) = E k_x`.
    Gx { x: f64 },
    /// `Σ c_j sinc(z - s_j)` with `sinc(u) = sin(πu)/(πu)`, on a Paley–Wiener model of type `a ≥ π`.
    Sinc { shifts: Vec<f64>, coeffs: Vec<Complex64> },
    /// `Σ c_j K_{w_j}`.
    Kernels { nodes: Vec<Complex64>, coeffs: Vec<Complex64> },
    /// `Σ c_j K_{w_j} / |E(w_j)|`, finite even where `|E(w_j)|` over- or underflows.
    UnitKernels { nodes: Vec<Complex64>, coeffs: Vec<Complex64> },
    /// Only the modulus `|F/E|(x + iy) = (|x| + 1)^(-1/2) / log(|x| + 2)` is known.
    ModulusProfile,
}

#[derive(Debug, Clone)]
enum Prepared {
    Fn { zn: Complex64 },
    Gx { x: f64 },
    Sinc { excess: f64 },
    Kernels { scaled: Vec<Complex64>, thetas: Vec<Complex64> },
    Profile,
}

/// A test function bound to a model.
#[derive(Debug, Clone)]
pub struct TestFunction<'a> {
    kind: TestKind,
    model: &'a HermiteBiehlerModel,
    prepared: Prepared,
}

fn exprel(w: Complex64) -> Complex64 {
    if w.norm() < 1e-8 {
        1.0 + w * 0.5
    } else {
        cexpm1(w) / w
    }
}

impl<'a> TestFunction<'a> {
    pub fn new(model: &'a HermiteBiehlerModel, kind: TestKind) -> Result<Self> {
        let prepared = match &kind {
            TestKind::Fn { index } => {
                let zn = model.family().zero(*index).ok_or(Error::InvalidIndex(*index))?;
                if let ZeroFamily::FiniteList(_) = model.family() {
                } else if index.unsigned_abs() as usize > model.truncation().n_max {
                    return Err(Error::InvalidIndex(*index));
                }
                Prepared::Fn { zn }
            }
            TestKind::Gx { x } => {
                if !x.is_finite() {
                    return Err(Error::InvalidParameter(format!("g_x needs a finite x, got {x}")));
                }
                Prepared::Gx { x: *x }
            }
            TestKind::Sinc { shifts, coeffs } => {
                let ZeroFamily::PwExponential { a } = model.family() else {
                    return Err(Error::InvalidParameter("sinc combinations need a Paley–Wiener model".into()));
                };
                if *a < PI * (1.0 - 1e-12) {
                    return Err(Error::InvalidParameter(format!("sinc is not in PW_{a}")));
                }
                if shifts.len() != coeffs.len() {
                    return Err(Error::InvalidParameter("shifts and coefficients differ in length".into()));
                }
                Prepared::Sinc { excess: a - PI }
            }
            TestKind::Kernels { nodes, coeffs } | TestKind::UnitKernels { nodes, coeffs } => {
                let unit = matches!(kind, TestKind::UnitKernels { .. });
                if nodes.len() != coeffs.len() {
                    return Err(Error::InvalidParameter("nodes and coefficients differ in length".into()));
                }
                let mut scaled = Vec::with_capacity(nodes.len());
                let mut thetas = Vec::with_capacity(nodes.len());
                for (w, c) in nodes.iter().zip(coeffs) {
                    if w.im < 0.0 {
                        return Err(Error::InvalidParameter(format!("kernel node {w} below the axis")));
                    }
                    let (lm, arg) = model.eval_e(*w)?;
                    scaled.push(c * Complex64::new(if unit { 0.0 } else { lm }, -arg).exp());
                    thetas.push(model.theta(*w)?);
                }
                Prepared::Kernels { scaled, thetas }
            }
            TestKind::ModulusProfile => Prepared::Profile,
        };
        Ok(TestFunction { kind, model, prepared })
    }

    pub fn kind(&self) -> &TestKind {
        &self.kind
    }

    pub fn model(&self) -> &'a HermiteBiehlerModel {
        self.model
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, TestKind::ModulusProfile)
    }

    /// Real points near which the function varies fastest.
    pub fn focus(&self) -> Vec<f64> {
        match &self.kind {
            TestKind::Fn { .. } => match self.prepared {
                Prepared::Fn { zn } => vec![zn.re],
                _ => unreachable!(),
            },
            TestKind::Gx { x } => vec![*x],
            TestKind::Sinc { shifts, .. } => shifts.clone(),
            TestKind::Kernels { nodes, .. } | TestKind::UnitKernels { nodes, .. } => nodes.iter().map(|w| w.re).collect(),
            TestKind::ModulusProfile => vec![0.0],
        }
    }

    /// Like [`focus`](Self::focus), keeping the height of kernel nodes and zeros.
    pub fn focus_points(&self) -> Vec<Complex64> {
        match (&self.kind, &self.prepared) {
            (TestKind::Fn { .. }, Prepared::Fn { zn }) => vec![*zn],
            (TestKind::Kernels { nodes, .. } | TestKind::UnitKernels { nodes, .. }, _) => nodes.clone(),
            _ => self.focus().into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// `F(z)/E(z)` for `Im z >= 0`.
    pub fn ratio(&self, z: Complex64) -> Result<Complex64> {
        if z.im < 0.0 {
            return Err(Error::InvalidParameter(format!("ratio F/E is evaluated on the upper half-plane, got {z}")));
        }
        let k = KernelEval::new(self.model);
        match (&self.kind, &self.prepared) {
            (TestKind::Fn { .. }, Prepared::Fn { zn }) => Ok(zn.im.sqrt() / (z - zn.conj())),
            (TestKind::Gx { .. }, Prepared::Gx { x }) => k.k_small(Complex64::new(*x, 0.0), z),
            (TestKind::Sinc { shifts, coeffs }, Prepared::Sinc { excess }) => {
                Ok(sinc_ratio(shifts, coeffs, *excess, z))
            }
            (TestKind::Kernels { nodes, .. } | TestKind::UnitKernels { nodes, .. }, Prepared::Kernels { scaled, .. }) => {
                let mut s = Complex64::new(0.0, 0.0);
                for (w, c) in nodes.iter().zip(scaled) {
                    s += c * k.k_small(*w, z)?;
                }
                Ok(s)
            }
            (TestKind::ModulusProfile, _) => {
                Err(Error::InvalidParameter("the modulus profile has no complex values".into()))
            }
            _ => unreachable!(),
        }
    }

    /// `|F/E|` on the closed upper half-plane and `|F/E♯|` below it.
    pub fn abs_ratio(&self, z: Complex64) -> Result<f64> {
        if let TestKind::ModulusProfile = self.kind {
            let ax = z.re.abs();
            return Ok(1.0 / ((ax + 1.0).sqrt() * (ax + 2.0).ln()));
        }
        if z.im >= 0.0 {
            return Ok(self.ratio(z)?.norm());
        }
        let k = KernelEval::new(self.model);
        match (&self.kind, &self.prepared) {
            (TestKind::Fn { .. }, Prepared::Fn { zn }) => {
                let la = self.model.log_abs_theta(z.conj())?;
                Ok(zn.im.sqrt() / (z - zn.conj()).norm() * la.exp())
            }
            (TestKind::Gx { .. }, Prepared::Gx { x }) => {
                let xc = Complex64::new(*x, 0.0);
                // |Θ(x)| = 1, and only the modulus is needed.
                Ok(k.k_small_over_theta(xc, Complex64::new(1.0, 0.0), z)?.norm())
            }
            (TestKind::Sinc { shifts, coeffs }, Prepared::Sinc { excess }) => {
                let cc: Vec<Complex64> = coeffs.iter().map(|c| c.conj()).collect();
                Ok(sinc_ratio(shifts, &cc, *excess, z.conj()).norm())
            }
            (TestKind::Kernels { nodes, .. } | TestKind::UnitKernels { nodes, .. }, Prepared::Kernels { scaled, thetas }) => {
                let mut s = Complex64::new(0.0, 0.0);
                for ((w, c), t) in nodes.iter().zip(scaled).zip(thetas) {
                    s += c * k.k_small_over_theta(*w, *t, z)?;
                }
                Ok(s.norm())
            }
            _ => unreachable!(),
        }
    }
}

/// `Σ c_j sinc(z - s_j) e^{iaz}` with `a = π + excess`, bounded on the upper half-plane.
fn sinc_ratio(shifts: &[f64], coeffs: &[Complex64], excess: f64, z: Complex64) -> Complex64 {
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut s = Complex64::new(0.0, 0.0);
    for (sh, c) in shifts.iter().zip(coeffs) {
        let u = z - sh;
        s += c * Complex64::new(0.0, PI * sh).exp() * exprel(two_pi_i * u);
    }
    s * (Complex64::new(0.0, excess) * z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::Truncation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kernel_diagonal_values() {
        let pw = HermiteBiehlerModel::paley_wiener(1.0).unwrap();
        let k = KernelEval::new(&pw);
        let v = k.k_small(c(0.0, 1.0), c(0.0, 1.0)).unwrap();
        assert_relative_eq!(v.re, (1.0 - (-4.0f64).exp()) / (4.0 * PI), max_relative = 1e-13);
        assert!(v.im.abs() < 1e-15);
        assert_relative_eq!(k.knorm2(c(0.0, 1.0)).unwrap(), v.re, max_relative = 1e-13);
        let b = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let k = KernelEval::new(&b);
        assert_relative_eq!(k.k_small(c(0.0, 0.0), c(0.0, 0.0)).unwrap().re, 1.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(k.knorm2(c(0.0, 0.0)).unwrap(), 1.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn kernel_at_zero_of_theta() {
        let b = HermiteBiehlerModel::finite(vec![c(0.5, 1.0), c(-2.0, 0.3)], 0.0).unwrap();
        let k = KernelEval::new(&b);
        let w = c(0.5, 1.0);
        for z in [c(1.0, 2.0), c(-3.0, 0.0), c(0.2, -0.4)] {
            let expect = I_2PI / (z - w.conj());
            assert!((k.k_small(w, z).unwrap() - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn big_kernel_identities() {
        let pw = HermiteBiehlerModel::paley_wiener(PI).unwrap();
        let k = KernelEval::new(&pw);
        assert_relative_eq!(k.k_big(c(0.7, 0.0), c(0.7, 0.0)).unwrap().re, 1.0, max_relative = 1e-13);
        let b = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let k = KernelEval::new(&b);
        assert_relative_eq!(k.k_big(c(0.0, 0.0), c(0.0, 0.0)).unwrap().re, 1.0 / PI, max_relative = 1e-13);
    }

    #[test]
    fn near_diagonal_is_continuous() {
        let b = HermiteBiehlerModel::finite(vec![c(0.0, 1.0), c(1.0, 0.2)], 0.5).unwrap();
        let k = KernelEval::new(&b);
        let w = c(0.3, 0.4);
        let at = k.k_small(w, w.conj()).unwrap();
        let near = k.k_small(w, w.conj() + c(1e-9, 1e-9)).unwrap();
        assert!((at - near).norm() < 1e-7 * at.norm());
    }

    #[test]
    fn lower_half_plane_ratios_match_direct_formula() {
        let zs = vec![c(0.0, 1.0), c(1.5, 0.5), c(-2.0, 2.0)];
        let m = HermiteBiehlerModel::finite(zs.clone(), 0.3).unwrap();
        let e = |z: Complex64| {
            let (l, a) = m.eval_e(z).unwrap();
            Complex64::new(l, a).exp()
        };
        let e_sharp = |z: Complex64| e(z.conj()).conj();
        let z = c(0.4, -0.7);
        let k = KernelEval::new(&m);
        for kind in [
            TestKind::Fn { index: 1 },
            TestKind::Gx { x: 0.3 },
            TestKind::Kernels { nodes: vec![c(0.0, 0.5), c(1.0, 0.0)], coeffs: vec![c(1.0, 0.5), c(-0.3, 0.0)] },
        ] {
            let f = TestFunction::new(&m, kind.clone()).unwrap();
            let direct = match &kind {
                TestKind::Fn { index } => {
                    let zn = zs[*index as usize];
                    e(z) * zn.im.sqrt() / (z - zn.conj())
                }
                TestKind::Gx { x } => e(z) * k.k_small(c(*x, 0.0), z).unwrap(),
                TestKind::Kernels { nodes, coeffs } => {
                    nodes.iter().zip(coeffs).map(|(w, cc)| cc * k.k_big(*w, z).unwrap()).sum()
                }
                _ => unreachable!(),
            };
            let want = (direct / e_sharp(z)).norm();
            assert_relative_eq!(f.abs_ratio(z).unwrap(), want, max_relative = 1e-11);
            let up = c(0.4, 0.7);
            let direct_up = match &kind {
                TestKind::Fn { index } => {
                    let zn = zs[*index as usize];
                    zn.im.sqrt() / (up - zn.conj())
                }
                TestKind::Gx { x } => k.k_small(c(*x, 0.0), up).unwrap(),
                TestKind::Kernels { nodes, coeffs } => {
                    nodes.iter().zip(coeffs).map(|(w, cc)| cc * k.k_big(*w, up).unwrap()).sum::<Complex64>() / e(up)
                }
                _ => unreachable!(),
            };
            assert!((f.ratio(up).unwrap() - direct_up).norm() < 1e-11 * direct_up.norm());
        }
    }

    #[test]
    fn unit_kernels_rescale_by_abs_e() {
        let m = HermiteBiehlerModel::paley_wiener(2.0).unwrap();
        let w = c(0.7, 1.5);
        let plain = TestFunction::new(&m, TestKind::Kernels { nodes: vec![w], coeffs: vec![c(1.0, -0.5)] }).unwrap();
        let unit = TestFunction::new(&m, TestKind::UnitKernels { nodes: vec![w], coeffs: vec![c(1.0, -0.5)] }).unwrap();
        let scale = m.eval_e(w).unwrap().0.exp();
        for z in [c(0.0, 0.0), c(-2.0, 0.3), c(1.0, -0.4)] {
            assert_relative_eq!(unit.abs_ratio(z).unwrap() * scale, plain.abs_ratio(z).unwrap(), max_relative = 1e-12);
        }
        // |E(100)| underflows on the power family; the unit form stays finite.
        let p = HermiteBiehlerModel::power(0.75, Truncation::default()).unwrap();
        let f = TestFunction::new(&p, TestKind::UnitKernels { nodes: vec![c(100.0, 0.0)], coeffs: vec![c(1.0, 0.0)] }).unwrap();
        let v = f.abs_ratio(c(100.5, 0.0)).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn sinc_ratio_matches_definition() {
        let pw = HermiteBiehlerModel::paley_wiener(PI).unwrap();
        let f = TestFunction::new(
            &pw,
            TestKind::Sinc { shifts: vec![0.0, 2.0], coeffs: vec![c(1.0, 0.0), c(0.5, -0.2)] },
        )
        .unwrap();
        let sinc = |u: Complex64| (u * PI).sin() / (u * PI);
        for z in [c(0.3, 0.2), c(2.0, 0.0), c(-1.1, 3.0)] {
            let val = sinc(z) + c(0.5, -0.2) * if z == c(2.0, 0.0) { c(1.0, 0.0) } else { sinc(z - 2.0) };
            let want = val * (c(0.0, PI) * z).exp();
            assert!((f.ratio(z).unwrap() - want).norm() < 1e-13);
            let zl = z.conj();
            let val_l = sinc(zl) + c(0.5, -0.2) * if zl == c(2.0, 0.0) { c(1.0, 0.0) } else { sinc(zl - 2.0) };
            let want_l = (val_l * (c(0.0, -PI) * zl).exp()).norm();
            assert_relative_eq!(f.abs_ratio(zl).unwrap(), want_l, max_relative = 1e-12);
        }
    }

    #[test]
    fn f_zero_of_single_factor_is_constant() {
        let b = HermiteBiehlerModel::finite(vec![c(0.0, 1.0)], 0.0).unwrap();
        let f = TestFunction::new(&b, TestKind::Fn { index: 0 }).unwrap();
        assert!(TestFunction::new(&b, TestKind::Fn { index: 3 }).is_err());
        let (l, a) = b.eval_e(c(5.0, 0.0)).unwrap();
        assert_relative_eq!((f.ratio(c(5.0, 0.0)).unwrap() * Complex64::new(l, a).exp()).norm(), 1.0, max_relative = 1e-14);
    }
}
