//! Hierarchical far-field summation of Blaschke factors.
//!
//! Zeros are sorted by real part and grouped into a binary tree. For a group with
//! real center `c` and radius `r`, and `rho = r / (z - c)`,
//!
//! ```text
//! sum_n log b_n(z) = -i * sum_k s_k rho^k / k,   s_k = sum_n 2 Im(((z_n - c) / r)^k)
//! ```
//!
//! which converges geometrically once `|z - c| >= SEP * r`. Every coefficient is
//! real, so the real part of a far-field term is proportional to `Im rho^k` and
//! vanishes on the real axis, as it should.

use crate::error::{Error, Result};
use crate::numeric::clog1p;
use num_complex::Complex64;
use rayon::prelude::*;

const ORDER: usize = 32;
const LEAF: usize = 16;
const SEP: f64 = 2.5;
/// `ln(1e-17)`: series terms below this relative size are dropped.
const LN_CUTOFF: f64 = -39.1;
/// Below this many zeros everything is summed directly.
const DIRECT_LIMIT: usize = 256;

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    center: f64,
    radius: f64,
    children: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub(crate) struct ZeroTree {
    zeros: Vec<Complex64>,
    nodes: Vec<Node>,
    coeffs: Vec<f64>,
}

/// Direct contribution of one factor to `log b(z)`, with the real part computed
/// without cancellation near `|b| = 1`.
#[inline]
pub(crate) fn log_factor(z: Complex64, zn: Complex64) -> Result<Complex64> {
    let d2 = z - zn.conj();
    let m2 = d2.norm_sqr();
    if m2 == 0.0 {
        return Err(Error::PoleHit(z));
    }
    let d1 = z - zn;
    let re = 0.5 * (-4.0 * z.im * zn.im / m2).ln_1p();
    let im = (d1 * d2.conj()).arg();
    Ok(Complex64::new(re, im))
}

#[inline]
fn log_abs_factor(z: Complex64, zn: Complex64) -> Result<f64> {
    let dx = z.re - zn.re;
    let dy = z.im + zn.im;
    let m2 = dx * dx + dy * dy;
    if m2 == 0.0 {
        return Err(Error::PoleHit(z));
    }
    Ok(0.5 * (-4.0 * z.im * zn.im / m2).ln_1p())
}

#[inline]
fn dlog_factor(z: Complex64, zn: Complex64) -> Result<Complex64> {
    let den = (z - zn) * (z - zn.conj());
    if den.norm_sqr() == 0.0 {
        return Err(Error::PoleHit(z));
    }
    Ok(Complex64::new(0.0, 2.0 * zn.im) / den)
}

/// `log b(z) - log b(zeta)` without cancellation when `z` is close to `zeta`.
#[inline]
fn ldiff_factor(z: Complex64, zeta: Complex64, zn: Complex64) -> Result<Complex64> {
    let den = (z - zn.conj()) * (zeta - zn);
    if den.norm_sqr() == 0.0 {
        if z == zn.conj() {
            return Err(Error::PoleHit(z));
        }
        return Err(Error::PoleHit(zeta));
    }
    Ok(clog1p((z - zeta) * Complex64::new(0.0, 2.0 * zn.im) / den))
}

impl ZeroTree {
    pub fn new(mut zeros: Vec<Complex64>) -> Self {
        zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut nodes = Vec::new();
        if zeros.len() > DIRECT_LIMIT {
            build(&zeros, 0, zeros.len(), &mut nodes);
        }
        let coeffs: Vec<f64> = nodes
            .par_iter()
            .flat_map_iter(|node| node_coeffs(&zeros[node.start..node.end], node.center, node.radius))
            .collect();
        ZeroTree { zeros, nodes, coeffs }
    }

    /// Zeros sorted by real part.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// Coefficients of a node, truncated to the terms that matter at `|rho|`.
    fn coeffs_of(&self, idx: usize, rho: f64) -> &[f64] {
        let k = if rho <= 0.0 { 1 } else { ((LN_CUTOFF / rho.ln()).ceil() as usize).clamp(1, ORDER) };
        &self.coeffs[idx * ORDER..idx * ORDER + k]
    }

    fn far(&self, node: &Node, z: Complex64) -> bool {
        let dx = z.re - node.center;
        (dx * dx + z.im * z.im).sqrt() >= SEP * node.radius
    }

    /// Visits the tree, calling `far_fn(node_index, node)` for far groups and
    /// `near_fn(range)` for leaves that must be summed directly.
    fn walk<F, N>(&self, is_far: impl Fn(&Node) -> bool, mut far_fn: F, mut near_fn: N) -> Result<()>
    where
        F: FnMut(usize, &Node),
        N: FnMut(&[Complex64]) -> Result<()>,
    {
        if self.nodes.is_empty() {
            return near_fn(&self.zeros);
        }
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if is_far(node) {
                far_fn(i, node);
            } else if let Some((l, r)) = node.children {
                stack.push(r);
                stack.push(l);
            } else {
                near_fn(&self.zeros[node.start..node.end])?;
            }
        }
        Ok(())
    }

    /// `sum_n log b_n(z)`; the imaginary part is only defined modulo 2π.
    pub fn log_blaschke(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut near = Complex64::new(0.0, 0.0);
        self.walk(
            |node| self.far(node, z),
            |i, node| {
                let rho = node.radius / (z - node.center);
                let mut p = rho;
                let mut s = Complex64::new(0.0, 0.0);
                for (k, c) in self.coeffs_of(i, rho.norm()).iter().enumerate() {
                    s += p * (c / (k + 1) as f64);
                    p *= rho;
                }
                acc += Complex64::new(s.im, -s.re);
            },
            |zs| {
                for &zn in zs {
                    near += log_factor(z, zn)?;
                }
                Ok(())
            },
        )?;
        Ok(acc + near)
    }

    pub fn log_abs_blaschke(&self, z: Complex64) -> Result<f64> {
        let mut acc = 0.0;
        let mut near = 0.0;
        self.walk(
            |node| self.far(node, z),
            |i, node| {
                let rho = node.radius / (z - node.center);
                let mut p = rho;
                let mut s = 0.0;
                for (k, c) in self.coeffs_of(i, rho.norm()).iter().enumerate() {
                    s += p.im * (c / (k + 1) as f64);
                    p *= rho;
                }
                acc += s;
            },
            |zs| {
                for &zn in zs {
                    near += log_abs_factor(z, zn)?;
                }
                Ok(())
            },
        )?;
        Ok(acc + near)
    }

    /// `d/dz sum_n log b_n(z)`.
    pub fn dlog_blaschke(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut near = Complex64::new(0.0, 0.0);
        self.walk(
            |node| self.far(node, z),
            |i, node| {
                let inv = 1.0 / (z - node.center);
                let rho = inv * node.radius;
                let mut p = rho;
                let mut s = Complex64::new(0.0, 0.0);
                for c in self.coeffs_of(i, rho.norm()) {
                    s += p * *c;
                    p *= rho;
                }
                acc += Complex64::new(-s.im, s.re) * inv;
            },
            |zs| {
                for &zn in zs {
                    near += dlog_factor(z, zn)?;
                }
                Ok(())
            },
        )?;
        Ok(acc + near)
    }

    /// `sum_n (log b_n(z) - log b_n(zeta))`, accurate for `z` close to `zeta`.
    pub fn ldiff_blaschke(&self, z: Complex64, zeta: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut near = Complex64::new(0.0, 0.0);
        self.walk(
            |node| self.far(node, z) && self.far(node, zeta),
            |i, node| {
                let iz = 1.0 / (z - node.center);
                let iw = 1.0 / (zeta - node.center);
                let rz = iz * node.radius;
                let rw = iw * node.radius;
                let rho = if rz.norm() > rw.norm() { rz } else { rw };
                let step = -(z - zeta) * iz * iw * node.radius;
                let mut dk = Complex64::new(0.0, 0.0);
                let mut pw = Complex64::new(1.0, 0.0);
                let mut s = Complex64::new(0.0, 0.0);
                for (k, c) in self.coeffs_of(i, rho.norm()).iter().enumerate() {
                    dk = rz * dk + step * pw;
                    pw *= rw;
                    s += dk * (c / (k + 1) as f64);
                }
                acc += Complex64::new(s.im, -s.re);
            },
            |zs| {
                for &zn in zs {
                    near += ldiff_factor(z, zeta, zn)?;
                }
                Ok(())
            },
        )?;
        Ok(acc + near)
    }
}

fn build(zeros: &[Complex64], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let lo = zeros[start].re;
    let hi = zeros[end - 1].re;
    let center = 0.5 * (lo + hi);
    let radius = zeros[start..end]
        .iter()
        .map(|z| Complex64::new(z.re - center, z.im).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let idx = nodes.len();
    nodes.push(Node { start, end, center, radius, children: None });
    if end - start > LEAF {
        let mid = start + (end - start) / 2;
        let l = build(zeros, start, mid, nodes);
        let r = build(zeros, mid, end, nodes);
        nodes[idx].children = Some((l, r));
    }
    idx
}

fn node_coeffs(zeros: &[Complex64], center: f64, radius: f64) -> Vec<f64> {
    let mut s = vec![0.0; ORDER];
    for z in zeros {
        let w = Complex64::new(z.re - center, z.im) / radius;
        let mut p = w;
        for sk in s.iter_mut() {
            *sk += 2.0 * p.im;
            p *= w;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_zeros(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-200.0..200.0), rng.random_range(0.01..3.0)))
            .collect()
    }

    fn direct(zs: &[Complex64], z: Complex64) -> Complex64 {
        zs.iter().map(|&zn| ((z - zn) / (z - zn.conj())).ln()).sum()
    }

    #[test]
    fn far_field_matches_direct_sum() {
        let zs = random_zeros(3000, 1);
        let tree = ZeroTree::new(zs.clone());
        for z in [
            Complex64::new(0.3, 0.2),
            Complex64::new(150.0, 40.0),
            Complex64::new(-500.0, 1.0),
            Complex64::new(10.0, -2.0),
        ] {
            let a = tree.log_blaschke(z).unwrap();
            let b = direct(&zs, z);
            assert!((a.re - b.re).abs() < 1e-9 * (1.0 + b.re.abs()), "{a} {b}");
            let dphase = (a.im - b.im) / std::f64::consts::TAU;
            assert!((dphase - dphase.round()).abs() < 1e-9);
            assert!((tree.log_abs_blaschke(z).unwrap() - a.re).abs() < 1e-12 * (1.0 + a.re.abs()));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let zs = random_zeros(2000, 2);
        let tree = ZeroTree::new(zs);
        let z = Complex64::new(37.1, 0.7);
        let h = 1e-5;
        let fd = (tree.log_blaschke(z + h).unwrap() - tree.log_blaschke(z - h).unwrap()) / (2.0 * h);
        let d = tree.dlog_blaschke(z).unwrap();
        assert!((fd - d).norm() < 1e-6 * d.norm().max(1.0), "{fd} {d}");
    }

    #[test]
    fn difference_is_consistent() {
        let zs = random_zeros(2000, 3);
        let tree = ZeroTree::new(zs);
        let z = Complex64::new(-12.0, 0.5);
        let w = Complex64::new(30.0, -1.5);
        let a = tree.ldiff_blaschke(z, w).unwrap();
        let b = tree.log_blaschke(z).unwrap() - tree.log_blaschke(w).unwrap();
        assert!((a.exp() - b.exp()).norm() < 1e-9 * b.exp().norm());
        let near = z + Complex64::new(1e-9, 0.0);
        let small = tree.ldiff_blaschke(near, z).unwrap();
        let slope = tree.dlog_blaschke(z).unwrap() * 1e-9;
        assert!((small - slope).norm() < 1e-6 * slope.norm());
    }

    #[test]
    fn real_part_vanishes_on_real_axis() {
        let zs = random_zeros(5000, 4);
        let tree = ZeroTree::new(zs);
        for x in [-100.0, 0.0, 3.3, 1e4] {
            assert_eq!(tree.log_abs_blaschke(Complex64::new(x, 0.0)).unwrap(), 0.0);
        }
    }
}
