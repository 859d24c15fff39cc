use super::{ExperimentConfig, Report};
use crate::error::{Error, Result};
use crate::kernels::KernelEval;
use crate::quadrature::{integrate, integrate_semi_infinite, Tolerance};
use crate::{Complex64, HermiteBiehlerModel, TestFunction, TestKind, Truncation};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Serialize)]
struct Row {
    model: String,
    weight: String,
    eta: f64,
    partial_integral: f64,
    increment: f64,
    relative_increment: f64,
    /// `m` times the increment over `[10^{-m-1}, 10^{-m}]`; flat for `1/m` decay.
    scaled_increment: f64,
}

/// `log|Θ|` below which `1 - |Θ|²` is 1 in double precision.
const SATURATED: f64 = -20.0;

/// `∫_X^∞ dx / ((x + 1) log²(x + 2))`: the part `1/((x + 2) log²(x + 2))`
/// integrates to `1/log(X + 2)`, the rest decays like `x^{-2}`.
fn profile_tail(x0: f64, tol: f64) -> f64 {
    let rest = |x: f64| 1.0 / ((x + 1.0) * (x + 2.0) * (x + 2.0).ln().powi(2));
    1.0 / (x0 + 2.0).ln() + integrate_semi_infinite(&rest, x0, 1.0, 1.0 + x0, Tolerance::rel(tol)).value
}

/// `∫_ℝ |f(x + iy)|² ‖k_{x+iy}‖² dx` for the modulus profile `f`.
fn line_integral_w2(model: &HermiteBiehlerModel, profile: &TestFunction, y: f64, tol: f64) -> Result<f64> {
    let k = KernelEval::new(model);
    let sides: &[f64] = if model.family().is_symmetric() { &[1.0] } else { &[1.0, -1.0] };
    let mut total = 0.0;
    for &s in sides {
        // Past X the kernel norm is 1/(4πy) to working precision.
        let mut x = 1.0f64;
        while model.log_abs_theta(Complex64::new(s * x, y))? > SATURATED {
            x *= 2.0;
            if x > 1e300 {
                return Err(Error::NonConvergent(format!("|Θ(x + i{y})| does not decay")));
            }
        }
        let guard = std::sync::Mutex::new(None);
        // u = log(1 + x), so |f|² dx = du / log²(x + 2).
        let g = |u: f64| {
            let x = u.exp_m1();
            let z = Complex64::new(s * x, y);
            match (k.knorm2(z), profile.abs_ratio(z)) {
                (Ok(kn), Ok(p)) => kn * p * p * (1.0 + x),
                (Err(e), _) | (_, Err(e)) => {
                    guard.lock().unwrap().get_or_insert(e);
                    0.0
                }
            }
        };
        let q = integrate(&g, &[0.0, x.ln_1p()], 2.0, Tolerance::rel(tol));
        if let Some(e) = guard.into_inner().unwrap() {
            return Err(e);
        }
        total += q.value + profile_tail(x, tol) / (4.0 * PI * y);
    }
    Ok(if sides.len() == 1 { 2.0 * total } else { total })
}

/// Partial integrals `J(10^{-m}) = ∫_{10^{-m}}^1 I(y) dy`, `m = 1..=decades`,
/// each decade integrated in `log y`.
fn partial_integrals(decades: u32, tol: f64, line: impl Fn(f64) -> Result<f64> + Sync) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut j = 0.0;
    for m in 1..=decades {
        let (a, b) = (-f64::from(m) * 10f64.ln(), -f64::from(m - 1) * 10f64.ln());
        let guard = std::sync::Mutex::new(None);
        let g = |s: f64| {
            let y = s.exp();
            line(y).map(|v| v * y).unwrap_or_else(|e| {
                guard.lock().unwrap().get_or_insert(e);
                0.0
            })
        };
        let q = integrate(&g, &[a, b], 1.0, Tolerance::rel(tol));
        if let Some(e) = guard.into_inner().unwrap() {
            return Err(e);
        }
        j += q.value;
        out.push((10f64.powi(-(m as i32)), j));
    }
    Ok(out)
}

fn rows(model: &HermiteBiehlerModel, weight: &str, js: &[(f64, f64)]) -> Vec<Row> {
    let mut out = Vec::new();
    for (m, &(eta, j)) in js.iter().enumerate() {
        let prev = if m == 0 { 0.0 } else { js[m - 1].1 };
        let inc = j - prev;
        out.push(Row {
            model: model.label(),
            weight: weight.into(),
            eta,
            partial_integral: j,
            increment: inc,
            relative_increment: if m == 0 { f64::NAN } else { inc / prev },
            scaled_increment: inc * m as f64,
        });
    }
    out
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let c = &cfg.w2_counterexample;
    let mut report = Report::new("w2_counterexample");
    let mut table = Vec::new();
    let models = match &cfg.model {
        Some(m) => vec![m.build()?],
        None => c.alphas.iter().map(|&a| HermiteBiehlerModel::power(a, Truncation::default())).collect::<Result<_>>()?,
    };
    for model in &models {
        let profile = TestFunction::new(model, TestKind::ModulusProfile)?;
        let params = format!("eta down to 1e-{}", c.decades);
        let js = partial_integrals(c.decades, c.tolerance, |y| line_integral_w2(model, &profile, y, 0.1 * c.tolerance))?;
        let r = rows(model, "w2", &js);
        let min_rel = r.iter().skip(1).map(|r| r.relative_increment).fold(f64::INFINITY, f64::min);
        report.at_least(&model.label(), &params, "w2_min_relative_increment", min_rel, c.floor);
        let n = r.len();
        let decay = if n >= 3 { r[n - 2].increment / r[n - 1].increment } else { f64::NAN };
        report.at_most(&model.label(), &params, "w2_last_increment_decay", decay, c.max_increment_decay);

        // W0: the y-profile is (1 + y)^{-2} times the profile's line integral.
        let mass = 2.0 * profile_tail(0.0, 0.1 * c.tolerance);
        let control = partial_integrals(c.decades, c.tolerance, |y| Ok(mass / (1.0 + y).powi(2)))?;
        let rc = rows(model, "w0", &control);
        report.at_most(&model.label(), &params, "w0_last_relative_increment", rc.last().map_or(f64::NAN, |r| r.relative_increment), c.control_ceiling);
        table.extend(r);
        table.extend(rc);
    }
    report.table("partial_integrals", &table)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_tail_matches_quadrature() {
        let p = |x: f64| 1.0 / ((x + 1.0) * (x + 2.0).ln().powi(2));
        let head = integrate(&p, &[3.0, 1e4], 10.0, Tolerance::rel(1e-12)).value;
        let got = profile_tail(3.0, 1e-10) - profile_tail(1e4, 1e-10);
        assert!((got - head).abs() < 1e-8 * head, "{got} {head}");
    }
}
