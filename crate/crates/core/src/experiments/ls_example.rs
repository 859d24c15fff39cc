use super::{spread, ExperimentConfig, Report};
use crate::error::Result;
use crate::numeric::ls_slope;
use crate::{HermiteBiehlerModel, Truncation};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    delta: f64,
    k: u32,
    x: f64,
    phase_derivative: f64,
    log_abs_e: f64,
    q: f64,
    log_a: f64,
}

/// `log A(k) = Σ_{n >= 1, n != k} log|1 - k²(2nδ - δ²) / ((n - δ)²(n² - k²))|`,
/// the ratio of `|E|` to its unperturbed counterpart at `x = k`, summed up to
/// `n = terms` and closed with the tail `-δ k² / terms²`.
pub(crate) fn log_a(delta: f64, k: u32, terms: usize) -> f64 {
    let k2 = f64::from(k).powi(2);
    let mut s = 0.0;
    for n in 1..=terms {
        if n == k as usize {
            continue;
        }
        let n = n as f64;
        s += (-k2 * (2.0 * n * delta - delta * delta) / ((n - delta).powi(2) * (n * n - k2))).ln_1p();
    }
    s - delta * k2 / (terms as f64).powi(2)
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let c = &cfg.ls_example;
    let mut report = Report::new("ls_example");
    let mut rows = Vec::new();
    for &delta in &c.deltas {
        let model = HermiteBiehlerModel::ls(delta, Truncation::default())?;
        let mut qs = Vec::new();
        let mut lk = Vec::new();
        let mut la = Vec::new();
        for k in c.k_range[0]..=c.k_range[1] {
            let x = f64::from(k) + 0.5;
            let p = model.phase_derivative(x)?;
            let (le, _) = model.eval_e(crate::Complex64::new(x, 0.0))?;
            let q = p * (2.0 * le).exp();
            let a = log_a(delta, k, c.product_terms);
            rows.push(Row { delta, k, x, phase_derivative: p, log_abs_e: le, q, log_a: a });
            qs.push(q);
            lk.push(f64::from(k).ln());
            la.push(a);
        }
        let label = model.label();
        let params = format!("x = k + 1/2, k in [{}, {}]", c.k_range[0], c.k_range[1]);
        if c.band_deltas.contains(&delta) {
            report.at_most(&label, &params, &format!("q_band_delta_{delta}"), spread(&qs), c.max_band);
        }
        if c.growth_deltas.contains(&delta) {
            let i = (c.growth_from - c.k_range[0]) as usize;
            report.at_least(&label, &params, &format!("q_growth_delta_{delta}"), qs[qs.len() - 1] / qs[i], c.min_growth);
        }
        if c.slope_deltas.contains(&delta) {
            let s = ls_slope(&lk, &la);
            report.at_most(&label, &params, &format!("log_a_slope_error_delta_{delta}"), (s - 2.0 * delta).abs(), c.slope_tol);
        }
    }
    report.table("q", &rows)?;
    Ok(report)
}
