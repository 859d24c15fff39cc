use super::{ExperimentConfig, Report};
use crate::error::Result;
use crate::numeric::ls_slope;
use crate::quadrature::{area_norm2, line_norm2, Tolerance};
use crate::{HermiteBiehlerModel, TestFunction, TestKind, Truncation, WeightField};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    model: String,
    x: f64,
    phase_derivative: f64,
    line_norm2: f64,
    area_norm2: f64,
    ratio: f64,
}

fn ratios(model: &HermiteBiehlerModel, xs: &[f64], tol: f64) -> Result<Vec<Row>> {
    let w = WeightField::w0(model);
    xs.iter()
        .map(|&x| {
            let f = TestFunction::new(model, TestKind::Gx { x })?;
            let line = line_norm2(&f, Tolerance::rel(0.1 * tol))?.value;
            let area = area_norm2(&f, &w, Tolerance::rel(tol))?.value;
            Ok(Row { model: model.label(), x, phase_derivative: model.phase_derivative(x)?, line_norm2: line, area_norm2: area, ratio: area / line })
        })
        .collect()
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let c = &cfg.thm1_necessity;
    let model = match &cfg.model {
        Some(m) => m.build()?,
        None => HermiteBiehlerModel::power(c.alpha, Truncation::default())?,
    };
    let control = HermiteBiehlerModel::paley_wiener(c.control_a)?;
    let rows = ratios(&model, &c.xs, c.tolerance)?;
    let control_rows = ratios(&control, &c.xs, c.tolerance)?;

    let mut report = Report::new("thm1_necessity");
    let params = format!("g_x, W0, x in {:?}", c.xs);
    let lp: Vec<f64> = rows.iter().map(|r| r.phase_derivative.ln()).collect();
    let lr: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    report.at_most(&model.label(), &params, "slope_log_ratio_vs_log_phase_derivative", ls_slope(&lp, &lr), c.max_slope);
    // φ' is constant on the control, so the slope is taken against log x.
    let lx: Vec<f64> = control_rows.iter().map(|r| r.x.ln()).collect();
    let lrc: Vec<f64> = control_rows.iter().map(|r| r.ratio.ln()).collect();
    report.at_most(&control.label(), &params, "control_abs_slope_log_ratio_vs_log_x", ls_slope(&lx, &lrc).abs(), c.control_max_abs_slope);
    let mut all = rows;
    all.extend(control_rows);
    report.table("ratios", &all)?;
    Ok(report)
}
