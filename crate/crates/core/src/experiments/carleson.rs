use super::{Baselines, ExperimentConfig, Report};
use crate::error::Result;
use crate::levelset::{LevelSetGeometry, Rect};
use crate::quadrature::{carleson_test, dyadic_squares, Measure, Tolerance};
use crate::{HermiteBiehlerModel, Truncation};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    model: String,
    a: f64,
    b: f64,
    mu: f64,
    ratio: f64,
    abs_error: f64,
}

pub(super) fn run(cfg: &ExperimentConfig, baselines: &Baselines) -> Result<Report> {
    let c = &cfg.carleson;
    let mut report = Report::new("carleson");
    let models = match &cfg.model {
        Some(m) => vec![("model", m.build()?)],
        None => vec![
            ("power", HermiteBiehlerModel::power(c.alpha, Truncation::default())?),
            ("ls", HermiteBiehlerModel::ls(c.ls_delta, Truncation::default())?),
        ],
    };
    let squares = dyadic_squares((c.range[0], c.range[1]), c.min_len, c.max_len);
    let mut rows = Vec::new();
    for (key, model) in &models {
        let window = Rect::new(c.range[0] - 1.0, c.range[1] + 1.0, 0.0, c.max_len + 1.0);
        let g = LevelSetGeometry::build(model, c.eps, c.delta, window)?;
        let r = carleson_test(&Measure::DistanceInverse(&g), &g, &squares, Tolerance::rel(c.tolerance))?;
        let params = format!("{}, {} of {} squares meet the eps set", r.measure, r.squares.len(), squares.len());
        report.against_baseline(baselines, &model.label(), &params, &format!("{key}_max_box_ratio"), r.max_ratio);
        rows.extend(r.squares.iter().map(|s| Row { model: model.label(), a: s.a, b: s.b, mu: s.mu, ratio: s.ratio, abs_error: s.abs_error }));
    }
    report.table("squares", &rows)?;
    Ok(report)
}
