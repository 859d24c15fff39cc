use super::{random_kernels, rng, spread, Baselines, ExperimentConfig, Report};
use crate::error::Result;
use crate::levelset::{LevelSetGeometry, Rect};
use crate::numeric::spearman;
use crate::quadrature::{area_norm2, line_norm2, Tolerance};
use crate::weights::{CoverParams, IntervalCover};
use crate::{HermiteBiehlerModel, TestFunction, TestKind, Truncation, WeightField, WeightKind};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    weight: String,
    x: f64,
    function: String,
    line_norm2: f64,
    area_norm2: f64,
    ratio: f64,
}

/// The weight `kind` with its level-set data traced on `window`.
fn weight<'a>(model: &'a HermiteBiehlerModel, kind: WeightKind, eps: f64, delta: f64, window: Rect) -> Result<WeightField<'a>> {
    Ok(match kind {
        WeightKind::W0 => WeightField::w0(model),
        WeightKind::Main => WeightField::main(LevelSetGeometry::build(model, eps, delta, window)?),
        WeightKind::Tilde => {
            let g = LevelSetGeometry::build(model, eps, delta, window)?;
            let cover = IntervalCover::build(&g, (window.x0 + 1.0, window.x1 - 1.0), CoverParams::default())?;
            WeightField::tilde(model, cover)
        }
        WeightKind::One1 => WeightField::one1(model, delta)?,
        WeightKind::One2 => WeightField::one2(model),
        WeightKind::W2 => WeightField::w2(model),
        WeightKind::Spec => {
            return Err(crate::Error::Config("w_spec needs spectral data; use the spectral experiment".into()));
        }
    })
}

pub(super) fn run(cfg: &ExperimentConfig, baselines: &Baselines) -> Result<Report> {
    let c = &cfg.main_thm;
    let model = match &cfg.model {
        Some(m) => m.build()?,
        None => HermiteBiehlerModel::power(c.alpha, Truncation::default())?,
    };
    let mut rng = rng(cfg.seed);
    // One kernel combination near each x, drawn up front so that the roster
    // does not depend on the list of weights.
    let mut roster = Vec::new();
    for &x in &c.xs {
        roster.push((x, "g_x".to_string(), TestKind::Gx { x }));
        roster.push((x, "kernels".to_string(), random_kernels(&mut rng, 2, [x - 2.0, x + 2.0, 0.0, 1.0])));
    }
    let kinds = c.weights.iter().map(|w| WeightKind::from_name(w)).collect::<Result<Vec<_>>>()?;

    let mut lines = Vec::with_capacity(roster.len());
    for (_, _, kind) in &roster {
        let f = TestFunction::new(&model, kind.clone())?;
        lines.push(line_norm2(&f, Tolerance::rel(0.1 * c.tolerance))?.value);
    }

    let mut report = Report::new("main_thm");
    let mut rows = Vec::new();
    for (i, &kind) in kinds.iter().enumerate() {
        let mut xs = Vec::new();
        let mut ratios = Vec::new();
        for ((x, name, tk), line) in roster.iter().zip(&lines) {
            let window = Rect::new(x - c.window, x + c.window, 0.0, c.window_height);
            let w = weight(&model, kind, c.eps, c.delta, window)?;
            let f = TestFunction::new(&model, tk.clone())?;
            let area = area_norm2(&f, &w, Tolerance::rel(c.tolerance))?.value;
            rows.push(Row { weight: kind.name().into(), x: *x, function: name.clone(), line_norm2: *line, area_norm2: area, ratio: area / line });
            xs.push(*x);
            ratios.push(area / line);
        }
        let params = format!("{}, eps {}, delta {}, x in {:?}", kind.name(), c.eps, c.delta, c.xs);
        report.against_baseline(baselines, &model.label(), &params, &format!("{}_ratio_spread", kind.name()), spread(&ratios));
        if i == 0 {
            report.at_most(&model.label(), &params, "abs_spearman_x_ratio", spearman(&xs, &ratios).abs(), c.max_abs_spearman);
        }
    }
    report.table("ratios", &rows)?;
    Ok(report)
}
