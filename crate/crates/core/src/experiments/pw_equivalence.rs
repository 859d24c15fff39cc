use super::{random_kernels, rng, spread, Baselines, ExperimentConfig, Report};
use crate::error::Result;
use crate::quadrature::{area_norm2, line_norm2, Tolerance};
use crate::{Complex64, HermiteBiehlerModel, TestFunction, TestKind, WeightField};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    function: String,
    line_norm2: f64,
    area_norm2: f64,
    ratio: f64,
    area_norm2_half_tol: f64,
    ratio_half_tol: f64,
}

const SCALE: f64 = 3.7;

pub(super) fn run(cfg: &ExperimentConfig, _baselines: &Baselines) -> Result<Report> {
    let c = &cfg.pw_equivalence;
    let model = match &cfg.model {
        Some(m) => m.build()?,
        None => HermiteBiehlerModel::paley_wiener(c.a)?,
    };
    if !matches!(model.family(), crate::ZeroFamily::PwExponential { .. }) {
        return Err(crate::Error::Config("pw_equivalence needs a Paley-Wiener model".into()));
    }
    let mut rng = rng(cfg.seed);
    let one = Complex64::new(1.0, 0.0);
    let mut roster = vec![
        ("sinc".to_string(), TestKind::Sinc { shifts: vec![0.0], coeffs: vec![one] }),
        ("scaled_sinc".to_string(), TestKind::Sinc { shifts: vec![0.0], coeffs: vec![one * SCALE] }),
    ];
    for j in 0..c.sinc_combinations {
        let shifts = (0..c.terms).map(|_| rng.random_range(c.shift_range[0]..c.shift_range[1])).collect();
        let coeffs = (0..c.terms).map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0)).collect();
        roster.push((format!("sinc_{j}"), TestKind::Sinc { shifts, coeffs }));
    }
    for j in 0..c.kernel_combinations {
        roster.push((format!("kernels_{j}"), random_kernels(&mut rng, c.terms, c.node_box)));
    }

    let w = WeightField::w0(&model);
    let mut rows = Vec::with_capacity(roster.len());
    for (name, kind) in roster {
        let f = TestFunction::new(&model, kind)?;
        let line = line_norm2(&f, Tolerance::rel(0.1 * c.tolerance))?.value;
        let area = area_norm2(&f, &w, Tolerance::rel(c.tolerance))?.value;
        let area_half = area_norm2(&f, &w, Tolerance::rel(0.5 * c.tolerance))?.value;
        rows.push(Row { function: name, line_norm2: line, area_norm2: area, ratio: area / line, area_norm2_half_tol: area_half, ratio_half_tol: area_half / line });
    }

    let mut report = Report::new("pw_equivalence");
    let label = model.label();
    let params = format!("W0, {} functions, tol {:e}", rows.len(), c.tolerance);
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let ratios_half: Vec<f64> = rows.iter().map(|r| r.ratio_half_tol).collect();
    let (s, sh) = (spread(&ratios), spread(&ratios_half));
    report.measured.insert("ratio_spread".into(), s);
    report.at_most(&label, &params, "ratio_spread", s, c.max_spread);
    report.at_most(&label, &params, "spread_drift_under_half_tol", (s / sh).max(sh / s), c.max_drift);
    let homogeneity = (rows[1].ratio / rows[0].ratio - 1.0).abs();
    report.at_most(&label, &params, "scaled_sinc_ratio_change", homogeneity, 10.0 * c.tolerance);
    report.table("ratios", &rows)?;
    Ok(report)
}
