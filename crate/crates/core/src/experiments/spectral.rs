use super::{random_kernels, rng, spread, Baselines, ExperimentConfig, Report};
use crate::error::{Error, Result};
use crate::quadrature::{area_norm2, line_norm2, Tolerance};
use crate::weights::{SeriesCheck, SpectralData};
use crate::{Complex64, HermiteBiehlerModel, TestFunction, WeightField};
use serde::Serialize;

#[derive(Serialize)]
struct NormRow {
    function: String,
    line_norm2: f64,
    coefficient_norm2: f64,
    coefficient_tail: f64,
    norm_rel_error: f64,
    reconstruction_error: f64,
    /// Same without the tail extrapolation.
    truncated_error: f64,
    area_norm2: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct NodeRow {
    node: f64,
    mass: f64,
    radius: f64,
}

pub(super) fn run(cfg: &ExperimentConfig, baselines: &Baselines) -> Result<Report> {
    let c = &cfg.spectral;
    let model = match &cfg.model {
        Some(m) => m.build()?,
        None => HermiteBiehlerModel::paley_wiener(c.a)?,
    };
    if model.family().is_infinite() {
        return Err(Error::Config("the spectral experiment needs a Paley-Wiener or finite model".into()));
    }
    let data = SpectralData::build(&model, (-c.node_range, c.node_range), c.rotation)?;
    let mut report = Report::new("spectral");
    let label = model.label();
    let params = format!("rotation {}, nodes on [-{r}, {r}]", c.rotation, r = c.node_range);

    // On PW_a with α = 0 the nodes are (n + 1/2)π/a.
    if let (crate::ZeroFamily::PwExponential { a }, true) = (model.family(), c.rotation == 0.0) {
        let h = std::f64::consts::PI / a;
        let err = data.nodes().iter().map(|t| (t / h - 0.5 - (t / h - 0.5).round()).abs() * h).fold(0.0, f64::max);
        report.at_most(&label, &params, "max_node_error", err, c.node_tol);
        let expected = (2.0 * (c.node_range / h - 0.5).floor() + 2.0) as f64;
        report.at_most(&label, &params, "node_count_mismatch", (data.nodes().len() as f64 - expected).abs(), 0.0);
    }
    let radii = data.radii_condition();
    report.at_least(&label, &params, "radii_condition_certified", f64::from(u8::from(radii.is_certified())), 1.0);

    let weight_data = SpectralData::build(&model, (-c.weight_range, c.weight_range), c.rotation)?;
    let w = WeightField::spec(&model, weight_data);
    let mut rng = rng(cfg.seed);
    let mut grid = Vec::new();
    let n = (c.grid_radius / c.grid_step).round() as i64;
    for i in -n..=n {
        for j in 0..=n {
            let z = Complex64::new(i as f64 * c.grid_step, j as f64 * c.grid_step);
            if z.norm() <= c.grid_radius {
                grid.push(z);
            }
        }
    }
    let mut rows = Vec::new();
    for k in 0..c.roster {
        let f = TestFunction::new(&model, random_kernels(&mut rng, c.terms, c.node_box))?;
        let samples = data.nodes().iter().map(|t| f.ratio(Complex64::new(*t, 0.0))).collect::<Result<Vec<_>>>()?;
        let mut sup = 0.0f64;
        let mut diff = 0.0f64;
        let mut plain = 0.0f64;
        for z in &grid {
            let exact = f.ratio(*z)?;
            sup = sup.max(exact.norm());
            diff = diff.max((data.reconstruct_extrapolated(&model, &samples, *z)? - exact).norm());
            plain = plain.max((data.reconstruct(&model, &samples, *z)? - exact).norm());
        }
        let terms: Vec<f64> = data.coefficients(&samples).iter().map(|c| std::f64::consts::PI * c.norm_sqr()).collect();
        let series = SeriesCheck::from_terms(data.nodes(), &terms);
        let coeff = series.total() + series.tail.unwrap_or(0.0);
        let line = line_norm2(&f, Tolerance::rel(1e-8))?.value;
        let area = area_norm2(&f, &w, Tolerance::rel(c.tolerance))?.value;
        rows.push(NormRow {
            function: format!("kernels_{k}"),
            line_norm2: line,
            coefficient_norm2: coeff,
            coefficient_tail: series.tail.unwrap_or(f64::NAN),
            norm_rel_error: (coeff / line - 1.0).abs(),
            reconstruction_error: diff / sup,
            truncated_error: plain / sup,
            area_norm2: area,
            ratio: area / line,
        });
    }
    let worst = |g: fn(&NormRow) -> f64| rows.iter().map(g).fold(0.0, f64::max);
    report.at_most(&label, &params, "max_reconstruction_error", worst(|r| r.reconstruction_error), c.reconstruction_tol);
    report.at_most(&label, &params, "max_norm_identity_error", worst(|r| r.norm_rel_error), c.norm_tol);
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    report.against_baseline(baselines, &label, &format!("w_spec on [-{r}, {r}]", r = c.weight_range), "w_spec_ratio_spread", spread(&ratios));
    report.table("roster", &rows)?;
    let nodes: Vec<NodeRow> = data
        .nodes()
        .iter()
        .zip(data.masses())
        .zip(data.radii())
        .map(|((t, m), r)| NodeRow { node: *t, mass: *m, radius: *r })
        .collect();
    report.table("nodes", &nodes)?;
    Ok(report)
}
