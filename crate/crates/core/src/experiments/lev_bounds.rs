use super::{rng, spread, Baselines, ExperimentConfig, Report};
use crate::error::Result;
use crate::kernels::KernelEval;
use crate::levelset::{d_eps, verify_lev_bounds, DistanceReport, LevStats};
use crate::{Complex64, HermiteBiehlerModel, Truncation};
use rand::Rng;
use serde::Serialize;

#[derive(Serialize)]
struct SampleRow {
    source: String,
    x: f64,
    y: f64,
    d0: f64,
    d_eps: f64,
    bound: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct HistRow {
    source: String,
    log2_bin: i32,
    count: usize,
}

#[derive(Serialize)]
struct OracleRow {
    case: String,
    eps: f64,
    x: f64,
    computed: f64,
    expected: f64,
    rel_error: f64,
}

fn sample_rows<'r>(source: &str, reports: &'r [DistanceReport]) -> impl Iterator<Item = SampleRow> + 'r {
    let source = source.to_string();
    reports.iter().map(move |r| SampleRow { source: source.clone(), x: r.z.re, y: r.z.im, d0: r.d0, d_eps: r.d_eps, bound: r.bound, ratio: r.ratio })
}

pub(super) fn run(cfg: &ExperimentConfig, baselines: &Baselines) -> Result<Report> {
    let c = &cfg.lev_bounds;
    let mut report = Report::new("lev_bounds");
    let params = format!("eps {}, delta {}", c.eps, c.delta);

    // Closed forms: the sublevel set of a single factor at i is a disc, and on
    // PW_a it is the half-plane y > log(1/eps)/(2a).
    let mut oracles = Vec::new();
    let single = HermiteBiehlerModel::finite(vec![Complex64::new(0.0, 1.0)], 0.0)?;
    for eps in [c.eps, 0.5] {
        let got = d_eps(&single, Complex64::new(0.0, 0.0), eps)?.value;
        let want = (1.0 - eps) / (1.0 + eps);
        oracles.push(OracleRow { case: "single_factor".into(), eps, x: 0.0, computed: got, expected: want, rel_error: (got / want - 1.0).abs() });
    }
    for a in [1.0, std::f64::consts::PI] {
        let pw = HermiteBiehlerModel::paley_wiener(a)?;
        for x in [-3.7, 0.0, 12.25] {
            let got = d_eps(&pw, Complex64::new(x, 0.0), c.eps)?.value;
            let want = (1.0 / c.eps).ln() / (2.0 * a);
            oracles.push(OracleRow { case: format!("pw_a={a}"), eps: c.eps, x, computed: got, expected: want, rel_error: (got / want - 1.0).abs() });
        }
    }
    let worst = oracles.iter().map(|o| o.rel_error).fold(0.0, f64::max);
    report.at_most("single factor, PW", &params, "max_oracle_rel_error", worst, c.oracle_tol);

    // Random finite products over a grid, points inside Ω_δ dropped.
    let mut rng = rng(cfg.seed);
    let g = c.grid;
    let nx = ((g[1] - g[0]) / c.grid_step).round() as usize;
    let ny = ((g[3] - g[2]) / c.grid_step).round() as usize;
    let mut all = Vec::new();
    let mut samples = Vec::new();
    for p in 0..c.products {
        let n = rng.random_range(1..=c.max_zeros);
        let zeros: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(c.zero_box[0]..c.zero_box[1]), rng.random_range(c.zero_box[2]..c.zero_box[3])))
            .collect();
        let model = HermiteBiehlerModel::finite(zeros, 0.0)?;
        let mut pts = Vec::new();
        for i in 0..=nx {
            for j in 0..=ny {
                let z = Complex64::new(g[0] + i as f64 * c.grid_step, g[2] + j as f64 * c.grid_step);
                if model.log_abs_theta(z)? >= c.delta.ln() {
                    pts.push(z);
                }
            }
        }
        let stats = verify_lev_bounds(&model, &pts, c.eps, c.delta)?;
        samples.extend(sample_rows(&format!("product_{p}"), &stats.reports));
        all.extend(stats.reports);
    }
    let products = LevStats::from_reports(all);
    report.against_baseline(baselines, "random finite products", &params, "random_product_ratio_spread", products.spread());
    let mut hist: Vec<HistRow> = products.histogram.iter().map(|&(b, n)| HistRow { source: "random_products".into(), log2_bin: b, count: n }).collect();

    // Named families on the real line.
    let xs: Vec<Complex64> = (0..c.family_samples)
        .map(|i| Complex64::new(-c.family_range + 2.0 * c.family_range * i as f64 / (c.family_samples - 1).max(1) as f64, 0.0))
        .collect();
    let pw = HermiteBiehlerModel::paley_wiener(1.0)?;
    let stats = verify_lev_bounds(&pw, &xs, c.eps, c.delta)?;
    report.at_most(&pw.label(), &params, "pw_ratio_variation", stats.spread() - 1.0, c.control_tol);
    samples.extend(sample_rows("pw_a=1", &stats.reports));

    let power = HermiteBiehlerModel::power(0.75, Truncation::default())?;
    let stats = verify_lev_bounds(&power, &xs, c.eps, c.delta)?;
    let k = KernelEval::new(&power);
    let dk = stats.reports.iter().map(|r| Ok(r.d_eps * k.knorm2(r.z)?)).collect::<Result<Vec<f64>>>()?;
    report.at_most(&power.label(), &params, "one_component_d_eps_knorm2_band", spread(&dk), c.max_one_component_band);
    hist.extend(stats.histogram.iter().map(|&(b, n)| HistRow { source: "power_0.75".into(), log2_bin: b, count: n }));
    samples.extend(sample_rows("power_0.75", &stats.reports));

    report.table("oracles", &oracles)?;
    report.table("samples", &samples)?;
    report.table("histogram", &hist)?;
    Ok(report)
}
