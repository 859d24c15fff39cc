//! Acceptance criteria, one line each. Criteria run in sequence so that the
//! wall-clock limits are measured on an otherwise idle process.

use dbfock::experiments::{self, Baselines, ExperimentConfig, Report};
use dbfock::levelset::{LevelSetGeometry, Rect};
use dbfock::quadrature::{inner_product_line, line_norm2, Tolerance};
use dbfock::weights::{CoverParams, IntervalCover};
use dbfock::{Complex64, HermiteBiehlerModel, KernelEval, TestFunction, TestKind, Truncation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Outcome = Result<(bool, String), String>;

struct Gate {
    failed: Vec<u32>,
}

impl Gate {
    fn criterion(&mut self, no: u32, title: &str, limit_s: u64, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let r = f();
        let took = t.elapsed();
        let in_time = took <= Duration::from_secs(limit_s);
        let (ok, detail) = match r {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {no:>2} {} {title} ({:.1} s of {limit_s} s{}) {detail}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if in_time { "" } else { ", over time" }
        );
        if !ok {
            self.failed.push(no);
        }
    }
}

fn experiment(cfg: &ExperimentConfig) -> Result<Report, String> {
    experiments::run(cfg, &Baselines::committed()).map_err(|e| e.to_string())
}

fn show(c: &experiments::Check) -> String {
    let rel = match c.relation {
        experiments::Relation::AtMost => "<=",
        experiments::Relation::AtLeast => ">=",
    };
    format!("{} [{}] = {:.4e} {rel} {:.4e}", c.statistic, c.model, c.value, c.threshold)
}

/// Passes when every listed statistic is present and all its checks passed.
fn checks(report: &Report, stats: &[&str]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in stats {
        let found: Vec<_> = report.checks.iter().filter(|c| c.statistic == *s).collect();
        if found.is_empty() {
            ok = false;
            parts.push(format!("{s} missing"));
        }
        for c in found {
            ok &= c.passed;
            parts.push(show(c));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn all_checks(report: &Report) -> Outcome {
    Ok((!report.checks.is_empty() && report.passed(), report.checks.iter().map(show).collect::<Vec<_>>().join("; ")))
}

fn random_zeros(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-10.0..10.0), rng.random_range(0.05..5.0))).collect()
}

/// Telescoping identity for partial products and the single-factor identity.
fn blaschke_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_factor: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=50);
        let zeros = random_zeros(&mut rng, n);
        let model = HermiteBiehlerModel::finite(zeros.clone(), 0.0).map_err(|e| e.to_string())?;
        let one = HermiteBiehlerModel::finite(vec![zeros[0]], 0.0).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let z = Complex64::new(rng.random_range(-15.0..15.0), rng.random_range(1e-3..8.0));
            let lhs = model.one_minus_abs_theta_sq(z).map_err(|e| e.to_string())? / z.im;
            let mut partial = 1.0f64;
            let mut rhs = 0.0;
            for zn in &zeros {
                let w = 4.0 * zn.im / (z - zn.conj()).norm_sqr();
                rhs += partial * partial * w;
                partial *= (z - zn).norm() / (z - zn.conj()).norm();
            }
            worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
            // Single factor: (1 - |b|²)/y against 4 y_n / |z - z̄_n|².
            let zn = zeros[0];
            let single = one.one_minus_abs_theta_sq(z).map_err(|e| e.to_string())? / z.im;
            let w = 4.0 * zn.im / (z - zn.conj()).norm_sqr();
            worst_factor = worst_factor.max((single - w).abs() / w);
        }
    }
    Ok((worst <= 1e-10 && worst_factor <= 1e-12, format!("telescoping {worst:.2e}, single factor {worst_factor:.2e}")))
}

fn kernel_suite() -> Outcome {
    let tol = Tolerance::rel(1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rep: f64 = 0.0;
    for _ in 0..6 {
        let n = rng.random_range(1..=20);
        let model = HermiteBiehlerModel::finite(random_zeros(&mut rng, n), rng.random_range(0.0..2.0)).map_err(|e| e.to_string())?;
        let k = KernelEval::new(&model);
        for _ in 0..3 {
            let v = Complex64::new(rng.random_range(-5.0..5.0), if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..2.0) });
            let w = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(0.0..2.0));
            let one = vec![Complex64::new(1.0, 0.0)];
            let fv = TestFunction::new(&model, TestKind::Kernels { nodes: vec![v], coeffs: one.clone() }).map_err(|e| e.to_string())?;
            let fw = TestFunction::new(&model, TestKind::Kernels { nodes: vec![w], coeffs: one }).map_err(|e| e.to_string())?;
            let (ip, _) = inner_product_line(&fv, &fw, tol).map_err(|e| e.to_string())?;
            let want = k.k_big(v, w).map_err(|e| e.to_string())?;
            worst_rep = worst_rep.max((ip - want).norm() / want.norm());
        }
    }
    let mut worst_norm: f64 = 0.0;
    for a in [1.0, PI, 5.0] {
        let model = HermiteBiehlerModel::paley_wiener(a).map_err(|e| e.to_string())?;
        for x in [-3.3, 0.0, 7.25] {
            let f = TestFunction::new(&model, TestKind::Kernels { nodes: vec![Complex64::new(x, 0.0)], coeffs: vec![Complex64::new(1.0, 0.0)] })
                .map_err(|e| e.to_string())?;
            let got = line_norm2(&f, tol).map_err(|e| e.to_string())?.value;
            let le = model.eval_e(Complex64::new(x, 0.0)).map_err(|e| e.to_string())?.0;
            let want = (2.0 * le).exp() * model.phase_derivative(x).map_err(|e| e.to_string())? / PI;
            worst_norm = worst_norm.max((got / want - 1.0).abs());
        }
    }
    Ok((worst_rep <= 1e-3 && worst_norm <= 1e-6, format!("reproducing {worst_rep:.2e}, ||K_x||^2 {worst_norm:.2e}")))
}

fn phase_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=30);
        let model = HermiteBiehlerModel::finite(random_zeros(&mut rng, n), rng.random_range(0.0..2.0)).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let x: f64 = rng.random_range(-12.0..12.0);
            let arg = |t: f64| model.eval_e(Complex64::new(t, 0.0)).map(|e| e.1);
            let (ap, am) = (arg(x + h).map_err(|e| e.to_string())?, arg(x - h).map_err(|e| e.to_string())?);
            let d = (ap - am + PI).rem_euclid(2.0 * PI) - PI;
            // E(x) = |E(x)| e^{-iφ(x)}.
            let fd = -d / (2.0 * h);
            let p = model.phase_derivative(x).map_err(|e| e.to_string())?;
            worst = worst.max((fd / p - 1.0).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.2e}")))
}

fn cover_invariants() -> Outcome {
    let models = [
        HermiteBiehlerModel::paley_wiener(PI),
        HermiteBiehlerModel::power(0.75, Truncation::default()),
        HermiteBiehlerModel::ls(0.3, Truncation::default()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for m in models {
        let m = m.map_err(|e| e.to_string())?;
        let g = LevelSetGeometry::build(&m, 0.1, 0.5, Rect::new(-21.0, 21.0, 0.0, 3.0)).map_err(|e| e.to_string())?;
        let cover = IntervalCover::build(&g, (-20.0, 20.0), CoverParams::default()).map_err(|e| e.to_string())?;
        let c = cover.check(&g).map_err(|e| e.to_string())?;
        ok &= c.is_ok();
        parts.push(format!("{}: {} intervals, {} violations", m.label(), cover.intervals().len(), c.band.len() + c.neighbour.len() + c.containment.len() + c.gaps.len()));
    }
    Ok((ok, parts.join("; ")))
}

#[test]
fn acceptance_criteria() {
    let mut gate = Gate { failed: Vec::new() };
    let named = |n: &str| ExperimentConfig::named(n).unwrap();

    gate.criterion(1, "Blaschke identities", 10, blaschke_identities);
    gate.criterion(2, "kernel suite", 60, kernel_suite);
    gate.criterion(3, "phase consistency", 10, phase_consistency);
    gate.criterion(4, "distance bounds", 300, || {
        checks(&experiment(&named("lev_bounds"))?, &["max_oracle_rel_error", "random_product_ratio_spread"])
    });
    gate.criterion(5, "Paley-Wiener sufficiency", 300, || {
        checks(&experiment(&named("pw_equivalence"))?, &["ratio_spread", "spread_drift_under_half_tol"])
    });
    gate.criterion(6, "necessity slope", 600, || {
        checks(
            &experiment(&named("thm1_necessity"))?,
            &["slope_log_ratio_vs_log_phase_derivative", "control_abs_slope_log_ratio_vs_log_x"],
        )
    });
    gate.criterion(7, "level-set weight on the power family", 900, || {
        checks(&experiment(&named("main_thm"))?, &["abs_spearman_x_ratio", "w_main_ratio_spread"])
    });
    gate.criterion(8, "Whitney cover invariants", 60, cover_invariants);
    gate.criterion(9, "Carleson boxes", 300, || {
        checks(&experiment(&named("carleson"))?, &["power_max_box_ratio", "ls_max_box_ratio"])
    });
    gate.criterion(10, "Clark nodes and sampling", 120, || {
        checks(&experiment(&named("spectral"))?, &["max_node_error", "max_reconstruction_error", "max_norm_identity_error"])
    });
    gate.criterion(11, "shifted-integer example", 300, || {
        let mut cfg = named("ls_example");
        // Growth across the whole range k = 5..100.
        cfg.ls_example.growth_from = cfg.ls_example.k_range[0];
        cfg.ls_example.slope_deltas = vec![0.3, 0.5, 0.6];
        all_checks(&experiment(&cfg)?)
    });
    gate.criterion(12, "W2 divergence", 120, || {
        checks(
            &experiment(&named("w2_counterexample"))?,
            &["w2_min_relative_increment", "w2_last_increment_decay", "w0_last_relative_increment"],
        )
    });

    assert!(gate.failed.is_empty(), "failed criteria: {:?}", gate.failed);
}
