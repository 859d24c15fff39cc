//! Named experiments: each turns one qualitative statement into numbers,
//! CSV tables and pass/fail checks.

mod carleson;
mod config;
mod lev_bounds;
mod ls_example;
mod main_thm;
mod necessity;
mod pw_equivalence;
mod spectral;
mod w2;

pub use config::{
    CarlesonConfig, ExperimentConfig, LevBoundsConfig, LsExampleConfig, MainThmConfig, NecessityConfig, PwEquivalenceConfig,
    SpectralConfig, W2Config,
};

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const EXPERIMENTS: [&str; 8] =
    ["pw_equivalence", "thm1_necessity", "main_thm", "spectral", "ls_example", "w2_counterexample", "lev_bounds", "carleson"];

/// One-line description per experiment, for `lab list`.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "pw_equivalence" => "Paley-Wiener roster: area norm in W0 against the line norm",
        "thm1_necessity" => "g_x in W0 on the power family: ratio decay against phi'",
        "main_thm" => "g_x and kernel roster with the level-set weight on the power family",
        "spectral" => "Clark nodes, sampling reconstruction and the spectral weight",
        "ls_example" => "phi'|E|^2 along half-integers for shifted-integer zeros",
        "w2_counterexample" => "partial integrals of the modulus profile against ||k_z||^2",
        "lev_bounds" => "d_eps against min(d_0, 1/||k_z||^2) on random products and named families",
        "carleson" => "box test for d_eps^{-1} dm outside the delta sublevel set",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// A headline statistic compared with its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub experiment: String,
    pub model: String,
    pub parameters: String,
    pub statistic: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

impl Table {
    pub fn new<S: Serialize>(name: &str, rows: &[S]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(Table { name: name.to_string(), csv: String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))? })
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Values that `baseline update` would record, keyed by statistic.
    pub measured: BTreeMap<String, f64>,
}

impl Report {
    fn new(experiment: &str) -> Self {
        Report { experiment: experiment.to_string(), checks: Vec::new(), tables: Vec::new(), measured: BTreeMap::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, statistic: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.statistic == statistic)
    }

    fn push(&mut self, model: &str, parameters: &str, statistic: &str, value: f64, relation: Relation, threshold: f64) {
        let passed = match relation {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        };
        self.checks.push(Check {
            experiment: self.experiment.clone(),
            model: model.to_string(),
            parameters: parameters.to_string(),
            statistic: statistic.to_string(),
            value,
            relation,
            threshold,
            passed,
        });
    }

    fn at_most(&mut self, model: &str, parameters: &str, statistic: &str, value: f64, threshold: f64) {
        self.push(model, parameters, statistic, value, Relation::AtMost, threshold);
    }

    fn at_least(&mut self, model: &str, parameters: &str, statistic: &str, value: f64, threshold: f64) {
        self.push(model, parameters, statistic, value, Relation::AtLeast, threshold);
    }

    /// `value <= slack * baseline`; a missing baseline fails the check.
    fn against_baseline(&mut self, baselines: &Baselines, model: &str, parameters: &str, statistic: &str, value: f64) {
        let threshold = baselines.get(&self.experiment, statistic).map_or(f64::NAN, |b| b * BASELINE_SLACK);
        self.measured.insert(statistic.to_string(), value);
        self.at_most(model, parameters, statistic, value, threshold);
    }

    fn table<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<()> {
        self.tables.push(Table::new(name, rows)?);
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let rel = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            let _ = writeln!(
                s,
                "{} {} [{}; {}] {} = {:.6e} {} {:.6e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.experiment,
                c.model,
                c.parameters,
                c.statistic,
                c.value,
                rel,
                c.threshold
            );
        }
        let _ = writeln!(s, "{}: {}", self.experiment, if self.passed() { "passed" } else { "FAILED" });
        s
    }

    /// Writes every table as `<name>.csv`, plus `summary.csv` and `summary.txt`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            std::fs::write(dir.join(format!("{}.csv", t.name)), &t.csv)?;
        }
        std::fs::write(dir.join("summary.csv"), &Table::new("summary", &self.checks)?.csv)?;
        std::fs::write(dir.join("summary.txt"), self.summary_text())?;
        Ok(())
    }
}

pub const BASELINE_SLACK: f64 = 2.0;

/// Recorded empirical constants, `[experiment] statistic = value`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Baselines(BTreeMap<String, BTreeMap<String, f64>>);

impl Baselines {
    /// The baselines committed with the crate.
    pub fn committed() -> Self {
        Self::from_toml_str(include_str!("../../baselines.toml")).expect("committed baselines parse")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(Baselines(toml::from_str(s)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, experiment: &str, statistic: &str) -> Option<f64> {
        self.0.get(experiment)?.get(statistic).copied()
    }

    pub fn set(&mut self, experiment: &str, statistic: &str, value: f64) {
        self.0.entry(experiment.to_string()).or_default().insert(statistic.to_string(), value);
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&self.0).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

/// Runs the experiment named in `cfg`.
pub fn run(cfg: &ExperimentConfig, baselines: &Baselines) -> Result<Report> {
    // These sweep fixed families and have no single model to replace.
    if cfg.model.is_some() && matches!(cfg.experiment.as_str(), "ls_example" | "lev_bounds") {
        return Err(Error::Config(format!("{} does not take a model", cfg.experiment)));
    }
    match cfg.experiment.as_str() {
        "pw_equivalence" => pw_equivalence::run(cfg, baselines),
        "thm1_necessity" => necessity::run(cfg),
        "main_thm" => main_thm::run(cfg, baselines),
        "spectral" => spectral::run(cfg, baselines),
        "ls_example" => ls_example::run(cfg),
        "w2_counterexample" => w2::run(cfg),
        "lev_bounds" => lev_bounds::run(cfg, baselines),
        "carleson" => carleson::run(cfg, baselines),
        other => Err(Error::Config(format!("unknown experiment '{other}'"))),
    }
}

/// Max over min of positive values.
fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: rand::Rng>(rng: &mut R) -> crate::Complex64 {
    use rand_distr::{Distribution, StandardNormal};
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    crate::Complex64::new(re, im)
}

/// `Σ c_j K_{w_j} / |E(w_j)|` with `w_j` uniform in `[x0, x1] x [y0, y1]` and
/// complex normal `c_j`. Dividing by `|E(w_j)|` keeps the sizes comparable on
/// models where `E` is huge or tiny.
fn random_kernels<R: rand::Rng>(rng: &mut R, terms: usize, b: [f64; 4]) -> crate::TestKind {
    let mut nodes = Vec::with_capacity(terms);
    let mut coeffs = Vec::with_capacity(terms);
    for _ in 0..terms {
        let w = crate::Complex64::new(rng.random_range(b[0]..b[1]), rng.random_range(b[2]..b[3]));
        let c = complex_normal(rng);
        nodes.push(w);
        coeffs.push(c);
    }
    crate::TestKind::UnitKernels { nodes, coeffs }
}
