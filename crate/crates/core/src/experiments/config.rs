//! Experiment configuration files.
//!
//! ```toml
//! experiment = "main_thm"
//! seed = 7
//!
//! [main_thm]
//! xs = [10.0, 100.0, 1000.0]
//! weights = ["w_main", "w_one1"]
//! ```
//!
//! Every section is optional and falls back to its defaults. A top-level
//! `[model]` table replaces the experiment's primary model where it has one.

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub pw_equivalence: PwEquivalenceConfig,
    #[serde(default)]
    pub thm1_necessity: NecessityConfig,
    #[serde(default)]
    pub main_thm: MainThmConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub ls_example: LsExampleConfig,
    #[serde(default)]
    pub w2_counterexample: W2Config,
    #[serde(default)]
    pub lev_bounds: LevBoundsConfig,
    #[serde(default)]
    pub carleson: CarlesonConfig,
}

fn default_seed() -> u64 {
    20_240_601
}

impl ExperimentConfig {
    /// Defaults for `name`.
    pub fn named(name: &str) -> Result<Self> {
        if super::describe(name).is_none() {
            return Err(Error::Config(format!("unknown experiment '{name}'")));
        }
        Ok(ExperimentConfig {
            experiment: name.to_string(),
            seed: default_seed(),
            model: None,
            pw_equivalence: Default::default(),
            thm1_necessity: Default::default(),
            main_thm: Default::default(),
            spectral: Default::default(),
            ls_example: Default::default(),
            w2_counterexample: Default::default(),
            lev_bounds: Default::default(),
            carleson: Default::default(),
        })
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        if super::describe(&cfg.experiment).is_none() {
            return Err(Error::Config(format!("unknown experiment '{}'", cfg.experiment)));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// Roster of sinc and kernel combinations on `PW_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PwEquivalenceConfig {
    pub a: f64,
    pub sinc_combinations: usize,
    pub kernel_combinations: usize,
    /// Terms per combination.
    pub terms: usize,
    /// Sinc shifts are uniform in this interval.
    pub shift_range: [f64; 2],
    /// Kernel nodes are uniform in `[x0, x1] x [y0, y1]`.
    pub node_box: [f64; 4],
    pub tolerance: f64,
    pub max_spread: f64,
    /// Allowed factor between the spreads at `tolerance` and `tolerance / 2`.
    pub max_drift: f64,
}

impl Default for PwEquivalenceConfig {
    fn default() -> Self {
        PwEquivalenceConfig {
            a: PI,
            sinc_combinations: 10,
            kernel_combinations: 10,
            terms: 3,
            shift_range: [-5.0, 5.0],
            node_box: [-5.0, 5.0, 0.0, 2.0],
            tolerance: 1e-4,
            max_spread: 10.0,
            max_drift: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NecessityConfig {
    pub alpha: f64,
    pub xs: Vec<f64>,
    /// Type of the Paley–Wiener control model.
    pub control_a: f64,
    pub tolerance: f64,
    pub max_slope: f64,
    pub control_max_abs_slope: f64,
}

impl Default for NecessityConfig {
    fn default() -> Self {
        NecessityConfig {
            alpha: 0.75,
            xs: vec![10.0, 30.0, 100.0, 300.0, 1000.0],
            control_a: PI,
            tolerance: 1e-4,
            max_slope: -1.0 / 3.0 + 0.15,
            control_max_abs_slope: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MainThmConfig {
    pub alpha: f64,
    pub eps: f64,
    pub delta: f64,
    pub xs: Vec<f64>,
    /// Weights to test; the first one carries the checks.
    pub weights: Vec<String>,
    /// Half-width of the level-set window traced around each test point.
    pub window: f64,
    pub window_height: f64,
    pub tolerance: f64,
    pub max_abs_spearman: f64,
}

impl Default for MainThmConfig {
    fn default() -> Self {
        MainThmConfig {
            alpha: 0.75,
            eps: 0.1,
            delta: 0.5,
            xs: vec![10.0, 30.0, 100.0, 300.0, 1000.0],
            weights: vec!["w_main".into()],
            window: 50.0,
            window_height: 2.0,
            tolerance: 1e-3,
            max_abs_spearman: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub a: f64,
    /// Nodes are computed on `[-node_range, node_range]`.
    pub node_range: f64,
    /// The spectral weight is built on `[-weight_range, weight_range]`.
    pub weight_range: f64,
    pub rotation: f64,
    pub roster: usize,
    pub terms: usize,
    pub node_box: [f64; 4],
    /// Reconstruction grid: `|z| <= grid_radius` with this step.
    pub grid_radius: f64,
    pub grid_step: f64,
    pub tolerance: f64,
    pub node_tol: f64,
    pub reconstruction_tol: f64,
    pub norm_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            a: PI,
            node_range: 1000.0,
            weight_range: 200.0,
            rotation: 0.0,
            roster: 8,
            terms: 3,
            node_box: [-3.0, 3.0, 0.0, 1.0],
            grid_radius: 5.0,
            grid_step: 0.5,
            tolerance: 1e-4,
            node_tol: 1e-10,
            reconstruction_tol: 1e-4,
            norm_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LsExampleConfig {
    pub deltas: Vec<f64>,
    /// `x = k + 1/2` for `k` in this inclusive range.
    pub k_range: [u32; 2],
    /// Deltas whose `sup q / inf q` must stay below `max_band`.
    pub band_deltas: Vec<f64>,
    pub max_band: f64,
    /// Deltas whose `q(k_hi + 1/2) / q(growth_from + 1/2)` must reach `min_growth`.
    pub growth_deltas: Vec<f64>,
    pub growth_from: u32,
    pub min_growth: f64,
    /// Deltas whose `log A` slope must be within `slope_tol` of `2 delta`.
    pub slope_deltas: Vec<f64>,
    pub slope_tol: f64,
    /// Factors of the product defining `A` taken explicitly.
    pub product_terms: usize,
}

impl Default for LsExampleConfig {
    fn default() -> Self {
        LsExampleConfig {
            deltas: vec![0.3, 0.5, 0.6],
            k_range: [5, 100],
            band_deltas: vec![0.3, 0.5],
            max_band: 20.0,
            growth_deltas: vec![0.6],
            growth_from: 10,
            min_growth: 2.0,
            slope_deltas: vec![0.3, 0.5, 0.6],
            slope_tol: 0.1,
            product_terms: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct W2Config {
    pub alphas: Vec<f64>,
    /// `η = 10^{-m}` for `m = 1..=decades`.
    pub decades: u32,
    /// Minimal `(J(η_{m+1}) - J(η_m)) / J(η_m)` for the divergent weight. The
    /// saturated part of the kernel norm alone forces about `7e-3` at `m = 5`
    /// for `α = 0.75`.
    pub floor: f64,
    /// Largest ratio of successive increments: `1/m` decay gives about 1.25,
    /// a convergent integral about 10.
    pub max_increment_decay: f64,
    /// Largest last relative increment allowed for the convergent control.
    pub control_ceiling: f64,
    pub tolerance: f64,
}

impl Default for W2Config {
    fn default() -> Self {
        W2Config { alphas: vec![0.75, 0.6], decades: 5, floor: 5e-3, max_increment_decay: 3.0, control_ceiling: 1e-3, tolerance: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevBoundsConfig {
    pub eps: f64,
    pub delta: f64,
    pub products: usize,
    pub max_zeros: usize,
    /// Zeros are uniform in `[x0, x1] x [y0, y1]`.
    pub zero_box: [f64; 4],
    /// Sample grid `[x0, x1] x [y0, y1]` and its step; points inside `Ω_δ` are dropped.
    pub grid: [f64; 4],
    pub grid_step: f64,
    /// Half-width of the sampled stretch of the real line for the named families.
    pub family_range: f64,
    pub family_samples: usize,
    pub oracle_tol: f64,
    pub control_tol: f64,
    pub max_one_component_band: f64,
}

impl Default for LevBoundsConfig {
    fn default() -> Self {
        LevBoundsConfig {
            eps: 0.1,
            delta: 0.5,
            products: 200,
            max_zeros: 30,
            zero_box: [-10.0, 10.0, 0.1, 5.0],
            grid: [-12.0, 12.0, 0.0, 6.0],
            grid_step: 1.5,
            family_range: 100.0,
            family_samples: 21,
            oracle_tol: 1e-4,
            control_tol: 1e-2,
            max_one_component_band: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlesonConfig {
    pub alpha: f64,
    pub ls_delta: f64,
    pub eps: f64,
    pub delta: f64,
    /// Dyadic squares over intervals inside `[lo, hi]`.
    pub range: [f64; 2],
    pub min_len: f64,
    pub max_len: f64,
    pub tolerance: f64,
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        CarlesonConfig { alpha: 0.75, ls_delta: 0.3, eps: 0.1, delta: 0.5, range: [-32.0, 32.0], min_len: 0.5, max_len: 8.0, tolerance: 1e-3 }
    }
}
