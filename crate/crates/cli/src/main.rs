use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dbfock::experiments::{self, Baselines, ExperimentConfig, Report};
use dbfock::levelset::{verify_lev_bounds, LevelSetGeometry, Rect};
use dbfock::weights::{CoverParams, IntervalCover, SpectralData};
use dbfock::{HermiteBiehlerModel, ModelConfig, WeightField, WeightKind};
use num_complex::Complex64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Numerical laboratory for de Branges spaces and weighted Fock-type norms.
#[derive(Parser)]
#[command(name = "lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the experiments.
    List,
    /// Run one experiment; exits with status 1 when a check fails.
    Run {
        experiment: String,
        #[command(flatten)]
        inputs: Inputs,
        /// Directory for the CSV tables and the summary.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Baselines file; defaults to the committed one.
        #[arg(long)]
        baselines: Option<PathBuf>,
    },
    /// Maintain recorded baselines.
    Baseline {
        #[command(subcommand)]
        action: BaselineAction,
    },
    /// Level curves, distance raster and distance-bound ratios on a window.
    Levelset {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Interval cover and weight values on a grid.
    Weights {
        #[arg(long)]
        model: PathBuf,
        /// One of W0, W_main, W_tilde, W_one1, W_one2, W2, W_spec.
        #[arg(long, default_value = "W_main")]
        kind: String,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = CoverParams::default().kappa)]
        kappa: f64,
        #[arg(long = "l-max", default_value_t = CoverParams::default().l_max)]
        l_max: f64,
        /// Half-width of the covered range, or of the node range for W_spec.
        #[arg(long = "range", default_value_t = 20.0)]
        r: f64,
        /// Rotation α of the spectral nodes.
        #[arg(long, default_value_t = 0.0)]
        rotation: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BaselineAction {
    /// Run an experiment and store its measured constants.
    Update {
        experiment: String,
        #[command(flatten)]
        inputs: Inputs,
        /// File to update; defaults to the committed baselines of the source tree.
        #[arg(long)]
        baselines: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Inputs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model description (TOML with a `[model]` table); replaces the experiment's model.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct Grid {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Window `x0,x1,y0,y1`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [-10.0, 10.0, 0.0, 3.0])]
    window: Vec<f64>,
    /// Grid step of the rasters.
    #[arg(long, default_value_t = 0.25)]
    step: f64,
}

impl Grid {
    fn rect(&self) -> Rect {
        Rect::new(self.window[0], self.window[1], self.window[2], self.window[3])
    }

    fn points(&self) -> Result<Vec<Complex64>> {
        if self.window.len() != 4 {
            bail!("--window takes x0,x1,y0,y1");
        }
        if !(self.step > 0.0) {
            bail!("--step must be positive");
        }
        let r = self.rect();
        let nx = (r.width() / self.step).round() as usize;
        let ny = (r.height() / self.step).round() as usize;
        let mut pts = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                pts.push(Complex64::new(r.x0 + i as f64 * self.step, r.y0 + j as f64 * self.step));
            }
        }
        Ok(pts)
    }
}

fn committed_baselines_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/baselines.toml")
}

fn load_config(experiment: &str, inputs: &Inputs) -> Result<ExperimentConfig> {
    let mut cfg = match &inputs.config {
        Some(p) => {
            let cfg = ExperimentConfig::from_path(p).with_context(|| format!("reading {}", p.display()))?;
            if cfg.experiment != experiment {
                bail!("{} configures '{}', not '{experiment}'", p.display(), cfg.experiment);
            }
            cfg
        }
        None => ExperimentConfig::named(experiment)?,
    };
    if let Some(p) = &inputs.model {
        cfg.model = Some(ModelConfig::from_path(p).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(cfg)
}

fn load_model(path: &Path) -> Result<HermiteBiehlerModel> {
    Ok(ModelConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?.build()?)
}

fn write_csv<S: serde::Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run(experiment: &str, inputs: &Inputs, out: &Path, baselines: Option<&Path>) -> Result<bool> {
    let cfg = load_config(experiment, inputs)?;
    let baselines = match baselines {
        Some(p) => Baselines::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => Baselines::committed(),
    };
    let report: Report = experiments::run(&cfg, &baselines)?;
    report.write_to(out)?;
    print!("{}", report.summary_text());
    Ok(report.passed())
}

fn update_baseline(experiment: &str, inputs: &Inputs, path: &Path) -> Result<()> {
    let cfg = load_config(experiment, inputs)?;
    let mut baselines = if path.exists() { Baselines::load(path)? } else { Baselines::default() };
    let report = experiments::run(&cfg, &baselines)?;
    if report.measured.is_empty() {
        bail!("'{experiment}' has no baselined statistics");
    }
    for (stat, v) in &report.measured {
        baselines.set(experiment, stat, *v);
        println!("{experiment}.{stat} = {v}");
    }
    baselines.save(path)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct CurveRow {
    level: &'static str,
    x: f64,
    y: f64,
    abs_theta: f64,
}

#[derive(serde::Serialize)]
struct RasterRow {
    x: f64,
    y: f64,
    abs_theta: f64,
    d_eps: f64,
    d_delta: f64,
}

#[derive(serde::Serialize)]
struct RatioRow {
    x: f64,
    y: f64,
    d0: f64,
    d_eps: f64,
    bound: f64,
    ratio: f64,
}

fn levelset(model: &Path, grid: &Grid, out: &Path) -> Result<()> {
    let model = load_model(model)?;
    grid.points()?;
    let g = LevelSetGeometry::build(&model, grid.eps, grid.delta, grid.rect())?;
    std::fs::create_dir_all(out)?;
    let mut curve = Vec::new();
    for (level, c) in [("eps", g.curve_eps()), ("delta", g.curve_delta())] {
        for z in c.samples() {
            curve.push(CurveRow { level, x: z.re, y: z.im, abs_theta: model.log_abs_theta(*z)?.exp() });
        }
    }
    write_csv(&out.join("curve.csv"), curve)?;
    let pts = grid.points()?;
    let raster = pts
        .iter()
        .map(|z| Ok(RasterRow { x: z.re, y: z.im, abs_theta: model.log_abs_theta(*z)?.exp(), d_eps: g.d_eps(*z)?, d_delta: g.d_delta(*z)? }))
        .collect::<Result<Vec<_>>>()?;
    write_csv(&out.join("distance.csv"), raster)?;
    let outside: Vec<Complex64> = pts.into_iter().filter(|z| g.in_omega_delta(*z).map(|b| !b).unwrap_or(false)).collect();
    let stats = verify_lev_bounds(&model, &outside, grid.eps, grid.delta)?;
    write_csv(
        &out.join("ratios.csv"),
        stats.reports.iter().map(|r| RatioRow { x: r.z.re, y: r.z.im, d0: r.d0, d_eps: r.d_eps, bound: r.bound, ratio: r.ratio }),
    )?;
    println!("{} samples outside the delta set; ratio min {:.6e}, max {:.6e}", stats.reports.len(), stats.min, stats.max);
    Ok(())
}

#[derive(serde::Serialize)]
struct WeightRow {
    x: f64,
    y: f64,
    weight: f64,
    relative: f64,
}

#[allow(clippy::too_many_arguments)]
fn weights(model: &Path, kind: &str, grid: &Grid, kappa: f64, l_max: f64, r: f64, rotation: f64, out: &Path) -> Result<()> {
    let model = load_model(model)?;
    grid.points()?;
    let kind = WeightKind::from_name(kind)?;
    std::fs::create_dir_all(out)?;
    let params = CoverParams { kappa, l_max };
    let field = match kind {
        WeightKind::W0 => WeightField::w0(&model),
        WeightKind::Main => WeightField::main(LevelSetGeometry::build(&model, grid.eps, grid.delta, grid.rect())?),
        WeightKind::Tilde => {
            let window = Rect::new(-r - 1.0, r + 1.0, 0.0, grid.rect().y1.max(l_max + 1.0));
            let g = LevelSetGeometry::build(&model, grid.eps, grid.delta, window)?;
            let cover = IntervalCover::build(&g, (-r, r), params)?;
            cover.write_csv(std::fs::File::create(out.join("cover.csv"))?)?;
            WeightField::tilde(&model, cover)
        }
        WeightKind::One1 => WeightField::one1(&model, grid.delta)?,
        WeightKind::One2 => WeightField::one2(&model),
        WeightKind::W2 => WeightField::w2(&model),
        WeightKind::Spec => WeightField::spec(&model, SpectralData::build(&model, (-r, r), rotation)?),
    };
    let rows = grid
        .points()?
        .into_iter()
        .map(|z| Ok(WeightRow { x: z.re, y: z.im, weight: field.eval(z)?, relative: field.relative(z)? }))
        .collect::<Result<Vec<_>>>()?;
    write_csv(&out.join("weights.csv"), rows)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => {
            for name in experiments::EXPERIMENTS {
                println!("{name:<18} {}", experiments::describe(name).unwrap_or(""));
            }
            Ok(true)
        }
        Command::Run { experiment, inputs, out, baselines } => run(experiment, inputs, out, baselines.as_deref()),
        Command::Baseline { action: BaselineAction::Update { experiment, inputs, baselines } } => {
            let path = baselines.clone().unwrap_or_else(committed_baselines_path);
            update_baseline(experiment, inputs, &path).map(|_| true)
        }
        Command::Levelset { model, grid, out } => levelset(model, grid, out).map(|_| true),
        Command::Weights { model, kind, grid, kappa, l_max, r, rotation, out } => {
            weights(model, kind, grid, *kappa, *l_max, *r, *rotation, out).map(|_| true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
