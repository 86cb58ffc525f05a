//! Command-line workflow and HTTP service for the shoebox surrogate.

pub mod server;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use shoebox::ann::SurrogateNet;
use shoebox::dataset::{ConfigTable, LabelFile, LabelMode, LabelSettings, LabeledDataset, METRIC_COUNT, METRIC_LABELS, METRIC_NAMES};
use shoebox::eval::{validate, EvalReport};
use shoebox::pipeline::{run as run_manifest, RunManifest};
use shoebox::scene::{DesignSpace, Divisions, GridSpec, NormBounds, Orientation, RoomConfig, Shading, FEATURE_COUNT, GLAZING_TRANSMITTANCE, ROOM_HEIGHT};
use shoebox::shap::{sample_background, shap_summary, FeatureGrouping, DEFAULT_BACKGROUND};
use shoebox::train::{split, train_dataset, Optimizer, TrainConfig};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Seed of the default explanation background draw.
pub const BACKGROUND_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "shoebox", version, about = "Daylight, glare and quality-view surrogate for shoebox rooms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate a design space into a configuration table.
    Generate(GenerateArgs),
    /// Label a configuration table.
    Label(LabelArgs),
    /// Train a surrogate on a labeled dataset.
    Train(TrainArgs),
    /// Report per-metric errors of a model on a labeled dataset.
    Validate(ValidateArgs),
    /// Shapley attributions for one or more configurations.
    Explain(ExplainArgs),
    /// Serve predictions and explanations over HTTP.
    Serve(ServeArgs),
    /// Run the whole pipeline from a manifest.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Built-in design space.
    #[arg(long, value_parser = ["table1", "table4"], conflicts_with = "space")]
    pub preset: Option<String>,
    /// Design space file.
    #[arg(long)]
    pub space: Option<PathBuf>,
}

impl SpaceArgs {
    fn load(&self) -> anyhow::Result<DesignSpace> {
        Ok(match (&self.preset, &self.space) {
            (_, Some(path)) => DesignSpace::parse(&read_text(path)?)?,
            (Some(p), None) => DesignSpace::preset(p)?,
            (None, None) => DesignSpace::table1(),
        })
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Proxy,
    Ingest,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Configuration table from `generate`.
    #[arg(long)]
    pub configs: PathBuf,
    #[arg(long, value_enum, default_value = "proxy")]
    pub oracle: OracleMode,
    /// Label file with daylight and glare columns (ingest mode).
    #[arg(long, required_if_eq("oracle", "ingest"))]
    pub labels: Option<PathBuf>,
    /// Name of the engine that produced the ingested labels.
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = GridSpec::default().spacing)]
    pub grid_spacing: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled dataset.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 40)]
    pub neurons: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, value_enum, default_value = "sgd")]
    pub optimizer: OptimizerKind,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            optimizer: match self.optimizer {
                OptimizerKind::Sgd => Optimizer::sgd(),
                OptimizerKind::Adam => Optimizer::adam(),
            },
            seed: self.seed,
            train_fraction: self.train_fraction,
            hidden_neurons: self.neurons,
        }
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled validation dataset.
    #[arg(long)]
    pub data: PathBuf,
    /// CSV report destination.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub orientation: Option<Orientation>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub reflectance: Option<f64>,
    #[arg(long)]
    pub shading: Option<Shading>,
    #[arg(long)]
    pub sill_height: Option<f64>,
    #[arg(long)]
    pub window_height: Option<f64>,
    #[arg(long)]
    pub divisions: Option<Divisions>,
}

impl ConfigArgs {
    fn any(&self) -> bool {
        self.orientation.is_some()
            || self.width.is_some()
            || self.depth.is_some()
            || self.reflectance.is_some()
            || self.shading.is_some()
            || self.sill_height.is_some()
            || self.window_height.is_some()
            || self.divisions.is_some()
    }

    fn config(&self) -> anyhow::Result<RoomConfig> {
        let missing = |name: &str| anyhow::Error::new(shoebox::Error::InvalidArgument(format!("--{name} is required")));
        let config = RoomConfig {
            width: self.width.ok_or_else(|| missing("width"))?,
            depth: self.depth.ok_or_else(|| missing("depth"))?,
            height: ROOM_HEIGHT,
            orientation: self.orientation.ok_or_else(|| missing("orientation"))?,
            reflectance: self.reflectance.ok_or_else(|| missing("reflectance"))?,
            shading: self.shading.ok_or_else(|| missing("shading"))?,
            sill_height: self.sill_height.ok_or_else(|| missing("sill-height"))?,
            window_height: self.window_height.ok_or_else(|| missing("window-height"))?,
            divisions: self.divisions.ok_or_else(|| missing("divisions"))?,
            glazing_transmittance: GLAZING_TRANSMITTANCE,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Configuration table or labeled dataset with the samples to explain.
    #[arg(long, conflicts_with_all = ["orientation", "width", "depth", "reflectance", "shading", "sill_height", "window_height", "divisions"])]
    pub samples: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Configuration table or dataset to draw the background from.
    #[arg(long)]
    pub background: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BACKGROUND)]
    pub background_size: usize,
    /// One group per input feature instead of the seven design variables.
    #[arg(long)]
    pub per_feature: bool,
    /// Directory for `shap_summary.csv` and `shap_scatter.csv`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Configuration table or dataset to draw the explanation background from.
    #[arg(long)]
    pub background: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run manifest; without it the flags below define the run.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "table1", value_parser = ["table1", "table4"])]
    pub preset: String,
    /// Output directory when no manifest is given.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| shoebox::Error::Io { path: path.into(), source: e }.into())
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| shoebox::Error::Io { path: dir.into(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| shoebox::Error::Io { path: path.into(), source: e }.into())
}

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let io = err.chain().any(|e| {
        e.downcast_ref::<std::io::Error>().is_some() || e.downcast_ref::<shoebox::Error>().is_some_and(shoebox::Error::is_io)
    });
    if io {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

/// Reads either a labeled dataset or a plain configuration table.
pub fn load_configs(path: &Path) -> anyhow::Result<Vec<RoomConfig>> {
    let text = read_text(path)?;
    if let Ok(data) = LabeledDataset::parse(&text) {
        return Ok(data.configs());
    }
    let table = ConfigTable::parse(&text).with_context(|| format!("{}: not a configuration table or dataset", path.display()))?;
    Ok(table.configs())
}

/// Load a model and check it matches the design-variable encoding.
pub fn load_model(path: &Path) -> anyhow::Result<SurrogateNet> {
    let text = read_text(path)?;
    let model = SurrogateNet::parse(&text).with_context(|| format!("reading model {}", path.display()))?;
    if model.inputs != FEATURE_COUNT || model.outputs != METRIC_COUNT {
        return Err(shoebox::Error::Dimension {
            expected: FEATURE_COUNT,
            actual: model.inputs,
        })
        .with_context(|| format!("model must map {FEATURE_COUNT} inputs to {METRIC_COUNT} outputs"));
    }
    Ok(model)
}

/// Background feature vectors. Without a file, they are drawn from the
/// preset spaces restricted to the model's trained ranges.
pub fn load_background(path: Option<&Path>, norm: &NormBounds, size: usize) -> anyhow::Result<Vec<Vec<f64>>> {
    let configs = match path {
        Some(p) => load_configs(p)?,
        None => {
            let mut all = DesignSpace::table1().enumerate()?;
            all.extend(DesignSpace::table4().enumerate()?);
            all.retain(|c| norm.violation(c).is_none());
            all
        }
    };
    if configs.is_empty() || size == 0 {
        return Err(shoebox::Error::InvalidArgument("background set is empty; pass --background".into()).into());
    }
    let xs: Vec<Vec<f64>> = configs.iter().map(|c| norm.encode(c).features.as_slice().to_vec()).collect();
    Ok(sample_background(&xs, size, BACKGROUND_SEED))
}

/// `{:#}` rendering without repeating a cause already quoted by its parent.
pub fn error_message(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.ends_with(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn print_residuals(report: &EvalReport, limit: f64) {
    for (k, m) in report.metrics.iter().enumerate() {
        if m.mae > limit {
            let [lo, q1, med, q3, hi] = report.residual_summary(k);
            println!(
                "residuals {:<14} min {lo:+.4} q1 {q1:+.4} median {med:+.4} q3 {q3:+.4} max {hi:+.4}",
                METRIC_LABELS[k]
            );
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let space = a.space.load()?;
            let table = ConfigTable::from_configs(&space.enumerate()?);
            write_text(&a.out, &table.to_text())?;
            println!("generated {} configurations -> {}", table.rows.len(), a.out.display());
        }
        Command::Label(a) => {
            let table = ConfigTable::parse(&read_text(&a.configs)?)?;
            let mode = match a.oracle {
                OracleMode::Proxy => LabelMode::Proxy { seed: a.seed },
                OracleMode::Ingest => {
                    let path = a.labels.as_deref().expect("clap requires --labels in ingest mode");
                    LabelMode::Ingest {
                        labels: LabelFile::parse(&read_text(path)?)?,
                        engine: a.engine.clone(),
                    }
                }
            };
            let settings = LabelSettings {
                grid: GridSpec {
                    spacing: a.grid_spacing,
                    ..GridSpec::default()
                },
                ..LabelSettings::default()
            };
            let data = shoebox::dataset::label_dataset(&table, &mode, &settings)?;
            let text = data.to_text();
            write_text(&a.out, &text)?;
            println!(
                "labeled {} rows -> {} (sha256 {})",
                data.len(),
                a.out.display(),
                shoebox::pipeline::sha256_hex(text.as_bytes())
            );
        }
        Command::Train(a) => {
            let cfg = a.config();
            cfg.validate()?;
            let data = LabeledDataset::parse(&read_text(&a.data)?)?;
            if data.is_empty() {
                return Err(shoebox::Error::EmptyDataset.into());
            }
            println!(
                "epochs={} batch={} neurons={} lr={} optimizer={} seed={}",
                cfg.epochs,
                cfg.batch_size,
                cfg.hidden_neurons,
                cfg.learning_rate,
                cfg.optimizer.name(),
                cfg.seed
            );
            let (train_idx, test_idx) = split(data.len(), cfg.train_fraction, cfg.seed)?;
            println!("split {}/{}", train_idx.len(), test_idx.len());
            let (model, history) = train_dataset(&data.select(&train_idx), data.meta.norm, &cfg)?;
            println!("final training loss {:.6}", history.last().copied().unwrap_or(f64::NAN));
            let report = validate(&model, &data.select(&test_idx))?;
            println!("held-out errors\n{}", report.to_table());
            write_text(&a.out, &model.to_text())?;
            println!("model -> {} (sha256 {})", a.out.display(), model.digest());
        }
        Command::Validate(a) => {
            let model = load_model(&a.model)?;
            let data = LabeledDataset::parse(&read_text(&a.data)?)?;
            let report = validate(&model, &data)?;
            print!("{}", report.to_table());
            print_residuals(&report, 0.06);
            if let Some(out) = &a.out {
                write_text(out, &report.to_csv())?;
            }
        }
        Command::Explain(a) => {
            let model = load_model(&a.model)?;
            let configs = match (&a.samples, a.config.any()) {
                (Some(p), _) => load_configs(p)?,
                (None, true) => vec![a.config.config()?],
                (None, false) => {
                    return Err(shoebox::Error::InvalidArgument("pass --samples or the configuration flags".into()).into())
                }
            };
            let background = load_background(a.background.as_deref(), &model.norm, a.background_size)?;
            let grouping = if a.per_feature {
                FeatureGrouping::per_index(&shoebox::scene::FEATURE_NAMES)
            } else {
                FeatureGrouping::design_variables()
            };
            let samples: Vec<Vec<f64>> = configs.iter().map(|c| model.norm.features(c).as_slice().to_vec()).collect();
            let summary = shap_summary(&model, &samples, &background, &grouping, &METRIC_NAMES)?;
            for (i, e) in summary.explanations.iter().enumerate() {
                println!("sample {i}: efficiency gap {:.3e}", e.efficiency_gap());
            }
            for (k, order) in summary.ranking.iter().enumerate() {
                let ranked: Vec<String> = order
                    .iter()
                    .map(|&g| format!("{}={:.4}", summary.group_names[g], summary.mean_abs[k][g]))
                    .collect();
                println!("{:<14} {}", METRIC_LABELS[k], ranked.join(" "));
            }
            if let Some(dir) = &a.out_dir {
                write_text(&dir.join("shap_summary.csv"), &summary.summary_csv())?;
                write_text(&dir.join("shap_scatter.csv"), &summary.scatter_csv())?;
            }
        }
        Command::Serve(a) => {
            let model = load_model(&a.model)?;
            let background = load_background(a.background.as_deref(), &model.norm, DEFAULT_BACKGROUND)?;
            let state = Arc::new(server::AppState::new(model, background));
            let runtime = tokio::runtime::Runtime::new().map_err(|e| shoebox::Error::Io { path: "tokio runtime".into(), source: e })?;
            runtime
                .block_on(server::serve(state, &a.bind))
                .map_err(|e| shoebox::Error::Io { path: a.bind.clone().into(), source: e })?;
        }
        Command::Run(a) => {
            let (manifest, base) = match &a.manifest {
                Some(p) => (
                    RunManifest::load(p)?,
                    p.parent().map(Path::to_path_buf).unwrap_or_default(),
                ),
                None => {
                    let mut m = RunManifest::new(a.seed, &a.preset);
                    m.artifacts.dir = a.out_dir.clone();
                    (m, PathBuf::from("."))
                }
            };
            let out = run_manifest(&manifest, &base)?;
            println!("holdout errors\n{}", out.holdout.to_table());
            if let Some(v) = &out.validation {
                println!("validation errors\n{}", v.to_table());
            }
            println!("dataset sha256 {}", out.digests.dataset);
            println!("model   sha256 {}", out.digests.model);
            println!("report  sha256 {}", out.digests.report);
        }
    }
    Ok(())
}
