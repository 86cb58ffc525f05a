//! End-to-end runs driven by a TOML manifest.
//!
//! ```toml
//! seed = 42
//!
//! [space]
//! preset = "table1"
//!
//! [oracle]
//! mode = "proxy"
//!
//! [train]
//! epochs = 50
//! optimizer = { kind = "adam", beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8 }
//! learning_rate = 0.001
//!
//! [validation]
//! preset = "table4"
//!
//! [artifacts]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ann::SurrogateNet;
use crate::dataset::{read, write, ConfigTable, LabelFile, LabelMode, LabelSettings, LabeledDataset};
use crate::error::{Error, Result};
use crate::eval::{validate, EvalReport};
use crate::scene::{DesignSpace, GridSpec};
use crate::train::{split, train_dataset, TrainConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSource {
    pub preset: Option<String>,
    pub file: Option<PathBuf>,
}

impl SpaceSource {
    pub fn preset(name: &str) -> Self {
        SpaceSource {
            preset: Some(name.into()),
            file: None,
        }
    }

    /// Resolves relative files against `base`.
    pub fn load(&self, base: &Path) -> Result<DesignSpace> {
        match (&self.preset, &self.file) {
            (Some(p), None) => DesignSpace::preset(p),
            (None, Some(f)) => DesignSpace::parse(&read(&base.join(f))?),
            _ => Err(Error::InvalidConfig(
                "design space needs exactly one of `preset` or `file`".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    Proxy,
    Ingest { labels: PathBuf, engine: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifacts {
    pub dir: PathBuf,
    #[serde(default = "default_dataset")]
    pub dataset: String,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_report")]
    pub report: String,
}

fn default_dataset() -> String {
    "dataset.csv".into()
}
fn default_model() -> String {
    "model.txt".into()
}
fn default_report() -> String {
    "report.csv".into()
}

impl Default for Artifacts {
    fn default() -> Self {
        Artifacts {
            dir: PathBuf::from("out"),
            dataset: default_dataset(),
            model: default_model(),
            report: default_report(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub seed: u64,
    pub space: SpaceSource,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    pub oracle: OracleSpec,
    /// Missing fields take their defaults; a missing `seed` takes the
    /// manifest seed.
    #[serde(default)]
    pub train: Option<toml::Table>,
    /// Labeled with the proxy oracle under the manifest seed.
    #[serde(default)]
    pub validation: Option<SpaceSource>,
    #[serde(default)]
    pub artifacts: Artifacts,
}

impl RunManifest {
    pub fn new(seed: u64, preset: &str) -> Self {
        RunManifest {
            seed,
            space: SpaceSource::preset(preset),
            grid: None,
            oracle: OracleSpec::Proxy,
            train: None,
            validation: None,
            artifacts: Artifacts::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: RunManifest = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        m.train_config()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are serializable")
    }

    pub fn set_train_config(&mut self, cfg: &TrainConfig) {
        let value = toml::Table::try_from(cfg).expect("train config is serializable");
        self.train = Some(value);
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let mut table = self.train.clone().unwrap_or_default();
        if !table.contains_key("seed") {
            let seed = i64::try_from(self.seed)
                .map_err(|_| Error::InvalidConfig("seed must fit in a signed 64-bit integer".into()))?;
            table.insert("seed".into(), toml::Value::Integer(seed));
        }
        let cfg: TrainConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(format!("[train]: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn label_settings(&self) -> LabelSettings {
        LabelSettings {
            grid: self.grid.unwrap_or_default(),
            ..LabelSettings::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Digests {
    pub dataset: String,
    pub model: String,
    pub report: String,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub dataset: LabeledDataset,
    pub model: SurrogateNet,
    pub history: Vec<f64>,
    pub holdout: EvalReport,
    pub validation: Option<EvalReport>,
    pub report_text: String,
    pub digests: Digests,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn label(space: &DesignSpace, manifest: &RunManifest, base: &Path, oracle: &OracleSpec) -> Result<LabeledDataset> {
    let table = ConfigTable::from_configs(&space.enumerate()?);
    let mode = match oracle {
        OracleSpec::Proxy => LabelMode::Proxy { seed: manifest.seed },
        OracleSpec::Ingest { labels, engine } => LabelMode::Ingest {
            labels: LabelFile::load(&base.join(labels))?,
            engine: engine.clone(),
        },
    };
    crate::dataset::label_dataset(&table, &mode, &manifest.label_settings())
}

/// Formats the holdout and optional validation reports as one CSV.
pub fn report_csv(holdout: &EvalReport, validation: Option<&EvalReport>) -> String {
    let mut out = String::new();
    for (name, r) in std::iter::once(("holdout", holdout)).chain(validation.map(|v| ("validation", v))) {
        out.push_str(&format!("# {name} n={}\n", r.n));
        out.push_str(&r.to_csv());
    }
    out
}

/// Labels, splits, trains and evaluates without touching the filesystem
/// except to read inputs named by the manifest. Relative paths resolve
/// against `base`.
pub fn execute(manifest: &RunManifest, base: &Path) -> Result<RunOutput> {
    let cfg = manifest.train_config()?;
    let space = manifest.space.load(base)?;
    let dataset = label(&space, manifest, base, &manifest.oracle)?;
    let (train_idx, test_idx) = split(dataset.len(), cfg.train_fraction, cfg.seed)?;
    let (model, history) = train_dataset(&dataset.select(&train_idx), dataset.meta.norm, &cfg)?;
    let holdout = validate(&model, &dataset.select(&test_idx))?;
    let validation = match &manifest.validation {
        Some(src) => {
            let vspace = src.load(base)?;
            let vdata = label(&vspace, manifest, base, &OracleSpec::Proxy)?;
            Some(validate(&model, &vdata)?)
        }
        None => None,
    };
    let report_text = report_csv(&holdout, validation.as_ref());
    let digests = Digests {
        dataset: sha256_hex(dataset.to_text().as_bytes()),
        model: model.digest(),
        report: sha256_hex(report_text.as_bytes()),
    };
    Ok(RunOutput {
        dataset,
        model,
        history,
        holdout,
        validation,
        report_text,
        digests,
    })
}

/// Executes and writes the three artifacts under `artifacts.dir`.
pub fn run(manifest: &RunManifest, base: &Path) -> Result<RunOutput> {
    let out = execute(manifest, base)?;
    let dir = base.join(&manifest.artifacts.dir);
    write(&dir.join(&manifest.artifacts.dataset), &out.dataset.to_text())?;
    write(&dir.join(&manifest.artifacts.model), &out.model.to_text())?;
    write(&dir.join(&manifest.artifacts.report), &out.report_text)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::Optimizer;

    const SMALL_SPACE: &str = "\
orientation = N, S
dimensions = 3x4
reflectance = 0.5
shading = none, horizontal_louvre
sill_height = 0.8
window_height = 1.2, 2.4
divisions = one, three
";

    #[test]
    fn manifest_round_trip() {
        let mut m = RunManifest::new(7, "table4");
        m.set_train_config(&TrainConfig {
            optimizer: Optimizer::adam(),
            learning_rate: 0.001,
            ..TrainConfig::default()
        });
        let back = RunManifest::parse(&m.to_toml()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.train_config().unwrap().optimizer, Optimizer::adam());
    }

    #[test]
    fn train_seed_defaults_to_manifest_seed() {
        let m = RunManifest::parse("seed = 9\n[space]\npreset = \"table4\"\n[oracle]\nmode = \"proxy\"\n[train]\nepochs = 3\n")
            .unwrap();
        let cfg = m.train_config().unwrap();
        assert_eq!((cfg.seed, cfg.epochs, cfg.batch_size), (9, 3, 10));
    }

    #[test]
    fn manifest_rejects_bad_input() {
        assert!(RunManifest::parse("seed = 1\n[space]\npreset = \"table4\"\nfile = \"x\"\n[oracle]\nmode = \"proxy\"\n")
            .unwrap()
            .space
            .load(Path::new("."))
            .is_err());
        assert!(RunManifest::parse("seed = 1\n[space]\npreset = \"t\"\n[oracle]\nmode = \"magic\"\n").is_err());
        assert!(RunManifest::parse("seed = 1\n[space]\npreset = \"t\"\n[oracle]\nmode = \"proxy\"\n[train]\nepochs = 0\n").is_err());
        assert!(RunManifest::parse("seed = 1\n[space]\npreset = \"t\"\n[oracle]\nmode = \"proxy\"\n[train]\nepoch = 5\n").is_err());
    }

    #[test]
    fn small_run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("space.txt"), SMALL_SPACE).unwrap();
        let mut m = RunManifest::new(3, "unused");
        m.space = SpaceSource {
            preset: None,
            file: Some("space.txt".into()),
        };
        m.grid = Some(GridSpec {
            spacing: 1.0,
            ..GridSpec::default()
        });
        m.set_train_config(&TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        });
        let out = run(&m, dir.path()).unwrap();
        assert_eq!(out.dataset.len(), 16);
        assert_eq!(out.history.len(), 2);
        let saved = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
        assert_eq!(sha256_hex(saved.as_bytes()), out.digests.report);
        let model = SurrogateNet::load(&dir.path().join("out/model.txt")).unwrap();
        assert_eq!(model.digest(), out.digests.model);
    }
}
