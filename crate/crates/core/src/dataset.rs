//! Labeled datasets and their delimited-text file formats.
//!
//! Three formats share the same conventions (comma separated, mandatory
//! header row, `#` metadata lines before the header):
//!
//! * config tables: `id` plus the room configuration columns;
//! * label files: `id` plus the eight metric columns;
//! * datasets: `id`, configuration columns and metric columns, preceded by a
//!   metadata block.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::daylight::{annual_metrics, DaylightSettings, PseudoClimate};
use crate::error::{Error, Result};
use crate::scene::{build_grid, Bounds, GridSpec, NormBounds, RoomConfig};
use crate::views::{assess, ViewSettings};

pub const METRIC_COUNT: usize = 8;

pub const METRIC_NAMES: [&str; METRIC_COUNT] = [
    "udi",
    "m_da",
    "s_da",
    "ase",
    "s_vd",
    "view_range",
    "view_depth",
    "view_factor",
];

/// Display labels in the same order as [`METRIC_NAMES`].
pub const METRIC_LABELS: [&str; METRIC_COUNT] = [
    "UDI",
    "mDA",
    "sDA",
    "ASE",
    "sVD",
    "View Range>90",
    "View Depth",
    "View Factor",
];

/// The eight normalized targets, each a fraction in `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub udi: f64,
    pub m_da: f64,
    pub s_da: f64,
    pub ase: f64,
    pub s_vd: f64,
    pub view_range: f64,
    pub view_depth: f64,
    pub view_factor: f64,
}

impl MetricVector {
    pub fn to_array(&self) -> [f64; METRIC_COUNT] {
        [
            self.udi,
            self.m_da,
            self.s_da,
            self.ase,
            self.s_vd,
            self.view_range,
            self.view_depth,
            self.view_factor,
        ]
    }

    pub fn from_array(v: [f64; METRIC_COUNT]) -> Self {
        MetricVector {
            udi: v[0],
            m_da: v[1],
            s_da: v[2],
            ase: v[3],
            s_vd: v[4],
            view_range: v[5],
            view_depth: v[6],
            view_factor: v[7],
        }
    }

    /// Name of the first component outside `[0, 1]`, if any.
    pub fn out_of_range(&self) -> Option<(&'static str, f64)> {
        METRIC_NAMES
            .iter()
            .zip(self.to_array())
            .find(|(_, v)| !(0.0..=1.0).contains(v))
            .map(|(n, v)| (*n, v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ProxyOracle,
    Ingested,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ProxyOracle => "proxy-oracle",
            Provenance::Ingested => "ingested",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetMeta {
    pub provenance: Provenance,
    pub seed: Option<u64>,
    pub grid: GridSpec,
    pub norm: NormBounds,
    /// Free-form description of the engine that produced ingested labels.
    pub engine: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledRow {
    pub id: usize,
    pub config: RoomConfig,
    pub metrics: MetricVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub meta: DatasetMeta,
    pub rows: Vec<LabeledRow>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn configs(&self) -> Vec<RoomConfig> {
        self.rows.iter().map(|r| r.config).collect()
    }

    pub fn targets(&self) -> Vec<[f64; METRIC_COUNT]> {
        self.rows.iter().map(|r| r.metrics.to_array()).collect()
    }

    /// Subset by row position, keeping metadata.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            meta: self.meta.clone(),
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        out.push_str("# shoebox-dataset v1\n");
        let _ = writeln!(out, "# provenance: {}", m.provenance.as_str());
        if let Some(seed) = m.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        let _ = writeln!(
            out,
            "# grid: spacing={} workplane={} offset={}",
            m.grid.spacing, m.grid.workplane, m.grid.offset
        );
        let norm: Vec<String> = m
            .norm
            .named()
            .iter()
            .map(|(n, b)| format!("{n}={}:{}", b.min, b.max))
            .collect();
        let _ = writeln!(out, "# norm: {}", norm.join(" "));
        if let Some(engine) = &m.engine {
            let _ = writeln!(out, "# engine: {}", engine.replace('\n', " "));
        }
        out.push_str("# s_vd: proxy = share of points with more than 250 h of direct sun above 3000 lux\n");
        let _ = writeln!(out, "id,{},{}", CONFIG_COLUMNS.join(","), METRIC_NAMES.join(","));
        for r in &self.rows {
            let metrics: Vec<String> = r.metrics.to_array().iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{},{},{}", r.id, config_fields(&r.config), metrics.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let header = loop {
            match lines.next() {
                None => return Err(Error::parse(0, "missing header row")),
                Some((_, "")) => continue,
                Some((n, l)) if l.starts_with('#') => {
                    if let Some((k, v)) = l[1..].split_once(':') {
                        meta.insert(k.trim().to_string(), (n, v.trim().to_string()));
                    }
                }
                Some((n, l)) => break (n, l),
            }
        };
        let expected = format!("id,{},{}", CONFIG_COLUMNS.join(","), METRIC_NAMES.join(","));
        check_header(header.0, header.1, &expected)?;

        let provenance = match meta.get("provenance").map(|(_, v)| v.as_str()) {
            Some("proxy-oracle") => Provenance::ProxyOracle,
            Some("ingested") => Provenance::Ingested,
            Some(other) => {
                let line = meta["provenance"].0;
                return Err(Error::parse(line, format!("unknown provenance `{other}`")));
            }
            None => return Err(Error::parse(header.0, "metadata lacks `provenance`")),
        };
        let seed = match meta.get("seed") {
            Some((n, v)) => Some(v.parse::<u64>().map_err(|_| Error::parse(*n, "bad seed"))?),
            None => None,
        };
        let grid = match meta.get("grid") {
            Some((n, v)) => parse_grid_meta(v).map_err(|m| Error::parse(*n, m))?,
            None => GridSpec::default(),
        };
        let (norm_line, norm_text) = meta
            .get("norm")
            .ok_or_else(|| Error::parse(header.0, "metadata lacks `norm`"))?;
        let norm = parse_norm_meta(norm_text).map_err(|m| Error::parse(*norm_line, m))?;
        let engine = meta.get("engine").map(|(_, v)| v.clone());

        let mut rows = Vec::new();
        let mut ids = BTreeSet::new();
        for (n, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 1 + CONFIG_COLUMNS.len() + METRIC_COUNT {
                return Err(Error::parse(
                    n,
                    format!("expected {} columns, found {}", 1 + CONFIG_COLUMNS.len() + METRIC_COUNT, fields.len()),
                ));
            }
            let id = parse_id(fields[0], n)?;
            if !ids.insert(id) {
                return Err(Error::parse(n, format!("duplicate id {id}")));
            }
            let config = parse_config_fields(&fields[1..1 + CONFIG_COLUMNS.len()], n)?;
            let metrics = parse_metrics(&fields[1 + CONFIG_COLUMNS.len()..], n, id)?;
            rows.push(LabeledRow { id, config, metrics });
        }
        Ok(LabeledDataset {
            meta: DatasetMeta {
                provenance,
                seed,
                grid,
                norm,
                engine,
            },
            rows,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &self.to_text())
    }
}

pub const CONFIG_COLUMNS: [&str; 10] = [
    "orientation",
    "width",
    "depth",
    "height",
    "reflectance",
    "shading",
    "sill_height",
    "window_height",
    "divisions",
    "glazing_transmittance",
];

fn config_fields(c: &RoomConfig) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        c.orientation,
        c.width,
        c.depth,
        c.height,
        c.reflectance,
        c.shading,
        c.sill_height,
        c.window_height,
        c.divisions,
        c.glazing_transmittance
    )
}

fn parse_num(s: &str, line: usize, what: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("{what}: `{s}` is not a finite number"))),
    }
}

fn parse_id(s: &str, line: usize) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("id `{s}` is not a non-negative integer")))
}

fn parse_config_fields(f: &[&str], line: usize) -> Result<RoomConfig> {
    let config = RoomConfig {
        orientation: f[0].parse().map_err(|m: String| Error::parse(line, m))?,
        width: parse_num(f[1], line, "width")?,
        depth: parse_num(f[2], line, "depth")?,
        height: parse_num(f[3], line, "height")?,
        reflectance: parse_num(f[4], line, "reflectance")?,
        shading: f[5].parse().map_err(|m: String| Error::parse(line, m))?,
        sill_height: parse_num(f[6], line, "sill_height")?,
        window_height: parse_num(f[7], line, "window_height")?,
        divisions: f[8].parse().map_err(|m: String| Error::parse(line, m))?,
        glazing_transmittance: parse_num(f[9], line, "glazing_transmittance")?,
    };
    config
        .validate()
        .map_err(|e| Error::parse(line, e.to_string()))?;
    Ok(config)
}

fn parse_metrics(f: &[&str], line: usize, id: usize) -> Result<MetricVector> {
    let mut v = [0.0; METRIC_COUNT];
    for (k, s) in f.iter().enumerate() {
        v[k] = parse_num(s, line, METRIC_NAMES[k])?;
    }
    let m = MetricVector::from_array(v);
    if let Some((name, value)) = m.out_of_range() {
        return Err(Error::Ingest(format!(
            "line {line} (id {id}): rejected row, metric `{name}` = {value} outside [0, 1]"
        )));
    }
    Ok(m)
}

fn check_header(line: usize, got: &str, expected: &str) -> Result<()> {
    let norm = |s: &str| {
        s.split(',')
            .map(|c| c.trim().to_ascii_lowercase())
            .collect::<Vec<_>>()
    };
    if norm(got) != norm(expected) {
        return Err(Error::parse(line, format!("header must be `{expected}`")));
    }
    Ok(())
}

fn parse_grid_meta(v: &str) -> Result<GridSpec, String> {
    let mut g = GridSpec::default();
    for part in v.split_whitespace() {
        let (k, val) = part.split_once('=').ok_or_else(|| format!("bad grid entry `{part}`"))?;
        let val: f64 = val.parse().map_err(|_| format!("bad grid value `{val}`"))?;
        match k {
            "spacing" => g.spacing = val,
            "workplane" => g.workplane = val,
            "offset" => g.offset = val,
            _ => return Err(format!("unknown grid key `{k}`")),
        }
    }
    Ok(g)
}

pub(crate) fn parse_norm_meta(v: &str) -> Result<NormBounds, String> {
    let mut pairs = Vec::new();
    for part in v.split_whitespace() {
        let (k, range) = part.split_once('=').ok_or_else(|| format!("bad bounds entry `{part}`"))?;
        let (lo, hi) = range.split_once(':').ok_or_else(|| format!("bad range `{range}`"))?;
        let lo: f64 = lo.parse().map_err(|_| format!("bad bound `{lo}`"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad bound `{hi}`"))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("invalid range `{range}`"));
        }
        pairs.push((k.to_string(), Bounds::new(lo, hi)));
    }
    NormBounds::from_named(&pairs).map_err(|e| e.to_string())
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Enumerated configurations with their enumeration index as ID.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigTable {
    pub rows: Vec<(usize, RoomConfig)>,
}

impl ConfigTable {
    pub fn from_configs(configs: &[RoomConfig]) -> Self {
        ConfigTable {
            rows: configs.iter().copied().enumerate().collect(),
        }
    }

    pub fn configs(&self) -> Vec<RoomConfig> {
        self.rows.iter().map(|r| r.1).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("id,{}\n", CONFIG_COLUMNS.join(","));
        for (id, c) in &self.rows {
            let _ = writeln!(out, "{id},{}", config_fields(c));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hn, header) = lines.next().ok_or_else(|| Error::parse(0, "missing header row"))?;
        check_header(hn, header, &format!("id,{}", CONFIG_COLUMNS.join(",")))?;
        let mut rows = Vec::new();
        let mut ids = BTreeSet::new();
        for (n, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 1 + CONFIG_COLUMNS.len() {
                return Err(Error::parse(n, format!("expected {} columns", 1 + CONFIG_COLUMNS.len())));
            }
            let id = parse_id(fields[0], n)?;
            if !ids.insert(id) {
                return Err(Error::parse(n, format!("duplicate id {id}")));
            }
            rows.push((id, parse_config_fields(&fields[1..], n)?));
        }
        Ok(ConfigTable { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &self.to_text())
    }

    /// Min-max bounds spanned by the table's numeric variables.
    pub fn norm_bounds(&self) -> Result<NormBounds> {
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let span = |f: fn(&RoomConfig) -> f64| {
            let (lo, hi) = self
                .rows
                .iter()
                .map(|r| f(&r.1))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            Bounds::new(lo, hi)
        };
        Ok(NormBounds {
            width: span(|c| c.width),
            depth: span(|c| c.depth),
            reflectance: span(|c| c.reflectance),
            sill_height: span(|c| c.sill_height),
            window_height: span(|c| c.window_height),
        })
    }
}

/// Externally simulated labels keyed by configuration ID.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelFile {
    pub rows: BTreeMap<usize, MetricVector>,
}

impl LabelFile {
    /// Parses `id` + eight metric columns. Rows with values outside `[0, 1]`
    /// are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hn, header) = lines.next().ok_or_else(|| Error::parse(0, "missing header row"))?;
        check_header(hn, header, &format!("id,{}", METRIC_NAMES.join(",")))?;
        let mut rows = BTreeMap::new();
        for (n, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 1 + METRIC_COUNT {
                return Err(Error::parse(n, format!("expected {} columns", 1 + METRIC_COUNT)));
            }
            let id = parse_id(fields[0], n)?;
            let metrics = parse_metrics(&fields[1..], n, id)?;
            if rows.insert(id, metrics).is_some() {
                return Err(Error::parse(n, format!("duplicate id {id}")));
            }
        }
        Ok(LabelFile { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("id,{}\n", METRIC_NAMES.join(","));
        for (id, m) in &self.rows {
            let v: Vec<String> = m.to_array().iter().map(f64::to_string).collect();
            let _ = writeln!(out, "{id},{}", v.join(","));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum LabelMode {
    /// Analytic proxy with a seeded pseudo-climate.
    Proxy { seed: u64 },
    /// Daylight and glare components taken from an external file.
    Ingest { labels: LabelFile, engine: Option<String> },
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LabelSettings {
    pub grid: GridSpec,
    pub views: ViewSettings,
    pub daylight: DaylightSettings,
}

/// Geometric view components plus daylight/glare components for each
/// configuration. Output order follows `table` regardless of scheduling.
pub fn label_dataset(table: &ConfigTable, mode: &LabelMode, settings: &LabelSettings) -> Result<LabeledDataset> {
    let norm = table.norm_bounds()?;
    let climate = match mode {
        LabelMode::Proxy { seed } => Some(PseudoClimate::generate(
            &settings.daylight.site,
            &settings.daylight.schedule,
            *seed,
        )),
        LabelMode::Ingest { labels, .. } => {
            let wanted: BTreeSet<usize> = table.rows.iter().map(|r| r.0).collect();
            let have: BTreeSet<usize> = labels.rows.keys().copied().collect();
            let missing: Vec<usize> = wanted.difference(&have).copied().collect();
            let extra: Vec<usize> = have.difference(&wanted).copied().collect();
            if !missing.is_empty() || !extra.is_empty() {
                return Err(Error::Ingest(format!(
                    "label rows do not match configurations: missing ids {} ; unknown ids {}",
                    id_list(&missing),
                    id_list(&extra)
                )));
            }
            None
        }
    };

    let rows = table
        .rows
        .par_iter()
        .map(|&(id, config)| {
            let grid = build_grid(&config, &settings.grid)?;
            let views = assess(&config, &grid, &settings.views)?;
            let mut m = match (mode, &climate) {
                (LabelMode::Proxy { .. }, Some(climate)) => {
                    let d = annual_metrics(&config, &grid, climate, &settings.daylight)?;
                    MetricVector {
                        udi: d.udi,
                        m_da: d.m_da,
                        s_da: d.s_da,
                        ase: d.ase,
                        s_vd: d.s_vd,
                        ..MetricVector::default()
                    }
                }
                (LabelMode::Ingest { labels, .. }, _) => labels.rows[&id],
                _ => unreachable!("climate exists exactly in proxy mode"),
            };
            m.view_range = views.view_range_fraction;
            m.view_depth = views.view_depth_fraction;
            m.view_factor = views.view_factor_fraction;
            Ok(LabeledRow { id, config, metrics: m })
        })
        .collect::<Result<Vec<_>>>()?;

    let (provenance, seed, engine) = match mode {
        LabelMode::Proxy { seed } => (Provenance::ProxyOracle, Some(*seed), None),
        LabelMode::Ingest { engine, .. } => (Provenance::Ingested, None, engine.clone()),
    };
    Ok(LabeledDataset {
        meta: DatasetMeta {
            provenance,
            seed,
            grid: settings.grid,
            norm,
            engine,
        },
        rows,
    })
}

fn id_list(ids: &[usize]) -> String {
    if ids.is_empty() {
        return "none".into();
    }
    let shown: Vec<String> = ids.iter().take(20).map(usize::to_string).collect();
    if ids.len() > 20 {
        format!("{} ... ({} total)", shown.join(","), ids.len())
    } else {
        shown.join(",")
    }
}
