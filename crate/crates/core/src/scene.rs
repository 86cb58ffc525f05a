//! Shoebox design space: room configurations, enumeration, feature encoding,
//! window layout and workplane analysis grids.
//!
//! Room-local coordinates are used throughout: `x` runs along the glazed wall
//! (`0..width`), `y` is the horizontal distance into the room from the
//! glazing plane (`0..depth`), and `z` is height above the floor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PlaneRect, Vec3};

pub const ROOM_HEIGHT: f64 = 3.5;
pub const GLAZING_TRANSMITTANCE: f64 = 0.85;

/// Tolerance used when checking that a window fits below the ceiling.
const FIT_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    N,
    E,
    S,
    W,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [Orientation::N, Orientation::E, Orientation::S, Orientation::W];

    /// Azimuth of the glazed wall's outward normal, degrees clockwise from north.
    pub fn azimuth_deg(self) -> f64 {
        match self {
            Orientation::N => 0.0,
            Orientation::E => 90.0,
            Orientation::S => 180.0,
            Orientation::W => 270.0,
        }
    }

    /// Position in the one-hot block.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::N => "N",
            Orientation::E => "E",
            Orientation::S => "S",
            Orientation::W => "W",
        }
    }
}

impl FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "N" | "NORTH" => Ok(Orientation::N),
            "E" | "EAST" => Ok(Orientation::E),
            "S" | "SOUTH" => Ok(Orientation::S),
            "W" | "WEST" => Ok(Orientation::W),
            other => Err(format!("unknown orientation `{other}`")),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shading {
    None,
    #[serde(rename = "horizontal_louvre", alias = "louvre")]
    HorizontalLouvre15cm,
}

impl Shading {
    pub fn as_str(self) -> &'static str {
        match self {
            Shading::None => "none",
            Shading::HorizontalLouvre15cm => "horizontal_louvre",
        }
    }

    pub fn flag(self) -> f64 {
        match self {
            Shading::None => 0.0,
            Shading::HorizontalLouvre15cm => 1.0,
        }
    }
}

impl FromStr for Shading {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "no_shading" => Ok(Shading::None),
            "horizontal_louvre" | "louvre" => Ok(Shading::HorizontalLouvre15cm),
            other => Err(format!("unknown shading state `{other}`")),
        }
    }
}

impl fmt::Display for Shading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divisions {
    #[serde(alias = "one")]
    OneFullWidth,
    #[serde(alias = "three")]
    ThreeEqual,
}

impl Divisions {
    pub fn as_str(self) -> &'static str {
        match self {
            Divisions::OneFullWidth => "one_full_width",
            Divisions::ThreeEqual => "three_equal",
        }
    }

    pub fn flag(self) -> f64 {
        match self {
            Divisions::OneFullWidth => 0.0,
            Divisions::ThreeEqual => 1.0,
        }
    }
}

impl FromStr for Divisions {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one_full_width" | "one" | "1" => Ok(Divisions::OneFullWidth),
            "three_equal" | "three" | "3" => Ok(Divisions::ThreeEqual),
            other => Err(format!("unknown window divisions `{other}`")),
        }
    }
}

impl fmt::Display for Divisions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One shoebox design alternative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomConfig {
    pub width: f64,
    pub depth: f64,
    #[serde(default = "default_height")]
    pub height: f64,
    pub orientation: Orientation,
    pub reflectance: f64,
    pub shading: Shading,
    pub sill_height: f64,
    pub window_height: f64,
    pub divisions: Divisions,
    #[serde(default = "default_transmittance")]
    pub glazing_transmittance: f64,
}

fn default_height() -> f64 {
    ROOM_HEIGHT
}

fn default_transmittance() -> f64 {
    GLAZING_TRANSMITTANCE
}

impl RoomConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.width,
            self.depth,
            self.height,
            self.reflectance,
            self.sill_height,
            self.window_height,
            self.glazing_transmittance,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite value".into()));
        }
        if self.width <= 0.0 || self.depth <= 0.0 || self.height <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "room dimensions must be positive (width {}, depth {}, height {})",
                self.width, self.depth, self.height
            )));
        }
        if !(self.reflectance > 0.0 && self.reflectance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "reflectance {} outside (0, 1)",
                self.reflectance
            )));
        }
        if !(self.glazing_transmittance > 0.0 && self.glazing_transmittance <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "glazing transmittance {} outside (0, 1]",
                self.glazing_transmittance
            )));
        }
        if self.sill_height < 0.0 || self.window_height < 0.0 {
            return Err(Error::InvalidConfig("negative window dimension".into()));
        }
        if self.head_height() > self.height + FIT_EPS {
            return Err(Error::InvalidConfig(format!(
                "sill {} + window height {} exceeds room height {}",
                self.sill_height, self.window_height, self.height
            )));
        }
        Ok(())
    }

    /// Height of the window head above the floor.
    pub fn head_height(&self) -> f64 {
        self.sill_height + self.window_height
    }

    /// Length of the glazed wall.
    pub fn wall_width(&self) -> f64 {
        self.width
    }

    pub fn window_rects(&self) -> Vec<WindowRect> {
        window_rects(self)
    }

    pub fn glazed_area(&self) -> f64 {
        self.window_rects().iter().map(|r| r.width * r.height).sum()
    }

    /// Total interior surface area (floor, ceiling and four walls).
    pub fn interior_area(&self) -> f64 {
        2.0 * (self.width * self.depth + self.width * self.height + self.depth * self.height)
    }

    /// Rotates a world direction (east, north, up) into room-local axes.
    pub fn world_to_local(&self, east: f64, north: f64, up: f64) -> Vec3 {
        let theta = self.orientation.azimuth_deg().to_radians();
        let (s, c) = theta.sin_cos();
        // local y points into the room (against the outward normal);
        // local x completes a right-handed frame with z up.
        Vec3::new(-c * east + s * north, -s * east - c * north, up)
    }

    /// Inverse of [`RoomConfig::world_to_local`].
    pub fn local_to_world(&self, v: Vec3) -> (f64, f64, f64) {
        let theta = self.orientation.azimuth_deg().to_radians();
        let (s, c) = theta.sin_cos();
        (-c * v.x - s * v.y, s * v.x - c * v.y, v.z)
    }
}

/// Window opening in wall coordinates: `left` along the wall from its
/// origin corner, `sill` above the floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowRect {
    pub left: f64,
    pub sill: f64,
    pub width: f64,
    pub height: f64,
}

impl WindowRect {
    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn head(&self) -> f64 {
        self.sill + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn plane_rect(&self) -> PlaneRect {
        PlaneRect {
            u0: self.left,
            u1: self.right(),
            v0: self.sill,
            v1: self.head(),
        }
    }

    /// Corners in room-local coordinates (glazing plane is `y = 0`),
    /// counter-clockwise seen from inside, starting bottom-left.
    pub fn corners_local(&self) -> [Vec3; 4] {
        [
            Vec3::new(self.left, 0.0, self.sill),
            Vec3::new(self.right(), 0.0, self.sill),
            Vec3::new(self.right(), 0.0, self.head()),
            Vec3::new(self.left, 0.0, self.head()),
        ]
    }

    /// Corners as (east, north, up) offsets from the room's local origin.
    pub fn corners_world(&self, config: &RoomConfig) -> [(f64, f64, f64); 4] {
        self.corners_local().map(|c| config.local_to_world(c))
    }
}

/// Window layout on the glazed wall. Each of the three divided windows is a
/// fifth of the wall wide, with four equal gaps (between the windows and at
/// both ends) sharing the remaining two fifths.
pub fn window_rects(config: &RoomConfig) -> Vec<WindowRect> {
    let wall = config.wall_width();
    let (sill, height) = (config.sill_height, config.window_height);
    match config.divisions {
        Divisions::OneFullWidth => vec![WindowRect {
            left: 0.0,
            sill,
            width: wall,
            height,
        }],
        Divisions::ThreeEqual => {
            let w = wall / 5.0;
            let gap = wall / 10.0;
            (0..3)
                .map(|k| WindowRect {
                    left: gap + k as f64 * (w + gap),
                    sill,
                    width: w,
                    height,
                })
                .collect()
        }
    }
}

/// Value lists for every design variable. Width and depth are paired, as the
/// room footprints are chosen together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    pub orientations: Vec<Orientation>,
    pub dimensions: Vec<(f64, f64)>,
    pub reflectances: Vec<f64>,
    pub shadings: Vec<Shading>,
    pub sill_heights: Vec<f64>,
    pub window_heights: Vec<f64>,
    pub divisions: Vec<Divisions>,
    pub height: f64,
    pub transmittance: f64,
}

/// Names of the seven design variables, in enumeration order.
pub const VARIABLE_NAMES: [&str; 7] = [
    "orientation",
    "dimensions",
    "reflectance",
    "shading",
    "sill_height",
    "window_height",
    "divisions",
];

impl DesignSpace {
    /// The 2880-alternative training space.
    pub fn table1() -> Self {
        DesignSpace {
            orientations: Orientation::ALL.to_vec(),
            dimensions: vec![(3.0, 4.0), (6.0, 7.0), (8.0, 10.0)],
            reflectances: vec![0.2, 0.4, 0.7],
            shadings: vec![Shading::None, Shading::HorizontalLouvre15cm],
            sill_heights: vec![0.5, 0.7, 0.9, 1.1],
            window_heights: vec![1.2, 1.5, 1.8, 2.1, 2.4],
            divisions: vec![Divisions::OneFullWidth, Divisions::ThreeEqual],
            height: ROOM_HEIGHT,
            transmittance: GLAZING_TRANSMITTANCE,
        }
    }

    /// The 64-alternative validation space.
    pub fn table4() -> Self {
        DesignSpace {
            orientations: vec![Orientation::S, Orientation::E],
            dimensions: vec![(7.0, 8.0), (5.0, 6.0)],
            reflectances: vec![0.3, 0.6],
            shadings: vec![Shading::None, Shading::HorizontalLouvre15cm],
            sill_heights: vec![0.8, 1.0],
            window_heights: vec![1.6, 2.0],
            divisions: vec![Divisions::OneFullWidth],
            height: ROOM_HEIGHT,
            transmittance: GLAZING_TRANSMITTANCE,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "table1" => Ok(Self::table1()),
            "table4" => Ok(Self::table4()),
            other => Err(Error::InvalidSpace(format!(
                "unknown preset `{other}` (expected table1 or table4)"
            ))),
        }
    }

    fn list_lengths(&self) -> [usize; 7] {
        [
            self.orientations.len(),
            self.dimensions.len(),
            self.reflectances.len(),
            self.shadings.len(),
            self.sill_heights.len(),
            self.window_heights.len(),
            self.divisions.len(),
        ]
    }

    pub fn cardinality(&self) -> usize {
        self.list_lengths().iter().product()
    }

    /// Full Cartesian product, row-major over the variable lists in
    /// [`VARIABLE_NAMES`] order (divisions vary fastest).
    pub fn enumerate(&self) -> Result<Vec<RoomConfig>> {
        for (name, len) in VARIABLE_NAMES.iter().zip(self.list_lengths()) {
            if len == 0 {
                return Err(Error::InvalidSpace(format!("variable `{name}` has no values")));
            }
        }
        let mut out = Vec::with_capacity(self.cardinality());
        for &orientation in &self.orientations {
            for &(width, depth) in &self.dimensions {
                for &reflectance in &self.reflectances {
                    for &shading in &self.shadings {
                        for &sill_height in &self.sill_heights {
                            for &window_height in &self.window_heights {
                                for &divisions in &self.divisions {
                                    let config = RoomConfig {
                                        width,
                                        depth,
                                        height: self.height,
                                        orientation,
                                        reflectance,
                                        shading,
                                        sill_height,
                                        window_height,
                                        divisions,
                                        glazing_transmittance: self.transmittance,
                                    };
                                    config.validate().map_err(|e| {
                                        Error::InvalidSpace(format!("alternative {}: {e}", out.len()))
                                    })?;
                                    out.push(config);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Parses the declarative `name = v1, v2, ...` format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut space = DesignSpace {
            orientations: Vec::new(),
            dimensions: Vec::new(),
            reflectances: Vec::new(),
            shadings: Vec::new(),
            sill_heights: Vec::new(),
            window_heights: Vec::new(),
            divisions: Vec::new(),
            height: ROOM_HEIGHT,
            transmittance: GLAZING_TRANSMITTANCE,
        };
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, values) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, "expected `name = values`"))?;
            let key = key.trim().to_ascii_lowercase();
            if seen.contains(&key) {
                return Err(Error::parse(line_no, format!("duplicate variable `{key}`")));
            }
            let items = split_items(values);
            match key.as_str() {
                "orientation" => space.orientations = parse_items(&items, line_no)?,
                "dimensions" => {
                    space.dimensions = items
                        .iter()
                        .map(|s| parse_dimension(s).map_err(|m| Error::parse(line_no, m)))
                        .collect::<Result<_>>()?
                }
                "reflectance" => space.reflectances = parse_numbers(&items, line_no)?,
                "shading" => space.shadings = parse_items(&items, line_no)?,
                "sill_height" | "okb" => space.sill_heights = parse_numbers(&items, line_no)?,
                "window_height" => space.window_heights = parse_numbers(&items, line_no)?,
                "divisions" => space.divisions = parse_items(&items, line_no)?,
                "height" => space.height = parse_single(&items, line_no)?,
                "transmittance" => space.transmittance = parse_single(&items, line_no)?,
                other => {
                    return Err(Error::parse(line_no, format!("unknown variable `{other}`")));
                }
            }
            // `okb` and `sill_height` are the same variable.
            seen.push(if key == "okb" { "sill_height".into() } else { key });
        }
        for (name, len) in VARIABLE_NAMES.iter().zip(space.list_lengths()) {
            if len == 0 {
                return Err(Error::InvalidSpace(format!("variable `{name}` has no values")));
            }
        }
        Ok(space)
    }

    /// Serializes into the format accepted by [`DesignSpace::parse`].
    pub fn to_text(&self) -> String {
        fn join<T: fmt::Display>(items: &[T]) -> String {
            items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
        }
        let dims: Vec<String> = self.dimensions.iter().map(|(w, d)| format!("{w}x{d}")).collect();
        format!(
            "orientation = {}\ndimensions = {}\nreflectance = {}\nshading = {}\nsill_height = {}\nwindow_height = {}\ndivisions = {}\nheight = {}\ntransmittance = {}\n",
            join(&self.orientations),
            dims.join(", "),
            join(&self.reflectances),
            join(&self.shadings),
            join(&self.sill_heights),
            join(&self.window_heights),
            join(&self.divisions),
            self.height,
            self.transmittance,
        )
    }

    pub fn norm_bounds(&self) -> NormBounds {
        NormBounds {
            width: Bounds::of(self.dimensions.iter().map(|d| d.0)),
            depth: Bounds::of(self.dimensions.iter().map(|d| d.1)),
            reflectance: Bounds::of(self.reflectances.iter().copied()),
            sill_height: Bounds::of(self.sill_heights.iter().copied()),
            window_height: Bounds::of(self.window_heights.iter().copied()),
        }
    }
}

/// Splits a comma-separated list, keeping `(w, d)` pairs intact.
fn split_items(values: &str) -> Vec<&str> {
    let mut items = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in values.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth <= 0 => {
                items.push(values[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(values[start..].trim());
    items.retain(|s| !s.is_empty());
    items
}

fn parse_items<T: FromStr<Err = String>>(items: &[&str], line: usize) -> Result<Vec<T>> {
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|m| Error::parse(line, m)))
        .collect()
}

fn parse_numbers(items: &[&str], line: usize) -> Result<Vec<f64>> {
    items
        .iter()
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(line, format!("`{s}` is not a finite number"))),
        })
        .collect()
}

fn parse_single(items: &[&str], line: usize) -> Result<f64> {
    match parse_numbers(items, line)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(Error::parse(line, "expected exactly one value")),
    }
}

fn parse_dimension(s: &str) -> Result<(f64, f64), String> {
    let cleaned = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (w, d) = cleaned
        .split_once(['x', 'X', ','])
        .ok_or_else(|| format!("dimension `{s}` must look like `WxD`"))?;
    let parse = |v: &str| -> Result<f64, String> {
        match v.trim().parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
            _ => Err(format!("`{v}` is not a positive number")),
        }
    };
    Ok((parse(w)?, parse(d)?))
}

/// Closed interval used for min-max scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Self {
        Bounds { min, max }
    }

    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        Bounds { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    /// Scales into `[0, 1]`; returns `true` in the second slot when the value
    /// had to be clamped. A degenerate interval maps everything to 0.
    pub fn scale(&self, v: f64) -> (f64, bool) {
        let clamped = !self.contains(v);
        let span = self.max - self.min;
        if span <= 0.0 {
            return (0.0, clamped);
        }
        (((v - self.min) / span).clamp(0.0, 1.0), clamped)
    }
}

pub const FEATURE_COUNT: usize = 11;
pub const IDX_ORIENTATION: [usize; 4] = [0, 1, 2, 3];
pub const IDX_WIDTH: usize = 4;
pub const IDX_DEPTH: usize = 5;
pub const IDX_REFLECTANCE: usize = 6;
pub const IDX_SHADING: usize = 7;
pub const IDX_SILL: usize = 8;
pub const IDX_WINDOW_HEIGHT: usize = 9;
pub const IDX_DIVISIONS: usize = 10;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "orientation_n",
    "orientation_e",
    "orientation_s",
    "orientation_w",
    "width",
    "depth",
    "reflectance",
    "shading",
    "sill_height",
    "window_height",
    "divisions",
];

/// Network input: orientation one-hot followed by the scaled numeric and
/// binary variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Min-max bounds for the numeric variables, taken from the training space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub width: Bounds,
    pub depth: Bounds,
    pub reflectance: Bounds,
    pub sill_height: Bounds,
    pub window_height: Bounds,
}

impl NormBounds {
    pub fn named(&self) -> [(&'static str, Bounds); 5] {
        [
            ("width", self.width),
            ("depth", self.depth),
            ("reflectance", self.reflectance),
            ("sill_height", self.sill_height),
            ("window_height", self.window_height),
        ]
    }

    pub fn from_named(pairs: &[(String, Bounds)]) -> Result<Self> {
        let get = |name: &str| {
            pairs
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, b)| *b)
                .ok_or_else(|| Error::InvalidArgument(format!("missing bounds for `{name}`")))
        };
        Ok(NormBounds {
            width: get("width")?,
            depth: get("depth")?,
            reflectance: get("reflectance")?,
            sill_height: get("sill_height")?,
            window_height: get("window_height")?,
        })
    }

    /// First continuous variable of `config` outside its bounds.
    pub fn violation(&self, config: &RoomConfig) -> Option<(&'static str, f64, Bounds)> {
        let values = [
            config.width,
            config.depth,
            config.reflectance,
            config.sill_height,
            config.window_height,
        ];
        self.named()
            .into_iter()
            .zip(values)
            .find(|((_, b), v)| !b.contains(*v))
            .map(|((n, b), v)| (n, v, b))
    }

    /// Encodes a configuration, reporting which variables were clamped.
    pub fn encode(&self, config: &RoomConfig) -> Encoding {
        let mut v = [0.0; FEATURE_COUNT];
        v[config.orientation.index()] = 1.0;
        let mut clamped = Vec::new();
        for (idx, name, bounds, value) in [
            (IDX_WIDTH, "width", self.width, config.width),
            (IDX_DEPTH, "depth", self.depth, config.depth),
            (IDX_REFLECTANCE, "reflectance", self.reflectance, config.reflectance),
            (IDX_SILL, "sill_height", self.sill_height, config.sill_height),
            (IDX_WINDOW_HEIGHT, "window_height", self.window_height, config.window_height),
        ] {
            let (scaled, was_clamped) = bounds.scale(value);
            v[idx] = scaled;
            if was_clamped {
                clamped.push(name);
            }
        }
        v[IDX_SHADING] = config.shading.flag();
        v[IDX_DIVISIONS] = config.divisions.flag();
        Encoding {
            features: FeatureVector(v),
            clamped,
        }
    }

    /// Like [`NormBounds::encode`] but logs clamping instead of returning it.
    pub fn features(&self, config: &RoomConfig) -> FeatureVector {
        let enc = self.encode(config);
        if !enc.clamped.is_empty() {
            log::warn!("clamped out-of-range inputs: {}", enc.clamped.join(", "));
        }
        enc.features
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    pub features: FeatureVector,
    pub clamped: Vec<&'static str>,
}

/// Workplane sampling parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub spacing: f64,
    pub workplane: f64,
    pub offset: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            spacing: 0.5,
            workplane: 0.76,
            offset: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisGrid {
    pub points: Vec<Vec3>,
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub offset: f64,
    pub cell_area: f64,
}

impl AnalysisGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn axis_count(dim: f64, spacing: f64, offset: f64) -> usize {
    ((dim - 2.0 * offset) / spacing + 1e-9).floor() as usize + 1
}

/// Regular workplane grid inset by `offset` from every wall. Points are
/// ordered row by row, rows running away from the glazing.
pub fn build_grid(config: &RoomConfig, spec: &GridSpec) -> Result<AnalysisGrid> {
    let GridSpec {
        spacing,
        workplane,
        offset,
    } = *spec;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
    }
    if !(offset >= 0.0) || !workplane.is_finite() {
        return Err(Error::InvalidGrid("offset and workplane must be finite, offset >= 0".into()));
    }
    if offset >= config.width.min(config.depth) / 2.0 {
        return Err(Error::InvalidGrid(format!(
            "offset {offset} leaves no interior in a {}x{} room",
            config.width, config.depth
        )));
    }
    let nx = axis_count(config.width, spacing, offset);
    let ny = axis_count(config.depth, spacing, offset);
    let mut points = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = offset + j as f64 * spacing;
        for i in 0..nx {
            points.push(Vec3::new(offset + i as f64 * spacing, y, workplane));
        }
    }
    Ok(AnalysisGrid {
        points,
        nx,
        ny,
        spacing,
        offset,
        cell_area: spacing * spacing,
    })
}
