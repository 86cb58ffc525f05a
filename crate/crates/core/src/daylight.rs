//! Analytic daylight proxy used to label design alternatives.
//!
//! Point illuminance on the workplane is the sum of three terms:
//!
//! * direct: `tau * E_beam * sin(altitude)` when the ray towards the sun
//!   passes through the glazing and clears the louvre slats;
//! * diffuse: `tau * s * E_sky * omega / (2 pi)`, with `omega` the solid angle of
//!   the glazing above the workplane seen from the point and `s` the louvre
//!   diffuse transmission (1 without shading);
//! * interreflected: window flux `0.5 * tau * s * E_sky * A_glazing`, times
//!   `rho / (A_interior * (1 - rho))`.
//!
//! Sky conditions come from a seeded pseudo-climate so labels are
//! reproducible without weather files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{total_solid_angle, PlaneRect, Vec3};
use crate::scene::{AnalysisGrid, RoomConfig, Shading, WindowRect};
use crate::solar::{sun_position, Site, SunPosition};

/// Horizontal slat louvre mounted outside the glazing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LouvreModel {
    pub slat_depth: f64,
    pub pitch: f64,
    /// Multiplier on the diffuse window flux when the louvre is present.
    pub diffuse_transmission: f64,
}

impl Default for LouvreModel {
    fn default() -> Self {
        LouvreModel {
            slat_depth: 0.15,
            pitch: 0.15,
            diffuse_transmission: 0.6,
        }
    }
}

impl LouvreModel {
    /// Profile angle (degrees) above which every ray is intercepted.
    pub fn cutoff_profile_deg(&self) -> f64 {
        (self.pitch / self.slat_depth).atan().to_degrees()
    }

    /// Whether a ray crossing the glazing at height `z` and rising `rise`
    /// metres over the slat depth meets a slat. Slats sit at
    /// `sill + k * pitch` and at the window head.
    fn blocks(&self, z: f64, rise: f64, sill: f64, head: f64) -> bool {
        if rise >= self.pitch {
            return true;
        }
        let k = ((z - sill) / self.pitch).ceil().max(0.0);
        let next = (sill + k * self.pitch).min(head);
        next - z <= rise
    }
}

/// Occupied hours, local standard time, every day of the year.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub start_hour: u32,
    pub end_hour: u32,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            start_hour: 8,
            end_hour: 18,
        }
    }
}

impl Schedule {
    pub fn hours_per_day(&self) -> u32 {
        self.end_hour.saturating_sub(self.start_hour)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DaylightSettings {
    pub site: Site,
    pub schedule: Schedule,
    pub louvre: LouvreModel,
    pub da_lux: f64,
    pub sda_fraction: f64,
    pub udi_low: f64,
    pub udi_high: f64,
    pub ase_hours: u32,
    /// Beam normal illuminance an hour needs to count as sunlit for ASE.
    pub sunlit_beam_lux: f64,
    pub svd_lux: f64,
    pub svd_hours: u32,
    /// Share of the horizontal sky illuminance that reaches a vertical
    /// facade.
    pub facade_sky_ratio: f64,
}

impl Default for DaylightSettings {
    fn default() -> Self {
        DaylightSettings {
            site: Site::TEHRAN,
            schedule: Schedule::default(),
            louvre: LouvreModel::default(),
            da_lux: 300.0,
            sda_fraction: 0.5,
            udi_low: 100.0,
            udi_high: 3000.0,
            ase_hours: 250,
            sunlit_beam_lux: 1000.0,
            svd_lux: 3000.0,
            svd_hours: 250,
            facade_sky_ratio: 0.5,
        }
    }
}

/// Sky state for one occupied hour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkyHour {
    pub sun: SunPosition,
    pub sky_horizontal: f64,
    pub beam_normal: f64,
}

/// Clear-sky diffuse horizontal illuminance (lux) for a solar altitude.
pub fn clear_sky_horizontal(altitude_deg: f64) -> f64 {
    if altitude_deg <= 0.0 {
        return 0.0;
    }
    let s = altitude_deg.to_radians().sin();
    800.0 + 15_500.0 * s.sqrt()
}

/// Overcast-sky horizontal illuminance (lux).
pub fn overcast_sky_horizontal(altitude_deg: f64) -> f64 {
    if altitude_deg <= 0.0 {
        return 0.0;
    }
    300.0 + 21_000.0 * altitude_deg.to_radians().sin()
}

/// Clear-sky beam normal illuminance (lux).
pub fn clear_beam_normal(altitude_deg: f64) -> f64 {
    if altitude_deg <= 0.0 {
        return 0.0;
    }
    127_500.0 * (-0.21 / altitude_deg.to_radians().sin()).exp()
}

/// Deterministic hourly sky conditions over a year of occupied hours.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoClimate {
    pub seed: u64,
    pub hours: Vec<SkyHour>,
}

impl PseudoClimate {
    /// Daily cloud cover is drawn once per day (mostly clear, as for an arid
    /// site) with a small hourly jitter; sky and beam illuminance blend
    /// between the clear and overcast curves.
    pub fn generate(site: &Site, schedule: &Schedule, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hours = Vec::with_capacity(365 * schedule.hours_per_day() as usize);
        for day in 1..=365u32 {
            let base: f64 = if rng.random::<f64>() < 0.7 {
                rng.random_range(0.0..0.2)
            } else {
                rng.random_range(0.3..1.0)
            };
            for hour in schedule.start_hour..schedule.end_hour {
                let jitter: f64 = rng.random_range(-0.1..0.1);
                let cloud = (base + jitter).clamp(0.0, 1.0);
                let sun = sun_position(site.latitude, site.longitude, site.tz_meridian, day, hour as f64 + 0.5);
                let alt = sun.altitude;
                let sky_horizontal =
                    (1.0 - cloud) * clear_sky_horizontal(alt) + cloud * overcast_sky_horizontal(alt);
                let beam_normal = clear_beam_normal(alt) * (1.0 - cloud).powi(2);
                hours.push(SkyHour {
                    sun,
                    sky_horizontal,
                    beam_normal,
                });
            }
        }
        PseudoClimate { seed, hours }
    }

    pub fn len(&self) -> usize {
        self.hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hours.is_empty()
    }
}

/// Glazing and louvre geometry of one room, prepared for ray tests.
struct Aperture {
    rects: Vec<WindowRect>,
    louvre: Option<LouvreModel>,
}

impl Aperture {
    fn new(config: &RoomConfig, louvre: &LouvreModel) -> Self {
        Aperture {
            rects: config
                .window_rects()
                .into_iter()
                .filter(|r| r.width > 0.0 && r.height > 0.0)
                .collect(),
            louvre: (config.shading == Shading::HorizontalLouvre15cm).then_some(*louvre),
        }
    }

    /// `dir` is the room-local unit vector towards the sun.
    fn admits(&self, p: Vec3, dir: Vec3) -> bool {
        if dir.y >= 0.0 || dir.z <= 0.0 {
            return false;
        }
        let t = p.y / -dir.y;
        let x = p.x + t * dir.x;
        let z = p.z + t * dir.z;
        let Some(rect) = self
            .rects
            .iter()
            .find(|r| x >= r.left && x <= r.right() && z >= r.sill && z <= r.head())
        else {
            return false;
        };
        match &self.louvre {
            None => true,
            Some(l) => {
                let rise = l.slat_depth * dir.z / -dir.y;
                !l.blocks(z, rise, rect.sill, rect.head())
            }
        }
    }
}

/// Whether the ray from `point` (room-local) towards the sun passes through
/// the glazing and clears the louvre slats.
pub fn direct_sun_hits(point: Vec3, config: &RoomConfig, sun: &SunPosition, louvre: &LouvreModel) -> bool {
    if !sun.is_up() {
        return false;
    }
    let (e, n, u) = sun.direction();
    Aperture::new(config, louvre).admits(point, config.world_to_local(e, n, u))
}

/// Solid angle of the glazing that lies above the horizontal plane through
/// `point`.
pub fn upward_glazing_solid_angle(point: Vec3, config: &RoomConfig) -> Result<f64> {
    let planes: Vec<PlaneRect> = config
        .window_rects()
        .iter()
        .map(|r| PlaneRect {
            u0: r.left,
            u1: r.right(),
            v0: r.sill.max(point.z),
            v1: r.head().max(point.z),
        })
        .collect();
    total_solid_angle(&planes, point.x, point.z, point.y)
}

fn diffuse_factor(config: &RoomConfig, louvre: &LouvreModel) -> f64 {
    let shade = match config.shading {
        Shading::None => 1.0,
        Shading::HorizontalLouvre15cm => louvre.diffuse_transmission,
    };
    config.glazing_transmittance * shade
}

/// Illuminance per unit horizontal sky illuminance from interreflection.
fn interreflected_coefficient(config: &RoomConfig, settings: &DaylightSettings) -> f64 {
    let flux = settings.facade_sky_ratio * diffuse_factor(config, &settings.louvre) * config.glazed_area();
    let rho = config.reflectance;
    flux * rho / (config.interior_area() * (1.0 - rho))
}

/// Illuminance per unit horizontal sky illuminance from the visible sky.
fn diffuse_coefficient(point: Vec3, config: &RoomConfig, louvre: &LouvreModel) -> Result<f64> {
    let omega = upward_glazing_solid_angle(point, config)?;
    Ok(diffuse_factor(config, louvre) * omega / (2.0 * std::f64::consts::PI))
}

/// Workplane illuminance (lux) at `point` for one sky state.
pub fn proxy_illuminance(
    point: Vec3,
    config: &RoomConfig,
    sky: &SkyHour,
    settings: &DaylightSettings,
) -> Result<f64> {
    let diffuse = diffuse_coefficient(point, config, &settings.louvre)? * sky.sky_horizontal;
    let interreflected = interreflected_coefficient(config, settings) * sky.sky_horizontal;
    let direct = if direct_sun_hits(point, config, &sky.sun, &settings.louvre) {
        config.glazing_transmittance * sky.beam_normal * sky.sun.altitude.to_radians().sin()
    } else {
        0.0
    };
    Ok(direct + diffuse + interreflected)
}

/// Hourly illuminance and direct-sun flags for every grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnualPointSeries {
    /// `illuminance[point][hour]`, lux.
    pub illuminance: Vec<Vec<f64>>,
    /// Sunlit hours (geometric hit with sufficient beam).
    pub sunlit: Vec<Vec<bool>>,
    /// Geometric direct-sun hits.
    pub direct_hit: Vec<Vec<bool>>,
}

/// Daylight and glare components of a metric vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DaylightMetrics {
    pub udi: f64,
    pub m_da: f64,
    pub s_da: f64,
    pub ase: f64,
    pub s_vd: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct PointCounts {
    da: u32,
    udi: u32,
    sunlit: u32,
    glare: u32,
}

impl PointCounts {
    fn add(&mut self, lux: f64, sunlit: bool, hit: bool, s: &DaylightSettings) {
        self.da += (lux >= s.da_lux) as u32;
        self.udi += (lux >= s.udi_low && lux <= s.udi_high) as u32;
        self.sunlit += sunlit as u32;
        self.glare += (hit && lux > s.svd_lux) as u32;
    }
}

fn metrics_from_counts(counts: &[PointCounts], hours: usize, s: &DaylightSettings) -> DaylightMetrics {
    let n = counts.len();
    if n == 0 || hours == 0 {
        return DaylightMetrics::default();
    }
    let hours = hours as f64;
    let mut m_da = 0.0;
    let mut udi = 0.0;
    let (mut sda_pts, mut ase_pts, mut svd_pts) = (0usize, 0usize, 0usize);
    for c in counts {
        let da = c.da as f64 / hours;
        m_da += da;
        udi += c.udi as f64 / hours;
        sda_pts += (da >= s.sda_fraction) as usize;
        ase_pts += (c.sunlit >= s.ase_hours) as usize;
        svd_pts += (c.glare > s.svd_hours) as usize;
    }
    let nf = n as f64;
    DaylightMetrics {
        udi: udi / nf,
        m_da: m_da / nf,
        s_da: sda_pts as f64 / nf,
        ase: ase_pts as f64 / nf,
        s_vd: svd_pts as f64 / nf,
    }
}

/// Aggregates a per-point annual series into daylight/glare metrics.
pub fn metrics_from_series(series: &AnnualPointSeries, settings: &DaylightSettings) -> DaylightMetrics {
    let hours = series.illuminance.first().map_or(0, Vec::len);
    let counts: Vec<PointCounts> = series
        .illuminance
        .iter()
        .zip(&series.sunlit)
        .zip(&series.direct_hit)
        .map(|((lux, sunlit), hit)| {
            let mut c = PointCounts::default();
            for ((&e, &s), &h) in lux.iter().zip(sunlit).zip(hit) {
                c.add(e, s, h, settings);
            }
            c
        })
        .collect();
    metrics_from_counts(&counts, hours, settings)
}

/// Per-hour quantities shared by every point of one room.
struct HourTerms {
    dir: Vec3,
    sky: f64,
    direct: f64,
    sunlit_beam: bool,
}

fn hour_terms(config: &RoomConfig, climate: &PseudoClimate, settings: &DaylightSettings) -> Vec<HourTerms> {
    climate
        .hours
        .iter()
        .map(|h| {
            let up = h.sun.is_up();
            let (e, n, u) = h.sun.direction();
            HourTerms {
                dir: if up { config.world_to_local(e, n, u) } else { Vec3::new(0.0, 1.0, -1.0) },
                sky: h.sky_horizontal,
                direct: if up {
                    config.glazing_transmittance * h.beam_normal * h.sun.altitude.to_radians().sin()
                } else {
                    0.0
                },
                sunlit_beam: up && h.beam_normal >= settings.sunlit_beam_lux,
            }
        })
        .collect()
}

/// Full hourly series; memory heavy, meant for inspection and tests.
pub fn annual_series(
    config: &RoomConfig,
    grid: &AnalysisGrid,
    climate: &PseudoClimate,
    settings: &DaylightSettings,
) -> Result<AnnualPointSeries> {
    let aperture = Aperture::new(config, &settings.louvre);
    let terms = hour_terms(config, climate, settings);
    let irc = interreflected_coefficient(config, settings);
    let mut series = AnnualPointSeries {
        illuminance: Vec::with_capacity(grid.len()),
        sunlit: Vec::with_capacity(grid.len()),
        direct_hit: Vec::with_capacity(grid.len()),
    };
    for &p in &grid.points {
        let coef = diffuse_coefficient(p, config, &settings.louvre)? + irc;
        let mut lux = Vec::with_capacity(terms.len());
        let mut sunlit = Vec::with_capacity(terms.len());
        let mut hits = Vec::with_capacity(terms.len());
        for t in &terms {
            let hit = aperture.admits(p, t.dir);
            lux.push(coef * t.sky + if hit { t.direct } else { 0.0 });
            sunlit.push(hit && t.sunlit_beam);
            hits.push(hit);
        }
        series.illuminance.push(lux);
        series.sunlit.push(sunlit);
        series.direct_hit.push(hits);
    }
    Ok(series)
}

/// Annual daylight and glare metrics, streamed point by point.
pub fn annual_metrics(
    config: &RoomConfig,
    grid: &AnalysisGrid,
    climate: &PseudoClimate,
    settings: &DaylightSettings,
) -> Result<DaylightMetrics> {
    let aperture = Aperture::new(config, &settings.louvre);
    let terms = hour_terms(config, climate, settings);
    let irc = interreflected_coefficient(config, settings);
    let counts = grid
        .points
        .iter()
        .map(|&p| {
            let coef = diffuse_coefficient(p, config, &settings.louvre)? + irc;
            let mut c = PointCounts::default();
            for t in &terms {
                let hit = aperture.admits(p, t.dir);
                let lux = coef * t.sky + if hit { t.direct } else { 0.0 };
                c.add(lux, hit && t.sunlit_beam, hit, settings);
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(metrics_from_counts(&counts, terms.len(), settings))
}
