//! Quality-view metrics (view factor, view depth, view range) as compliant
//! area fractions of the analysis grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{total_solid_angle, Vec3};
use crate::scene::{AnalysisGrid, RoomConfig, WindowRect};

/// Seated eye height used for the view factor and view range.
pub const SEATED_EYE_HEIGHT: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewSettings {
    pub eye_height: f64,
    /// Solid-angle bin edges (sr) between ratings 1|2, 2|3, 3|4 and 4|5.
    pub factor_bins: [f64; 4],
    /// Lowest rating counted as compliant.
    pub compliant_rating: u8,
    /// Compliant depth as a multiple of the window head height.
    pub depth_multiplier: f64,
    pub range_deg: f64,
    /// Area share each criterion must reach.
    pub pass_fraction: f64,
    /// Number of criteria that must reach `pass_fraction`.
    pub pass_count: usize,
}

impl Default for ViewSettings {
    fn default() -> Self {
        ViewSettings {
            eye_height: SEATED_EYE_HEIGHT,
            factor_bins: [0.05, 0.2, 0.5, 1.0],
            compliant_rating: 3,
            depth_multiplier: 3.0,
            range_deg: 90.0,
            pass_fraction: 0.75,
            pass_count: 2,
        }
    }
}

impl ViewSettings {
    /// Maps a solid angle to a 1..=5 rating.
    pub fn rating(&self, omega: f64) -> u8 {
        1 + self.factor_bins.iter().filter(|&&edge| omega >= edge).count() as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointView {
    pub x: f64,
    pub y: f64,
    pub solid_angle: f64,
    pub rating: u8,
    pub spread_deg: f64,
    pub factor_compliant: bool,
    pub depth_compliant: bool,
    pub range_compliant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViewResult {
    pub points: Vec<PointView>,
    pub view_factor_fraction: f64,
    pub view_depth_fraction: f64,
    pub view_range_fraction: f64,
    pub quality_views_pass: bool,
}

impl ViewResult {
    pub fn fractions(&self) -> [f64; 3] {
        [
            self.view_factor_fraction,
            self.view_depth_fraction,
            self.view_range_fraction,
        ]
    }

    /// Writes per-point results as CSV.
    pub fn write_points<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "x,y,solid_angle_sr,rating,spread_deg,factor_compliant,depth_compliant,range_compliant"
        )?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.x,
                p.y,
                p.solid_angle,
                p.rating,
                p.spread_deg,
                p.factor_compliant as u8,
                p.depth_compliant as u8,
                p.range_compliant as u8
            )?;
        }
        Ok(())
    }
}

/// Total solid angle of the glazing seen from `eye` (room-local coordinates,
/// glazing plane at `y = 0`).
pub fn glazing_solid_angle(eye: Vec3, rects: &[WindowRect]) -> Result<f64> {
    if eye.y == 0.0 {
        return Err(Error::Geometry("eye lies in the glazing plane".into()));
    }
    let planes: Vec<_> = rects.iter().map(WindowRect::plane_rect).collect();
    total_solid_angle(&planes, eye.x, eye.z, eye.y)
}

/// Horizontal angle (degrees) between the two extreme sight lines from
/// `(x, y)` to any glazing.
pub fn bearing_spread_deg(x: f64, y: f64, rects: &[WindowRect]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in rects.iter().filter(|r| r.width > 0.0 && r.height > 0.0) {
        lo = lo.min((r.left - x).atan2(y));
        hi = hi.max((r.right() - x).atan2(y));
    }
    if hi < lo {
        return 0.0;
    }
    (hi - lo).to_degrees()
}

fn fraction(flags: impl Iterator<Item = bool>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    flags.filter(|&f| f).count() as f64 / n as f64
}

/// True when at least `settings.pass_count` fractions reach `pass_fraction`.
pub fn quality_views_pass(fractions: [f64; 3], settings: &ViewSettings) -> bool {
    fractions
        .iter()
        .filter(|&&f| f >= settings.pass_fraction)
        .count()
        >= settings.pass_count
}

pub fn assess(config: &RoomConfig, grid: &AnalysisGrid, settings: &ViewSettings) -> Result<ViewResult> {
    let rects = config.window_rects();
    let depth_limit = settings.depth_multiplier * config.head_height();
    let points = grid
        .points
        .iter()
        .map(|p| {
            let eye = Vec3::new(p.x, p.y, settings.eye_height);
            let solid_angle = glazing_solid_angle(eye, &rects)?;
            let rating = settings.rating(solid_angle);
            let spread_deg = bearing_spread_deg(p.x, p.y, &rects);
            Ok(PointView {
                x: p.x,
                y: p.y,
                solid_angle,
                rating,
                spread_deg,
                factor_compliant: rating >= settings.compliant_rating,
                depth_compliant: p.y <= depth_limit + 1e-9 && depth_limit > 0.0,
                range_compliant: spread_deg >= settings.range_deg,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = points.len();
    let view_factor_fraction = fraction(points.iter().map(|p| p.factor_compliant), n);
    let view_depth_fraction = fraction(points.iter().map(|p| p.depth_compliant), n);
    let view_range_fraction = fraction(points.iter().map(|p| p.range_compliant), n);
    let quality_views_pass = quality_views_pass(
        [view_factor_fraction, view_depth_fraction, view_range_fraction],
        settings,
    );
    Ok(ViewResult {
        points,
        view_factor_fraction,
        view_depth_fraction,
        view_range_fraction,
        quality_views_pass,
    })
}

pub fn view_factor_fraction(config: &RoomConfig, grid: &AnalysisGrid) -> Result<f64> {
    Ok(assess(config, grid, &ViewSettings::default())?.view_factor_fraction)
}

pub fn view_depth_fraction(config: &RoomConfig, grid: &AnalysisGrid) -> f64 {
    let limit = ViewSettings::default().depth_multiplier * config.head_height();
    fraction(
        grid.points.iter().map(|p| limit > 0.0 && p.y <= limit + 1e-9),
        grid.len(),
    )
}

pub fn view_range_fraction(config: &RoomConfig, grid: &AnalysisGrid) -> f64 {
    let rects = config.window_rects();
    let min_spread = ViewSettings::default().range_deg;
    fraction(
        grid.points
            .iter()
            .map(|p| bearing_spread_deg(p.x, p.y, &rects) >= min_spread),
        grid.len(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_grid, DesignSpace, Divisions, GridSpec, Orientation, Shading};

    fn room(width: f64, depth: f64, sill: f64, height: f64) -> RoomConfig {
        RoomConfig {
            width,
            depth,
            height: 3.5,
            orientation: Orientation::S,
            reflectance: 0.4,
            shading: Shading::None,
            sill_height: sill,
            window_height: height,
            divisions: Divisions::OneFullWidth,
            glazing_transmittance: 0.85,
        }
    }

    #[test]
    fn ratings_follow_bins() {
        let s = ViewSettings::default();
        assert_eq!(s.rating(0.0), 1);
        assert_eq!(s.rating(0.05), 2);
        assert_eq!(s.rating(0.19), 2);
        assert_eq!(s.rating(0.2), 3);
        assert_eq!(s.rating(0.7), 4);
        assert_eq!(s.rating(6.0), 5);
    }

    #[test]
    fn zero_window_gives_zero_fractions() {
        let c = room(6.0, 7.0, 0.5, 0.0);
        let g = build_grid(&c, &GridSpec::default()).unwrap();
        let r = assess(&c, &g, &ViewSettings::default()).unwrap();
        assert_eq!(r.view_factor_fraction, 0.0);
        assert_eq!(r.view_range_fraction, 0.0);
        let c = room(6.0, 7.0, 0.0, 0.0);
        assert_eq!(view_depth_fraction(&c, &g), 0.0);
    }

    #[test]
    fn eye_in_plane_errors() {
        let rects = room(3.0, 4.0, 0.5, 1.2).window_rects();
        assert!(glazing_solid_angle(Vec3::new(1.0, 0.0, 1.2), &rects).is_err());
    }

    #[test]
    fn depth_limit_beyond_room() {
        // head 2.9 m -> limit 8.7 m > 7 m deep room
        let c = room(6.0, 7.0, 0.5, 2.4);
        let g = build_grid(&c, &GridSpec::default()).unwrap();
        assert_eq!(view_depth_fraction(&c, &g), 1.0);
    }

    #[test]
    fn depth_band_in_deep_room() {
        // rows at 0.25 + 0.5k; 8.7 m band keeps rows up to 8.25 -> 17 of 20
        let c = room(8.0, 10.0, 0.5, 2.4);
        let g = build_grid(&c, &GridSpec::default()).unwrap();
        assert!((view_depth_fraction(&c, &g) - 17.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn centred_range_threshold() {
        // 6 m window: 2 atan(3/d) >= 90 deg iff d <= 3
        let rects = room(6.0, 7.0, 0.5, 1.2).window_rects();
        assert!(bearing_spread_deg(3.0, 2.99, &rects) >= 90.0);
        assert!((bearing_spread_deg(3.0, 3.0, &rects) - 90.0).abs() < 1e-9);
        assert!(bearing_spread_deg(3.0, 3.01, &rects) < 90.0);
        let none = room(6.0, 7.0, 0.5, 0.0).window_rects();
        assert_eq!(bearing_spread_deg(3.0, 1.0, &none), 0.0);
    }

    #[test]
    fn pass_rule_two_of_three() {
        let s = ViewSettings::default();
        assert!(quality_views_pass([0.8, 0.8, 0.1], &s));
        assert!(quality_views_pass([0.75, 0.1, 0.75], &s));
        assert!(!quality_views_pass([0.8, 0.7, 0.1], &s));
        assert!(!quality_views_pass([0.749_999, 0.75 - 1e-12, 1.0], &s));
    }

    #[test]
    fn fractions_in_unit_interval_for_table1() {
        let spec = GridSpec::default();
        for c in DesignSpace::table1().enumerate().unwrap().iter().step_by(7) {
            let g = build_grid(c, &spec).unwrap();
            let r = assess(c, &g, &ViewSettings::default()).unwrap();
            for f in r.fractions() {
                assert!((0.0..=1.0).contains(&f));
            }
        }
    }

    #[test]
    fn point_table_export() {
        let c = room(3.0, 4.0, 0.5, 1.2);
        let g = build_grid(&c, &GridSpec::default()).unwrap();
        let r = assess(&c, &g, &ViewSettings::default()).unwrap();
        let mut buf = Vec::new();
        r.write_points(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + g.len());
        assert!(text.starts_with("x,y,solid_angle_sr,rating"));
    }
}
