mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use shoebox::ann::{Activation, NetShape, SurrogateNet};
use shoebox::scene::{build_grid, DesignSpace, Divisions, GridSpec, Orientation, RoomConfig, Shading, WindowRect};
use shoebox::solar::{sun_position, Site};
use shoebox::views::{assess, bearing_spread_deg, glazing_solid_angle, ViewSettings};
use shoebox::geometry::Vec3;

fn room(divisions: Divisions) -> RoomConfig {
    RoomConfig {
        width: 6.0,
        depth: 8.0,
        height: 3.5,
        orientation: Orientation::S,
        reflectance: 0.5,
        shading: Shading::None,
        sill_height: 0.8,
        window_height: 1.8,
        divisions,
        glazing_transmittance: 0.85,
    }
}

#[test]
fn solar_matches_noaa_at_tehran() {
    let s = Site::TEHRAN;
    for (day, hour) in SOLAR_SAMPLES {
        let ours = sun_position(s.latitude, s.longitude, s.tz_meridian, day, hour);
        let (alt, az) = noaa_sun(s.latitude, s.longitude, s.tz_meridian / 15.0, day, hour);
        assert!((ours.altitude - alt).abs() < 0.5, "day {day} {hour}h: altitude {} vs {alt}", ours.altitude);
        let daz = (ours.azimuth - az + 540.0).rem_euclid(360.0) - 180.0;
        assert!(daz.abs() < 0.5, "day {day} {hour}h: azimuth {} vs {az}", ours.azimuth);
    }
}

#[test]
fn solar_matches_noaa_elsewhere() {
    // southern hemisphere and a site far from its zone meridian
    for (lat, lon, tz) in [(-33.87, 151.21, 10.0), (64.15, -21.94, 0.0)] {
        for (day, hour) in SOLAR_SAMPLES {
            let ours = sun_position(lat, lon, tz * 15.0, day, hour);
            let (alt, az) = noaa_sun(lat, lon, tz, day, hour);
            assert!((ours.altitude - alt).abs() < 0.5, "{lat} day {day}: {} vs {alt}", ours.altitude);
            if alt > 1.0 {
                let daz = (ours.azimuth - az + 540.0).rem_euclid(360.0) - 180.0;
                assert!(daz.abs() < 0.6, "{lat} day {day}: azimuth {} vs {az}", ours.azimuth);
            }
        }
    }
}

#[test]
fn solid_angle_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..5 {
        let rect = WindowRect {
            left: rng.random_range(0.0..2.0),
            sill: rng.random_range(0.5..1.1),
            width: rng.random_range(0.5..4.0),
            height: rng.random_range(1.0..2.4),
        };
        let eye = (rng.random_range(-1.0..5.0), rng.random_range(0.5..4.0), rng.random_range(0.8..2.0));
        let exact = glazing_solid_angle(Vec3::new(eye.0, eye.1, eye.2), &[rect]).unwrap();
        let mc = mc_solid_angle(eye, &[rect], 1000, k);
        assert!((mc - exact).abs() <= 0.01 * exact, "pair {k}: {mc} vs {exact}");
    }
}

#[test]
fn solid_angle_of_divided_glazing() {
    let rects = room(Divisions::ThreeEqual).window_rects();
    let eye = (2.0, 1.5, 1.2);
    let exact = glazing_solid_angle(Vec3::new(eye.0, eye.1, eye.2), &rects).unwrap();
    let mc = mc_solid_angle(eye, &rects, 1000, 9);
    assert!((mc - exact).abs() <= 0.01 * exact, "{mc} vs {exact}");
}

#[test]
fn bearing_spread_matches_brute_force() {
    for divisions in [Divisions::OneFullWidth, Divisions::ThreeEqual] {
        let c = room(divisions);
        let rects = c.window_rects();
        let grid = build_grid(&c, &GridSpec::default()).unwrap();
        for p in grid.points.iter().step_by(7) {
            let exact = bearing_spread_deg(p.x, p.y, &rects);
            let brute = brute_force_spread(p.x, p.y, &rects, 3600);
            assert!((exact - brute).abs() <= 0.1, "({}, {}): {exact} vs {brute}", p.x, p.y);
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let norm = DesignSpace::table1().norm_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (seed, hidden_act, out_act) in [
        (1, Activation::Relu, Activation::Sigmoid),
        (2, Activation::Tanh, Activation::Sigmoid),
        (3, Activation::Relu, Activation::Identity),
    ] {
        let shape = NetShape {
            hidden: 12,
            hidden_activation: hidden_act,
            output_activation: out_act,
            ..NetShape::default()
        };
        let net = SurrogateNet::seeded(shape, norm, seed);
        let (xs, ys) = random_batch(&mut rng, 6, shape.inputs, shape.outputs);
        let err = gradient_check(&net, &xs, &ys, 1e-5);
        assert!(err < 1e-4, "seed {seed}: relative error {err}");
    }
}

#[test]
fn full_width_view_depth_band() {
    // rows at y = 0.25, 0.75, ...; limit 3 * 2.6 = 7.8 keeps all 16 rows
    let c = room(Divisions::OneFullWidth);
    let grid = build_grid(&c, &GridSpec::default()).unwrap();
    let v = assess(&c, &grid, &ViewSettings::default()).unwrap();
    assert_eq!(v.view_depth_fraction, 1.0);
    let shallow = RoomConfig { depth: 10.0, sill_height: 0.5, window_height: 1.2, ..c };
    let grid = build_grid(&shallow, &GridSpec::default()).unwrap();
    let v = assess(&shallow, &grid, &ViewSettings::default()).unwrap();
    // limit 5.1: rows 0.25 .. 4.75 -> 10 of 20
    assert_eq!(v.view_depth_fraction, 0.5);
}
