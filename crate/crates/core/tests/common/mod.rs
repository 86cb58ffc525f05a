//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shoebox::ann::SurrogateNet;
use shoebox::scene::WindowRect;

/// NOAA solar calculator (Meeus low-precision series), no refraction.
/// Returns `(altitude, azimuth)` in degrees for a day of 2023 and a local
/// standard time with the given UTC offset.
pub fn noaa_sun(lat: f64, lon: f64, utc_offset: f64, day_of_year: u32, local_hour: f64) -> (f64, f64) {
    let jd = 2459945.5 + (day_of_year as f64 - 1.0) + (local_hour - utc_offset) / 24.0;
    let t = (jd - 2451545.0) / 36525.0;
    let l0 = (280.46646 + t * (36000.76983 + t * 0.0003032)).rem_euclid(360.0);
    let m = 357.52911 + t * (35999.05029 - 0.0001537 * t);
    let e = 0.016708634 - t * (0.000042037 + 0.0000001267 * t);
    let mr = m.to_radians();
    let c = mr.sin() * (1.914602 - t * (0.004817 + 0.000014 * t))
        + (2.0 * mr).sin() * (0.019993 - 0.000101 * t)
        + (3.0 * mr).sin() * 0.000289;
    let omega = 125.04 - 1934.136 * t;
    let app_long = l0 + c - 0.00569 - 0.00478 * omega.to_radians().sin();
    let eps0 = 23.0 + (26.0 + (21.448 - t * (46.815 + t * (0.00059 - t * 0.001813))) / 60.0) / 60.0;
    let eps = (eps0 + 0.00256 * omega.to_radians().cos()).to_radians();
    let decl = (eps.sin() * app_long.to_radians().sin()).asin();
    let y = (eps / 2.0).tan().powi(2);
    let l0r = l0.to_radians();
    let eot = 4.0
        * (y * (2.0 * l0r).sin() - 2.0 * e * mr.sin() + 4.0 * e * y * mr.sin() * (2.0 * l0r).cos()
            - 0.5 * y * y * (4.0 * l0r).sin()
            - 1.25 * e * e * (2.0 * mr).sin())
        .to_degrees();
    let tst = (local_hour * 60.0 + eot + 4.0 * lon - 60.0 * utc_offset).rem_euclid(1440.0);
    let mut ha = tst / 4.0 - 180.0;
    if ha < -180.0 {
        ha += 360.0;
    }
    let latr = lat.to_radians();
    let cos_zen = latr.sin() * decl.sin() + latr.cos() * decl.cos() * ha.to_radians().cos();
    let zen = cos_zen.clamp(-1.0, 1.0).acos();
    let cos_az = ((latr.sin() * zen.cos()) - decl.sin()) / (latr.cos() * zen.sin());
    let a = cos_az.clamp(-1.0, 1.0).acos().to_degrees();
    let az = if ha > 0.0 { (a + 180.0).rem_euclid(360.0) } else { (540.0 - a).rem_euclid(360.0) };
    (90.0 - zen.to_degrees(), az)
}

/// Monte-Carlo solid angle of glazing in the plane `y = 0` seen from `eye`
/// (`eye.1 > 0`), with `n * n` stratified jittered directions over the
/// hemisphere facing the plane.
pub fn mc_solid_angle(eye: (f64, f64, f64), rects: &[WindowRect], n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ex, ey, ez) = eye;
    let mut hits = 0usize;
    for i in 0..n {
        for j in 0..n {
            // cos(theta) uniform in (0, 1] gives uniform solid-angle density
            let cos_t = (i as f64 + rng.random::<f64>()) / n as f64;
            let phi = 2.0 * PI * (j as f64 + rng.random::<f64>()) / n as f64;
            if cos_t <= 0.0 {
                continue;
            }
            let sin_t = (1.0 - cos_t * cos_t).sqrt();
            let t = ey / cos_t;
            let x = ex + t * sin_t * phi.cos();
            let z = ez + t * sin_t * phi.sin();
            if rects.iter().any(|r| x >= r.left && x <= r.right() && z >= r.sill && z <= r.head()) {
                hits += 1;
            }
        }
    }
    2.0 * PI * hits as f64 / (n * n) as f64
}

/// Horizontal angle between the extreme bearings (sampled every
/// `180 / samples` degrees) from `(x, y)` that hit any glazing span.
pub fn brute_force_spread(x: f64, y: f64, rects: &[WindowRect], samples: usize) -> f64 {
    let step = 180.0 / samples as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=samples {
        let bearing = -90.0 + k as f64 * step;
        if bearing.abs() >= 90.0 {
            continue;
        }
        let hit_x = x + y * bearing.to_radians().tan();
        if rects.iter().any(|r| hit_x >= r.left && hit_x <= r.right()) {
            lo = lo.min(bearing);
            hi = hi.max(bearing);
        }
    }
    if hi < lo {
        0.0
    } else {
        hi - lo
    }
}

/// Largest relative error between backprop and central finite differences.
pub fn gradient_check(net: &SurrogateNet, xs: &[Vec<f64>], ys: &[Vec<f64>], h: f64) -> f64 {
    let (grad, _) = net.backward(xs, ys).unwrap();
    let analytic = grad.flat();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        let original = *probe.params_mut().nth(k).unwrap();
        *probe.params_mut().nth(k).unwrap() = original + h;
        let up = probe.loss(xs, ys).unwrap();
        *probe.params_mut().nth(k).unwrap() = original - h;
        let down = probe.loss(xs, ys).unwrap();
        *probe.params_mut().nth(k).unwrap() = original;
        let numeric = (up - down) / (2.0 * h);
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-7);
        worst = worst.max(rel);
    }
    worst
}

/// Random batch of encoded-looking inputs and `[0, 1]` targets.
pub fn random_batch(rng: &mut ChaCha8Rng, n: usize, inputs: usize, outputs: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let xs = (0..n)
        .map(|_| (0..inputs).map(|_| rng.random::<f64>()).collect())
        .collect();
    let ys = (0..n)
        .map(|_| (0..outputs).map(|_| rng.random::<f64>()).collect())
        .collect();
    (xs, ys)
}

/// Twelve (day of year, clock hour) samples across the year.
pub const SOLAR_SAMPLES: [(u32, f64); 12] = [
    (15, 9.0),
    (46, 12.0),
    (74, 15.5),
    (105, 8.25),
    (135, 13.0),
    (172, 10.5),
    (196, 17.0),
    (227, 11.75),
    (258, 14.0),
    (288, 9.5),
    (319, 12.5),
    (355, 16.0),
];
