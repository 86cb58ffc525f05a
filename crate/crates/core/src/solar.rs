//! Solar geometry: declination, equation of time, hour angle and the
//! resulting altitude/azimuth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Geographic location with the meridian of its standard time zone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub latitude: f64,
    /// Degrees east positive.
    pub longitude: f64,
    pub tz_meridian: f64,
}

impl Site {
    pub const TEHRAN: Site = Site {
        latitude: 35.69,
        longitude: 51.39,
        tz_meridian: 52.5,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SunPosition {
    /// Degrees above the horizon.
    pub altitude: f64,
    /// Degrees clockwise from north, in `[0, 360)`.
    pub azimuth: f64,
    pub day: u32,
    /// Apparent solar time, hours.
    pub solar_hour: f64,
}

impl SunPosition {
    /// Unit vector towards the sun as (east, north, up).
    pub fn direction(&self) -> (f64, f64, f64) {
        let (sa, ca) = self.altitude.to_radians().sin_cos();
        let (sz, cz) = self.azimuth.to_radians().sin_cos();
        (ca * sz, ca * cz, sa)
    }

    pub fn is_up(&self) -> bool {
        self.altitude > 0.0
    }
}

fn day_angle(day: u32, solar_hour: f64) -> f64 {
    2.0 * PI * (day as f64 - 1.0 + (solar_hour - 12.0) / 24.0) / 365.0
}

/// Solar declination in radians (Spencer's Fourier series).
pub fn declination(day: u32, solar_hour: f64) -> f64 {
    let g = day_angle(day, solar_hour);
    0.006918 - 0.399912 * g.cos() + 0.070257 * g.sin() - 0.006758 * (2.0 * g).cos()
        + 0.000907 * (2.0 * g).sin()
        - 0.002697 * (3.0 * g).cos()
        + 0.00148 * (3.0 * g).sin()
}

/// Equation of time in minutes (Spencer).
pub fn equation_of_time(day: u32, clock_hour: f64) -> f64 {
    let g = day_angle(day, clock_hour);
    229.18
        * (0.000075 + 0.001868 * g.cos() - 0.032077 * g.sin() - 0.014615 * (2.0 * g).cos()
            - 0.040849 * (2.0 * g).sin())
}

/// Converts local standard time to apparent solar time.
pub fn solar_time(site: &Site, day: u32, clock_hour: f64) -> f64 {
    clock_hour + (4.0 * (site.longitude - site.tz_meridian) + equation_of_time(day, clock_hour)) / 60.0
}

/// Sun position at a given apparent solar time.
pub fn sun_position_solar(latitude: f64, day: u32, solar_hour: f64) -> SunPosition {
    let phi = latitude.to_radians();
    let delta = declination(day, solar_hour);
    let hour_angle = (15.0 * (solar_hour - 12.0)).to_radians();
    let sin_alt = (phi.sin() * delta.sin() + phi.cos() * delta.cos() * hour_angle.cos()).clamp(-1.0, 1.0);
    let alt = sin_alt.asin();
    let denom = alt.cos() * phi.cos();
    let azimuth = if denom.abs() < 1e-12 {
        180.0
    } else {
        let cos_az = ((delta.sin() - sin_alt * phi.sin()) / denom).clamp(-1.0, 1.0);
        let az = cos_az.acos().to_degrees();
        // afternoon sun is west of the meridian
        if hour_angle.sin() > 0.0 {
            360.0 - az
        } else {
            az
        }
    };
    SunPosition {
        altitude: alt.to_degrees(),
        azimuth: azimuth.rem_euclid(360.0),
        day,
        solar_hour,
    }
}

/// Sun position at a local standard (clock) time.
pub fn sun_position(
    latitude: f64,
    longitude: f64,
    tz_meridian: f64,
    day: u32,
    clock_hour: f64,
) -> SunPosition {
    let site = Site {
        latitude,
        longitude,
        tz_meridian,
    };
    sun_position_solar(latitude, day, solar_time(&site, day, clock_hour))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equinox_noon_altitude() {
        let s = sun_position_solar(Site::TEHRAN.latitude, 80, 12.0);
        assert!((s.altitude - (90.0 - 35.69)).abs() < 1.0, "{}", s.altitude);
        assert!((s.azimuth - 180.0).abs() < 1e-3, "{}", s.azimuth);
    }

    #[test]
    fn midnight_is_below_horizon() {
        for day in [1, 80, 172, 266, 355] {
            assert!(sun_position_solar(Site::TEHRAN.latitude, day, 0.0).altitude < 0.0);
        }
    }

    #[test]
    fn seasonal_noon_ordering() {
        let lat = Site::TEHRAN.latitude;
        let summer = sun_position_solar(lat, 172, 12.0).altitude;
        let equinox = sun_position_solar(lat, 80, 12.0).altitude;
        let winter = sun_position_solar(lat, 355, 12.0).altitude;
        assert!(summer > equinox && equinox > winter);
    }

    #[test]
    fn morning_east_afternoon_west() {
        let am = sun_position_solar(Site::TEHRAN.latitude, 172, 9.0);
        let pm = sun_position_solar(Site::TEHRAN.latitude, 172, 15.0);
        assert!(am.azimuth > 0.0 && am.azimuth < 180.0);
        assert!(pm.azimuth > 180.0 && pm.azimuth < 360.0);
        assert!((am.azimuth + pm.azimuth - 360.0).abs() < 0.5);
    }

    #[test]
    fn direction_is_unit() {
        let s = sun_position(35.69, 51.39, 52.5, 200, 10.0);
        let (e, n, u) = s.direction();
        assert!(((e * e + n * n + u * u) - 1.0).abs() < 1e-12);
    }
}
