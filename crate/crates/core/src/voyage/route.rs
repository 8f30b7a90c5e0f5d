use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seaway::normalize_deg;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const CELL_DEG: f64 = 0.5;
/// Spacing of the dense great-circle samples used for cell traversal.
pub const SAMPLE_STEP_KM: f64 = 1.0;

const LAT_BINS: i32 = (180.0 / CELL_DEG) as i32;
const LON_BINS: i32 = (360.0 / CELL_DEG) as i32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !lon.is_finite() {
            return Err(Error::Route(format!("invalid coordinate ({lat}, {lon})")));
        }
        Ok(Self {
            lat,
            lon: wrap_lon(lon),
        })
    }

    fn unit(&self) -> [f64; 3] {
        let (p, l) = (self.lat.to_radians(), self.lon.to_radians());
        [p.cos() * l.cos(), p.cos() * l.sin(), p.sin()]
    }

    fn from_unit(v: [f64; 3]) -> Self {
        let lat = v[2].clamp(-1.0, 1.0).asin().to_degrees();
        let lon = v[1].atan2(v[0]).to_degrees();
        Self {
            lat,
            lon: wrap_lon(lon),
        }
    }
}

fn wrap_lon(lon: f64) -> f64 {
    let l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if l >= 180.0 {
        -180.0
    } else {
        l
    }
}

/// Half-degree grid cell; bins count from (−90°, −180°).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub lat_bin: i32,
    pub lon_bin: i32,
}

impl GridCell {
    pub fn new(lat_bin: i32, lon_bin: i32) -> Result<Self> {
        if !(0..LAT_BINS).contains(&lat_bin) || !(0..LON_BINS).contains(&lon_bin) {
            return Err(Error::Format(format!("grid bin ({lat_bin}, {lon_bin}) out of range")));
        }
        Ok(Self { lat_bin, lon_bin })
    }

    pub fn containing(p: LatLon) -> Self {
        let lat_bin = (((p.lat + 90.0) / CELL_DEG).floor() as i32).clamp(0, LAT_BINS - 1);
        let lon_bin = (((wrap_lon(p.lon) + 180.0) / CELL_DEG).floor() as i32).rem_euclid(LON_BINS);
        Self { lat_bin, lon_bin }
    }

    pub fn center(&self) -> LatLon {
        LatLon {
            lat: -90.0 + (self.lat_bin as f64 + 0.5) * CELL_DEG,
            lon: -180.0 + (self.lon_bin as f64 + 0.5) * CELL_DEG,
        }
    }

    /// (south, west, north, east) in degrees.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let s = -90.0 + self.lat_bin as f64 * CELL_DEG;
        let w = -180.0 + self.lon_bin as f64 * CELL_DEG;
        (s, w, s + CELL_DEG, w + CELL_DEG)
    }

    /// True for the same cell or one of its eight neighbours (longitude wraps).
    pub fn touches(&self, other: &GridCell) -> bool {
        let dlat = (self.lat_bin - other.lat_bin).abs();
        let dlon = (self.lon_bin - other.lon_bin).rem_euclid(LON_BINS);
        dlat <= 1 && (dlon <= 1 || dlon == LON_BINS - 1)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Central angle (rad) between two points.
pub fn central_angle(a: LatLon, b: LatLon) -> f64 {
    let (u, v) = (a.unit(), b.unit());
    let c = cross(u, v);
    dot(c, c).sqrt().atan2(dot(u, v))
}

pub fn distance_km(a: LatLon, b: LatLon) -> f64 {
    EARTH_RADIUS_KM * central_angle(a, b)
}

/// Initial compass bearing (deg) of the great circle from `a` to `b`.
pub fn forward_azimuth(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dl = (b.lon - a.lon).to_radians();
    let y = dl.sin() * p2.cos();
    let x = p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos();
    normalize_deg(y.atan2(x).to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub cell: GridCell,
    /// Cell centre.
    pub position: LatLon,
    /// Great-circle distance from the start to where the route enters the cell.
    pub along_track_km: f64,
    /// Compass course of the great circle at the cell entry.
    pub course_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub start: LatLon,
    pub end: LatLon,
    /// Exact great-circle length.
    pub distance_km: f64,
    /// Start → cell centres → end polyline length.
    pub snapped_length_km: f64,
    pub waypoints: Vec<Waypoint>,
}

/// Cells crossed by the great circle from `start` to `end`, in order.
pub fn great_circle_route(start: LatLon, end: LatLon) -> Result<Route> {
    let start = LatLon::new(start.lat, start.lon)?;
    let end = LatLon::new(end.lat, end.lon)?;
    let omega = central_angle(start, end);
    if omega > std::f64::consts::PI - 1e-9 {
        return Err(Error::Route(
            "endpoints are antipodal; the great circle is ambiguous".into(),
        ));
    }
    let distance = EARTH_RADIUS_KM * omega;
    let (a, b) = (start.unit(), end.unit());
    let n = (distance / SAMPLE_STEP_KM).ceil().max(1.0) as usize;
    let point = |f: f64| -> LatLon {
        if omega < 1e-15 {
            return start;
        }
        let s = omega.sin();
        let wa = ((1.0 - f) * omega).sin() / s;
        let wb = (f * omega).sin() / s;
        LatLon::from_unit([
            wa * a[0] + wb * b[0],
            wa * a[1] + wb * b[1],
            wa * a[2] + wb * b[2],
        ])
    };
    let samples: Vec<LatLon> = (0..=n).map(|i| point(i as f64 / n as f64)).collect();
    let course_at = |i: usize| -> f64 {
        if omega < 1e-15 {
            0.0
        } else if i < n {
            forward_azimuth(samples[i], samples[i + 1])
        } else {
            normalize_deg(forward_azimuth(samples[n], samples[n - 1]) + 180.0)
        }
    };

    let mut waypoints: Vec<Waypoint> = Vec::new();
    for (i, p) in samples.iter().enumerate() {
        let cell = GridCell::containing(*p);
        if waypoints.last().map(|w| w.cell) == Some(cell) {
            continue;
        }
        waypoints.push(Waypoint {
            cell,
            position: cell.center(),
            along_track_km: distance * i as f64 / n as f64,
            course_deg: course_at(i),
        });
    }
    let mut snapped = distance_km(start, waypoints[0].position);
    for w in waypoints.windows(2) {
        snapped += distance_km(w[0].position, w[1].position);
    }
    snapped += distance_km(waypoints[waypoints.len() - 1].position, end);
    Ok(Route {
        start,
        end,
        distance_km: distance,
        snapped_length_km: snapped,
        waypoints,
    })
}
