//! Voyage evaluation: great-circle routes over a half-degree grid, weather
//! histograms, ensemble statistics and comparison reports.

mod histogram;
mod report;
mod route;
mod stats;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::{purpose, StreamKey};
use crate::seaway::{normalize_deg, BimodalSeaState};

pub use histogram::{
    synthetic_histogram, Condition, HistogramEntry, SampledCondition, WeatherHistogram, DIR_BIN,
    HISTOGRAM_COLUMNS, HS_BIN, SYNTHETIC_BOX, SYNTHETIC_PROTOTYPES, TP_BIN,
};
pub use report::{
    compare_report, format_error_row, format_percent, worst_case, worst_condition, ComparisonReport,
    DofStd, ErrorRow, KdeTriplet, StatSet, WorstCase, DOF_NAMES,
};
pub use route::{
    central_angle, distance_km, forward_azimuth, great_circle_route, GridCell, LatLon, Route,
    Waypoint, CELL_DEG, EARTH_RADIUS_KM, SAMPLE_STEP_KM,
};
pub use stats::{
    ape, cross_correlation_peak, ensemble_std, ensemble_std_of, gaussian_kde, mean, median,
    population_std, quantile, silverman_bandwidth, Bandwidth, Kde, KDE_GRID_POINTS, KDE_SPAN,
};

pub const NORFOLK: LatLon = LatLon {
    lat: 36.85,
    lon: -76.29,
};
pub const BERGEN: LatLon = LatLon {
    lat: 60.39,
    lon: 5.32,
};

/// Primary relative heading rounded to the 30° training grid.
pub fn heading_bin(relative_deg: f64) -> u32 {
    ((normalize_deg(relative_deg) / 30.0).round() as u32 % 12) * 30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedWaypoint {
    pub index: usize,
    pub waypoint: Waypoint,
    pub sample: SampledCondition,
    /// Sea state relative to the leg course (0° = head seas).
    pub relative: BimodalSeaState,
    pub heading_bin: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoyagePlan {
    pub route: Route,
    pub speed_kts: f64,
    pub seed: u64,
    pub waypoints: Vec<PlannedWaypoint>,
}

impl VoyagePlan {
    /// Samples an independent sea state for every waypoint of `route`.
    pub fn sample(
        route: Route,
        histogram: &WeatherHistogram,
        speed_kts: f64,
        seed: u64,
        allow_fallback: bool,
    ) -> Result<Self> {
        if !(speed_kts > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "speed must be > 0, got {speed_kts}"
            )));
        }
        let mut waypoints = Vec::with_capacity(route.waypoints.len());
        for (index, w) in route.waypoints.iter().enumerate() {
            let mut rng = StreamKey::new(seed, purpose::VOYAGE, index as u64).rng();
            let sample = histogram.sample(&w.cell, &mut rng, allow_fallback)?;
            let relative = sample.sea_state.relative_to(w.course_deg);
            waypoints.push(PlannedWaypoint {
                index,
                waypoint: *w,
                sample,
                relative,
                heading_bin: heading_bin(relative.primary.dir),
            });
        }
        Ok(Self {
            route,
            speed_kts,
            seed,
            waypoints,
        })
    }

    /// Evenly spaced subset of at most `n` waypoints, always keeping the ends.
    pub fn subsample(&self, n: usize) -> Vec<&PlannedWaypoint> {
        let m = self.waypoints.len();
        if n == 0 || m == 0 {
            return Vec::new();
        }
        if n >= m {
            return self.waypoints.iter().collect();
        }
        if n == 1 {
            return vec![&self.waypoints[0]];
        }
        let mut idx: Vec<usize> = (0..n)
            .map(|i| ((i as f64) * (m - 1) as f64 / (n - 1) as f64).round() as usize)
            .collect();
        idx.dedup();
        idx.into_iter().map(|i| &self.waypoints[i]).collect()
    }
}

/// Per-waypoint motion statistics of one voyage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSummary {
    pub index: usize,
    pub position: LatLon,
    pub course_deg: f64,
    pub along_track_km: f64,
    pub sea_state: BimodalSeaState,
    pub heading_bin: u32,
    pub from_aggregate: bool,
    /// Fidelity tag → ensemble standard deviations.
    pub std: std::collections::BTreeMap<String, DofStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoyageSummary {
    pub config_hash: String,
    pub master_seed: u64,
    pub speed_kts: f64,
    pub route_distance_km: f64,
    pub route_snapped_km: f64,
    pub route_waypoints: usize,
    pub waypoints: Vec<WaypointSummary>,
    pub report: ComparisonReport,
    pub worst: Option<WorstCase>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heading_bins() {
        assert_eq!(heading_bin(0.0), 0);
        assert_eq!(heading_bin(14.9), 0);
        assert_eq!(heading_bin(15.1), 30);
        assert_eq!(heading_bin(350.0), 0);
        assert_eq!(heading_bin(-100.0), 270);
    }

    #[test]
    fn voyage_sampling_is_deterministic() {
        let h = synthetic_histogram(2);
        let route = great_circle_route(NORFOLK, BERGEN).unwrap();
        let a = VoyagePlan::sample(route.clone(), &h, 10.0, 5, true).unwrap();
        let b = VoyagePlan::sample(route, &h, 10.0, 5, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.waypoints.len(), a.route.waypoints.len());
        assert!(a.waypoints.iter().all(|w| w.sample.sea_state.primary.hs > 0.0));
        let s = a.subsample(10);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0].index, 0);
        assert_eq!(s[9].index, a.waypoints.len() - 1);
    }
}
