use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, StreamKey};
use crate::seaway::{normalize_deg, BimodalSeaState, SpectrumParams};

use super::route::{GridCell, LatLon};

pub const HISTOGRAM_COLUMNS: [&str; 9] = [
    "lat_bin", "lon_bin", "hs1", "tp1", "dir1", "hs2", "tp2", "dir2", "count",
];
pub const HS_BIN: f64 = 0.5;
pub const TP_BIN: f64 = 0.5;
pub const DIR_BIN: f64 = 30.0;

fn bin(x: f64, w: f64) -> f64 {
    (x / w).round() * w
}

fn bin_dir(d: f64) -> f64 {
    let b = normalize_deg(bin(normalize_deg(d), DIR_BIN));
    if b >= 360.0 - 1e-9 {
        0.0
    } else {
        b
    }
}

/// One binned histogram row. Directions are compass "coming from" degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub hs1: f64,
    pub tp1: f64,
    pub dir1: f64,
    pub hs2: f64,
    pub tp2: f64,
    pub dir2: Option<f64>,
    pub count: u64,
}

impl HistogramEntry {
    fn binned(mut self) -> Self {
        self.hs1 = bin(self.hs1, HS_BIN);
        self.tp1 = bin(self.tp1, TP_BIN);
        self.dir1 = bin_dir(self.dir1);
        self.hs2 = bin(self.hs2, HS_BIN);
        self.tp2 = bin(self.tp2, TP_BIN);
        self.dir2 = self.dir2.map(bin_dir);
        self
    }

    fn key(&self) -> [i64; 6] {
        let q = |x: f64| (x * 2.0).round() as i64;
        [
            q(self.hs1),
            q(self.tp1),
            q(self.dir1),
            q(self.hs2),
            q(self.tp2),
            self.dir2.map(q).unwrap_or(-1),
        ]
    }

    /// Secondary-minus-primary direction, binned to [0, 360).
    pub fn direction_difference(&self) -> Option<f64> {
        self.dir2.map(|d2| bin_dir(d2 - self.dir1))
    }
}

/// Condition identity used for the training campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub hs1: f64,
    pub tp1: f64,
    pub hs2: f64,
    pub tp2: f64,
    /// Secondary direction relative to the primary (deg).
    pub ddir: f64,
    pub count: u64,
}

impl Condition {
    fn key(&self) -> [f64; 5] {
        [self.hs1, self.tp1, self.hs2, self.tp2, self.ddir]
    }

    /// Sea state for a given primary relative heading.
    pub fn sea_state(&self, primary_heading_deg: f64) -> Result<BimodalSeaState> {
        BimodalSeaState::new(
            SpectrumParams::new(self.hs1, self.tp1, primary_heading_deg)?,
            SpectrumParams::new(self.hs2, self.tp2, primary_heading_deg + self.ddir)?,
        )
    }
}

/// Draw from a histogram cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledCondition {
    /// Compass directions.
    pub sea_state: BimodalSeaState,
    pub entry: HistogramEntry,
    /// Drawn from the basin aggregate because the cell was absent.
    pub from_aggregate: bool,
    /// Secondary direction filled from the most probable difference.
    pub dir2_imputed: bool,
}

/// Per-cell weather statistics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeatherHistogram {
    pub cells: BTreeMap<GridCell, Vec<HistogramEntry>>,
}

impl WeatherHistogram {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.cells.values().flatten().map(|e| e.count).sum()
    }

    /// Adds a row after binning, merging duplicates.
    pub fn insert(&mut self, cell: GridCell, entry: HistogramEntry) {
        let e = entry.binned();
        let list = self.cells.entry(cell).or_default();
        match list.iter_mut().find(|x| x.key() == e.key()) {
            Some(x) => x.count += e.count,
            None => {
                list.push(e);
                list.sort_by_key(|x| x.key());
            }
        }
    }

    /// Probability of each entry of a cell.
    pub fn probabilities(&self, cell: &GridCell) -> Option<Vec<f64>> {
        let list = self.cells.get(cell)?;
        let total: u64 = list.iter().map(|e| e.count).sum();
        Some(list.iter().map(|e| e.count as f64 / total as f64).collect())
    }

    /// All cells merged into one list.
    pub fn aggregate(&self) -> Vec<HistogramEntry> {
        let mut merged: BTreeMap<[i64; 6], HistogramEntry> = BTreeMap::new();
        for e in self.cells.values().flatten() {
            merged
                .entry(e.key())
                .and_modify(|x| x.count += e.count)
                .or_insert(*e);
        }
        merged.into_values().collect()
    }

    /// Direction difference with the largest count among `entries`.
    fn modal_difference(entries: &[HistogramEntry]) -> Option<f64> {
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        for e in entries {
            if let Some(d) = e.direction_difference() {
                *counts.entry(d.round() as i64).or_default() += e.count;
            }
        }
        counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(d, _)| d as f64)
    }

    pub fn most_probable_difference(&self, cell: Option<&GridCell>) -> Option<f64> {
        cell.and_then(|c| self.cells.get(c))
            .and_then(|l| Self::modal_difference(l))
            .or_else(|| Self::modal_difference(&self.aggregate()))
    }

    /// Distinct (hs₁, tp₁, hs₂, tp₂, Δdir) combinations, most frequent first.
    pub fn top_k_conditions(&self, k: usize) -> Result<Vec<Condition>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if self.is_empty() {
            return Err(Error::Sampling("weather histogram is empty".into()));
        }
        let fallback = self.most_probable_difference(None).unwrap_or(0.0);
        let mut combos: BTreeMap<[i64; 5], Condition> = BTreeMap::new();
        for list in self.cells.values() {
            let cell_mode = Self::modal_difference(list).unwrap_or(fallback);
            for e in list {
                let ddir = e.direction_difference().unwrap_or(cell_mode);
                let c = Condition {
                    hs1: e.hs1,
                    tp1: e.tp1,
                    hs2: e.hs2,
                    tp2: e.tp2,
                    ddir,
                    count: e.count,
                };
                let key = c.key().map(|v| (v * 2.0).round() as i64);
                combos
                    .entry(key)
                    .and_modify(|x| x.count += e.count)
                    .or_insert(c);
            }
        }
        let mut all: Vec<Condition> = combos.into_values().collect();
        all.sort_by(|a, b| {
            b.count.cmp(&a.count).then_with(|| {
                a.key()
                    .iter()
                    .zip(b.key().iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        if k > all.len() {
            log::warn!(
                "requested {k} conditions but the histogram has only {} distinct combinations",
                all.len()
            );
        }
        all.truncate(k);
        Ok(all)
    }

    /// Draws a sea state for `cell` with probability proportional to counts.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        cell: &GridCell,
        rng: &mut R,
        allow_fallback: bool,
    ) -> Result<SampledCondition> {
        if self.is_empty() {
            return Err(Error::Sampling("weather histogram is empty".into()));
        }
        let aggregate;
        let (list, from_aggregate): (&[HistogramEntry], bool) = match self.cells.get(cell) {
            Some(l) => (l, false),
            None if allow_fallback => {
                aggregate = self.aggregate();
                (&aggregate, true)
            }
            None => {
                return Err(Error::Sampling(format!(
                    "cell ({}, {}) has no observations",
                    cell.lat_bin, cell.lon_bin
                )))
            }
        };
        let total: u64 = list.iter().map(|e| e.count).sum();
        let mut u = rng.random_range(0..total);
        let mut entry = list[list.len() - 1];
        for e in list {
            if u < e.count {
                entry = *e;
                break;
            }
            u -= e.count;
        }
        let (dir2, imputed) = match entry.dir2 {
            Some(d) => (d, false),
            None => {
                let d = self
                    .most_probable_difference(Some(cell))
                    .ok_or_else(|| Error::Sampling("no direction difference observed".into()))?;
                (normalize_deg(entry.dir1 + d), true)
            }
        };
        let sea_state = BimodalSeaState::new(
            SpectrumParams::new(entry.hs1, entry.tp1, entry.dir1)?,
            SpectrumParams::new(entry.hs2, entry.tp2, dir2)?,
        )?;
        Ok(SampledCondition {
            sea_state,
            entry,
            from_aggregate,
            dir2_imputed: imputed,
        })
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers()?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != HISTOGRAM_COLUMNS {
            let unknown: Vec<&str> = names
                .iter()
                .filter(|n| !HISTOGRAM_COLUMNS.contains(n))
                .copied()
                .collect();
            return Err(Error::Format(format!(
                "histogram header must be {}; unknown columns {unknown:?}",
                HISTOGRAM_COLUMNS.join(",")
            )));
        }
        let mut h = WeatherHistogram::default();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
            let num = |c: usize| -> Result<f64> {
                row[c].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::Format(format!(
                        "line {line}: {} = {:?} is not a number",
                        HISTOGRAM_COLUMNS[c], &row[c]
                    ))
                })
            };
            let int = |c: usize| -> Result<i64> {
                row[c].parse::<i64>().map_err(|_| {
                    Error::Format(format!(
                        "line {line}: {} = {:?} is not an integer",
                        HISTOGRAM_COLUMNS[c], &row[c]
                    ))
                })
            };
            let count = int(8)?;
            if count < 1 {
                return Err(Error::Format(format!("line {line}: count must be >= 1, got {count}")));
            }
            let cell = GridCell::new(int(0)? as i32, int(1)? as i32)
                .map_err(|e| Error::Format(format!("line {line}: {e}")))?;
            let dir2 = if row[7].is_empty() { None } else { Some(num(7)?) };
            let entry = HistogramEntry {
                hs1: num(2)?,
                tp1: num(3)?,
                dir1: num(4)?,
                hs2: num(5)?,
                tp2: num(6)?,
                dir2,
                count: count as u64,
            };
            if entry.hs1 < 0.0 || entry.hs2 < 0.0 || entry.tp1 <= 0.0 || entry.tp2 <= 0.0 {
                return Err(Error::Format(format!(
                    "line {line}: wave heights must be >= 0 and periods > 0"
                )));
            }
            h.insert(cell, entry);
        }
        Ok(h)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HISTOGRAM_COLUMNS)?;
        for (cell, list) in &self.cells {
            for e in list {
                w.write_record([
                    cell.lat_bin.to_string(),
                    cell.lon_bin.to_string(),
                    e.hs1.to_string(),
                    e.tp1.to_string(),
                    e.dir1.to_string(),
                    e.hs2.to_string(),
                    e.tp2.to_string(),
                    e.dir2.map(|d| d.to_string()).unwrap_or_default(),
                    e.count.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<histogram>", e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Winter North Atlantic stand-in: lat 30–66°N, lon 80°W–10°E.
pub const SYNTHETIC_BOX: (f64, f64, f64, f64) = (30.0, -80.0, 66.0, 10.0);

/// Number of distinct sea-state prototypes in the synthetic histogram.
pub const SYNTHETIC_PROTOTYPES: usize = 160;

/// Deterministic synthetic histogram over [`SYNTHETIC_BOX`].
///
/// Cells draw their rows from a shared pool of binned sea-state prototypes
/// spanning Hs 1.5 to 6 m, weighted towards heavier seas in the north-east.
/// Swell arrives mostly 30–90° off the wind sea and a few rows omit the
/// secondary direction.
pub fn synthetic_histogram(seed: u64) -> WeatherHistogram {
    let (s, w, n, e) = SYNTHETIC_BOX;
    let diffs = [30.0, 60.0, 60.0, 90.0, 90.0, 120.0, 150.0, 300.0, 330.0];
    let mut rng = StreamKey::new(seed, purpose::HISTOGRAM, u64::MAX).rng();
    let prototypes: Vec<(f64, f64, f64, f64, f64)> = (0..SYNTHETIC_PROTOTYPES)
        .map(|i| {
            let hs1 = 1.5 + 4.5 * (i as f64 + rng.random::<f64>()) / SYNTHETIC_PROTOTYPES as f64;
            let tp1 = (3.9 * hs1.sqrt() + rng.random_range(-0.75..0.75)).clamp(4.0, 16.0);
            let hs2 = rng.random_range(0.5..0.5 + 0.4 * hs1);
            let tp2 = rng.random_range(10.0..15.0);
            let ddir = diffs[rng.random_range(0..diffs.len())];
            (hs1, tp1, hs2, tp2, ddir)
        })
        .collect();

    let mut h = WeatherHistogram::default();
    let c0 = GridCell::containing(LatLon { lat: s, lon: w });
    let c1 = GridCell::containing(LatLon {
        lat: n - 1e-9,
        lon: e - 1e-9,
    });
    for lat_bin in c0.lat_bin..=c1.lat_bin {
        for lon_bin in c0.lon_bin..=c1.lon_bin {
            let cell = GridCell { lat_bin, lon_bin };
            let centre = cell.center();
            let storm = 0.7 * (centre.lat - s) / (n - s) + 0.3 * (centre.lon - w) / (e - w);
            let typical = 2.5 + 1.5 * storm;
            let weights: Vec<f64> = prototypes
                .iter()
                .map(|p| (-((p.0 - typical) / 2.5).powi(2)).exp())
                .collect();
            let total: f64 = weights.iter().sum();
            let mut rng = StreamKey::new(
                seed,
                purpose::HISTOGRAM,
                (lat_bin as u64) << 16 | lon_bin as u64,
            )
            .rng();
            let rows = rng.random_range(5..9);
            for _ in 0..rows {
                let mut u = rng.random::<f64>() * total;
                let mut pick = prototypes.len() - 1;
                for (i, wt) in weights.iter().enumerate() {
                    if u < *wt {
                        pick = i;
                        break;
                    }
                    u -= wt;
                }
                let (hs1, tp1, hs2, tp2, ddir) = prototypes[pick];
                let dir1 = 270.0 + rng.random_range(-90.0..60.0);
                let dir2 = if rng.random_bool(0.05) {
                    None
                } else {
                    Some(dir1 + ddir)
                };
                let count = 1 + (rng.random::<f64>().powi(2) * 40.0) as u64;
                h.insert(
                    cell,
                    HistogramEntry {
                        hs1,
                        tp1,
                        dir1,
                        hs2,
                        tp2,
                        dir2,
                        count,
                    },
                );
            }
        }
    }
    h
}
