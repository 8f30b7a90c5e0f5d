//! Motion records and their CSV + JSON-sidecar storage.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Provenance;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::seaway::BimodalSeaState;
use crate::sig9;

pub const RECORD_COLUMNS: [&str; 7] = [
    "t", "heave_m", "roll_deg", "pitch_deg", "zeta_m", "dzdx", "dzdy",
];

/// Largest tolerated deviation from a uniform time grid (s).
pub const GRID_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Fidelity {
    Lofi,
    Reference,
    LstmCorrected,
    Imported,
}

impl Fidelity {
    pub fn tag(&self) -> &'static str {
        match self {
            Fidelity::Lofi => "lofi",
            Fidelity::Reference => "reference",
            Fidelity::LstmCorrected => "lstm-corrected",
            Fidelity::Imported => "imported",
        }
    }
}

impl std::fmt::Display for Fidelity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Fidelity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lofi" => Ok(Fidelity::Lofi),
            "reference" => Ok(Fidelity::Reference),
            "lstm-corrected" => Ok(Fidelity::LstmCorrected),
            "imported" => Ok(Fidelity::Imported),
            _ => Err(Error::InvalidArgument(format!("unknown fidelity {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum RecordStatus {
    Complete,
    Truncated { time: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub sea_state: Option<BimodalSeaState>,
    pub heading_deg: f64,
    pub speed_kts: f64,
    pub seed: Option<StreamKey>,
    pub fidelity: Fidelity,
    pub hull_id: String,
    /// Leading samples affected by the wave ramp.
    pub ramp_samples: usize,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Default for RecordMeta {
    fn default() -> Self {
        Self {
            sea_state: None,
            heading_deg: 0.0,
            speed_kts: 0.0,
            seed: None,
            fidelity: Fidelity::Imported,
            hull_id: String::new(),
            ramp_samples: 0,
            status: RecordStatus::Complete,
            provenance: None,
        }
    }
}

/// Uniformly sampled heave (m), roll (deg), pitch (deg) and wave-at-CG channels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionRecord {
    pub t: Vec<f64>,
    pub heave: Vec<f64>,
    pub roll: Vec<f64>,
    pub pitch: Vec<f64>,
    pub zeta: Vec<f64>,
    pub dzdx: Vec<f64>,
    pub dzdy: Vec<f64>,
    pub meta: RecordMeta,
}

impl MotionRecord {
    pub fn with_capacity(n: usize, meta: RecordMeta) -> Self {
        Self {
            t: Vec::with_capacity(n),
            heave: Vec::with_capacity(n),
            roll: Vec::with_capacity(n),
            pitch: Vec::with_capacity(n),
            zeta: Vec::with_capacity(n),
            dzdx: Vec::with_capacity(n),
            dzdy: Vec::with_capacity(n),
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64
        }
    }

    pub fn is_complete(&self) -> bool {
        self.meta.status == RecordStatus::Complete
    }

    pub fn channels(&self) -> [&Vec<f64>; 7] {
        [
            &self.t, &self.heave, &self.roll, &self.pitch, &self.zeta, &self.dzdx, &self.dzdy,
        ]
    }

    /// Motion channel by index: 0 heave, 1 roll, 2 pitch.
    pub fn motion(&self, dof: usize) -> &[f64] {
        match dof {
            0 => &self.heave,
            1 => &self.roll,
            _ => &self.pitch,
        }
    }

    /// Network input row: heave, roll, pitch, zeta, dzdx, dzdy.
    pub fn input_row(&self, i: usize) -> [f64; 6] {
        [
            self.heave[i],
            self.roll[i],
            self.pitch[i],
            self.zeta[i],
            self.dzdx[i],
            self.dzdy[i],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        for (name, ch) in RECORD_COLUMNS.iter().zip(self.channels()) {
            if ch.len() != n {
                return Err(Error::Format(format!(
                    "channel {name} has {} samples, expected {n}",
                    ch.len()
                )));
            }
        }
        if n >= 2 {
            let dt = self.dt();
            if !(dt > 0.0) {
                return Err(Error::NonUniformGrid("time must increase".into()));
            }
            for (i, t) in self.t.iter().enumerate() {
                let expect = self.t[0] + i as f64 * dt;
                if (t - expect).abs() > GRID_TOLERANCE {
                    return Err(Error::NonUniformGrid(format!(
                        "sample {i}: t = {t}, expected {expect} (dt {dt})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RECORD_COLUMNS)?;
        let chans = self.channels();
        let mut row: Vec<String> = Vec::with_capacity(7);
        for i in 0..self.len() {
            row.clear();
            row.extend(chans.iter().map(|c| sig9(c[i])));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<record>", e))?;
        Ok(())
    }

    /// Parses the CSV body; metadata defaults to an imported record.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let headers: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        for h in &headers {
            if !RECORD_COLUMNS.contains(&h.as_str()) {
                return Err(Error::Format(format!("unknown column {h:?}")));
            }
        }
        let mut idx = [0usize; 7];
        for (k, name) in RECORD_COLUMNS.iter().enumerate() {
            idx[k] = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Format(format!("missing column {name:?}")))?;
        }
        let mut rec = MotionRecord::default();
        for (line, row) in r.records().enumerate() {
            let row = row?;
            let mut vals = [0.0; 7];
            for (k, &j) in idx.iter().enumerate() {
                let s = row.get(j).ok_or_else(|| {
                    Error::Format(format!("line {}: missing field {}", line + 2, RECORD_COLUMNS[k]))
                })?;
                vals[k] = s.trim().parse().map_err(|_| {
                    Error::Format(format!("line {}: bad number {s:?}", line + 2))
                })?;
            }
            rec.t.push(vals[0]);
            rec.heave.push(vals[1]);
            rec.roll.push(vals[2]);
            rec.pitch.push(vals[3]);
            rec.zeta.push(vals[4]);
            rec.dzdx.push(vals[5]);
            rec.dzdy.push(vals[6]);
        }
        rec.validate()?;
        Ok(rec)
    }

    /// Writes the CSV and a JSON metadata sidecar next to it.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        if let Some(dir) = csv_path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let f = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(f))?;
        let side = sidecar_path(csv_path);
        let json = serde_json::to_string_pretty(&self.meta)?;
        std::fs::write(&side, json).map_err(|e| Error::io(&side, e))?;
        Ok(())
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Loads a record CSV plus its metadata sidecar when present.
pub fn import_motion_record(csv_path: &Path) -> Result<MotionRecord> {
    let f = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let mut rec = MotionRecord::read_csv(std::io::BufReader::new(f))?;
    let side = sidecar_path(csv_path);
    if side.exists() {
        let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        rec.meta = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
    }
    Ok(rec)
}
