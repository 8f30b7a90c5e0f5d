//! Batch campaign: condition manifest, simulation store, per-heading
//! training, correction, test-set report and voyage evaluation.
//!
//! Layout under the run directory:
//!
//! ```text
//! manifest.csv
//! records/<row id>/r<k>-<fidelity>.csv (+ .json sidecar)
//! models/h<heading>/{checkpoint.json, loss.csv, split.json}
//! corrected/<row id>/r<k>-lstm-corrected.csv
//! report/{report.json, report.txt, errors.csv, kde_<dof>.csv, worst_<dof>.csv}
//! voyage/{plan.json, summary.json, errors.csv, kde_<dof>.csv, worst_<dof>.csv}
//! ```

mod campaign;
mod evaluate;
mod training;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Provenance, RunConfig};
use crate::error::{Error, Result};
use crate::hull::{build_bonjean, generate_hull, HullOffsets, DEFAULT_Z_SAMPLES};
use crate::sim::{Fidelity, SimConfig, Vessel};
use crate::voyage::{synthetic_histogram, WeatherHistogram};

pub use campaign::{CampaignReport, Manifest, ManifestRow, RunFailure, MANIFEST_COLUMNS};
pub use evaluate::TestReport;
pub use crate::voyage::WorstCase;
pub use training::{SplitManifest, TrainOutcome, UnitId};

pub struct Pipeline {
    pub cfg: RunConfig,
    pub root: PathBuf,
    pub provenance: Provenance,
    pool: rayon::ThreadPool,
}

impl Pipeline {
    /// `jobs = 0` uses every available core.
    pub fn new(cfg: RunConfig, root: Option<PathBuf>, jobs: usize) -> Result<Self> {
        cfg.validate()?;
        let root = root.unwrap_or_else(|| cfg.out_dir.clone());
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        Ok(Self {
            provenance: cfg.provenance(),
            cfg,
            root,
            pool,
        })
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.root.join(rel)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.path("manifest.csv")
    }

    pub fn record_path(&self, row_id: &str, realization: usize, fidelity: Fidelity) -> PathBuf {
        let dir = if fidelity == Fidelity::LstmCorrected {
            "corrected"
        } else {
            "records"
        };
        self.path(dir)
            .join(row_id)
            .join(format!("r{realization}-{}.csv", fidelity.tag()))
    }

    pub fn model_dir(&self, heading: u32) -> PathBuf {
        self.path("models").join(format!("h{heading:03}"))
    }

    pub fn checkpoint_path(&self, heading: u32) -> PathBuf {
        self.model_dir(heading).join("checkpoint.json")
    }

    pub fn hull_offsets(&self) -> Result<HullOffsets> {
        let h = &self.cfg.hull;
        match &h.offsets {
            Some(p) => HullOffsets::load(p, h.particulars),
            None => generate_hull(h.kind, h.particulars),
        }
    }

    pub fn vessel(&self) -> Result<Vessel> {
        let offsets = self.hull_offsets()?;
        let table = build_bonjean(&offsets, DEFAULT_Z_SAMPLES)?;
        Vessel::new(table, offsets.id.clone())
    }

    pub fn histogram(&self) -> Result<WeatherHistogram> {
        match &self.cfg.campaign.histogram {
            Some(p) => WeatherHistogram::load(p),
            None => Ok(synthetic_histogram(self.cfg.master_seed)),
        }
    }

    /// Simulation settings for one run: relative sea state, course 0.
    pub fn sim_config(&self, speed_kts: f64) -> SimConfig {
        SimConfig {
            speed_kts,
            heading_deg: 0.0,
            ..self.cfg.sim.clone()
        }
    }

    fn ensure_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
    }

    /// Pretty JSON with a trailing newline.
    pub(crate) fn write_json<T: Serialize>(&self, path: &Path, value: &T) -> Result<()> {
        if let Some(d) = path.parent() {
            self.ensure_dir(d)?;
        }
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// CSV with a provenance comment line.
    pub(crate) fn write_csv(&self, path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        if let Some(d) = path.parent() {
            self.ensure_dir(d)?;
        }
        let mut buf = self.provenance.csv_comment().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn csv_reader<R: std::io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r)
}
