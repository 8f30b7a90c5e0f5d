use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, StreamKey};
use crate::seaway::{field_for_stream, BimodalSeaState, WaveField};
use crate::sim::{import_motion_record, simulate, Fidelity, InitialOffset, MotionRecord};
use crate::voyage::Condition;

use super::{csv_reader, Pipeline};

pub const MANIFEST_COLUMNS: [&str; 9] = [
    "id", "condition", "heading_deg", "hs1", "tp1", "hs2", "tp2", "ddir", "count",
];

/// One (condition, primary relative heading) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub condition_index: usize,
    pub heading_deg: u32,
    pub condition: Condition,
}

impl ManifestRow {
    pub fn new(condition_index: usize, heading_deg: u32, condition: Condition) -> Self {
        Self {
            id: format!("c{condition_index:03}-h{heading_deg:03}"),
            condition_index,
            heading_deg,
            condition,
        }
    }

    /// Sea state relative to the bow.
    pub fn sea_state(&self) -> Result<BimodalSeaState> {
        self.condition.sea_state(self.heading_deg as f64)
    }

    /// Wave stream shared by every fidelity of one realization.
    pub fn wave_key(&self, master: u64, realization: usize) -> StreamKey {
        StreamKey::new(
            master,
            purpose::WAVES + (self.condition_index as u64) * 12 + (self.heading_deg / 30) as u64,
            realization as u64,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn for_heading(&self, heading: u32) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(move |r| r.heading_deg == heading)
    }

    pub fn headings(&self) -> Vec<u32> {
        let mut h: Vec<u32> = self.rows.iter().map(|r| r.heading_deg).collect();
        h.sort_unstable();
        h.dedup();
        h
    }

    pub fn get(&self, id: &str) -> Option<&ManifestRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv_reader(std::io::BufReader::new(f));
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if headers != MANIFEST_COLUMNS {
            return Err(Error::Format(format!(
                "{}: manifest header must be {}",
                path.display(),
                MANIFEST_COLUMNS.join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Format(format!("{} line {}: bad {what}", path.display(), i + 3));
            let num = |c: usize| rec[c].parse::<f64>().map_err(|_| bad(MANIFEST_COLUMNS[c]));
            let condition_index: usize = rec[1].parse().map_err(|_| bad("condition"))?;
            let heading_deg: u32 = rec[2].parse().map_err(|_| bad("heading_deg"))?;
            let row = ManifestRow::new(
                condition_index,
                heading_deg,
                Condition {
                    hs1: num(3)?,
                    tp1: num(4)?,
                    hs2: num(5)?,
                    tp2: num(6)?,
                    ddir: num(7)?,
                    count: rec[8].parse().map_err(|_| bad("count"))?,
                },
            );
            if row.id != rec[0] {
                return Err(bad("id"));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CampaignReport {
    pub total: usize,
    pub simulated: usize,
    pub skipped: usize,
    pub failed: Vec<RunFailure>,
}

impl Pipeline {
    /// Top-k histogram conditions crossed with the configured headings.
    pub fn gen_conditions(&self) -> Result<Manifest> {
        let hist = self.histogram()?;
        if hist.is_empty() {
            return Err(Error::Sampling("weather histogram is empty".into()));
        }
        let top = hist.top_k_conditions(self.cfg.campaign.conditions)?;
        let mut rows = Vec::with_capacity(top.len() * self.cfg.campaign.headings_deg.len());
        for (i, c) in top.iter().enumerate() {
            for &h in &self.cfg.campaign.headings_deg {
                rows.push(ManifestRow::new(i, h, *c));
            }
        }
        let manifest = Manifest { rows };
        let body: Vec<Vec<String>> = manifest
            .rows
            .iter()
            .map(|r| {
                let c = &r.condition;
                vec![
                    r.id.clone(),
                    r.condition_index.to_string(),
                    r.heading_deg.to_string(),
                    c.hs1.to_string(),
                    c.tp1.to_string(),
                    c.hs2.to_string(),
                    c.tp2.to_string(),
                    c.ddir.to_string(),
                    c.count.to_string(),
                ]
            })
            .collect();
        self.write_csv(&self.manifest_path(), &MANIFEST_COLUMNS, &body)?;
        Ok(manifest)
    }

    pub fn load_manifest(&self) -> Result<Manifest> {
        Manifest::load(&self.manifest_path())
    }

    pub fn wave_field(&self, sea: &BimodalSeaState, key: StreamKey) -> Result<WaveField> {
        field_for_stream(
            sea,
            self.cfg.seaway.components_per_system,
            self.cfg.seaway.discretization,
            self.cfg.sim.ramp,
            key,
        )
    }

    /// True when `path` holds a complete record of this run.
    pub fn record_is_current(&self, path: &Path, fidelity: Fidelity) -> bool {
        match import_motion_record(path) {
            Ok(r) => {
                r.meta.fidelity == fidelity
                    && r.is_complete()
                    && r.len() == self.cfg.sim.record_len()
                    && r.meta.provenance.as_ref() == Some(&self.provenance)
            }
            Err(_) => false,
        }
    }

    pub fn load_record(&self, row_id: &str, realization: usize, fidelity: Fidelity) -> Result<MotionRecord> {
        import_motion_record(&self.record_path(row_id, realization, fidelity))
    }

    /// Simulates every (row, realization, fidelity) without a current record.
    ///
    /// Failures are collected and the remaining runs continue.
    pub fn simulate(
        &self,
        manifest: &Manifest,
        fidelities: &[Fidelity],
        realizations: usize,
    ) -> Result<CampaignReport> {
        if let Some(f) = fidelities
            .iter()
            .find(|f| !matches!(f, Fidelity::Lofi | Fidelity::Reference))
        {
            return Err(Error::InvalidArgument(format!("cannot simulate fidelity {f}")));
        }
        let vessel = self.vessel()?;
        let cfg = self.sim_config(self.cfg.sim.speed_kts);
        let mut jobs = Vec::new();
        for row in &manifest.rows {
            for k in 0..realizations {
                for &f in fidelities {
                    jobs.push((row, k, f));
                }
            }
        }
        let outcomes: Vec<Option<std::result::Result<(), RunFailure>>> = self.install(|| {
            jobs.par_iter()
                .map(|&(row, k, fid)| {
                    let path = self.record_path(&row.id, k, fid);
                    if self.record_is_current(&path, fid) {
                        return None;
                    }
                    let fail = |reason: String| {
                        log::warn!("{}: {reason}", path.display());
                        RunFailure {
                            path: path.clone(),
                            reason,
                        }
                    };
                    let run = || -> Result<MotionRecord> {
                        let sea = row.sea_state()?;
                        let field = self.wave_field(&sea, row.wave_key(self.cfg.master_seed, k))?;
                        let mut rec =
                            simulate(&vessel, &field, &cfg, fid, Some(sea), InitialOffset::default())?;
                        rec.meta.provenance = Some(self.provenance.clone());
                        rec.save(&path)?;
                        Ok(rec)
                    };
                    Some(match run() {
                        Ok(rec) if rec.is_complete() => Ok(()),
                        Ok(rec) => Err(fail(format!("truncated: {:?}", rec.meta.status))),
                        Err(e) => Err(fail(e.to_string())),
                    })
                })
                .collect()
        });
        let mut report = CampaignReport {
            total: jobs.len(),
            ..Default::default()
        };
        for o in outcomes {
            match o {
                None => report.skipped += 1,
                Some(Ok(())) => report.simulated += 1,
                Some(Err(f)) => {
                    report.simulated += 1;
                    report.failed.push(f);
                }
            }
        }
        log::info!(
            "campaign: {} runs, {} simulated, {} skipped, {} failed",
            report.total,
            report.simulated,
            report.skipped,
            report.failed.len()
        );
        Ok(report)
    }
}

