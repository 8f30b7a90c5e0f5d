use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstm::{
    evaluate, standardize_sequence, train, training_pair, Checkpoint, Dataset, LstmNetwork,
    Sequence, Standardizer, TrainReport, INPUT_WIDTH, TARGET_WIDTH,
};
use crate::rng::{purpose, StreamKey};
use crate::sig9;
use crate::sim::{sidecar_path, Fidelity, RecordMeta, RecordStatus};

use super::{Manifest, ManifestRow, Pipeline};

/// One (condition row, realization) pair: the unit of the data split.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitId {
    pub row_id: String,
    pub condition_index: usize,
    pub realization: usize,
}

/// Train / validation / test units of one heading.
///
/// Conditions are disjoint across the three sets: every realization of a
/// condition lands in the same set or is left unused. Units whose lofi or
/// reference run is missing or truncated are not eligible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub heading_deg: u32,
    pub config_hash: String,
    pub master_seed: u64,
    pub train: Vec<UnitId>,
    pub validation: Vec<UnitId>,
    pub test: Vec<UnitId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub heading_deg: u32,
    pub initial_train: f64,
    pub report: TrainReport,
    pub split: SplitManifest,
    pub checkpoint: PathBuf,
}

impl Pipeline {
    /// Deterministic split of the heading's units, shuffled by condition.
    pub fn split(&self, manifest: &Manifest, heading: u32) -> Result<SplitManifest> {
        let [n_train, n_val, n_test] = self.cfg.campaign.split;
        let needed = n_train + n_val + n_test;
        let realizations = self.cfg.campaign.realizations;
        let mut rows: Vec<(&ManifestRow, Vec<usize>)> = manifest
            .for_heading(heading)
            .map(|r| {
                let ks = (0..realizations).filter(|&k| self.unit_available(&r.id, k)).collect();
                (r, ks)
            })
            .collect();
        rows.sort_by_key(|r| r.0.condition_index);
        let found = rows.iter().map(|r| r.1.len()).sum();
        let insufficient = || Error::InsufficientRecords {
            heading,
            needed,
            found,
        };
        if found < needed {
            return Err(insufficient());
        }
        let mut rng = StreamKey::new(self.cfg.master_seed, purpose::SPLIT, heading as u64).rng();
        rows.shuffle(&mut rng);
        let mut sets: [Vec<UnitId>; 3] = Default::default();
        let sizes = [n_train, n_val, n_test];
        let mut bucket = 0;
        for (row, ks) in rows {
            while bucket < 3 && sets[bucket].len() == sizes[bucket] {
                bucket += 1;
            }
            if bucket == 3 {
                break;
            }
            for k in ks {
                if sets[bucket].len() == sizes[bucket] {
                    break;
                }
                sets[bucket].push(UnitId {
                    row_id: row.id.clone(),
                    condition_index: row.condition_index,
                    realization: k,
                });
            }
        }
        if sets.iter().zip(sizes).any(|(s, n)| s.len() != n) {
            return Err(insufficient());
        }
        let [train, validation, test] = sets;
        Ok(SplitManifest {
            heading_deg: heading,
            config_hash: self.provenance.config_hash.clone(),
            master_seed: self.cfg.master_seed,
            train,
            validation,
            test,
        })
    }

    /// Both fidelities of the unit exist and ran to completion.
    pub fn unit_available(&self, row_id: &str, realization: usize) -> bool {
        [Fidelity::Lofi, Fidelity::Reference].iter().all(|&f| {
            let side = sidecar_path(&self.record_path(row_id, realization, f));
            std::fs::read_to_string(side)
                .ok()
                .and_then(|t| serde_json::from_str::<RecordMeta>(&t).ok())
                .is_some_and(|m| m.fidelity == f && m.status == RecordStatus::Complete)
        })
    }

    fn raw_pairs(&self, units: &[UnitId]) -> Result<Vec<Sequence>> {
        let start = self.cfg.sim.ramp_samples();
        let len = self.cfg.train.seq_len;
        units
            .par_iter()
            .map(|u| {
                let lofi = self.load_record(&u.row_id, u.realization, Fidelity::Lofi)?;
                let reference = self.load_record(&u.row_id, u.realization, Fidelity::Reference)?;
                for r in [&lofi, &reference] {
                    if !r.is_complete() {
                        return Err(Error::Format(format!(
                            "{} r{}: record is truncated",
                            u.row_id, u.realization
                        )));
                    }
                }
                training_pair(&lofi, &reference, start, len)
            })
            .collect()
    }

    /// Fits the standardizer and trains one heading's corrector.
    ///
    /// Writes `checkpoint.json`, `loss.csv` and `split.json` to the model directory.
    pub fn train_heading(&self, manifest: &Manifest, heading: u32) -> Result<TrainOutcome> {
        let split = self.split(manifest, heading)?;
        let (raw_train, raw_val) = self.install(|| -> Result<_> {
            Ok((self.raw_pairs(&split.train)?, self.raw_pairs(&split.validation)?))
        })?;
        let inputs: Vec<&[f64]> = raw_train.iter().map(|s| s.input.as_slice()).collect();
        let targets: Vec<&[f64]> = raw_train.iter().map(|s| s.target.as_slice()).collect();
        let st = Standardizer::fit(&inputs, &targets, INPUT_WIDTH, TARGET_WIDTH)?;
        let data = Dataset {
            train: raw_train
                .iter()
                .map(|s| standardize_sequence(&st, s))
                .collect::<Result<_>>()?,
            validation: raw_val
                .iter()
                .map(|s| standardize_sequence(&st, s))
                .collect::<Result<_>>()?,
        };
        let tc = self.cfg.train_config();
        let mut rng = StreamKey::new(self.cfg.master_seed, purpose::INIT, heading as u64).rng();
        let mut net = LstmNetwork::init(INPUT_WIDTH, &tc.hidden_sizes(), TARGET_WIDTH, &mut rng);
        let (initial_train, report) = self.install(|| -> Result<_> {
            let initial = evaluate(&net, &data.train)?;
            Ok((initial, train(&mut net, &data, &tc)?))
        })?;
        log::info!(
            "heading {heading}: validation {:.4e} -> {:.4e}",
            report.initial_validation,
            report.final_validation()
        );

        let dir = self.model_dir(heading);
        let mut ck = Checkpoint::new(net, st, tc);
        ck.heading_deg = Some(heading);
        ck.master_seed = Some(self.cfg.master_seed);
        ck.config_hash = Some(self.provenance.config_hash.clone());
        let checkpoint = self.checkpoint_path(heading);
        self.write_json(&checkpoint, &ck)?;
        let mut rows = vec![vec![
            "0".to_string(),
            sig9(initial_train),
            sig9(report.initial_validation),
        ]];
        rows.extend(
            report
                .history
                .iter()
                .map(|e| vec![e.epoch.to_string(), sig9(e.train), sig9(e.validation)]),
        );
        self.write_csv(&dir.join("loss.csv"), &["epoch", "train", "validation"], &rows)?;
        self.write_json(&dir.join("split.json"), &split)?;
        Ok(TrainOutcome {
            heading_deg: heading,
            initial_train,
            report,
            split,
            checkpoint,
        })
    }

    pub fn load_split(&self, heading: u32) -> Result<SplitManifest> {
        let path = self.model_dir(heading).join("split.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads the heading's checkpoint; a missing file names the heading.
    pub fn load_checkpoint(&self, heading: u32) -> Result<Checkpoint> {
        let path = self.checkpoint_path(heading);
        if !path.exists() {
            return Err(Error::MissingCheckpoint(heading));
        }
        Checkpoint::load(&path)
    }

    /// Checkpoints for every heading in `headings`.
    pub fn load_checkpoints(&self, headings: &[u32]) -> Result<BTreeMap<u32, Checkpoint>> {
        headings
            .iter()
            .map(|&h| Ok((h, self.load_checkpoint(h)?)))
            .collect()
    }

    /// Corrects every lofi record of the heading's test split.
    ///
    /// Returns the number of corrected records written.
    pub fn correct_heading(&self, heading: u32) -> Result<usize> {
        let ck = self.load_checkpoint(heading)?;
        let split = self.load_split(heading)?;
        self.install(|| {
            split
                .test
                .par_iter()
                .map(|u| {
                    let lofi = self.load_record(&u.row_id, u.realization, Fidelity::Lofi)?;
                    let mut out = ck.correct(&lofi)?;
                    out.meta.provenance = Some(self.provenance.clone());
                    out.save(&self.record_path(&u.row_id, u.realization, Fidelity::LstmCorrected))
                })
                .collect::<Result<Vec<()>>>()
        })
        .map(|v| v.len())
    }
}
