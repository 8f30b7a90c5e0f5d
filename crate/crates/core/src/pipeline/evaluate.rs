use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, StreamKey};
use crate::seaway::BimodalSeaState;
use crate::sig9;
use crate::sim::{import_motion_record, simulate, Fidelity, InitialOffset, MotionRecord};
use crate::voyage::{
    compare_report, ensemble_std, format_error_row, format_percent, great_circle_route, worst_case,
    ComparisonReport, DofStd, StatSet, VoyagePlan, VoyageSummary, WaypointSummary, WorstCase,
    DOF_NAMES,
};

use super::Pipeline;

const FIDELITIES: [Fidelity; 3] = [Fidelity::Lofi, Fidelity::LstmCorrected, Fidelity::Reference];

/// Held-out comparison over the test splits of the trained headings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub config_hash: String,
    pub master_seed: u64,
    pub headings_deg: Vec<u32>,
    pub comparison: ComparisonReport,
    pub worst: Option<WorstCase>,
    pub lines: Vec<String>,
}

fn ensemble(records: &[MotionRecord]) -> Result<DofStd> {
    let refs: Vec<&MotionRecord> = records.iter().collect();
    Ok([
        ensemble_std(&refs, 0)?,
        ensemble_std(&refs, 1)?,
        ensemble_std(&refs, 2)?,
    ])
}

/// Index window of `span_s` seconds centred on the largest reference response.
fn snippet_window(reference: &MotionRecord, dof: usize, span_s: f64) -> (usize, usize) {
    let n = reference.len();
    let skip = reference.meta.ramp_samples.min(n);
    let x = reference.motion(dof);
    let centre = (skip..n)
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()).then(b.cmp(&a)))
        .unwrap_or(0);
    let dt = reference.dt();
    let half = if dt > 0.0 { (span_s / dt / 2.0).round() as usize } else { n };
    let lo = centre.saturating_sub(half).max(skip);
    let hi = (centre + half + 1).min(n);
    (lo, hi)
}

fn summary_lines(c: &ComparisonReport, what: &str) -> Vec<String> {
    let mut lines = vec![format!("{what}: {} conditions", c.rows.len())];
    for (d, name) in DOF_NAMES.iter().enumerate() {
        lines.push(format!(
            "median {}",
            format_error_row(name, c.median_ape_corrected[d], c.median_ape_lofi[d])
        ));
    }
    for (d, name) in DOF_NAMES.iter().enumerate() {
        lines.push(format!(
            "{name}: corrected closer in {} of conditions, median error reduction {}",
            format_percent(100.0 * c.improved_fraction[d]),
            format_percent(100.0 * c.median_reduction[d])
        ));
    }
    lines
}

impl Pipeline {
    /// Error table, KDE grids and worst-condition snippets under `dir`.
    fn emit_comparison(
        &self,
        dir: &Path,
        comparison: &ComparisonReport,
        worst: Option<(&WorstCase, &[MotionRecord; 3])>,
        lines: &[String],
    ) -> Result<()> {
        let mut header = vec!["key", "hs1", "tp1", "dir1", "hs2", "tp2", "dir2"];
        let names: Vec<String> = DOF_NAMES
            .iter()
            .flat_map(|d| {
                ["lofi", "corrected", "reference", "ape_lofi", "ape_corrected"]
                    .map(|c| format!("{d}_{c}"))
            })
            .collect();
        header.extend(names.iter().map(String::as_str));
        let rows: Vec<Vec<String>> = comparison
            .rows
            .iter()
            .map(|r| {
                let s = &r.sea_state;
                let mut v = vec![r.key.clone()];
                v.extend(
                    [s.primary.hs, s.primary.tp, s.primary.dir, s.secondary.hs, s.secondary.tp, s.secondary.dir]
                        .map(sig9),
                );
                for d in 0..3 {
                    v.extend(
                        [r.lofi[d], r.corrected[d], r.reference[d], r.ape_lofi[d], r.ape_corrected[d]]
                            .map(sig9),
                    );
                }
                v
            })
            .collect();
        self.write_csv(&dir.join("errors.csv"), &header, &rows)?;

        for k in &comparison.kde {
            let mut rows = Vec::new();
            for (tag, kde) in k.curves() {
                for (x, p) in kde.grid.iter().zip(&kde.pdf) {
                    rows.push(vec![tag.to_string(), sig9(*x), sig9(*p)]);
                }
            }
            self.write_csv(&dir.join(format!("kde_{}.csv", k.dof)), &["fidelity", "x", "pdf"], &rows)?;
        }

        if let Some((_, [lofi, corrected, reference])) = worst {
            for (d, name) in DOF_NAMES.iter().enumerate() {
                let (lo, hi) = snippet_window(reference, d, self.cfg.voyage.snippet_s);
                let rows: Vec<Vec<String>> = (lo..hi)
                    .map(|i| {
                        vec![
                            sig9(reference.t[i]),
                            sig9(lofi.motion(d)[i]),
                            sig9(corrected.motion(d)[i]),
                            sig9(reference.motion(d)[i]),
                        ]
                    })
                    .collect();
                self.write_csv(
                    &dir.join(format!("worst_{name}.csv")),
                    &["t", "lofi", "lstm-corrected", "reference"],
                    &rows,
                )?;
            }
        }

        let mut text = lines.join("\n");
        text.push('\n');
        let path = dir.join("report.txt");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    /// Compares lofi and corrected test-split records against the reference.
    pub fn report(&self, headings: &[u32]) -> Result<TestReport> {
        let manifest = self.load_manifest()?;
        let mut groups: BTreeMap<String, (BimodalSeaState, Vec<usize>)> = BTreeMap::new();
        for &h in headings {
            let split = self.load_split(h)?;
            for u in &split.test {
                let row = manifest
                    .get(&u.row_id)
                    .ok_or_else(|| Error::Format(format!("split names unknown row {}", u.row_id)))?;
                groups
                    .entry(u.row_id.clone())
                    .or_insert((row.sea_state()?, Vec::new()))
                    .1
                    .push(u.realization);
            }
        }
        let load = |id: &str, ks: &[usize], f: Fidelity| -> Result<Vec<MotionRecord>> {
            ks.iter().map(|&k| self.load_record(id, k, f)).collect()
        };
        let stats: Vec<(String, [DofStd; 3])> = self.install(|| {
            groups
                .par_iter()
                .map(|(id, (_, ks))| {
                    let mut s = [[0.0; 3]; 3];
                    for (j, f) in FIDELITIES.iter().enumerate() {
                        s[j] = ensemble(&load(id, ks, *f)?)?;
                    }
                    Ok((id.clone(), s))
                })
                .collect::<Result<_>>()
        })?;
        let mut sets: [StatSet; 3] = Default::default();
        for (id, s) in stats {
            for j in 0..3 {
                sets[j].insert(id.clone(), s[j]);
            }
        }
        let conditions: BTreeMap<String, BimodalSeaState> =
            groups.iter().map(|(k, (s, _))| (k.clone(), *s)).collect();
        let comparison = compare_report(&sets[0], &sets[1], &sets[2], &conditions)?;

        let mut lines = summary_lines(&comparison, "held-out test set");
        let mut worst = None;
        let mut worst_records = None;
        if let Some(key) = &comparison.worst {
            let k = groups[key].1[0];
            let recs = [
                self.load_record(key, k, Fidelity::Lofi)?,
                self.load_record(key, k, Fidelity::LstmCorrected)?,
                self.load_record(key, k, Fidelity::Reference)?,
            ];
            let row = comparison.row(key).expect("worst key is a report row");
            let w = worst_case(row, k, &recs[0], &recs[1], &recs[2], self.cfg.voyage.xcorr_max_lag_s)?;
            lines.extend(w.lines.iter().cloned());
            worst = Some(w);
            worst_records = Some(recs);
        }
        let report = TestReport {
            config_hash: self.provenance.config_hash.clone(),
            master_seed: self.cfg.master_seed,
            headings_deg: headings.to_vec(),
            comparison,
            worst,
            lines,
        };
        let dir = self.path("report");
        self.write_json(&dir.join("report.json"), &report)?;
        self.emit_comparison(
            &dir,
            &report.comparison,
            report.worst.as_ref().zip(worst_records.as_ref()),
            &report.lines,
        )?;
        Ok(report)
    }

    fn voyage_record_path(&self, index: usize, realization: usize, fidelity: Fidelity) -> std::path::PathBuf {
        self.path("voyage")
            .join("records")
            .join(format!("w{index:04}"))
            .join(format!("r{realization}-{}.csv", fidelity.tag()))
    }

    /// Samples the route's sea states, simulates every selected waypoint at
    /// both fidelities, corrects the lofi runs and writes the summary.
    pub fn voyage(&self) -> Result<VoyageSummary> {
        let vc = &self.cfg.voyage;
        let route = great_circle_route(vc.start, vc.end)?;
        let hist = self.histogram()?;
        let plan = VoyagePlan::sample(route, &hist, vc.speed_kts, self.cfg.master_seed, vc.allow_fallback)?;
        let dir = self.path("voyage");
        self.write_json(&dir.join("plan.json"), &plan)?;

        let mut eligible: Vec<_> = plan.waypoints.iter().collect();
        if vc.restrict_to_trained_headings {
            eligible.retain(|w| self.checkpoint_path(w.heading_bin).exists());
            if eligible.is_empty() {
                return Err(match plan.waypoints.first() {
                    Some(w) => Error::MissingCheckpoint(w.heading_bin),
                    None => Error::Route("route has no waypoints".into()),
                });
            }
        }
        let selected = match vc.max_waypoints {
            Some(n) if n < eligible.len() => {
                let m = eligible.len();
                let mut idx: Vec<usize> = if n <= 1 {
                    vec![0; n]
                } else {
                    (0..n)
                        .map(|i| ((i as f64) * (m - 1) as f64 / (n - 1) as f64).round() as usize)
                        .collect()
                };
                idx.dedup();
                idx.into_iter().map(|i| eligible[i]).collect()
            }
            _ => eligible,
        };
        let mut bins: Vec<u32> = selected.iter().map(|w| w.heading_bin).collect();
        bins.sort_unstable();
        bins.dedup();
        let checkpoints = self.load_checkpoints(&bins)?;

        let vessel = self.vessel()?;
        let cfg = self.sim_config(vc.speed_kts);
        let realizations = vc.realizations;
        let jobs: Vec<(usize, usize)> = (0..selected.len())
            .flat_map(|i| (0..realizations).map(move |k| (i, k)))
            .collect();
        self.install(|| {
            jobs.par_iter()
                .map(|&(i, k)| {
                    let w = selected[i];
                    let key = StreamKey::new(
                        self.cfg.master_seed,
                        purpose::VOYAGE + 1 + w.index as u64,
                        k as u64,
                    );
                    let field = self.wave_field(&w.relative, key)?;
                    let mut lofi =
                        simulate(&vessel, &field, &cfg, Fidelity::Lofi, Some(w.relative), InitialOffset::default())?;
                    let mut reference = simulate(
                        &vessel,
                        &field,
                        &cfg,
                        Fidelity::Reference,
                        Some(w.relative),
                        InitialOffset::default(),
                    )?;
                    for r in [&mut lofi, &mut reference] {
                        if !r.is_complete() {
                            return Err(Error::Integration {
                                time: r.t.last().copied().unwrap_or(0.0),
                                reason: format!("voyage waypoint {} realization {k} truncated", w.index),
                            });
                        }
                        r.meta.provenance = Some(self.provenance.clone());
                        r.save(&self.voyage_record_path(w.index, k, r.meta.fidelity))?;
                    }
                    // Correct the stored record so the result does not depend on
                    // whether the lofi run came from memory or disk.
                    let stored = import_motion_record(&self.voyage_record_path(w.index, k, Fidelity::Lofi))?;
                    let mut corrected = checkpoints[&w.heading_bin].correct(&stored)?;
                    corrected.meta.provenance = Some(self.provenance.clone());
                    corrected.save(&self.voyage_record_path(w.index, k, Fidelity::LstmCorrected))
                })
                .collect::<Result<Vec<()>>>()
        })?;

        let key_of = |index: usize| format!("w{index:04}");
        let load_all = |index: usize, f: Fidelity| -> Result<Vec<MotionRecord>> {
            (0..realizations)
                .map(|k| import_motion_record(&self.voyage_record_path(index, k, f)))
                .collect()
        };
        let per_wp: Vec<[DofStd; 3]> = self.install(|| {
            selected
                .par_iter()
                .map(|w| {
                    let mut s = [[0.0; 3]; 3];
                    for (j, f) in FIDELITIES.iter().enumerate() {
                        s[j] = ensemble(&load_all(w.index, *f)?)?;
                    }
                    Ok(s)
                })
                .collect::<Result<_>>()
        })?;
        let mut sets: [StatSet; 3] = Default::default();
        let mut conditions = BTreeMap::new();
        let mut waypoints = Vec::with_capacity(selected.len());
        for (w, s) in selected.iter().zip(&per_wp) {
            let key = key_of(w.index);
            let mut std = BTreeMap::new();
            for (j, f) in FIDELITIES.iter().enumerate() {
                sets[j].insert(key.clone(), s[j]);
                std.insert(f.tag().to_string(), s[j]);
            }
            conditions.insert(key, w.relative);
            waypoints.push(WaypointSummary {
                index: w.index,
                position: w.waypoint.position,
                course_deg: w.waypoint.course_deg,
                along_track_km: w.waypoint.along_track_km,
                sea_state: w.relative,
                heading_bin: w.heading_bin,
                from_aggregate: w.sample.from_aggregate,
                std,
            });
        }
        let report = compare_report(&sets[0], &sets[1], &sets[2], &conditions)?;

        let mut lines = summary_lines(&report, "voyage waypoints");
        let mut worst = None;
        let mut worst_records = None;
        if let Some(key) = &report.worst {
            let index: usize = key[1..].parse().expect("waypoint key");
            let recs = [
                import_motion_record(&self.voyage_record_path(index, 0, Fidelity::Lofi))?,
                import_motion_record(&self.voyage_record_path(index, 0, Fidelity::LstmCorrected))?,
                import_motion_record(&self.voyage_record_path(index, 0, Fidelity::Reference))?,
            ];
            let row = report.row(key).expect("worst key is a report row");
            let w = worst_case(row, 0, &recs[0], &recs[1], &recs[2], vc.xcorr_max_lag_s)?;
            lines.extend(w.lines.iter().cloned());
            worst = Some(w);
            worst_records = Some(recs);
        }
        let summary = VoyageSummary {
            config_hash: self.provenance.config_hash.clone(),
            master_seed: self.cfg.master_seed,
            speed_kts: vc.speed_kts,
            route_distance_km: plan.route.distance_km,
            route_snapped_km: plan.route.snapped_length_km,
            route_waypoints: plan.route.waypoints.len(),
            waypoints,
            report,
            worst,
        };
        self.write_json(&dir.join("summary.json"), &summary)?;
        self.emit_comparison(
            &dir,
            &summary.report,
            summary.worst.as_ref().zip(worst_records.as_ref()),
            &lines,
        )?;
        Ok(summary)
    }
}
