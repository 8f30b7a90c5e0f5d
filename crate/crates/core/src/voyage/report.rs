use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seaway::BimodalSeaState;
use crate::sim::MotionRecord;

use super::stats::{ape, cross_correlation_peak, gaussian_kde, median, Bandwidth, Kde, KDE_GRID_POINTS};

pub const DOF_NAMES: [&str; 3] = ["heave", "roll", "pitch"];

/// Heave (m), roll (deg), pitch (deg) standard deviations.
pub type DofStd = [f64; 3];
pub type StatSet = BTreeMap<String, DofStd>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub key: String,
    pub sea_state: BimodalSeaState,
    pub lofi: DofStd,
    pub corrected: DofStd,
    pub reference: DofStd,
    pub ape_lofi: DofStd,
    pub ape_corrected: DofStd,
}

/// Lofi, corrected and reference densities of one motion channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeTriplet {
    pub dof: String,
    pub lofi: Kde,
    pub corrected: Kde,
    pub reference: Kde,
}

impl KdeTriplet {
    pub fn curves(&self) -> [(&'static str, &Kde); 3] {
        [
            ("lofi", &self.lofi),
            ("lstm-corrected", &self.corrected),
            ("reference", &self.reference),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ErrorRow>,
    pub median_ape_lofi: DofStd,
    pub median_ape_corrected: DofStd,
    /// Fraction of conditions where the corrected error is below the lofi error.
    pub improved_fraction: DofStd,
    /// Median over conditions of 1 − APE_corrected / APE_lofi.
    pub median_reduction: DofStd,
    /// Absent when fewer than two distinct values exist.
    pub kde: Vec<KdeTriplet>,
    pub worst: Option<String>,
}

impl ComparisonReport {
    pub fn row(&self, key: &str) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.key == key)
    }
}

/// Largest combined significant wave height; ties go to the larger primary.
pub fn worst_condition<'a, I>(conditions: I) -> Option<String>
where
    I: IntoIterator<Item = (&'a String, &'a BimodalSeaState)>,
{
    conditions
        .into_iter()
        .max_by(|a, b| {
            a.1.combined_hs()
                .total_cmp(&b.1.combined_hs())
                .then(a.1.primary.hs.total_cmp(&b.1.primary.hs))
                .then(b.0.cmp(a.0))
        })
        .map(|(k, _)| k.clone())
}

/// Three significant digits, as in "34.7%" or "193%".
pub fn format_percent(v: f64) -> String {
    let a = v.abs();
    if a >= 100.0 {
        format!("{v:.0}%")
    } else if a >= 10.0 {
        format!("{v:.1}%")
    } else {
        format!("{v:.2}%")
    }
}

/// One report line, e.g. `roll: 34.7% (corrected) vs 193% (lofi)`.
pub fn format_error_row(dof: &str, ape_corrected: f64, ape_lofi: f64) -> String {
    format!(
        "{dof}: {} (corrected) vs {} (lofi)",
        format_percent(ape_corrected),
        format_percent(ape_lofi)
    )
}

/// Per-condition error table, aggregate medians, KDE triplets and the worst condition.
pub fn compare_report(
    lofi: &StatSet,
    corrected: &StatSet,
    reference: &StatSet,
    conditions: &BTreeMap<String, BimodalSeaState>,
) -> Result<ComparisonReport> {
    let mut missing = Vec::new();
    for k in conditions.keys() {
        for (tag, set) in [("lofi", lofi), ("lstm-corrected", corrected), ("reference", reference)] {
            if !set.contains_key(k) {
                missing.push(format!("{tag}:{k}"));
            }
        }
    }
    for (tag, set) in [("lofi", lofi), ("lstm-corrected", corrected), ("reference", reference)] {
        for k in set.keys() {
            if !conditions.contains_key(k) {
                missing.push(format!("condition:{k} ({tag})"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Alignment(missing));
    }
    if conditions.is_empty() {
        return Err(Error::Statistics("no conditions to compare".into()));
    }

    let mut rows = Vec::with_capacity(conditions.len());
    for (key, sea) in conditions {
        let (l, c, r) = (lofi[key], corrected[key], reference[key]);
        let mut ape_lofi = [0.0; 3];
        let mut ape_corrected = [0.0; 3];
        for d in 0..3 {
            ape_lofi[d] = ape(l[d], r[d])?;
            ape_corrected[d] = ape(c[d], r[d])?;
        }
        rows.push(ErrorRow {
            key: key.clone(),
            sea_state: *sea,
            lofi: l,
            corrected: c,
            reference: r,
            ape_lofi,
            ape_corrected,
        });
    }

    let mut median_ape_lofi = [0.0; 3];
    let mut median_ape_corrected = [0.0; 3];
    let mut improved_fraction = [0.0; 3];
    let mut median_reduction = [0.0; 3];
    for d in 0..3 {
        let al: Vec<f64> = rows.iter().map(|r| r.ape_lofi[d]).collect();
        let ac: Vec<f64> = rows.iter().map(|r| r.ape_corrected[d]).collect();
        median_ape_lofi[d] = median(&al)?;
        median_ape_corrected[d] = median(&ac)?;
        improved_fraction[d] =
            rows.iter().filter(|r| r.ape_corrected[d] < r.ape_lofi[d]).count() as f64 / rows.len() as f64;
        let red: Vec<f64> = rows
            .iter()
            .map(|r| {
                if r.ape_lofi[d] > 0.0 {
                    1.0 - r.ape_corrected[d] / r.ape_lofi[d]
                } else if r.ape_corrected[d] == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        median_reduction[d] = median(&red)?;
    }

    let mut kde = Vec::new();
    for (d, name) in DOF_NAMES.iter().enumerate() {
        let pick = |f: fn(&ErrorRow) -> DofStd| -> Vec<f64> { rows.iter().map(|r| f(r)[d]).collect() };
        let curves = (
            gaussian_kde(&pick(|r| r.lofi), Bandwidth::Silverman, KDE_GRID_POINTS),
            gaussian_kde(&pick(|r| r.corrected), Bandwidth::Silverman, KDE_GRID_POINTS),
            gaussian_kde(&pick(|r| r.reference), Bandwidth::Silverman, KDE_GRID_POINTS),
        );
        match curves {
            (Ok(lofi), Ok(corrected), Ok(reference)) => kde.push(KdeTriplet {
                dof: name.to_string(),
                lofi,
                corrected,
                reference,
            }),
            _ => log::warn!("skipping {name} KDE: too few distinct values"),
        }
    }

    Ok(ComparisonReport {
        worst: worst_condition(conditions.iter()),
        rows,
        median_ape_lofi,
        median_ape_corrected,
        improved_fraction,
        median_reduction,
        kde,
    })
}

/// Time-domain comparison of one realization of the worst condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub key: String,
    pub realization: usize,
    pub sea_state: BimodalSeaState,
    pub ape_lofi: DofStd,
    pub ape_corrected: DofStd,
    /// Peak normalized cross-correlation against the reference.
    pub xcorr_lofi: DofStd,
    pub xcorr_corrected: DofStd,
    /// Lag of that peak (s).
    pub lag_lofi_s: DofStd,
    pub lag_corrected_s: DofStd,
    pub lines: Vec<String>,
}

/// Cross-correlates the post-ramp motions of one worst-condition realization.
pub fn worst_case(
    row: &ErrorRow,
    realization: usize,
    lofi: &MotionRecord,
    corrected: &MotionRecord,
    reference: &MotionRecord,
    max_lag_s: f64,
) -> Result<WorstCase> {
    if lofi.len() != reference.len() || corrected.len() != reference.len() {
        return Err(Error::Dimension("worst-case records differ in length".into()));
    }
    let dt = reference.dt();
    let skip = reference.meta.ramp_samples.min(reference.len());
    let max_lag = if dt > 0.0 { (max_lag_s / dt).round() as usize } else { 0 };
    let mut w = WorstCase {
        key: row.key.clone(),
        realization,
        sea_state: row.sea_state,
        ape_lofi: row.ape_lofi,
        ape_corrected: row.ape_corrected,
        xcorr_lofi: [0.0; 3],
        xcorr_corrected: [0.0; 3],
        lag_lofi_s: [0.0; 3],
        lag_corrected_s: [0.0; 3],
        lines: Vec::new(),
    };
    let s = &row.sea_state;
    w.lines.push(format!(
        "worst condition {}: Hs {} m / Tp {} s from {:.1} deg, Hs {} m / Tp {} s from {:.1} deg",
        row.key, s.primary.hs, s.primary.tp, s.primary.dir, s.secondary.hs, s.secondary.tp, s.secondary.dir
    ));
    for d in 0..3 {
        let r = &reference.motion(d)[skip..];
        let (pl, ll) = cross_correlation_peak(&lofi.motion(d)[skip..], r, max_lag)?;
        let (pc, lc) = cross_correlation_peak(&corrected.motion(d)[skip..], r, max_lag)?;
        w.xcorr_lofi[d] = pl;
        w.xcorr_corrected[d] = pc;
        w.lag_lofi_s[d] = ll as f64 * dt;
        w.lag_corrected_s[d] = lc as f64 * dt;
        w.lines.push(format_error_row(DOF_NAMES[d], row.ape_corrected[d], row.ape_lofi[d]));
        w.lines.push(format!(
            "{}: xcorr {pc:.3} at {:.1} s (corrected) vs {pl:.3} at {:.1} s (lofi)",
            DOF_NAMES[d], w.lag_corrected_s[d], w.lag_lofi_s[d]
        ));
    }
    Ok(w)
}
