//! Stacked-LSTM sequence corrector.
//!
//! The network maps standardized lofi motions and wave channels
//! (heave, roll, pitch, zeta, dzdx, dzdy) to standardized reference
//! motions (heave, roll, pitch). Parameters are stored as flat row-major
//! arrays; gradients come from hand-written backpropagation through time.

mod backprop;
mod network;
mod standardize;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Fidelity, MotionRecord};

pub use backprop::{bptt_gradients, mse};
pub use network::{
    cell_forward, network_forward, CellState, Dense, Gate, LstmLayerParams, LstmNetwork,
};
pub use standardize::Standardizer;
pub use train::{
    clip_global_norm, evaluate, moving_average, train, Adam, Dataset, Sequence, TrainConfig,
    TrainReport, DIVERGENCE_LOSS,
};

pub const INPUT_WIDTH: usize = 6;
pub const TARGET_WIDTH: usize = 3;
pub const CHECKPOINT_VERSION: u32 = 1;

/// Row-major input rows `[start, start + len)` of a record.
pub fn record_inputs(rec: &MotionRecord, start: usize, len: usize) -> Result<Vec<f64>> {
    if start + len > rec.len() {
        return Err(Error::Dimension(format!(
            "window [{start}, {}) exceeds record length {}",
            start + len,
            rec.len()
        )));
    }
    Ok((start..start + len).flat_map(|i| rec.input_row(i)).collect())
}

/// Row-major heave, roll, pitch rows `[start, start + len)` of a record.
pub fn record_targets(rec: &MotionRecord, start: usize, len: usize) -> Result<Vec<f64>> {
    if start + len > rec.len() {
        return Err(Error::Dimension(format!(
            "window [{start}, {}) exceeds record length {}",
            start + len,
            rec.len()
        )));
    }
    Ok((start..start + len)
        .flat_map(|i| [rec.heave[i], rec.roll[i], rec.pitch[i]])
        .collect())
}

/// Raw (unstandardized) training pair from time-aligned lofi and reference records.
pub fn training_pair(
    lofi: &MotionRecord,
    reference: &MotionRecord,
    start: usize,
    len: usize,
) -> Result<Sequence> {
    if lofi.len() != reference.len()
        || lofi
            .t
            .iter()
            .zip(&reference.t)
            .any(|(a, b)| (a - b).abs() > crate::sim::GRID_TOLERANCE)
    {
        return Err(Error::Dimension(
            "lofi and reference records are not time-aligned".into(),
        ));
    }
    Ok(Sequence {
        input: record_inputs(lofi, start, len)?,
        target: record_targets(reference, start, len)?,
    })
}

/// Standardizes a raw sequence with training statistics.
pub fn standardize_sequence(st: &Standardizer, raw: &Sequence) -> Result<Sequence> {
    Ok(Sequence {
        input: st.apply_input(&raw.input)?,
        target: st.apply_target(&raw.target)?,
    })
}

/// Runs a lofi record through the network and returns the corrected record.
pub fn correct(net: &LstmNetwork, st: &Standardizer, lofi: &MotionRecord) -> Result<MotionRecord> {
    if net.input_width() != INPUT_WIDTH
        || net.output_width() != TARGET_WIDTH
        || st.input_width() != INPUT_WIDTH
        || st.target_width() != TARGET_WIDTH
    {
        return Err(Error::Dimension(format!(
            "corrector must map {INPUT_WIDTH} to {TARGET_WIDTH} channels"
        )));
    }
    lofi.validate()?;
    let x = st.apply_input(&record_inputs(lofi, 0, lofi.len())?)?;
    let y = st.invert_target(&network_forward(net, &x)?)?;
    let mut out = lofi.clone();
    for (i, row) in y.chunks_exact(TARGET_WIDTH).enumerate() {
        out.heave[i] = row[0];
        out.roll[i] = row[1];
        out.pitch[i] = row[2];
    }
    out.meta.fidelity = Fidelity::LstmCorrected;
    Ok(out)
}

/// Trained corrector for one relative heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub heading_deg: Option<u32>,
    pub master_seed: Option<u64>,
    pub config_hash: Option<String>,
    pub layer_shapes: Vec<[usize; 2]>,
    pub train_config: TrainConfig,
    pub standardizer: Standardizer,
    pub network: LstmNetwork,
}

impl Checkpoint {
    pub fn new(network: LstmNetwork, standardizer: Standardizer, train_config: TrainConfig) -> Self {
        let layer_shapes = network.layers.iter().map(|l| [l.hidden, l.input]).collect();
        Self {
            version: CHECKPOINT_VERSION,
            heading_deg: None,
            master_seed: None,
            config_hash: None,
            layer_shapes,
            train_config,
            standardizer,
            network,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        self.network.validate()?;
        self.standardizer.validate()?;
        let shapes: Vec<[usize; 2]> = self.network.layers.iter().map(|l| [l.hidden, l.input]).collect();
        if shapes != self.layer_shapes {
            return Err(Error::Format(format!(
                "declared layer shapes {:?} differ from stored parameters {shapes:?}",
                self.layer_shapes
            )));
        }
        if self.standardizer.input_width() != self.network.input_width()
            || self.standardizer.target_width() != self.network.output_width()
        {
            return Err(Error::Format(
                "standardizer widths do not match the network".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn correct(&self, lofi: &MotionRecord) -> Result<MotionRecord> {
        correct(&self.network, &self.standardizer, lofi)
    }
}

#[cfg(test)]
mod tests;
