//! Multi-fidelity ship motion pipeline.
//!
//! * [`seaway`]: bimodal, bidirectional irregular wave fields.
//! * [`hull`]: station offsets, Bonjean tables and volume-based
//!   hydrostatic / Froude–Krylov forcing.
//! * [`sim`]: 3-DOF (heave, roll, pitch) time-domain simulation at two
//!   fidelities plus record import/export.
//! * [`lstm`]: stacked-LSTM sequence corrector trained with BPTT.
//! * [`voyage`]: great-circle routes, weather histograms, ensemble
//!   statistics and comparison reports.
//! * [`pipeline`]: the batch campaign driving the command-line front-end.

pub mod config;
pub mod error;
pub mod hull;
pub mod lstm;
pub mod pipeline;
pub mod rng;
pub mod seaway;
pub mod sim;
pub mod voyage;

pub use error::{EpochLoss, Error, Result};
pub use hull::{BonjeanTable, HullKind, HullOffsets, Particulars, Pose};
pub use lstm::{LstmNetwork, Standardizer, TrainConfig};
pub use seaway::{BimodalSeaState, SpectrumParams, WaveComponent, WaveField, WaveSample};
pub use sim::{Fidelity, MotionRecord, SimConfig};
pub use voyage::{VoyagePlan, VoyageSummary, WeatherHistogram};

pub const GRAVITY: f64 = 9.81;
pub const WATER_DENSITY: f64 = 1025.0;
pub const KNOT: f64 = 1852.0 / 3600.0;

/// Formats a value with 9 significant digits, the precision of every CSV
/// artifact.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}
