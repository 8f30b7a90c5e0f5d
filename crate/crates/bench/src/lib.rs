//! Fixtures shared by the criterion benches.

use seakeep_core::hull::{generate_hull, DEFAULT_Z_SAMPLES};
use seakeep_core::rng::{purpose, StreamKey};
use seakeep_core::seaway::{field_for_stream, Discretization, DEFAULT_COMPONENTS};
use seakeep_core::sim::Vessel;
use seakeep_core::{
    BimodalSeaState, BonjeanTable, HullKind, LstmNetwork, Particulars, SpectrumParams, WaveField,
};

pub fn frigate() -> Vessel {
    let h = generate_hull(HullKind::FrigateParametric, Particulars::dtmb5415()).unwrap();
    Vessel::new(BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap(), h.id).unwrap()
}

/// Wind sea from 30° off the bow plus swell from the beam.
pub fn bimodal_sea() -> BimodalSeaState {
    BimodalSeaState::new(
        SpectrumParams::new(3.0, 9.0, 30.0).unwrap(),
        SpectrumParams::new(1.5, 13.0, 90.0).unwrap(),
    )
    .unwrap()
}

pub fn field(realization: u64) -> WaveField {
    field_for_stream(
        &bimodal_sea(),
        DEFAULT_COMPONENTS,
        Discretization::EqualEnergy,
        120.0,
        StreamKey::new(7, purpose::WAVES, realization),
    )
    .unwrap()
}

/// Network of the desk shape with random weights and a matching input sequence.
pub fn network(input: usize, hidden: &[usize], output: usize, steps: usize) -> (LstmNetwork, Vec<f64>, Vec<f64>) {
    let mut rng = StreamKey::new(7, purpose::INIT, 0).rng();
    let net = LstmNetwork::init(input, hidden, output, &mut rng);
    let x = (0..input * steps).map(|i| (0.01 * i as f64).sin()).collect();
    let y = (0..output * steps).map(|i| (0.013 * i as f64).cos()).collect();
    (net, x, y)
}
