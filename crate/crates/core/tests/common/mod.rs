//! Independent oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use seakeep_core::hull::{generate_hull, ExcitationScales, DEFAULT_Z_SAMPLES};
use seakeep_core::sim::{simulate, InitialOffset, SimConfig, Vessel};
use seakeep_core::{
    BonjeanTable, Fidelity, HullKind, Particulars, Pose, WaveField, GRAVITY, WATER_DENSITY,
};

pub const BOX_L: f64 = 100.0;
pub const BOX_B: f64 = 20.0;
pub const BOX_T: f64 = 5.0;
pub const BOX_KG: f64 = 7.0;

pub fn box_particulars() -> Particulars {
    Particulars {
        lwl_m: BOX_L,
        beam_m: BOX_B,
        draft_m: BOX_T,
        disp_t: WATER_DENSITY * BOX_L * BOX_B * BOX_T / 1000.0,
        kg_m: BOX_KG,
        lcg_m: BOX_L / 2.0,
    }
}

pub fn box_vessel() -> Vessel {
    let h = generate_hull(HullKind::Box, box_particulars()).unwrap();
    Vessel::new(BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap(), "box").unwrap()
}

pub fn frigate() -> Vessel {
    let h = generate_hull(HullKind::FrigateParametric, Particulars::dtmb5415()).unwrap();
    Vessel::new(BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap(), h.id).unwrap()
}

pub fn deep_water_omega(wavelength: f64) -> f64 {
    (GRAVITY * 2.0 * PI / wavelength).sqrt()
}

/// Composite Simpson rule on `n` (even) panels.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Wave-induced heave force and bow-up pitch moment on the upright box at
/// its design waterline, from linear incident pressure
/// p = ρg(−z) + ρg·ζ(x)·e^{kz} integrated over the bottom and both end faces.
pub fn box_pressure_forces(field: &WaveField, k: f64, t: f64) -> (f64, f64) {
    let rho_g = WATER_DENSITY * GRAVITY;
    let half = BOX_L / 2.0;
    // Earth x of a point at longitudinal offset xi forward of the CG (course 0).
    let zeta = |xi: f64| field.elevation(xi, 0.0, t);
    let z_cg = BOX_KG - BOX_T;
    let bottom = (-k * BOX_T).exp();
    let heave = rho_g * BOX_B * bottom * simpson(-half, half, 2000, zeta);
    let bottom_moment = rho_g * BOX_B * bottom * simpson(-half, half, 2000, |xi| xi * zeta(xi));
    // End faces: the pressure pushes inward; bow-up moment is r_x·F_z − r_z·F_x.
    let face = |xi: f64| {
        simpson(-BOX_T, 0.0, 400, |z| (z - z_cg) * rho_g * zeta(xi) * (k * z).exp())
    };
    let end_moment = BOX_B * (face(half) - face(-half));
    (heave, bottom_moment + end_moment)
}

/// Volume-method wave-induced heave and pitch for the same pose and instant.
pub fn box_volume_forces(vessel: &Vessel, field: &WaveField, t: f64) -> (f64, f64) {
    let pose = Pose {
        z: vessel.equilibrium.z,
        pitch: vessel.equilibrium.pitch,
        ..Default::default()
    };
    let scales = ExcitationScales::default();
    let wave = vessel.table.forces(field, &pose, t, scales).unwrap();
    let calm = vessel.table.forces(&WaveField::calm(), &pose, t, scales).unwrap();
    (wave.heave - calm.heave, wave.pitch - calm.pitch)
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// RMS of the difference relative to the RMS of the oracle.
pub fn relative_rms(model: &[f64], oracle: &[f64]) -> f64 {
    let d: Vec<f64> = model.iter().zip(oracle).map(|(a, b)| a - b).collect();
    rms(&d) / rms(oracle)
}

/// Relative RMS heave and pitch errors of the volume method over one period
/// of a regular head wave of length `wavelength`.
pub fn box_oracle_errors(wavelength: f64, amplitude: f64) -> (f64, f64) {
    let vessel = box_vessel();
    let omega = deep_water_omega(wavelength);
    let k = 2.0 * PI / wavelength;
    let field = WaveField::regular(amplitude, omega, 0.0, 0.3, 0.0);
    let period = 2.0 * PI / omega;
    let n = 64;
    let (mut mh, mut mp, mut oh, mut op) = (vec![], vec![], vec![], vec![]);
    for i in 0..n {
        let t = period * i as f64 / n as f64;
        let (h, p) = box_volume_forces(&vessel, &field, t);
        let (h0, p0) = box_pressure_forces(&field, k, t);
        mh.push(h);
        mp.push(p);
        oh.push(h0);
        op.push(p0);
    }
    (relative_rms(&mh, &oh), relative_rms(&mp, &op))
}

/// Mean up-crossing period of a zero-mean signal.
pub fn mean_period(t: &[f64], x: &[f64]) -> f64 {
    let mut ups = Vec::new();
    for i in 1..x.len() {
        if x[i - 1] < 0.0 && x[i] >= 0.0 {
            let f = x[i - 1] / (x[i - 1] - x[i]);
            ups.push(t[i - 1] + f * (t[i] - t[i - 1]));
        }
    }
    assert!(ups.len() >= 2, "too few crossings");
    (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64
}

/// Measured and linearly predicted damped roll period of a free decay.
pub fn roll_decay_periods(vessel: &Vessel, initial_deg: f64) -> (f64, f64) {
    let cfg = SimConfig {
        duration: 300.0,
        ramp: 0.0,
        speed_kts: 0.0,
        ..SimConfig::default()
    };
    let rec = simulate(
        vessel,
        &WaveField::calm(),
        &cfg,
        Fidelity::Lofi,
        None,
        InitialOffset {
            roll: initial_deg.to_radians(),
            ..Default::default()
        },
    )
    .unwrap();
    let c = vessel.coefficients(&cfg);
    let inertia = vessel.props.ixx + c.a44;
    let wn = (vessel.props.c44 / inertia).sqrt();
    let zeta = c.b44 / (2.0 * (vessel.props.c44 * inertia).sqrt());
    let predicted = 2.0 * PI / (wn * (1.0 - zeta * zeta).sqrt());
    (mean_period(&rec.t, &rec.roll), predicted)
}

/// Simulated and frequency-domain heave amplitude of the box in regular
/// head seas at forward speed.
pub fn box_heave_amplitudes(wavelength: f64, amplitude: f64, speed_kts: f64) -> (f64, f64) {
    let vessel = box_vessel();
    let omega = deep_water_omega(wavelength);
    let k = 2.0 * PI / wavelength;
    let cfg = SimConfig {
        duration: 400.0,
        ramp: 40.0,
        speed_kts,
        heading_deg: 0.0,
        ..SimConfig::default()
    };
    let field = WaveField::regular(amplitude, omega, 0.0, 0.0, cfg.ramp);
    let rec = simulate(&vessel, &field, &cfg, Fidelity::Lofi, None, InitialOffset::default()).unwrap();
    let tail = &rec.heave[rec.len() / 2..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let centred: Vec<f64> = tail.iter().map(|v| v - mean).collect();
    let measured = 2f64.sqrt() * rms(&centred);

    let c = vessel.coefficients(&cfg);
    let we = omega + k * speed_kts * seakeep_core::KNOT;
    let half = k * BOX_L / 2.0;
    let excitation = WATER_DENSITY * GRAVITY * BOX_B * BOX_L * amplitude * (-k * BOX_T).exp()
        * half.sin()
        / half;
    let re = vessel.props.c33 - we * we * (vessel.props.mass + c.a33);
    let im = we * c.b33;
    (measured, excitation.abs() / (re * re + im * im).sqrt())
}
