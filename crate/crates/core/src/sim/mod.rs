//! 3-DOF (heave, roll, pitch) time-domain seakeeping.
//!
//! Two fidelities share one integrator and force model:
//!
//! * the low-fidelity model: volume-based hydrostatic/Froude–Krylov forcing
//!   plus constant added mass and linear damping, ship held on its ordered
//!   course;
//! * the reference model, a stand-in for a 6-DOF potential-flow code. It adds
//!   quadratic roll damping, a roll-excitation leakage factor standing in for
//!   energy lost to sway and yaw, a reduction of vertical wave excitation
//!   standing in for diffraction, and a slow sinusoidal heading wander standing
//!   in for an autopilot holding course. None of these come from a hydrodynamic
//!   solution; they exist to open a realistic, learnable fidelity gap.

mod record;

pub use record::{
    import_motion_record, sidecar_path, Fidelity, MotionRecord, RecordMeta, RecordStatus,
    GRID_TOLERANCE, RECORD_COLUMNS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{BonjeanTable, ExcitationScales, Pose};
use crate::seaway::{BimodalSeaState, WaveField};
use crate::{GRAVITY, KNOT, WATER_DENSITY};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RigidBodyState {
    /// Heave of the CG from equilibrium (m, up).
    pub z: f64,
    /// Roll (rad, starboard-down).
    pub roll: f64,
    /// Pitch from equilibrium trim (rad, bow-up).
    pub pitch: f64,
    pub z_dot: f64,
    pub roll_dot: f64,
    pub pitch_dot: f64,
    /// Earth-frame position of the CG (m).
    pub x: f64,
    pub y: f64,
}

impl RigidBodyState {
    fn is_finite(&self) -> bool {
        [
            self.z,
            self.roll,
            self.pitch,
            self.z_dot,
            self.roll_dot,
            self.pitch_dot,
            self.x,
            self.y,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    fn add_scaled(&self, d: &Derivative, h: f64) -> Self {
        Self {
            z: self.z + h * d.rates[0],
            roll: self.roll + h * d.rates[1],
            pitch: self.pitch + h * d.rates[2],
            z_dot: self.z_dot + h * d.accel[0],
            roll_dot: self.roll_dot + h * d.accel[1],
            pitch_dot: self.pitch_dot + h * d.accel[2],
            x: self.x + h * d.velocity[0],
            y: self.y + h * d.velocity[1],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Derivative {
    rates: [f64; 3],
    accel: [f64; 3],
    velocity: [f64; 2],
}

/// Generalized forces (heave, roll, pitch) and horizontal velocity at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forcing {
    pub force: [f64; 3],
    pub velocity: [f64; 2],
}

/// One classical RK4 step with a diagonal generalized mass.
pub fn step_rk4<F>(
    state: &RigidBodyState,
    t: f64,
    dt: f64,
    mass: [f64; 3],
    mut forcing: F,
) -> Result<RigidBodyState>
where
    F: FnMut(f64, &RigidBodyState) -> Result<Forcing>,
{
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    let mut eval = |tt: f64, s: &RigidBodyState| -> Result<Derivative> {
        let f = forcing(tt, s)?;
        if f.force.iter().chain(&f.velocity).any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                time: tt,
                reason: "non-finite forcing".into(),
            });
        }
        Ok(Derivative {
            rates: [s.z_dot, s.roll_dot, s.pitch_dot],
            accel: [f.force[0] / mass[0], f.force[1] / mass[1], f.force[2] / mass[2]],
            velocity: f.velocity,
        })
    };
    let k1 = eval(t, state)?;
    let s2 = state.add_scaled(&k1, 0.5 * dt);
    let k2 = eval(t + 0.5 * dt, &s2)?;
    let s3 = state.add_scaled(&k2, 0.5 * dt);
    let k3 = eval(t + 0.5 * dt, &s3)?;
    let s4 = state.add_scaled(&k3, dt);
    let k4 = eval(t + dt, &s4)?;

    let w = dt / 6.0;
    let comb = |a: f64, b: f64, c: f64, d: f64| w * (a + 2.0 * b + 2.0 * c + d);
    let next = RigidBodyState {
        z: state.z + comb(k1.rates[0], k2.rates[0], k3.rates[0], k4.rates[0]),
        roll: state.roll + comb(k1.rates[1], k2.rates[1], k3.rates[1], k4.rates[1]),
        pitch: state.pitch + comb(k1.rates[2], k2.rates[2], k3.rates[2], k4.rates[2]),
        z_dot: state.z_dot + comb(k1.accel[0], k2.accel[0], k3.accel[0], k4.accel[0]),
        roll_dot: state.roll_dot + comb(k1.accel[1], k2.accel[1], k3.accel[1], k4.accel[1]),
        pitch_dot: state.pitch_dot + comb(k1.accel[2], k2.accel[2], k3.accel[2], k4.accel[2]),
        x: state.x + comb(k1.velocity[0], k2.velocity[0], k3.velocity[0], k4.velocity[0]),
        y: state.y + comb(k1.velocity[1], k2.velocity[1], k3.velocity[1], k4.velocity[1]),
    };
    if !next.is_finite() {
        return Err(Error::Integration {
            time: t + dt,
            reason: "non-finite state".into(),
        });
    }
    Ok(next)
}

/// Calm-water floating position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Baseline height at the LCG station (m); negative draft.
    pub z: f64,
    pub pitch: f64,
    /// Normalized force residual reached.
    pub residual: f64,
}

impl Equilibrium {
    pub fn pose(&self) -> Pose {
        Pose {
            z: self.z,
            pitch: self.pitch,
            ..Default::default()
        }
    }
}

/// Damped Newton iteration on (sinkage, trim) in calm water.
pub fn solve_static_equilibrium(table: &BonjeanTable) -> Result<Equilibrium> {
    let p = table.particulars;
    let weight = p.mass() * GRAVITY;
    let volume = p.mass() / WATER_DENSITY;
    let full = table.upright_volume(table.deck());
    if volume > full {
        return Err(Error::Equilibrium(format!(
            "displacement {:.1} t exceeds maximum buoyancy {:.1} t",
            p.disp_t,
            full * WATER_DENSITY / 1000.0
        )));
    }
    // Even-keel draft by bisection gives a good starting point.
    let (mut lo, mut hi) = (table.keel(), table.deck());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if table.upright_volume(mid) < volume {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let calm = WaveField::calm();
    let residual = |z: f64, pitch: f64| -> Result<[f64; 2]> {
        let f = table.forces(
            &calm,
            &Pose {
                z,
                pitch,
                ..Default::default()
            },
            0.0,
            ExcitationScales::default(),
        )?;
        Ok([f.heave / weight, f.pitch / (weight * p.lwl_m)])
    };
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());

    let mut x = [table.keel() - 0.5 * (lo + hi), 0.0];
    let mut r = residual(x[0], x[1])?;
    for _ in 0..100 {
        if norm(r) < 1e-13 {
            break;
        }
        let hz = 1e-6 * p.draft_m;
        let hp = 1e-6;
        let rz = residual(x[0] + hz, x[1])?;
        let rp = residual(x[0], x[1] + hp)?;
        let j = [
            [(rz[0] - r[0]) / hz, (rp[0] - r[0]) / hp],
            [(rz[1] - r[1]) / hz, (rp[1] - r[1]) / hp],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Equilibrium("singular Jacobian".into()));
        }
        let dx = [
            -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
            -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = [x[0] + step * dx[0], (x[1] + step * dx[1]).clamp(-0.7, 0.7)];
            let rc = residual(cand[0], cand[1])?;
            if norm(rc) < norm(r) {
                x = cand;
                r = rc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(r) < 1e-8 {
        Ok(Equilibrium {
            z: x[0],
            pitch: x[1],
            residual: norm(r),
        })
    } else {
        Err(Error::Equilibrium(format!(
            "residual {:.3e} after Newton iteration",
            norm(r)
        )))
    }
}

/// Added mass, damping and reference-model terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroCoefficients {
    pub a33: f64,
    pub a44: f64,
    pub a55: f64,
    pub b33: f64,
    pub b44: f64,
    pub b55: f64,
    pub reference: ReferenceTerms,
}

/// Reference-model extras. All neutral (0 or 1) reproduces the low-fidelity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTerms {
    /// Quadratic roll damping (N·m·s²).
    pub bq44: f64,
    /// Multiplier on the transverse wave slope driving roll, in (0, 1].
    pub roll_leakage: f64,
    /// Multiplier on the wave elevation driving heave and pitch, in (0, 1].
    pub vertical_excitation: f64,
    pub wander_amplitude_deg: f64,
    pub wander_period_s: f64,
}

impl ReferenceTerms {
    pub fn neutral() -> Self {
        Self {
            bq44: 0.0,
            roll_leakage: 1.0,
            vertical_excitation: 1.0,
            wander_amplitude_deg: 0.0,
            wander_period_s: 60.0,
        }
    }
}

/// Tunable recipe from which [`HydroCoefficients`] are derived for a hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecipe {
    /// Added mass as fractions of m, Ixx, Iyy.
    pub added_mass_ratio: [f64; 3],
    /// Linear damping as fractions of critical.
    pub damping_ratio: [f64; 3],
    /// Quadratic roll damping alone halves a decay from this amplitude ...
    pub roll_halving_amplitude_deg: f64,
    /// ... in this many cycles.
    pub roll_halving_cycles: f64,
    pub roll_leakage: f64,
    pub vertical_excitation: f64,
    pub wander_amplitude_deg: f64,
    pub wander_period_s: f64,
}

impl Default for CoefficientRecipe {
    fn default() -> Self {
        Self {
            added_mass_ratio: [0.8, 0.25, 0.9],
            damping_ratio: [0.05, 0.08, 0.05],
            roll_halving_amplitude_deg: 10.0,
            roll_halving_cycles: 5.0,
            roll_leakage: 0.85,
            vertical_excitation: 0.85,
            wander_amplitude_deg: 3.0,
            wander_period_s: 60.0,
        }
    }
}

/// Mass properties and restoring coefficients at equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyProps {
    pub mass: f64,
    pub ixx: f64,
    pub iyy: f64,
    pub c33: f64,
    pub c44: f64,
    pub c55: f64,
}

impl RigidBodyProps {
    pub fn new(table: &BonjeanTable, eq: &Equilibrium) -> Self {
        let p = table.particulars;
        let m = p.mass();
        let hs = table.hydrostatics(&eq.pose());
        let rho_g = WATER_DENSITY * GRAVITY;
        Self {
            mass: m,
            ixx: m * p.kxx().powi(2),
            iyy: m * p.kyy().powi(2),
            c33: rho_g * hs.waterplane_area,
            c44: rho_g * hs.volume * hs.gm,
            c55: rho_g * (hs.long_inertia + hs.volume * (hs.kb - p.kg_m)),
        }
    }
}

impl CoefficientRecipe {
    pub fn resolve(&self, props: &RigidBodyProps) -> HydroCoefficients {
        let [r33, r44, r55] = self.added_mass_ratio;
        let a33 = r33 * props.mass;
        let a44 = r44 * props.ixx;
        let a55 = r55 * props.iyy;
        let crit = |c: f64, m: f64| 2.0 * (c.max(0.0) * m).sqrt();
        let [z33, z44, z55] = self.damping_ratio;
        // Per cycle a quadratic damper removes (8/3)(bq/I)φ² of amplitude, so
        // halving from φ0 in n cycles needs bq = 3I / (8 n φ0).
        let phi0 = self.roll_halving_amplitude_deg.to_radians();
        let bq44 = if self.roll_halving_cycles > 0.0 && phi0 > 0.0 {
            3.0 * (props.ixx + a44) / (8.0 * self.roll_halving_cycles * phi0)
        } else {
            0.0
        };
        HydroCoefficients {
            a33,
            a44,
            a55,
            b33: z33 * crit(props.c33, props.mass + a33),
            b44: z44 * crit(props.c44, props.ixx + a44),
            b55: z55 * crit(props.c55, props.iyy + a55),
            reference: ReferenceTerms {
                bq44,
                roll_leakage: self.roll_leakage,
                vertical_excitation: self.vertical_excitation,
                wander_amplitude_deg: self.wander_amplitude_deg,
                wander_period_s: self.wander_period_s,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt_integrate: f64,
    pub dt_record: f64,
    pub duration: f64,
    pub ramp: f64,
    pub speed_kts: f64,
    pub heading_deg: f64,
    pub recipe: CoefficientRecipe,
    /// Explicit coefficients; derived from `recipe` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<HydroCoefficients>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_integrate: 0.05,
            dt_record: 0.1,
            duration: 1920.0,
            ramp: 120.0,
            speed_kts: 10.0,
            heading_deg: 0.0,
            recipe: CoefficientRecipe::default(),
            coefficients: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_integrate > 0.0) || !(self.dt_record > 0.0) {
            return Err(Error::InvalidArgument("time steps must be positive".into()));
        }
        let ratio = self.dt_record / self.dt_integrate;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "dt_record {} is not an integer multiple of dt_integrate {}",
                self.dt_record, self.dt_integrate
            )));
        }
        if !(self.duration > self.ramp) || !(self.ramp >= 0.0) {
            return Err(Error::InvalidArgument("duration must exceed ramp".into()));
        }
        if !(self.speed_kts >= 0.0) {
            return Err(Error::InvalidArgument("speed must be >= 0".into()));
        }
        Ok(())
    }

    pub fn record_len(&self) -> usize {
        (self.duration / self.dt_record + 1e-9).floor() as usize
    }

    pub fn ramp_samples(&self) -> usize {
        (self.ramp / self.dt_record - 1e-9).ceil() as usize
    }

    fn substeps(&self) -> usize {
        (self.dt_record / self.dt_integrate).round() as usize
    }
}

/// A hull prepared for simulation: Bonjean table, equilibrium and coefficients.
#[derive(Debug, Clone)]
pub struct Vessel {
    pub table: BonjeanTable,
    pub hull_id: String,
    pub equilibrium: Equilibrium,
    pub props: RigidBodyProps,
}

impl Vessel {
    pub fn new(table: BonjeanTable, hull_id: impl Into<String>) -> Result<Self> {
        let equilibrium = solve_static_equilibrium(&table)?;
        let props = RigidBodyProps::new(&table, &equilibrium);
        Ok(Self {
            table,
            hull_id: hull_id.into(),
            equilibrium,
            props,
        })
    }

    pub fn coefficients(&self, cfg: &SimConfig) -> HydroCoefficients {
        cfg.coefficients
            .unwrap_or_else(|| cfg.recipe.resolve(&self.props))
    }

    /// Diagonal generalized mass (m + a33, Ixx + a44, Iyy + a55).
    pub fn generalized_mass(&self, c: &HydroCoefficients) -> [f64; 3] {
        [
            self.props.mass + c.a33,
            self.props.ixx + c.a44,
            self.props.iyy + c.a55,
        ]
    }
}

/// Initial condition for free-decay runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialOffset {
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
}

pub fn simulate(
    vessel: &Vessel,
    field: &WaveField,
    cfg: &SimConfig,
    fidelity: Fidelity,
    sea_state: Option<BimodalSeaState>,
    initial: InitialOffset,
) -> Result<MotionRecord> {
    cfg.validate()?;
    let coeffs = vessel.coefficients(cfg);
    let terms = match fidelity {
        Fidelity::Reference => coeffs.reference,
        _ => ReferenceTerms::neutral(),
    };
    let mass = vessel.generalized_mass(&coeffs);
    let scales = ExcitationScales {
        vertical: terms.vertical_excitation,
        transverse: terms.roll_leakage,
    };
    let speed = cfg.speed_kts * KNOT;
    let ordered = cfg.heading_deg.to_radians();
    let wander_amp = terms.wander_amplitude_deg.to_radians();
    let wander_w = if terms.wander_period_s > 0.0 {
        2.0 * std::f64::consts::PI / terms.wander_period_s
    } else {
        0.0
    };
    let course = |t: f64| {
        if wander_amp == 0.0 {
            ordered
        } else {
            ordered + wander_amp * (wander_w * t).sin()
        }
    };
    let eq = vessel.equilibrium;
    let table = &vessel.table;

    let forcing = |t: f64, s: &RigidBodyState| -> Result<Forcing> {
        let chi = course(t);
        let pose = Pose {
            z: eq.z + s.z,
            roll: s.roll,
            pitch: eq.pitch + s.pitch,
            x: s.x,
            y: s.y,
            course: chi,
        };
        let f = table.forces(field, &pose, t, scales)?;
        let (sc, cc) = chi.sin_cos();
        Ok(Forcing {
            force: [
                f.heave - coeffs.b33 * s.z_dot,
                f.roll - coeffs.b44 * s.roll_dot - terms.bq44 * s.roll_dot.abs() * s.roll_dot,
                f.pitch - coeffs.b55 * s.pitch_dot,
            ],
            velocity: [speed * cc, speed * sc],
        })
    };

    let n = cfg.record_len();
    let sub = cfg.substeps();
    let meta = RecordMeta {
        sea_state,
        heading_deg: cfg.heading_deg,
        speed_kts: cfg.speed_kts,
        seed: field.seed,
        fidelity,
        hull_id: vessel.hull_id.clone(),
        ramp_samples: cfg.ramp_samples(),
        status: RecordStatus::Complete,
        provenance: None,
    };
    let mut rec = MotionRecord::with_capacity(n, meta);
    let mut state = RigidBodyState {
        z: initial.z,
        roll: initial.roll,
        pitch: initial.pitch,
        ..Default::default()
    };
    let mut step = 0usize;
    for i in 0..n {
        let t = i as f64 * cfg.dt_record;
        let w = field.elevation_and_slopes(state.x, state.y, t);
        rec.t.push(t);
        rec.heave.push(state.z);
        rec.roll.push(state.roll.to_degrees());
        rec.pitch.push(state.pitch.to_degrees());
        rec.zeta.push(w.zeta);
        rec.dzdx.push(w.dzdx);
        rec.dzdy.push(w.dzdy);
        if i + 1 == n {
            break;
        }
        for _ in 0..sub {
            let ts = step as f64 * cfg.dt_integrate;
            match step_rk4(&state, ts, cfg.dt_integrate, mass, &forcing) {
                Ok(next) => state = next,
                Err(e) => {
                    rec.meta.status = RecordStatus::Truncated {
                        time: ts,
                        reason: e.to_string(),
                    };
                    return Ok(rec);
                }
            }
            step += 1;
        }
    }
    Ok(rec)
}

/// Low-fidelity run starting at rest in equilibrium.
pub fn simulate_lofi(vessel: &Vessel, field: &WaveField, cfg: &SimConfig) -> Result<MotionRecord> {
    simulate(vessel, field, cfg, Fidelity::Lofi, None, InitialOffset::default())
}

/// Reference-model run starting at rest in equilibrium.
pub fn simulate_hifi_ref(
    vessel: &Vessel,
    field: &WaveField,
    cfg: &SimConfig,
) -> Result<MotionRecord> {
    simulate(vessel, field, cfg, Fidelity::Reference, None, InitialOffset::default())
}
