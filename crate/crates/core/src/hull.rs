//! Hull geometry, Bonjean tables and volume-based sectional forcing.
//!
//! Body axes: x forward, y to port, z up. Roll is positive starboard-down and
//! pitch positive bow-up. Stations are measured aft from the forward
//! perpendicular, so the lever of a station ahead of the centre of gravity
//! is `lcg - x`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seaway::WaveField;
use crate::{sig9, GRAVITY, WATER_DENSITY};

pub const DEFAULT_STATIONS: usize = 21;
pub const DEFAULT_Z_SAMPLES: usize = 101;
pub const MAX_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

/// Principal particulars; key names match the run-configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particulars {
    pub lwl_m: f64,
    pub beam_m: f64,
    pub draft_m: f64,
    pub disp_t: f64,
    pub kg_m: f64,
    pub lcg_m: f64,
}

impl Particulars {
    /// Full-scale frigate particulars (DTMB 5415).
    pub fn dtmb5415() -> Self {
        Self {
            lwl_m: 142.0,
            beam_m: 19.06,
            draft_m: 6.51,
            disp_t: 9156.38,
            kg_m: 7.71,
            lcg_m: 72.1,
        }
    }

    pub fn mass(&self) -> f64 {
        self.disp_t * 1000.0
    }

    /// Radius of gyration in roll, 0.37·B.
    pub fn kxx(&self) -> f64 {
        0.37 * self.beam_m
    }

    /// Radius of gyration in pitch, 0.25·Lwl.
    pub fn kyy(&self) -> f64 {
        0.25 * self.lwl_m
    }

    fn check_positive(&self) -> Result<()> {
        for (name, v) in [
            ("lwl_m", self.lwl_m),
            ("beam_m", self.beam_m),
            ("draft_m", self.draft_m),
            ("disp_t", self.disp_t),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Construction(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.kg_m.is_finite() || !self.lcg_m.is_finite() {
            return Err(Error::Construction("kg_m and lcg_m must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullKind {
    Box,
    FrigateParametric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub x: f64,
    pub z: Vec<f64>,
    pub half_breadth: Vec<f64>,
}

impl Station {
    fn half_breadth_at(&self, z: f64) -> f64 {
        interp(&self.z, &self.half_breadth, z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullOffsets {
    pub id: String,
    pub stations: Vec<Station>,
    pub particulars: Particulars,
}

impl HullOffsets {
    pub fn validate(&self) -> Result<()> {
        if self.stations.len() < 2 {
            return Err(Error::Construction("need at least two stations".into()));
        }
        for w in self.stations.windows(2) {
            if !(w[1].x > w[0].x) {
                return Err(Error::Construction(format!(
                    "station x must increase strictly ({} then {})",
                    w[0].x, w[1].x
                )));
            }
        }
        for s in &self.stations {
            if s.z.len() < 2 || s.z.len() != s.half_breadth.len() {
                return Err(Error::Construction(format!(
                    "station {} needs >= 2 matching z/half-breadth samples",
                    s.x
                )));
            }
            if s.z.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Construction(format!(
                    "station {} z must increase strictly",
                    s.x
                )));
            }
            if s.half_breadth.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
                return Err(Error::Construction(format!(
                    "station {} has a negative or non-finite half-breadth",
                    s.x
                )));
            }
        }
        Ok(())
    }

    pub fn keel(&self) -> f64 {
        self.stations
            .iter()
            .map(|s| s.z[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn depth(&self) -> f64 {
        self.stations
            .iter()
            .map(|s| *s.z.last().unwrap())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["station_x", "z", "half_breadth"])?;
        for s in &self.stations {
            for (z, b) in s.z.iter().zip(&s.half_breadth) {
                w.write_record([sig9(s.x), sig9(*z), sig9(*b)])?;
            }
        }
        w.flush().map_err(|e| Error::io("<offsets>", e))?;
        Ok(())
    }

    /// Reads offsets; rows of one station must be contiguous.
    pub fn read_csv<R: Read>(input: R, id: &str, particulars: Particulars) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let expect = ["station_x", "z", "half_breadth"];
        if headers.iter().collect::<Vec<_>>() != expect {
            return Err(Error::Format(format!(
                "offsets header must be {}, got {}",
                expect.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut stations: Vec<Station> = Vec::new();
        for (i, row) in r.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let vals: Vec<f64> = row
                .iter()
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("line {line}: bad number {v:?}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != 3 {
                return Err(Error::Format(format!("line {line}: expected 3 fields")));
            }
            match stations.last_mut() {
                Some(s) if s.x == vals[0] => {
                    s.z.push(vals[1]);
                    s.half_breadth.push(vals[2]);
                }
                _ => stations.push(Station {
                    x: vals[0],
                    z: vec![vals[1]],
                    half_breadth: vec![vals[2]],
                }),
            }
        }
        let h = HullOffsets {
            id: id.to_string(),
            stations,
            particulars,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn load(path: &Path, particulars: Particulars) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "offsets".into());
        Self::read_csv(f, &id, particulars)
    }
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Parametric frigate: separable half-breadth `B/2 · w(x) · v(z)`.
struct FrigateShape {
    bow_exponent: f64,
    section_exponent: f64,
}

const TRANSOM_FRACTION: f64 = 0.35;
const STERN_EXPONENT: f64 = 2.0;

impl FrigateShape {
    /// Waterline fraction at `u` in [-1, 1], -1 at the forward perpendicular.
    fn waterline(&self, u: f64) -> f64 {
        if u < 0.0 {
            1.0 - (-u).powf(self.bow_exponent)
        } else {
            1.0 - (1.0 - TRANSOM_FRACTION) * u.powf(STERN_EXPONENT)
        }
    }

    fn section(&self, z: f64, draft: f64) -> f64 {
        if z >= draft {
            1.0
        } else {
            (z / draft).max(0.0).powf(self.section_exponent)
        }
    }

    fn offsets(&self, p: &Particulars, depth: f64) -> Vec<Station> {
        let xs = uniform(0.0, p.lwl_m, DEFAULT_STATIONS);
        // Dense near the keel where the section exponent bends the curve.
        let mut zs: Vec<f64> = (0..=40)
            .map(|i| p.draft_m * (i as f64 / 40.0).powi(2))
            .collect();
        zs.extend(uniform(p.draft_m, depth, 9).into_iter().skip(1));
        xs.iter()
            .map(|&x| {
                let w = self.waterline(2.0 * x / p.lwl_m - 1.0);
                Station {
                    x,
                    z: zs.clone(),
                    half_breadth: zs
                        .iter()
                        .map(|&z| 0.5 * p.beam_m * w * self.section(z, p.draft_m))
                        .collect(),
                }
            })
            .collect()
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn generate_hull(kind: HullKind, p: Particulars) -> Result<HullOffsets> {
    p.check_positive()?;
    match kind {
        HullKind::Box => {
            let depth = 2.0 * p.draft_m;
            let stations = uniform(0.0, p.lwl_m, DEFAULT_STATIONS)
                .into_iter()
                .map(|x| Station {
                    x,
                    z: vec![0.0, depth],
                    half_breadth: vec![0.5 * p.beam_m; 2],
                })
                .collect();
            let h = HullOffsets {
                id: "box".into(),
                stations,
                particulars: p,
            };
            h.validate()?;
            Ok(h)
        }
        HullKind::FrigateParametric => {
            let box_disp = WATER_DENSITY * p.lwl_m * p.beam_m * p.draft_m / 1000.0;
            if p.disp_t > box_disp {
                return Err(Error::Construction(format!(
                    "displacement {} t exceeds the enclosing box {box_disp:.1} t",
                    p.disp_t
                )));
            }
            let depth = 1.9 * p.draft_m;
            // Place the waterplane centroid under the centre of gravity.
            let lcf_error = |bow: f64| {
                let shape = FrigateShape {
                    bow_exponent: bow,
                    section_exponent: 1.0,
                };
                let xs = uniform(0.0, p.lwl_m, 2001);
                let ws: Vec<f64> = xs
                    .iter()
                    .map(|&x| shape.waterline(2.0 * x / p.lwl_m - 1.0))
                    .collect();
                let area = trapz(&xs, &ws);
                let moment = trapz(&xs, &xs.iter().zip(&ws).map(|(x, w)| x * w).collect::<Vec<_>>());
                moment / area - p.lcg_m
            };
            let bow_exponent = if lcf_error(1.0) * lcf_error(12.0) < 0.0 {
                bisect(1.0, 12.0, lcf_error)
            } else {
                3.0
            };
            let disp_for = |s: f64| -> f64 {
                let shape = FrigateShape {
                    bow_exponent,
                    section_exponent: s,
                };
                let h = HullOffsets {
                    id: String::new(),
                    stations: shape.offsets(&p, depth),
                    particulars: p,
                };
                BonjeanTable::build(&h, DEFAULT_Z_SAMPLES)
                    .map(|t| t.upright_volume(p.draft_m) * WATER_DENSITY / 1000.0)
                    .unwrap_or(0.0)
            };
            let (s_lo, s_hi) = (0.01, 8.0);
            if disp_for(s_lo) < p.disp_t {
                return Err(Error::Construction(format!(
                    "displacement {} t not reachable with the parametric form (max {:.1} t)",
                    p.disp_t,
                    disp_for(s_lo)
                )));
            }
            if disp_for(s_hi) > p.disp_t {
                return Err(Error::Construction(format!(
                    "displacement {} t too small for the parametric form",
                    p.disp_t
                )));
            }
            let s = bisect(s_lo, s_hi, |s| disp_for(s) - p.disp_t);
            let shape = FrigateShape {
                bow_exponent,
                section_exponent: s,
            };
            let h = HullOffsets {
                id: "frigate-parametric".into(),
                stations: shape.offsets(&p, depth),
                particulars: p,
            };
            h.validate()?;
            Ok(h)
        }
    }
}

/// Immersed sectional properties of one station versus local waterline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BonjeanCurve {
    pub x: f64,
    pub area: Vec<f64>,
    /// First moment of area about the baseline, A·z̄.
    pub moment: Vec<f64>,
    pub half_breadth: Vec<f64>,
    /// Transverse second moment of the waterline, (2/3)·b³.
    pub wedge: Vec<f64>,
    /// A(T) / (2 b(T)) at the design draft.
    pub mean_draft: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BonjeanTable {
    pub stations: Vec<BonjeanCurve>,
    pub z0: f64,
    pub dz: f64,
    pub n_z: usize,
    pub particulars: Particulars,
}

/// Section values interpolated at one waterline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SectionState {
    pub area: f64,
    pub moment: f64,
    pub half_breadth: f64,
    pub wedge: f64,
}

impl SectionState {
    pub fn centroid(&self, keel: f64) -> f64 {
        if self.area > 0.0 {
            self.moment / self.area
        } else {
            keel
        }
    }
}

impl BonjeanTable {
    pub fn build(h: &HullOffsets, n_z: usize) -> Result<Self> {
        if n_z < 2 {
            return Err(Error::InvalidArgument("Bonjean tables need n_z >= 2".into()));
        }
        h.validate()?;
        let z0 = h.keel();
        let depth = h.depth();
        let zs = uniform(z0, depth, n_z);
        let dz = zs[1] - zs[0];
        let draft = h.particulars.draft_m;
        let stations = h
            .stations
            .iter()
            .map(|s| {
                let b: Vec<f64> = zs
                    .iter()
                    .map(|&z| {
                        if z < s.z[0] {
                            0.0
                        } else {
                            s.half_breadth_at(z)
                        }
                    })
                    .collect();
                let mut area = vec![0.0; n_z];
                let mut moment = vec![0.0; n_z];
                for j in 1..n_z {
                    area[j] = area[j - 1] + dz * (b[j - 1] + b[j]);
                    moment[j] = moment[j - 1] + dz * (b[j - 1] * zs[j - 1] + b[j] * zs[j]);
                }
                let wedge = b.iter().map(|b| 2.0 / 3.0 * b * b * b).collect();
                let mut curve = BonjeanCurve {
                    x: s.x,
                    area,
                    moment,
                    half_breadth: b,
                    wedge,
                    mean_draft: 0.0,
                };
                let at = sample(&curve, z0, dz, n_z, draft);
                curve.mean_draft = if at.half_breadth > 0.0 {
                    at.area / (2.0 * at.half_breadth)
                } else {
                    0.5 * (draft - z0)
                };
                curve
            })
            .collect();
        Ok(Self {
            stations,
            z0,
            dz,
            n_z,
            particulars: h.particulars,
        })
    }

    pub fn keel(&self) -> f64 {
        self.z0
    }

    pub fn deck(&self) -> f64 {
        self.z0 + self.dz * (self.n_z - 1) as f64
    }

    pub fn station_x(&self) -> Vec<f64> {
        self.stations.iter().map(|s| s.x).collect()
    }

    pub fn section(&self, station: usize, waterline: f64) -> Result<SectionState> {
        let c = self
            .stations
            .get(station)
            .ok_or_else(|| Error::Lookup(format!("no station {station}")))?;
        Ok(sample(c, self.z0, self.dz, self.n_z, waterline))
    }

    /// Immersed area and vertical centroid above baseline.
    pub fn section_properties(&self, station: usize, waterline: f64) -> Result<(f64, f64)> {
        let s = self.section(station, waterline)?;
        Ok((s.area, s.centroid(self.z0)))
    }

    /// Immersed volume at an even-keel draft.
    pub fn upright_volume(&self, draft: f64) -> f64 {
        let xs = self.station_x();
        let a: Vec<f64> = self
            .stations
            .iter()
            .map(|c| sample(c, self.z0, self.dz, self.n_z, draft).area)
            .collect();
        trapz(&xs, &a)
    }

    /// Calm-water hydrostatics for a pose (roll ignored).
    pub fn hydrostatics(&self, pose: &Pose) -> Hydrostatics {
        let p = &self.particulars;
        let xs = self.station_x();
        let n = xs.len();
        let (mut area, mut moment, mut awp, mut it, mut il, mut lx) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for (i, c) in self.stations.iter().enumerate() {
            let xi = p.lcg_m - c.x;
            let d = -(pose.z + xi * pose.pitch.sin());
            let s = sample(c, self.z0, self.dz, self.n_z, self.z0 + d);
            area[i] = s.area;
            moment[i] = s.moment;
            awp[i] = 2.0 * s.half_breadth;
            it[i] = s.wedge;
            il[i] = 2.0 * s.half_breadth * xi * xi;
            lx[i] = s.area * c.x;
        }
        let volume = trapz(&xs, &area);
        let kb = if volume > 0.0 { trapz(&xs, &moment) / volume } else { 0.0 };
        let i_t = trapz(&xs, &it);
        let bm = if volume > 0.0 { i_t / volume } else { 0.0 };
        Hydrostatics {
            volume,
            waterplane_area: trapz(&xs, &awp),
            kb,
            bm,
            gm: kb + bm - p.kg_m,
            lcb: if volume > 0.0 { trapz(&xs, &lx) / volume } else { 0.0 },
            long_inertia: trapz(&xs, &il),
        }
    }
}

/// Calm-water hydrostatic summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hydrostatics {
    pub volume: f64,
    pub waterplane_area: f64,
    pub kb: f64,
    pub bm: f64,
    pub gm: f64,
    pub lcb: f64,
    /// Waterplane second moment about the transverse axis through the CG.
    pub long_inertia: f64,
}

fn sample(c: &BonjeanCurve, z0: f64, dz: f64, n_z: usize, z: f64) -> SectionState {
    if z <= z0 {
        return SectionState::default();
    }
    let last = n_z - 1;
    let pos = (z - z0) / dz;
    if pos >= last as f64 {
        return SectionState {
            area: c.area[last],
            moment: c.moment[last],
            half_breadth: c.half_breadth[last],
            wedge: c.wedge[last],
        };
    }
    let j = (pos.floor() as usize).min(last - 1);
    let f = pos - j as f64;
    let lerp = |v: &[f64]| v[j] + f * (v[j + 1] - v[j]);
    SectionState {
        area: lerp(&c.area),
        moment: lerp(&c.moment),
        half_breadth: lerp(&c.half_breadth),
        wedge: lerp(&c.wedge),
    }
}

pub fn build_bonjean(h: &HullOffsets, n_z: usize) -> Result<BonjeanTable> {
    BonjeanTable::build(h, n_z)
}

pub fn section_properties(t: &BonjeanTable, station: usize, waterline: f64) -> Result<(f64, f64)> {
    t.section_properties(station, waterline)
}

/// Rigid-body pose used for force evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    /// Baseline height at the LCG station relative to calm water (m); −draft at rest.
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    /// Earth-frame position of the LCG point (m).
    pub x: f64,
    pub y: f64,
    /// Course, counter-clockwise from +x (rad).
    pub course: f64,
}

/// Heave force (N), roll moment (N·m, starboard-down positive) and pitch
/// moment (N·m, bow-up positive) about the centre of gravity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneralizedForce {
    pub heave: f64,
    pub roll: f64,
    pub pitch: f64,
}

/// Multipliers on the incident-wave terms. Both are 1 for the low-fidelity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationScales {
    /// Scales the wave elevation entering the local waterline.
    pub vertical: f64,
    /// Scales the transverse wave slope entering the relative heel.
    pub transverse: f64,
}

impl Default for ExcitationScales {
    fn default() -> Self {
        Self {
            vertical: 1.0,
            transverse: 1.0,
        }
    }
}

/// Per-station breakdown, useful for inspection and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionalForcing {
    pub x: f64,
    /// Heave force per unit length (N/m).
    pub heave: f64,
    /// Roll moment per unit length (N·m/m).
    pub roll: f64,
    /// Bow-up pitch moment per unit length from the vertical and along-ship forces.
    pub pitch_lever: f64,
}

impl BonjeanTable {
    pub fn sectional_forcing(
        &self,
        field: &WaveField,
        pose: &Pose,
        t: f64,
        scales: ExcitationScales,
    ) -> Result<Vec<SectionalForcing>> {
        if !(pose.roll.abs() <= MAX_ANGLE) || !(pose.pitch.abs() <= MAX_ANGLE) {
            return Err(Error::ModelRange(format!(
                "roll {:.2} deg, pitch {:.2} deg",
                pose.roll.to_degrees(),
                pose.pitch.to_degrees()
            )));
        }
        let p = &self.particulars;
        let rho_g = WATER_DENSITY * GRAVITY;
        let kbar = field.mean_wavenumbers();
        let calm = field.components.is_empty();
        let (sc, cc) = pose.course.sin_cos();
        let (sp, cp) = pose.pitch.sin_cos();
        let (sr, cr) = pose.roll.sin_cos();

        let waves = if calm {
            Vec::new()
        } else {
            let reaches: Vec<f64> = self.stations.iter().map(|c| (p.lcg_m - c.x) * cp).collect();
            field.line_samples((pose.x, pose.y), (cc, sc), &reaches, t)
        };
        let mut out = Vec::with_capacity(self.stations.len());
        for (i, c) in self.stations.iter().enumerate() {
            let xi = p.lcg_m - c.x;
            let keel = pose.z + xi * sp;
            let (zeta, slope_port, slope_fwd) = if calm {
                (0.0, 0.0, 0.0)
            } else {
                let [a, b] = waves[i];
                // Froude–Krylov attenuation at the section's mean draft.
                let ka = (-kbar[0] * c.mean_draft).exp();
                let kb = (-kbar[1] * c.mean_draft).exp();
                let zeta = ka * a.zeta + kb * b.zeta;
                let dzdx = ka * a.dzdx + kb * b.dzdx;
                let dzdy = ka * a.dzdy + kb * b.dzdy;
                (zeta, -sc * dzdx + cc * dzdy, cc * dzdx + sc * dzdy)
            };
            let draft = scales.vertical * zeta - keel;
            let s = sample(c, self.z0, self.dz, self.n_z, self.z0 + draft);
            // Relative tilt of the waterline, positive when water is higher to starboard.
            let tilt = (pose.roll - (scales.transverse * slope_port).atan()).tan();
            let y_moment = tilt * s.wedge;
            let buoy = rho_g * s.area;
            let zbar = s.centroid(self.z0);
            let roll_arm = y_moment * cr + s.area * (zbar - p.kg_m) * sr;
            // The along-ship pressure gradient adds a surge force acting at the centroid height.
            let surge = -buoy * scales.vertical * slope_fwd;
            let pitch_arm = buoy * (xi * cp - (zbar - p.kg_m) * sp) - surge * (zbar - p.kg_m);
            out.push(SectionalForcing {
                x: c.x,
                heave: buoy,
                roll: -rho_g * roll_arm,
                pitch_lever: pitch_arm,
            });
        }
        Ok(out)
    }

    pub fn forces(
        &self,
        field: &WaveField,
        pose: &Pose,
        t: f64,
        scales: ExcitationScales,
    ) -> Result<GeneralizedForce> {
        let sections = self.sectional_forcing(field, pose, t, scales)?;
        let xs: Vec<f64> = sections.iter().map(|s| s.x).collect();
        let heave = trapz(&xs, &sections.iter().map(|s| s.heave).collect::<Vec<_>>());
        let roll = trapz(&xs, &sections.iter().map(|s| s.roll).collect::<Vec<_>>());
        let pitch = trapz(&xs, &sections.iter().map(|s| s.pitch_lever).collect::<Vec<_>>());
        let f = GeneralizedForce {
            heave: heave - self.particulars.mass() * GRAVITY,
            roll,
            pitch,
        };
        if !(f.heave.is_finite() && f.roll.is_finite() && f.pitch.is_finite()) {
            return Err(Error::ModelRange("non-finite hydrostatic force".into()));
        }
        Ok(f)
    }
}

/// Hydrostatic plus Froude–Krylov generalized force with unit excitation scales.
pub fn fk_hydrostatic_forces(
    t: &BonjeanTable,
    field: &WaveField,
    pose: &Pose,
    time: f64,
) -> Result<GeneralizedForce> {
    t.forces(field, pose, time, ExcitationScales::default())
}

pub fn trapz(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Linear interpolation on a sorted grid, clamped at both ends.
pub fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|v| *v <= x) - 1;
    let f = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + f * (ys[j + 1] - ys[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_particulars() -> Particulars {
        Particulars {
            lwl_m: 100.0,
            beam_m: 20.0,
            draft_m: 5.0,
            disp_t: 10_250.0,
            kg_m: 7.0,
            lcg_m: 50.0,
        }
    }

    #[test]
    fn box_displacement() {
        let h = generate_hull(HullKind::Box, box_particulars()).unwrap();
        let t = BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap();
        let disp = t.upright_volume(5.0) * WATER_DENSITY / 1000.0;
        assert!((disp - 10_250.0).abs() < 1e-6, "{disp}");
    }

    #[test]
    fn frigate_hits_table_displacement() {
        let p = Particulars::dtmb5415();
        let h = generate_hull(HullKind::FrigateParametric, p).unwrap();
        let t = BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap();
        let disp = t.upright_volume(p.draft_m) * WATER_DENSITY / 1000.0;
        assert!((disp - 9156.38).abs() / 9156.38 < 0.02, "{disp}");
        let hs = t.hydrostatics(&Pose {
            z: -p.draft_m,
            ..Default::default()
        });
        assert!(hs.gm > 0.5, "GM {}", hs.gm);
        assert!((hs.lcb - p.lcg_m).abs() < 1.0, "LCB {}", hs.lcb);
    }

    #[test]
    fn degenerate_and_infeasible_hulls() {
        let mut p = box_particulars();
        p.beam_m = 0.0;
        assert!(matches!(generate_hull(HullKind::Box, p), Err(Error::Construction(_))));
        let mut p = Particulars::dtmb5415();
        p.disp_t = 1.0e5;
        assert!(matches!(
            generate_hull(HullKind::FrigateParametric, p),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn box_bonjean_is_rectangular() {
        let h = generate_hull(HullKind::Box, box_particulars()).unwrap();
        let t = BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap();
        let (a, zc) = t.section_properties(3, 5.0).unwrap();
        assert!((a - 100.0).abs() < 1e-9 && (zc - 2.5).abs() < 1e-9);
        let (a, zc) = t.section_properties(0, 2.5).unwrap();
        assert!((a - 50.0).abs() < 1e-9 && (zc - 1.25).abs() < 1e-9);
        // Linear between samples.
        for z in [0.013, 1.777, 4.321, 9.99] {
            let (a, _) = t.section_properties(5, z).unwrap();
            assert!((a - 20.0 * z).abs() < 1e-12 * 200.0);
        }
        assert_eq!(t.section_properties(2, -1.0).unwrap(), (0.0, 0.0));
        let full = t.section_properties(2, 1e3).unwrap();
        assert_eq!(full, t.section_properties(2, 1e4).unwrap());
        assert!((full.0 - 200.0).abs() < 1e-9);
        assert!(matches!(t.section_properties(99, 1.0), Err(Error::Lookup(_))));
    }

    #[test]
    fn bonjean_monotone_and_centroid_bounded() {
        let h = generate_hull(HullKind::FrigateParametric, Particulars::dtmb5415()).unwrap();
        let t = BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap();
        for (i, c) in t.stations.iter().enumerate() {
            assert_eq!(c.area[0], 0.0);
            assert!(c.area.windows(2).all(|w| w[1] >= w[0]));
            for j in 1..t.n_z {
                let z = t.z0 + j as f64 * t.dz;
                let (_, zc) = t.section_properties(i, z).unwrap();
                assert!(zc >= t.z0 - 1e-12 && zc <= z + 1e-12);
            }
        }
        assert!(BonjeanTable::build(&h, 1).is_err());
    }

    #[test]
    fn offsets_csv_round_trip() {
        let h = generate_hull(HullKind::FrigateParametric, Particulars::dtmb5415()).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let back = HullOffsets::read_csv(&buf[..], "frigate-parametric", h.particulars).unwrap();
        assert_eq!(back.stations.len(), h.stations.len());
        for (a, b) in back.stations.iter().zip(&h.stations) {
            for (x, y) in a.half_breadth.iter().zip(&b.half_breadth) {
                assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-3));
            }
        }
        assert!(HullOffsets::read_csv("x,z,b\n1,2,3\n".as_bytes(), "bad", h.particulars).is_err());
    }

    #[test]
    fn symmetric_hull_has_no_calm_roll_moment() {
        let h = generate_hull(HullKind::FrigateParametric, Particulars::dtmb5415()).unwrap();
        let t = BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap();
        for pitch in [-0.05, 0.0, 0.03] {
            let pose = Pose {
                z: -6.3,
                pitch,
                ..Default::default()
            };
            let f = fk_hydrostatic_forces(&t, &WaveField::calm(), &pose, 0.0).unwrap();
            assert_eq!(f.roll, 0.0);
        }
    }

    #[test]
    fn out_of_range_pose_rejected() {
        let h = generate_hull(HullKind::Box, box_particulars()).unwrap();
        let t = BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap();
        let pose = Pose {
            z: -5.0,
            roll: 0.9,
            ..Default::default()
        };
        assert!(matches!(
            fk_hydrostatic_forces(&t, &WaveField::calm(), &pose, 0.0),
            Err(Error::ModelRange(_))
        ));
    }

    #[test]
    fn heave_and_roll_restoring_slopes() {
        let p = Particulars::dtmb5415();
        let h = generate_hull(HullKind::FrigateParametric, p).unwrap();
        let t = BonjeanTable::build(&h, DEFAULT_Z_SAMPLES).unwrap();
        let pose = Pose {
            z: -p.draft_m,
            ..Default::default()
        };
        let hs = t.hydrostatics(&pose);
        let calm = WaveField::calm();
        let f = |dz: f64, roll: f64| {
            fk_hydrostatic_forces(
                &t,
                &calm,
                &Pose {
                    z: pose.z + dz,
                    roll,
                    ..pose
                },
                0.0,
            )
            .unwrap()
        };
        let slope = (f(0.1, 0.0).heave - f(-0.1, 0.0).heave) / 0.2;
        let expect = -WATER_DENSITY * GRAVITY * hs.waterplane_area;
        assert!((slope / expect - 1.0).abs() < 0.01, "{slope} vs {expect}");

        let d = 1e-3;
        let kslope = (f(0.0, d).roll - f(0.0, -d).roll) / (2.0 * d);
        let expect = -WATER_DENSITY * GRAVITY * hs.volume * hs.gm;
        assert!((kslope / expect - 1.0).abs() < 0.03, "{kslope} vs {expect}");
    }
}
