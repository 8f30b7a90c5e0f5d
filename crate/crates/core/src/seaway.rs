//! Bimodal, bidirectional irregular seaways.
//!
//! Each spectral system is a long-crested two-parameter Bretschneider
//! spectrum discretized into deep-water components with random phases.
//! Directions follow the seakeeping convention: `dir = 0` means waves
//! arriving from dead ahead of a ship on course 0.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::{sig9, GRAVITY};

/// Cumulative energy fraction at which the spectral tail is cut.
pub const ENERGY_CUTOFF: f64 = 0.999;
pub const DEFAULT_COMPONENTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    /// Significant wave height (m).
    pub hs: f64,
    /// Modal period (s).
    pub tp: f64,
    /// Direction waves come from, relative to course 0 (deg).
    pub dir: f64,
}

impl SpectrumParams {
    pub fn new(hs: f64, tp: f64, dir: f64) -> Result<Self> {
        let p = Self {
            hs,
            tp,
            dir: normalize_deg(dir),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hs >= 0.0) || !self.hs.is_finite() {
            return Err(Error::Domain(format!("hs must be >= 0, got {}", self.hs)));
        }
        if !(self.tp > 0.0) || !self.tp.is_finite() {
            return Err(Error::Domain(format!("tp must be > 0, got {}", self.tp)));
        }
        if !self.dir.is_finite() {
            return Err(Error::Domain("direction must be finite".into()));
        }
        Ok(())
    }

    /// Zeroth spectral moment, Hs²/16.
    pub fn m0(&self) -> f64 {
        self.hs * self.hs / 16.0
    }

    pub fn modal_frequency(&self) -> f64 {
        2.0 * PI / self.tp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BimodalSeaState {
    pub primary: SpectrumParams,
    pub secondary: SpectrumParams,
}

impl BimodalSeaState {
    pub fn new(primary: SpectrumParams, secondary: SpectrumParams) -> Result<Self> {
        primary.validate()?;
        secondary.validate()?;
        Ok(Self { primary, secondary })
    }

    pub fn unimodal(primary: SpectrumParams) -> Self {
        Self {
            primary,
            secondary: SpectrumParams {
                hs: 0.0,
                tp: primary.tp,
                dir: primary.dir,
            },
        }
    }

    pub fn total_m0(&self) -> f64 {
        self.primary.m0() + self.secondary.m0()
    }

    /// Combined significant wave height of both systems.
    pub fn combined_hs(&self) -> f64 {
        4.0 * self.total_m0().sqrt()
    }

    /// Same sea state seen from a ship on `course_deg`.
    pub fn relative_to(&self, course_deg: f64) -> Self {
        let mut s = *self;
        s.primary.dir = normalize_deg(s.primary.dir - course_deg);
        s.secondary.dir = normalize_deg(s.secondary.dir - course_deg);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    pub amplitude: f64,
    pub omega: f64,
    pub k: f64,
    /// Propagation direction in the earth frame (rad, counter-clockwise from +x).
    pub heading: f64,
    pub phase: f64,
}

impl WaveComponent {
    pub fn deep_water(amplitude: f64, omega: f64, heading: f64, phase: f64) -> Self {
        Self {
            amplitude,
            omega,
            k: omega * omega / GRAVITY,
            heading,
            phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    #[default]
    EqualEnergy,
    EqualFrequency,
}

/// Elevation and its spatial slopes at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveSample {
    pub zeta: f64,
    pub dzdx: f64,
    pub dzdy: f64,
}

impl std::ops::Add for WaveSample {
    type Output = WaveSample;
    fn add(self, o: WaveSample) -> WaveSample {
        WaveSample {
            zeta: self.zeta + o.zeta,
            dzdx: self.dzdx + o.dzdx,
            dzdy: self.dzdy + o.dzdy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub components: Vec<WaveComponent>,
    pub ramp_duration: f64,
    pub seed: Option<StreamKey>,
    /// Components `[..n_primary]` belong to the primary system, the rest to the secondary.
    pub n_primary: usize,
}

/// Bretschneider density S(ω) in m²·s.
pub fn spectrum_density(p: &SpectrumParams, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be > 0, got {omega}")));
    }
    p.validate()?;
    let wm = p.modal_frequency();
    let r = wm / omega;
    let r4 = r * r * r * r;
    Ok(5.0 / 16.0 * p.hs * p.hs * r4 / omega * (-1.25 * r4).exp())
}

/// Frequency below which the fraction `q` of m0 lies; inverts the closed-form
/// cumulative energy `exp(-1.25 (ωm/ω)⁴)`.
fn frequency_at_fraction(wm: f64, q: f64) -> f64 {
    wm * (-1.25 / q.ln()).powf(0.25)
}

/// Propagation heading (earth frame, rad) of waves arriving from `dir` degrees.
pub fn propagation_heading(dir_deg: f64) -> f64 {
    (dir_deg + 180.0).to_radians()
}

pub fn discretize_spectrum<R: Rng + ?Sized>(
    p: &SpectrumParams,
    n: usize,
    scheme: Discretization,
    rng: &mut R,
) -> Result<Vec<WaveComponent>> {
    p.validate()?;
    if p.hs == 0.0 {
        return Ok(Vec::new());
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "component count must be >= 1 when hs > 0".into(),
        ));
    }
    let wm = p.modal_frequency();
    let m0 = p.m0();
    let heading = propagation_heading(p.dir);

    let mut out = Vec::with_capacity(n);
    match scheme {
        Discretization::EqualEnergy => {
            // Each band carries m0/n; the band's representative frequency is
            // its energy median within the truncated range.
            let a = (2.0 * m0 / n as f64).sqrt();
            for i in 0..n {
                let q = (i as f64 + 0.5) / n as f64 * ENERGY_CUTOFF;
                let omega = frequency_at_fraction(wm, q);
                let phase = rng.random::<f64>() * 2.0 * PI;
                out.push(WaveComponent::deep_water(a, omega, heading, phase));
            }
        }
        Discretization::EqualFrequency => {
            let lo = frequency_at_fraction(wm, 1.0 - ENERGY_CUTOFF);
            let hi = frequency_at_fraction(wm, ENERGY_CUTOFF);
            let dw = (hi - lo) / n as f64;
            for i in 0..n {
                let omega = lo + (i as f64 + 0.5) * dw;
                let s = spectrum_density(p, omega)?;
                let phase = rng.random::<f64>() * 2.0 * PI;
                out.push(WaveComponent::deep_water(
                    (2.0 * s * dw).sqrt(),
                    omega,
                    heading,
                    phase,
                ));
            }
        }
    }
    Ok(out)
}

pub fn build_bimodal_field<R: Rng + ?Sized>(
    sea: &BimodalSeaState,
    n_per_system: usize,
    scheme: Discretization,
    ramp: f64,
    rng: &mut R,
) -> Result<WaveField> {
    sea.primary.validate()?;
    sea.secondary.validate()?;
    if !(ramp >= 0.0) {
        return Err(Error::InvalidArgument(format!("ramp must be >= 0, got {ramp}")));
    }
    let mut components = discretize_spectrum(&sea.primary, n_per_system, scheme, rng)?;
    let n_primary = components.len();
    components.extend(discretize_spectrum(&sea.secondary, n_per_system, scheme, rng)?);
    Ok(WaveField {
        components,
        ramp_duration: ramp,
        seed: None,
        n_primary,
    })
}

/// Builds the field for one (condition, realization) stream.
pub fn field_for_stream(
    sea: &BimodalSeaState,
    n_per_system: usize,
    scheme: Discretization,
    ramp: f64,
    key: StreamKey,
) -> Result<WaveField> {
    let mut rng = key.rng();
    let mut field = build_bimodal_field(sea, n_per_system, scheme, ramp, &mut rng)?;
    field.seed = Some(key);
    Ok(field)
}

impl WaveField {
    pub fn calm() -> Self {
        Self {
            components: Vec::new(),
            ramp_duration: 0.0,
            seed: None,
            n_primary: 0,
        }
    }

    pub fn regular(amplitude: f64, omega: f64, dir_deg: f64, phase: f64, ramp: f64) -> Self {
        Self {
            components: vec![WaveComponent::deep_water(
                amplitude,
                omega,
                propagation_heading(dir_deg),
                phase,
            )],
            ramp_duration: ramp,
            seed: None,
            n_primary: 1,
        }
    }

    pub fn ramp_factor(&self, t: f64) -> f64 {
        if self.ramp_duration <= 0.0 || t >= self.ramp_duration {
            1.0
        } else if t <= 0.0 {
            0.0
        } else {
            t / self.ramp_duration
        }
    }

    /// Σ a²/2 over all components.
    pub fn variance(&self) -> f64 {
        self.components.iter().map(|c| 0.5 * c.amplitude * c.amplitude).sum()
    }

    pub fn systems(&self) -> [&[WaveComponent]; 2] {
        let (a, b) = self.components.split_at(self.n_primary);
        [a, b]
    }

    /// Energy-weighted mean wavenumber of each system (0 for an empty system).
    pub fn mean_wavenumbers(&self) -> [f64; 2] {
        self.systems().map(|comps| {
            let (num, den) = comps.iter().fold((0.0, 0.0), |(n, d), c| {
                let e = c.amplitude * c.amplitude;
                (n + e * c.k, d + e)
            });
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
    }

    /// Per-system elevation and slopes, ramp applied.
    pub fn system_samples(&self, x: f64, y: f64, t: f64) -> [WaveSample; 2] {
        let r = self.ramp_factor(t);
        self.systems().map(|comps| {
            let mut s = WaveSample::default();
            if r == 0.0 {
                return s;
            }
            for c in comps {
                let (sh, ch) = c.heading.sin_cos();
                let arg = c.k * (x * ch + y * sh) - c.omega * t + c.phase;
                let (sa, ca) = arg.sin_cos();
                s.zeta += c.amplitude * ca;
                let d = -c.amplitude * c.k * sa;
                s.dzdx += d * ch;
                s.dzdy += d * sh;
            }
            s.zeta *= r;
            s.dzdx *= r;
            s.dzdy *= r;
            s
        })
    }

    /// Per-system samples at points `(x0, y0) + r·(ux, uy)` for each reach `r`.
    ///
    /// Equally spaced reaches advance each component's phasor by a complex
    /// rotation instead of a fresh sine and cosine per point.
    pub fn line_samples(
        &self,
        origin: (f64, f64),
        dir: (f64, f64),
        reaches: &[f64],
        t: f64,
    ) -> Vec<[WaveSample; 2]> {
        let n = reaches.len();
        let mut out = vec![[WaveSample::default(); 2]; n];
        let r = self.ramp_factor(t);
        if r == 0.0 || n == 0 {
            return out;
        }
        let step = if n > 1 { (reaches[n - 1] - reaches[0]) / (n - 1) as f64 } else { 0.0 };
        let tol = 1e-9 * (1.0 + reaches[0].abs() + reaches[n - 1].abs());
        let uniform = reaches
            .iter()
            .enumerate()
            .all(|(i, x)| (x - (reaches[0] + i as f64 * step)).abs() <= tol);
        let (x0, y0) = origin;
        let (ux, uy) = dir;
        for (sys, comps) in self.systems().iter().enumerate() {
            for c in comps.iter() {
                let (sh, ch) = c.heading.sin_cos();
                let base = c.k * (x0 * ch + y0 * sh) - c.omega * t + c.phase;
                let q = c.k * (ux * ch + uy * sh);
                let ak = c.amplitude * c.k;
                let add = |o: &mut WaveSample, sa: f64, ca: f64| {
                    o.zeta += c.amplitude * ca;
                    let d = -ak * sa;
                    o.dzdx += d * ch;
                    o.dzdy += d * sh;
                };
                if uniform {
                    let (mut zs, mut zc) = (base + reaches[0] * q).sin_cos();
                    let (ds, dc) = (step * q).sin_cos();
                    for o in out.iter_mut() {
                        add(&mut o[sys], zs, zc);
                        (zs, zc) = (zs * dc + zc * ds, zc * dc - zs * ds);
                    }
                } else {
                    for (o, rr) in out.iter_mut().zip(reaches) {
                        let (sa, ca) = (base + rr * q).sin_cos();
                        add(&mut o[sys], sa, ca);
                    }
                }
            }
        }
        for o in out.iter_mut().flatten() {
            o.zeta *= r;
            o.dzdx *= r;
            o.dzdy *= r;
        }
        out
    }

    pub fn elevation_and_slopes(&self, x: f64, y: f64, t: f64) -> WaveSample {
        let [a, b] = self.system_samples(x, y, t);
        a + b
    }

    pub fn elevation(&self, x: f64, y: f64, t: f64) -> f64 {
        self.elevation_and_slopes(x, y, t).zeta
    }

    /// Scales every amplitude, keeping phases.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut f = self.clone();
        for c in &mut f.components {
            c.amplitude *= factor;
        }
        f
    }
}

/// Samples the field along a straight track at constant speed.
pub fn encounter_trace(
    field: &WaveField,
    speed: f64,
    course_deg: f64,
    duration: f64,
    dt: f64,
) -> Result<Vec<(f64, WaveSample)>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    if !(duration >= dt) {
        return Err(Error::InvalidArgument(format!(
            "duration {duration} shorter than dt {dt}"
        )));
    }
    let n = (duration / dt + 1e-9).floor() as usize + 1;
    let (s, c) = course_deg.to_radians().sin_cos();
    Ok((0..n)
        .map(|i| {
            let t = i as f64 * dt;
            let d = speed * t;
            (t, field.elevation_and_slopes(d * c, d * s, t))
        })
        .collect())
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[(f64, WaveSample)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "zeta", "dzdx", "dzdy"])?;
    for (t, s) in trace {
        w.write_record([sig9(*t), sig9(s.zeta), sig9(s.dzdx), sig9(s.dzdy)])?;
    }
    w.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

pub fn normalize_deg(d: f64) -> f64 {
    let r = d.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn p(hs: f64, tp: f64) -> SpectrumParams {
        SpectrumParams::new(hs, tp, 0.0).unwrap()
    }

    /// Composite Simpson on (a, b]; independent of the closed-form CDF.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn density_at_modal_frequency() {
        let s = spectrum_density(&p(3.0, 6.5), 2.0 * PI / 6.5).unwrap();
        assert!((s - 0.8336).abs() < 1e-4, "{s}");
    }

    #[test]
    fn density_zero_energy_and_domain() {
        assert_eq!(spectrum_density(&p(0.0, 8.0), 0.7).unwrap(), 0.0);
        assert!(matches!(spectrum_density(&p(1.0, 8.0), 0.0), Err(Error::Domain(_))));
        assert!(SpectrumParams::new(1.0, 0.0, 0.0).is_err());
        let tiny = spectrum_density(&p(3.0, 6.5), 1e-3).unwrap();
        let huge = spectrum_density(&p(3.0, 6.5), 1e4).unwrap();
        assert!(tiny < 1e-300 && huge < 1e-15);
    }

    #[test]
    fn quadrature_recovers_m0() {
        let sp = p(3.0, 6.5);
        let m = simpson(|w| spectrum_density(&sp, w).unwrap(), 1e-6, 20.0, 200_000);
        assert!((m - 0.5625).abs() / 0.5625 < 1e-3, "{m}");
    }

    #[test]
    fn single_component_amplitude() {
        let c = discretize_spectrum(&p(3.0, 6.5), 1, Discretization::EqualEnergy, &mut seeded(1))
            .unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].amplitude - 1.0607).abs() < 1e-4);
    }

    #[test]
    fn equal_energy_sum_is_exact() {
        let c = discretize_spectrum(&p(3.0, 6.5), 200, Discretization::EqualEnergy, &mut seeded(2))
            .unwrap();
        let e: f64 = c.iter().map(|c| c.amplitude * c.amplitude / 2.0).sum();
        assert!((e - 0.5625).abs() / 0.5625 < 1e-10);
        for w in c.windows(2) {
            assert!(w[1].omega > w[0].omega);
        }
        for c in &c {
            assert!((c.k - c.omega * c.omega / GRAVITY).abs() <= 1e-12 * c.k);
            assert!((0.0..2.0 * PI).contains(&c.phase));
            assert_eq!(c.heading, propagation_heading(0.0));
        }
    }

    #[test]
    fn equal_frequency_sum_close() {
        let c = discretize_spectrum(&p(2.0, 9.0), 400, Discretization::EqualFrequency, &mut seeded(3))
            .unwrap();
        let e: f64 = c.iter().map(|c| c.amplitude * c.amplitude / 2.0).sum();
        assert!((e - 0.25).abs() / 0.25 < 5e-3, "{e}");
    }

    #[test]
    fn zero_hs_and_zero_count() {
        let mut rng = seeded(4);
        assert!(discretize_spectrum(&p(0.0, 8.0), 5, Discretization::EqualEnergy, &mut rng)
            .unwrap()
            .is_empty());
        assert!(matches!(
            discretize_spectrum(&p(1.0, 8.0), 0, Discretization::EqualEnergy, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bimodal_counts_and_variance() {
        let sea = BimodalSeaState::new(p(3.0, 6.5), SpectrumParams::new(1.5, 11.5, 90.0).unwrap())
            .unwrap();
        let f = build_bimodal_field(&sea, 50, Discretization::EqualEnergy, 120.0, &mut seeded(5))
            .unwrap();
        assert_eq!(f.components.len(), 100);
        assert_eq!(f.n_primary, 50);
        assert!((f.variance() - 0.703125).abs() < 1e-12);
    }

    #[test]
    fn degenerate_secondary_matches_primary_only() {
        let prim = p(2.5, 8.0);
        let sea = BimodalSeaState::unimodal(prim);
        let a = build_bimodal_field(&sea, 30, Discretization::EqualEnergy, 0.0, &mut seeded(6))
            .unwrap();
        let only = discretize_spectrum(&prim, 30, Discretization::EqualEnergy, &mut seeded(6)).unwrap();
        assert_eq!(a.components, only);
    }

    #[test]
    fn crest_and_quadrature_points() {
        let f = WaveField {
            components: vec![WaveComponent {
                amplitude: 1.0,
                omega: 1.0,
                k: 0.1,
                heading: 0.0,
                phase: 0.0,
            }],
            ramp_duration: 10.0,
            seed: None,
            n_primary: 1,
        };
        // omega·t must be a multiple of 2π for a crest at the origin.
        let t = 4.0 * PI;
        let s = f.elevation_and_slopes(0.0, 0.0, t);
        assert!((s.zeta - 1.0).abs() < 1e-12);
        assert!(s.dzdx.abs() < 1e-12 && s.dzdy.abs() < 1e-12);

        let mut g = f.clone();
        g.components[0].phase = PI / 2.0;
        g.ramp_duration = 0.0;
        let s = g.elevation_and_slopes(0.0, 0.0, 0.0);
        assert!(s.zeta.abs() < 1e-12);
        assert!((s.dzdx + 0.1).abs() < 1e-12);
        assert!(s.dzdy.abs() < 1e-12);
    }

    #[test]
    fn ramp_zero_at_start() {
        let sea = BimodalSeaState::new(p(3.0, 7.0), SpectrumParams::new(1.0, 12.0, 60.0).unwrap())
            .unwrap();
        let f = build_bimodal_field(&sea, 20, Discretization::EqualEnergy, 120.0, &mut seeded(7))
            .unwrap();
        assert_eq!(f.elevation(3.0, -4.0, 0.0), 0.0);
        assert_eq!(f.ramp_factor(60.0), 0.5);
        assert_eq!(f.ramp_factor(500.0), 1.0);
    }

    #[test]
    fn trace_length_and_stationary_observer() {
        let f = WaveField::regular(1.0, 0.8, 30.0, 0.3, 0.0);
        let tr = encounter_trace(&f, 0.0, 0.0, 30.0, 0.05).unwrap();
        assert_eq!(tr.len(), 601);
        for (t, s) in &tr {
            assert_eq!(*s, f.elevation_and_slopes(0.0, 0.0, *t));
        }
        assert!(encounter_trace(&f, 1.0, 0.0, 30.0, 0.0).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let f = WaveField::regular(1.0, 0.8, 30.0, 0.3, 0.0);
        let tr = encounter_trace(&f, 5.0, 0.0, 1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,zeta,dzdx,dzdy\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn line_samples_match_pointwise() {
        let sea = BimodalSeaState::new(p(3.0, 9.0), SpectrumParams::new(1.5, 12.0, 70.0).unwrap()).unwrap();
        let field = field_for_stream(&sea, 30, Discretization::EqualEnergy, 10.0, StreamKey::new(4, 0, 0)).unwrap();
        let (cc, sc) = (0.3f64.cos(), 0.3f64.sin());
        for reaches in [
            (0..21).map(|i| 70.0 - 7.0 * i as f64).collect::<Vec<_>>(),
            vec![-60.0, -10.0, 5.0, 66.0],
        ] {
            let got = field.line_samples((12.0, -4.0), (cc, sc), &reaches, 37.5);
            for (g, r) in got.iter().zip(&reaches) {
                let want = field.system_samples(12.0 + r * cc, -4.0 + r * sc, 37.5);
                for s in 0..2 {
                    assert!((g[s].zeta - want[s].zeta).abs() < 1e-10);
                    assert!((g[s].dzdx - want[s].dzdx).abs() < 1e-10);
                    assert!((g[s].dzdy - want[s].dzdy).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn normalize_directions() {
        assert_eq!(normalize_deg(-30.0), 330.0);
        assert_eq!(normalize_deg(720.0), 0.0);
        assert_eq!(SpectrumParams::new(1.0, 5.0, 390.0).unwrap().dir, 30.0);
    }
}
