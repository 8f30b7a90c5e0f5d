//! Run configuration: one JSON document drives every pipeline stage.
//!
//! A file only needs the keys it changes; everything else comes from the
//! selected scale profile.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hull::{HullKind, Particulars};
use crate::lstm::TrainConfig;
use crate::seaway::{Discretization, DEFAULT_COMPONENTS};
use crate::sim::SimConfig;
use crate::voyage::{LatLon, BERGEN, NORFOLK};

/// Identity of the run that produced an artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub master_seed: u64,
}

impl Provenance {
    /// Leading comment line for CSV artifacts.
    pub fn csv_comment(&self) -> String {
        format!("# config_hash={} master_seed={}\n", self.config_hash, self.master_seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Canonical,
    #[default]
    Desk,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Profile::Canonical),
            "desk" => Ok(Profile::Desk),
            _ => Err(Error::Config(format!(
                "unknown profile {s:?} (expected canonical or desk)"
            ))),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Profile::Canonical => "canonical",
            Profile::Desk => "desk",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullConfig {
    pub kind: HullKind,
    pub particulars: Particulars,
    /// Offsets CSV; generated from `kind` when absent.
    #[serde(default)]
    pub offsets: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeawayConfig {
    pub components_per_system: usize,
    pub discretization: Discretization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Most frequent histogram conditions to simulate.
    pub conditions: usize,
    /// Primary relative headings (deg, multiples of 30).
    pub headings_deg: Vec<u32>,
    pub realizations: usize,
    /// Train / validation / test sizes per heading, in (condition, realization) units.
    pub split: [usize; 3],
    /// Weather histogram CSV; the synthetic North Atlantic stand-in when absent.
    #[serde(default)]
    pub histogram: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoyageConfig {
    pub start: LatLon,
    pub end: LatLon,
    pub speed_kts: f64,
    pub realizations: usize,
    /// Evenly spaced waypoint subset to evaluate; all waypoints when absent.
    #[serde(default)]
    pub max_waypoints: Option<usize>,
    /// Skip waypoints whose heading has no checkpoint instead of failing.
    pub restrict_to_trained_headings: bool,
    /// Draw from the basin aggregate for cells without observations.
    pub allow_fallback: bool,
    /// Cross-correlation search window (s).
    pub xcorr_max_lag_s: f64,
    /// Length of the worst-condition time-series snippet (s).
    pub snippet_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Profile,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub hull: HullConfig,
    pub seaway: SeawayConfig,
    pub sim: SimConfig,
    pub train: TrainConfig,
    pub campaign: CampaignConfig,
    pub voyage: VoyageConfig,
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let hull = HullConfig {
            kind: HullKind::FrigateParametric,
            particulars: Particulars::dtmb5415(),
            offsets: None,
        };
        let seaway = SeawayConfig {
            components_per_system: DEFAULT_COMPONENTS,
            discretization: Discretization::EqualEnergy,
        };
        match profile {
            Profile::Canonical => Self {
                profile,
                master_seed: 2024,
                out_dir: PathBuf::from("runs/canonical"),
                hull,
                seaway,
                sim: SimConfig::default(),
                train: TrainConfig::default(),
                campaign: CampaignConfig {
                    conditions: 100,
                    headings_deg: (0..12).map(|i| i * 30).collect(),
                    realizations: 5,
                    split: [50, 25, 25],
                    histogram: None,
                },
                voyage: VoyageConfig {
                    start: NORFOLK,
                    end: BERGEN,
                    speed_kts: 10.0,
                    realizations: 5,
                    max_waypoints: None,
                    restrict_to_trained_headings: false,
                    allow_fallback: true,
                    xcorr_max_lag_s: 10.0,
                    snippet_s: 60.0,
                },
            },
            Profile::Desk => Self {
                profile,
                master_seed: 2024,
                out_dir: PathBuf::from("runs/desk"),
                hull,
                seaway,
                sim: SimConfig {
                    duration: 320.0,
                    ..SimConfig::default()
                },
                train: TrainConfig {
                    epochs: 30,
                    seq_len: 2000,
                    resolution_factor: 8,
                    learning_rate: 3e-3,
                    lr_decay: 0.9,
                    hidden_size: 32,
                    layers: 3,
                    ..TrainConfig::default()
                },
                campaign: CampaignConfig {
                    conditions: 12,
                    headings_deg: vec![30, 90, 150],
                    realizations: 2,
                    split: [10, 5, 5],
                    histogram: None,
                },
                voyage: VoyageConfig {
                    start: NORFOLK,
                    end: BERGEN,
                    speed_kts: 10.0,
                    realizations: 5,
                    max_waypoints: Some(10),
                    restrict_to_trained_headings: true,
                    allow_fallback: true,
                    xcorr_max_lag_s: 10.0,
                    snippet_s: 60.0,
                },
            },
        }
    }

    /// Profile defaults overlaid with the keys present in `doc`.
    ///
    /// `profile` overrides the document's own `profile` key.
    pub fn from_value(doc: Value, profile: Option<Profile>) -> Result<Self> {
        if !doc.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        let chosen = match profile {
            Some(p) => p,
            None => match doc.get("profile") {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| Error::Config(format!("profile: {e}")))?,
                None => Profile::default(),
            },
        };
        let mut base = serde_json::to_value(Self::for_profile(chosen))?;
        merge(&mut base, doc);
        base["profile"] = serde_json::to_value(chosen)?;
        let cfg: RunConfig =
            serde_json::from_value(base).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, profile: Option<Profile>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_value(doc, profile)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.train.validate()?;
        let c = &self.campaign;
        if c.conditions == 0 || c.realizations == 0 || c.headings_deg.is_empty() {
            return Err(Error::Config(
                "campaign needs at least one condition, realization and heading".into(),
            ));
        }
        if let Some(h) = c.headings_deg.iter().find(|h| **h % 30 != 0 || **h >= 360) {
            return Err(Error::Config(format!("heading {h} is not on the 30° grid")));
        }
        let mut hs = c.headings_deg.clone();
        hs.sort_unstable();
        hs.dedup();
        if hs.len() != c.headings_deg.len() {
            return Err(Error::Config("duplicate headings".into()));
        }
        if c.split.iter().any(|n| *n == 0) {
            return Err(Error::Config("every split must be non-empty".into()));
        }
        if c.split.iter().sum::<usize>() > c.conditions * c.realizations {
            return Err(Error::Config(format!(
                "split {:?} needs more than {} × {} runs per heading",
                c.split, c.conditions, c.realizations
            )));
        }
        let usable = self.sim.record_len() - self.sim.ramp_samples();
        if self.train.seq_len > usable {
            return Err(Error::Config(format!(
                "seq_len {} exceeds the {usable} post-ramp samples of a record",
                self.train.seq_len
            )));
        }
        if self.seaway.components_per_system == 0 {
            return Err(Error::Config("components_per_system must be positive".into()));
        }
        let v = &self.voyage;
        if !(v.speed_kts > 0.0) || v.realizations == 0 || v.max_waypoints == Some(0) {
            return Err(Error::Config(
                "voyage needs positive speed, realizations and waypoint count".into(),
            ));
        }
        if !(v.xcorr_max_lag_s >= 0.0) || !(v.snippet_s > 0.0) {
            return Err(Error::Config("voyage lag window and snippet must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            config_hash: self.hash(),
            master_seed: self.master_seed,
        }
    }

    /// Training configuration with the run seed folded in.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.master_seed,
            ..self.train.clone()
        }
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}
