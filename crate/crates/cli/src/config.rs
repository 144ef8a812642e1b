//! Campaign configuration files (TOML or JSON).

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use protomn::base::{catalog, BaseMatrix};
use protomn::decoder::DecoderConfig;
use protomn::lift::{lift_circulant_peg_with, lift_protograph_peg_with, lift_uniform_random_with, LiftOptions, LiftedCode};
use protomn::{Error, Result};

/// `start:stop:step` in dB, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as i64;
        (0..=n.max(0))
            .map(|i| {
                // round away accumulated binary noise so labels stay clean
                let v = self.start + i as f64 * self.step;
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}

impl FromStr for SnrGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad SNR grid value '{t}'")))
        };
        let grid = match parts.as_slice() {
            [a] => {
                let v = num(a)?;
                SnrGrid {
                    start: v,
                    stop: v,
                    step: 1.0,
                }
            }
            [a, b, c] => SnrGrid {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => return Err(Error::Parse(format!("SNR grid '{s}' is not start:stop:step"))),
        };
        if !(grid.step > 0.0) || grid.stop < grid.start {
            return Err(Error::InvalidArgument(format!("SNR grid '{s}' needs step > 0 and stop >= start")));
        }
        Ok(grid)
    }
}

impl std::fmt::Display for SnrGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl Serialize for SnrGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SnrGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftKind {
    #[default]
    Peg,
    ProtographPeg,
    Random,
}

/// How frames are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Full chain when the code has an encoder, equivalent channel otherwise.
    #[default]
    Auto,
    Transmit,
    Epc,
}

fn default_max_errors() -> u64 {
    100
}

fn default_batch() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Base matrix JSON file, or a catalog name.
    pub base_matrix: String,
    pub lift: usize,
    #[serde(default)]
    pub lift_seed: u64,
    #[serde(default)]
    pub lift_method: LiftKind,
    pub rates: Vec<f64>,
    pub snr_db: SnrGrid,
    pub max_frames: u64,
    #[serde(default = "default_max_errors")]
    pub max_errors: u64,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SimMode,
    /// Frames per work unit.
    #[serde(default = "default_batch")]
    pub batch: usize,
}

/// Reads a base matrix from a JSON file, falling back to the catalog.
pub fn load_base(spec: &str) -> Result<BaseMatrix> {
    let path = Path::new(spec);
    if path.exists() {
        return BaseMatrix::load(path);
    }
    catalog::by_name(spec).ok_or_else(|| {
        Error::InvalidArgument(format!("'{spec}' is neither a base matrix file nor a catalog name"))
    })
}

pub fn lift_base(base: &BaseMatrix, lift: usize, seed: u64, kind: LiftKind) -> Result<LiftedCode> {
    // singular H2 is structural for some matrices; those run in EPC mode
    let opts = LiftOptions::lenient();
    match kind {
        LiftKind::Peg => lift_circulant_peg_with(base, lift, seed, opts),
        LiftKind::ProtographPeg => lift_protograph_peg_with(base, lift, seed, opts),
        LiftKind::Random => lift_uniform_random_with(base, lift, seed, opts),
    }
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Picks the format from the extension; unknown extensions try JSON
    /// first.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml(&text)?,
            Some("json") => Self::from_json(&text)?,
            _ => Self::from_json(&text).or_else(|_| Self::from_toml(&text))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.lift == 0 {
            return bad("lift must be at least 1");
        }
        if self.rates.is_empty() {
            return bad("no rates given");
        }
        if self.max_frames == 0 {
            return bad("max_frames must be at least 1");
        }
        if self.max_errors == 0 {
            return bad("max_errors must be at least 1");
        }
        if self.batch == 0 {
            return bad("batch must be at least 1");
        }
        if !(self.snr_db.step > 0.0) {
            return bad("SNR step must be positive");
        }
        self.decoder.validate()
    }
}
