//! Scene files and binary signal export.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Target, TimeSignal};
use crate::{Error, Result};

/// Targets plus an optional SNR.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub targets: Vec<Target>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SceneDoc {
    List(Vec<Target>),
    Object { targets: Vec<Target>, #[serde(default)] snr_db: Option<f64> },
}

impl Scene {
    /// Accepts a bare target list or `{"targets": [...], "snr_db": ..}`.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(match serde_json::from_str::<SceneDoc>(text)? {
            SceneDoc::List(targets) => Scene { targets, snr_db: None },
            SceneDoc::Object { targets, snr_db } => Scene { targets, snr_db },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// JSON sidecar next to a binary signal dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSidecar {
    pub sample_rate: f64,
    pub boundaries: Vec<usize>,
    pub samples: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes interleaved little-endian `f64` re/im pairs to `path` and the
/// sidecar to `path` with a `.json` extension.
pub fn write_signal(path: &Path, signal: &TimeSignal) -> Result<()> {
    let mut bytes = Vec::with_capacity(signal.samples.len() * 16);
    for v in &signal.samples {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let sidecar = SignalSidecar {
        sample_rate: signal.sample_rate,
        boundaries: signal.symbol_boundaries.clone(),
        samples: signal.samples.len(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_signal(path: &Path) -> Result<TimeSignal> {
    let bytes = fs::read(path)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::InvalidArgument(format!("{} is not a whole number of complex samples", path.display())));
    }
    let sidecar: SignalSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let samples: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    if samples.len() != sidecar.samples {
        return Err(Error::InvalidArgument("sample count disagrees with the sidecar".into()));
    }
    Ok(TimeSignal { samples, sample_rate: sidecar.sample_rate, symbol_boundaries: sidecar.boundaries })
}
