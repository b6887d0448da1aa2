//! Reference-signal pattern design and delay-Doppler sensing for OFDM
//! integrated communication and sensing.
//!
//! The crate is organised bottom-up:
//!
//! * [`patterns`] describes comb, synthesized (comb + PTRS-like) and
//!   irregular RS layouts, realizes them on a resource grid and accounts
//!   for their overhead.
//! * [`checker`] decides, with exact integer arithmetic, whether a pattern
//!   admits aliased delay-Doppler pairs for super-resolution estimators,
//!   and carries a brute-force collision oracle to cross-check every rule.
//! * [`waveform`] modulates grids into CP-OFDM, applies multi-target
//!   channels and runs the extended guard interval receiver.
//! * [`sensing`] holds the four estimators: Delay-and-Sum, 2D FFT,
//!   2D IAA and 2D MUSIC.
//! * [`eap`] predicts side peaks in closed form, extracts measured peaks
//!   and computes the unambiguous delay-Doppler regions.

pub mod checker;
pub mod eap;
pub mod patterns;
pub mod sensing;
pub mod waveform;

pub use num_complex::Complex64;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("resource element collision at symbol {symbol}, subcarrier {subcarrier}")]
    Collision { symbol: u32, subcarrier: u32 },

    #[error("subcarrier offset {offset} does not fit in {n} subcarriers")]
    OutOfBand { offset: u32, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("structurally ambiguous pattern: {0}")]
    StructurallyAmbiguous(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
