//! Delay-Doppler estimators: Delay-and-Sum, 2D FFT periodogram, 2D IAA and
//! 2D MUSIC, plus the steering dictionary they share.

mod delay_sum;
mod iaa;
mod music;
mod periodogram;

pub use delay_sum::delay_sum_af;
pub use iaa::{iaa_2d, IaaInit, IaaOptions, IaaOutput};
pub use music::music_2d;
pub use periodogram::{periodogram_2dfft, PeriodogramOptions};

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::patterns::{IrregularPattern, OfdmNumerology};
use crate::{Error, Result};

/// Delay and Doppler hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayDopplerGrid {
    /// Delays in seconds, strictly increasing.
    pub taus: Vec<f64>,
    /// Doppler shifts in Hz, strictly increasing.
    pub freqs: Vec<f64>,
}

impl DelayDopplerGrid {
    pub fn new(taus: Vec<f64>, freqs: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if taus.is_empty() || freqs.is_empty() {
            return Err(Error::InvalidArgument("delay-Doppler grid must not be empty".into()));
        }
        if !increasing(&taus) || !increasing(&freqs) {
            return Err(Error::InvalidArgument("grid axes must be strictly increasing".into()));
        }
        Ok(Self { taus, freqs })
    }

    /// `tau = i * tau_step` for `i in [0, n_tau)` and `f = j * f_step` for
    /// integer `j` with `f_lo <= f <= f_hi`.
    pub fn uniform(tau_step: f64, n_tau: usize, f_step: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(tau_step > 0.0 && f_step > 0.0) {
            return Err(Error::InvalidArgument("grid steps must be positive".into()));
        }
        let taus = (0..n_tau).map(|i| i as f64 * tau_step).collect();
        let j_lo = (f_lo / f_step - 1e-9).ceil() as i64;
        let j_hi = (f_hi / f_step + 1e-9).floor() as i64;
        let freqs = (j_lo..=j_hi).map(|j| j as f64 * f_step).collect();
        Self::new(taus, freqs)
    }

    /// Delays covering `[0, T_s)` in steps of `T_s / (N * tau_over)` and
    /// Doppler covering `[f_lo, f_hi]` in steps of `1 / (f_bins * T)`.
    pub fn for_numerology(num: &OfdmNumerology, tau_over: usize, f_bins: usize, f_lo: f64, f_hi: f64) -> Result<Self> {
        let n_tau = num.n * tau_over.max(1);
        Self::uniform(num.ts() / n_tau as f64, n_tau, 1.0 / (f_bins.max(1) as f64 * num.t()), f_lo, f_hi)
    }

    pub fn len(&self) -> usize {
        self.taus.len() * self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tau_step(&self) -> f64 {
        if self.taus.len() > 1 { self.taus[1] - self.taus[0] } else { f64::INFINITY }
    }

    pub fn f_step(&self) -> f64 {
        if self.freqs.len() > 1 { self.freqs[1] - self.freqs[0] } else { f64::INFINITY }
    }

    /// Grid point `k` in tau-major order.
    pub fn point(&self, k: usize) -> (f64, f64) {
        (self.taus[k / self.freqs.len()], self.freqs[k % self.freqs.len()])
    }
}

/// Whether values are powers (10 log10) or magnitudes (20 log10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Power,
    Magnitude,
}

impl Scale {
    pub fn to_db(&self, v: f64) -> f64 {
        let v = v.max(1e-300);
        match self {
            Scale::Power => 10.0 * v.log10(),
            Scale::Magnitude => 20.0 * v.log10(),
        }
    }
}

/// Nonnegative values on a delay-Doppler grid, tau-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    pub grid: DelayDopplerGrid,
    pub values: Vec<f64>,
    pub scale: Scale,
    pub normalized: bool,
    /// The delay axis wraps at `T_s` (FFT-based spectra).
    pub tau_periodic: bool,
    pub algorithm: String,
    /// Peak value before normalization.
    pub raw_peak: f64,
}

impl Spectrum2D {
    pub fn new(grid: DelayDopplerGrid, values: Vec<f64>, scale: Scale, algorithm: &str) -> Self {
        let raw_peak = values.iter().copied().fold(0.0, f64::max);
        Self { grid, values, scale, normalized: false, tau_periodic: false, algorithm: algorithm.to_string(), raw_peak }
    }

    pub fn value(&self, i_tau: usize, j_f: usize) -> f64 {
        self.values[i_tau * self.grid.freqs.len() + j_f]
    }

    /// Divides by the peak so the maximum becomes 1; zero spectra stay zero.
    pub fn normalize(mut self) -> Self {
        let peak = self.values.iter().copied().fold(0.0, f64::max);
        if peak > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= peak);
        }
        self.normalized = true;
        self
    }

    /// `(i_tau, j_f)` of the first maximum.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        (best / self.grid.freqs.len(), best % self.grid.freqs.len())
    }

    /// CSV with columns `tau_s,doppler_hz,value_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau_s,doppler_hz,value_db\n");
        for (i, tau) in self.grid.taus.iter().enumerate() {
            for (j, f) in self.grid.freqs.iter().enumerate() {
                let _ = writeln!(out, "{:.9e},{:.6},{:.4}", tau, f, self.scale.to_db(self.value(i, j)));
            }
        }
        out
    }
}

/// Steering vectors of every grid point, rows in snapshot vectorization order.
#[derive(Debug, Clone)]
pub struct SteeringDictionary {
    pub grid: DelayDopplerGrid,
    /// REs x grid points.
    pub vectors: DMatrix<Complex64>,
    /// `(symbol, subcarrier)` of each row.
    pub re_index: Vec<(u32, u32)>,
}

/// Steering entry `e^{-j2π d τ / T_s} e^{j2π S T f}` of cell `(S, d)`.
pub fn steering_entry(symbol: u32, subcarrier: u32, tau: f64, f: f64, num: &OfdmNumerology) -> Complex64 {
    let phase = -2.0 * PI * subcarrier as f64 * tau / num.ts() + 2.0 * PI * symbol as f64 * num.t() * f;
    Complex64::from_polar(1.0, phase)
}

pub fn build_dictionary(pattern: &IrregularPattern, num: &OfdmNumerology, grid: &DelayDopplerGrid) -> SteeringDictionary {
    let re_index: Vec<(u32, u32)> = pattern.cells().collect();
    let vectors = DMatrix::from_fn(re_index.len(), grid.len(), |r, k| {
        let (tau, f) = grid.point(k);
        let (s, d) = re_index[r];
        steering_entry(s, d, tau, f, num)
    });
    SteeringDictionary { grid: grid.clone(), vectors, re_index }
}
