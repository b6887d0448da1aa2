//! Equivalent ambiguity patterns: where side peaks appear for a given
//! staggering and algorithm, and which delay-Doppler boxes are free of them.

mod peaks;
mod predict;

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use peaks::{extract_peaks, local_maxima, DEFAULT_THRESHOLD_DB};
pub use predict::{das_level, fft_level, predict_numeric, predict_side_peaks};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EapAlgorithm {
    DelaySum,
    Fft2d,
    SuperRes,
}

impl fmt::Display for EapAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EapAlgorithm::DelaySum => "delay_sum",
            EapAlgorithm::Fft2d => "fft2d",
            EapAlgorithm::SuperRes => "super_res",
        })
    }
}

impl FromStr for EapAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "delay_sum" | "das" => Ok(EapAlgorithm::DelaySum),
            "fft2d" | "fft" | "periodogram" => Ok(EapAlgorithm::Fft2d),
            "super_res" | "iaa" | "music" => Ok(EapAlgorithm::SuperRes),
            other => Err(Error::InvalidArgument(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakKind {
    Predicted,
    Measured,
}

/// A side peak, relative level 1.0 meaning as strong as the mainlobe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidePeak {
    #[serde(rename = "tau_s")]
    pub tau: f64,
    #[serde(rename = "doppler_hz")]
    pub doppler: f64,
    pub level: f64,
    pub kind: PeakKind,
}

/// Delay range `[tau_lo, tau_hi)` and inclusive Doppler range searched for
/// predicted peaks. `f_step` drives numeric prediction and `floor` is the
/// weakest level it reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EapWindow {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub f_step: f64,
    pub floor: f64,
}

/// An ambiguity-free box `0 <= tau < tau_max`, `|f| < f_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    #[serde(rename = "tau_max_s")]
    pub tau_max: f64,
    #[serde(rename = "f_max_hz")]
    pub f_max: f64,
}

/// Pareto frontier of ambiguity-free boxes.
///
/// `peaks` are offsets from the mainlobe; only those at or above
/// `min_level` count. Two targets inside a box differ by less than
/// `tau_max` in delay and `2 f_max` in Doppler, so a box is clean when no
/// offset falls in that difference set. With `delay_period` set, an offset
/// at `tau` also acts at `tau - delay_period`. Boxes never exceed
/// `tau_limit` and `f_limit`.
pub fn unambiguous_regions(
    peaks: &[SidePeak],
    min_level: f64,
    delay_period: Option<f64>,
    tau_limit: f64,
    f_limit: f64,
) -> Vec<Region> {
    let mut offsets: Vec<(f64, f64)> = Vec::new();
    for p in peaks.iter().filter(|p| p.level >= min_level) {
        offsets.push((p.tau.abs(), p.doppler.abs()));
        if let Some(period) = delay_period {
            offsets.push(((period - p.tau.abs()).abs(), p.doppler.abs()));
        }
    }
    let eps = 1e-9 * tau_limit;
    let mut candidates: Vec<f64> = offsets.iter().map(|o| o.0).filter(|&t| t > eps && t < tau_limit).collect();
    candidates.push(tau_limit);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() <= eps);
    let mut frontier: Vec<Region> = Vec::new();
    for tau_max in candidates {
        let f_max = offsets
            .iter()
            .filter(|o| o.0 < tau_max - eps)
            .map(|o| o.1 / 2.0)
            .fold(f_limit, f64::min);
        if f_max <= 1e-12 * f_limit {
            continue;
        }
        // a wider box with the same Doppler extent dominates the narrower one
        while frontier.last().is_some_and(|r| r.f_max <= f_max * (1.0 + 1e-12)) {
            frontier.pop();
        }
        frontier.push(Region { tau_max, f_max });
    }
    frontier
}

/// Tolerances for matching predicted and measured peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub tau_tol: f64,
    pub f_tol: f64,
    /// Predicted peaks at or above this level must be found, and measured
    /// peaks this strong must be explained.
    pub level_floor: f64,
    /// Measured peaks within this many dB of the floor are unexplained only
    /// above `level_floor` scaled up by the guard.
    pub guard_db: f64,
    pub delay_period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub matched: Vec<(SidePeak, SidePeak)>,
    pub missed: Vec<SidePeak>,
    pub unexplained: Vec<SidePeak>,
    pub max_tau_error: f64,
    pub max_f_error: f64,
    pub pass: bool,
}

fn tau_dist(a: f64, b: f64, period: Option<f64>) -> f64 {
    let d = (a - b).abs();
    match period {
        Some(p) => {
            let d = d.rem_euclid(p);
            d.min(p - d)
        }
        None => d,
    }
}

/// Matches predicted against measured peaks, both relative to the mainlobe.
pub fn compare(predicted: &[SidePeak], measured: &[SidePeak], opts: &CompareOptions) -> Comparison {
    let guard = 10f64.powf(opts.guard_db / 10.0);
    let near = |a: &SidePeak, b: &SidePeak| {
        tau_dist(a.tau, b.tau, opts.delay_period) <= opts.tau_tol && (a.doppler - b.doppler).abs() <= opts.f_tol
    };
    let mut matched = Vec::new();
    let mut missed = Vec::new();
    let (mut max_tau_error, mut max_f_error) = (0.0f64, 0.0f64);
    for p in predicted.iter().filter(|p| p.level >= opts.level_floor) {
        let best = measured
            .iter()
            .filter(|m| m.level >= opts.level_floor / guard && near(p, m))
            .min_by(|a, b| {
                let da = tau_dist(a.tau, p.tau, opts.delay_period) / opts.tau_tol + (a.doppler - p.doppler).abs() / opts.f_tol;
                let db = tau_dist(b.tau, p.tau, opts.delay_period) / opts.tau_tol + (b.doppler - p.doppler).abs() / opts.f_tol;
                da.total_cmp(&db)
            });
        match best {
            Some(m) => {
                max_tau_error = max_tau_error.max(tau_dist(m.tau, p.tau, opts.delay_period));
                max_f_error = max_f_error.max((m.doppler - p.doppler).abs());
                matched.push((*p, *m));
            }
            None => missed.push(*p),
        }
    }
    let unexplained: Vec<SidePeak> = measured
        .iter()
        .filter(|m| m.level >= opts.level_floor * guard && !predicted.iter().any(|p| near(p, m)))
        .copied()
        .collect();
    let pass = missed.is_empty() && unexplained.is_empty();
    Comparison { matched, missed, unexplained, max_tau_error, max_f_error, pass }
}

/// Everything `simulate` reports about one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EapReport {
    pub algorithm: String,
    pub overhead: f64,
    pub mainlobe: SidePeak,
    pub side_peaks: Vec<SidePeak>,
    pub regions: Vec<Region>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

impl EapReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// CSV with columns `tau_max_s,f_max_hz`.
    pub fn regions_csv(&self) -> String {
        let mut out = String::from("tau_max_s,f_max_hz\n");
        for r in &self.regions {
            let _ = writeln!(out, "{:.9e},{:.6}", r.tau_max, r.f_max);
        }
        out
    }
}
