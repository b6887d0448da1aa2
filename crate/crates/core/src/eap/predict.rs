//! Side-peak predictors for comb patterns.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{EapAlgorithm, EapWindow, PeakKind, SidePeak};
use crate::checker::{collision_oracle_window, oracle_pattern, oracle_window};
use crate::patterns::{CombPattern, OfdmNumerology, Pattern, Scheme};
use crate::{Error, Result};

const EXACT: f64 = 1.0 - 1e-6;

/// Slope `p` of a linear staggering, if the offsets are linear.
fn linear_slope(comb: &CombPattern) -> Option<u32> {
    let s = comb.s_sub;
    let f0 = comb.offsets[0];
    let p = comb.offsets.get(1).map_or(0, |f1| (f1 + s - f0) % s);
    comb.offsets
        .iter()
        .enumerate()
        .all(|(i, &f)| (f0 as u64 + p as u64 * i as u64) % s as u64 == f as u64)
        .then_some(p)
}

fn is_alternating(comb: &CombPattern) -> bool {
    let s = comb.s_sub;
    s % 2 == 0
        && comb
            .offsets
            .iter()
            .enumerate()
            .all(|(i, &f)| f == (comb.offsets[0] + (i as u32 % 2) * s / 2) % s)
}

/// Delay-and-Sum level at lag `l N / S_sub` and Doppler `f` for a
/// constant-envelope comb.
pub fn das_level(comb: &CombPattern, num: &OfdmNumerology, l: u32, f: f64) -> f64 {
    let s = comb.s_sub as f64;
    let np = num.samples_per_symbol();
    let d = (l as usize * num.n) / comb.s_sub as usize;
    let w = 2.0 * PI * f / num.sample_rate();
    let inner = |start: usize| -> Complex64 {
        // geometric sum of e^{jwn} for n in [start + d, start + np)
        let count = np.saturating_sub(d);
        let first = Complex64::from_polar(1.0, w * (start + d) as f64);
        let ratio = Complex64::from_polar(1.0, w);
        if (ratio - 1.0).norm() < 1e-15 {
            first * count as f64
        } else {
            first * (Complex64::new(1.0, 0.0) - ratio.powu(count as u32)) / (Complex64::new(1.0, 0.0) - ratio)
        }
    };
    let total: Complex64 = comb
        .offsets
        .iter()
        .enumerate()
        .map(|(i, &fi)| {
            let c = Complex64::from_polar(1.0, 2.0 * PI * fi as f64 * l as f64 / s);
            c * inner(i * comb.s_sym as usize * np)
        })
        .sum();
    total.norm() / (comb.m() as f64 * np as f64)
}

/// Normalized periodogram level of the image at `τ = l T_s / S_sub`.
pub fn fft_level(comb: &CombPattern, num: &OfdmNumerology, l: u32, f: f64) -> f64 {
    let s = comb.s_sub as f64;
    let t = num.t();
    let sum: Complex64 = comb
        .offsets
        .iter()
        .enumerate()
        .map(|(i, &fi)| {
            Complex64::from_polar(1.0, -2.0 * PI * fi as f64 * l as f64 / s + 2.0 * PI * f * (i as u32 * comb.s_sym) as f64 * t)
        })
        .sum();
    sum.norm_sqr() / (comb.m() as f64).powi(2)
}

fn level_at(comb: &CombPattern, num: &OfdmNumerology, alg: EapAlgorithm, l: u32, f: f64) -> f64 {
    match alg {
        EapAlgorithm::DelaySum => das_level(comb, num, l, f),
        _ => fft_level(comb, num, l, f),
    }
}

fn k_range(offset: f64, period: f64, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let k_lo = ((lo - offset) / period - 1e-9).ceil() as i64;
    let k_hi = ((hi - offset) / period + 1e-9).floor() as i64;
    (k_lo..=k_hi).map(move |k| offset + k as f64 * period)
}

/// Closed-form side peaks around a mainlobe at the origin.
///
/// Schemes A, B and D enumerate the image lattice directly. Full-sweep and
/// other non-linear staggering under `Fft2d` is evaluated numerically on a
/// Doppler grid of step `window.f_step`, and under `SuperRes` it comes from
/// the collision oracle.
pub fn predict_side_peaks(
    comb: &CombPattern,
    scheme: Scheme,
    alg: EapAlgorithm,
    num: &OfdmNumerology,
    window: &EapWindow,
) -> Result<Vec<SidePeak>> {
    let s = comb.s_sub;
    let ts = num.ts();
    let t = num.t();
    let sym = comb.s_sym as f64;
    let period = 1.0 / (sym * t);
    let offsets_for_l: Box<dyn Fn(u32) -> Vec<f64>> = match scheme {
        Scheme::A => {
            if linear_slope(comb) != Some(0) {
                return Err(Error::Unsupported("offsets are not constant; not a Scheme A comb".into()));
            }
            Box::new(move |_| vec![0.0])
        }
        Scheme::B => {
            if !is_alternating(comb) {
                return Err(Error::Unsupported("offsets do not alternate by S_sub/2; not a Scheme B comb".into()));
            }
            Box::new(move |l| vec![if l % 2 == 0 { 0.0 } else { 0.5 * period }])
        }
        Scheme::D => {
            let p = linear_slope(comb)
                .filter(|&p| p != 0)
                .ok_or_else(|| Error::Unsupported("offsets are not a linear staggering; not a Scheme D comb".into()))?;
            // the Delay-and-Sum product s(n) s*(n - D) carries the opposite
            // staggering phase to the steering model
            let sign = if alg == EapAlgorithm::DelaySum { -1.0 } else { 1.0 };
            Box::new(move |l| vec![sign * (p as f64 * l as f64 / s as f64) * period])
        }
        Scheme::C | Scheme::E => {
            return match alg {
                EapAlgorithm::SuperRes => Ok(oracle_peaks(comb, num, window)?),
                _ => Ok(predict_numeric(comb, alg, num, window, EXACT.min(window.floor))),
            };
        }
    };
    let mut out = Vec::new();
    for l in 0..s {
        let tau = l as f64 * ts / s as f64;
        if tau < window.tau_lo - 1e-15 || tau >= window.tau_hi {
            continue;
        }
        for base in offsets_for_l(l) {
            for f in k_range(base, period, window.f_lo, window.f_hi) {
                if l == 0 && f.abs() < 1e-9 * period {
                    continue;
                }
                if alg == EapAlgorithm::DelaySum && l == 0 && ((f * t).round() - f * t).abs() < 1e-9 {
                    // full-span Doppler sums vanish at multiples of 1/T
                    continue;
                }
                let level = match alg {
                    EapAlgorithm::DelaySum => das_level(comb, num, l, f),
                    _ => 1.0,
                };
                out.push(SidePeak { tau, doppler: f, level, kind: PeakKind::Predicted });
            }
        }
    }
    Ok(out)
}

/// Numeric prediction for any comb: on each delay image `l T_s / S_sub`,
/// local maxima in Doppler of the level function at or above `floor`.
pub fn predict_numeric(comb: &CombPattern, alg: EapAlgorithm, num: &OfdmNumerology, window: &EapWindow, floor: f64) -> Vec<SidePeak> {
    let s = comb.s_sub;
    let ts = num.ts();
    let freqs: Vec<f64> = k_range(0.0, window.f_step, window.f_lo, window.f_hi).collect();
    let mut out = Vec::new();
    for l in 0..s {
        let tau = l as f64 * ts / s as f64;
        if tau < window.tau_lo - 1e-15 || tau >= window.tau_hi {
            continue;
        }
        let levels: Vec<f64> = freqs.iter().map(|&f| level_at(comb, num, alg, l, f)).collect();
        for j in 0..freqs.len() {
            let v = levels[j];
            let left = if j > 0 { levels[j - 1] } else { f64::NEG_INFINITY };
            let right = levels.get(j + 1).copied().unwrap_or(f64::NEG_INFINITY);
            let is_max = v > left && v >= right;
            if !is_max || v < floor {
                continue;
            }
            if l == 0 && freqs[j].abs() < 0.5 * window.f_step {
                continue;
            }
            out.push(SidePeak { tau, doppler: freqs[j], level: v.min(1.0), kind: PeakKind::Predicted });
        }
    }
    out
}

/// Exact aliases from the collision oracle, replicated over the window.
fn oracle_peaks(comb: &CombPattern, num: &OfdmNumerology, window: &EapWindow) -> Result<Vec<SidePeak>> {
    let pattern = Pattern::Comb(comb.clone());
    let irr = oracle_pattern(&pattern)?;
    let y_period = oracle_window(&pattern);
    let period = (*y_period.numer() as f64 / *y_period.denom() as f64) / num.t();
    let set = collision_oracle_window(&irr, y_period, false);
    let mut out = Vec::new();
    let mut bases: Vec<(f64, f64)> = set
        .collisions
        .iter()
        .map(|c| {
            let x = *c.x.numer() as f64 / *c.x.denom() as f64;
            let y = *c.y.numer() as f64 / *c.y.denom() as f64;
            (x * num.ts(), y / num.t())
        })
        .collect();
    // pure Doppler repeats of the mainlobe
    bases.push((0.0, 0.0));
    for (tau, f0) in bases {
        if tau < window.tau_lo - 1e-15 || tau >= window.tau_hi {
            continue;
        }
        for f in k_range(f0, period, window.f_lo, window.f_hi) {
            if tau == 0.0 && f.abs() < 1e-9 * period {
                continue;
            }
            out.push(SidePeak { tau, doppler: f, level: 1.0, kind: PeakKind::Predicted });
        }
    }
    out.sort_by(|a, b| a.tau.total_cmp(&b.tau).then(a.doppler.total_cmp(&b.doppler)));
    Ok(out)
}
