//! Peak extraction from a delay-Doppler spectrum.

use super::{PeakKind, SidePeak};
use crate::sensing::{Scale, Spectrum2D};
use crate::{Error, Result};

fn threshold_level(scale: Scale, db: f64) -> f64 {
    match scale {
        Scale::Power => 10f64.powf(db / 10.0),
        Scale::Magnitude => 10f64.powf(db / 20.0),
    }
}

/// Parabolic vertex offset in bins, clamped to half a bin.
fn vertex(prev: f64, mid: f64, next: f64) -> f64 {
    let den = prev - 2.0 * mid + next;
    if den.abs() < 1e-300 {
        return 0.0;
    }
    (0.5 * (prev - next) / den).clamp(-0.5, 0.5)
}

/// All 8-neighbour local maxima at or above `threshold_db` relative to the
/// peak, with quadratic sub-bin refinement. The delay axis wraps when the
/// spectrum is delay-periodic.
pub fn local_maxima(spec: &Spectrum2D, threshold_db: f64) -> Result<Vec<SidePeak>> {
    let nt = spec.grid.taus.len();
    let nf = spec.grid.freqs.len();
    let peak = spec.values.iter().copied().fold(0.0, f64::max);
    let floor = spec.values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(peak > 0.0) || peak - floor <= 1e-12 * peak {
        return Err(Error::Numerical("spectrum is flat; no peaks to extract".into()));
    }
    let thr = threshold_level(spec.scale, threshold_db) * peak;
    let at = |i: isize, j: isize| -> Option<f64> {
        if j < 0 || j >= nf as isize {
            return None;
        }
        let i = if spec.tau_periodic {
            i.rem_euclid(nt as isize)
        } else if i < 0 || i >= nt as isize {
            return None;
        } else {
            i
        };
        Some(spec.value(i as usize, j as usize))
    };
    let (dt, df) = (spec.grid.tau_step(), spec.grid.f_step());
    let mut out = Vec::new();
    for i in 0..nt as isize {
        for j in 0..nf as isize {
            let v = spec.value(i as usize, j as usize);
            if v < thr {
                continue;
            }
            let mut is_max = true;
            'nb: for di in -1..=1isize {
                for dj in -1..=1isize {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    if let Some(u) = at(i + di, j + dj) {
                        // ties go to the first cell in scan order
                        let earlier = (di, dj) < (0, 0);
                        if u > v || (earlier && u == v) {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
            }
            if !is_max {
                continue;
            }
            let dtau = match (at(i - 1, j), at(i + 1, j)) {
                (Some(a), Some(b)) if nt > 2 => vertex(a, v, b),
                _ => 0.0,
            };
            let dfreq = match (at(i, j - 1), at(i, j + 1)) {
                (Some(a), Some(b)) => vertex(a, v, b),
                _ => 0.0,
            };
            out.push(SidePeak {
                tau: spec.grid.taus[i as usize] + dtau * dt,
                doppler: spec.grid.freqs[j as usize] + dfreq * df,
                level: v / peak,
                kind: PeakKind::Measured,
            });
        }
    }
    out.sort_by(|a, b| b.level.total_cmp(&a.level));
    Ok(out)
}

/// Mainlobe position and the side peaks around it. The mainlobe is the
/// strongest local maximum, ties within `1e-6` going to the smallest delay
/// and then the smallest Doppler magnitude; anything within one bin of it is
/// dropped.
pub fn extract_peaks(spec: &Spectrum2D, threshold_db: f64) -> Result<(SidePeak, Vec<SidePeak>)> {
    let mut all = local_maxima(spec, threshold_db)?;
    let top = all[0].level;
    let k = (0..all.len())
        .filter(|&k| all[k].level >= top * (1.0 - 1e-6))
        .min_by(|&a, &b| all[a].tau.total_cmp(&all[b].tau).then(all[a].doppler.abs().total_cmp(&all[b].doppler.abs())))
        .unwrap_or(0);
    let main = all.remove(k);
    let (dt, df) = (spec.grid.tau_step(), spec.grid.f_step());
    let span = dt * spec.grid.taus.len() as f64;
    all.retain(|p| {
        let mut d = (p.tau - main.tau).abs();
        if spec.tau_periodic {
            d = d.min(span - d);
        }
        d > 1.5 * dt || (p.doppler - main.doppler).abs() > 1.5 * df
    });
    Ok((main, all))
}

/// Default extraction threshold in dB.
pub const DEFAULT_THRESHOLD_DB: f64 = -13.0;
