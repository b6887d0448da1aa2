use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{DelayDopplerGrid, Scale, Spectrum2D};
use crate::patterns::OfdmNumerology;
use crate::waveform::TimeSignal;
use crate::{Error, Result};

/// Delay-and-Sum ambiguity function of a transmitted signal.
///
/// For a lag of `D` samples each RS symbol contributes
/// `Σ s(n) s*(n - D) e^{j2πf n T_s / N}` over `n` from `D` samples past the
/// start of its CP-added span to the end of that span. The magnitude is
/// divided by the zero-lag energy, so `A(0, 0) = 1`. Delays must be integer
/// samples.
pub fn delay_sum_af(
    signal: &TimeSignal,
    num: &OfdmNumerology,
    rs_symbols: &[u32],
    grid: &DelayDopplerGrid,
) -> Result<Spectrum2D> {
    if signal.samples.is_empty() || rs_symbols.is_empty() {
        return Err(Error::InvalidArgument("Delay-and-Sum needs a nonempty signal".into()));
    }
    let np = num.samples_per_symbol();
    let fs = num.sample_rate();
    let lags: Vec<usize> = grid
        .taus
        .iter()
        .map(|&tau| {
            let d = tau * fs;
            let r = d.round();
            if (d - r).abs() > 1e-6 || r < 0.0 || r as usize >= np {
                Err(Error::InvalidArgument(format!("Delay-and-Sum delay {tau} s is not an integer sample lag below N'")))
            } else {
                Ok(r as usize)
            }
        })
        .collect::<Result<_>>()?;
    let spans: Vec<usize> = rs_symbols.iter().map(|&s| s as usize * np).collect();
    if spans.iter().any(|&st| st + np > signal.samples.len()) {
        return Err(Error::InvalidArgument("RS symbol lies outside the signal".into()));
    }
    let energy: f64 = spans
        .iter()
        .map(|&st| signal.samples[st..st + np].iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum();
    if energy <= 0.0 {
        return Err(Error::InvalidArgument("signal has zero energy over the RS symbols".into()));
    }
    let s = &signal.samples;
    let nf = grid.freqs.len();
    let rows: Vec<Vec<f64>> = lags
        .par_iter()
        .map(|&d| {
            let products: Vec<(usize, Vec<Complex64>)> = spans
                .iter()
                .map(|&st| (st + d, (st + d..st + np).map(|n| s[n] * s[n - d].conj()).collect()))
                .collect();
            grid.freqs
                .iter()
                .map(|&f| {
                    let w = 2.0 * PI * f / fs;
                    let step = Complex64::from_polar(1.0, w);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (first, run) in &products {
                        // phase recurrence within one contiguous run of samples
                        let mut ph = Complex64::from_polar(1.0, w * *first as f64);
                        let mut part = Complex64::new(0.0, 0.0);
                        for p in run {
                            part += p * ph;
                            ph *= step;
                        }
                        acc += part;
                    }
                    acc.norm() / energy
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(lags.len() * nf);
    rows.into_iter().for_each(|r| values.extend(r));
    Ok(Spectrum2D::new(grid.clone(), values, Scale::Magnitude, "delay-sum"))
}
