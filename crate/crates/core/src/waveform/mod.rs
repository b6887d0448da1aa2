//! CP-OFDM modulation, delay-Doppler channels and the extended guard
//! interval receiver front end.

mod io;

pub use io::{read_signal, write_signal, Scene, SignalSidecar};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::patterns::{IrregularPattern, OfdmNumerology, PatternGrid};
use crate::{Error, Result};

/// One point scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    /// Delay in seconds.
    #[serde(rename = "tau_s")]
    pub tau: f64,
    /// Doppler shift in Hz.
    #[serde(rename = "doppler_hz")]
    pub doppler: f64,
    #[serde(with = "complex_parts", flatten)]
    pub alpha: Complex64,
}

mod complex_parts {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        #[serde(default = "one")]
        alpha_re: f64,
        #[serde(default)]
        alpha_im: f64,
    }

    fn one() -> f64 {
        1.0
    }

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Parts { alpha_re: c.re, alpha_im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(Complex64::new(p.alpha_re, p.alpha_im))
    }
}

impl Target {
    pub fn new(tau: f64, doppler: f64, alpha: Complex64) -> Self {
        Self { tau, doppler, alpha }
    }

    /// Target at an integer number of samples.
    pub fn at_sample(samples: usize, doppler: f64, alpha: Complex64, numerology: &OfdmNumerology) -> Self {
        Self { tau: samples as f64 * numerology.ts() / numerology.n as f64, doppler, alpha }
    }

    /// Delay in samples, when it is an integer.
    pub fn delay_samples(&self, numerology: &OfdmNumerology) -> Option<usize> {
        let d = self.tau * numerology.sample_rate();
        let r = d.round();
        ((d - r).abs() < 1e-6 && r >= 0.0).then_some(r as usize)
    }
}

/// Complex baseband samples with CP-OFDM symbol boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Start index of every CP-added symbol.
    pub symbol_boundaries: Vec<usize>,
}

/// Descrambled frequency-domain RS observations, one column per RS symbol.
///
/// Each column has `n` entries and is zero away from the pattern REs.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    pub pattern: IrregularPattern,
    pub n: usize,
    pub columns: Vec<Vec<Complex64>>,
    /// Fractional symbol index `l` of the front end (0 for ideal models).
    pub gi_index: usize,
}

impl SnapshotMatrix {
    /// Assembles per-symbol columns; fails on a count or length mismatch.
    pub fn new(pattern: IrregularPattern, n: usize, columns: Vec<Vec<Complex64>>, gi_index: usize) -> Result<Self> {
        if columns.len() != pattern.g() {
            return Err(Error::InvalidArgument(format!(
                "snapshot has {} columns but the pattern has {} RS symbols",
                columns.len(),
                pattern.g()
            )));
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidArgument(format!("every snapshot column must hold {n} entries")));
        }
        Ok(Self { pattern, n, columns, gi_index })
    }

    pub fn zeros(pattern: IrregularPattern, n: usize) -> Self {
        let columns = vec![vec![Complex64::new(0.0, 0.0); n]; pattern.g()];
        Self { pattern, n, columns, gi_index: 0 }
    }

    /// Pattern REs stacked symbol-major with ascending offsets.
    pub fn vectorize(&self) -> Vec<Complex64> {
        self.pattern
            .symbols
            .iter()
            .zip(&self.columns)
            .flat_map(|(s, col)| s.offsets.iter().map(move |&d| col[d as usize]))
            .collect()
    }

    /// Largest relative deviation from `reference` over pattern REs.
    pub fn relative_error(&self, reference: &SnapshotMatrix) -> f64 {
        let a = self.vectorize();
        let b = reference.vectorize();
        let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Adds white complex noise per RE with the given SNR relative to the
    /// mean RE power.
    pub fn add_noise(&mut self, snr_db: f64, seed: u64) {
        let v = self.vectorize();
        let power = v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len().max(1) as f64;
        let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (s, col) in self.pattern.symbols.iter().zip(self.columns.iter_mut()) {
            for &d in &s.offsets {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                col[d as usize] += Complex64::new(re, im) * sigma;
            }
        }
    }
}

/// CP-OFDM modulation of every symbol in the grid span.
///
/// Sample `n` of symbol `i` is `Σ_k X_i(k) e^{j2πk(n - N_cp)/N}`; symbols
/// without RS emit zeros.
pub fn modulate(grid: &PatternGrid) -> TimeSignal {
    let num = grid.numerology;
    let (n, n_cp, np) = (num.n, num.n_cp, num.samples_per_symbol());
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.span_symbols * np];
    for s in 0..grid.span_symbols {
        let mut buf = grid.row(s).to_vec();
        if buf.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        ifft.process(&mut buf);
        let out = &mut samples[s * np..(s + 1) * np];
        out[..n_cp].copy_from_slice(&buf[n - n_cp..]);
        out[n_cp..].copy_from_slice(&buf);
    }
    TimeSignal {
        samples,
        sample_rate: num.sample_rate(),
        symbol_boundaries: (0..grid.span_symbols).map(|s| s * np).collect(),
    }
}

/// Additive white Gaussian noise at `snr_db` relative to the mean power of
/// the noiseless samples inside RS symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Time-domain multi-target channel.
///
/// Delays must be integer samples. Each copy carries the constant Doppler
/// phase `e^{j2πf s T}` of the symbol `s` it is received in.
pub fn apply_channel_time(
    signal: &TimeSignal,
    numerology: &OfdmNumerology,
    targets: &[Target],
    noise: Option<NoiseSpec>,
) -> Result<TimeSignal> {
    let len = signal.samples.len();
    let np = numerology.samples_per_symbol();
    let t = numerology.t();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for target in targets {
        let d = target.delay_samples(numerology).ok_or_else(|| {
            Error::Unsupported(format!(
                "time-domain channel needs integer-sample delays, got {} s",
                target.tau
            ))
        })?;
        if d >= len.max(1) {
            return Err(Error::InvalidArgument(format!("delay of {d} samples exceeds the {len}-sample span")));
        }
        for (idx, y) in out.iter_mut().enumerate().skip(d) {
            let s = (idx / np) as f64;
            let phase = Complex64::from_polar(1.0, 2.0 * PI * target.doppler * s * t);
            *y += target.alpha * phase * signal.samples[idx - d];
        }
    }
    if let Some(spec) = noise {
        let active: Vec<bool> = (0..len / np.max(1))
            .map(|s| signal.samples[s * np..(s + 1) * np].iter().any(|v| v.norm_sqr() > 0.0))
            .collect();
        let (sum, count) = out
            .iter()
            .enumerate()
            .filter(|(i, _)| active.get(i / np).copied().unwrap_or(false))
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v.norm_sqr(), c + 1));
        let power = if count > 0 { sum / count as f64 } else { 1.0 };
        let power = if power > 0.0 { power } else { 1.0 };
        let sigma = (power / 10f64.powf(spec.snr_db / 10.0) / 2.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for y in out.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *y += Complex64::new(re, im) * sigma;
        }
    }
    Ok(TimeSignal { samples: out, sample_rate: signal.sample_rate, symbol_boundaries: signal.symbol_boundaries.clone() })
}

/// Ideal post-FFT model: `Σ_h α_h e^{j2πf_h S_g T} e^{-j2πτ_h k / T_s}` at
/// every pattern RE. Fractional delays are allowed.
pub fn apply_channel_freq(grid: &PatternGrid, targets: &[Target]) -> Result<SnapshotMatrix> {
    let num = grid.numerology;
    for target in targets {
        if !(0.0..num.ts()).contains(&target.tau) {
            return Err(Error::InvalidArgument(format!("delay {} s is outside [0, T_s)", target.tau)));
        }
    }
    let (t, ts) = (num.t(), num.ts());
    let mut snap = SnapshotMatrix::zeros(grid.pattern.clone(), num.n);
    for (s, col) in grid.pattern.symbols.iter().zip(snap.columns.iter_mut()) {
        for &d in &s.offsets {
            col[d as usize] = targets
                .iter()
                .map(|h| {
                    h.alpha
                        * Complex64::from_polar(1.0, 2.0 * PI * (h.doppler * s.index as f64 * t - h.tau * d as f64 / ts))
                })
                .sum();
        }
    }
    Ok(snap)
}

/// Largest delay in samples the front end tolerates without ISI.
pub fn isi_free_limit(numerology: &OfdmNumerology, l: usize, s_sub: u32) -> usize {
    let extra = if l == 0 { 0 } else { l * numerology.n / s_sub as usize };
    (numerology.n_cp + extra).min(numerology.n)
}

/// Receiver front end with an extended guard interval.
///
/// For `l = 0` this is CP removal and a length-`N` DFT, valid for any
/// pattern. For `l > 0` every RS symbol must be a comb of size `s_sub`: the
/// first `N_cp + lN/S_sub` samples are dropped, the rest is de-rotated by
/// `e^{-j2πF(lN/S_sub + m)/N}`, transformed with a length `N(S_sub-l)/S_sub`
/// DFT and the comb bins are mapped back to subcarriers `wS_sub + F`. The
/// result is scaled by `S_sub/(S_sub-l)` and descrambled.
pub fn extended_gi_front_end(signal: &TimeSignal, grid: &PatternGrid, l: usize, s_sub: u32) -> Result<SnapshotMatrix> {
    front_end(signal, grid, l, s_sub, true)
}

/// Same as [`extended_gi_front_end`] without the `S_sub/(S_sub-l)` gain.
pub fn extended_gi_front_end_uncompensated(
    signal: &TimeSignal,
    grid: &PatternGrid,
    l: usize,
    s_sub: u32,
) -> Result<SnapshotMatrix> {
    front_end(signal, grid, l, s_sub, false)
}

fn front_end(signal: &TimeSignal, grid: &PatternGrid, l: usize, s_sub: u32, compensate: bool) -> Result<SnapshotMatrix> {
    let num = grid.numerology;
    let (n, n_cp, np) = (num.n, num.n_cp, num.samples_per_symbol());
    let s = s_sub as usize;
    if l > 0 {
        if s < 2 || l >= s {
            return Err(Error::InvalidArgument(format!("GI index l = {l} must lie in [0, {s_sub})")));
        }
        if n % s != 0 {
            return Err(Error::InvalidArgument(format!("S_sub = {s_sub} does not divide N = {n}")));
        }
        for sym in &grid.pattern.symbols {
            let f = sym.offsets[0] as usize % s;
            if sym.offsets.iter().any(|&d| d as usize % s != f) {
                return Err(Error::Unsupported(format!(
                    "symbol {} is not a comb of size {s_sub}; the extended GI needs comb symbols",
                    sym.index
                )));
            }
        }
    }
    let lr = if l == 0 { n } else { n * (s - l) / s };
    let skip = if l == 0 { 0 } else { l * n / s };
    let fft = FftPlanner::<f64>::new().plan_fft_forward(lr);
    let gain = if compensate && l > 0 { s as f64 / (s - l) as f64 } else { 1.0 };
    let mut snap = SnapshotMatrix::zeros(grid.pattern.clone(), n);
    snap.gi_index = l;
    for (sym, col) in grid.pattern.symbols.iter().zip(snap.columns.iter_mut()) {
        let start = sym.index as usize * np + n_cp + skip;
        if start + lr > signal.samples.len() {
            return Err(Error::InvalidArgument("signal is shorter than the pattern span".into()));
        }
        let mut buf = signal.samples[start..start + lr].to_vec();
        let f = if l == 0 { 0 } else { sym.offsets[0] as usize % s };
        if f != 0 {
            for (m, v) in buf.iter_mut().enumerate() {
                let idx = ((f * (skip + m)) % n) as f64;
                *v *= Complex64::from_polar(1.0, -2.0 * PI * idx / n as f64);
            }
        }
        fft.process(&mut buf);
        for &d in &sym.offsets {
            let bin = if l == 0 { d as usize } else { (d as usize - f) / s * (s - l) };
            let x = grid.value(sym.index as usize, d as usize);
            col[d as usize] = buf[bin] / n as f64 * gain / x;
        }
    }
    Ok(snap)
}
