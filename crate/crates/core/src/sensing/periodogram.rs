use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{DelayDopplerGrid, Scale, Spectrum2D};
use crate::patterns::OfdmNumerology;
use crate::waveform::SnapshotMatrix;
use crate::{Error, Result};

/// Zero-padding and Doppler range of the 2D FFT periodogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodogramOptions {
    /// Delay oversampling; the delay step is `T_s / (N pad_tau)`.
    pub pad_tau: usize,
    /// Doppler FFT length; at least the symbol span. The Doppler step is
    /// `1 / (doppler_bins T)`.
    pub doppler_bins: usize,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl PeriodogramOptions {
    /// Doppler over `[-1/T, 1/T]` with `pad` times the span in bins.
    pub fn for_span(num: &OfdmNumerology, span: usize, pad_tau: usize, pad_f: usize) -> Self {
        let t = num.t();
        Self { pad_tau, doppler_bins: span * pad_f.max(1), f_lo: -1.0 / t, f_hi: 1.0 / t }
    }
}

/// `|w(τ, f)^H a|²` over the grid, evaluated with two FFTs: a forward DFT
/// across absolute symbol rows for Doppler and an inverse DFT across
/// subcarriers for delay. Off-pattern REs contribute zeros. The Doppler axis
/// repeats every `1/T`, the delay axis every `T_s`.
pub fn periodogram_2dfft(snap: &SnapshotMatrix, num: &OfdmNumerology, opts: &PeriodogramOptions) -> Result<Spectrum2D> {
    let (Some(first), Some(last)) = (snap.pattern.symbols.first(), snap.pattern.symbols.last()) else {
        return Err(Error::InvalidArgument("empty snapshot".into()));
    };
    let span = (last.index - first.index + 1) as usize;
    if opts.doppler_bins < span {
        return Err(Error::InvalidArgument(format!(
            "Doppler FFT length {} is shorter than the {span}-symbol span",
            opts.doppler_bins
        )));
    }
    let n = snap.n;
    let lf = opts.doppler_bins;
    let lt = n * opts.pad_tau.max(1);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(lf);
    let inv = planner.plan_fft_inverse(lt);

    // rows: Doppler bin, columns: subcarrier
    let mut doppler = vec![vec![Complex64::new(0.0, 0.0); n]; lf];
    let mut row_buf = vec![Complex64::new(0.0, 0.0); lf];
    for k in 0..n {
        row_buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut any = false;
        for (sym, col) in snap.pattern.symbols.iter().zip(&snap.columns) {
            let v = col[k];
            if v.norm_sqr() > 0.0 {
                row_buf[(sym.index - first.index) as usize] = v;
                any = true;
            }
        }
        if any {
            fwd.process(&mut row_buf);
            for (q, v) in row_buf.iter().enumerate() {
                doppler[q][k] = *v;
            }
        }
    }
    let mut power = vec![vec![0.0; lf]; lt];
    let mut tau_buf = vec![Complex64::new(0.0, 0.0); lt];
    for (q, row) in doppler.iter().enumerate() {
        tau_buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        tau_buf[..n].copy_from_slice(row);
        inv.process(&mut tau_buf);
        for (g, v) in tau_buf.iter().enumerate() {
            power[g][q] = v.norm_sqr();
        }
    }

    let t = num.t();
    let q_lo = (opts.f_lo * lf as f64 * t - 1e-9).ceil() as i64;
    let q_hi = (opts.f_hi * lf as f64 * t + 1e-9).floor() as i64;
    if q_hi < q_lo {
        return Err(Error::InvalidArgument("Doppler range holds no FFT bin".into()));
    }
    let freqs: Vec<f64> = (q_lo..=q_hi).map(|q| q as f64 / (lf as f64 * t)).collect();
    let taus: Vec<f64> = (0..lt).map(|g| g as f64 * num.ts() / lt as f64).collect();
    let mut values = Vec::with_capacity(lt * freqs.len());
    for row in &power {
        for q in q_lo..=q_hi {
            values.push(row[q.rem_euclid(lf as i64) as usize]);
        }
    }
    let grid = DelayDopplerGrid::new(taus, freqs)?;
    let mut spec = Spectrum2D::new(grid, values, Scale::Power, "fft2d");
    spec.tau_periodic = true;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{make_scheme, realize_grid, Pattern, Scheme, Scrambling};
    use crate::sensing::build_dictionary;
    use crate::waveform::{apply_channel_freq, Target};

    fn setup(scheme: Scheme, p: Option<u32>) -> (SnapshotMatrix, OfdmNumerology) {
        let num = OfdmNumerology::with_default_cp(32).unwrap();
        let comb = make_scheme(scheme, 4, 1, 8, p).unwrap();
        let irr = Pattern::Comb(comb).to_irregular(32).unwrap();
        let grid = realize_grid(&irr, num, &Scrambling::default()).unwrap();
        let target = Target::at_sample(3, 2.0 / (8.0 * num.t()), Complex64::new(1.0, 0.0), &num);
        (apply_channel_freq(&grid, &[target]).unwrap(), num)
    }

    #[test]
    fn matches_steering_inner_products() {
        let (snap, num) = setup(Scheme::C, None);
        let opts = PeriodogramOptions { pad_tau: 2, doppler_bins: 16, f_lo: -0.5 / num.t(), f_hi: 0.5 / num.t() };
        let spec = periodogram_2dfft(&snap, &num, &opts).unwrap();
        let dict = build_dictionary(&snap.pattern, &num, &spec.grid);
        let a = nalgebra::DVector::from_vec(snap.vectorize());
        for k in (0..spec.grid.len()).step_by(37) {
            let ip = dict.vectors.column(k).dotc(&a).norm_sqr();
            assert!((ip - spec.values[k]).abs() < 1e-8 * spec.raw_peak, "{k}");
        }
    }

    #[test]
    fn peak_at_truth_and_scheme_d_image() {
        let (snap, num) = setup(Scheme::D, Some(1));
        let opts = PeriodogramOptions::for_span(&num, 8, 1, 1);
        let spec = periodogram_2dfft(&snap, &num, &opts).unwrap().normalize();
        let t = num.t();
        let find = |tau_samples: usize, f: f64| {
            let j = spec.grid.freqs.iter().position(|&x| (x - f).abs() < 1e-6).unwrap();
            spec.value(tau_samples, j)
        };
        assert!((find(3, 2.0 / (8.0 * t)) - 1.0).abs() < 1e-9);
        // delay image one comb step later carries an extra Doppler of p/(S_sub T)
        assert!((find(3 + 8, 2.0 / (8.0 * t) + 1.0 / (4.0 * t)) - 1.0).abs() < 1e-9);
        assert!(find(3 + 8, 2.0 / (8.0 * t)) < 1e-9);
    }

    #[test]
    fn zero_snapshot_gives_zero_spectrum() {
        let (mut snap, num) = setup(Scheme::A, None);
        snap.columns.iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0)));
        let spec = periodogram_2dfft(&snap, &num, &PeriodogramOptions::for_span(&num, 8, 1, 1)).unwrap().normalize();
        assert!(spec.values.iter().all(|v| *v == 0.0));
    }
}
