use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Scale, Spectrum2D, SteeringDictionary};
use crate::waveform::SnapshotMatrix;
use crate::{Error, Result};

/// MUSIC pseudo-spectrum `1 / ‖E_n^H w‖²`.
///
/// The covariance is averaged over `snapshots` and loaded by
/// `loading trace(R) / dim`. A single snapshot gives a rank-one covariance,
/// so more snapshots than targets are needed for a usable noise subspace.
pub fn music_2d(snapshots: &[SnapshotMatrix], dict: &SteeringDictionary, model_order: usize, loading: f64) -> Result<Spectrum2D> {
    if snapshots.is_empty() {
        return Err(Error::InvalidArgument("MUSIC needs at least one snapshot".into()));
    }
    let dim = dict.vectors.nrows();
    if model_order >= dim {
        return Err(Error::InvalidArgument(format!("model order {model_order} must be below the vector length {dim}")));
    }
    let mut r = DMatrix::<Complex64>::zeros(dim, dim);
    for snap in snapshots {
        let a = DVector::from_vec(snap.vectorize());
        if a.len() != dim {
            return Err(Error::InvalidArgument("snapshot length differs from the dictionary".into()));
        }
        r += &a * a.adjoint();
    }
    r /= Complex64::new(snapshots.len() as f64, 0.0);
    let trace: f64 = (0..dim).map(|i| r[(i, i)].re).sum();
    for i in 0..dim {
        r[(i, i)] += Complex64::new(loading * trace / dim as f64, 0.0);
    }
    let eig = r.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v < -1e-9 * trace.abs().max(1e-300)) {
        return Err(Error::Numerical("covariance is not positive semidefinite".into()));
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let noise_cols: Vec<usize> = order[..dim - model_order].to_vec();
    let en = eig.eigenvectors.select_columns(noise_cols.iter());
    let proj = en.ad_mul(&dict.vectors);
    let values: Vec<f64> = proj
        .column_iter()
        .map(|c| {
            let d = c.norm_squared();
            if d > 0.0 { 1.0 / d } else { f64::MAX }
        })
        .collect();
    Ok(Spectrum2D::new(dict.grid.clone(), values, Scale::Power, "music"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{CombPattern, OfdmNumerology, Pattern, realize_grid, Scrambling};
    use crate::sensing::{build_dictionary, DelayDopplerGrid};
    use crate::waveform::{apply_channel_freq, Target};

    #[test]
    fn noisy_snapshots_locate_target() {
        let num = OfdmNumerology::with_default_cp(16).unwrap();
        let irr = Pattern::Comb(CombPattern::new(4, 1, vec![0, 3, 1]).unwrap()).to_irregular(16).unwrap();
        let grid = realize_grid(&irr, num, &Scrambling::default()).unwrap();
        let g = DelayDopplerGrid::for_numerology(&num, 1, 6, 0.0, 0.999 / num.t()).unwrap();
        let truth = 7 * g.freqs.len() + 2;
        let (tau, f) = g.point(truth);
        let snaps: Vec<SnapshotMatrix> = (0..8)
            .map(|i| {
                let alpha = Complex64::from_polar(1.0, 0.7 * i as f64);
                let mut s = apply_channel_freq(&grid, &[Target::new(tau, f, alpha)]).unwrap();
                s.add_noise(20.0, 100 + i);
                s
            })
            .collect();
        let dict = build_dictionary(&irr, &num, &g);
        let spec = music_2d(&snaps, &dict, 1, 1e-6).unwrap();
        let (i, j) = spec.argmax();
        assert_eq!(i * g.freqs.len() + j, truth);
    }

    #[test]
    fn zero_order_is_flat() {
        let num = OfdmNumerology::with_default_cp(16).unwrap();
        let irr = Pattern::Comb(CombPattern::new(4, 1, vec![0, 2]).unwrap()).to_irregular(16).unwrap();
        let grid = realize_grid(&irr, num, &Scrambling::default()).unwrap();
        let snap = apply_channel_freq(&grid, &[Target::new(0.0, 0.0, Complex64::new(1.0, 0.0))]).unwrap();
        let g = DelayDopplerGrid::for_numerology(&num, 1, 4, 0.0, 0.9 / num.t()).unwrap();
        let dict = build_dictionary(&irr, &num, &g);
        let spec = music_2d(&[snap.clone()], &dict, 0, 0.0).unwrap();
        let dim = dict.vectors.nrows() as f64;
        assert!(spec.values.iter().all(|v| (v * dim - 1.0).abs() < 1e-9));
        assert!(music_2d(&[snap], &dict, dict.vectors.nrows(), 0.0).is_err());
    }
}
