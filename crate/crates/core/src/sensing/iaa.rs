use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Scale, Spectrum2D, SteeringDictionary};
use crate::waveform::SnapshotMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IaaInit {
    /// `p_k = |w_k^H a|² / ‖w_k‖⁴`.
    MatchedFilter,
    /// Equal powers.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IaaOptions {
    pub iterations: usize,
    /// Diagonal loading `ε trace(R) / dim`.
    pub loading: f64,
    pub init: IaaInit,
}

impl Default for IaaOptions {
    fn default() -> Self {
        Self { iterations: 15, loading: 1e-6, init: IaaInit::MatchedFilter }
    }
}

#[derive(Debug, Clone)]
pub struct IaaOutput {
    pub spectrum: Spectrum2D,
    /// Max relative power change per iteration.
    pub convergence: Vec<f64>,
}

/// Iterative adaptive approach over the dictionary.
///
/// Each iteration forms `R = W diag(p) W^H` plus loading and updates
/// `p_k = |w_k^H R⁻¹ a|² / (w_k^H R⁻¹ w_k)²`.
pub fn iaa_2d(snap: &SnapshotMatrix, dict: &SteeringDictionary, opts: &IaaOptions) -> Result<IaaOutput> {
    let a = DVector::from_vec(snap.vectorize());
    let w = &dict.vectors;
    let dim = w.nrows();
    if a.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "snapshot holds {} REs but the dictionary has {dim} rows",
            a.len()
        )));
    }
    if opts.iterations == 0 {
        return Err(Error::InvalidArgument("IAA needs at least one iteration".into()));
    }
    let k = w.ncols();
    let mf = w.ad_mul(&a);
    let mut p: Vec<f64> = match opts.init {
        IaaInit::MatchedFilter => (0..k)
            .map(|j| {
                let nw = w.column(j).norm_squared();
                mf[j].norm_sqr() / (nw * nw)
            })
            .collect(),
        IaaInit::Uniform => vec![1.0; k],
    };
    let mut convergence = Vec::with_capacity(opts.iterations);
    for _ in 0..opts.iterations {
        let mut wp = w.clone();
        for (j, mut col) in wp.column_iter_mut().enumerate() {
            col *= Complex64::new(p[j], 0.0);
        }
        let mut r: DMatrix<Complex64> = &wp * w.adjoint();
        let trace: f64 = (0..dim).map(|i| r[(i, i)].re).sum();
        let load = opts.loading * trace / dim as f64;
        for i in 0..dim {
            r[(i, i)] += Complex64::new(load, 0.0);
        }
        let chol = r.cholesky().ok_or_else(|| {
            Error::Numerical("IAA covariance is singular; increase the diagonal loading".into())
        })?;
        let z = chol.solve(w);
        let za = z.ad_mul(&a);
        let mut change: f64 = 0.0;
        for j in 0..k {
            let den = w.column(j).dotc(&z.column(j)).re;
            let new = za[j].norm_sqr() / (den * den);
            if p[j] > 0.0 {
                change = change.max((new - p[j]).abs() / p[j]);
            }
            p[j] = new;
        }
        convergence.push(change);
    }
    let spectrum = Spectrum2D::new(dict.grid.clone(), p, Scale::Power, "iaa");
    Ok(IaaOutput { spectrum, convergence })
}
