//! Python bindings for `isaclab-core`.

use isaclab_core::checker;
use isaclab_core::eap::{self, EapAlgorithm, EapWindow, PeakKind, SidePeak};
use isaclab_core::patterns::{self, CombPattern, OfdmNumerology, Scheme};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: isaclab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_loads(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "Numerology", frozen)]
struct PyNumerology(OfdmNumerology);

#[pymethods]
impl PyNumerology {
    #[new]
    #[pyo3(signature = (n, n_cp=None, scs_hz=15e3))]
    fn new(n: usize, n_cp: Option<usize>, scs_hz: f64) -> PyResult<Self> {
        OfdmNumerology::new(n, n_cp.unwrap_or(n / 16), scs_hz).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn n_cp(&self) -> usize {
        self.0.n_cp
    }

    /// Useful symbol duration in seconds.
    #[getter]
    fn ts(&self) -> f64 {
        self.0.ts()
    }

    /// Full symbol duration including the CP.
    #[getter]
    fn t(&self) -> f64 {
        self.0.t()
    }

    fn __repr__(&self) -> String {
        format!("Numerology(n={}, n_cp={}, scs_hz={})", self.0.n, self.0.n_cp, self.0.scs_hz)
    }
}

#[pyclass(name = "Pattern", frozen)]
struct PyPattern(patterns::Pattern);

impl PyPattern {
    fn as_comb(&self) -> PyResult<&CombPattern> {
        match &self.0 {
            patterns::Pattern::Comb(c) => Ok(c),
            other => Err(PyValueError::new_err(format!("expected a comb pattern, got {}", other.kind()))),
        }
    }
}

#[pymethods]
impl PyPattern {
    #[staticmethod]
    #[pyo3(name = "comb", signature = (s_sub, offsets, s_sym=1))]
    fn comb_pattern(s_sub: u32, offsets: Vec<u32>, s_sym: u32) -> PyResult<Self> {
        CombPattern::new(s_sub, s_sym, offsets).map(|c| Self(patterns::Pattern::Comb(c))).map_err(err)
    }

    /// Comb pattern for staggering scheme `A`..`E`.
    #[staticmethod]
    #[pyo3(signature = (scheme, s_sub, s_sym=1, m=None, p=None))]
    fn scheme(scheme: &str, s_sub: u32, s_sym: u32, m: Option<usize>, p: Option<u32>) -> PyResult<Self> {
        let scheme: Scheme = scheme.parse().map_err(err)?;
        let m = m.unwrap_or_else(|| match scheme {
            Scheme::C => patterns::full_sweep_cycle(s_sub).map_or(s_sub as usize, <[u32]>::len),
            Scheme::E => 0,
            _ => s_sub as usize,
        });
        patterns::make_scheme(scheme, s_sub, s_sym, m, p).map(|c| Self(patterns::Pattern::Comb(c))).map_err(err)
    }

    #[staticmethod]
    fn from_cells(cells: Vec<(u32, u32)>) -> PyResult<Self> {
        patterns::IrregularPattern::from_cells(cells).map(|p| Self(patterns::Pattern::Irregular(p))).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        patterns::Pattern::from_json(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind()
    }

    /// `(symbol, subcarrier)` cells of one slot with `n` subcarriers.
    fn cells(&self, n: usize) -> PyResult<Vec<(u32, u32)>> {
        Ok(self.0.to_irregular(n).map_err(err)?.cells().collect())
    }

    /// Sensing overhead in percent for `n` subcarriers.
    fn overhead(&self, n: usize) -> PyResult<f64> {
        patterns::sensing_overhead(&self.0, n).map(|o| 100.0 * o).map_err(err)
    }

    /// Anti-aliasing check; returns the verdict as a dict.
    fn check(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let r = checker::check(&self.0).map_err(err)?;
        json_loads(py, &serde_json::to_string(&r).map_err(|e| PyValueError::new_err(e.to_string()))?)
    }

    /// True when the closed-form check agrees with the brute-force oracle.
    fn cross_validate(&self) -> PyResult<bool> {
        checker::cross_validate(&self.0).map(|c| c.agree).map_err(err)
    }

    fn __repr__(&self) -> PyResult<String> {
        Ok(format!("Pattern({})", self.to_json()?.split_whitespace().collect::<String>()))
    }
}

/// Predicted side peaks of a comb pattern as `(tau_s, doppler_hz, level)`.
#[pyfunction]
#[pyo3(signature = (pattern, scheme, algorithm, numerology, f_lo, f_hi, f_step, floor=0.5))]
#[allow(clippy::too_many_arguments)]
fn predict_side_peaks(
    pattern: &PyPattern,
    scheme: &str,
    algorithm: &str,
    numerology: &PyNumerology,
    f_lo: f64,
    f_hi: f64,
    f_step: f64,
    floor: f64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let comb = pattern.as_comb()?;
    let scheme: Scheme = scheme.parse().map_err(err)?;
    let alg: EapAlgorithm = algorithm.parse().map_err(err)?;
    let window = EapWindow { tau_lo: 0.0, tau_hi: numerology.0.ts(), f_lo, f_hi, f_step, floor };
    let peaks = eap::predict_side_peaks(comb, scheme, alg, &numerology.0, &window).map_err(err)?;
    Ok(peaks.iter().map(|p| (p.tau, p.doppler, p.level)).collect())
}

/// Pareto frontier of ambiguity-free `(tau_max, f_max)` boxes.
#[pyfunction]
#[pyo3(signature = (peaks, tau_limit, f_limit, min_level=0.5, delay_period=None))]
fn unambiguous_regions(
    peaks: Vec<(f64, f64, f64)>,
    tau_limit: f64,
    f_limit: f64,
    min_level: f64,
    delay_period: Option<f64>,
) -> Vec<(f64, f64)> {
    let peaks: Vec<SidePeak> = peaks
        .into_iter()
        .map(|(tau, doppler, level)| SidePeak { tau, doppler, level, kind: PeakKind::Predicted })
        .collect();
    eap::unambiguous_regions(&peaks, min_level, delay_period, tau_limit, f_limit)
        .into_iter()
        .map(|r| (r.tau_max, r.f_max))
        .collect()
}

#[pymodule]
fn isaclab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNumerology>()?;
    m.add_class::<PyPattern>()?;
    m.add_function(wrap_pyfunction!(predict_side_peaks, m)?)?;
    m.add_function(wrap_pyfunction!(unambiguous_regions, m)?)?;
    Ok(())
}
