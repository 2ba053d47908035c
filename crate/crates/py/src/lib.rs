//! Python bindings. Reports come back as plain dicts (parsed from the same
//! JSON the CLI writes), reservoirs and engines as small wrapper classes.

use carnot_core::bounds::{engine_sweep_verify, generalized_bound, saturating_engine};
use carnot_core::coherence::{self, ScullyParams};
use carnot_core::decomposition::enumerate_channels;
use carnot_core::engine::{heat_flows, CouplingOperator, Tuple};
use carnot_core::model::{diagonalize_reservoir, thermal_reservoir_labeled, DiagonalReservoir, ReservoirSpec, Tolerances};
use carnot_core::oracle::{compare_with_closed_form, DrivingProtocol, Envelope};
use carnot_core::report::{to_json, ChannelRow};
use carnot_core::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    let text = format!("[{}] {e}", e.kind());
    match e {
        Error::Convergence { .. } | Error::Consistency(_) => PyRuntimeError::new_err(text),
        _ => PyValueError::new_err(text),
    }
}

fn as_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (to_json(value),))
}

/// Stationary reservoir in its energy eigenbasis.
#[pyclass(name = "Reservoir", module = "carnot_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyReservoir {
    inner: DiagonalReservoir,
}

#[pymethods]
impl PyReservoir {
    #[new]
    #[pyo3(signature = (energies, populations, label = "reservoir"))]
    fn new(energies: Vec<f64>, populations: Vec<f64>, label: &str) -> PyResult<Self> {
        let inner = DiagonalReservoir::new(label, &energies, &populations).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Diagonalizes a full density matrix after checking stationarity.
    #[staticmethod]
    #[pyo3(signature = (energies, density, label = "reservoir"))]
    fn from_density(energies: Vec<f64>, density: Vec<Vec<Complex64>>, label: &str) -> PyResult<Self> {
        let n = density.len();
        if density.iter().any(|row| row.len() != n) {
            return Err(PyValueError::new_err("density must be a square matrix"));
        }
        let rho = DMatrix::from_fn(n, n, |i, j| density[i][j]);
        let spec = ReservoirSpec::new(label, energies, rho).map_err(to_py)?;
        let inner = diagonalize_reservoir(&spec, &Tolerances::default()).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (energies, temperature, label = "thermal"))]
    fn thermal(energies: Vec<f64>, temperature: f64, label: &str) -> PyResult<Self> {
        let inner = thermal_reservoir_labeled(label, &energies, temperature).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn label(&self) -> &str {
        self.inner.label()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.energies()
    }

    #[getter]
    fn populations(&self) -> Vec<f64> {
        self.inner.populations()
    }

    fn channels<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let rows: Vec<ChannelRow> = enumerate_channels(&self.inner).iter().map(ChannelRow::from_channel).collect();
        as_dict(py, &rows)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Reservoir({:?}, levels={})", self.inner.label(), self.inner.len())
    }
}

/// Engine as |M|^2 weights on canonical tuples.
#[pyclass(name = "Engine", module = "carnot_py", skip_from_py_object)]
#[derive(Clone)]
struct PyEngine {
    inner: CouplingOperator,
}

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (coupling = 1.0))]
    fn new(coupling: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CouplingOperator::new(coupling).map_err(to_py)?,
        })
    }

    fn add(&mut self, m: usize, n: usize, p: usize, q: usize, weight: f64) -> PyResult<()> {
        self.inner.insert(Tuple::new(m, n, p, q), weight).map_err(to_py)
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.lambda()
    }

    fn entries(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        self.inner.entries().map(|(t, w)| (t.m, t.n, t.p, t.q, w)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
#[pyo3(name = "heat_flows")]
fn py_heat_flows<'py>(py: Python<'py>, hot: &PyReservoir, cold: &PyReservoir, engine: &PyEngine) -> PyResult<Bound<'py, PyAny>> {
    let report = heat_flows(&hot.inner, &cold.inner, &engine.inner).map_err(to_py)?;
    as_dict(py, &report)
}

#[pyfunction]
#[pyo3(name = "generalized_bound")]
fn py_generalized_bound<'py>(py: Python<'py>, hot: &PyReservoir, cold: &PyReservoir) -> PyResult<Bound<'py, PyAny>> {
    as_dict(py, &generalized_bound(&hot.inner, &cold.inner))
}

#[pyfunction]
#[pyo3(name = "saturating_engine")]
fn py_saturating_engine(hot: &PyReservoir, cold: &PyReservoir) -> PyResult<PyEngine> {
    let report = generalized_bound(&hot.inner, &cold.inner);
    let inner = saturating_engine(&hot.inner, &cold.inner, &report).map_err(to_py)?;
    Ok(PyEngine { inner })
}

#[pyfunction]
#[pyo3(name = "sweep", signature = (hot, cold, trials = 10_000, seed = 0))]
fn py_sweep<'py>(py: Python<'py>, hot: &PyReservoir, cold: &PyReservoir, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let (h, c) = (hot.inner.clone(), cold.inner.clone());
    let summary = py.detach(move || engine_sweep_verify(&h, &c, trials, seed)).map_err(to_py)?;
    as_dict(py, &summary)
}

#[pyfunction]
#[pyo3(name = "scully_bound", signature = (pa, pb, rho_bc, omega, phi = 0.0))]
fn py_scully_bound<'py>(py: Python<'py>, pa: f64, pb: f64, rho_bc: f64, omega: f64, phi: f64) -> PyResult<Bound<'py, PyAny>> {
    let params = ScullyParams::new(pa, pb, rho_bc, phi, omega).map_err(to_py)?;
    as_dict(py, &coherence::scully_bound(&params).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(name = "coherent_pair")]
fn py_coherent_pair(sigma: f64) -> PyResult<PyReservoir> {
    let spec = coherence::coherent_pair(sigma).map_err(to_py)?;
    let inner = diagonalize_reservoir(&spec, &Tolerances::default()).map_err(to_py)?;
    Ok(PyReservoir { inner })
}

#[pyfunction]
#[pyo3(name = "max_extractable_work")]
fn py_max_extractable_work(hot_temperature: f64, pairs: u64, sigma: f64) -> PyResult<f64> {
    coherence::max_extractable_work(hot_temperature, pairs, sigma).map_err(to_py)
}

/// Time-domain heat flows of a driving protocol next to the closed form.
///
/// `amplitudes` holds `(m, n, p, q, value)` elements of the coupling.
#[pyfunction]
#[pyo3(name = "oracle_compare", signature = (envelope, omega, t_final, amplitudes, hot, cold, coupling = 1.0, steps = 16))]
#[allow(clippy::too_many_arguments)]
fn py_oracle_compare<'py>(
    py: Python<'py>,
    envelope: &str,
    omega: f64,
    t_final: f64,
    amplitudes: Vec<(usize, usize, usize, usize, Complex64)>,
    hot: &PyReservoir,
    cold: &PyReservoir,
    coupling: f64,
    steps: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let envelope = match envelope {
        "cosine" => Envelope::Cosine,
        "square" => Envelope::Square,
        "constant" => Envelope::Constant,
        other => return Err(PyValueError::new_err(format!("unknown envelope {other:?}"))),
    };
    let mut proto = DrivingProtocol::new(envelope, omega, t_final).map_err(to_py)?;
    for (m, n, p, q, v) in amplitudes {
        proto.insert(Tuple::new(m, n, p, q), v).map_err(to_py)?;
    }
    let (h, c) = (hot.inner.clone(), cold.inner.clone());
    let cmp = py
        .detach(move || compare_with_closed_form(&proto, &h, &c, coupling, steps))
        .map_err(to_py)?;
    as_dict(py, &cmp)
}

#[pymodule]
fn carnot_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyReservoir>()?;
    m.add_class::<PyEngine>()?;
    m.add_function(wrap_pyfunction!(py_heat_flows, m)?)?;
    m.add_function(wrap_pyfunction!(py_generalized_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_saturating_engine, m)?)?;
    m.add_function(wrap_pyfunction!(py_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(py_scully_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_coherent_pair, m)?)?;
    m.add_function(wrap_pyfunction!(py_max_extractable_work, m)?)?;
    m.add_function(wrap_pyfunction!(py_oracle_compare, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
