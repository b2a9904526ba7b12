//! Python bindings for `gswl_core`.
//!
//! Structured results cross the boundary as JSON and come back as plain
//! Python dicts and lists.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use gswl_core::ect::{ect_distance as core_ect_distance, entry_time_range, linspace, sampled_ect as core_sampled_ect, sphere_quadrature};
use gswl_core::generators::{
    apply_deformation, disk_fan, grid_triangulation, library_triangulation, perturb_embedding, spectral_embedding,
    DeformationFamily, DeformationSpec, LIBRARY_NAMES,
};
use gswl_core::harness::{default_quantization_digits, report_tables, run, ExperimentConfig};
use gswl_core::io::{complex_from_json_str, complex_from_off_str, complex_to_json_string, load_complex, save_complex};
use gswl_core::mpsn::{construct_ect_readout, construct_realizer, forward, integral, upper_bound_check as core_upper_bound_check};
use gswl_core::refine::{equivalent_at, refine as core_refine, ColorInterner, RefinementConfig};
use gswl_core::{euler_characteristic, EmbeddedComplex, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| py_err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_name<T: DeserializeOwned>(what: &str, name: &str) -> PyResult<T> {
    serde_json::from_value(Value::String(name.to_owned()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what}: {name}")))
}

fn digits_or_default(digits: Option<u32>) -> PyResult<u32> {
    match digits {
        Some(d) => Ok(d),
        None => default_quantization_digits().map_err(py_err),
    }
}

fn config(mode: &str, depth: usize, phi: &str, adjacency: &str, digits: Option<u32>) -> PyResult<RefinementConfig> {
    Ok(RefinementConfig::new(parse_name("mode", mode)?, depth)
        .with_phi(parse_name("phi mode", phi)?)
        .with_adjacency(parse_name("adjacency", adjacency)?)
        .with_digits(digits_or_default(digits)?))
}

/// An abstract simplicial complex with vertex coordinates.
#[pyclass(frozen, from_py_object, module = "gswl")]
#[derive(Clone)]
pub struct Complex {
    inner: EmbeddedComplex,
}

impl From<EmbeddedComplex> for Complex {
    fn from(inner: EmbeddedComplex) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl Complex {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        complex_from_json_str(text).map(Self::from).map_err(py_err)
    }

    #[staticmethod]
    fn from_off(text: &str) -> PyResult<Self> {
        complex_from_off_str(text).map(Self::from).map_err(py_err)
    }

    /// Read a `.json` or `.off` file.
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        load_complex(&path).map(Self::from).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (nx, ny, spacing = 1.0))]
    fn grid(nx: usize, ny: usize, spacing: f64) -> PyResult<Self> {
        grid_triangulation(nx, ny, spacing).map(Self::from).map_err(py_err)
    }

    #[staticmethod]
    fn disk_fan() -> PyResult<Self> {
        disk_fan().map(Self::from).map_err(py_err)
    }

    /// A closed surface from the built-in library with a planar spectral layout.
    #[staticmethod]
    #[pyo3(signature = (name, seed = 0))]
    fn library(name: &str, seed: u64) -> PyResult<Self> {
        let lib = library_triangulation(name).map_err(py_err)?;
        let spectral = spectral_embedding(&lib.complex, seed).map_err(py_err)?;
        EmbeddedComplex::new(lib.complex, spectral.embedding).map(Self::from).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        complex_to_json_string(&self.inner).map_err(py_err)
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        save_complex(&path, &self.inner, None).map_err(py_err)
    }

    #[pyo3(signature = (family, amplitude = 0.1, seed = 0))]
    fn deform(&self, family: &str, amplitude: f64, seed: u64) -> PyResult<Self> {
        let family = DeformationFamily::parse(family).map_err(py_err)?;
        apply_deformation(&self.inner, &DeformationSpec { family, amplitude, seed }).map(Self::from).map_err(py_err)
    }

    #[pyo3(signature = (delta, seed = 0))]
    fn perturb(&self, delta: f64, seed: u64) -> PyResult<Self> {
        perturb_embedding(&self.inner, delta, seed).map(Self::from).map_err(py_err)
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn counts(&self) -> Vec<usize> {
        self.inner.complex().counts()
    }

    #[getter]
    fn euler_characteristic(&self) -> i64 {
        euler_characteristic(self.inner.complex())
    }

    fn vertices(&self) -> Vec<(usize, Vec<f64>)> {
        self.inner.embedding().iter().map(|(v, p)| (v, p.to_vec())).collect()
    }

    fn simplices(&self) -> Vec<Vec<usize>> {
        self.inner.complex().simplices().map(|s| s.vertices().to_vec()).collect()
    }

    fn same_complex(&self, other: &Complex) -> bool {
        self.inner.complex() == other.inner.complex()
    }

    fn __len__(&self) -> usize {
        self.inner.complex().len()
    }

    fn __repr__(&self) -> String {
        format!("Complex(ambient_dim={}, counts={:?})", self.inner.ambient_dim(), self.inner.complex().counts())
    }
}

/// Per-round color histograms as `[{"round", "classes", "histogram": {color: count}}]`.
#[pyfunction]
#[pyo3(signature = (k, depth = 2, mode = "gswl", phi = "dimension_only", adjacency = "full", digits = None))]
fn refine(
    py: Python<'_>,
    k: &Complex,
    depth: usize,
    mode: &str,
    phi: &str,
    adjacency: &str,
    digits: Option<u32>,
) -> PyResult<Py<PyAny>> {
    let cfg = config(mode, depth, phi, adjacency, digits)?;
    let mut interner = ColorInterner::new();
    let c = core_refine(&k.inner, &cfg, &mut interner).map_err(py_err)?;
    let rounds = (0..=depth)
        .map(|l| {
            let h = c.histogram(l)?;
            let hist: serde_json::Map<String, Value> = h.iter().map(|(col, n)| (col.0.to_string(), json!(n))).collect();
            Ok(json!({ "round": l, "classes": h.len(), "histogram": hist }))
        })
        .collect::<Result<Vec<Value>, Error>>()
        .map_err(py_err)?;
    to_py(py, &Value::Array(rounds))
}

/// Round-by-round equivalence verdicts; the last entry is the verdict at `depth`.
#[pyfunction]
#[pyo3(signature = (a, b, depth = 2, mode = "gswl", phi = "dimension_only", adjacency = "full", digits = None))]
fn equivalence_rounds(
    a: &Complex,
    b: &Complex,
    depth: usize,
    mode: &str,
    phi: &str,
    adjacency: &str,
    digits: Option<u32>,
) -> PyResult<Vec<bool>> {
    let cfg = config(mode, depth, phi, adjacency, digits)?;
    let mut interner = ColorInterner::new();
    let ca = core_refine(&a.inner, &cfg, &mut interner).map_err(py_err)?;
    let cb = core_refine(&b.inner, &cfg, &mut interner).map_err(py_err)?;
    (0..=depth).map(|l| equivalent_at(&ca, &cb, l).map_err(py_err)).collect()
}

#[pyfunction]
#[pyo3(signature = (a, b, depth = 2, mode = "gswl", phi = "dimension_only", adjacency = "full", digits = None))]
fn equivalent(
    a: &Complex,
    b: &Complex,
    depth: usize,
    mode: &str,
    phi: &str,
    adjacency: &str,
    digits: Option<u32>,
) -> PyResult<bool> {
    Ok(*equivalence_rounds(a, b, depth, mode, phi, adjacency, digits)?.last().expect("depth + 1 rounds"))
}

/// Euler characteristics on a direction x threshold grid spanning the entry-time range.
#[pyfunction]
#[pyo3(signature = (k, directions = 8, thresholds = 10))]
fn sampled_ect(py: Python<'_>, k: &Complex, directions: usize, thresholds: usize) -> PyResult<Py<PyAny>> {
    let dirs = sphere_quadrature(k.inner.ambient_dim(), directions).map_err(py_err)?.directions();
    let (lo, hi) = entry_time_range(std::slice::from_ref(&k.inner), &dirs).unwrap_or((0.0, 0.0));
    let s = core_sampled_ect(&k.inner, &dirs, &linspace(lo, hi, thresholds)).map_err(py_err)?;
    to_py(
        py,
        &json!({
            "directions": dirs.iter().map(|d| d.vector()).collect::<Vec<_>>(),
            "thresholds": s.thresholds,
            "values": s.values,
        }),
    )
}

/// Quadrature ECT distance between two embeddings of the same complex.
#[pyfunction]
#[pyo3(signature = (a, b, quad = 64))]
fn ect_distance(a: &Complex, b: &Complex, quad: usize) -> PyResult<f64> {
    if a.inner.complex() != b.inner.complex() {
        return Err(py_err(Error::ComplexMismatch("inputs do not share an abstract complex".into())));
    }
    let q = sphere_quadrature(a.inner.ambient_dim(), quad).map_err(py_err)?;
    Ok(core_ect_distance(a.inner.complex(), a.inner.embedding(), b.inner.embedding(), &q).map_err(py_err)?.total)
}

/// Build a lookup-table model for `family` and return each member's readout.
///
/// `readout="ect"` also reports whether the readout equals the directly sampled ECT.
#[pyfunction]
#[pyo3(signature = (family, depth = 2, readout = "histogram", directions = 8, thresholds = 10, digits = None))]
fn realize(
    py: Python<'_>,
    family: Vec<Complex>,
    depth: usize,
    readout: &str,
    directions: usize,
    thresholds: usize,
    digits: Option<u32>,
) -> PyResult<Py<PyAny>> {
    let digits = digits_or_default(digits)?;
    let family: Vec<EmbeddedComplex> = family.into_iter().map(|c| c.inner).collect();
    if family.is_empty() {
        return Err(PyValueError::new_err("empty family"));
    }
    let mut interner = ColorInterner::new();
    let (realizer, grid) = match readout {
        "histogram" => {
            let cfg = RefinementConfig::gswl(depth).with_digits(digits);
            (construct_realizer(&family, depth, &cfg, &mut interner).map_err(py_err)?, None)
        }
        "ect" => {
            let dirs = sphere_quadrature(family[0].ambient_dim(), directions).map_err(py_err)?.directions();
            let (lo, hi) = entry_time_range(&family, &dirs).unwrap_or((0.0, 0.0));
            let ts = linspace(lo, hi, thresholds);
            let r = construct_ect_readout(&family, &dirs, &ts, depth, digits, &mut interner).map_err(py_err)?;
            (r, Some((dirs, ts)))
        }
        other => return Err(PyValueError::new_err(format!("unknown readout: {other}"))),
    };
    let members = family
        .iter()
        .map(|k| {
            let z = gswl_core::mpsn::readout(&realizer.model, &forward(&realizer.model, k)?, k)?;
            let mut entry = json!({ "readout": z });
            if let Some((dirs, ts)) = &grid {
                entry["matches_direct_ect"] = json!(integral(&z)? == core_sampled_ect(k, dirs, ts)?.flatten());
            }
            Ok(entry)
        })
        .collect::<Result<Vec<Value>, Error>>()
        .map_err(py_err)?;
    to_py(
        py,
        &json!({
            "hidden_dim": realizer.model.hidden_dim,
            "block": realizer.block,
            "colors_per_round": realizer.colors.iter().map(Vec::len).collect::<Vec<_>>(),
            "members": members,
        }),
    )
}

/// Random lookup-table models on a pair; counts readout disagreements.
#[pyfunction]
#[pyo3(signature = (a, b, depth = 2, trials = 50, seed = 0, mode = "gswl", digits = None))]
#[allow(clippy::too_many_arguments)]
fn upper_bound_check(
    py: Python<'_>,
    a: &Complex,
    b: &Complex,
    depth: usize,
    trials: usize,
    seed: u64,
    mode: &str,
    digits: Option<u32>,
) -> PyResult<Py<PyAny>> {
    let cfg = config(mode, depth, "dimension_only", "full", digits)?;
    let r = core_upper_bound_check(&a.inner, &b.inner, depth, trials, seed, &cfg).map_err(py_err)?;
    to_py(py, &serde_json::to_value(&r).map_err(|e| py_err(e.into()))?)
}

/// Run an experiment config given as JSON text. Tables go to `out` when set.
#[pyfunction]
#[pyo3(signature = (config_json, out = None))]
fn run_config(py: Python<'_>, config_json: &str, out: Option<std::path::PathBuf>) -> PyResult<Py<PyAny>> {
    let cfg = ExperimentConfig::from_json_str(config_json).map_err(py_err)?;
    let report = py.detach(|| run(&cfg)).map_err(py_err)?;
    if let Some(dir) = out {
        report_tables(&report, &dir).map_err(py_err)?;
    }
    to_py(py, &serde_json::to_value(&report).map_err(|e| py_err(e.into()))?)
}

#[pymodule]
pub fn gswl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Complex>()?;
    m.add_function(wrap_pyfunction!(refine, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence_rounds, m)?)?;
    m.add_function(wrap_pyfunction!(sampled_ect, m)?)?;
    m.add_function(wrap_pyfunction!(ect_distance, m)?)?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(upper_bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("LIBRARY_NAMES", LIBRARY_NAMES.to_vec())?;
    m.add("DEFAULT_QUANTIZATION_DIGITS", gswl_core::DEFAULT_QUANTIZATION_DIGITS)?;
    Ok(())
}
