//! Python bindings: `import sdc_py`.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use sdc_core::metrics::{score as score_labels, Scores};
use sdc_core::synthetic;
use sdc_core::{
    batch_density, brute_force_density, detect_mountains_auto, inject_mar, load_csv,
    normalize_min_max, AutoThresholds, CsvOptions, DecisionGraph, MissingDataset, PointSet,
    SdcOptions, SdcRun, Thresholds,
};

create_exception!(sdc_py, SdcError, PyValueError, "Invalid input or a failed clustering step.");

fn to_py(e: sdc_core::SdcError) -> PyErr {
    match e {
        sdc_core::SdcError::Io(io) => io.into(),
        other => SdcError::new_err(other.to_string()),
    }
}

fn point_set(points: &[Vec<f64>]) -> PyResult<PointSet> {
    let dim = points.first().map_or(0, Vec::len);
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(PyValueError::new_err("points must be a non-empty list of equal-length rows"));
    }
    Ok(PointSet::from_rows(points))
}

/// Ground-truth or predicted label: an int or a string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, FromPyObject)]
enum Label {
    Int(i64),
    Str(String),
}

/// A table of objects by dimensions where any cell may be `None`.
#[pyclass(name = "Dataset", module = "sdc_py", frozen)]
struct PyDataset {
    inner: MissingDataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (rows, labels = None))]
    fn new(rows: Vec<Vec<Option<f64>>>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let mut inner = MissingDataset::from_rows(rows).map_err(to_py)?;
        if let Some(labels) = labels {
            inner = inner.with_truth_labels(labels).map_err(to_py)?;
        }
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, missing_marker = String::new(), header = false, label_column = None))]
    fn from_csv(
        path: PathBuf,
        missing_marker: String,
        header: bool,
        label_column: Option<String>,
    ) -> PyResult<Self> {
        let opts = CsvOptions {
            missing_marker,
            has_header: header,
            label_column,
        };
        Ok(Self {
            inner: load_csv(path, &opts).map_err(to_py)?,
        })
    }

    /// Isotropic Gaussian blobs, labeled by blob index.
    #[staticmethod]
    #[pyo3(signature = (centers, sigma, per_blob, seed = 0))]
    fn gaussian_blobs(centers: Vec<Vec<f64>>, sigma: f64, per_blob: usize, seed: u64) -> PyResult<Self> {
        let dim = centers.first().map_or(0, Vec::len);
        if dim == 0 || centers.iter().any(|c| c.len() != dim) || per_blob == 0 {
            return Err(PyValueError::new_err("need equal-length centers and per_blob > 0"));
        }
        Ok(Self {
            inner: synthetic::gaussian_blobs(&centers, sigma, per_blob, seed),
        })
    }

    #[getter]
    fn object_count(&self) -> usize {
        self.inner.object_count()
    }

    #[getter]
    fn dim_count(&self) -> usize {
        self.inner.dim_count()
    }

    #[getter]
    fn missing_cell_count(&self) -> usize {
        self.inner.missing_cell_count()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<String>> {
        self.inner.truth_labels().map(<[String]>::to_vec)
    }

    fn row(&self, index: usize) -> PyResult<Vec<Option<f64>>> {
        if index >= self.inner.object_count() {
            return Err(PyIndexError::new_err(format!("object {index} out of range")));
        }
        Ok(self.inner.row(index).to_vec())
    }

    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.inner.rows().map(<[Option<f64>]>::to_vec).collect()
    }

    /// Copy with cells removed uniformly at random; every row keeps at
    /// least one value.
    #[pyo3(signature = (rate, seed = 0))]
    fn inject_mar(&self, rate: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: inject_mar(&self.inner, rate, seed).map_err(to_py)?,
        })
    }

    /// Copy with each dimension scaled to [0, 1] over its observed values.
    fn normalized(&self) -> Self {
        Self {
            inner: normalize_min_max(&self.inner),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.object_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(objects={}, dims={}, missing={})",
            self.inner.object_count(),
            self.inner.dim_count(),
            self.inner.missing_cell_count()
        )
    }
}

/// Value against density for one dimension, sorted by value.
#[pyclass(name = "DecisionGraph", module = "sdc_py", frozen)]
struct PyGraph {
    inner: DecisionGraph,
}

#[pymethods]
impl PyGraph {
    /// Zero-based dimension index.
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius
    }

    #[getter]
    fn shortcut(&self) -> bool {
        self.inner.shortcut
    }

    #[getter]
    fn object_ids(&self) -> Vec<usize> {
        self.inner.points.iter().map(|p| p.object_id).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values()
    }

    #[getter]
    fn densities(&self) -> Vec<usize> {
        self.inner.densities()
    }

    /// Boundaries the automatic mode would cut at.
    fn suggested_boundaries(&self) -> Vec<f64> {
        detect_mountains_auto(&self.inner).boundaries().to_vec()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("DecisionGraph(dim={}, points={})", self.inner.dim, self.inner.len())
    }
}

/// One clustering run, advanced one dimension at a time.
#[pyclass(name = "Run", module = "sdc_py")]
struct PyRun {
    inner: SdcRun,
}

#[pymethods]
impl PyRun {
    #[new]
    #[pyo3(signature = (dataset, normalize = true, enhance = true))]
    fn new(py: Python<'_>, dataset: &PyDataset, normalize: bool, enhance: bool) -> PyResult<Self> {
        let ds = &dataset.inner;
        let inner = py
            .detach(|| SdcRun::new(ds, SdcOptions { normalize, enhance }))
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim_count(&self) -> usize {
        self.inner.dim_count()
    }

    /// Zero-based dimension awaiting boundaries, `None` once finished.
    #[getter]
    fn pending_dim(&self) -> Option<usize> {
        self.inner.pending_dim()
    }

    #[getter]
    fn finished(&self) -> bool {
        self.inner.is_finished()
    }

    /// Fully observed objects moved by boundary contraction.
    #[getter]
    fn moved_count(&self) -> usize {
        self.inner.moved_count()
    }

    fn current_graph(&self) -> Option<PyGraph> {
        self.inner.current_graph().map(|g| PyGraph { inner: g.clone() })
    }

    fn graphs(&self) -> Vec<PyGraph> {
        self.inner
            .graphs()
            .iter()
            .map(|g| PyGraph { inner: g.clone() })
            .collect()
    }

    /// Cuts the pending dimension at `boundaries` and fuses it in.
    fn submit<'py>(&mut self, py: Python<'py>, boundaries: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let thresholds = Thresholds::new(boundaries).map_err(to_py)?;
        let s = self.inner.submit(thresholds).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("dim", s.dim)?;
        out.set_item("fusion_cluster_sizes", s.fusion_cluster_sizes)?;
        out.set_item("deferred", s.deferred)?;
        out.set_item("finished", s.finished)?;
        Ok(out)
    }

    /// Cuts every remaining dimension automatically.
    fn run_auto(&mut self, py: Python<'_>) -> PyResult<()> {
        let inner = &mut self.inner;
        py.detach(|| inner.run_to_end(&mut AutoThresholds)).map_err(to_py)
    }

    /// Cluster id per object once finished, else `None`.
    fn labels(&self) -> PyResult<Option<Vec<usize>>> {
        self.inner
            .result()
            .map(|p| p.dense_labels(self.inner.dataset().object_count()))
            .transpose()
            .map_err(to_py)
    }
}

/// Clusters `dataset` automatically; returns a cluster id per object.
#[pyfunction]
#[pyo3(signature = (dataset, normalize = true, enhance = true))]
fn cluster(py: Python<'_>, dataset: &PyDataset, normalize: bool, enhance: bool) -> PyResult<Vec<usize>> {
    let ds = &dataset.inner;
    py.detach(|| {
        let mut run = SdcRun::new(ds, SdcOptions { normalize, enhance })?;
        run.run_to_end(&mut AutoThresholds)?;
        run.into_result()?.partition.dense_labels(ds.object_count())
    })
    .map_err(to_py)
}

fn scores(pred: Vec<Label>, truth: Vec<Label>) -> PyResult<Scores> {
    score_labels(&pred, &truth).map_err(to_py)
}

/// `{"nmi", "ari", "purity"}` for predicted against true labels.
#[pyfunction]
fn score<'py>(py: Python<'py>, pred: Vec<Label>, truth: Vec<Label>) -> PyResult<Bound<'py, PyDict>> {
    let s = scores(pred, truth)?;
    let out = PyDict::new(py);
    out.set_item("nmi", s.nmi)?;
    out.set_item("ari", s.ari)?;
    out.set_item("purity", s.purity)?;
    Ok(out)
}

#[pyfunction]
fn purity(pred: Vec<Label>, truth: Vec<Label>) -> PyResult<f64> {
    Ok(scores(pred, truth)?.purity)
}

#[pyfunction]
fn ari(pred: Vec<Label>, truth: Vec<Label>) -> PyResult<f64> {
    Ok(scores(pred, truth)?.ari)
}

#[pyfunction]
fn nmi(pred: Vec<Label>, truth: Vec<Label>) -> PyResult<f64> {
    Ok(scores(pred, truth)?.nmi)
}

/// `(radius, counts)`: the automatic radius and, per point, how many
/// points lie within it (itself included).
#[pyfunction]
fn density(py: Python<'_>, points: Vec<Vec<f64>>) -> PyResult<(f64, Vec<usize>)> {
    let ps = point_set(&points)?;
    let profile = py.detach(|| batch_density(&ps)).map_err(to_py)?;
    Ok((profile.radius, profile.densities))
}

/// Pairwise reference for [`density`] at a given radius.
#[pyfunction]
fn density_brute_force(points: Vec<Vec<f64>>, radius: f64) -> PyResult<Vec<usize>> {
    Ok(brute_force_density(&point_set(&points)?, radius))
}

#[pymodule]
fn sdc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SdcError", m.py().get_type::<SdcError>())?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(ari, m)?)?;
    m.add_function(wrap_pyfunction!(nmi, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(density_brute_force, m)?)?;
    Ok(())
}
