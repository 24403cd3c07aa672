//! Python bindings for the sbp-sphere library.
//!
//! Exposes the 1-D staggered operator families, the cubed-sphere grid, and
//! the linearized shallow-water model. Matrices cross the boundary as plain
//! lists of rows so the module needs no Python-side dependencies.

use std::collections::HashMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sbp_sphere::error::Error;
use sbp_sphere::experiments::{self, TestCase};
use sbp_sphere::grid::{self, CubedSphereGrid};
use sbp_sphere::sbp1d::{self, InterfaceMethod1D, Operator1DSet, OperatorOrder};
use sbp_sphere::swe::{self, Model};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput { .. } => PyValueError::new_err(e.to_string()),
        Error::Numerical { .. } | Error::Io { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_order(order: &str) -> PyResult<OperatorOrder> {
    order.parse().map_err(to_py_err)
}

fn dense_rows(op: &sbp_sphere::banded::BandedOp) -> Vec<Vec<f64>> {
    let m = op.to_dense();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// One staggered operator family on [0, 1] with n cells and n+1 vertices.
#[pyclass(name = "OperatorSet1D")]
struct PyOperatorSet1D {
    inner: Operator1DSet,
}

#[pymethods]
impl PyOperatorSet1D {
    #[new]
    fn new(order: &str, n: usize) -> PyResult<Self> {
        let order = parse_order(order)?;
        let inner = sbp1d::build_operator_set(order, n, 1.0 / n as f64).map_err(to_py_err)?;
        Ok(PyOperatorSet1D { inner })
    }

    #[getter]
    fn order(&self) -> String {
        self.inner.order.to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx
    }

    /// Vertex coordinates (length n+1).
    fn vertices(&self) -> Vec<f64> {
        self.inner.xv()
    }

    /// Cell-center coordinates (length n).
    fn centers(&self) -> Vec<f64> {
        self.inner.xc()
    }

    /// Diagonal of the vertex norm H_v.
    fn hv(&self) -> Vec<f64> {
        self.inner.hv.clone()
    }

    /// Diagonal of the center norm H_c.
    fn hc(&self) -> Vec<f64> {
        self.inner.hc.clone()
    }

    /// Derivative centers → vertices as dense rows ((n+1)×n).
    fn dcv(&self) -> Vec<Vec<f64>> {
        dense_rows(&self.inner.dcv)
    }

    /// Derivative vertices → centers as dense rows (n×(n+1)).
    fn dvc(&self) -> Vec<Vec<f64>> {
        dense_rows(&self.inner.dvc)
    }

    /// Interpolation vertices → centers as dense rows (n×(n+1)).
    fn pvc(&self) -> Vec<Vec<f64>> {
        dense_rows(&self.inner.pvc)
    }

    /// Interpolation centers → vertices as dense rows ((n+1)×n).
    fn pcv(&self) -> Vec<Vec<f64>> {
        dense_rows(&self.inner.pcv)
    }

    /// Residual of H_v·D_cv + D_vcᵀ·H_c = boundary terms.
    fn sbp_identity_residual(&self) -> f64 {
        sbp1d::sbp_identity_residual(&self.inner)
    }

    /// Residual of H_c·P_vc = (H_v·P_cv)ᵀ.
    fn interp_duality_residual(&self) -> f64 {
        sbp1d::interp_duality_residual(&self.inner)
    }

    /// Highest exactly-reproduced monomial degree per operator.
    fn accuracy(&self) -> HashMap<String, usize> {
        let report = sbp1d::verify_accuracy_orders(&self.inner);
        let mut map = HashMap::new();
        map.insert("dcv_interior".to_string(), report.dcv.interior);
        map.insert("dcv_boundary".to_string(), report.dcv.boundary);
        map.insert("dvc_interior".to_string(), report.dvc.interior);
        map.insert("dvc_boundary".to_string(), report.dvc.boundary);
        map.insert("pvc_interior".to_string(), report.pvc.interior);
        map.insert("pvc_boundary".to_string(), report.pvc.boundary);
        map.insert("pcv_interior".to_string(), report.pcv.interior);
        map.insert("pcv_boundary".to_string(), report.pcv.boundary);
        map.insert("extrapolation".to_string(), report.extrapolation);
        map
    }
}

/// Eigenvalues of the interface-corrected 1-D second derivative on [0, 1],
/// scaled by dx² and sorted ascending. `method` is "sat" or "sat-proj".
#[pyfunction]
fn laplace_spectrum(order: &str, n: usize, method: &str) -> PyResult<Vec<f64>> {
    let order = parse_order(order)?;
    let method = match method {
        "sat" => InterfaceMethod1D::Sat,
        "sat-proj" => InterfaceMethod1D::SatProjection,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method {other:?} (expected sat or sat-proj)"
            )));
        }
    };
    let set = sbp1d::build_operator_set(order, n, 1.0 / n as f64).map_err(to_py_err)?;
    sbp1d::laplace_spectrum(&set, method).map_err(to_py_err)
}

/// The equiangular gnomonic cubed sphere with Nc cells per panel edge.
#[pyclass(name = "SphereGrid")]
struct PySphereGrid {
    inner: CubedSphereGrid,
}

#[pymethods]
impl PySphereGrid {
    #[new]
    #[pyo3(signature = (nc, radius=None))]
    fn new(nc: usize, radius: Option<f64>) -> PyResult<Self> {
        let a = radius.unwrap_or(grid::EARTH_RADIUS);
        let inner = grid::build_cubed_sphere(nc, a).map_err(to_py_err)?;
        Ok(PySphereGrid { inner })
    }

    #[getter]
    fn nc(&self) -> usize {
        self.inner.nc
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx
    }

    /// Cartesian coordinates of one point set: "h", "x1", "x2", or "zeta".
    fn points(&self, set: &str) -> PyResult<Vec<(f64, f64, f64)>> {
        let coords = match set {
            "h" => &self.inner.xh,
            "x1" => &self.inner.x1,
            "x2" => &self.inner.x2,
            "zeta" => &self.inner.xz,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown point set {other:?} (expected h, x1, x2, zeta)"
                )));
            }
        };
        Ok(coords.iter().map(|p| (p[0], p[1], p[2])).collect())
    }

    /// Area Jacobian at one point set, same order as `points`.
    fn jacobian(&self, set: &str) -> PyResult<Vec<f64>> {
        let j = match set {
            "h" => &self.inner.jh,
            "x1" => &self.inner.j1,
            "x2" => &self.inner.j2,
            "zeta" => &self.inner.jz,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown point set {other:?} (expected h, x1, x2, zeta)"
                )));
            }
        };
        Ok(j.clone())
    }
}

/// Diagnostics series and final depth field of one shallow-water run.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    mass: Vec<f64>,
    #[pyo3(get)]
    energy: Vec<f64>,
    #[pyo3(get)]
    tangential_jump: Vec<f64>,
    #[pyo3(get)]
    h_final: Vec<f64>,
}

/// Integrates a named test case (gauss1, gauss2, gauss3, solid, poor:NU)
/// and returns six-hourly diagnostics plus the final depth perturbation.
#[pyfunction]
fn run_case(case: &str, order: &str, nc: usize, days: f64) -> PyResult<PyRunResult> {
    let case: TestCase = case.parse().map_err(to_py_err)?;
    let order = parse_order(order)?;
    if !(days > 0.0) {
        return Err(PyValueError::new_err("days must be positive"));
    }
    let model = Model::new(case.model_config(order, nc)).map_err(to_py_err)?;
    let ic = experiments::initial_condition(case, &model.grid);
    let t_end = days * experiments::DAY_SECONDS;
    let every = ((experiments::SAMPLE_SECONDS / model.config.dt).round() as usize).max(1);
    let (finale, series) =
        swe::integrate_with_diagnostics(&model, ic, t_end, every).map_err(to_py_err)?;
    Ok(PyRunResult {
        times: series.iter().map(|s| s.t).collect(),
        mass: series.iter().map(|s| s.diagnostics.mass).collect(),
        energy: series.iter().map(|s| s.diagnostics.energy).collect(),
        tangential_jump: series.iter().map(|s| s.diagnostics.tangential_jump).collect(),
        h_final: finale.h.values,
    })
}

#[pymodule]
fn sbp_sphere_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperatorSet1D>()?;
    m.add_class::<PySphereGrid>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(laplace_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_case, m)?)?;
    m.add("EARTH_RADIUS", grid::EARTH_RADIUS)?;
    Ok(())
}
