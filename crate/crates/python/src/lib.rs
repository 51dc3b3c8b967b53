//! Python bindings: lattices, Majorana polynomials and the certification runs.
//!
//! Run outputs are returned as JSON strings with the same schema the CLI writes.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;
use vortexcert::clifford::{MajoranaIndex, Polynomial};
use vortexcert::fock::to_matrix;
use vortexcert::lattice::{build_lattice, Boundary, IslandLattice};
use vortexcert::model::{build_hamiltonian, vortex_operator};
use vortexcert::pipeline::{self, LatticeSpec, RunParams, Tolerances};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string_pretty(v).map_err(err)
}

fn spec(lx: usize, ly: usize, boundary: &str) -> PyResult<LatticeSpec> {
    Ok(LatticeSpec::new(lx, ly, boundary.parse::<Boundary>().map_err(err)?))
}

/// Island lattice on an `lx` x `ly` grid.
#[pyclass(name = "Lattice", frozen)]
struct PyLattice {
    inner: IslandLattice,
}

#[pymethods]
impl PyLattice {
    #[new]
    #[pyo3(signature = (lx, ly, boundary = "open"))]
    fn new(lx: usize, ly: usize, boundary: &str) -> PyResult<Self> {
        let inner = build_lattice(lx, ly, boundary.parse().map_err(err)?).map_err(err)?;
        Ok(PyLattice { inner })
    }

    #[getter]
    fn lx(&self) -> usize {
        self.inner.lx()
    }

    #[getter]
    fn ly(&self) -> usize {
        self.inner.ly()
    }

    #[getter]
    fn boundary(&self) -> String {
        self.inner.boundary().to_string()
    }

    #[getter]
    fn num_majoranas(&self) -> usize {
        self.inner.num_majoranas()
    }

    #[getter]
    fn num_modes(&self) -> usize {
        self.inner.num_modes()
    }

    #[getter]
    fn num_octagons(&self) -> usize {
        self.inner.octagons().len()
    }

    fn islands(&self) -> Vec<(i64, i64)> {
        self.inner.islands().to_vec()
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    fn export_json(&self) -> PyResult<String> {
        to_json(&self.inner.export())
    }

    #[pyo3(name = "hamiltonian", signature = (lam))]
    fn hamiltonian(&self, lam: f64) -> PyPolynomial {
        PyPolynomial {
            inner: build_hamiltonian(&self.inner, Complex64::new(lam, 0.0)),
        }
    }

    /// Loop operator `W(C)` of octagon `index`.
    fn vortex_loop(&self, index: usize) -> PyResult<PyPolynomial> {
        let o = self
            .inner
            .octagons()
            .get(index)
            .ok_or_else(|| err(format!("octagon {index} out of range")))?;
        let v = vortex_operator::<Complex64>(&self.inner, o, None).map_err(err)?;
        Ok(PyPolynomial { inner: v.w })
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice({}x{} {}, {} islands, {} octagons)",
            self.inner.lx(),
            self.inner.ly(),
            self.inner.boundary(),
            self.inner.islands().len(),
            self.inner.octagons().len()
        )
    }
}

/// Complex linear combination of canonical Majorana monomials.
#[pyclass(name = "Polynomial", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPolynomial {
    inner: Polynomial,
}

#[pymethods]
impl PyPolynomial {
    #[staticmethod]
    fn generator(i: u32) -> Self {
        PyPolynomial {
            inner: Polynomial::generator(i),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (indices, coefficient = Complex64::new(1.0, 0.0)))]
    fn monomial(indices: Vec<u32>, coefficient: Complex64) -> Self {
        let ix: Vec<MajoranaIndex> = indices.into_iter().map(MajoranaIndex).collect();
        PyPolynomial {
            inner: Polynomial::monomial(&ix, coefficient),
        }
    }

    #[staticmethod]
    fn identity() -> Self {
        PyPolynomial {
            inner: Polynomial::identity(),
        }
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn terms(&self) -> Vec<(Vec<u32>, Complex64)> {
        self.inner
            .monomials()
            .map(|m| (m.indices.iter().map(|i| i.0).collect(), m.coefficient))
            .collect()
    }

    fn adjoint(&self) -> Self {
        PyPolynomial {
            inner: self.inner.adjoint(),
        }
    }

    #[pyo3(signature = (tol = 0.0))]
    fn is_zero(&self, tol: f64) -> bool {
        self.inner.is_zero_within(tol)
    }

    /// Dense Jordan-Wigner matrix on `modes` fermion modes, as nested lists.
    fn to_matrix(&self, modes: usize) -> PyResult<Vec<Vec<Complex64>>> {
        let m = to_matrix(&self.inner, modes).map_err(err)?.to_dense().map_err(err)?;
        Ok(m.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    fn __mul__(&self, other: &PyPolynomial) -> Self {
        PyPolynomial {
            inner: &self.inner * &other.inner,
        }
    }

    fn __add__(&self, other: &PyPolynomial) -> Self {
        PyPolynomial {
            inner: &self.inner + &other.inner,
        }
    }

    fn __sub__(&self, other: &PyPolynomial) -> Self {
        PyPolynomial {
            inner: &self.inner - &other.inner,
        }
    }

    fn __eq__(&self, other: &PyPolynomial) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        self.inner.render()
    }
}

/// Runs every check and returns the bundle as JSON.
#[pyfunction]
#[pyo3(signature = (lx, ly, boundary = "open", lam = 0.1, beta = 1.0, seed = 0, samples = 100, max_degree = 4))]
#[allow(clippy::too_many_arguments)]
fn certify(
    py: Python<'_>,
    lx: usize,
    ly: usize,
    boundary: &str,
    lam: f64,
    beta: f64,
    seed: u64,
    samples: usize,
    max_degree: usize,
) -> PyResult<String> {
    let mut p = RunParams::new(spec(lx, ly, boundary)?, lam, beta);
    p.seed = seed;
    p.samples = samples;
    p.max_degree = max_degree;
    let (bundle, _) = py.detach(|| pipeline::certify(&p, None)).map_err(err)?;
    to_json(&bundle)
}

/// Ground energy, degeneracy and low-lying levels as JSON.
#[pyfunction]
#[pyo3(signature = (lx, ly, boundary = "open", lam = 0.1, seed = 0))]
fn spectrum(py: Python<'_>, lx: usize, ly: usize, boundary: &str, lam: f64, seed: u64) -> PyResult<String> {
    let s = spec(lx, ly, boundary)?;
    let out = py
        .detach(|| pipeline::spectrum(&s, lam, seed, None, None))
        .map_err(err)?;
    to_json(&out)
}

/// Per-octagon vortex classification as JSON.
#[pyfunction]
#[pyo3(signature = (lx, ly, boundary = "open", lam = 0.1, seed = 0, tol = 1e-8))]
fn vortex_map(py: Python<'_>, lx: usize, ly: usize, boundary: &str, lam: f64, seed: u64, tol: f64) -> PyResult<String> {
    let s = spec(lx, ly, boundary)?;
    let tolerances = Tolerances {
        topo: tol,
        ..Default::default()
    };
    let out = py
        .detach(|| pipeline::vortex_map_run(&s, lam, seed, &tolerances, None))
        .map_err(err)?;
    to_json(&out)
}

#[pymodule]
#[pyo3(name = "vortexcert")]
fn vortexcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", vortexcert::verify::VERSION)?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyPolynomial>()?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(vortex_map, m)?)?;
    Ok(())
}
