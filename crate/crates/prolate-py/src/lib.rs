//! Python bindings: families, the commuting-operator solver and the
//! commutation oracles.

use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use prolate::darboux::{HermiteMatrixFamily, LaguerreDarboux, SolitonFamily};
use prolate::families::ClassicalTriple;
use prolate::kernels::{
    commutation_defect_continuous, commutation_defect_discrete_unchecked, spectral_check_pair, BandKernel,
    OracleConfig,
};
use prolate::solver::{
    darboux_commuting_order4, matrix_commuting_order2, perturbed_pair, solve_commuting, CommutingReport, Family,
};

create_exception!(prolate_py, ProlateError, PyException);

fn err(e: prolate::Error) -> PyErr {
    ProlateError::new_err(e.to_string())
}

type Matrix = Vec<Vec<f64>>;

fn rows(m: &DMatrix<f64>) -> Matrix {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// A bispectral family.
#[pyclass(name = "Family", module = "prolate_py", frozen)]
struct PyFamily {
    inner: Family,
}

#[pymethods]
impl PyFamily {
    #[staticmethod]
    #[pyo3(signature = (size = 1))]
    fn hermite(size: usize) -> PyResult<Self> {
        Ok(Family::Classical(ClassicalTriple::hermite(size).map_err(err)?).into())
    }

    #[staticmethod]
    #[pyo3(signature = (a, size = 1))]
    fn laguerre(a: f64, size: usize) -> PyResult<Self> {
        Ok(Family::Classical(ClassicalTriple::laguerre(a, size).map_err(err)?).into())
    }

    #[staticmethod]
    #[pyo3(signature = (a, b, size = 1))]
    fn jacobi(a: f64, b: f64, size: usize) -> PyResult<Self> {
        Ok(Family::Classical(ClassicalTriple::jacobi(a, b, size).map_err(err)?).into())
    }

    #[staticmethod]
    fn laguerre_darboux(a: f64, lam: f64) -> PyResult<Self> {
        Ok(Family::LaguerreDarboux(LaguerreDarboux::new(a, lam).map_err(err)?).into())
    }

    /// Matrix Hermite family for a symmetric `A` given as a list of rows.
    #[staticmethod]
    fn hermite_matrix(a: Matrix) -> PyResult<Self> {
        let r = a.len();
        if a.iter().any(|row| row.len() != r) {
            return Err(ProlateError::new_err("A must be a square list of rows"));
        }
        let flat: Vec<f64> = a.into_iter().flatten().collect();
        let m = DMatrix::from_row_slice(r, r, &flat);
        Ok(Family::HermiteMatrix(HermiteMatrixFamily::new(m).map_err(err)?).into())
    }

    #[staticmethod]
    fn soliton(nsol: usize) -> PyResult<Self> {
        Ok(Family::Soliton(SolitonFamily::new(nsol).map_err(err)?).into())
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    /// Matrix size N.
    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.inner.bispectral().support()
    }

    /// `Ψ(k, x)` as a list of rows.
    fn psi(&self, k: i64, x: f64) -> PyResult<Matrix> {
        Ok(rows(&self.inner.bispectral().psi(k, x).map_err(err)?))
    }

    /// `(k_lo, k_hi, x_lo, x_hi)` of the band window at `(n, t)`; `n` is `p` for solitons.
    fn window(&self, n: i64, t: f64) -> PyResult<(i64, i64, f64, f64)> {
        let w = self.inner.band(n, t).map_err(err)?;
        Ok((w.k_lo, w.k_hi, w.x_lo, w.x_hi))
    }

    /// Solve for the minimum-order commuting pair.
    fn solve(&self, n: i64, t: f64) -> PyResult<PyReport> {
        let rep = match &self.inner {
            Family::LaguerreDarboux(f) => darboux_commuting_order4(f, n, t),
            Family::HermiteMatrix(f) => matrix_commuting_order2(f, n, t),
            fam => solve_commuting(fam, n, t),
        }
        .map_err(err)?;
        Ok(PyReport { family: self.inner.clone(), inner: rep })
    }

    /// `K(x, y)` of the band window.
    fn kernel(&self, n: i64, t: f64, x: f64, y: f64) -> PyResult<Matrix> {
        let w = self.inner.band(n, t).map_err(err)?;
        let k = BandKernel::from_window(self.inner.bispectral(), &w).map_err(err)?;
        Ok(rows(&k.kernel_k(x, y).map_err(err)?))
    }

    /// The block matrix `J`; with `full` the interval is the whole support.
    #[pyo3(signature = (n, t, panels = 60, full = false))]
    fn j_matrix(&self, n: i64, t: f64, panels: usize, full: bool) -> PyResult<Matrix> {
        let fam = self.inner.bispectral();
        let w = self.inner.band(n, t).map_err(err)?;
        let k = if full { BandKernel::full(fam, w.k_lo, w.k_hi) } else { BandKernel::from_window(fam, &w) }
            .map_err(err)?;
        let q = k.quadrature(panels, 12).map_err(err)?;
        Ok(rows(&k.j_matrix(&q).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Family({})", self.inner.name())
    }
}

impl From<Family> for PyFamily {
    fn from(inner: Family) -> Self {
        PyFamily { inner }
    }
}

/// Result of `Family.solve`.
#[pyclass(name = "CommutingReport", module = "prolate_py", frozen)]
struct PyReport {
    family: Family,
    inner: CommutingReport,
}

impl PyReport {
    fn kernel(&self) -> PyResult<BandKernel<'_>> {
        BandKernel::from_window(self.family.bispectral(), &self.inner.window).map_err(err)
    }

    fn pair(&self, perturb: Option<f64>) -> PyResult<prolate::families::FourierPair> {
        match perturb {
            Some(rel) => perturbed_pair(&self.family, &self.inner, rel).map_err(err),
            None => Ok(self.inner.pair.clone()),
        }
    }
}

#[pymethods]
impl PyReport {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order
    }

    #[getter]
    fn null_dim(&self) -> usize {
        self.inner.null_dim
    }

    #[getter]
    fn constant_dim(&self) -> usize {
        self.inner.constant_dim
    }

    #[getter]
    fn min_order_dim(&self) -> usize {
        self.inner.min_order_dim
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients.clone()
    }

    #[getter]
    fn residuals(&self) -> Vec<(String, f64)> {
        self.inner.residuals.clone()
    }

    #[getter]
    fn verification(&self) -> Vec<(String, f64)> {
        self.inner.verification.clone()
    }

    #[getter]
    fn window(&self) -> (i64, i64, f64, f64) {
        let w = &self.inner.window;
        (w.k_lo, w.k_hi, w.x_lo, w.x_hi)
    }

    fn max_residual(&self) -> f64 {
        self.inner.max_residual()
    }

    fn coefficient(&self, label: &str) -> Option<f64> {
        self.inner.coefficient(label)
    }

    /// `[B_0(x), …, B_m(x)]` of the differential side.
    fn diff_coefficients(&self, x: f64) -> PyResult<Vec<Matrix>> {
        let c = self.inner.pair.diff.coeff_values(x).map_err(err)?;
        Ok(c.iter().map(rows).collect())
    }

    /// `A_j(k)` of the shift side.
    fn shift_coefficient(&self, j: i64, k: i64) -> PyResult<Matrix> {
        Ok(rows(&self.inner.pair.shift.coeff(j, k).map_err(err)?))
    }

    /// Relative commutation defects `{"continuous", "discrete"}` of the solved
    /// pair, or of the perturbed control when `perturb` is given.
    #[pyo3(signature = (perturb = None, seed = 20240917, panels = 40))]
    fn commutation_defects<'py>(
        &self,
        py: Python<'py>,
        perturb: Option<f64>,
        seed: u64,
        panels: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let k = self.kernel()?;
        let pair = self.pair(perturb)?;
        let cfg = OracleConfig { seed, panels, ..OracleConfig::default() };
        let c = commutation_defect_continuous(&k, &pair.diff, &cfg).map_err(err)?;
        let q = k.quadrature(60, 12).map_err(err)?;
        let d = commutation_defect_discrete_unchecked(&k, &pair.shift, &q).map_err(err)?;
        let leaks = k.boundary_leaks(&pair.shift, 1e-9).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("continuous", c.relative)?;
        out.set_item("discrete", d.relative)?;
        out.set_item("boundary_leaks", leaks)?;
        Ok(out)
    }

    /// Nyström eigenvalues, relative gaps and eigen-residuals of the solved operator.
    #[pyo3(signature = (count = 5, panels = 40))]
    fn spectral_check<'py>(&self, py: Python<'py>, count: usize, panels: usize) -> PyResult<Bound<'py, PyDict>> {
        let k = self.kernel()?;
        let q = k.quadrature(panels, 12).map_err(err)?;
        let sc = spectral_check_pair(&k, &self.inner.pair, &q, count).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("eigenvalues", sc.eigenvalues)?;
        out.set_item("gaps", sc.gaps)?;
        out.set_item("residuals", sc.residuals)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "CommutingReport(family={}, n={}, t={}, order={})",
            self.inner.family, self.inner.n, self.inner.t, self.inner.order
        )
    }
}

#[pymodule]
pub fn prolate_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFamily>()?;
    m.add_class::<PyReport>()?;
    m.add("ProlateError", m.py().get_type::<ProlateError>())?;
    Ok(())
}
