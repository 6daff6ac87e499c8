//! Python bindings: the main types and operations of the library, exposed
//! as an extension module. Infinite exponents are plain `float('inf')`.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kfl_core::calculus;
use kfl_core::czd::{self, BallType, CzParams};
use kfl_core::error::Error;
use kfl_core::fields;
use kfl_core::io;
use kfl_core::kfunc;
use kfl_core::rearrange;
use kfl_core::space::{self, MeasureMode, PointField};
use kfl_core::verify::{self, Tolerances};
use kfl_core::weights::{self, WeightKind};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite metric measure space.
#[pyclass(name = "Space", frozen)]
struct PySpace {
    inner: space::Space,
}

#[pymethods]
impl PySpace {
    /// Build a 1-D or 2-D Euclidean grid. `extents` is a list of (lo, hi)
    /// pairs, one per axis; `measure` is "counting" or "cell".
    #[staticmethod]
    #[pyo3(signature = (dim, extents, spacing, measure="counting"))]
    fn grid(dim: usize, extents: Vec<(f64, f64)>, spacing: f64, measure: &str) -> PyResult<Self> {
        let mode = match measure {
            "counting" => MeasureMode::Counting,
            "cell" => MeasureMode::CellVolume,
            other => return Err(PyValueError::new_err(format!("unknown measure '{other}'"))),
        };
        Ok(PySpace {
            inner: space::build_grid(dim, &extents, spacing, mode).map_err(err)?,
        })
    }

    /// Ball of the Cayley graph of Z^2 with the word metric.
    #[staticmethod]
    fn cayley_z2(radius: u32) -> PyResult<Self> {
        Ok(PySpace {
            inner: space::build_cayley_z2(radius).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySpace {
            inner: io::space_from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        io::space_to_json(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn total_measure(&self) -> f64 {
        self.inner.total_measure()
    }

    fn measures(&self) -> Vec<f64> {
        self.inner.measures().to_vec()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        self.inner.distance(i, j)
    }

    /// Dyadic refinement (grid spaces only).
    fn refine(&self) -> PyResult<Self> {
        Ok(PySpace {
            inner: self.inner.refine().map_err(err)?,
        })
    }

    /// (constant, attaining center, attaining radius).
    #[pyo3(signature = (cap=None))]
    fn doubling_constant(&self, cap: Option<f64>) -> (f64, usize, f64) {
        let rep = space::doubling_constant(&self.inner, cap);
        (rep.constant, rep.center, rep.radius)
    }

    /// Distinct open balls as (center, radius, members) triples.
    #[pyo3(signature = (cap=None))]
    fn balls(&self, cap: Option<f64>) -> Vec<(usize, f64, Vec<usize>)> {
        space::enumerate_balls(&self.inner, cap)
            .into_iter()
            .map(|b| (b.center, b.radius, b.members))
            .collect()
    }
}

/// A nonnegative weight sampled on a space.
#[pyclass(name = "Weight", frozen)]
struct PyWeight {
    inner: weights::Weight,
}

#[pymethods]
impl PyWeight {
    #[staticmethod]
    fn explicit(values: Vec<f64>) -> PyResult<Self> {
        Ok(PyWeight {
            inner: weights::Weight::new(PointField::new(values)).map_err(err)?,
        })
    }

    /// `|x|^-alpha` with the half-spacing substitution at the singularity.
    #[staticmethod]
    fn power(space: &PySpace, alpha: f64) -> PyResult<Self> {
        Ok(PyWeight {
            inner: weights::make_weight(&WeightKind::Power { alpha }, &space.inner).map_err(err)?,
        })
    }

    /// Polynomial in `|x|`.
    #[staticmethod]
    fn polynomial(space: &PySpace, coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(PyWeight {
            inner: weights::make_weight(&WeightKind::Polynomial { coeffs }, &space.inner)
                .map_err(err)?,
        })
    }

    /// `(Mf)^(1/s)` for a field `f`.
    #[staticmethod]
    fn maximal(space: &PySpace, field: Vec<f64>, s: f64) -> PyResult<Self> {
        Ok(PyWeight {
            inner: weights::make_weight(&WeightKind::Maximal { field, s }, &space.inner)
                .map_err(err)?,
        })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }
}

/// A function together with its discrete gradient magnitude.
#[pyclass(name = "Function", frozen)]
struct PyFunction {
    inner: calculus::SobolevFunction,
}

#[pymethods]
impl PyFunction {
    /// Build from values; the gradient is computed by the space's operator.
    #[staticmethod]
    fn from_values(space: &PySpace, values: Vec<f64>) -> Self {
        PyFunction {
            inner: calculus::SobolevFunction::from_values(&space.inner, PointField::new(values)),
        }
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values.values().to_vec()
    }

    fn gradient(&self) -> Vec<f64> {
        self.inner.gradient.values().to_vec()
    }

    fn scale(&self, lam: f64) -> Self {
        PyFunction {
            inner: self.inner.scale(lam),
        }
    }
}

/// A Calderón-Zygmund decomposition (with its verification handle).
#[pyclass(name = "Decomposition", frozen)]
struct PyDecomposition {
    space: space::Space,
    weight: weights::Weight,
    inner: czd::CZDecomposition,
}

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn omega(&self) -> Vec<usize> {
        self.inner.omega.clone()
    }

    #[getter]
    fn omega_full(&self) -> bool {
        self.inner.omega_full
    }

    fn g_values(&self) -> Vec<f64> {
        self.inner.g.values.values().to_vec()
    }

    fn piece_count(&self) -> usize {
        self.inner.pieces.len()
    }

    /// (center, radius, type, members) of one Whitney ball.
    fn ball(&self, i: usize) -> PyResult<(usize, f64, u8, Vec<usize>)> {
        let p = self
            .inner
            .pieces
            .get(i)
            .ok_or_else(|| PyValueError::new_err("piece index out of range"))?;
        let ty = match p.ball_type {
            BallType::One => 1,
            BallType::Two => 2,
        };
        Ok((p.ball.center, p.ball.radius, ty, p.ball.members.clone()))
    }

    fn b_values(&self, i: usize) -> PyResult<Vec<f64>> {
        self.inner
            .pieces
            .get(i)
            .map(|p| p.b.values.values().to_vec())
            .ok_or_else(|| PyValueError::new_err("piece index out of range"))
    }

    /// Measured constants of the defining estimates, as a dict.
    fn verify(&self) -> HashMap<String, f64> {
        let v = czd::verify_cz(&self.space, &self.weight, &self.inner);
        let mut out = HashMap::new();
        out.insert("reconstruction_err".into(), v.reconstruction_err);
        out.insert("support_ok".into(), if v.support_ok { 1.0 } else { 0.0 });
        out.insert("partition_err".into(), v.partition_err);
        if let Some(c2) = v.c2 {
            out.insert("c2".into(), c2);
        }
        if let Some(ci) = v.c_inf {
            out.insert("c_inf".into(), ci);
        }
        out.insert("c3_s".into(), v.c3_s);
        out.insert("c3_r".into(), v.c3_r);
        out.insert("c4".into(), v.c4);
        out.insert("n_overlap".into(), v.n_overlap as f64);
        out.insert("pass".into(), if v.pass { 1.0 } else { 0.0 });
        out
    }

    fn to_json(&self) -> String {
        io::decomposition_to_json(&self.space, &self.weight, &self.inner)
    }
}

/// Discrete gradient magnitude of a value vector.
#[pyfunction]
fn gradient(space: &PySpace, values: Vec<f64>) -> Vec<f64> {
    calculus::gradient(&space.inner, &PointField::new(values)).into_values()
}

/// Weighted Sobolev norm; `p` may be `float('inf')`.
#[pyfunction]
#[pyo3(signature = (space, weight, function, p, homogeneous=false))]
fn sobolev_norm(
    space: &PySpace,
    weight: &PyWeight,
    function: &PyFunction,
    p: f64,
    homogeneous: bool,
) -> f64 {
    calculus::sobolev_norm(&space.inner, &weight.inner, &function.inner, p, homogeneous)
}

/// Pointwise functional `T_r f`.
#[pyfunction]
#[pyo3(signature = (space, weight, function, r, homogeneous=false))]
fn t_r(space: &PySpace, weight: &PyWeight, function: &PyFunction, r: f64, homogeneous: bool) -> Vec<f64> {
    calculus::t_r(&space.inner, &weight.inner, &function.inner, r, homogeneous).into_values()
}

/// Uncentered maximal function of a field.
#[pyfunction]
#[pyo3(signature = (space, values, cap=None))]
fn maximal(space: &PySpace, values: Vec<f64>, cap: Option<f64>) -> Vec<f64> {
    calculus::maximal(&space.inner, &PointField::new(values), cap).into_values()
}

/// Reverse-Hölder constant: (constant, attaining center, attaining radius).
#[pyfunction]
#[pyo3(signature = (space, weight, q, cap=None))]
fn rh_constant(space: &PySpace, weight: &PyWeight, q: f64, cap: Option<f64>) -> PyResult<(f64, usize, f64)> {
    let rep = weights::rh_constant(&space.inner, &weight.inner, q, cap).map_err(err)?;
    Ok((rep.constant, rep.center, rep.radius))
}

#[pyfunction]
#[pyo3(signature = (space, weight, cap=None))]
fn rh_infinity_constant(space: &PySpace, weight: &PyWeight, cap: Option<f64>) -> PyResult<(f64, usize, f64)> {
    let rep = weights::rh_infinity_constant(&space.inner, &weight.inner, cap).map_err(err)?;
    Ok((rep.constant, rep.center, rep.radius))
}

#[pyfunction]
#[pyo3(signature = (space, weight, p, cap=None))]
fn ap_constant(space: &PySpace, weight: &PyWeight, p: f64, cap: Option<f64>) -> PyResult<f64> {
    weights::ap_constant(&space.inner, &weight.inner, p, cap).map_err(err)
}

/// Check `w^r` lands in RH at exponent `1/r`: returns (constant, pass).
#[pyfunction]
#[pyo3(signature = (space, weight, r, cap=None))]
fn rh_power_law_check(space: &PySpace, weight: &PyWeight, r: f64, cap: Option<f64>) -> PyResult<(f64, bool)> {
    let rep = weights::rh_power_law_check(&space.inner, &weight.inner, r, cap).map_err(err)?;
    Ok((rep.rh.constant, rep.pass))
}

/// Decreasing rearrangement as (breakpoints, plateau values).
#[pyfunction]
fn decreasing_rearrangement(space: &PySpace, values: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let sf = rearrange::decreasing_rearrangement(&space.inner, &PointField::new(values));
    (sf.breaks().to_vec(), sf.plateau_values().to_vec())
}

/// Maximal rearrangement `f**(t)` of a step function.
#[pyfunction]
fn double_star(breaks: Vec<f64>, values: Vec<f64>, t: f64) -> PyResult<f64> {
    let sf = rearrange::StepFunction::from_pieces(breaks, values).map_err(err)?;
    rearrange::double_star(&sf, t).map_err(err)
}

/// Two-space L_p K-formula on a step function.
#[pyfunction]
fn holmstedt_k(breaks: Vec<f64>, values: Vec<f64>, p0: f64, p1: f64, t: f64) -> PyResult<f64> {
    let sf = rearrange::StepFunction::from_pieces(breaks, values).map_err(err)?;
    rearrange::holmstedt_k(&sf, p0, p1, t).map_err(err)
}

/// Closed-form Hardy inequality check: (lhs, rhs, pass).
#[pyfunction]
fn hardy_check(breaks: Vec<f64>, values: Vec<f64>, l: f64) -> PyResult<(f64, f64, bool)> {
    let sf = rearrange::StepFunction::from_pieces(breaks, values).map_err(err)?;
    let rep = rearrange::hardy_check(&sf, l).map_err(err)?;
    Ok((rep.lhs, rep.rhs, rep.pass))
}

/// Calderón-Zygmund decomposition at threshold `alpha`; `q` may be inf.
#[pyfunction]
#[pyo3(signature = (space, weight, function, alpha, r=1.0, s=1.0, p=1.5, q=2.0, homogeneous=false, cap=None))]
#[allow(clippy::too_many_arguments)]
fn cz_decompose(
    space: &PySpace,
    weight: &PyWeight,
    function: &PyFunction,
    alpha: f64,
    r: f64,
    s: f64,
    p: f64,
    q: f64,
    homogeneous: bool,
    cap: Option<f64>,
) -> PyResult<PyDecomposition> {
    let params = CzParams { r, s, p, q, homogeneous };
    let inner = czd::cz_decompose(&space.inner, &weight.inner, &function.inner, params, alpha, cap)
        .map_err(err)?;
    Ok(PyDecomposition {
        space: space.inner.clone(),
        weight: weight.inner.clone(),
        inner,
    })
}

/// Exact (or certified) K-functional for the Sobolev pair: (value, certified).
#[pyfunction]
#[pyo3(signature = (space, weight, function, t, r=1.0, q=2.0, homogeneous=false))]
fn k_exact(
    space: &PySpace,
    weight: &PyWeight,
    function: &PyFunction,
    t: f64,
    r: f64,
    q: f64,
    homogeneous: bool,
) -> PyResult<(f64, bool)> {
    let pair = kfunc::SpacePair::Sobolev { r, q, homogeneous };
    let est = kfunc::k_exact(&space.inner, &weight.inner, &function.inner, &pair, t).map_err(err)?;
    Ok((est.value, est.certified))
}

/// Exact K-functional for a Lebesgue pair (p1 may be inf).
#[pyfunction]
fn k_exact_lp(space: &PySpace, function: &PyFunction, t: f64, p0: f64, p1: f64) -> PyResult<(f64, bool)> {
    let n = space.inner.len();
    let unit = weights::Weight::new(PointField::constant(n, 1.0)).map_err(err)?;
    let pair = kfunc::SpacePair::Lebesgue { p0, p1 };
    let est = kfunc::k_exact(&space.inner, &unit, &function.inner, &pair, t).map_err(err)?;
    Ok((est.value, est.certified))
}

/// CZ-based upper bound: (split objective, theorem formula value).
#[pyfunction]
#[pyo3(signature = (space, weight, function, t, r=1.0, s=1.0, q=2.0, homogeneous=false, cap=None))]
#[allow(clippy::too_many_arguments)]
fn k_upper_via_cz(
    space: &PySpace,
    weight: &PyWeight,
    function: &PyFunction,
    t: f64,
    r: f64,
    s: f64,
    q: f64,
    homogeneous: bool,
    cap: Option<f64>,
) -> PyResult<(f64, f64)> {
    let up = kfunc::k_upper_via_cz(
        &space.inner,
        &weight.inner,
        &function.inner,
        r,
        s,
        q,
        t,
        cap,
        homogeneous,
    )
    .map_err(err)?;
    Ok((up.objective, up.theorem_rhs))
}

/// Theorem lower-bound formula (constants omitted).
#[pyfunction]
#[pyo3(signature = (space, weight, function, t, r=1.0, q=2.0, homogeneous=false))]
fn k_lower_bound(
    space: &PySpace,
    weight: &PyWeight,
    function: &PyFunction,
    t: f64,
    r: f64,
    q: f64,
    homogeneous: bool,
) -> PyResult<f64> {
    kfunc::k_lower_bound(&space.inner, &weight.inner, &function.inner, r, q, t, homogeneous)
        .map_err(err)
}

/// Two-sided q = infinity bounds at rearrangement argument t: (lower, upper).
#[pyfunction]
#[pyo3(signature = (space, weight, function, t, r=1.0, s=1.0, homogeneous=false))]
fn k_bounds_infty(
    space: &PySpace,
    weight: &PyWeight,
    function: &PyFunction,
    t: f64,
    r: f64,
    s: f64,
    homogeneous: bool,
) -> PyResult<(f64, f64)> {
    kfunc::k_bounds_infty(&space.inner, &weight.inner, &function.inner, r, s, t, homogeneous)
        .map_err(err)
}

/// Interpolation norm with the CZ-upper surrogate for K.
#[pyfunction]
#[pyo3(signature = (space, weight, function, r=1.0, s=1.0, q=2.0, p=1.5, homogeneous=false, cap=None))]
#[allow(clippy::too_many_arguments)]
fn interp_norm(
    space: &PySpace,
    weight: &PyWeight,
    function: &PyFunction,
    r: f64,
    s: f64,
    q: f64,
    p: f64,
    homogeneous: bool,
    cap: Option<f64>,
) -> PyResult<f64> {
    kfunc::interp_norm(
        &space.inner,
        &weight.inner,
        &function.inner,
        r,
        s,
        q,
        p,
        homogeneous,
        cap,
    )
    .map_err(err)
}

/// Interpolation parameter theta = q(p-r)/(p(q-r)).
#[pyfunction]
fn interpolation_theta(r: f64, p: f64, q: f64) -> f64 {
    kfunc::interpolation_theta(r, p, q)
}

/// Seeded low-pass random field.
#[pyfunction]
#[pyo3(signature = (space, seed, passes=3))]
fn low_pass_field(space: &PySpace, seed: u64, passes: usize) -> Vec<f64> {
    fields::low_pass_field(&space.inner, seed, passes).into_values()
}

/// Run a named verification suite; returns (id, pass, rendered line) rows.
#[pyfunction]
#[pyo3(signature = (name, tolerance=1.0))]
fn run_suite(name: &str, tolerance: f64) -> PyResult<Vec<(String, bool, String)>> {
    let reports = verify::suite(name, &Tolerances { scale: tolerance }).map_err(err)?;
    Ok(reports
        .into_iter()
        .map(|r| (r.id.clone(), r.pass, r.to_string()))
        .collect())
}

#[pymodule]
fn kfl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_class::<PyWeight>()?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_function(wrap_pyfunction!(gradient, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_norm, m)?)?;
    m.add_function(wrap_pyfunction!(t_r, m)?)?;
    m.add_function(wrap_pyfunction!(maximal, m)?)?;
    m.add_function(wrap_pyfunction!(rh_constant, m)?)?;
    m.add_function(wrap_pyfunction!(rh_infinity_constant, m)?)?;
    m.add_function(wrap_pyfunction!(ap_constant, m)?)?;
    m.add_function(wrap_pyfunction!(rh_power_law_check, m)?)?;
    m.add_function(wrap_pyfunction!(decreasing_rearrangement, m)?)?;
    m.add_function(wrap_pyfunction!(double_star, m)?)?;
    m.add_function(wrap_pyfunction!(holmstedt_k, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_check, m)?)?;
    m.add_function(wrap_pyfunction!(cz_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(k_exact, m)?)?;
    m.add_function(wrap_pyfunction!(k_exact_lp, m)?)?;
    m.add_function(wrap_pyfunction!(k_upper_via_cz, m)?)?;
    m.add_function(wrap_pyfunction!(k_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(k_bounds_infty, m)?)?;
    m.add_function(wrap_pyfunction!(interp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(interpolation_theta, m)?)?;
    m.add_function(wrap_pyfunction!(low_pass_field, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
