//! The stationarity domain of AR(p) coefficient vectors.
//!
//! A coefficient vector `φ` is stationary when every root of
//! `Q(z) = z^p - φ_1 z^{p-1} - ... - φ_p` lies strictly inside the unit
//! circle. Membership is decided by the Schur–Cohn step-down table; the
//! companion-matrix spectral radius is kept as an independent check. The
//! convex hull of the domain is a polytope whose `p + 1` vertices are the
//! polynomials with every root at `+1` or `-1`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Schur};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};

/// AR coefficients `(φ_1, ..., φ_p)`, `p ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct CoefVector(Vec<f64>);

impl CoefVector {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::ZeroOrder);
        }
        Ok(CoefVector(phi))
    }

    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p])
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoefVector(self.0.iter().map(|c| c * s).collect())
    }
}

/// Outcome of the stationarity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stationarity {
    Stationary,
    NotStationary,
    /// A coefficient was NaN or infinite.
    NonFinite,
}

/// Schur–Cohn test of whether all roots of `Q` have modulus `< 1 - tol`.
///
/// The roots of `Q(r z) / r^p` are the roots of `Q` divided by `r`, so the
/// margin is handled by rescaling the coefficients with `r = 1 - tol` and
/// running the plain unit-circle table. Each step peels off one reflection
/// coefficient; all of them must have magnitude below one.
pub fn stationarity(c: &CoefVector, tol: f64) -> Stationarity {
    if c.0.iter().any(|x| !x.is_finite()) || !tol.is_finite() {
        return Stationarity::NonFinite;
    }
    let r = 1.0 - tol.max(0.0);
    if r <= 0.0 {
        return Stationarity::NotStationary;
    }
    let p = c.order();
    let mut a = Vec::with_capacity(p + 1);
    a.push(1.0);
    let mut scale = 1.0;
    for &phi in &c.0 {
        scale /= r;
        a.push(-phi * scale);
    }
    let mut next = vec![0.0; p + 1];
    for i in (1..=p).rev() {
        let k = a[i];
        if !(k.abs() < 1.0) {
            return Stationarity::NotStationary;
        }
        let denom = 1.0 - k * k;
        for j in 0..i {
            next[j] = (a[j] - k * a[i - j]) / denom;
        }
        a[..i].copy_from_slice(&next[..i]);
    }
    Stationarity::Stationary
}

/// True iff every root of `Q` has modulus strictly below `1 - tol`.
pub fn is_stationary(c: &CoefVector, tol: f64) -> bool {
    stationarity(c, tol) == Stationarity::Stationary
}

/// Companion matrix of `Q`: first row `φ`, ones on the subdiagonal.
pub fn companion_matrix(c: &CoefVector) -> DMatrix<f64> {
    let p = c.order();
    DMatrix::from_fn(p, p, |i, j| {
        if i == 0 {
            c.0[j]
        } else if j + 1 == i {
            1.0
        } else {
            0.0
        }
    })
}

/// Largest root modulus of `Q`, from the eigenvalues of the companion matrix.
pub fn companion_spectral_radius(c: &CoefVector) -> Result<f64> {
    if c.order() == 1 {
        return Ok(c.0[0].abs());
    }
    let schur = Schur::try_new(companion_matrix(c), f64::EPSILON, 100_000)
        .ok_or(Error::EigenNoConvergence)?;
    let eig = schur.complex_eigenvalues();
    Ok(eig.iter().map(|z| libm::hypot(z.re, z.im)).fold(0.0, f64::max))
}

/// Vertices of the convex hull of the stationarity domain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityPolytope {
    pub p: usize,
    pub vertices: Vec<CoefVector>,
}

/// Integer coefficients `[1, c_1, ..., c_p]` of `(z - 1)^(p - j) (z + 1)^j`.
fn vertex_polynomial(p: usize, j: usize) -> Vec<i128> {
    let mut poly = vec![1i128];
    for k in 0..p {
        let root_sign: i128 = if k < p - j { -1 } else { 1 };
        let mut next = vec![0i128; poly.len() + 1];
        for (i, &a) in poly.iter().enumerate() {
            next[i] += a;
            next[i + 1] += a * root_sign;
        }
        poly = next;
    }
    poly
}

/// The `p + 1` hull vertices; vertex `j` has `j` roots at `-1` and the rest at `+1`.
pub fn hull_vertices(p: usize) -> Result<StabilityPolytope> {
    if p == 0 {
        return Err(Error::ZeroOrder);
    }
    if p > 120 {
        return Err(invalid("hull vertices are only tabulated for p <= 120"));
    }
    let vertices = (0..=p)
        .map(|j| {
            let poly = vertex_polynomial(p, j);
            CoefVector(poly[1..].iter().map(|&c| (-c) as f64).collect())
        })
        .collect();
    Ok(StabilityPolytope { p, vertices })
}

/// Radial shrinkage into the stationarity domain.
///
/// Stationary inputs are returned unchanged. Otherwise returns `s·c` with the
/// scalar `s ∈ [0, 1)` located by bisection (to `1e-10`) on the boundary of
/// `{s : s·c stationary at margin}`; the lower bisection end is always
/// stationary so the output is too. Non-finite input maps to the zero vector.
pub fn project_into_hull(c: &CoefVector, margin: f64) -> Result<CoefVector> {
    if !(0.0..1.0).contains(&margin) {
        return Err(invalid("projection margin must lie in [0, 1)"));
    }
    match stationarity(c, margin) {
        Stationarity::Stationary => return Ok(c.clone()),
        Stationarity::NonFinite => return CoefVector::zeros(c.order()),
        Stationarity::NotStationary => {}
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if is_stationary(&c.scaled(mid), margin) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(c.scaled(lo))
}
