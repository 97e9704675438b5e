//! Single-mode Gaussian algebra: 2×2 real matrices, symmetric covariance
//! matrices and affine Gaussian channels `V -> M V Mᵀ + N`.
//!
//! Quadratures are ordered `(X, P)` with `[X, P] = 2i`, so the vacuum has
//! identity covariance and a thermal state of occupancy `n` has `(2n+1)·I`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative tolerance used by physicality checks.
pub const TOL_PHYS: f64 = 1e-9;

/// Real 2×2 matrix, row-major in the `(X, P)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub xx: f64,
    pub xp: f64,
    pub px: f64,
    pub pp: f64,
}

impl Mat2 {
    pub const fn new(xx: f64, xp: f64, px: f64, pp: f64) -> Self {
        Self { xx, xp, px, pp }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn diag(x: f64, p: f64) -> Self {
        Self::new(x, 0.0, 0.0, p)
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.xx, self.px, self.xp, self.pp)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.pp - self.xp * self.px
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.pp
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.xx * s, self.xp * s, self.px * s, self.pp * s)
    }

    /// Inverse, or `None` when the matrix is singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Self::new(self.pp / det, -self.xp / det, -self.px / det, self.xx / det))
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xp.is_finite() && self.px.is_finite() && self.pp.is_finite()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xp.abs()).max(self.px.abs()).max(self.pp.abs())
    }

    /// Largest modulus among the eigenvalues.
    pub fn spectral_radius(&self) -> f64 {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            det.abs().sqrt()
        } else {
            (tr.abs() + disc.sqrt()) / 2.0
        }
    }

    /// `M V Mᵀ` evaluated directly on the three stored entries of `V`.
    pub fn conjugate(&self, v: &Covar2) -> Covar2 {
        let (a, b, c, d) = (self.xx, self.xp, self.px, self.pp);
        Covar2 {
            xx: a * a * v.xx + 2.0 * a * b * v.xp + b * b * v.pp,
            xp: a * c * v.xx + (a * d + b * c) * v.xp + b * d * v.pp,
            pp: c * c * v.xx + 2.0 * c * d * v.xp + d * d * v.pp,
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.xx * r.xx + self.xp * r.px,
            self.xx * r.xp + self.xp * r.pp,
            self.px * r.xx + self.pp * r.px,
            self.px * r.xp + self.pp * r.pp,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.xx + r.xx, self.xp + r.xp, self.px + r.px, self.pp + r.pp)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.xx - r.xx, self.xp - r.xp, self.px - r.px, self.pp - r.pp)
    }
}

/// Symmetric 2×2 covariance matrix of the quadratures.
///
/// Only the three independent entries are stored, so symmetry holds by
/// construction. `xp` is the symmetrized cross-correlation
/// `½⟨δXδP + δPδX⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covar2 {
    pub xx: f64,
    pub xp: f64,
    pub pp: f64,
}

impl Covar2 {
    pub const fn new(xx: f64, xp: f64, pp: f64) -> Self {
        Self { xx, xp, pp }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// Vacuum covariance.
    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub const fn diag(xx: f64, pp: f64) -> Self {
        Self::new(xx, 0.0, pp)
    }

    /// `s·I`.
    pub const fn isotropic(s: f64) -> Self {
        Self::new(s, 0.0, s)
    }

    /// Thermal state `(2n+1)·I` of occupancy `n`.
    pub fn thermal(occupancy: f64) -> Self {
        Self::isotropic(2.0 * occupancy + 1.0)
    }

    pub fn det(&self) -> f64 {
        self.xx * self.pp - self.xp * self.xp
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.pp
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.xx * s, self.xp * s, self.pp * s)
    }

    pub fn as_mat(&self) -> Mat2 {
        Mat2::new(self.xx, self.xp, self.xp, self.pp)
    }

    /// Infinity norm (max row sum) of the full symmetric matrix.
    pub fn norm_inf(&self) -> f64 {
        (self.xx.abs() + self.xp.abs()).max(self.xp.abs() + self.pp.abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xp.abs()).max(self.pp.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xp.is_finite() && self.pp.is_finite()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.xx > 0.0 && self.pp > 0.0 && self.det() > 0.0
    }

    /// Positive semidefinite, with a relative tolerance for rounding.
    pub fn is_positive_semidefinite(&self) -> bool {
        let scale = self.max_abs();
        let tol = 1e-12 * scale;
        self.xx >= -tol && self.pp >= -tol && self.det() >= -tol * scale
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.pp);
        let half_diff = 0.5 * (self.xx - self.pp);
        let r = half_diff.hypot(self.xp);
        (mean - r, mean + r)
    }
}

impl Add for Covar2 {
    type Output = Covar2;

    fn add(self, r: Covar2) -> Covar2 {
        Covar2::new(self.xx + r.xx, self.xp + r.xp, self.pp + r.pp)
    }
}

impl Sub for Covar2 {
    type Output = Covar2;

    fn sub(self, r: Covar2) -> Covar2 {
        Covar2::new(self.xx - r.xx, self.xp - r.xp, self.pp - r.pp)
    }
}

impl Neg for Covar2 {
    type Output = Covar2;

    fn neg(self) -> Covar2 {
        Covar2::new(-self.xx, -self.xp, -self.pp)
    }
}

/// Affine Gaussian channel acting on covariances as `V -> M V Mᵀ + N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussChannel {
    pub m: Mat2,
    pub n: Covar2,
}

impl GaussChannel {
    pub const fn new(m: Mat2, n: Covar2) -> Self {
        Self { m, n }
    }

    pub const fn identity() -> Self {
        Self::new(Mat2::identity(), Covar2::zero())
    }

    /// Noiseless channel with homogeneous part `m`.
    pub const fn unitary(m: Mat2) -> Self {
        Self::new(m, Covar2::zero())
    }

    pub fn apply(&self, v: &Covar2) -> Covar2 {
        apply(self, v)
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn after(&self, inner: &GaussChannel) -> GaussChannel {
        compose(self, inner)
    }
}

/// `M V Mᵀ + N`.
pub fn apply(ch: &GaussChannel, v: &Covar2) -> Covar2 {
    ch.m.conjugate(v) + ch.n
}

/// Channel equivalent to applying `inner` and then `outer`.
pub fn compose(outer: &GaussChannel, inner: &GaussChannel) -> GaussChannel {
    GaussChannel { m: outer.m * inner.m, n: outer.m.conjugate(&inner.n) + outer.n }
}

/// Phase-space rotation `[[cos θ, sin θ], [−sin θ, cos θ]]`.
///
/// This is the undamped free-evolution map for a time `θ/ω`.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(c, s, -s, c)
}

/// Unitary squeezer `X -> X/μ`, `P -> μP`.
pub fn squeeze_map(mu: f64) -> Result<Mat2> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid("mu", format!("squeezing strength must be positive and finite, got {mu}")));
    }
    Ok(Mat2::diag(1.0 / mu, mu))
}

/// Positive definite and above the Heisenberg bound `det V ≥ 1`, up to
/// [`TOL_PHYS`].
pub fn is_physical_state(v: &Covar2) -> bool {
    v.is_finite() && v.is_positive_definite() && v.det() >= 1.0 - TOL_PHYS
}
