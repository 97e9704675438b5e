//! Double-double mirrors of the 2×2 types.
//!
//! Per-cycle heat and work are differences of covariance traces that agree
//! to roughly `Γτ ~ 1e-8` relative, so the steady-state solve, the cycle
//! snapshots and the energy ledger are evaluated in ~32-digit arithmetic.
//! Channel matrices enter as exact `f64` values.

use twofloat::TwoFloat;

use crate::gaussian::{Covar2, GaussChannel, Mat2};

pub(crate) type Dd = TwoFloat;

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

pub(crate) fn to_f64(x: Dd) -> f64 {
    x.hi() + x.lo()
}

/// `a / b` to full double-double accuracy. The crate's `Dd / Dd` operator
/// only returns a correctly rounded `f64` quotient, so the quotient is built
/// by long division with exact remainders instead.
pub(crate) fn div(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r1 = a - b * q1;
    let q2 = r1.hi() / b.hi();
    let r2 = r1 - b * q2;
    let q3 = r2.hi() / b.hi();
    Dd::new_add(q1, q2) + q3
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DdMat2 {
    pub xx: Dd,
    pub xp: Dd,
    pub px: Dd,
    pub pp: Dd,
}

impl DdMat2 {
    pub fn from_f64(m: &Mat2) -> Self {
        Self { xx: dd(m.xx), xp: dd(m.xp), px: dd(m.px), pp: dd(m.pp) }
    }

    pub fn mul(&self, r: &DdMat2) -> DdMat2 {
        DdMat2 {
            xx: self.xx * r.xx + self.xp * r.px,
            xp: self.xx * r.xp + self.xp * r.pp,
            px: self.px * r.xx + self.pp * r.px,
            pp: self.px * r.xp + self.pp * r.pp,
        }
    }

    pub fn conjugate(&self, v: &DdCov) -> DdCov {
        let (a, b, c, d) = (self.xx, self.xp, self.px, self.pp);
        let two = dd(2.0);
        DdCov {
            xx: a * a * v.xx + two * a * b * v.xp + b * b * v.pp,
            xp: a * c * v.xx + (a * d + b * c) * v.xp + b * d * v.pp,
            pp: c * c * v.xx + two * c * d * v.xp + d * d * v.pp,
        }
    }

    pub fn to_f64(self) -> Mat2 {
        Mat2::new(to_f64(self.xx), to_f64(self.xp), to_f64(self.px), to_f64(self.pp))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DdCov {
    pub xx: Dd,
    pub xp: Dd,
    pub pp: Dd,
}

impl DdCov {
    pub fn from_f64(v: &Covar2) -> Self {
        Self { xx: dd(v.xx), xp: dd(v.xp), pp: dd(v.pp) }
    }

    pub fn add(&self, r: &DdCov) -> DdCov {
        DdCov { xx: self.xx + r.xx, xp: self.xp + r.xp, pp: self.pp + r.pp }
    }

    #[cfg(test)]
    pub fn sub(&self, r: &DdCov) -> DdCov {
        DdCov { xx: self.xx - r.xx, xp: self.xp - r.xp, pp: self.pp - r.pp }
    }

    pub fn trace(&self) -> Dd {
        self.xx + self.pp
    }

    pub fn det(&self) -> Dd {
        self.xx * self.pp - self.xp * self.xp
    }

    pub fn max_abs(&self) -> f64 {
        to_f64(self.xx).abs().max(to_f64(self.xp).abs()).max(to_f64(self.pp).abs())
    }

    pub fn to_f64(self) -> Covar2 {
        Covar2::new(to_f64(self.xx), to_f64(self.xp), to_f64(self.pp))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DdChannel {
    pub m: DdMat2,
    pub n: DdCov,
}

impl DdChannel {
    pub fn from_f64(ch: &GaussChannel) -> Self {
        Self { m: DdMat2::from_f64(&ch.m), n: DdCov::from_f64(&ch.n) }
    }

    pub fn apply(&self, v: &DdCov) -> DdCov {
        self.m.conjugate(v).add(&self.n)
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &DdChannel) -> DdChannel {
        DdChannel { m: self.m.mul(&inner.m), n: self.m.conjugate(&inner.n).add(&self.n) }
    }
}

/// Solves `V = M V Mᵀ + N` for symmetric `V` as the 3×3 system
/// `(I − T)(xx, xp, pp)ᵀ = (nxx, nxp, npp)ᵀ` by Gaussian elimination with
/// partial pivoting. Returns `None` if a pivot vanishes.
pub(crate) fn solve_stein(m: &DdMat2, n: &DdCov) -> Option<DdCov> {
    let (a, b, c, d) = (m.xx, m.xp, m.px, m.pp);
    let one = dd(1.0);
    let two = dd(2.0);
    let zero = dd(0.0);
    // rows of T acting on (xx, xp, pp)
    let t = [[a * a, two * a * b, b * b], [a * c, a * d + b * c, b * d], [c * c, two * c * d, d * d]];
    let mut sys = [[zero; 4]; 3];
    let rhs = [n.xx, n.xp, n.pp];
    for i in 0..3 {
        for j in 0..3 {
            sys[i][j] = if i == j { one - t[i][j] } else { -t[i][j] };
        }
        sys[i][3] = rhs[i];
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&r, &s| {
                let x = to_f64(sys[r][col]).abs();
                let y = to_f64(sys[s][col]).abs();
                x.total_cmp(&y)
            })
            .unwrap_or(col);
        if to_f64(sys[pivot][col]) == 0.0 {
            return None;
        }
        sys.swap(col, pivot);
        let pivot_row = sys[col];
        for row in sys.iter_mut().skip(col + 1) {
            let factor = div(row[col], pivot_row[col]);
            for (r, p) in row.iter_mut().zip(pivot_row.iter()).skip(col) {
                *r -= factor * *p;
            }
        }
    }
    let mut x = [zero; 3];
    for row in (0..3).rev() {
        let mut acc = sys[row][3];
        for k in (row + 1)..3 {
            acc -= sys[row][k] * x[k];
        }
        x[row] = div(acc, sys[row][row]);
    }
    Some(DdCov { xx: x[0], xp: x[1], pp: x[2] })
}
