//! Radial scalar kernels and their Cartesian derivative bundles.
//!
//! Every kernel family in this module tree reduces to scalar fields of two
//! shapes: radial functions of `r = |y - x|`, and axially structured fields
//! depending on `s = |y_perp - x_perp|^2` and the vertical offsets. Both are
//! turned into value / gradient / Hessian / third-derivative bundles with
//! respect to `y` here, so the block assembly can stay shape-agnostic.

use std::f64::consts::PI;

/// Scalar field with derivatives in `y` up to third order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScalarBundle {
    pub value: f64,
    /// `grad[m] = d/dy_m`
    pub grad: [f64; 3],
    /// `hess[i][j] = d^2/dy_i dy_j`, symmetric
    pub hess: [[f64; 3]; 3],
    /// `third[i][j][m] = d^3/dy_i dy_j dy_m`, fully symmetric
    pub third: [[[f64; 3]; 3]; 3],
}

impl ScalarBundle {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            grad: [0.0; 3],
            hess: [[0.0; 3]; 3],
            third: [[[0.0; 3]; 3]; 3],
        }
    }

    pub fn add(&mut self, other: &ScalarBundle) {
        self.value += other.value;
        for i in 0..3 {
            self.grad[i] += other.grad[i];
            for j in 0..3 {
                self.hess[i][j] += other.hess[i][j];
                for m in 0..3 {
                    self.third[i][j][m] += other.third[i][j][m];
                }
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.value *= c;
        for i in 0..3 {
            self.grad[i] *= c;
            for j in 0..3 {
                self.hess[i][j] *= c;
                for m in 0..3 {
                    self.third[i][j][m] *= c;
                }
            }
        }
    }
}

/// `cos(kr)/(4 pi r)` and its first three radial derivatives.
pub(crate) fn oscillatory_chain(k: f64, r: f64) -> [f64; 4] {
    let (s, c) = (k * r).sin_cos();
    let kr = k * r;
    [
        c / (4.0 * PI * r),
        (-kr * s - c) / (4.0 * PI * r * r),
        (-kr * kr * c + 2.0 * kr * s + 2.0 * c) / (4.0 * PI * r.powi(3)),
        (kr.powi(3) * s + 3.0 * kr * kr * c - 6.0 * kr * s - 6.0 * c) / (4.0 * PI * r.powi(4)),
    ]
}

/// `exp(-kr)/(4 pi r)` and its first three radial derivatives.
pub(crate) fn yukawa_chain(k: f64, r: f64) -> [f64; 4] {
    let e = (-k * r).exp();
    let kr = k * r;
    [
        e / (4.0 * PI * r),
        -(kr + 1.0) * e / (4.0 * PI * r * r),
        (kr * kr + 2.0 * kr + 2.0) * e / (4.0 * PI * r.powi(3)),
        -(kr.powi(3) + 3.0 * kr * kr + 6.0 * kr + 6.0) * e / (4.0 * PI * r.powi(4)),
    ]
}

/// Cartesian bundle of a radial function from its `d/dr` chain at offset
/// `d = y - x`.
pub(crate) fn radial_bundle(chain: [f64; 4], d: [f64; 3], r: f64) -> ScalarBundle {
    let [_, dp, ddp, dddp] = chain;
    let er = [d[0] / r, d[1] / r, d[2] / r];
    let mut out = ScalarBundle::zero();
    out.value = chain[0];
    let aa = dddp - 3.0 * ddp / r + 3.0 * dp / (r * r);
    let bb = ddp / r - dp / (r * r);
    for i in 0..3 {
        out.grad[i] = dp * er[i];
        for j in 0..3 {
            let eij = er[i] * er[j];
            let dij = if i == j { 1.0 } else { 0.0 };
            out.hess[i][j] = ddp * eij + dp * (dij - eij) / r;
            for m in 0..3 {
                let djm = if j == m { 1.0 } else { 0.0 };
                let dim = if i == m { 1.0 } else { 0.0 };
                out.third[i][j][m] = aa * eij * er[m]
                    + bb * (er[i] * djm + er[j] * dim + er[m] * dij);
            }
        }
    }
    out
}

/// The ten scalar integrals `I_{a b}` of an axially structured field, where
/// `a` counts `s`-derivatives (`s = |y_perp - x_perp|^2`) and `b` counts
/// vertical `y_3`-derivatives, for `a + b <= 3`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct AxialSums {
    pub i00: f64,
    pub i10: f64,
    pub i01: f64,
    pub i20: f64,
    pub i11: f64,
    pub i02: f64,
    pub i30: f64,
    pub i21: f64,
    pub i12: f64,
    pub i03: f64,
}

impl AxialSums {
    /// Accumulate one quadrature node: `qs[a]` are the `s`-derivatives of
    /// the horizontal factor, `v[b]` the `y_3`-derivatives of the vertical
    /// factor, `w` the node weight including any prefactor.
    pub fn accumulate(&mut self, qs: &[f64; 4], v: &[f64; 4], w: f64) {
        self.i00 += w * qs[0] * v[0];
        self.i10 += w * qs[1] * v[0];
        self.i01 += w * qs[0] * v[1];
        self.i20 += w * qs[2] * v[0];
        self.i11 += w * qs[1] * v[1];
        self.i02 += w * qs[0] * v[2];
        self.i30 += w * qs[3] * v[0];
        self.i21 += w * qs[2] * v[1];
        self.i12 += w * qs[1] * v[2];
        self.i03 += w * qs[0] * v[3];
    }
}

/// Cartesian bundle of an axial field from its `(s, y_3)`-derivative sums at
/// perpendicular offset `b2 = y_perp - x_perp`.
pub(crate) fn axial_bundle(sums: &AxialSums, b2: [f64; 2]) -> ScalarBundle {
    let mut out = ScalarBundle::zero();
    out.value = sums.i00;
    out.grad[2] = sums.i01;
    for i in 0..2 {
        out.grad[i] = 2.0 * b2[i] * sums.i10;
    }
    out.hess[2][2] = sums.i02;
    for i in 0..2 {
        let v = 2.0 * b2[i] * sums.i11;
        out.hess[i][2] = v;
        out.hess[2][i] = v;
        for j in 0..2 {
            let dij = if i == j { 1.0 } else { 0.0 };
            out.hess[i][j] = 2.0 * dij * sums.i10 + 4.0 * b2[i] * b2[j] * sums.i20;
        }
    }
    out.third[2][2][2] = sums.i03;
    for i in 0..2 {
        let v = 2.0 * b2[i] * sums.i12;
        out.third[i][2][2] = v;
        out.third[2][i][2] = v;
        out.third[2][2][i] = v;
        for j in 0..2 {
            let dij = if i == j { 1.0 } else { 0.0 };
            let v = 2.0 * dij * sums.i11 + 4.0 * b2[i] * b2[j] * sums.i21;
            out.third[i][j][2] = v;
            out.third[i][2][j] = v;
            out.third[2][i][j] = v;
            for m in 0..2 {
                let dim = if i == m { 1.0 } else { 0.0 };
                let djm = if j == m { 1.0 } else { 0.0 };
                out.third[i][j][m] = 4.0
                    * (dij * b2[m] + dim * b2[j] + djm * b2[i])
                    * sums.i20
                    + 8.0 * b2[i] * b2[j] * b2[m] * sums.i30;
            }
        }
    }
    out
}
