//! Matrix kernels of the coupled oscillation system and their boundary
//! tractions.
//!
//! The fundamental matrix `Psi(y, x)` combines four scalar Helmholtz kernels
//! `cos(k_l r)/(4 pi r)` through the coefficients of
//! [`crate::material::KernelCoeffs`]: diagonal blocks mix the kernel value
//! and its Hessian, off-diagonal blocks are Levi-Civita contractions of the
//! gradient. Substituting a decaying scalar family for the radial kernels
//! yields the one-parameter matrix `Pi(y, x, tau)` with the same block
//! algebra; the two supported families live in [`cap`] and [`cone`].
//!
//! The coefficients carry the classical `1/(2 pi)` normalization, and the
//! assembly here rescales them by `2 pi` so that the double-layer identity
//! produces a clean `-I` jump and the boundary representation reproduces
//! interior values without an extra factor.
//!
//! All kernel derivatives are taken in the field point `y`; the traction
//! operator [`stress_apply`] consumes them columnwise.

pub mod cap;
pub mod cone;
mod radial;

pub use cap::{phi_cap, phi_cap_dtau, TauReading};
pub use cone::phi_cone;

pub(crate) use radial::ScalarBundle;
#[cfg(test)]
pub(crate) use radial::fd;

use crate::material::{KernelCoeffs, MaterialParams, WaveNumbers};
use crate::CoreError;
use nalgebra::{SMatrix, SVector};
use std::f64::consts::PI;

/// 6x6 real matrix over the stacked displacement and rotation components.
pub type Matrix6 = SMatrix<f64, 6, 6>;

/// Stacked displacement and rotation 6-vector.
pub type Vector6 = SVector<f64, 6>;

/// Which kernel family a [`KernelMatrix`] value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Fundamental matrix of the oscillation system.
    Fundamental,
    /// Decaying kernel matrix on the half-ball domain.
    CarlemanCap,
    /// Decaying kernel matrix on the cone-type domain.
    CarlemanCone,
    /// Boundary traction applied to one of the above.
    StressApplied,
}

/// Scalar family selecting the domain branch of [`pi_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PiBranch {
    /// Half-ball domain: the kernel decays below the plane `y_3 = x_3`.
    Cap,
    /// Cone-type domain with opening exponent `rho_e`: the kernel decays
    /// outside the cone through the pole `x`.
    Cone { rho_e: f64 },
}

/// A 6x6 kernel value at one `(y, x)` pair together with its
/// `y`-derivatives.
///
/// Rows and columns 0..3 are displacement components, 3..6 rotation
/// components. The two off-diagonal coupling blocks are equal and have zero
/// diagonal.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    /// Kernel value; each column is one fundamental field.
    pub value: Matrix6,
    /// `grad[m]` is the entrywise derivative `d/dy_m` of `value`. Zero for
    /// the stress-applied variant, which consumes the derivatives.
    pub grad: [Matrix6; 3],
    /// Field point.
    pub y: [f64; 3],
    /// Pole point.
    pub x: [f64; 3],
    /// Which family the value belongs to.
    pub kind: KernelKind,
}

/// One decaying scalar kernel value with the derivative sets the matrix
/// assembly and the traction operator consume.
#[derive(Debug, Clone)]
pub struct CarlemanScalar {
    pub value: f64,
    /// `d/dx_k`.
    pub grad_x: [f64; 3],
    /// `d^2/dx_k dx_j`, symmetric.
    pub hess_x: [[f64; 3]; 3],
    /// `d/dy_k`.
    pub grad_y: [f64; 3],
    /// `d^2/dy_k dy_j`, symmetric.
    pub hess_y: [[f64; 3]; 3],
    /// `d^3/dy_i dy_j dy_m`, fully symmetric.
    pub third_y: [[[f64; 3]; 3]; 3],
    /// Wave number the scalar was evaluated at.
    pub wave_number: f64,
    /// Decay parameter.
    pub tau: f64,
    /// Domain branch the scalar belongs to.
    pub branch: PiBranch,
}

/// Normalization constant of the decaying scalar families.
///
/// Calibrated so that the cap family at `tau = 0` reduces to the screened
/// kernel `exp(-kr)/(4 pi r)`. The environment variable `CARLEMAN_C3_SCALE`
/// multiplies the constant; it exists so the self test can verify that the
/// calibration check trips on a wrong value.
pub(crate) fn carleman_c3() -> f64 {
    let scale = std::env::var("CARLEMAN_C3_SCALE")
        .ok()
        .and_then(|v| v.parse::<f64>().ok())
        .unwrap_or(1.0);
    -2.0 * PI * PI * scale
}

/// Antisymmetric symbol `epsilon_{ijk}` on `{0, 1, 2}`.
pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Combines four scalar bundles into the 6x6 block matrix and its
/// `y`-gradient. Shared by the fundamental and decaying families.
pub(crate) fn assemble(
    bundles: &[ScalarBundle; 4],
    kc: &KernelCoeffs,
) -> (Matrix6, [Matrix6; 3]) {
    let mut value = Matrix6::zeros();
    let mut grad = [Matrix6::zeros(); 3];
    let scale = 2.0 * PI;
    for l in 0..4 {
        let b = &bundles[l];
        let al = scale * kc.alpha_l[l];
        let be = scale * kc.beta_l[l];
        let ga = scale * kc.gamma_l[l];
        let de = scale * kc.delta_l[l];
        let ep = scale * kc.epsilon_l[l];
        for k in 0..3 {
            for j in 0..3 {
                let dkj = if k == j { 1.0 } else { 0.0 };
                value[(k, j)] += al * b.value * dkj + be * b.hess[k][j];
                value[(3 + k, 3 + j)] += ga * b.value * dkj + de * b.hess[k][j];
                let mut curl = 0.0;
                for q in 0..3 {
                    curl += levi_civita(k, j, q) * b.grad[q];
                }
                let c = kc.coupling * ep * curl;
                value[(k, 3 + j)] += c;
                value[(3 + k, j)] += c;
                for m in 0..3 {
                    grad[m][(k, j)] += al * b.grad[m] * dkj + be * b.third[k][j][m];
                    grad[m][(3 + k, 3 + j)] += ga * b.grad[m] * dkj + de * b.third[k][j][m];
                    let mut curl_m = 0.0;
                    for q in 0..3 {
                        curl_m += levi_civita(k, j, q) * b.hess[q][m];
                    }
                    let cm = kc.coupling * ep * curl_m;
                    grad[m][(k, 3 + j)] += cm;
                    grad[m][(3 + k, j)] += cm;
                }
            }
        }
    }
    (value, grad)
}

/// Fundamental matrix of the coupled oscillation system at `(y, x)`.
///
/// Every column, read as a displacement / rotation field of `y`, satisfies
/// the homogeneous system away from `y = x`.
///
/// # Errors
///
/// Returns [`CoreError::Singular`] for coincident points.
pub fn psi_matrix(
    y: [f64; 3],
    x: [f64; 3],
    kc: &KernelCoeffs,
    wn: &WaveNumbers,
) -> Result<KernelMatrix, CoreError> {
    let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if r == 0.0 {
        return Err(CoreError::Singular);
    }
    let mut bundles = [ScalarBundle::zero(); 4];
    for l in 0..4 {
        bundles[l] = radial::radial_bundle(radial::oscillatory_chain(wn.k[l], r), d, r);
    }
    let (value, grad) = assemble(&bundles, kc);
    Ok(KernelMatrix {
        value,
        grad,
        y,
        x,
        kind: KernelKind::Fundamental,
    })
}

/// Decaying kernel matrix at `(y, x)` with parameter `tau`.
///
/// Same block algebra as [`psi_matrix`] with the radial kernels replaced by
/// the decaying scalar family of the requested branch.
///
/// # Errors
///
/// Propagates scalar-family errors; [`CoreError::Singular`] for coincident
/// points.
pub fn pi_matrix(
    y: [f64; 3],
    x: [f64; 3],
    tau: f64,
    branch: PiBranch,
    kc: &KernelCoeffs,
    wn: &WaveNumbers,
) -> Result<KernelMatrix, CoreError> {
    let bundles = match branch {
        PiBranch::Cap => {
            let mut b = [ScalarBundle::zero(); 4];
            for (l, slot) in b.iter_mut().enumerate() {
                *slot = cap::cap_bundle(y, x, wn.k[l], tau)?;
            }
            b
        }
        PiBranch::Cone { rho_e } => cone::cone_bundles(y, x, tau, rho_e, &wn.k)?,
    };
    let (value, grad) = assemble(&bundles, kc);
    Ok(KernelMatrix {
        value,
        grad,
        y,
        x,
        kind: match branch {
            PiBranch::Cap => KernelKind::CarlemanCap,
            PiBranch::Cone { .. } => KernelKind::CarlemanCone,
        },
    })
}

fn stress_columns(
    value: &Matrix6,
    grad: &[Matrix6; 3],
    n: &[f64; 3],
    p: &MaterialParams,
) -> Matrix6 {
    let mut out = Matrix6::zeros();
    for c in 0..6 {
        let div_u: f64 = (0..3).map(|q| grad[q][(q, c)]).sum();
        let div_w: f64 = (0..3).map(|q| grad[q][(3 + q, c)]).sum();
        for k in 0..3 {
            let mut tu = p.lambda * n[k] * div_u;
            let mut tw = p.epsilon * n[k] * div_w;
            for j in 0..3 {
                tu += (p.mu - p.alpha) * n[j] * grad[k][(j, c)]
                    + (p.mu + p.alpha) * n[j] * grad[j][(k, c)];
                tw += (p.nu - p.beta) * n[j] * grad[k][(3 + j, c)]
                    + (p.nu + p.beta) * n[j] * grad[j][(3 + k, c)];
                for q in 0..3 {
                    tu += 2.0 * p.alpha * levi_civita(k, j, q) * n[j] * value[(3 + q, c)];
                }
            }
            out[(k, c)] = tu;
            out[(3 + k, c)] = tw;
        }
    }
    out
}

/// Boundary traction operator applied columnwise to a kernel value.
///
/// Displacement rows combine the strain terms with the derivative-free
/// rotation coupling `2 alpha (n x w)`; rotation rows carry only the
/// rotational strain terms and never see the displacement components.
///
/// The reconstruction pairing contracts the first index of the returned
/// matrix with the boundary data vector; that transpose is applied by the
/// caller, see [`crate::reconstruct::u_tau`].
///
/// # Errors
///
/// Returns [`CoreError::NonUnitNormal`] when `n` is not unit length within
/// `1e-10`.
pub fn stress_apply(
    kernel: &KernelMatrix,
    n: [f64; 3],
    params: &MaterialParams,
) -> Result<KernelMatrix, CoreError> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(CoreError::NonUnitNormal { norm });
    }
    Ok(KernelMatrix {
        value: stress_columns(&kernel.value, &kernel.grad, &n, params),
        grad: [Matrix6::zeros(); 3],
        y: kernel.y,
        x: kernel.x,
        kind: KernelKind::StressApplied,
    })
}

/// Traction of the decaying kernel matrix, `T(d_y, n) Pi(y, x, tau)`.
///
/// # Errors
///
/// As for [`pi_matrix`] and [`stress_apply`].
#[allow(clippy::too_many_arguments)]
pub fn pi_stress(
    y: [f64; 3],
    x: [f64; 3],
    tau: f64,
    branch: PiBranch,
    n: [f64; 3],
    kc: &KernelCoeffs,
    wn: &WaveNumbers,
    params: &MaterialParams,
) -> Result<KernelMatrix, CoreError> {
    let pi = pi_matrix(y, x, tau, branch, kc, wn)?;
    stress_apply(&pi, n, params)
}
