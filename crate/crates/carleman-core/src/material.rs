//! Elastic moduli of a medium with coupled displacement and micro-rotation,
//! the wave numbers of its time-harmonic oscillations, and the coefficients
//! that combine four scalar Helmholtz kernels into the fundamental matrix.

use crate::CoreError;
use std::f64::consts::PI;

/// Moduli and inertia constants of the coupled elastic medium, together with
/// the oscillation frequency `sigma`.
///
/// The displacement `u` and micro-rotation `w` of a time-harmonic field
/// satisfy
///
/// ```text
/// (mu + alpha) lap u + (lambda + mu - alpha) grad div u + 2 alpha rot w + rho sigma^2 u = 0
/// (nu + beta)  lap w + (epsilon + nu - beta) grad div w + 2 alpha rot u
///                                                + (theta sigma^2 - 4 alpha) w = 0
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// First Lame modulus.
    pub lambda: f64,
    /// Shear modulus.
    pub mu: f64,
    /// Coupling modulus between displacement and rotation.
    pub alpha: f64,
    /// Rotational shear modulus.
    pub nu: f64,
    /// Rotational coupling modulus.
    pub beta: f64,
    /// Rotational dilatation modulus.
    pub epsilon: f64,
    /// Mass density.
    pub rho: f64,
    /// Rotational inertia density.
    pub theta: f64,
    /// Angular frequency of the time-harmonic oscillation.
    pub sigma: f64,
}

/// Wave numbers of the four scalar Helmholtz kernels the fundamental matrix
/// is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumbers {
    /// `k[0]`, `k[1]` are the longitudinal wave numbers of the displacement
    /// and rotation parts; `k[2]`, `k[3]` are the two transverse wave numbers
    /// coupled through `alpha`, with `k[2] > k[3]`.
    pub k: [f64; 4],
    /// Transverse displacement parameter `rho sigma^2 / (mu + alpha)`.
    pub sig1_sq: f64,
    /// Transverse rotation parameter `(theta sigma^2 - 4 alpha) / (nu + beta)`.
    pub sig2_sq: f64,
}

impl WaveNumbers {
    /// Square of the `l`-th wave number.
    pub fn k_sq(&self, l: usize) -> f64 {
        self.k[l] * self.k[l]
    }
}

/// Coefficients of the fundamental matrix in the basis of the four scalar
/// kernels `cos(k_l r) / (4 pi r)` and their Hessians.
///
/// The displacement block is `alpha_l * phi_l * I + beta_l * Hess(phi_l)`,
/// the rotation block is `gamma_l * phi_l * I + delta_l * Hess(phi_l)`, and
/// the off-diagonal blocks are curls of `phi_l` weighted by `epsilon_l`.
/// The sums of `beta_l`, `delta_l`, and `epsilon_l` over `l` vanish, which
/// cancels the `1/r^3` singularities of the individual Hessians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCoeffs {
    pub alpha_l: [f64; 4],
    pub beta_l: [f64; 4],
    pub gamma_l: [f64; 4],
    pub delta_l: [f64; 4],
    pub epsilon_l: [f64; 4],
    /// Weight of the off-diagonal curl blocks, `2 alpha / (mu + alpha)`.
    pub coupling: f64,
}

impl MaterialParams {
    /// Reference material used by the self tests and the shipped examples.
    pub fn reference() -> Self {
        Self {
            lambda: 1.0,
            mu: 1.0,
            alpha: 0.5,
            nu: 1.0,
            beta: 1.0,
            epsilon: 1.0,
            rho: 1.0,
            theta: 1.0,
            sigma: 2.0,
        }
    }

    /// Checks the admissibility conditions on the moduli and densities.
    ///
    /// # Errors
    ///
    /// Returns [`CoreError::InvalidMaterial`] listing every violated
    /// condition by name.
    pub fn validate(&self) -> Result<(), CoreError> {
        let mut violations = Vec::new();
        let mut check = |ok: bool, name: &str| {
            if !ok {
                violations.push(name.to_string());
            }
        };
        check(self.mu > 0.0, "mu > 0");
        check(self.alpha > 0.0, "alpha > 0");
        check(self.nu > 0.0, "nu > 0");
        check(self.beta > 0.0, "beta > 0");
        check(3.0 * self.lambda + 2.0 * self.mu > 0.0, "3 lambda + 2 mu > 0");
        check(3.0 * self.epsilon + 2.0 * self.nu > 0.0, "3 epsilon + 2 nu > 0");
        check(self.rho > 0.0, "rho > 0");
        check(self.theta > 0.0, "theta > 0");
        check(self.sigma > 0.0, "sigma > 0");
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CoreError::InvalidMaterial { violations })
        }
    }

    /// Computes the four wave numbers of the time-harmonic system.
    ///
    /// The longitudinal wave numbers are
    ///
    /// ```text
    /// k1^2 = rho sigma^2 / (lambda + 2 mu)
    /// k2^2 = (theta sigma^2 - 4 alpha) / (epsilon + 2 nu)
    /// ```
    ///
    /// and the transverse pair `k3^2 >= k4^2` solves
    ///
    /// ```text
    /// t^2 - (sig1^2 + sig2^2 + 4 alpha^2 / ((mu + alpha)(nu + beta))) t
    ///     + sig1^2 sig2^2 = 0
    /// ```
    ///
    /// # Errors
    ///
    /// Returns [`CoreError::ComplexWaveNumbers`] when the frequency is too
    /// low for all four squares to be positive (`theta sigma^2 <= 4 alpha`)
    /// or the transverse discriminant is negative.
    pub fn wave_numbers(&self) -> Result<WaveNumbers, CoreError> {
        let sig1_sq = self.rho * self.sigma * self.sigma / (self.mu + self.alpha);
        let sig2_sq =
            (self.theta * self.sigma * self.sigma - 4.0 * self.alpha) / (self.nu + self.beta);
        let k1_sq = self.rho * self.sigma * self.sigma / (self.lambda + 2.0 * self.mu);
        let k2_sq = (self.theta * self.sigma * self.sigma - 4.0 * self.alpha)
            / (self.epsilon + 2.0 * self.nu);
        let coupling = 4.0 * self.alpha * self.alpha / ((self.mu + self.alpha) * (self.nu + self.beta));
        let s = sig1_sq + sig2_sq + coupling;
        let p = sig1_sq * sig2_sq;
        let disc = s * s - 4.0 * p;
        if disc < 0.0 {
            return Err(CoreError::ComplexWaveNumbers { discriminant: disc });
        }
        let root = disc.sqrt();
        let k3_sq = 0.5 * (s + root);
        let k4_sq = 0.5 * (s - root);
        for sq in [k1_sq, k2_sq, k3_sq, k4_sq] {
            if sq <= 0.0 {
                return Err(CoreError::ComplexWaveNumbers { discriminant: sq });
            }
        }
        Ok(WaveNumbers {
            k: [k1_sq.sqrt(), k2_sq.sqrt(), k3_sq.sqrt(), k4_sq.sqrt()],
            sig1_sq,
            sig2_sq,
        })
    }

    /// Computes the kernel-combination coefficients for these moduli.
    ///
    /// The returned values carry the classical `1/(2 pi)` normalization of
    /// the generating formulas; the kernel assembly rescales them so that
    /// the double-layer identity produces a clean `-I` jump.
    ///
    /// # Errors
    ///
    /// Returns [`CoreError::DegenerateMedium`] when the two transverse wave
    /// numbers coincide and the partial-fraction split below degenerates.
    pub fn kernel_coeffs(&self, wn: &WaveNumbers) -> Result<KernelCoeffs, CoreError> {
        let k_sq = [wn.k_sq(0), wn.k_sq(1), wn.k_sq(2), wn.k_sq(3)];
        let d34 = k_sq[2] - k_sq[3];
        if d34.abs() <= 1e-12 * k_sq[2].abs().max(1.0) {
            return Err(CoreError::DegenerateMedium {
                first: 3,
                second: 4,
                value: k_sq[2],
            });
        }
        let mut alpha_l = [0.0; 4];
        let mut beta_l = [0.0; 4];
        let mut gamma_l = [0.0; 4];
        let mut delta_l = [0.0; 4];
        let mut epsilon_l = [0.0; 4];
        let rho_sig_sq = self.rho * self.sigma * self.sigma;
        let theta_term = self.theta * self.sigma * self.sigma - 4.0 * self.alpha;
        for l in 0..4 {
            let sgn = if (l + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let transverse = if l >= 2 { 1.0 } else { 0.0 };
            alpha_l[l] =
                sgn * (wn.sig2_sq - k_sq[l]) * transverse / (2.0 * PI * (self.mu + self.alpha) * d34);
            gamma_l[l] =
                sgn * (wn.sig1_sq - k_sq[l]) * transverse / (2.0 * PI * (self.beta + self.nu) * d34);
            epsilon_l[l] = sgn * transverse / (2.0 * PI * (self.beta + self.nu) * d34);
            let longitudinal_u = if l == 0 { 1.0 } else { 0.0 };
            let longitudinal_w = if l == 1 { 1.0 } else { 0.0 };
            beta_l[l] = -longitudinal_u / (2.0 * PI * rho_sig_sq) + alpha_l[l] / k_sq[l];
            delta_l[l] = -longitudinal_w / (2.0 * PI * theta_term) + gamma_l[l] / k_sq[l];
        }
        Ok(KernelCoeffs {
            alpha_l,
            beta_l,
            gamma_l,
            delta_l,
            epsilon_l,
            coupling: 2.0 * self.alpha / (self.mu + self.alpha),
        })
    }
}
