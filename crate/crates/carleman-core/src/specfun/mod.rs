//! Special functions and quadrature shared by the kernel assemblies:
//! Bessel functions `J_0`, `J_1`, Mittag-Leffler functions with
//! derivatives, Gauss-Legendre rules, and Abel-summed semi-infinite
//! integrals.

pub mod bessel;
pub mod ml;
pub mod quad;

pub use bessel::{bessel_j0, bessel_j1, jp_over_wp};
pub use ml::{mittag_leffler, mittag_leffler_std, ml_deriv};
pub use quad::{gauss_legendre, semiinf_quad, QuadMode, QuadResult, QuadSpec};

pub(crate) use ml::ml_stack;
pub(crate) use quad::gauss_rule;

use crate::CoreError;

/// Discontinuous Weber-Schafheitlin integral
/// `int_0^inf sin(tau sqrt(u^2 + s)) / sqrt(u^2 + s) * cos(k u) du`,
/// Abel-summed.
///
/// Closed form: `0` for `tau < k` and `(pi/2) J_0(sqrt(s (tau^2 - k^2)))`
/// for `tau > k`.
///
/// # Errors
///
/// - [`CoreError::BranchPoint`] when `tau` sits within relative `1e-12` of
///   the jump at `tau = k`, where the integral diverges logarithmically.
/// - [`CoreError::InvalidConfig`] for `k <= 0`, negative `tau` or `s`, or
///   non-finite inputs.
pub fn weber_disc(tau: f64, k: f64, s: f64) -> Result<f64, CoreError> {
    if !(k > 0.0) || !(tau >= 0.0) || !(s >= 0.0) || !k.is_finite() || !tau.is_finite() || !s.is_finite() {
        return Err(CoreError::InvalidConfig {
            message: format!("weber_disc needs finite tau >= 0, k > 0, s >= 0, got tau = {tau}, k = {k}, s = {s}"),
        });
    }
    if (tau - k).abs() <= 1e-12 * k {
        return Err(CoreError::BranchPoint { k });
    }
    if tau < k {
        return Ok(0.0);
    }
    Ok(std::f64::consts::FRAC_PI_2 * bessel_j0((s * (tau * tau - k * k)).sqrt()))
}

/// Screened point kernel `exp(-kr)/(4 pi r)`, the three-dimensional kernel
/// of `lap - k^2`. At `k = 0` it reduces to the Laplace kernel.
///
/// # Errors
///
/// - [`CoreError::Singular`] at `r = 0`.
/// - [`CoreError::InvalidConfig`] for negative or non-finite arguments.
pub fn yukawa_kernel(k: f64, r: f64) -> Result<f64, CoreError> {
    if !(k >= 0.0) || !(r >= 0.0) || !k.is_finite() || !r.is_finite() {
        return Err(CoreError::InvalidConfig {
            message: format!("yukawa_kernel needs finite k >= 0 and r >= 0, got k = {k}, r = {r}"),
        });
    }
    if r == 0.0 {
        return Err(CoreError::Singular);
    }
    Ok((-k * r).exp() / (4.0 * std::f64::consts::PI * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn abel_oracle(tau: f64, k: f64, s: f64) -> f64 {
        semiinf_quad(
            |u| {
                let a = (u * u + s).sqrt().max(1e-300);
                (tau * a).sin() / a * (k * u).cos()
            },
            &QuadSpec::abel(),
        )
        .unwrap()
        .value
    }

    #[test]
    fn closed_form_matches_abel_summation() {
        for (tau, k, s) in [(2.0, 1.0, 1.5), (4.0, 1.3, 0.5), (1.5, 0.8165, 0.0)] {
            assert_abs_diff_eq!(
                weber_disc(tau, k, s).unwrap(),
                abel_oracle(tau, k, s),
                epsilon = 5e-5
            );
        }
    }

    #[test]
    fn vanishes_below_the_jump() {
        assert_eq!(weber_disc(0.5, 1.0, 0.7).unwrap(), 0.0);
        assert_abs_diff_eq!(abel_oracle(0.5, 1.0, 0.7), 0.0, epsilon = 5e-5);
    }

    #[test]
    fn jump_point_is_reported_as_branch_point() {
        match weber_disc(1.0 + 1e-14, 1.0, 0.5) {
            Err(CoreError::BranchPoint { k }) => assert_eq!(k, 1.0),
            other => panic!("expected BranchPoint, got {other:?}"),
        }
        assert!(matches!(
            weber_disc(1.0, -1.0, 0.5),
            Err(CoreError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn screened_kernel_matches_direct_arithmetic() {
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(
            yukawa_kernel(0.0, 1.0).unwrap(),
            1.0 / (4.0 * pi),
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            yukawa_kernel(1.0, 1.0).unwrap(),
            (-1.0f64).exp() / (4.0 * pi),
            epsilon = 1e-16
        );
        assert!(matches!(yukawa_kernel(1.0, 0.0), Err(CoreError::Singular)));
        assert!(matches!(
            yukawa_kernel(-1.0, 0.5),
            Err(CoreError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn screened_kernel_solves_its_equation() {
        // radial form: (d^2/dr^2 + (2/r) d/dr - k^2) phi = 0 away from 0,
        // checked with 5-point finite differences at r = 0.7
        let (k, r, h) = (1.3, 0.7, 1e-3);
        let f = |r: f64| yukawa_kernel(k, r).unwrap();
        let d1 = (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h))
            / (12.0 * h);
        let d2 = (-f(r + 2.0 * h) + 16.0 * f(r + h) - 30.0 * f(r)
            + 16.0 * f(r - h)
            - f(r - 2.0 * h))
            / (12.0 * h * h);
        let residual = d2 + 2.0 / r * d1 - k * k * f(r);
        assert!(
            residual.abs() <= 1e-5 * (k * k * f(r)).abs(),
            "residual {residual:.3e}"
        );
    }
}
