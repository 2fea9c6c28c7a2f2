//! Decaying scalar kernels for the half-ball domain.
//!
//! Two one-parameter families are implemented. The production family used by
//! the matrix assembly continues the oscillatory kernel:
//!
//! ```text
//! Phi_hat = cos(kr)/(4 pi r)
//!         + (k/4pi) int_0^{pi/2} sin(chi) J0(k sin(chi) sqrt(s)) sin(k cos(chi)(x3-y3)) dchi
//!         - (1/4pi) int_0^tau  e^{t(y3-x3)} J0(sqrt(s(t^2+k^2))) dt
//! ```
//!
//! with `s = |y_perp - x_perp|^2`. The band term solves the Helmholtz
//! equation, so `Phi_hat` stays a kernel of the same operator for every
//! `tau`; for `y_3 < x_3` the three terms collapse to the tail integral
//! `(1/4pi) int_tau^inf e^{t(y3-x3)} J0(sqrt(s(t^2+k^2))) dt`, which decays
//! like `exp(-tau (x3-y3))` on and below the data plane.
//!
//! The second family, [`phi_cap`], continues the screened kernel
//! `exp(-kr)/(4 pi r)` through its parameter derivative: `Phi_tau` equals
//! the screened kernel for `tau <= k` and grows by
//! `-(1/4pi) int_k^tau e^{t(y3-x3)} J0(sqrt(s(t^2-k^2))) dt` above it. Its
//! normalization is routed through the calibrated constant so the self test
//! can detect a miscalibration.

use super::radial::{
    axial_bundle, oscillatory_chain, radial_bundle, yukawa_chain, AxialSums, ScalarBundle,
};
use super::{carleman_c3, CarlemanScalar, PiBranch};
use crate::specfun::{gauss_rule, jp_over_wp, weber_disc};
use crate::CoreError;
use std::f64::consts::PI;

/// Which reading of the parameter derivative [`phi_cap_dtau`] uses.
///
/// The family is defined through an integral with the weight
/// `e^{t(y3-x3)}` inside; the derivative in `tau` either differentiates the
/// integral alone or also multiplies by the weight's vertical factor. The
/// centered difference quotient of [`phi_cap`] in `tau` matches the literal
/// reading, which is therefore the default; the product-rule reading is kept
/// selectable for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TauReading {
    /// `d Phi / d tau = e^{tau (y3-x3)} J0(sqrt(s (tau^2-k^2)))`-type term
    /// only. Matches the difference quotient; the default.
    #[default]
    Literal,
    /// The literal term additionally multiplied by `1 + (y3 - x3)`. Does not
    /// match the difference quotient.
    ProductRule,
}

fn validate(k: f64, tau: f64) -> Result<(), CoreError> {
    if !k.is_finite() || k <= 0.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("wave number k = {k} must be positive and finite"),
        });
    }
    if !tau.is_finite() || tau < 0.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("decay parameter tau = {tau} must be nonnegative and finite"),
        });
    }
    Ok(())
}

/// The `s`-derivatives of the horizontal factor `J0(sqrt(s csq))`:
/// `d^p/ds^p = (-1)^p (csq/2)^p J_p(w)/w^p` at `w = sqrt(s csq)`.
fn horizontal_chain(csq: f64, s: f64) -> [f64; 4] {
    let w = (s * csq).max(0.0).sqrt();
    let ch = 0.5 * csq;
    [
        jp_over_wp(0, w),
        -ch * jp_over_wp(1, w),
        ch * ch * jp_over_wp(2, w),
        -ch * ch * ch * jp_over_wp(3, w),
    ]
}

/// Derivative sums of `pref * int_lo^hi e^{t a} J0(sqrt(s (t^2 + shift))) dt`
/// by composite Gauss panels, roughly four per unit length.
fn exp_part_sums(a: f64, s: f64, lo: f64, hi: f64, shift: f64, pref: f64) -> AxialSums {
    let mut sums = AxialSums::default();
    if hi <= lo {
        return sums;
    }
    let n_panels = ((4.0 * (hi - lo)).ceil() as usize).max(4);
    let rule = gauss_rule(16);
    let width = (hi - lo) / n_panels as f64;
    for p in 0..n_panels {
        let mid = lo + width * (p as f64 + 0.5);
        let half = 0.5 * width;
        for (xi, wi) in rule.0.iter().zip(rule.1.iter()) {
            let t = mid + half * xi;
            let qs = horizontal_chain(t * t + shift, s);
            let e = (a * t).exp();
            let v = [e, t * e, t * t * e, t * t * t * e];
            sums.accumulate(&qs, &v, half * wi * pref);
        }
    }
    sums
}

/// Derivative sums of the propagating band term at `dz = x3 - y3`.
fn band_sums(k: f64, dz: f64, s: f64) -> AxialSums {
    let mut sums = AxialSums::default();
    let rule = gauss_rule(40);
    for (xi, wi) in rule.0.iter().zip(rule.1.iter()) {
        let chi = (PI / 4.0) * (xi + 1.0);
        let (schi, cchi) = chi.sin_cos();
        let c = k * schi;
        let kap = k * cchi;
        let qs = horizontal_chain(c * c, s);
        let arg = kap * dz;
        let (sarg, carg) = arg.sin_cos();
        let v = [sarg, -kap * carg, -kap * kap * sarg, kap * kap * kap * carg];
        sums.accumulate(&qs, &v, (k / (4.0 * PI)) * (PI / 4.0) * wi * schi);
    }
    sums
}

/// Full `y`-derivative bundle of the production family `Phi_hat` at one
/// wave number.
///
/// # Errors
///
/// [`CoreError::Singular`] for coincident points,
/// [`CoreError::InvalidConfig`] for non-positive `k` or negative `tau`.
pub(crate) fn cap_bundle(
    y: [f64; 3],
    x: [f64; 3],
    k: f64,
    tau: f64,
) -> Result<ScalarBundle, CoreError> {
    validate(k, tau)?;
    let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if r == 0.0 {
        return Err(CoreError::Singular);
    }
    let b2 = [d[0], d[1]];
    let s = b2[0] * b2[0] + b2[1] * b2[1];
    let a = d[2];
    let mut out = radial_bundle(oscillatory_chain(k, r), d, r);
    out.add(&axial_bundle(&band_sums(k, -a, s), b2));
    out.add(&axial_bundle(
        &exp_part_sums(a, s, 0.0, tau, k * k, -1.0 / (4.0 * PI)),
        b2,
    ));
    Ok(out)
}

/// Decaying continuation of the screened kernel on the half-ball domain.
///
/// For `tau <= k` this is exactly the screened kernel scaled by the
/// calibrated normalization; above `k` the parameter integral is added. The
/// family depends on `y - x` only, so the `x`-derivatives are sign flips of
/// the `y`-derivatives.
///
/// # Errors
///
/// [`CoreError::BranchPoint`] at `tau = k`, [`CoreError::Singular`] for
/// coincident points, [`CoreError::InvalidConfig`] for invalid `k`, `tau`.
pub fn phi_cap(y: [f64; 3], x: [f64; 3], k: f64, tau: f64) -> Result<CarlemanScalar, CoreError> {
    validate(k, tau)?;
    if (tau - k).abs() <= 1e-12 * k {
        return Err(CoreError::BranchPoint { k });
    }
    let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if r == 0.0 {
        return Err(CoreError::Singular);
    }
    let c3 = carleman_c3();
    let mut bundle = radial_bundle(yukawa_chain(k, r), d, r);
    bundle.scale(-2.0 * PI * PI / c3);
    if tau > k {
        let b2 = [d[0], d[1]];
        let s = b2[0] * b2[0] + b2[1] * b2[1];
        bundle.add(&axial_bundle(
            &exp_part_sums(d[2], s, k, tau, -k * k, (PI / 2.0) / c3),
            b2,
        ));
    }
    Ok(CarlemanScalar {
        value: bundle.value,
        grad_x: [-bundle.grad[0], -bundle.grad[1], -bundle.grad[2]],
        hess_x: bundle.hess,
        grad_y: bundle.grad,
        hess_y: bundle.hess,
        third_y: bundle.third,
        wave_number: k,
        tau,
        branch: PiBranch::Cap,
    })
}

/// Parameter derivative of [`phi_cap`] in the chosen reading.
///
/// Below the jump (`tau < k`) the derivative vanishes; above it the literal
/// reading is `e^{tau (y3-x3)}` times the disc factor of
/// [`crate::specfun::weber_disc`], scaled by the calibrated normalization.
///
/// # Errors
///
/// As for [`phi_cap`].
pub fn phi_cap_dtau(
    y: [f64; 3],
    x: [f64; 3],
    k: f64,
    tau: f64,
    reading: TauReading,
) -> Result<f64, CoreError> {
    validate(k, tau)?;
    if (tau - k).abs() <= 1e-12 * k {
        return Err(CoreError::BranchPoint { k });
    }
    let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
    if d == [0.0; 3] {
        return Err(CoreError::Singular);
    }
    if tau < k {
        return Ok(0.0);
    }
    let s = d[0] * d[0] + d[1] * d[1];
    let a = d[2];
    let literal = (tau * a).exp() * weber_disc(tau, k, s)? / carleman_c3();
    Ok(match reading {
        TauReading::Literal => literal,
        TauReading::ProductRule => (1.0 + a) * literal,
    })
}
