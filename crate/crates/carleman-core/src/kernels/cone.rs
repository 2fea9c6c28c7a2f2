//! Decaying scalar kernel for the cone-type domain.
//!
//! The family weights the layer integrand with an entire function of order
//! `rho_e` evaluated on a complex ray through the field point:
//!
//! ```text
//! Phi(y, x, k) = N(x3) int_0^inf Im[ E(tp w) / (w - x3) ] cos(ku) / A du
//! w  = i A + y3,   A = sqrt(u^2 + s),   s = |y_perp - x_perp|^2
//! tp = tau^(1/rho_e),   N(x3) = 1 / (C3 Re E(tp x3))
//! ```
//!
//! where `E = E_{1/rho_e}` is the Mittag-Leffler function of index
//! `1/rho_e`. As `tau -> 0` the weight degenerates to 1 and the integral
//! collapses to the screened kernel `exp(-kr)/(4 pi r)`; as `tau` grows the
//! values decay on the part of space outside the cone of opening exponent
//! `rho_e` through the pole `x`, which is what makes the family usable on
//! cone-shaped hidden boundaries. `rho_e = 1` turns the weight into a plain
//! exponential and reproduces the half-space family of [`super::cap`].
//!
//! Everything except the `cos(ku)` factor is independent of the wave
//! number, so the per-node integrand parts are computed once and reused by
//! all four wave numbers of a kernel matrix.

use super::radial::{axial_bundle, AxialSums, ScalarBundle};
use super::{carleman_c3, CarlemanScalar, PiBranch};
use crate::specfun::{gauss_rule, ml_stack};
use crate::CoreError;
use num_complex::Complex64;

/// The ten `(a, b)` orders of `d^{a+b}/ds^a dy3^b`, in the order matching
/// [`AxialSums`].
const PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const BINOM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

/// Wave-number-independent integrand data at every `u` node.
struct ConeParts {
    /// The ten `(s, y3)`-partials of the weighted integrand factor.
    f: Vec<[f64; 10]>,
    /// `x3`-derivative of the integrand factor and its `s`-derivative and
    /// second `x3`-derivative, for the pole-side chain.
    x1: Vec<f64>,
    x1s: Vec<f64>,
    x2: Vec<f64>,
    u: Vec<f64>,
    w: Vec<f64>,
    /// The ten partials and the three pole-side factors evaluated at
    /// `U_CUT`, feeding the tail boundary term.
    tail_f: [f64; 10],
    tail_x: [f64; 3],
    b2: [f64; 2],
    /// First and second logarithmic derivatives of the normalization
    /// `N(x3)`.
    nc1: f64,
    nc2: f64,
}

/// Truncation point of the `u` integral. The integrand tail beyond it is
/// restored to first order by the `-G(U) sin(kU) / k` boundary term of
/// integration by parts.
const U_CUT: f64 = 120.0;

/// Geometrically graded panel edges on `[0, U_CUT]`. The leading panel
/// width is 0.05, growing by 1.12 per panel; for field points within 0.2 of
/// the pole extra panels resolve the integrand peak of width `r` at `u = 0`.
fn u_edges(r: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    if r < 0.2 {
        let mut e = (r / 50.0).max(1e-9);
        while e < 0.05 {
            edges.push(e);
            e *= 2.0;
        }
    }
    edges.push(0.05);
    let mut h = 0.05 * 1.12;
    while *edges.last().unwrap() < U_CUT {
        let next = (edges.last().unwrap() + h).min(U_CUT);
        edges.push(next);
        h *= 1.12;
    }
    edges
}

fn u_nodes(r: f64) -> (Vec<f64>, Vec<f64>) {
    let edges = u_edges(r);
    let rule = gauss_rule(12);
    let mut u = Vec::with_capacity(12 * (edges.len() - 1));
    let mut w = Vec::with_capacity(u.capacity());
    for pair in edges.windows(2) {
        let mid = 0.5 * (pair[0] + pair[1]);
        let half = 0.5 * (pair[1] - pair[0]);
        for (xi, wi) in rule.0.iter().zip(rule.1.iter()) {
            u.push(mid + half * xi);
            w.push(half * wi);
        }
    }
    (u, w)
}

fn validate(tau: f64, rho_e: f64, x: [f64; 3]) -> Result<(), CoreError> {
    if !rho_e.is_finite() || rho_e < 1.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("cone opening exponent rho_e = {rho_e} must be >= 1"),
        });
    }
    if !tau.is_finite() || tau < 0.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("decay parameter tau = {tau} must be nonnegative and finite"),
        });
    }
    if !(x[2] > 0.0) {
        return Err(CoreError::InvalidConfig {
            message: format!("pole must lie strictly inside the cone, got x3 = {}", x[2]),
        });
    }
    Ok(())
}

fn cone_parts(
    y: [f64; 3],
    x: [f64; 3],
    tau: f64,
    rho_e: f64,
) -> Result<ConeParts, CoreError> {
    let alpha = 1.0 / rho_e;
    let tp = tau.powf(alpha);
    let b2 = [y[0] - x[0], y[1] - x[1]];
    let s = b2[0] * b2[0] + b2[1] * b2[1];
    let dz = y[2] - x[2];
    let r = (s + dz * dz).sqrt();
    if r == 0.0 {
        return Err(CoreError::Singular);
    }
    let en = ml_stack(alpha, Complex64::new(tp * x[2], 0.0))?;
    let g0 = en[0].re;
    let g1 = tp * en[1].re;
    let g2 = tp * tp * en[2].re;
    let norm = 1.0 / (carleman_c3() * g0);
    let (u, w) = u_nodes(r);
    let eval = |ui: f64| -> Result<([f64; 10], [f64; 3]), CoreError> {
        let a = (s + ui * ui).sqrt();
        let wc = Complex64::new(y[2], a);
        let d = wc - x[2];
        let e = ml_stack(alpha, tp * wc)?;
        let d2 = d * d;
        let d3 = d2 * d;
        let d4 = d3 * d;
        let hw = [
            e[0] / d,
            tp * e[1] / d - e[0] / d2,
            tp * tp * e[2] / d - 2.0 * tp * e[1] / d2 + 2.0 * e[0] / d3,
            tp * tp * tp * e[3] / d - 3.0 * tp * tp * e[2] / d2 + 6.0 * tp * e[1] / d3
                - 6.0 * e[0] / d4,
        ];
        let ia = Complex64::new(0.0, 1.0 / (2.0 * a));
        let ia_s = Complex64::new(0.0, -1.0 / (4.0 * a.powi(3)));
        let ia_ss = Complex64::new(0.0, 3.0 / (8.0 * a.powi(5)));
        let mut g = [[Complex64::new(0.0, 0.0); 4]; 4];
        for b in 0..4 {
            g[0][b] = hw[b];
        }
        for b in 0..3 {
            g[1][b] = hw[b + 1] * ia;
        }
        for b in 0..2 {
            g[2][b] = hw[b + 2] * ia * ia + hw[b + 1] * ia_s;
        }
        g[3][0] = hw[3] * ia * ia * ia + 3.0 * hw[2] * ia * ia_s + hw[1] * ia_ss;
        let rr = [
            1.0 / a,
            -1.0 / (2.0 * a.powi(3)),
            3.0 / (4.0 * a.powi(5)),
            -15.0 / (8.0 * a.powi(7)),
        ];
        let mut fi = [0.0; 10];
        for (slot, &(aa, bb)) in fi.iter_mut().zip(PAIRS.iter()) {
            let mut acc = 0.0;
            for ap in 0..=aa {
                acc += BINOM[aa][ap] * g[ap][bb].im * rr[aa - ap];
            }
            *slot = acc * norm;
        }
        let xi = [
            (e[0] / d2).im * rr[0] * norm,
            (((tp * e[1] / d2 - 2.0 * e[0] / d3) * ia).im * rr[0] + (e[0] / d2).im * rr[1])
                * norm,
            (2.0 * e[0] / d3).im * rr[0] * norm,
        ];
        Ok((fi, xi))
    };
    let mut f = Vec::with_capacity(u.len());
    let mut x1 = Vec::with_capacity(u.len());
    let mut x1s = Vec::with_capacity(u.len());
    let mut x2 = Vec::with_capacity(u.len());
    for &ui in &u {
        let (fi, xi) = eval(ui)?;
        f.push(fi);
        x1.push(xi[0]);
        x1s.push(xi[1]);
        x2.push(xi[2]);
    }
    let (tail_f, tail_x) = eval(U_CUT)?;
    Ok(ConeParts {
        f,
        x1,
        x1s,
        x2,
        u,
        w,
        tail_f,
        tail_x,
        b2,
        nc1: -g1 / g0,
        nc2: 2.0 * (g1 / g0) * (g1 / g0) - g2 / g0,
    })
}

// int_U^inf G cos(ku) du = -G(U) sin(kU) / k + O(G'(U) / k^2) by parts.
fn tail_weight(k: f64) -> f64 {
    -(k * U_CUT).sin() / k
}

fn cos_weighted(vals: &[f64], tail: f64, parts: &ConeParts, k: f64) -> f64 {
    let sum: f64 = vals
        .iter()
        .zip(parts.u.iter().zip(parts.w.iter()))
        .map(|(v, (u, w))| v * (k * u).cos() * w)
        .sum();
    sum + tail * tail_weight(k)
}

fn bundle_for_k(parts: &ConeParts, k: f64) -> ScalarBundle {
    let mut acc = [0.0; 10];
    for (fi, (u, w)) in parts.f.iter().zip(parts.u.iter().zip(parts.w.iter())) {
        let cw = (k * u).cos() * w;
        for (slot, v) in acc.iter_mut().zip(fi.iter()) {
            *slot += v * cw;
        }
    }
    let tw = tail_weight(k);
    for (slot, v) in acc.iter_mut().zip(parts.tail_f.iter()) {
        *slot += v * tw;
    }
    let sums = AxialSums {
        i00: acc[0],
        i10: acc[1],
        i01: acc[2],
        i20: acc[3],
        i11: acc[4],
        i02: acc[5],
        i30: acc[6],
        i21: acc[7],
        i12: acc[8],
        i03: acc[9],
    };
    axial_bundle(&sums, parts.b2)
}

/// The four scalar bundles of a cone-branch kernel matrix, sharing one
/// integrand evaluation across the wave numbers.
pub(crate) fn cone_bundles(
    y: [f64; 3],
    x: [f64; 3],
    tau: f64,
    rho_e: f64,
    ks: &[f64; 4],
) -> Result<[ScalarBundle; 4], CoreError> {
    validate(tau, rho_e, x)?;
    let parts = cone_parts(y, x, tau, rho_e)?;
    Ok([
        bundle_for_k(&parts, ks[0]),
        bundle_for_k(&parts, ks[1]),
        bundle_for_k(&parts, ks[2]),
        bundle_for_k(&parts, ks[3]),
    ])
}

/// Decaying scalar kernel on the cone-type domain.
///
/// The `y`-derivatives come from differentiating under the integral in
/// `(s, y3)`; the pole-side derivatives additionally track the
/// normalization `N(x3)` and the simple pole `1/(w - x3)`.
///
/// # Errors
///
/// [`CoreError::InvalidConfig`] for `rho_e < 1`, negative `tau`, or a pole
/// with `x3 <= 0`; [`CoreError::Singular`] for coincident points;
/// [`CoreError::GrowthOverflow`] when the weight argument reaches the
/// exponential growth sector of the entire function.
pub fn phi_cone(
    y: [f64; 3],
    x: [f64; 3],
    k: f64,
    tau: f64,
    rho_e: f64,
) -> Result<CarlemanScalar, CoreError> {
    if !k.is_finite() || k <= 0.0 {
        return Err(CoreError::InvalidConfig {
            message: format!("wave number k = {k} must be positive and finite"),
        });
    }
    validate(tau, rho_e, x)?;
    let parts = cone_parts(y, x, tau, rho_e)?;
    let b = bundle_for_k(&parts, k);
    let xs1 = cos_weighted(&parts.x1, parts.tail_x[0], &parts, k);
    let xs1s = cos_weighted(&parts.x1s, parts.tail_x[1], &parts, k);
    let xs2 = cos_weighted(&parts.x2, parts.tail_x[2], &parts, k);
    let grad_x = [
        -b.grad[0],
        -b.grad[1],
        parts.nc1 * b.value + xs1,
    ];
    let mut hess_x = b.hess;
    for i in 0..2 {
        let v = -(parts.nc1 * b.grad[i] + 2.0 * parts.b2[i] * xs1s);
        hess_x[i][2] = v;
        hess_x[2][i] = v;
    }
    hess_x[2][2] = parts.nc2 * b.value + 2.0 * parts.nc1 * xs1 + xs2;
    Ok(CarlemanScalar {
        value: b.value,
        grad_x,
        hess_x,
        grad_y: b.grad,
        hess_y: b.hess,
        third_y: b.third,
        wave_number: k,
        tau,
        branch: PiBranch::Cone { rho_e },
    })
}
