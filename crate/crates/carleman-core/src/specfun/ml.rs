//! Mittag-Leffler functions `E_alpha(z) = sum_j z^j / Gamma(alpha j + 1)`
//! and their first three derivatives.
//!
//! Three regimes cover the plane for `0 < alpha <= 1`:
//!
//! - `|z| <= 5`: the defining power series, summed termwise.
//! - `|z| >= 12`: the exponential-plus-algebraic expansion. The exponential
//!   term `(1/alpha) exp(z^(1/alpha))` is present only in the growth sector
//!   `|arg z| <= alpha pi`; the algebraic part `-sum_j z^(-j) / Gamma(1 -
//!   alpha j)` is truncated at its least term, skipping indices where the
//!   Gamma factor sits on a pole.
//! - in between: a contour representation reduced to two Cauchy integrals.
//!   Writing the kernel denominator `v^(2 alpha) - 2 v^alpha z cos(pi alpha)
//!   + z^2` as `(v^alpha - p_+)(v^alpha - p_-)` with `p_± = z exp(±i pi
//!   alpha)` and substituting `v -> v^(1/alpha)` gives
//!
//!   ```text
//!   E_alpha(z) = -(I(p_+) - I(p_-)) / (2 pi i alpha) [+ exp term in sector]
//!   I(p) = int_0^inf exp(-v^(1/alpha)) / (v - p) dv
//!   ```
//!
//!   The integrand decays super-exponentially, so the path is truncated at
//!   `42^alpha`; panels are graded toward `v = 0` and mirrored around the
//!   pole when it approaches the path, which keeps the principal-value
//!   cancellation inside symmetric node pairs.

use crate::CoreError;
use num_complex::Complex64;
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

use super::quad::gauss_rule;

type C = Complex64;

/// Entire function `E_rho(z) = sum_j z^j / Gamma(1 + j / rho_e)` of order
/// `rho_e >= 1`.
///
/// This is the standard Mittag-Leffler function of index `alpha = 1 /
/// rho_e`; `rho_e = 1` gives `exp(z)`.
///
/// # Errors
///
/// - [`CoreError::InvalidConfig`] when `rho_e < 1`.
/// - [`CoreError::GrowthOverflow`] when `z` lies in the growth sector
///   `|arg z| <= pi / rho_e` and `Re(z^rho_e)` exceeds 700, where the result
///   would overflow an `f64`.
pub fn mittag_leffler(rho_e: f64, z: C) -> Result<C, CoreError> {
    if !(rho_e >= 1.0 - 1e-12) || !rho_e.is_finite() {
        return Err(CoreError::InvalidConfig {
            message: format!("mittag_leffler order rho_e = {rho_e} must be >= 1"),
        });
    }
    Ok(ml_stack(1.0 / rho_e, z)?[0])
}

/// Derivative `d^order/dz^order E_rho(z)` for `order <= 3`.
///
/// # Errors
///
/// Same as [`mittag_leffler`], plus [`CoreError::InvalidConfig`] for
/// `order > 3`.
pub fn ml_deriv(rho_e: f64, z: C, order: usize) -> Result<C, CoreError> {
    if !(rho_e >= 1.0 - 1e-12) || !rho_e.is_finite() {
        return Err(CoreError::InvalidConfig {
            message: format!("ml_deriv order rho_e = {rho_e} must be >= 1"),
        });
    }
    if order > 3 {
        return Err(CoreError::InvalidConfig {
            message: format!("ml_deriv supports derivative orders 0..=3, got {order}"),
        });
    }
    Ok(ml_stack(1.0 / rho_e, z)?[order])
}

/// Standard two-parameter-free Mittag-Leffler function `E_alpha(z)` for
/// `0 < alpha <= 2`.
///
/// Orders above 1 are summed by the power series alone, which converges
/// fast there; the argument is capped at `|z| <= 25` for that branch.
///
/// Special cases:
///
/// - `mittag_leffler_std(1, z) = exp(z)`
/// - `mittag_leffler_std(2, z) = cosh(sqrt(z))`
///
/// # Errors
///
/// [`CoreError::InvalidConfig`] for `alpha` outside `(0, 2]` or `|z| > 25`
/// with `alpha > 1`; [`CoreError::GrowthOverflow`] as for
/// [`mittag_leffler`].
pub fn mittag_leffler_std(alpha: f64, z: C) -> Result<C, CoreError> {
    if !(alpha > 0.0 && alpha <= 2.0) || !alpha.is_finite() {
        return Err(CoreError::InvalidConfig {
            message: format!("mittag_leffler_std index alpha = {alpha} must lie in (0, 2]"),
        });
    }
    if alpha <= 1.0 {
        return Ok(ml_stack(alpha, z)?[0]);
    }
    if z.norm() > 25.0 {
        return Err(CoreError::InvalidConfig {
            message: format!(
                "mittag_leffler_std with alpha = {alpha} > 1 is series-only, |z| = {} exceeds 25",
                z.norm()
            ),
        });
    }
    Ok(series_stack(alpha, z)?[0])
}

/// `[E, E', E'', E''']` of `E_{alpha,1}` for `0 < alpha <= 1`.
pub(crate) fn ml_stack(alpha: f64, z: C) -> Result<[C; 4], CoreError> {
    if !(alpha > 0.0 && alpha <= 1.0 + 1e-12) || !alpha.is_finite() {
        return Err(CoreError::InvalidConfig {
            message: format!("Mittag-Leffler index alpha = {alpha} must lie in (0, 1]"),
        });
    }
    if (alpha - 1.0).abs() < 1e-14 {
        if z.re > 700.0 {
            return Err(CoreError::GrowthOverflow {
                context: format!("exp(z) with Re z = {:.3e}", z.re),
            });
        }
        let e = z.exp();
        return Ok([e, e, e, e]);
    }
    let r = z.norm();
    if r <= 5.0 {
        series_stack(alpha, z)
    } else if r >= 12.0 {
        log::trace!("ml_stack alpha={alpha} |z|={r:.3}: asymptotic regime");
        asymptotic_stack(alpha, z)
    } else {
        log::trace!("ml_stack alpha={alpha} |z|={r:.3}: contour regime");
        contour_stack(alpha, z)
    }
}

/// Neumaier-compensated complex accumulator; the captured low-order parts
/// are folded back on read.
#[derive(Clone, Copy)]
struct CompensatedC {
    sum: C,
    low: C,
}

impl CompensatedC {
    fn new(v: C) -> Self {
        Self {
            sum: v,
            low: C::new(0.0, 0.0),
        }
    }

    fn add(&mut self, t: C) {
        let s = self.sum + t;
        let lo_re = if self.sum.re.abs() >= t.re.abs() {
            (self.sum.re - s.re) + t.re
        } else {
            (t.re - s.re) + self.sum.re
        };
        let lo_im = if self.sum.im.abs() >= t.im.abs() {
            (self.sum.im - s.im) + t.im
        } else {
            (t.im - s.im) + self.sum.im
        };
        self.low += C::new(lo_re, lo_im);
        self.sum = s;
    }

    fn value(&self) -> C {
        self.sum + self.low
    }
}

/// `1 / Gamma(x)` for `x >= 1`; Gamma itself overflows past `x = 171.6`,
/// the log form takes over there.
fn inv_gamma(x: f64) -> f64 {
    if x < 170.0 {
        1.0 / gamma(x)
    } else {
        (-ln_gamma(x)).exp()
    }
}

/// Termwise sums of the defining series and its first three derivatives.
///
/// Terms alternate in sign outside the growth sector, so partial sums can
/// exceed the result by many orders; the compensated accumulators keep the
/// summation error at the size of the individual term roundings.
fn series_stack(alpha: f64, z: C) -> Result<[C; 4], CoreError> {
    if z.norm() == 0.0 {
        return Ok([
            C::new(1.0, 0.0),
            C::new(inv_gamma(alpha + 1.0), 0.0),
            C::new(2.0 * inv_gamma(2.0 * alpha + 1.0), 0.0),
            C::new(6.0 * inv_gamma(3.0 * alpha + 1.0), 0.0),
        ]);
    }
    let mut s = [CompensatedC::new(C::new(1.0, 0.0)); 4];
    s[1] = CompensatedC::new(C::new(0.0, 0.0));
    s[2] = s[1];
    s[3] = s[1];
    // For integer 1/alpha the Gamma factors obey Gamma(alpha j + 1) =
    // (alpha j) Gamma(alpha (j - stride) + 1), which carries the seed
    // accuracy down the whole chain instead of re-approximating Gamma at
    // every term. The two seeds of alpha = 1/2 are exact.
    let stride = (1.0 / alpha).round();
    let use_recurrence = (1.0 / alpha - stride).abs() < 1e-9 && (1.0..=64.0).contains(&stride);
    let stride = stride as usize;
    let seed = |x: f64| -> f64 {
        if x == 1.5 {
            2.0 / PI.sqrt()
        } else if x == 2.0 {
            1.0
        } else {
            inv_gamma(x)
        }
    };
    let mut igs: Vec<f64> = Vec::new();
    // powers z^j, z^{j-1}, z^{j-2}, z^{j-3}
    let mut pw = [C::new(1.0, 0.0); 4];
    let mut calm = 0u32;
    for j in 1..=400usize {
        pw[3] = pw[2];
        pw[2] = pw[1];
        pw[1] = pw[0];
        pw[0] *= z;
        let jf = j as f64;
        let ig = if use_recurrence {
            let ig = if j <= stride {
                seed(alpha * jf + 1.0)
            } else {
                igs[j - 1 - stride] / (alpha * jf)
            };
            igs.push(ig);
            ig
        } else {
            inv_gamma(alpha * jf + 1.0)
        };
        if !ig.is_finite() || pw[0].norm() * ig > 1e290 {
            return Err(CoreError::GrowthOverflow {
                context: format!(
                    "series term overflow at j = {j} for alpha = {alpha}, |z| = {:.3e}",
                    z.norm()
                ),
            });
        }
        s[0].add(pw[0] * ig);
        s[1].add(pw[1] * (jf * ig));
        if j >= 2 {
            s[2].add(pw[2] * (jf * (jf - 1.0) * ig));
        }
        if j >= 3 {
            s[3].add(pw[3] * (jf * (jf - 1.0) * (jf - 2.0) * ig));
        }
        if pw[0].norm() * ig <= 1e-17 * s[0].sum.norm().max(1.0) {
            calm += 1;
            if calm >= 3 && j >= 4 {
                return Ok([s[0].value(), s[1].value(), s[2].value(), s[3].value()]);
            }
        } else {
            calm = 0;
        }
    }
    Err(CoreError::Quadrature {
        context: "mittag_leffler series".to_string(),
        message: format!("no convergence within 400 terms for alpha = {alpha}"),
    })
}

/// Exponential term `(1/alpha) exp(z^(1/alpha))` and its derivatives.
fn exp_term_stack(alpha: f64, z: C) -> Result<[C; 4], CoreError> {
    let q = 1.0 / alpha;
    let w = z.powf(q);
    if w.re > 700.0 {
        return Err(CoreError::GrowthOverflow {
            context: format!(
                "exp(z^(1/alpha)) in the growth sector |arg z| <= {:.4} pi with Re(z^(1/alpha)) = {:.3e}",
                alpha, w.re
            ),
        });
    }
    let e = w.exp() * q;
    let d1 = q * w / z; // d/dz z^q = q z^{q-1}
    let d2 = q * (q - 1.0) * w / (z * z);
    let d3 = q * (q - 1.0) * (q - 2.0) * w / (z * z * z);
    Ok([
        e,
        e * d1,
        e * (d1 * d1 + d2),
        e * (d1 * d1 * d1 + 3.0 * d1 * d2 + d3),
    ])
}

/// Exponential-plus-algebraic expansion for `|z| >= 12`.
fn asymptotic_stack(alpha: f64, z: C) -> Result<[C; 4], CoreError> {
    let mut s = [C::new(0.0, 0.0); 4];
    let inv = C::new(1.0, 0.0) / z;
    // powers z^{-j}, z^{-j-1}, z^{-j-2}, z^{-j-3}
    let mut pw = [inv, inv * inv, inv * inv * inv, inv * inv * inv * inv];
    let mut prev = f64::INFINITY;
    for j in 1..=60usize {
        let x = 1.0 - alpha * j as f64;
        let near_pole = x < 0.5 && (x - x.round()).abs() < 1e-9;
        if !near_pole {
            let g = gamma(x);
            let jf = j as f64;
            let mag = pw[0].norm() / g.abs();
            if mag > prev {
                break;
            }
            prev = mag;
            s[0] -= pw[0] / g;
            s[1] += pw[1] * (jf / g);
            s[2] -= pw[2] * (jf * (jf + 1.0) / g);
            s[3] += pw[3] * (jf * (jf + 1.0) * (jf + 2.0) / g);
            if mag < 1e-18 * s[0].norm().max(1e-30) {
                break;
            }
        }
        for m in 0..4 {
            pw[m] *= inv;
        }
    }
    if z.arg().abs() <= alpha * PI + 1e-14 {
        let h = exp_term_stack(alpha, z)?;
        for m in 0..4 {
            s[m] += h[m];
        }
    }
    Ok(s)
}

/// Contour representation for the middle annulus `5 < |z| < 12`.
fn contour_stack(alpha: f64, z: C) -> Result<[C; 4], CoreError> {
    let off = (z.arg().abs() - alpha * PI).abs();
    if off < 1e-12 {
        // On the critical ray the pole of one Cauchy integral sits exactly
        // on the path; evaluate at slightly rotated arguments instead. The
        // symmetric average of a +-theta pair carries an O(theta^2)
        // curvature error, so a second pair at theta/2 extrapolates it away.
        let avg = |theta: f64| -> Result<[C; 4], CoreError> {
            let rot = C::from_polar(1.0, theta);
            let a = contour_stack(alpha, z * rot)?;
            let b = contour_stack(alpha, z * rot.conj())?;
            let mut out = [C::new(0.0, 0.0); 4];
            for m in 0..4 {
                out[m] = 0.5 * (a[m] + b[m]);
            }
            Ok(out)
        };
        let coarse = avg(2e-4)?;
        let fine = avg(1e-4)?;
        let mut out = [C::new(0.0, 0.0); 4];
        for m in 0..4 {
            out[m] = (4.0 * fine[m] - coarse[m]) / 3.0;
        }
        return Ok(out);
    }
    let phase = C::from_polar(1.0, PI * alpha);
    let i_plus = cauchy_integrals(alpha, z * phase);
    let i_minus = cauchy_integrals(alpha, z * phase.conj());
    let denom = C::new(0.0, 2.0 * PI * alpha);
    let mut s = [C::new(0.0, 0.0); 4];
    let mut rot_p = C::new(1.0, 0.0);
    let mut rot_m = C::new(1.0, 0.0);
    for m in 0..4 {
        s[m] = -(rot_p * i_plus[m] - rot_m * i_minus[m]) / denom;
        rot_p *= phase;
        rot_m *= phase.conj();
    }
    if z.arg().abs() <= alpha * PI {
        let h = exp_term_stack(alpha, z)?;
        for m in 0..4 {
            s[m] += h[m];
        }
    }
    Ok(s)
}

/// `int_0^Vmax exp(-v^(1/alpha)) m! / (v - p)^(m+1) dv` for `m = 0..=3`.
fn cauchy_integrals(alpha: f64, p: C) -> [C; 4] {
    let vmax = 42.0f64.powf(alpha);
    let mut edges: Vec<f64> = vec![0.0];
    let mut e = 1e-5;
    while e < 0.5f64.min(vmax) {
        edges.push(e);
        e *= 3.0;
    }
    let start = *edges.last().unwrap();
    let n_uniform = 24;
    for i in 1..=n_uniform {
        edges.push(start + (vmax - start) * i as f64 / n_uniform as f64);
    }
    let pr = p.re;
    let q = p.im.abs();
    if pr > 0.0 && pr < vmax && q < 2.0 {
        // Mirrored refinement keeps the near-pole lobes in symmetric pairs,
        // and the dyadic growth continues until the panels merge with the
        // uniform grid; stopping early would leave a width jump whose panel
        // sees the pole at a fraction of its own length.
        let w = q.max(1e-8) / 2.0;
        let mut d = w;
        while d < vmax {
            for v in [pr - d, pr + d] {
                if v > 0.0 && v < vmax {
                    edges.push(v);
                }
            }
            d *= 2.0;
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * vmax);
    let rule = gauss_rule(16);
    let (xs, ws) = (&rule.0, &rule.1);
    let inv_alpha = 1.0 / alpha;
    let mut acc = [C::new(0.0, 0.0); 4];
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        if half <= 0.0 {
            continue;
        }
        let mid = 0.5 * (pair[0] + pair[1]);
        for (x, wq) in xs.iter().zip(ws) {
            let v = mid + half * x;
            let g = (-v.powf(inv_alpha)).exp() * wq * half;
            let inv1 = C::new(1.0, 0.0) / (C::new(v, 0.0) - p);
            let inv2 = inv1 * inv1;
            acc[0] += g * inv1;
            acc[1] += g * inv2;
            acc[2] += 2.0 * g * inv2 * inv1;
            acc[3] += 6.0 * g * inv2 * inv2;
        }
    }
    acc
}
