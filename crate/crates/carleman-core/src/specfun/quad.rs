//! Gauss-Legendre rules and semi-infinite quadrature.
//!
//! Oscillatory integrals over `[0, inf)` that converge only conditionally are
//! evaluated by Abel summation: the integrand is damped by `exp(-eta u)`,
//! integrated over a window that grows like `1/eta`, and the damped values
//! are extrapolated to `eta = 0` with a Richardson table.

use crate::CoreError;
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes in ascending order.
///
/// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
/// iteration from the Chebyshev-angle initial guess; weights are
/// `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_rule(n);
    (rule.0.clone(), rule.1.clone())
}

static RULE_CACHE: Lazy<RwLock<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// Cached Gauss-Legendre rule shared between kernel assemblies.
pub(crate) fn gauss_rule(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    assert!(n >= 1, "gauss_rule needs at least one node");
    if let Some(rule) = RULE_CACHE.read().unwrap().get(&n) {
        return rule.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            // Legendre recurrence: (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}.
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            // One extra pass after convergence so the weight below uses a
            // derivative evaluated at the final node, not one step behind.
            if converged {
                break;
            }
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                converged = true;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let rule = Arc::new((nodes, weights));
    RULE_CACHE.write().unwrap().insert(n, rule.clone());
    rule
}

/// How [`semiinf_quad`] treats the tail of a semi-infinite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadMode {
    /// Truncate at `cutoff` and integrate directly. Appropriate for
    /// absolutely convergent integrands with a decaying envelope.
    Plain { cutoff: f64 },
    /// Abel summation for conditionally convergent oscillatory integrands:
    /// damp by `exp(-eta u)` for `eta = eta0 / 2^i`, `i = 0..levels`, window
    /// `length_factor / eta`, then extrapolate `eta -> 0` by Richardson.
    Abel {
        eta0: f64,
        levels: usize,
        length_factor: f64,
    },
}

/// Configuration of a semi-infinite quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub mode: QuadMode,
    /// Width of each Gauss panel. Must resolve the fastest oscillation of
    /// the integrand; 16 nodes on a half-unit panel handle phases up to a
    /// few radians per unit with large margin.
    pub panel_width: f64,
    /// Gauss nodes per panel.
    pub panel_nodes: usize,
}

impl QuadSpec {
    /// Abel-summation defaults used by the disc-kernel checks.
    pub fn abel() -> Self {
        Self {
            mode: QuadMode::Abel {
                eta0: 0.1,
                levels: 5,
                length_factor: 40.0,
            },
            panel_width: 0.5,
            panel_nodes: 16,
        }
    }

    /// Plain truncation at `cutoff`.
    pub fn plain(cutoff: f64) -> Self {
        Self {
            mode: QuadMode::Plain { cutoff },
            panel_width: 0.5,
            panel_nodes: 16,
        }
    }
}

/// Value and error estimate of a semi-infinite quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// For `Plain`: difference against a run at half the panel width. For
    /// `Abel`: difference between the two highest Richardson orders.
    pub error_estimate: f64,
}

/// Integrates `f` over `[0, inf)` according to `spec`.
///
/// # Errors
///
/// Returns [`CoreError::Quadrature`] when the specification is unusable
/// (non-positive widths, windows, or damping parameters, or fewer than two
/// Abel levels) or when the integrand produced a non-finite value.
pub fn semiinf_quad<F: Fn(f64) -> f64>(f: F, spec: &QuadSpec) -> Result<QuadResult, CoreError> {
    let fail = |message: &str| CoreError::Quadrature {
        context: "semiinf_quad".to_string(),
        message: message.to_string(),
    };
    if !(spec.panel_width > 0.0) || !spec.panel_width.is_finite() {
        return Err(fail("panel width must be positive and finite"));
    }
    if spec.panel_nodes < 2 || spec.panel_nodes > 64 {
        return Err(fail("panel nodes must lie in 2..=64"));
    }
    match spec.mode {
        QuadMode::Plain { cutoff } => {
            if !(cutoff > 0.0) || !cutoff.is_finite() {
                return Err(fail("cutoff must be positive and finite"));
            }
            let coarse = finite_quad(&f, cutoff, spec.panel_width, spec.panel_nodes)?;
            let fine = finite_quad(&f, cutoff, 0.5 * spec.panel_width, spec.panel_nodes)?;
            Ok(QuadResult {
                value: fine,
                error_estimate: (fine - coarse).abs(),
            })
        }
        QuadMode::Abel {
            eta0,
            levels,
            length_factor,
        } => {
            if !(eta0 > 0.0) || !eta0.is_finite() {
                return Err(fail("eta0 must be positive and finite"));
            }
            if levels < 2 {
                return Err(fail("Abel extrapolation needs at least two levels"));
            }
            if !(length_factor > 0.0) || !length_factor.is_finite() {
                return Err(fail("length factor must be positive and finite"));
            }
            let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
            let mut damped = Vec::with_capacity(levels);
            for i in 0..levels {
                let eta = eta0 / (1u64 << i) as f64;
                let window = length_factor / eta;
                let g = |u: f64| f(u) * (-eta * u).exp();
                damped.push(finite_quad(&g, window, spec.panel_width, spec.panel_nodes)?);
            }
            table.push(damped);
            for m in 1..levels {
                let prev = &table[m - 1];
                let pow = (1u64 << m) as f64;
                let mut cur = Vec::with_capacity(prev.len() - 1);
                for i in 0..prev.len() - 1 {
                    cur.push((pow * prev[i + 1] - prev[i]) / (pow - 1.0));
                }
                table.push(cur);
            }
            let value = table[levels - 1][0];
            let error_estimate = (value - table[levels - 2][1]).abs();
            Ok(QuadResult {
                value,
                error_estimate,
            })
        }
    }
}

/// Composite Gauss integration of `f` over `[0, upper]`.
fn finite_quad<F: Fn(f64) -> f64>(
    f: &F,
    upper: f64,
    panel_width: f64,
    panel_nodes: usize,
) -> Result<f64, CoreError> {
    let rule = gauss_rule(panel_nodes);
    let (xs, ws) = (&rule.0, &rule.1);
    let n_panels = (upper / panel_width).ceil().max(1.0) as usize;
    let width = upper / n_panels as f64;
    let mut total = 0.0;
    for p in 0..n_panels {
        let mid = (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut panel = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            panel += w * f(mid + half * x);
        }
        total += half * panel;
    }
    if !total.is_finite() {
        return Err(CoreError::Quadrature {
            context: "semiinf_quad".to_string(),
            message: "integrand produced a non-finite value".to_string(),
        });
    }
    Ok(total)
}
