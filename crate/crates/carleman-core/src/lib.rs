//! Reconstruction of coupled displacement and rotation fields in a bounded
//! elastic body from Cauchy data given on one part of the boundary.
//!
//! The library assembles matrix-valued kernels for the coupled second-order
//! system governing time-harmonic oscillations of a medium with independent
//! displacement `u` and micro-rotation `w`. A fundamental matrix built from
//! four scalar Helmholtz kernels gives the classical representation of any
//! regular solution through boundary values and tractions. Replacing the
//! scalar kernels by a one-parameter family that decays on the inaccessible
//! part of the boundary turns that representation into a regularizing
//! reconstruction operator: the parameter `tau` trades consistency against
//! noise amplification, and an explicit choice of `tau(delta)` yields
//! convergence as the data error `delta` goes to zero.
//!
//! Modules:
//!
//! - [`material`]: elastic moduli, wave numbers, kernel coefficients.
//! - [`specfun`]: Bessel functions, Mittag-Leffler functions, Gauss rules,
//!   semi-infinite quadrature with Abel summation.
//! - [`kernels`]: fundamental and decaying kernel matrices with their
//!   boundary-traction counterparts.
//! - [`geometry`]: boundary quadratures for the supported domain shapes and
//!   manufactured reference solutions.
//! - [`reconstruct`]: the reconstruction operator, the parameter choice rule,
//!   noise injection, and sweep auditing.

pub mod geometry;
pub mod kernels;
pub mod material;
pub mod reconstruct;
pub mod specfun;

use thiserror::Error;

/// Errors reported by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum CoreError {
    /// One or more thermodynamic admissibility conditions on the moduli fail.
    #[error("invalid material: {}", violations.join("; "))]
    InvalidMaterial { violations: Vec<String> },

    /// The quadratic for the coupled transverse wave numbers has negative
    /// discriminant, so two of the wave numbers would be complex.
    #[error("coupled wave numbers are complex (discriminant {discriminant:.6e})")]
    ComplexWaveNumbers { discriminant: f64 },

    /// Two wave numbers coincide, so the partial-fraction form of the kernel
    /// coefficients degenerates.
    #[error("degenerate medium: wave numbers k{first} and k{second} coincide at {value:.12}")]
    DegenerateMedium {
        first: usize,
        second: usize,
        value: f64,
    },

    /// A kernel was evaluated at source distance zero.
    #[error("kernel evaluated at coincident points (r = 0)")]
    Singular,

    /// A traction operator was given a normal that is not unit length.
    #[error("normal vector has length {norm:.12}, expected 1 within 1e-10")]
    NonUnitNormal { norm: f64 },

    /// A quadrature failed to reach its accuracy target or was given an
    /// invalid configuration.
    #[error("quadrature failure in {context}: {message}")]
    Quadrature { context: String, message: String },

    /// A special-function argument lies in the exponential growth sector and
    /// the result would overflow.
    #[error("overflow in growth sector: {context}")]
    GrowthOverflow { context: String },

    /// A function of two scale parameters was called on the branch point
    /// where its integral representation has no value.
    #[error("evaluation on the branch point tau = k = {k:.12}")]
    BranchPoint { k: f64 },

    /// A geometry or solver configuration is unusable.
    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },

    /// The bound-to-noise ratio for the parameter choice rule is not > 1.
    #[error("invalid ratio: bound M = {m_bound:.6e} must exceed noise level delta = {delta:.6e}")]
    InvalidRatio { m_bound: f64, delta: f64 },

    /// A kernel evaluation failed at a specific boundary node or probe.
    #[error("kernel failure at node {node}, probe {probe}: {message}")]
    NodeFailure {
        node: usize,
        probe: usize,
        message: String,
    },

    /// An audit was requested on a sweep with too few points to fit.
    #[error("audit needs at least {needed} sweep points, got {got}")]
    InsufficientGrid { needed: usize, got: usize },
}

pub use geometry::{Domain, DomainShape, SurfaceQuadrature};
pub use kernels::{CarlemanScalar, KernelMatrix};
pub use material::{KernelCoeffs, MaterialParams, WaveNumbers};
pub use reconstruct::{AuditReport, CauchyData, SweepPoint};
