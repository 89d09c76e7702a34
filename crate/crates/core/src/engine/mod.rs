//! Convolution calculus and the Neumann-series construction of `H_G`.
//!
//! `H_G = H + H * F` with `F = Σ_{ℓ≥1} (−1)^ℓ (L_x H)^{*ℓ}`, where
//!
//! ```text
//! (F₁ * F₂)(x, y; t) = ∫₀ᵗ Σ_z F₁(x, z; t − r) F₂(z, y; r) θ(z) dr.
//! ```

use thiserror::Error;

use crate::graph::GraphError;
use crate::kernels::KernelError;

pub mod convolution;
pub mod dirac;
pub mod domain;
pub mod general;
pub mod series;

pub use convolution::{convolve, iterated_convolution, TimeGridFunction};
pub use dirac::{dirac_order, dirac_partial_sums, dirac_plan, DiracPlan, heat_kernel_dirac, heat_kernel_dirac_many, small_time_leading_term};
pub use domain::{ChainDomain, RadialTree};
pub use general::{heat_kernel_general, heat_kernel_general_many, GeneralOptions, SeriesMode};
pub use series::{neumann_tail, neumann_tail_order};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("negative time")]
    NegativeTime,
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("tolerance must be positive and finite")]
    InvalidTolerance,
    #[error("unknown vertex")]
    UnknownVertex,
    #[error("this domain cannot be evaluated from that source")]
    UnsupportedSource,
    #[error("invalid query: {0}")]
    InvalidQuery(&'static str),
    #[error("series order {order} reaches the window frontier (exact below {limit})")]
    RegionTooSmall { order: usize, limit: usize },
    #[error("the quadrature route needs a complete finite graph (window has a frontier)")]
    IncompleteGraph,
    #[error("quadrature not converged at {nodes} nodes (estimate {estimate:e})")]
    QuadratureNotConverged { nodes: usize, estimate: f64 },
    #[error("time grids differ")]
    GridMismatch,
    #[error("spatial supports differ")]
    BallMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl EngineError {
    /// Whether the failure is a resource limit (window or grid too small)
    /// rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            EngineError::RegionTooSmall { .. }
                | EngineError::IncompleteGraph
                | EngineError::QuadratureNotConverged { .. }
        )
    }
}

/// A kernel value with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KernelEstimate {
    pub value: f64,
    /// Highest series order summed (the quadrature route in Volterra mode
    /// sums the discrete series to all orders and reports the order the
    /// majorant would need).
    pub series_order: usize,
    pub series_tail_bound: f64,
    pub spatial_tail_bound: f64,
    pub quadrature_error_estimate: f64,
    /// Sum of the three error terms.
    pub total_bound: f64,
    /// Intervals of the time grid (0 on the Dirac route).
    pub grid_nodes: usize,
    /// `(H * F)(x, y; t)`: the value minus the parametrix.
    pub correction: f64,
}

impl KernelEstimate {
    pub(crate) fn exact(value: f64, parametrix: f64) -> Self {
        KernelEstimate {
            value,
            series_order: 0,
            series_tail_bound: 0.0,
            spatial_tail_bound: 0.0,
            quadrature_error_estimate: 0.0,
            total_bound: 0.0,
            grid_nodes: 0,
            correction: value - parametrix,
        }
    }
}

pub(crate) fn check_query(t: f64, tol: f64) -> Result<(), EngineError> {
    if !t.is_finite() {
        return Err(EngineError::NonFiniteInput);
    }
    if t < 0.0 {
        return Err(EngineError::NegativeTime);
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EngineError::InvalidTolerance);
    }
    Ok(())
}
