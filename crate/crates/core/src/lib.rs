//! Heat kernels on weighted, locally finite graphs.
//!
//! The crate builds the heat kernel `H_G(x, y; t)` of the graph Laplacian
//!
//! ```text
//! Δf(x) = (1/θ(x)) Σ_y (f(x) − f(y)) w(x, y)
//! ```
//!
//! from a *parametrix* (an approximate kernel) corrected by an alternating
//! Neumann series of time convolutions. Two evaluation routes are provided:
//!
//! * [`engine::heat_kernel_dirac`]: the Dirac parametrix `δ_{x=y}/θ(x)`,
//!   where every series term collapses to `t^ℓ/ℓ!` times a sparse chain sum.
//!   No quadrature is involved; the only error is the factorial series tail.
//! * [`engine::heat_kernel_general`]: any [`kernels::Parametrix`] (e.g. the
//!   dilated Gaussian of a metric), with the convolutions discretised by
//!   composite trapezoid on a uniform time grid.
//!
//! Closed forms for `ℤ` and regular trees live in [`kernels`], the distance
//! functions used by the Gaussian parametrix in [`metrics`].
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature pulls in
//! rayon for the quadrature path and therefore requires `std`.

#![cfg_attr(not(feature = "parallel"), no_std)]

extern crate alloc;

pub mod engine;
pub mod graph;
pub mod kernels;
pub mod metrics;
pub mod numeric;

pub use engine::{
    heat_kernel_dirac, heat_kernel_general, neumann_tail_order, ChainDomain, EngineError,
    KernelEstimate, RadialTree,
};
pub use graph::{build_graph, AssumptionReport, GraphError, WeightedGraph};
pub use kernels::{
    bessel_i, lattice_z_kernel, tree_kernel, tree_walk_counts, DiracParametrix,
    GaussianParametrix, KernelError, Parametrix,
};
pub use metrics::{Metric, MetricError, MetricKind};
