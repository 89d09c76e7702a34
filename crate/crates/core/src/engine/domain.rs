//! Spaces on which the Dirac chain sums run.
//!
//! A [`ChainDomain`] exposes the row action `v ↦ vD` of the matrix
//! `D_{ab} = δ_a(b)`, in double-double arithmetic. Besides ordinary graphs
//! this covers quotients: [`RadialTree`] stores one value per distance shell
//! of a regular tree, which is exact for sources at the root.

use alloc::vec::Vec;

use crate::graph::WeightedGraph;
use crate::numeric::Dd;

pub trait ChainDomain {
    /// Number of cells (vertices, or shells for a quotient).
    fn cell_count(&self) -> usize;
    /// Vertex weight of every vertex in cell `c`.
    fn theta(&self, c: usize) -> f64;
    /// Number of vertices represented by cell `c`.
    fn multiplicity(&self, c: usize) -> f64 {
        let _ = c;
        1.0
    }
    /// `out[b] += scale · Σ_a v[a] δ_a(b)`.
    ///
    /// Implementations keep the row sums `Σ_b δ_a(b)` at zero to
    /// double-double accuracy.
    fn apply_delta(&self, v: &[Dd], scale: f64, out: &mut [Dd]);
    /// `A = sup μ/θ`.
    fn laplacian_bound(&self) -> f64;
    fn theta_inf(&self) -> f64;
    /// Chain length from which sums from `x` to `y` may differ from the
    /// underlying infinite graph; `None` when the domain is complete.
    fn exact_order_limit(&self, x: usize, y: usize) -> Option<usize>;
    /// Whether `x` may be used as the source of a chain sum.
    fn supports_source(&self, x: usize) -> bool {
        x < self.cell_count()
    }
}

impl ChainDomain for WeightedGraph {
    fn cell_count(&self) -> usize {
        self.vertex_count()
    }

    fn theta(&self, c: usize) -> f64 {
        WeightedGraph::theta(self, c)
    }

    fn apply_delta(&self, v: &[Dd], scale: f64, out: &mut [Dd]) {
        for (a, &va) in v.iter().enumerate() {
            if va.hi == 0.0 {
                continue;
            }
            let sv = va.mul_f64(scale);
            let th = WeightedGraph::theta(self, a);
            // diagonal = exact negated sum of the rounded off-diagonal entries
            let mut diag = Dd::ZERO;
            for (b, w) in self.neighbors(a) {
                let off = -w / th;
                diag += Dd::from_f64(-off);
                out[b] += sv.mul_f64(off);
            }
            out[a] += sv * diag;
        }
    }

    fn laplacian_bound(&self) -> f64 {
        crate::graph::check_assumptions(self, None).a
    }

    fn theta_inf(&self) -> f64 {
        self.thetas().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn exact_order_limit(&self, x: usize, y: usize) -> Option<usize> {
        self.chain_exact_limit(x, y)
    }
}

/// Ball of radius `radius` in the `(q+1)`-regular tree with constant vertex
/// weight `theta` and edge weight `w`, reduced to its distance shells.
///
/// Cell `r` holds the common value at the vertices of shell `r`; sources
/// must be the root (cell 0). Shell `radius` is the frontier. `q = 1` gives
/// the half-line quotient of `ℤ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialTree {
    pub q: usize,
    pub radius: usize,
    pub theta: f64,
    pub w: f64,
}

impl RadialTree {
    pub fn new(q: usize, radius: usize) -> Self {
        RadialTree { q, radius, theta: 1.0, w: 1.0 }
    }

    /// Number of vertices in shell `r`.
    pub fn shell_size(&self, r: usize) -> f64 {
        if r == 0 {
            1.0
        } else {
            (self.q as f64 + 1.0) * libm::pow(self.q as f64, (r - 1) as f64)
        }
    }
}

impl ChainDomain for RadialTree {
    fn cell_count(&self) -> usize {
        self.radius + 1
    }

    fn theta(&self, _c: usize) -> f64 {
        self.theta
    }

    fn multiplicity(&self, c: usize) -> f64 {
        self.shell_size(c)
    }

    fn apply_delta(&self, v: &[Dd], scale: f64, out: &mut [Dd]) {
        // out[r] = (q+1)v[r] − v[r−1] − q v[r+1] for r ≥ 1,
        // out[0] = (q+1)(v[0] − v[1]), all times w/θ.
        let s = scale * self.w / self.theta;
        let q = self.q as f64;
        let n = v.len();
        let at = |i: usize| if i < n { v[i] } else { Dd::ZERO };
        for r in 0..n {
            let acc = if r == 0 {
                (at(0) - at(1)).mul_f64(q + 1.0)
            } else {
                at(r).mul_f64(q + 1.0) - at(r - 1) - at(r + 1).mul_f64(q)
            };
            out[r] += acc.mul_f64(s);
        }
    }

    fn laplacian_bound(&self) -> f64 {
        (self.q as f64 + 1.0) * self.w / self.theta
    }

    fn theta_inf(&self) -> f64 {
        self.theta
    }

    fn exact_order_limit(&self, _x: usize, y: usize) -> Option<usize> {
        Some(self.radius + self.radius.saturating_sub(y).max(1))
    }

    fn supports_source(&self, x: usize) -> bool {
        x == 0
    }
}

/// Zeroed double-double vector.
pub(crate) fn zero_vector(n: usize) -> Vec<Dd> {
    alloc::vec![Dd::ZERO; n]
}
