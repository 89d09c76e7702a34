//! Parametrices, closed-form reference kernels and the special functions
//! they need.
//!
//! A parametrix `H` approximates the heat kernel: `H(x, y; 0) = δ_{x=y}/θ(x)`
//! and the heat operator applied to it, `L_x H = Δ_x H + ∂_t H`, is bounded
//! on every `(0, t₀]`. Everything below uses the corrected normalization in
//! which the Dirac parametrix has `L_x H = δ_x(y)/θ(y)`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{check_assumptions, ClaimedBounds, WeightedGraph};
use crate::metrics::{Metric, MetricError, MetricKind};

pub mod bessel;
pub mod chain;
pub mod closed_form;

pub use bessel::{bessel_i, bessel_i_scaled};
pub use chain::chain_coefficient;
pub use closed_form::{
    lattice_z_kernel, tree_kernel, tree_kernel_bounded, tree_walk_counts, tree_walk_series,
    ClosedFormValue,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("negative time")]
    NegativeTime,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("assumption violated: {0}")]
    AssumptionViolated(&'static str),
    #[error("metric has no positive lower bound on distinct pairs")]
    MetricLowerBoundMissing,
    #[error("chain order {order} reaches the window frontier (exact below {limit})")]
    RegionTooSmall { order: usize, limit: usize },
    #[error("unknown or unsupported vertex")]
    UnknownVertex,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A parametrix of order `k` for the heat operator on a finite graph.
///
/// `heat_op` must extend continuously to `t = 0` and return that limit
/// there; the quadrature engine samples it at the left endpoint.
pub trait Parametrix: Sync {
    fn graph(&self) -> &WeightedGraph;
    fn name(&self) -> &'static str;
    fn order(&self) -> usize {
        0
    }
    /// `H(x, y; t)` for `t ≥ 0`.
    fn eval(&self, x: usize, y: usize, t: f64) -> f64;
    /// `(L_{G,x} H)(x, y; t)` for `t ≥ 0`.
    fn heat_op(&self, x: usize, y: usize, t: f64) -> f64;
    /// Upper bound on `sup_{0 ≤ s ≤ t} |heat_op(x, y, s)|`.
    fn heat_op_sup(&self, x: usize, y: usize, t: f64) -> f64;
    /// Vertices `z` for which `heat_op(x, z, ·)` may be nonzero.
    fn heat_op_candidates(&self, x: usize, out: &mut Vec<usize>);
    /// Radius beyond which the `L¹(θ)` tail of `H(x, ·; t)` is below `tail_tol`.
    fn support_radius(&self, x: usize, t: f64, tail_tol: f64) -> f64;
    /// `C(t₀)` with `|L_x H| ≤ C(t₀) t^k` on `(0, t₀]`.
    fn lh_bound(&self, t0: f64) -> f64;
    /// Upper bound on `sup_{0 ≤ s ≤ t} Σ_z |H(x, z; s)| θ(z)`.
    fn norm1(&self, x: usize, t: f64) -> f64;
}

/// Relative slack on `lh_bound`: both parametrices attain their bound at
/// the diagonal, and `heat_op` is evaluated in floating point.
const LH_ROUNDING: f64 = 1e-12;

fn claimed_ok(g: &WeightedGraph, claimed: Option<ClaimedBounds>) -> Result<(), KernelError> {
    if let Some(c) = claimed {
        let rep = check_assumptions(g, Some(c));
        if !rep.g1 {
            return Err(KernelError::AssumptionViolated("sup μ/θ exceeds the claimed M"));
        }
        if !rep.g2 {
            return Err(KernelError::AssumptionViolated("inf θ is not above the claimed η"));
        }
        if !rep.g3p {
            return Err(KernelError::AssumptionViolated("degree exceeds the claimed N"));
        }
    }
    Ok(())
}

/// `H(x, y; t) = δ_{x=y}/θ(x)`, order 0.
#[derive(Debug, Clone)]
pub struct DiracParametrix<'g> {
    g: &'g WeightedGraph,
    /// `M/η`, or `A/inf θ` when no bounds were claimed.
    bound: f64,
}

impl<'g> DiracParametrix<'g> {
    pub fn new(g: &'g WeightedGraph) -> Self {
        let rep = check_assumptions(g, None);
        DiracParametrix { g, bound: rep.a / rep.theta_inf }
    }

    /// Uses claimed `(M, η, N)`; fails when the graph violates them.
    pub fn with_claimed(g: &'g WeightedGraph, claimed: ClaimedBounds) -> Result<Self, KernelError> {
        claimed_ok(g, Some(claimed))?;
        Ok(DiracParametrix { g, bound: claimed.m / claimed.eta })
    }
}

impl Parametrix for DiracParametrix<'_> {
    fn graph(&self) -> &WeightedGraph {
        self.g
    }

    fn name(&self) -> &'static str {
        "dirac"
    }

    fn eval(&self, x: usize, y: usize, _t: f64) -> f64 {
        if x == y {
            1.0 / self.g.theta(x)
        } else {
            0.0
        }
    }

    fn heat_op(&self, x: usize, y: usize, _t: f64) -> f64 {
        let g = self.g;
        if x == y {
            g.mu_of(x) / (g.theta(x) * g.theta(x))
        } else {
            -g.weight(x, y) / (g.theta(x) * g.theta(y))
        }
    }

    fn heat_op_sup(&self, x: usize, y: usize, t: f64) -> f64 {
        libm::fabs(self.heat_op(x, y, t))
    }

    fn heat_op_candidates(&self, x: usize, out: &mut Vec<usize>) {
        out.clear();
        out.push(x);
        out.extend(self.g.neighbors(x).map(|(y, _)| y));
    }

    fn support_radius(&self, _x: usize, _t: f64, _tail_tol: f64) -> f64 {
        1.0
    }

    fn lh_bound(&self, _t0: f64) -> f64 {
        self.bound * (1.0 + LH_ROUNDING)
    }

    fn norm1(&self, _x: usize, _t: f64) -> f64 {
        1.0
    }
}

/// `H_d(x, y; t) = exp(−θ(x)θ(y) d²(x, y)/t) / √(θ(x)θ(y))`, order 0.
///
/// Distances are tabulated once for all pairs, so this is meant for graphs
/// up to a few thousand vertices.
#[derive(Debug, Clone)]
pub struct GaussianParametrix<'g> {
    g: &'g WeightedGraph,
    kind: MetricKind,
    n: usize,
    dist: Vec<f64>,
    delta: f64,
    a: f64,
    eta: f64,
    max_degree: usize,
}

impl<'g> GaussianParametrix<'g> {
    pub fn new(g: &'g WeightedGraph, m: &Metric) -> Result<Self, KernelError> {
        Self::build(g, m, None)
    }

    pub fn with_claimed(g: &'g WeightedGraph, m: &Metric, claimed: ClaimedBounds) -> Result<Self, KernelError> {
        Self::build(g, m, Some(claimed))
    }

    fn build(g: &'g WeightedGraph, m: &Metric, claimed: Option<ClaimedBounds>) -> Result<Self, KernelError> {
        claimed_ok(g, claimed)?;
        let n = g.vertex_count();
        let delta = m.delta_lower();
        let mut dist = Vec::with_capacity(n * n);
        for x in 0..n {
            dist.extend(m.distances_from(g, x)?);
        }
        if n > 1 && g.edge_count() > 0 && !(delta > 0.0 && delta.is_finite()) {
            return Err(KernelError::MetricLowerBoundMissing);
        }
        for x in 0..n {
            for y in 0..n {
                let d = dist[x * n + y];
                if (x == y && d != 0.0) || (x != y && !(d >= delta)) {
                    return Err(KernelError::MetricLowerBoundMissing);
                }
            }
        }
        let rep = check_assumptions(g, None);
        let (a, eta, max_degree) = match claimed {
            Some(c) => (c.m, c.eta, c.n),
            None => (rep.a, rep.theta_inf, rep.max_degree),
        };
        Ok(GaussianParametrix { g, kind: m.kind(), n, dist, delta, a, eta, max_degree })
    }

    pub fn metric_kind(&self) -> MetricKind {
        self.kind
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    /// `θ(x)θ(y)d²(x, y)`.
    #[inline]
    fn u(&self, x: usize, y: usize) -> f64 {
        let d = self.distance(x, y);
        self.g.theta(x) * self.g.theta(y) * d * d
    }

    #[inline]
    fn prefactor(&self, x: usize, y: usize) -> f64 {
        1.0 / libm::sqrt(self.g.theta(x) * self.g.theta(y))
    }

    /// `sup_{0<s≤t} (u/s²) e^{−u/s}`: increasing up to `s = u/2`, where it
    /// peaks at `4/(e² u)`.
    fn dt_sup(u: f64, t: f64) -> f64 {
        if u == 0.0 || t == 0.0 {
            0.0
        } else if u.is_infinite() {
            0.0
        } else if t <= u / 2.0 {
            u / (t * t) * libm::exp(-u / t)
        } else {
            4.0 / (core::f64::consts::E * core::f64::consts::E * u)
        }
    }

    /// `Σ_{n≥n₀} N^{n+1} exp(−(η n δ)²/(2t))`.
    fn tail_sum(&self, n0: usize, t: f64) -> f64 {
        let nd = self.max_degree as f64;
        if nd == 0.0 {
            return 0.0;
        }
        let c = (self.eta * self.delta) * (self.eta * self.delta) / (2.0 * t);
        let ln_term = |n: f64| (n + 1.0) * libm::log(nd) - c * n * n;
        let mut s = 0.0;
        let mut n = n0 as f64;
        loop {
            let term = libm::exp(ln_term(n));
            s += term;
            // ratio of consecutive terms, decreasing in n
            let ratio = libm::exp(ln_term(n + 1.0) - ln_term(n));
            if ratio < 0.5 && term * ratio / (1.0 - ratio) <= 1e-17 * s {
                s += term * ratio / (1.0 - ratio);
                return s;
            }
            if !s.is_finite() {
                return f64::INFINITY;
            }
            n += 1.0;
        }
    }
}

impl Parametrix for GaussianParametrix<'_> {
    fn graph(&self) -> &WeightedGraph {
        self.g
    }

    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn eval(&self, x: usize, y: usize, t: f64) -> f64 {
        if x == y {
            return 1.0 / self.g.theta(x);
        }
        if t == 0.0 {
            return 0.0;
        }
        self.prefactor(x, y) * libm::exp(-self.u(x, y) / t)
    }

    fn heat_op(&self, x: usize, y: usize, t: f64) -> f64 {
        let g = self.g;
        let hxy = self.eval(x, y, t);
        let mut lap = 0.0;
        for (z, w) in g.neighbors(x) {
            lap += (hxy - self.eval(z, y, t)) * w;
        }
        lap /= g.theta(x);
        let dt = if t > 0.0 { self.u(x, y) / (t * t) * hxy } else { 0.0 };
        lap + dt
    }

    fn heat_op_sup(&self, x: usize, y: usize, t: f64) -> f64 {
        // Each H(·, y; s) is nondecreasing in s, so |H(x,y;s) − H(z,y;s)| is
        // at most the larger of the two values at s = t.
        let g = self.g;
        let hxy = self.eval(x, y, t);
        let mut lap = 0.0;
        for (z, w) in g.neighbors(x) {
            lap += hxy.max(self.eval(z, y, t)) * w;
        }
        lap / g.theta(x) + self.prefactor(x, y) * Self::dt_sup(self.u(x, y), t)
    }

    fn heat_op_candidates(&self, x: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend((0..self.n).filter(|&z| self.distance(x, z).is_finite()));
    }

    fn support_radius(&self, _x: usize, t: f64, tail_tol: f64) -> f64 {
        if t == 0.0 || self.tail_sum(0, t) <= tail_tol {
            return 0.0;
        }
        let mut hi = 1usize;
        while self.tail_sum(hi, t) > tail_tol {
            hi *= 2;
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.tail_sum(mid, t) > tail_tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi as f64 * self.delta
    }

    fn lh_bound(&self, t0: f64) -> f64 {
        // |Δ_x H| ≤ A/η since 0 ≤ H ≤ 1/η; the ∂_t part is bounded via
        // u ≥ v₀ = η²δ² for distinct points.
        let v0 = self.eta * self.eta * self.delta * self.delta;
        (self.a + Self::dt_sup(v0, t0)) / self.eta * (1.0 + LH_ROUNDING)
    }

    fn norm1(&self, x: usize, t: f64) -> f64 {
        (0..self.n).map(|z| self.eval(x, z, t) * self.g.theta(z)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::graph::families::lattice_window;

    #[test]
    fn dirac_examples() {
        let g = lattice_window(1, 5).unwrap().as_finite();
        let p = DiracParametrix::new(&g);
        let x = g.vertex("0").unwrap();
        assert_eq!(p.eval(x, x, 5.0), 1.0);
        assert_eq!(p.heat_op(x, g.vertex("3").unwrap(), 0.7), 0.0);
        assert_eq!(p.heat_op(x, x, 0.7), 2.0);
        assert_eq!(p.support_radius(x, 1.0, 1e-9), 1.0);
    }

    #[test]
    fn dirac_claimed_violation() {
        let g = build_graph([("a", 1e-9), ("b", 1.0)], [("a", "b", 1.0)]).unwrap();
        let c = ClaimedBounds { m: 1e12, eta: 1e-3, n: 2 };
        assert!(matches!(
            DiracParametrix::with_claimed(&g, c),
            Err(KernelError::AssumptionViolated(_))
        ));
    }

    #[test]
    fn gaussian_examples() {
        let g = lattice_window(1, 4).unwrap().as_finite();
        let m = Metric::combinatorial(&g);
        let p = GaussianParametrix::new(&g, &m).unwrap();
        let x = g.vertex("0").unwrap();
        let y = g.vertex("1").unwrap();
        assert_eq!(p.eval(x, y, 0.0), 0.0);
        assert_eq!(p.eval(x, x, 3.0), 1.0);
        assert!((p.eval(x, y, 1.0) - 0.367_879_4).abs() < 1e-7);
    }

    #[test]
    fn gaussian_heat_op_limit_at_zero() {
        let g = lattice_window(1, 4).unwrap().as_finite();
        let m = Metric::combinatorial(&g);
        let p = GaussianParametrix::new(&g, &m).unwrap();
        let d = DiracParametrix::new(&g);
        for x in 0..g.vertex_count() {
            for y in 0..g.vertex_count() {
                assert_eq!(p.heat_op(x, y, 0.0), d.heat_op(x, y, 0.0));
                assert!((p.heat_op(x, y, 1e-3) - p.heat_op(x, y, 0.0)).abs() < 1e-100);
            }
        }
    }

    #[test]
    fn gaussian_rejects_zero_distance() {
        let g = lattice_window(1, 2).unwrap().as_finite();
        let m = Metric::custom(&g, |x, y| if x == y || (x, y) == (0, 1) || (x, y) == (1, 0) { 0.0 } else { 1.0 }, 1.0);
        assert!(matches!(
            GaussianParametrix::new(&g, &m),
            Err(KernelError::MetricLowerBoundMissing)
        ));
    }

    #[test]
    fn lh_bound_dominates_samples() {
        let g = build_graph(
            [("a", 0.5), ("b", 2.0), ("c", 1.0), ("d", 0.7)],
            [("a", "b", 1.0), ("b", "c", 0.3), ("c", "d", 2.0), ("a", "d", 0.25)],
        )
        .unwrap();
        for m in [Metric::combinatorial(&g), Metric::adapted(&g), Metric::intrinsic(&g)] {
            let p = GaussianParametrix::new(&g, &m).unwrap();
            let t0 = 2.0;
            let c = p.lh_bound(t0);
            for i in 1..=200 {
                let t = t0 * i as f64 / 200.0;
                for x in 0..4 {
                    for y in 0..4 {
                        let v = p.heat_op(x, y, t).abs();
                        assert!(v <= c, "{v} > {c}");
                        assert!(v <= p.heat_op_sup(x, y, t) * (1.0 + 1e-12));
                    }
                }
            }
        }
    }
}
