//! Weighted graphs, the standing assumptions on them, and the Laplacian.
//!
//! A [`WeightedGraph`] is a finite, immutable, undirected graph with vertex
//! weights `θ > 0` and symmetric edge weights `w > 0`. Infinite graphs are
//! handled through finite *windows*: a window marks the vertices whose
//! neighbourhood may be incomplete as its *frontier*. Everything computed
//! away from the frontier agrees with the infinite graph; the engine checks
//! how far a computation reaches before trusting it.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Distance value for "not reachable" in hop-count searches.
pub const UNREACHABLE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("vertex {0} has non-positive or non-finite weight θ")]
    NonPositiveTheta(String),
    #[error("self-loop at vertex {0}")]
    SelfLoop(String),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("edge {0} -- {1} has a non-finite weight")]
    NonFiniteWeight(String, String),
    #[error("edge {0} -- {1} has a negative weight")]
    NegativeWeight(String, String),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("function value missing at vertex {0}")]
    MissingFunctionValue(String),
}

/// Immutable vertex- and edge-weighted undirected graph in CSR layout.
///
/// Vertices are addressed by their index (insertion order). Labels are kept
/// for IO; adjacency lists are sorted by index so that every sum over
/// neighbours runs in the same order on every machine.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
    theta: Vec<f64>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    mu: Vec<f64>,
    frontier: Vec<bool>,
}

/// Incremental, index-based construction. Validation happens in [`build`].
///
/// [`build`]: GraphBuilder::build
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    labels: Vec<String>,
    theta: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    frontier: Vec<usize>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: impl Into<String>, theta: f64) -> usize {
        self.labels.push(label.into());
        self.theta.push(theta);
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) {
        self.edges.push((u, v, w));
    }

    pub fn mark_frontier(&mut self, v: usize) {
        self.frontier.push(v);
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn build(self) -> Result<WeightedGraph, GraphError> {
        let n = self.labels.len();
        let mut index = BTreeMap::new();
        for (i, (label, &th)) in self.labels.iter().zip(&self.theta).enumerate() {
            if !(th > 0.0 && th.is_finite()) {
                return Err(GraphError::NonPositiveTheta(label.clone()));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(label.clone()));
            }
        }

        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in &self.edges {
            let (lu, lv) = (&self.labels[u], &self.labels[v]);
            if u == v {
                return Err(GraphError::SelfLoop(lu.clone()));
            }
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight(lu.clone(), lv.clone()));
            }
            if w < 0.0 {
                return Err(GraphError::NegativeWeight(lu.clone(), lv.clone()));
            }
            if adj[u].iter().any(|&(t, _)| t == v) {
                return Err(GraphError::DuplicateEdge(lu.clone(), lv.clone()));
            }
            // w = 0 is the same as no edge.
            if w == 0.0 {
                continue;
            }
            adj[u].push((v, w));
            adj[v].push((u, w));
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut mu = Vec::with_capacity(n);
        offsets.push(0);
        for list in &mut adj {
            list.sort_by_key(|&(t, _)| t);
            let mut m = 0.0;
            for &(t, w) in list.iter() {
                targets.push(t);
                weights.push(w);
                m += w;
            }
            mu.push(m);
            offsets.push(targets.len());
        }

        let mut frontier = vec![false; n];
        for v in self.frontier {
            frontier[v] = true;
        }

        Ok(WeightedGraph {
            labels: self.labels,
            index,
            theta: self.theta,
            offsets,
            targets,
            weights,
            mu,
            frontier,
        })
    }
}

/// Builds a graph from labelled vertices `(id, θ)` and edges `(u, v, w)`.
pub fn build_graph<V, E, S>(vertices: V, edges: E) -> Result<WeightedGraph, GraphError>
where
    V: IntoIterator<Item = (S, f64)>,
    E: IntoIterator<Item = (S, S, f64)>,
    S: AsRef<str>,
{
    let mut b = GraphBuilder::new();
    let mut seen = BTreeMap::new();
    for (id, theta) in vertices {
        let id = id.as_ref();
        if seen.contains_key(id) {
            return Err(GraphError::DuplicateVertex(id.to_string()));
        }
        let i = b.add_vertex(id, theta);
        seen.insert(id.to_string(), i);
    }
    let lookup = |s: &str| {
        seen.get(s)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(s.to_string()))
    };
    for (u, v, w) in edges {
        let (u, v) = (lookup(u.as_ref())?, lookup(v.as_ref())?);
        b.add_edge(u, v, w);
    }
    b.build()
}

/// Summary of the boundedness assumptions (G1), (G2), (G3') over the
/// vertices whose neighbourhood is fully known.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AssumptionReport {
    /// `max μ(x)/θ(x)`.
    pub a: f64,
    pub theta_inf: f64,
    pub max_degree: usize,
    pub g1_bound_m: Option<f64>,
    pub g2_bound_eta: Option<f64>,
    pub g3p_bound_n: Option<usize>,
    pub g1: bool,
    pub g2: bool,
    pub g3p: bool,
    /// Number of vertices the suprema were taken over.
    pub explored_vertices: usize,
    /// Exploration radius, when the check was restricted to a ball.
    pub radius: Option<usize>,
}

/// Claimed global bounds `(M, η, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimedBounds {
    pub m: f64,
    pub eta: f64,
    pub n: usize,
}

impl WeightedGraph {
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex(&self, label: &str) -> Result<usize, GraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(label.to_string()))
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(format!("#{v}")))
        }
    }

    #[inline]
    pub fn theta(&self, v: usize) -> f64 {
        self.theta[v]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    /// Neighbours of `v` (sorted by index) with their edge weights.
    #[inline]
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    /// CSR offsets; the edges of `v` are `offsets[v]..offsets[v + 1]`.
    pub fn csr(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.offsets, &self.targets, &self.weights)
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Edge weight `w(x, y)`, 0 when not adjacent.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        let r = self.offsets[x]..self.offsets[x + 1];
        match self.targets[r.clone()].binary_search(&y) {
            Ok(i) => self.weights[r.start + i],
            Err(_) => 0.0,
        }
    }

    /// `μ(x) = Σ_{y ∼ x} w(x, y)`.
    #[inline]
    pub fn mu_of(&self, x: usize) -> f64 {
        self.mu[x]
    }

    pub fn is_frontier(&self, v: usize) -> bool {
        self.frontier[v]
    }

    pub fn has_frontier(&self) -> bool {
        self.frontier.iter().any(|&f| f)
    }

    pub fn frontier(&self) -> impl Iterator<Item = usize> + '_ {
        self.frontier
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }

    /// The same graph read as a complete finite graph (frontier dropped).
    pub fn as_finite(&self) -> WeightedGraph {
        let mut g = self.clone();
        g.frontier.iter_mut().for_each(|f| *f = false);
        g
    }

    /// Copy of the graph with `θ` replaced by `μ` (isolated vertices keep θ).
    pub fn with_theta_mu(&self) -> WeightedGraph {
        let mut g = self.clone();
        for (th, &m) in g.theta.iter_mut().zip(&self.mu) {
            if m > 0.0 {
                *th = m;
            }
        }
        g
    }

    /// Hop distances from `src`; [`UNREACHABLE`] where no path exists.
    pub fn hop_distances(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let d = dist[v] + 1;
            for (u, _) in self.neighbors(v) {
                if dist[u] == UNREACHABLE {
                    dist[u] = d;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Smallest chain length through which Dirac chain sums from `x` to `y`
    /// can see the frontier: `min_f d(x, f) + max(d(f, y), 1)`. Chain sums of
    /// length `ℓ` computed on the window equal those of the underlying
    /// infinite graph iff `ℓ` is below this value. `None` without frontier.
    pub fn chain_exact_limit(&self, x: usize, y: usize) -> Option<usize> {
        if !self.has_frontier() {
            return None;
        }
        let dx = self.hop_distances(x);
        let dy = self.hop_distances(y);
        let mut best = UNREACHABLE;
        for f in self.frontier() {
            if dx[f] == UNREACHABLE || dy[f] == UNREACHABLE {
                continue;
            }
            best = best.min(dx[f] + dy[f].max(1));
        }
        Some(best)
    }
}

/// `μ(x)`; errors on an unknown vertex.
pub fn mu(g: &WeightedGraph, x: usize) -> Result<f64, GraphError> {
    g.check(x)?;
    Ok(g.mu_of(x))
}

/// Computes `A = max μ/θ`, `inf θ` and the maximal degree, and flags each
/// assumption against `claimed` bounds when given.
///
/// `A` and the degree are taken over non-frontier vertices only (their
/// neighbourhoods are complete); `inf θ` over all stored vertices.
pub fn check_assumptions(g: &WeightedGraph, claimed: Option<ClaimedBounds>) -> AssumptionReport {
    assumptions_over(g, (0..g.vertex_count()).collect(), claimed, None)
}

/// As [`check_assumptions`], restricted to the ball of hop radius `radius`
/// around `center`. The report records the radius: it cannot certify
/// suprema over the rest of the graph.
pub fn check_assumptions_within(
    g: &WeightedGraph,
    center: usize,
    radius: usize,
    claimed: Option<ClaimedBounds>,
) -> AssumptionReport {
    let d = g.hop_distances(center);
    let ball = (0..g.vertex_count()).filter(|&v| d[v] <= radius).collect();
    assumptions_over(g, ball, claimed, Some(radius))
}

fn assumptions_over(
    g: &WeightedGraph,
    vertices: Vec<usize>,
    claimed: Option<ClaimedBounds>,
    radius: Option<usize>,
) -> AssumptionReport {
    let mut a = 0.0f64;
    let mut theta_inf = f64::INFINITY;
    let mut max_degree = 0;
    for &v in &vertices {
        theta_inf = theta_inf.min(g.theta(v));
        if g.is_frontier(v) {
            continue;
        }
        a = a.max(g.mu_of(v) / g.theta(v));
        max_degree = max_degree.max(g.degree(v));
    }
    let (g1, g2, g3p) = match claimed {
        Some(c) => (a <= c.m, theta_inf > c.eta, max_degree <= c.n),
        None => (a.is_finite(), theta_inf > 0.0, true),
    };
    AssumptionReport {
        a,
        theta_inf,
        max_degree,
        g1_bound_m: claimed.map(|c| c.m),
        g2_bound_eta: claimed.map(|c| c.eta),
        g3p_bound_n: claimed.map(|c| c.n),
        g1,
        g2,
        g3p,
        explored_vertices: vertices.len(),
        radius,
    }
}

/// `Δf(x) = (1/θ(x)) Σ_y (f(x) − f(y)) w(x, y)`.
///
/// `f` only needs to be defined at `x` and its neighbours.
pub fn apply_laplacian<F>(g: &WeightedGraph, f: F, x: usize) -> Result<f64, GraphError>
where
    F: Fn(usize) -> Option<f64>,
{
    g.check(x)?;
    let missing = |v: usize| GraphError::MissingFunctionValue(g.label(v).to_string());
    let fx = f(x).ok_or_else(|| missing(x))?;
    let mut acc = 0.0;
    for (y, w) in g.neighbors(x) {
        acc += (fx - f(y).ok_or_else(|| missing(y))?) * w;
    }
    Ok(acc / g.theta(x))
}

/// Pointwise kernel of Δ with respect to counting measure:
/// `μ(x)/θ(x)` on the diagonal, `−w(x, y)/θ(x)` for neighbours, else 0.
pub fn delta_kernel(g: &WeightedGraph, x: usize, y: usize) -> Result<f64, GraphError> {
    g.check(x)?;
    g.check(y)?;
    Ok(if x == y {
        g.mu_of(x) / g.theta(x)
    } else {
        -g.weight(x, y) / g.theta(x)
    })
}

/// Deterministic windows of the standard infinite families.
pub mod families {
    use super::*;

    /// Window `{-R..R}^dim` of the lattice `ℤ^dim` (dim 1 or 2) with θ ≡ 1,
    /// w ≡ 1. Vertices with a coordinate at `±R` form the frontier. Labels
    /// are `"i"` (dim 1) or `"i,j"` (dim 2).
    pub fn lattice_window(dim: usize, radius: usize) -> Option<WeightedGraph> {
        if radius == 0 {
            return None;
        }
        let r = radius as i64;
        let mut b = GraphBuilder::new();
        match dim {
            1 => {
                for i in -r..=r {
                    let v = b.add_vertex(format!("{i}"), 1.0);
                    if i.abs() == r {
                        b.mark_frontier(v);
                    }
                }
                for v in 0..(2 * radius) {
                    b.add_edge(v, v + 1, 1.0);
                }
            }
            2 => {
                let side = 2 * radius + 1;
                for i in -r..=r {
                    for j in -r..=r {
                        let v = b.add_vertex(format!("{i},{j}"), 1.0);
                        if i.abs() == r || j.abs() == r {
                            b.mark_frontier(v);
                        }
                    }
                }
                for a in 0..side {
                    for c in 0..side {
                        let v = a * side + c;
                        if c + 1 < side {
                            b.add_edge(v, v + 1, 1.0);
                        }
                        if a + 1 < side {
                            b.add_edge(v, v + side, 1.0);
                        }
                    }
                }
            }
            _ => return None,
        }
        b.build().ok()
    }

    /// Ball of hop radius `radius` around the root of the `(q+1)`-regular
    /// tree, θ ≡ 1, w ≡ 1. Vertex `"0"` is the root; labels follow
    /// breadth-first order; the outermost shell is the frontier.
    pub fn tree_ball(q: usize, radius: usize) -> Option<WeightedGraph> {
        if q == 0 || radius == 0 {
            return None;
        }
        let mut b = GraphBuilder::new();
        b.add_vertex("0", 1.0);
        let mut shell = vec![0usize];
        for depth in 1..=radius {
            let mut next = Vec::with_capacity(shell.len() * q + 1);
            for &p in &shell {
                let children = if depth == 1 { q + 1 } else { q };
                for _ in 0..children {
                    let c = b.vertex_count();
                    b.add_vertex(format!("{c}"), 1.0);
                    b.add_edge(p, c, 1.0);
                    if depth == radius {
                        b.mark_frontier(c);
                    }
                    next.push(c);
                }
            }
            shell = next;
        }
        b.build().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::families::*;
    use super::*;

    fn path3() -> WeightedGraph {
        build_graph(
            [("a", 1.0), ("b", 1.0), ("c", 1.0)],
            [("a", "b", 1.0), ("b", "c", 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn two_vertex_and_isolated() {
        let g = build_graph([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0)]).unwrap();
        assert_eq!(mu(&g, 0).unwrap(), 1.0);
        assert_eq!(mu(&g, 1).unwrap(), 1.0);
        let g = build_graph([("a", 1.0)], core::iter::empty::<(&str, &str, f64)>()).unwrap();
        assert_eq!(mu(&g, 0).unwrap(), 0.0);
    }

    #[test]
    fn path_mu_values() {
        let g = path3();
        assert_eq!(
            (0..3).map(|v| g.mu_of(v)).collect::<Vec<_>>(),
            vec![1.0, 2.0, 1.0]
        );
    }

    #[test]
    fn star_center_mu() {
        let g = build_graph(
            [("c", 1.0), ("1", 1.0), ("2", 1.0), ("3", 1.0), ("4", 1.0)],
            [("c", "1", 1.0), ("c", "2", 1.0), ("c", "3", 1.0), ("c", "4", 1.0)],
        )
        .unwrap();
        assert_eq!(mu(&g, g.vertex("c").unwrap()).unwrap(), 4.0);
    }

    #[test]
    fn lattice_interior_mu_is_two() {
        let g = lattice_window(1, 5).unwrap();
        assert_eq!(g.mu_of(g.vertex("0").unwrap()), 2.0);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            build_graph([("a", 0.0)], core::iter::empty::<(&str, &str, f64)>()),
            Err(GraphError::NonPositiveTheta(_))
        ));
        assert!(matches!(
            build_graph([("a", 1.0)], [("a", "a", 1.0)]),
            Err(GraphError::SelfLoop(_))
        ));
        assert!(matches!(
            build_graph([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0), ("b", "a", 2.0)]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            build_graph([("a", 1.0), ("b", 1.0)], [("a", "b", f64::NAN)]),
            Err(GraphError::NonFiniteWeight(..))
        ));
        assert!(matches!(
            build_graph([("a", 1.0), ("b", 1.0)], [("a", "c", 1.0)]),
            Err(GraphError::UnknownVertex(_))
        ));
        assert!(matches!(mu(&path3(), 7), Err(GraphError::UnknownVertex(_))));
    }

    #[test]
    fn assumptions_on_lattice_and_tree() {
        let r = check_assumptions(&lattice_window(1, 10).unwrap(), None);
        assert_eq!((r.a, r.theta_inf, r.max_degree), (2.0, 1.0, 2));
        let r = check_assumptions(&tree_ball(2, 4).unwrap(), None);
        assert_eq!((r.a, r.max_degree), (3.0, 3));
    }

    #[test]
    fn g2_flag_fails_for_tiny_theta() {
        let g = build_graph([("a", 1e-9), ("b", 1.0)], [("a", "b", 1.0)]).unwrap();
        let r = check_assumptions(
            &g,
            Some(ClaimedBounds {
                m: 1e12,
                eta: 1e-3,
                n: 4,
            }),
        );
        assert!(!r.g2);
        assert!(r.g1 && r.g3p);
    }

    #[test]
    fn laplacian_examples() {
        let g = path3();
        let f = [0.0, 1.0, 0.0];
        assert_eq!(apply_laplacian(&g, |v| f.get(v).copied(), 1).unwrap(), 2.0);
        let c = [3.0; 3];
        for x in 0..3 {
            assert_eq!(apply_laplacian(&g, |v| c.get(v).copied(), x).unwrap(), 0.0);
        }
        let g = build_graph([("a", 1.0), ("b", 2.0)], [("a", "b", 1.0)]).unwrap();
        let f = [1.0, 0.0];
        assert_eq!(apply_laplacian(&g, |v| f.get(v).copied(), 0).unwrap(), 1.0);
        assert_eq!(apply_laplacian(&g, |v| f.get(v).copied(), 1).unwrap(), -0.5);
        let err = apply_laplacian(&g, |v| (v == 0).then_some(1.0), 0).unwrap_err();
        assert!(matches!(err, GraphError::MissingFunctionValue(_)));
    }

    #[test]
    fn delta_kernel_examples() {
        let g = lattice_window(1, 4).unwrap();
        let x = g.vertex("0").unwrap();
        assert_eq!(delta_kernel(&g, x, x).unwrap(), 2.0);
        assert_eq!(delta_kernel(&g, x, g.vertex("1").unwrap()).unwrap(), -1.0);
        assert_eq!(delta_kernel(&g, x, g.vertex("-1").unwrap()).unwrap(), -1.0);
        assert_eq!(delta_kernel(&g, x, g.vertex("3").unwrap()).unwrap(), 0.0);
        let g = build_graph([("x", 2.0), ("y", 1.0)], [("x", "y", 3.0)]).unwrap();
        assert_eq!(delta_kernel(&g, 0, 0).unwrap(), 1.5);
        assert_eq!(delta_kernel(&g, 0, 1).unwrap(), -1.5);
    }

    #[test]
    fn generated_windows() {
        let g = lattice_window(1, 3).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (7, 6));
        assert_eq!(g.frontier().count(), 2);
        let t = tree_ball(2, 2).unwrap();
        assert_eq!(t.vertex_count(), 10);
        let g2 = lattice_window(2, 1).unwrap();
        assert_eq!((g2.vertex_count(), g2.edge_count()), (9, 12));
    }

    #[test]
    fn chain_limit_on_lattice() {
        let g = lattice_window(1, 10).unwrap();
        let x = g.vertex("0").unwrap();
        let y = g.vertex("2").unwrap();
        // nearest frontier vertex is 10: d(0,10) + d(10,2) = 10 + 8
        assert_eq!(g.chain_exact_limit(x, y), Some(18));
        assert_eq!(g.as_finite().chain_exact_limit(x, y), None);
    }
}
