//! Graph distances bounded below by a positive constant, ball volumes and a
//! volume-doubling probe.
//!
//! Search-based metrics store one cost per CSR entry of the graph they were
//! built for and answer queries with Dijkstra. On windows (graphs with a
//! frontier) a distance is only trusted when the search can prove that no
//! path leaving the window could be shorter; see [`Metric::certified`].

use alloc::collections::BinaryHeap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::graph::{check_assumptions, GraphError, WeightedGraph, UNREACHABLE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid metric parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("metric was built for a different graph")]
    GraphMismatch,
    #[error("ball of radius {radius} around the centre is not contained in the window")]
    RegionTooSmall { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MetricKind {
    Combinatorial,
    Normalized,
    Intrinsic,
    Adapted,
    EdgeWeighted,
    Custom,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Combinatorial => "combinatorial",
            MetricKind::Normalized => "normalized",
            MetricKind::Intrinsic => "intrinsic",
            MetricKind::Adapted => "adapted",
            MetricKind::EdgeWeighted => "edge_weighted",
            MetricKind::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "combinatorial" => MetricKind::Combinatorial,
            "normalized" => MetricKind::Normalized,
            "intrinsic" => MetricKind::Intrinsic,
            "adapted" => MetricKind::Adapted,
            "edge_weighted" => MetricKind::EdgeWeighted,
            _ => return None,
        })
    }
}

/// Kind-specific constants recorded alongside a metric.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MetricParams {
    /// `A` used by the normalized metric.
    pub a: Option<f64>,
    /// `(M/η)^{-1/2}` when claimed bounds were supplied to the normalized metric.
    pub claimed_lower: Option<f64>,
    /// Smallest edge weight in the region (edge-weighted metric).
    pub min_edge_weight: Option<f64>,
    /// Claimed (E1) lower bound on edge weights.
    pub e1_lower: Option<f64>,
    pub e1_violated: bool,
}

pub type DistFn = dyn Fn(usize, usize) -> f64 + Send + Sync;

/// Distance oracle with a uniform lower bound over distinct vertices.
#[derive(Clone)]
pub struct Metric {
    kind: MetricKind,
    costs: Vec<f64>,
    custom: Option<Arc<DistFn>>,
    delta_lower: f64,
    params: MetricParams,
    n_vertices: usize,
    n_entries: usize,
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Metric")
            .field("kind", &self.kind)
            .field("delta_lower", &self.delta_lower)
            .field("params", &self.params)
            .finish()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, ties broken by smaller vertex index
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Metric {
    fn from_costs<F>(g: &WeightedGraph, kind: MetricKind, cost: F) -> Metric
    where
        F: Fn(usize, usize, f64) -> f64,
    {
        let (offsets, targets, weights) = g.csr();
        let mut costs = Vec::with_capacity(targets.len());
        for x in 0..g.vertex_count() {
            for e in offsets[x]..offsets[x + 1] {
                costs.push(cost(x, targets[e], weights[e]));
            }
        }
        let delta_lower = costs.iter().copied().fold(f64::INFINITY, f64::min);
        Metric {
            kind,
            costs,
            custom: None,
            delta_lower,
            params: MetricParams::default(),
            n_vertices: g.vertex_count(),
            n_entries: targets.len(),
        }
    }

    /// Number of edges on a shortest path.
    pub fn combinatorial(g: &WeightedGraph) -> Metric {
        Metric::from_costs(g, MetricKind::Combinatorial, |_, _, _| 1.0)
    }

    /// `ρ_G = A^{-1/2} d_G`.
    pub fn normalized(g: &WeightedGraph, a: f64) -> Result<Metric, MetricError> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(MetricError::InvalidParameter("A must be positive and finite"));
        }
        let s = 1.0 / libm::sqrt(a);
        let mut m = Metric::from_costs(g, MetricKind::Normalized, |_, _, _| s);
        m.params.a = Some(a);
        Ok(m)
    }

    /// Normalized metric with `A` taken from [`check_assumptions`].
    pub fn normalized_auto(g: &WeightedGraph) -> Result<Metric, MetricError> {
        Metric::normalized(g, check_assumptions(g, None).a)
    }

    /// Records the claimed `(M/η)^{-1/2}` next to the certified bound.
    pub fn with_claimed_bounds(mut self, m: f64, eta: f64) -> Metric {
        self.params.claimed_lower = Some(libm::sqrt(eta / m));
        self
    }

    /// Edge cost `min{1, min(θ(a), θ(b))/w}^{1/2}`.
    pub fn intrinsic(g: &WeightedGraph) -> Metric {
        Metric::from_costs(g, MetricKind::Intrinsic, |a, b, w| {
            libm::sqrt((g.theta(a).min(g.theta(b)) / w).min(1.0))
        })
    }

    /// Edge cost `min{1, min(θ(a)/μ(a), θ(b)/μ(b))^{1/2}}`.
    pub fn adapted(g: &WeightedGraph) -> Metric {
        Metric::from_costs(g, MetricKind::Adapted, |a, b, _| {
            let u = (g.theta(a) / g.mu_of(a)).min(g.theta(b) / g.mu_of(b));
            libm::sqrt(u).min(1.0)
        })
    }

    /// Edge cost `w`. When `e1_lower` is given, (E1) is checked against it.
    pub fn edge_weighted(g: &WeightedGraph, e1_lower: Option<f64>) -> Metric {
        let mut m = Metric::from_costs(g, MetricKind::EdgeWeighted, |_, _, w| w);
        let min_w = m.delta_lower;
        m.params.min_edge_weight = min_w.is_finite().then_some(min_w);
        m.params.e1_lower = e1_lower;
        m.params.e1_violated = e1_lower.is_some_and(|l| min_w < l);
        m
    }

    /// User-supplied distance with a claimed lower bound.
    pub fn custom<F>(g: &WeightedGraph, dist: F, delta_lower: f64) -> Metric
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        Metric {
            kind: MetricKind::Custom,
            costs: Vec::new(),
            custom: Some(Arc::new(dist)),
            delta_lower,
            params: MetricParams::default(),
            n_vertices: g.vertex_count(),
            n_entries: g.csr().1.len(),
        }
    }

    /// Builds a built-in metric by kind (normalized uses [`check_assumptions`]).
    pub fn of_kind(g: &WeightedGraph, kind: MetricKind) -> Result<Metric, MetricError> {
        Ok(match kind {
            MetricKind::Combinatorial => Metric::combinatorial(g),
            MetricKind::Normalized => Metric::normalized_auto(g)?,
            MetricKind::Intrinsic => Metric::intrinsic(g),
            MetricKind::Adapted => Metric::adapted(g),
            MetricKind::EdgeWeighted => Metric::edge_weighted(g, None),
            MetricKind::Custom => return Err(MetricError::InvalidParameter("custom metric needs a closure")),
        })
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn delta_lower(&self) -> f64 {
        self.delta_lower
    }

    pub fn params(&self) -> &MetricParams {
        &self.params
    }

    /// Per-CSR-entry edge costs (empty for custom metrics).
    pub fn edge_costs(&self) -> &[f64] {
        &self.costs
    }

    fn check_graph(&self, g: &WeightedGraph) -> Result<(), MetricError> {
        if g.vertex_count() != self.n_vertices || g.csr().1.len() != self.n_entries {
            return Err(MetricError::GraphMismatch);
        }
        Ok(())
    }

    fn check_vertex(g: &WeightedGraph, v: usize) -> Result<(), MetricError> {
        if v >= g.vertex_count() {
            return Err(GraphError::UnknownVertex(alloc::format!("#{v}")).into());
        }
        Ok(())
    }

    /// Distances from `x` to every vertex (`∞` where unreachable).
    pub fn distances_from(&self, g: &WeightedGraph, x: usize) -> Result<Vec<f64>, MetricError> {
        self.check_graph(g)?;
        Metric::check_vertex(g, x)?;
        if let Some(f) = &self.custom {
            return Ok((0..g.vertex_count()).map(|y| f(x, y)).collect());
        }
        Ok(self.dijkstra(g, &[x], None))
    }

    pub fn dist(&self, g: &WeightedGraph, x: usize, y: usize) -> Result<f64, MetricError> {
        Metric::check_vertex(g, y)?;
        if let Some(f) = &self.custom {
            self.check_graph(g)?;
            Metric::check_vertex(g, x)?;
            return Ok(f(x, y));
        }
        Ok(self.distances_from(g, x)?[y])
    }

    /// Multi-source Dijkstra; `allowed` restricts the vertices the search may
    /// visit.
    fn dijkstra(&self, g: &WeightedGraph, sources: &[usize], allowed: Option<&[bool]>) -> Vec<f64> {
        let n = g.vertex_count();
        let (offsets, targets, _) = g.csr();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Item(0.0, s));
        }
        while let Some(Item(d, v)) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for e in offsets[v]..offsets[v + 1] {
                let u = targets[e];
                if done[u] || allowed.is_some_and(|a| !a[u]) {
                    continue;
                }
                let nd = d + self.costs[e];
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(Item(nd, u));
                }
            }
        }
        dist
    }

    /// Distance from every vertex to the interior vertices that touch the
    /// frontier, through interior vertices only (`∞` without frontier).
    fn boundary_distances(&self, g: &WeightedGraph) -> (Vec<f64>, Vec<bool>) {
        let n = g.vertex_count();
        let interior: Vec<bool> = (0..n).map(|v| !g.is_frontier(v)).collect();
        let rim: Vec<usize> = (0..n)
            .filter(|&v| interior[v] && g.neighbors(v).any(|(u, _)| g.is_frontier(u)))
            .collect();
        (self.dijkstra(g, &rim, Some(&interior)), interior)
    }

    /// Distance from `x` to `y` together with whether it is provably the
    /// distance in the graph the window was cut from.
    ///
    /// On a window the search runs through interior vertices only. Any path
    /// that leaves the interior costs more than `d∂(x) + d∂(y)` (the
    /// distances to the interior rim), so an interior value at or below that
    /// sum is exact. Graphs without frontier are always exact.
    pub fn certified(&self, g: &WeightedGraph, x: usize, y: usize) -> Result<(f64, bool), MetricError> {
        if self.custom.is_some() || !g.has_frontier() {
            return Ok((self.dist(g, x, y)?, true));
        }
        self.check_graph(g)?;
        Metric::check_vertex(g, x)?;
        Metric::check_vertex(g, y)?;
        if g.is_frontier(x) || g.is_frontier(y) {
            return Ok((self.dijkstra(g, &[x], None)[y], false));
        }
        let (rim, interior) = self.boundary_distances(g);
        let d = self.dijkstra(g, &[x], Some(&interior))[y];
        Ok((d, d <= rim[x] + rim[y]))
    }
}

/// Hop count of a shortest path; [`UNREACHABLE`] when none exists.
pub fn combinatorial_distance(g: &WeightedGraph, x: usize, y: usize) -> Result<usize, MetricError> {
    Metric::check_vertex(g, x)?;
    Metric::check_vertex(g, y)?;
    Ok(g.hop_distances(x)[y])
}

pub fn normalized_distance(g: &WeightedGraph, x: usize, y: usize, a: f64) -> Result<f64, MetricError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(MetricError::InvalidParameter("A must be positive and finite"));
    }
    let d = combinatorial_distance(g, x, y)?;
    Ok(if d == UNREACHABLE {
        f64::INFINITY
    } else {
        d as f64 / libm::sqrt(a)
    })
}

pub fn intrinsic_distance(g: &WeightedGraph, x: usize, y: usize) -> Result<f64, MetricError> {
    Metric::intrinsic(g).dist(g, x, y)
}

pub fn adapted_distance(g: &WeightedGraph, x: usize, y: usize) -> Result<f64, MetricError> {
    Metric::adapted(g).dist(g, x, y)
}

pub fn edge_weighted_distance(g: &WeightedGraph, x: usize, y: usize) -> Result<f64, MetricError> {
    Metric::edge_weighted(g, None).dist(g, x, y)
}

/// Result of [`verify_metric`]. Violations are `(x, y, z, amount)` style
/// tuples; an empty list means the property holds on the region.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MetricReport {
    pub kind: &'static str,
    pub region_size: usize,
    pub delta_lower: f64,
    /// Smallest distance observed between distinct vertices of the region.
    pub observed_min: f64,
    pub symmetry_violations: Vec<(usize, usize, f64)>,
    pub triangle_violations: Vec<(usize, usize, usize, f64)>,
    pub lower_bound_violations: Vec<(usize, usize, f64)>,
    /// Vertices where `(1/θ(x)) Σ_y d²(x, y) w(x, y) > 1`.
    pub adaptedness_violations: Vec<(usize, f64)>,
    /// Largest adaptedness sum over checked vertices.
    pub max_adaptedness: Option<f64>,
    /// Largest distance between adjacent vertices (empirical `c_ρ`).
    pub empirical_c_rho: f64,
    pub pass: bool,
}

/// Relative slack allowed for rounding in symmetry and the triangle
/// inequality (shortest paths summed in opposite directions may differ in
/// the last bits).
const ROUNDING_SLACK: f64 = 1e-12;
/// Violations kept per list; counts beyond are dropped.
const MAX_REPORTED: usize = 64;

fn push_capped<T>(v: &mut Vec<T>, item: T) {
    if v.len() < MAX_REPORTED {
        v.push(item);
    }
}

/// Checks symmetry, the triangle inequality on all triples, the uniform
/// lower bound, and optionally adaptedness at every non-frontier vertex of
/// `region`.
pub fn verify_metric(
    g: &WeightedGraph,
    m: &Metric,
    region: &[usize],
    check_adapted: bool,
) -> Result<MetricReport, MetricError> {
    let k = region.len();
    let mut d = vec![0.0; k * k];
    for (i, &x) in region.iter().enumerate() {
        let row = m.distances_from(g, x)?;
        for (j, &y) in region.iter().enumerate() {
            d[i * k + j] = row[y];
        }
    }

    let mut rep = MetricReport {
        kind: m.kind().name(),
        region_size: k,
        delta_lower: m.delta_lower(),
        observed_min: f64::INFINITY,
        ..Default::default()
    };
    let mut broken = 0usize;

    for i in 0..k {
        if d[i * k + i] != 0.0 {
            push_capped(&mut rep.lower_bound_violations, (region[i], region[i], d[i * k + i]));
            broken += 1;
        }
        for j in 0..k {
            if i == j {
                continue;
            }
            let dij = d[i * k + j];
            if (dij - d[j * k + i]).abs() > ROUNDING_SLACK * dij.abs().max(d[j * k + i].abs()) {
                push_capped(&mut rep.symmetry_violations, (region[i], region[j], dij - d[j * k + i]));
                broken += 1;
            }
            rep.observed_min = rep.observed_min.min(dij);
            if !(dij >= m.delta_lower()) {
                push_capped(&mut rep.lower_bound_violations, (region[i], region[j], dij));
                broken += 1;
            }
        }
    }

    for i in 0..k {
        for j in 0..k {
            let dij = d[i * k + j];
            if !dij.is_finite() {
                continue;
            }
            for l in 0..k {
                let via = dij + d[j * k + l];
                let direct = d[i * k + l];
                if direct > via * (1.0 + ROUNDING_SLACK) {
                    push_capped(
                        &mut rep.triangle_violations,
                        (region[i], region[j], region[l], direct - via),
                    );
                    broken += 1;
                }
            }
        }
    }

    let pos: alloc::collections::BTreeMap<usize, usize> =
        region.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut c_rho = 0.0f64;
    let mut max_ad: Option<f64> = None;
    for &x in region {
        let row = if check_adapted && !g.is_frontier(x) {
            Some(m.distances_from(g, x)?)
        } else {
            None
        };
        let mut s = 0.0;
        for (y, w) in g.neighbors(x) {
            if let Some(&j) = pos.get(&y) {
                c_rho = c_rho.max(d[pos[&x] * k + j]);
            }
            if let Some(row) = &row {
                s += row[y] * row[y] * w;
            }
        }
        if row.is_some() {
            let val = s / g.theta(x);
            max_ad = Some(max_ad.map_or(val, |a: f64| a.max(val)));
            if val > 1.0 + 1e-12 {
                push_capped(&mut rep.adaptedness_violations, (x, val));
                broken += 1;
            }
        }
    }
    rep.empirical_c_rho = c_rho;
    rep.max_adaptedness = max_ad;
    rep.pass = broken == 0;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BallVolumeReport {
    pub center: usize,
    pub radii: Vec<f64>,
    /// `V(x, r) = Σ_{d(x,y) < r} θ(y)`.
    pub volumes: Vec<f64>,
    /// `V(x, 2r)/V(x, r)`.
    pub doubling_ratios: Vec<f64>,
    /// Largest doubling ratio (empirical doubling constant).
    pub max_ratio: f64,
}

/// Ball volumes at each radius and at twice each radius.
///
/// On a window the ball of radius `2·max r` must stay inside the region
/// where distances are exact, otherwise `RegionTooSmall`.
pub fn ball_volume(
    g: &WeightedGraph,
    m: &Metric,
    x: usize,
    radii: &[f64],
) -> Result<BallVolumeReport, MetricError> {
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(MetricError::InvalidParameter("radii must be positive and finite"));
    }
    let rmax = 2.0 * radii.iter().copied().fold(0.0, f64::max);
    let dist = if g.has_frontier() && m.custom.is_none() {
        m.check_graph(g)?;
        Metric::check_vertex(g, x)?;
        let (rim, interior) = m.boundary_distances(g);
        if g.is_frontier(x) || rmax > rim[x] {
            return Err(MetricError::RegionTooSmall { radius: rmax });
        }
        m.dijkstra(g, &[x], Some(&interior))
    } else {
        m.distances_from(g, x)?
    };
    let vol = |r: f64| -> f64 {
        dist.iter()
            .zip(g.thetas())
            .filter(|(&d, _)| d < r)
            .map(|(_, &t)| t)
            .sum()
    };
    let volumes: Vec<f64> = radii.iter().map(|&r| vol(r)).collect();
    let doubling_ratios: Vec<f64> = radii
        .iter()
        .zip(&volumes)
        .map(|(&r, &v)| vol(2.0 * r) / v)
        .collect();
    let max_ratio = doubling_ratios.iter().copied().fold(0.0, f64::max);
    Ok(BallVolumeReport {
        center: x,
        radii: radii.to_vec(),
        volumes,
        doubling_ratios,
        max_ratio,
    })
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for MetricKind {
    type Err = MetricError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::from_name(s).ok_or(MetricError::InvalidParameter("unknown metric name"))
    }
}
