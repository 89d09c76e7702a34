//! Graph generators: ℤ and ℤ² windows, balls in regular trees, and seeded
//! random graphs of bounded degree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use graphheat_core::graph::families::{lattice_window, tree_ball};
use graphheat_core::graph::GraphBuilder;
use graphheat_core::WeightedGraph;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

fn invalid(msg: impl Into<String>) -> GenError {
    GenError::InvalidParams(msg.into())
}

/// A named generator with its parameters.
///
/// The textual form is `name:key=value,...`, e.g. `lattice:radius=80`,
/// `tree:q=2,radius=8`, `random:n=200,degree=6,theta=0.5..2,w=0.5..2,seed=7`
/// or `pair` (two vertices, `θ ≡ 1`, `w = 1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Lattice { dim: usize, radius: usize },
    Tree { q: usize, radius: usize },
    Random(RandomParams),
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomParams {
    pub n: usize,
    pub max_degree: usize,
    pub theta: (f64, f64),
    pub w: (f64, f64),
    pub seed: u64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { n: 50, max_degree: 4, theta: (0.5, 2.0), w: (0.5, 2.0), seed: 0 }
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), GenError> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let lo: f64 = a.trim().parse().map_err(|_| invalid(format!("bad range {s}")))?;
    let hi: f64 = b.trim().parse().map_err(|_| invalid(format!("bad range {s}")))?;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(invalid(format!("range {s} must satisfy 0 < lo ≤ hi < ∞")));
    }
    Ok((lo, hi))
}

impl FromStr for Generator {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = BTreeMap::new();
        for item in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| invalid(format!("expected key=value, got {item}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take_usize = |k: &str, default: Option<usize>| -> Result<usize, GenError> {
            match kv.remove(k) {
                Some(v) => v.parse().map_err(|_| invalid(format!("{k} must be a nonnegative integer"))),
                None => default.ok_or_else(|| invalid(format!("missing parameter {k}"))),
            }
        };
        let gen = match name.trim() {
            "lattice" => Generator::Lattice { dim: take_usize("dim", Some(1))?, radius: take_usize("radius", None)? },
            "tree" => Generator::Tree { q: take_usize("q", None)?, radius: take_usize("radius", None)? },
            "random" => {
                let d = RandomParams::default();
                let n = take_usize("n", None)?;
                let max_degree = take_usize("degree", Some(d.max_degree))?;
                let seed = take_usize("seed", Some(0))? as u64;
                let theta = kv.remove("theta").map(|v| parse_range(&v)).transpose()?.unwrap_or(d.theta);
                let w = kv.remove("w").map(|v| parse_range(&v)).transpose()?.unwrap_or(d.w);
                Generator::Random(RandomParams { n, max_degree, theta, w, seed })
            }
            "pair" => Generator::Pair,
            other => return Err(invalid(format!("unknown generator {other}"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(invalid(format!("unknown parameter {k}")));
        }
        Ok(gen)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Lattice { dim, radius } => write!(f, "lattice:dim={dim},radius={radius}"),
            Generator::Tree { q, radius } => write!(f, "tree:q={q},radius={radius}"),
            Generator::Random(p) => write!(
                f,
                "random:n={},degree={},theta={}..{},w={}..{},seed={}",
                p.n, p.max_degree, p.theta.0, p.theta.1, p.w.0, p.w.1, p.seed
            ),
            Generator::Pair => write!(f, "pair"),
        }
    }
}

impl Generator {
    pub fn generate(&self) -> Result<WeightedGraph, GenError> {
        match *self {
            Generator::Lattice { dim, radius } => {
                if radius < 1 {
                    return Err(invalid("window radius must be at least 1"));
                }
                lattice_window(dim, radius).ok_or_else(|| invalid("lattice dimension must be 1 or 2"))
            }
            Generator::Tree { q, radius } => {
                if q < 1 || radius < 1 {
                    return Err(invalid("tree needs q ≥ 1 and radius ≥ 1"));
                }
                tree_ball(q, radius).ok_or_else(|| invalid("tree ball too large"))
            }
            Generator::Random(p) => random_bounded_degree(p),
            Generator::Pair => {
                let mut b = GraphBuilder::new();
                let a = b.add_vertex("a", 1.0);
                let c = b.add_vertex("b", 1.0);
                b.add_edge(a, c, 1.0);
                b.build().map_err(|e| invalid(e.to_string()))
            }
        }
    }
}

/// Connected random graph with degrees at most `max_degree`.
///
/// A random recursive tree (each vertex attaches to an earlier one with free
/// degree) is completed by up to `n·max_degree/2` further random edges.
/// Everything is drawn from one ChaCha8 stream, so a seed fixes the graph.
pub fn random_bounded_degree(p: RandomParams) -> Result<WeightedGraph, GenError> {
    if p.n == 0 {
        return Err(invalid("n must be positive"));
    }
    if (p.max_degree < 2 && p.n > 2) || (p.max_degree == 0 && p.n > 1) {
        return Err(invalid("a connected graph on more than two vertices needs max degree ≥ 2"));
    }
    for (lo, hi) in [p.theta, p.w] {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(invalid("weight ranges must satisfy 0 < lo ≤ hi < ∞"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| if lo == hi { lo } else { rng.gen_range(lo..hi) };
    let mut b = GraphBuilder::new();
    for i in 0..p.n {
        let th = draw(&mut rng, p.theta);
        b.add_vertex(i.to_string(), th);
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); p.n];
    fn add(b: &mut GraphBuilder, adj: &mut [Vec<usize>], u: usize, v: usize, w: f64) {
        b.add_edge(u, v, w);
        adj[u].push(v);
        adj[v].push(u);
    }
    for v in 1..p.n {
        let free: Vec<usize> = (0..v).filter(|&u| adj[u].len() < p.max_degree).collect();
        let u = free[rng.gen_range(0..free.len())];
        let w = draw(&mut rng, p.w);
        add(&mut b, &mut adj, u, v, w);
    }
    for _ in 0..p.n * p.max_degree / 2 {
        let u = rng.gen_range(0..p.n);
        let v = rng.gen_range(0..p.n);
        let w = draw(&mut rng, p.w);
        if u != v && adj[u].len() < p.max_degree && adj[v].len() < p.max_degree && !adj[u].contains(&v) {
            add(&mut b, &mut adj, u, v, w);
        }
    }
    b.build().map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::graph_to_json;

    #[test]
    fn family_sizes() {
        let g: Generator = "lattice:radius=3".parse().unwrap();
        let g = g.generate().unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (7, 6));
        assert!((0..7).all(|v| g.theta(v) == 1.0));
        let t = "tree:q=2,radius=2".parse::<Generator>().unwrap().generate().unwrap();
        assert_eq!(t.vertex_count(), 10);
    }

    #[test]
    fn random_is_deterministic_and_bounded() {
        let spec = "random:n=120,degree=5,theta=0.3..3,w=0.1..2,seed=11";
        let a = graph_to_json(&spec.parse::<Generator>().unwrap().generate().unwrap());
        let b = graph_to_json(&spec.parse::<Generator>().unwrap().generate().unwrap());
        assert_eq!(a, b);
        let g = spec.parse::<Generator>().unwrap().generate().unwrap();
        assert!((0..g.vertex_count()).all(|v| g.degree(v) <= 5));
        assert!(g.hop_distances(0).iter().all(|&d| d != graphheat_core::graph::UNREACHABLE));
    }

    #[test]
    fn bad_params() {
        assert!("lattice:radius=0".parse::<Generator>().unwrap().generate().is_err());
        assert!("tree:q=0,radius=2".parse::<Generator>().unwrap().generate().is_err());
        assert!("random:n=10,theta=2..1".parse::<Generator>().is_err());
        assert!("lattice:radius=3,foo=1".parse::<Generator>().is_err());
        assert!("torus:n=3".parse::<Generator>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["lattice:dim=1,radius=4", "tree:q=3,radius=2", "pair", "random:n=9,degree=3,theta=0.5..2,w=1..1,seed=4"] {
            let g: Generator = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
    }
}
