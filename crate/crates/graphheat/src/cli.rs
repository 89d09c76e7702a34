//! The commands behind the `graphheat` binary. Each returns the text to
//! emit; the binary only parses flags, writes output and maps errors to
//! exit statuses.

use std::collections::VecDeque;
use std::fmt::Write as _;

use graphheat_core::engine::heat_kernel_general;
use graphheat_core::kernels::{tree_kernel_bounded, tree_walk_series};
use graphheat_core::metrics::{verify_metric, MetricReport};
use graphheat_core::{heat_kernel_dirac, lattice_z_kernel, EngineError, GaussianParametrix, KernelError, KernelEstimate, MetricKind, WeightedGraph};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Format, ParametrixChoice, RunConfig};
use crate::gen::Generator;
use crate::io::graph_to_json;
use crate::validation::{suite_run, SuiteReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("no closed form for this graph (use a lattice:dim=1 or tree generator)")]
    NoClosedFormForGraph,
}

impl CliError {
    /// 2 for configuration problems, 3 for resource limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) if e.is_resource_limit() => 3,
            _ => 2,
        }
    }
}

/// A command's text output and whether every deterministic check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub pass: bool,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, pass: true, warnings: Vec::new() }
    }
}

/// 17 significant digits, `.` as decimal separator.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("rows serialize");
    s.push('\n');
    s
}

pub fn cmd_gen(gen: &Generator) -> Result<Outcome, CliError> {
    let g = gen.generate().map_err(ConfigError::from)?;
    Ok(Outcome::ok(graph_to_json(&g)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeRow {
    pub x: String,
    pub y: String,
    pub t: f64,
    pub value: f64,
    pub series_tail: f64,
    pub spatial_tail: f64,
    pub quad_err: f64,
    pub total_bound: f64,
}

fn queries(cfg: &RunConfig, g: &WeightedGraph) -> Result<Vec<(usize, usize, f64)>, CliError> {
    let pairs = cfg.resolve_pairs(g)?;
    if pairs.is_empty() {
        return Err(crate::config::invalid("no queries: pass --pairs x:y,...").into());
    }
    Ok(pairs.iter().flat_map(|&(x, y)| cfg.t.iter().map(move |&t| (x, y, t))).collect())
}

fn evaluate(cfg: &RunConfig, g: &WeightedGraph, choice: ParametrixChoice, qs: &[(usize, usize, f64)]) -> Result<Vec<KernelEstimate>, CliError> {
    let results: Vec<Result<KernelEstimate, EngineError>> = match choice {
        ParametrixChoice::Dirac => qs.par_iter().map(|&(x, y, t)| heat_kernel_dirac(g, x, y, t, cfg.tol)).collect(),
        ParametrixChoice::Gaussian => {
            let m = cfg.build_metric(g)?;
            let p = GaussianParametrix::new(g, &m)?;
            qs.par_iter().map(|&(x, y, t)| heat_kernel_general(&p, x, y, t, cfg.tol)).collect()
        }
    };
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

/// Kernel values with their error budgets, one row per (pair, t) in input
/// order.
pub fn cmd_compute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.check()?;
    let g = cfg.load_graph()?;
    let qs = queries(cfg, &g)?;
    let est = evaluate(cfg, &g, cfg.parametrix, &qs)?;
    let rows: Vec<ComputeRow> = qs
        .iter()
        .zip(&est)
        .map(|(&(x, y, t), e)| ComputeRow {
            x: g.label(x).to_string(),
            y: g.label(y).to_string(),
            t,
            value: e.value,
            series_tail: e.series_tail_bound,
            spatial_tail: e.spatial_tail_bound,
            quad_err: e.quadrature_error_estimate,
            total_bound: e.total_bound,
        })
        .collect();
    let output = match cfg.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("x,y,t,value,series_tail,spatial_tail,quad_err,total_bound\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.x,
                    r.y,
                    num(r.t),
                    num(r.value),
                    num(r.series_tail),
                    num(r.spatial_tail),
                    num(r.quad_err),
                    num(r.total_bound)
                );
            }
            s
        }
    };
    Ok(Outcome::ok(output))
}

/// Runs the property suite; `pass` is false iff a deterministic check fails.
pub fn cmd_validate(cfg: &RunConfig) -> Result<(Outcome, SuiteReport), CliError> {
    cfg.check()?;
    let g = cfg.load_graph()?;
    let mut suite = cfg.suite.clone();
    if !cfg.pairs.is_empty() {
        suite.pairs = cfg.resolve_pairs(&g)?;
    }
    let report = suite_run(&g, &suite);
    let out = Outcome { output: to_json(&report), pass: report.pass, warnings: report.warnings.clone() };
    Ok((out, report))
}

/// Second route of `compare`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Against {
    /// Closed form of the generated family (ℤ window or tree ball).
    Closed,
    /// Tree closed form against the walk-count series (no graph needed
    /// beyond the family parameters).
    Walk,
    /// Dirac route against the Gaussian parametrix.
    Gaussian,
}

impl std::str::FromStr for Against {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "closed" => Ok(Against::Closed),
            "walk" => Ok(Against::Walk),
            "gaussian" => Ok(Against::Gaussian),
            other => Err(crate::config::invalid(format!("unknown comparison {other} (closed, walk, gaussian)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub x: String,
    pub y: String,
    pub t: f64,
    pub route_a: f64,
    pub route_b: f64,
    pub abs_diff: f64,
    pub combined_bound: f64,
    pub exceeds: bool,
}

/// Rounding allowance of the closed forms, relative to the value.
const CLOSED_FORM_ROUNDING: f64 = 1e-14;
const CLOSED_TAIL_TOL: f64 = 1e-15;

fn hops(g: &WeightedGraph, x: usize, y: usize) -> usize {
    let mut d = vec![usize::MAX; g.vertex_count()];
    let mut queue = VecDeque::from([x]);
    d[x] = 0;
    while let Some(v) = queue.pop_front() {
        for (u, _) in g.neighbors(v) {
            if d[u] == usize::MAX {
                d[u] = d[v] + 1;
                queue.push_back(u);
            }
        }
    }
    d[y]
}

/// Two routes per query with their difference and combined bound; `pass`
/// is false if any difference exceeds its bound.
pub fn cmd_compare(cfg: &RunConfig, against: Against) -> Result<Outcome, CliError> {
    cfg.check()?;
    let g = cfg.load_graph()?;
    let qs = queries(cfg, &g)?;
    let family = cfg.generator()?;
    // (route_a, bound_a, route_b, bound_b) per query
    let mut vals: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(qs.len());
    match against {
        Against::Gaussian => {
            let a = evaluate(cfg, &g, ParametrixChoice::Dirac, &qs)?;
            let b = evaluate(cfg, &g, ParametrixChoice::Gaussian, &qs)?;
            vals.extend(a.iter().zip(&b).map(|(a, b)| (a.value, a.total_bound, b.value, b.total_bound)));
        }
        Against::Closed => {
            if cfg.as_finite {
                return Err(CliError::NoClosedFormForGraph);
            }
            let closed: Vec<(f64, f64)> = match family {
                Some(Generator::Lattice { dim: 1, .. }) => qs
                    .iter()
                    .map(|&(x, y, t)| {
                        let lx: i64 = g.label(x).parse().expect("lattice labels are integers");
                        let ly: i64 = g.label(y).parse().expect("lattice labels are integers");
                        let v = lattice_z_kernel((lx - ly).unsigned_abs() as usize, t)?;
                        Ok((v, CLOSED_FORM_ROUNDING * v.abs()))
                    })
                    .collect::<Result<_, KernelError>>()?,
                Some(Generator::Tree { q, .. }) => qs
                    .iter()
                    .map(|&(x, y, t)| {
                        let c = tree_kernel_bounded(q, hops(&g, x, y), t, CLOSED_TAIL_TOL)?;
                        Ok((c.value, c.tail_bound + CLOSED_FORM_ROUNDING * c.value.abs()))
                    })
                    .collect::<Result<_, KernelError>>()?,
                _ => return Err(CliError::NoClosedFormForGraph),
            };
            let a = evaluate(cfg, &g, ParametrixChoice::Dirac, &qs)?;
            vals.extend(a.iter().zip(&closed).map(|(a, c)| (a.value, a.total_bound, c.0, c.1)));
        }
        Against::Walk => {
            let Some(Generator::Tree { q, .. }) = family else { return Err(CliError::NoClosedFormForGraph) };
            for &(x, y, t) in &qs {
                let r = hops(&g, x, y);
                let a = tree_kernel_bounded(q, r, t, CLOSED_TAIL_TOL)?;
                let b = tree_walk_series(q, r, t, CLOSED_TAIL_TOL)?;
                vals.push((
                    a.value,
                    a.tail_bound + CLOSED_FORM_ROUNDING * a.value.abs(),
                    b.value,
                    b.tail_bound + CLOSED_FORM_ROUNDING * b.value.abs(),
                ));
            }
        }
    }
    let rows: Vec<CompareRow> = qs
        .iter()
        .zip(&vals)
        .map(|(&(x, y, t), &(a, ba, b, bb))| {
            let diff = (a - b).abs();
            CompareRow {
                x: g.label(x).to_string(),
                y: g.label(y).to_string(),
                t,
                route_a: a,
                route_b: b,
                abs_diff: diff,
                combined_bound: ba + bb,
                exceeds: !(diff <= ba + bb),
            }
        })
        .collect();
    let pass = rows.iter().all(|r| !r.exceeds);
    let output = match cfg.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("x,y,t,route_a,route_b,abs_diff,combined_bound,exceeds\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.x,
                    r.y,
                    num(r.t),
                    num(r.route_a),
                    num(r.route_b),
                    num(r.abs_diff),
                    num(r.combined_bound),
                    r.exceeds
                );
            }
            s
        }
    };
    Ok(Outcome { output, pass, warnings: Vec::new() })
}

/// Closed-form family for `closed-form`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lattice,
    Tree { q: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormRow {
    pub r: usize,
    pub t: f64,
    pub value: f64,
    pub tail_bound: f64,
}

/// `H(r; t)` of ℤ or the `(q+1)`-regular tree as rows `(r, t, value, tail_bound)`.
pub fn cmd_closed_form(family: Family, rs: &[usize], ts: &[f64], tail_tol: f64, format: Format) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for &r in rs {
        for &t in ts {
            let (value, tail_bound) = match family {
                Family::Lattice => (lattice_z_kernel(r, t)?, 0.0),
                Family::Tree { q } => {
                    let c = tree_kernel_bounded(q, r, t, tail_tol)?;
                    (c.value, c.tail_bound)
                }
            };
            rows.push(ClosedFormRow { r, t, value, tail_bound });
        }
    }
    let output = match format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("r,t,value,tail_bound\n");
            for row in &rows {
                let _ = writeln!(s, "{},{},{},{}", row.r, num(row.t), num(row.value), num(row.tail_bound));
            }
            s
        }
    };
    Ok(Outcome::ok(output))
}

/// Largest region `metric` verifies (triangle checks are cubic).
pub const METRIC_REGION_LIMIT: usize = 500;

/// `verify_metric` on (up to [`METRIC_REGION_LIMIT`] vertices of) the graph,
/// as a JSON violation report.
pub fn cmd_metric(cfg: &RunConfig) -> Result<(Outcome, MetricReport), CliError> {
    cfg.check()?;
    let g = cfg.load_graph()?;
    let m = cfg.build_metric(&g)?;
    let region: Vec<usize> = if g.vertex_count() <= METRIC_REGION_LIMIT {
        (0..g.vertex_count()).collect()
    } else {
        let d = g.hop_distances(0);
        let mut order: Vec<usize> = (0..g.vertex_count()).collect();
        order.sort_by_key(|&v| (d[v], v));
        order.truncate(METRIC_REGION_LIMIT);
        order
    };
    let adapted = matches!(m.kind(), MetricKind::Normalized | MetricKind::Adapted);
    let report = verify_metric(&g, &m, &region, adapted).map_err(ConfigError::from)?;
    Ok((Outcome { output: to_json(&report), pass: report.pass, warnings: Vec::new() }, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(generator: &str, pairs: &[&str], t: &[f64]) -> RunConfig {
        RunConfig {
            generator: Some(generator.into()),
            pairs: pairs.iter().map(|s| s.to_string()).collect(),
            t: t.to_vec(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn compute_lattice_origin() {
        let c = cfg("lattice:radius=40", &["0:0"], &[1.0, 0.0]);
        let out = cmd_compute(&c).unwrap().output;
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "x,y,t,value,series_tail,spatial_tail,quad_err,total_bound");
        let f: Vec<&str> = lines[1].split(',').collect();
        let v: f64 = f[3].parse().unwrap();
        let bound: f64 = f[7].parse().unwrap();
        assert!((v - 0.308508322553671).abs() <= bound);
        assert!(f[7].parse::<f64>().unwrap() <= 1e-10);
        let f: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(f[3].parse::<f64>().unwrap(), 1.0);
        assert_eq!(cmd_compute(&c).unwrap().output, out);
    }

    #[test]
    fn window_too_small_is_resource_limit() {
        let c = cfg("lattice:radius=3", &["0:0"], &[5.0]);
        assert_eq!(cmd_compute(&c).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn compare_without_closed_form() {
        let c = cfg("random:n=10,seed=1", &["0:1"], &[1.0]);
        let e = cmd_compare(&c, Against::Closed).unwrap_err();
        assert!(matches!(e, CliError::NoClosedFormForGraph));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn closed_form_rows() {
        let out = cmd_closed_form(Family::Tree { q: 2 }, &[0, 1], &[1.0], 1e-12, Format::Csv).unwrap().output;
        assert_eq!(out.lines().count(), 3);
        assert!(out.starts_with("r,t,value,tail_bound\n0,"));
    }
}
