//! The quadrature route for an arbitrary parametrix on a finite graph.
//!
//! With `f = L_x H` the correction is `F = Σ_{ℓ≥1} (−1)^ℓ f^{*ℓ}`, which
//! solves the Volterra equation `F = −f − f * F`. On a uniform grid the
//! trapezoid discretisation of that equation is the discrete Neumann series
//! summed to all orders, so it is marched forward in time once instead of
//! building the levels one by one. [`SeriesMode::Truncated`] builds the
//! levels explicitly and stops at the order chosen by the factorial tail.
//!
//! Pairs `(a, z)` whose `|f|` is provably tiny are dropped; the discarded
//! mass enters `spatial_tail_bound`. The time grid is refined by doubling and
//! the trapezoid values are Richardson extrapolated.

use alloc::vec;
use alloc::vec::Vec;

use crate::kernels::Parametrix;

use super::convolution::{map_rows, LagKernel};
use super::series::{neumann_tail, neumann_tail_order};
use super::{check_query, EngineError, KernelEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    /// Solve the discrete Volterra equation (all orders).
    Volterra,
    /// Sum the levels up to the order the factorial majorant requires.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralOptions {
    pub mode: SeriesMode,
    /// Initial number of intervals; raised if needed for the implicit step.
    pub m_start: usize,
    /// Refinement stops with `QuadratureNotConverged` beyond this.
    pub m_max: usize,
    /// Forces the truncation order (implies [`SeriesMode::Truncated`]).
    pub order: Option<usize>,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions { mode: SeriesMode::Volterra, m_start: 8, m_max: 1024, order: None }
    }
}

/// `H_G(x, y; t)` from parametrix `p` with default options.
pub fn heat_kernel_general<P: Parametrix + ?Sized>(
    p: &P,
    x: usize,
    y: usize,
    t: f64,
    tol: f64,
) -> Result<KernelEstimate, EngineError> {
    Ok(heat_kernel_general_many(p, &[x], y, t, tol, GeneralOptions::default())?.remove(0))
}

struct Sparsity {
    pairs: Vec<Vec<usize>>,
    /// `max_a Σ_dropped sup|f| θ`.
    e1: f64,
    /// `max` over dropped pairs of `sup|f|`.
    e_inf: f64,
}

fn sparsify(sups: &[Vec<(usize, f64)>], theta: &[f64], eps: f64) -> Sparsity {
    let mut e1 = 0.0f64;
    let mut e_inf = 0.0f64;
    let pairs = sups
        .iter()
        .map(|row| {
            let mut dropped = 0.0;
            let kept = row
                .iter()
                .filter_map(|&(z, s)| {
                    if s * theta[z] >= eps {
                        Some(z)
                    } else {
                        dropped += s * theta[z];
                        e_inf = e_inf.max(s);
                        None
                    }
                })
                .collect();
            e1 = e1.max(dropped);
            kept
        })
        .collect();
    Sparsity { pairs, e1, e_inf }
}

/// `|H * (F − F')|` for the perturbation `f → f'` of size `(e1, e∞)`:
/// Gronwall on `F − F' = −E − E*F − f'*(F − F')` gives
/// `t ‖H‖₁ (e∞ + e1 t C e^{Nt}) e^{Nt}`.
fn spatial_bound(h1: f64, sup_f: f64, n: f64, t: f64, e1: f64, e_inf: f64) -> f64 {
    if e1 == 0.0 && e_inf == 0.0 {
        return 0.0;
    }
    let grow = libm::exp(n * t);
    h1 * t * (e_inf + e1 * t * sup_f * grow) * grow
}

/// [`heat_kernel_general`] for several sources sharing target and time. The
/// correction column `F(·, y; ·)` is solved once.
pub fn heat_kernel_general_many<P: Parametrix + ?Sized>(
    p: &P,
    xs: &[usize],
    y: usize,
    t: f64,
    tol: f64,
    opts: GeneralOptions,
) -> Result<Vec<KernelEstimate>, EngineError> {
    check_query(t, tol)?;
    let g = p.graph();
    let n = g.vertex_count();
    if y >= n || xs.iter().any(|&x| x >= n) {
        return Err(EngineError::UnknownVertex);
    }
    if g.has_frontier() {
        return Err(EngineError::IncompleteGraph);
    }
    if opts.m_start == 0 || opts.m_max < opts.m_start {
        return Err(EngineError::InvalidQuery("grid sizes must satisfy 0 < m_start ≤ m_max"));
    }
    if t == 0.0 {
        return Ok(xs
            .iter()
            .map(|&x| {
                let v = p.eval(x, y, 0.0);
                KernelEstimate::exact(v, v)
            })
            .collect());
    }
    let theta = g.thetas();
    let k = p.order();
    let c = p.lh_bound(t);
    let sup_f = c * libm::pow(t, k as f64);
    let h1 = xs.iter().map(|&x| p.norm1(x, t)).fold(0.0, f64::max);

    let sups: Vec<Vec<(usize, f64)>> = map_rows(n, |a| {
        let mut cand = Vec::new();
        p.heat_op_candidates(a, &mut cand);
        cand.into_iter()
            .map(|z| (z, p.heat_op_sup(a, z, t)))
            .filter(|&(_, s)| s > 0.0)
            .collect()
    });

    // Grid estimate of sup_a ‖f(a, ·)‖₁ from a coarse sampling.
    let coarse: Vec<Vec<usize>> = sups.iter().map(|r| r.iter().map(|e| e.0).collect()).collect();
    let n_grid = LagKernel::build(&coarse, t, 16, |a, z, s| p.heat_op(a, z, s) * theta[z]).norm1_estimate();
    drop(coarse);

    let budget_spatial = tol / 4.0;
    let mut eps = tol * 1e-3;
    let sp = loop {
        let sp = sparsify(&sups, theta, eps);
        let bound = spatial_bound(h1, sup_f, n_grid + sp.e1, t, sp.e1, sp.e_inf);
        if bound <= budget_spatial {
            break (sp, bound);
        }
        if eps < 1e-300 {
            break (sparsify(&sups, theta, 0.0), 0.0);
        }
        eps *= 0.1;
    };
    let (sp, spatial) = sp;
    drop(sups);
    let n_eff = n_grid + sp.e1;

    let mode = if opts.order.is_some() { SeriesMode::Truncated } else { opts.mode };
    let (series_order, series_tail) = {
        let order = opts.order.unwrap_or_else(|| neumann_tail_order(c * h1, n_eff, t, k + 1, tol / 4.0));
        match mode {
            SeriesMode::Volterra => (order, 0.0),
            SeriesMode::Truncated => (order, neumann_tail(c * h1, n_eff, t, k + 1, order)),
        }
    };

    // trapezoid value of H + H*F for every source
    let solve = |m: usize| -> Vec<f64> {
        let lk = LagKernel::build(&sp.pairs, t, m, |a, z, s| p.heat_op(a, z, s) * theta[z]);
        let w = m + 1;
        let h = lk.h;
        let mut g1 = vec![0.0; n * w];
        for a in 0..n {
            for i in 0..=m {
                g1[a * w + i] = p.heat_op(a, y, i as f64 * h);
            }
        }
        let f = match mode {
            SeriesMode::Volterra => lk.volterra_solve(&g1),
            SeriesMode::Truncated => {
                if series_order == 0 {
                    return xs.iter().map(|&x| p.eval(x, y, t)).collect();
                }
                let mut acc: Vec<f64> = g1.iter().map(|v| -v).collect();
                let mut level = g1;
                let mut sign = -1.0;
                for _ in 1..series_order {
                    level = lk.apply_level(&level);
                    sign = -sign;
                    for (s, l) in acc.iter_mut().zip(&level) {
                        *s += sign * l;
                    }
                }
                acc
            }
        };
        xs.iter()
            .map(|&x| {
                let mut acc = 0.0;
                for j in 0..=m {
                    let wj = if j == 0 || j == m { 0.5 } else { 1.0 };
                    let r = t - j as f64 * h;
                    let mut s = 0.0;
                    for z in 0..n {
                        let fz = f[z * w + j];
                        if fz != 0.0 {
                            s += p.eval(x, z, r) * theta[z] * fz;
                        }
                    }
                    acc += wj * s;
                }
                p.eval(x, y, t) + h * acc
            })
            .collect()
    };

    // implicit step contracts when h ‖K_0‖/2 ≤ 1/4
    let k0 = LagKernel::build(&sp.pairs, t, 1, |a, z, _| p.heat_op(a, z, 0.0) * theta[z]).k0_norm();
    let mut m = opts.m_start.max(2);
    while t / m as f64 * k0 > 0.5 {
        m *= 2;
    }
    let t_first = solve(m);
    m *= 2;
    let mut t_prev = solve(m);
    let mut r_prev: Vec<f64> = t_prev.iter().zip(&t_first).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
    // Successive Romberg values can agree by accident before the h²
    // expansion is asymptotic, so each difference is guarded by the one
    // before it (the trapezoid estimate on the first level).
    let mut guard: Vec<f64> = t_prev.iter().zip(&t_first).map(|(a, b)| libm::fabs(a - b) / 3.0).collect();
    loop {
        m *= 2;
        let cur = solve(m);
        let r_cur: Vec<f64> = cur.iter().zip(&t_prev).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
        let diffs: Vec<f64> = r_cur.iter().zip(&r_prev).map(|(a, b)| libm::fabs(a - b)).collect();
        let ests: Vec<f64> = diffs.iter().zip(&guard).map(|(d, g)| d.max(*g)).collect();
        let worst = ests.iter().copied().fold(0.0, f64::max);
        if worst <= tol / 2.0 {
            return Ok(xs
                .iter()
                .zip(r_cur.iter().zip(&ests))
                .map(|(&x, (&value, &est))| KernelEstimate {
                    value,
                    series_order,
                    series_tail_bound: series_tail,
                    spatial_tail_bound: spatial,
                    quadrature_error_estimate: est,
                    total_bound: series_tail + spatial + est,
                    grid_nodes: m,
                    correction: value - p.eval(x, y, t),
                })
                .collect());
        }
        if m * 2 > opts.m_max {
            return Err(EngineError::QuadratureNotConverged { nodes: m, estimate: worst });
        }
        t_prev = cur;
        r_prev = r_cur;
        guard = diffs;
    }
}
