//! Time convolutions on a uniform grid, by composite trapezoid.
//!
//! Two-point functions of time live on the nodes `s_i = i t/m`. A family
//! `F(·, y; s)` over all vertices is stored vertex-major: entry
//! `a·(m+1) + i` holds `F(a, y; s_i)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::WeightedGraph;

use super::EngineError;

/// Values of `z ↦ F(z; s)` on the cells of a spatial support and the nodes
/// of a uniform grid on `[0, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGridFunction {
    t_max: f64,
    m: usize,
    cells: Vec<usize>,
    values: Vec<f64>,
}

impl TimeGridFunction {
    /// Samples `f(z, s)` at every cell and node. Node 0 is `s = 0`, so `f`
    /// must return the `s → 0` limit there.
    pub fn sample<F>(cells: Vec<usize>, t_max: f64, m: usize, f: F) -> Self
    where
        F: Fn(usize, f64) -> f64,
    {
        let h = t_max / m as f64;
        let mut values = Vec::with_capacity(cells.len() * (m + 1));
        for &z in &cells {
            for i in 0..=m {
                values.push(f(z, i as f64 * h));
            }
        }
        TimeGridFunction { t_max, m, cells, values }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn value(&self, cell: usize, node: usize) -> f64 {
        self.values[cell * (self.m + 1) + node]
    }
}

fn trapezoid_pair(g: &WeightedGraph, f1: &TimeGridFunction, f2: &TimeGridFunction, stride: usize) -> f64 {
    let m = f1.m / stride;
    let h = f1.t_max / m as f64;
    let mut acc = 0.0;
    for j in 0..=m {
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        let mut s = 0.0;
        for (c, &z) in f1.cells.iter().enumerate() {
            s += f1.value(c, (m - j) * stride) * f2.value(c, j * stride) * g.theta(z);
        }
        acc += w * s;
    }
    h * acc
}

/// `(F₁ * F₂)(t_max) = ∫₀ᵗ Σ_z F₁(z; t − r) F₂(z; r) θ(z) dr` by composite
/// trapezoid. Returns the value and the Richardson estimate
/// `|T_m − T_{m/2}|/3` of its error (infinite when `m` is odd).
pub fn convolve(
    g: &WeightedGraph,
    f1: &TimeGridFunction,
    f2: &TimeGridFunction,
) -> Result<(f64, f64), EngineError> {
    if f1.m != f2.m || f1.t_max != f2.t_max || f1.m == 0 {
        return Err(EngineError::GridMismatch);
    }
    if f1.cells != f2.cells {
        return Err(EngineError::BallMismatch);
    }
    let full = trapezoid_pair(g, f1, f2, 1);
    let est = if f1.m % 2 == 0 {
        libm::fabs(full - trapezoid_pair(g, f1, f2, 2)) / 3.0
    } else {
        f64::INFINITY
    };
    Ok((full, est))
}

/// Kernel `K_k(a, z) = f(a, z; k h) θ(z)` for the stored pairs, one
/// contiguous run of `m + 1` lags per pair.
#[derive(Debug, Clone)]
pub(crate) struct LagKernel {
    pub m: usize,
    pub h: f64,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    /// Nonzero lag-0 entries per row, for the implicit trapezoid step.
    k0_offsets: Vec<usize>,
    k0: Vec<(usize, f64)>,
}

impl LagKernel {
    /// `pairs[a]` lists the `z` kept for row `a`; `value(a, z, s)` must
    /// already include the factor `θ(z)`.
    pub fn build<V>(pairs: &[Vec<usize>], t: f64, m: usize, value: V) -> Self
    where
        V: Fn(usize, usize, f64) -> f64 + Sync,
    {
        let h = t / m as f64;
        let mut offsets = Vec::with_capacity(pairs.len() + 1);
        let mut cols = Vec::new();
        offsets.push(0);
        for row in pairs {
            cols.extend_from_slice(row);
            offsets.push(cols.len());
        }
        let row_vals = |a: usize| -> Vec<f64> {
            let mut out = Vec::with_capacity(pairs[a].len() * (m + 1));
            for &z in &pairs[a] {
                for k in 0..=m {
                    out.push(value(a, z, k as f64 * h));
                }
            }
            out
        };
        let vals: Vec<f64> = map_rows(pairs.len(), row_vals).concat();
        let mut k0_offsets = Vec::with_capacity(pairs.len() + 1);
        let mut k0 = Vec::new();
        k0_offsets.push(0);
        for a in 0..pairs.len() {
            for p in offsets[a]..offsets[a + 1] {
                let v = vals[p * (m + 1)];
                if v != 0.0 {
                    k0.push((cols[p], v));
                }
            }
            k0_offsets.push(k0.len());
        }
        LagKernel { m, h, offsets, cols, vals, k0_offsets, k0 }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    fn lags(&self, p: usize) -> &[f64] {
        &self.vals[p * (self.m + 1)..(p + 1) * (self.m + 1)]
    }

    /// `max_a Σ_z |K_0(a, z)|`.
    pub fn k0_norm(&self) -> f64 {
        (0..self.rows())
            .map(|a| self.k0[self.k0_offsets[a]..self.k0_offsets[a + 1]].iter().map(|e| libm::fabs(e.1)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max_{a, i} Σ_z |K_i(a, z)|`, the grid estimate of `sup ‖f(a, ·)‖_{1,θ}`.
    pub fn norm1_estimate(&self) -> f64 {
        let m = self.m;
        let mut best = 0.0f64;
        for a in 0..self.rows() {
            let mut s = vec![0.0; m + 1];
            for p in self.offsets[a]..self.offsets[a + 1] {
                for (acc, &v) in s.iter_mut().zip(self.lags(p)) {
                    *acc += libm::fabs(v);
                }
            }
            best = s.iter().copied().fold(best, f64::max);
        }
        best
    }

    /// History part of the trapezoid sum at node `i` for row `a`:
    /// `Σ_z [½ K_i g(z, 0) + Σ_{0<j<i} K_{i−j} g(z, j)]`.
    #[inline]
    fn history(&self, a: usize, i: usize, g: &[f64]) -> f64 {
        let w = self.m + 1;
        let mut acc = 0.0;
        for p in self.offsets[a]..self.offsets[a + 1] {
            let k = self.lags(p);
            let gz = &g[self.cols[p] * w..self.cols[p] * w + w];
            let mut s = 0.5 * k[i] * gz[0];
            for j in 1..i {
                s += k[i - j] * gz[j];
            }
            acc += s;
        }
        acc
    }

    /// One convolution level `(T g)(a, s_i) = h Σ_j ω_j Σ_z K_{i−j}(a, z) g(z, s_j)`.
    pub fn apply_level(&self, g: &[f64]) -> Vec<f64> {
        let w = self.m + 1;
        let rows = map_rows(self.rows(), |a| {
            let mut out = vec![0.0; w];
            for (i, o) in out.iter_mut().enumerate().skip(1) {
                let mut s = self.history(a, i, g);
                for &(z, k) in &self.k0[self.k0_offsets[a]..self.k0_offsets[a + 1]] {
                    s += 0.5 * k * g[z * w + i];
                }
                *o = self.h * s;
            }
            out
        });
        rows.concat()
    }

    /// Solves `F = −g₁ − T F` by marching in time: the discrete Neumann
    /// series `Σ_{ℓ≥1} (−T)^{ℓ−1}(−g₁)` summed to all orders. Each step
    /// solves `(I + h/2 K_0) F_i = rhs` by fixed-point iteration, which
    /// contracts when `h ‖K_0‖/2 < 1`.
    pub fn volterra_solve(&self, g1: &[f64]) -> Vec<f64> {
        let n = self.rows();
        let w = self.m + 1;
        let mut f = vec![0.0; n * w];
        for a in 0..n {
            f[a * w] = -g1[a * w];
        }
        let half_h = 0.5 * self.h;
        for i in 1..=self.m {
            let rhs = map_rows(n, |a| -g1[a * w + i] - self.h * self.history(a, i, &f));
            let mut x = rhs.clone();
            for _ in 0..200 {
                let mut change = 0.0f64;
                let mut scale = 0.0f64;
                let next: Vec<f64> = (0..n)
                    .map(|a| {
                        let mut s = 0.0;
                        for &(z, k) in &self.k0[self.k0_offsets[a]..self.k0_offsets[a + 1]] {
                            s += k * x[z];
                        }
                        rhs[a] - half_h * s
                    })
                    .collect();
                for (old, new) in x.iter().zip(&next) {
                    change = change.max(libm::fabs(old - new));
                    scale = scale.max(libm::fabs(*new));
                }
                x = next;
                if change <= 1e-17 * scale || scale == 0.0 {
                    break;
                }
            }
            for a in 0..n {
                f[a * w + i] = x[a];
            }
        }
        f
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn map_rows<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_rows<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// `(f)^{*ℓ}(x, y; t)` on a grid with `m` intervals, by the level
/// recurrence: each level is computed at every node before the next.
/// `f(a, z, s)` is the two-point function (without the `θ(z)` factor).
/// Returns the value and the Richardson estimate against `m/2`.
pub fn iterated_convolution<F>(
    g: &WeightedGraph,
    f: F,
    ell: usize,
    x: usize,
    y: usize,
    t: f64,
    m: usize,
) -> Result<(f64, f64), EngineError>
where
    F: Fn(usize, usize, f64) -> f64 + Sync,
{
    let n = g.vertex_count();
    if x >= n || y >= n {
        return Err(EngineError::UnknownVertex);
    }
    if ell == 0 {
        return Err(EngineError::InvalidQuery("ℓ must be at least 1"));
    }
    if m < 2 || m % 2 == 1 {
        return Err(EngineError::GridMismatch);
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(EngineError::NegativeTime);
    }
    let run = |m: usize| -> f64 {
        let pairs: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
        let lk = LagKernel::build(&pairs, t, m, |a, z, s| f(a, z, s) * g.theta(z));
        let w = m + 1;
        let mut level = vec![0.0; n * w];
        for a in 0..n {
            for i in 0..=m {
                level[a * w + i] = f(a, y, i as f64 * lk.h);
            }
        }
        for _ in 1..ell {
            level = lk.apply_level(&level);
        }
        level[x * w + m]
    };
    let full = run(m);
    let half = run(m / 2);
    Ok((full, libm::fabs(full - half) / 3.0))
}
