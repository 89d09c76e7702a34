//! `H = exp(−tΔ)` on a finite graph by dense symmetric eigendecomposition.
//!
//! With `Θ = diag(θ)` the matrix `S = Θ^{1/2} Δ Θ^{−1/2}` is symmetric,
//! `S_xx = μ(x)/θ(x)`, `S_xy = −w(x, y)/√(θ(x)θ(y))`, and
//! `H(x, y; t) = [exp(−tS)]_{xy} / √(θ(x)θ(y))`.

use graphheat_core::engine::dirac_plan;
use graphheat_core::{heat_kernel_dirac, WeightedGraph};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{OracleResult, ValidationError};

/// Largest graph the dense oracle accepts.
pub const DENSE_LIMIT: usize = 4000;

pub struct MatexpOracle {
    n: usize,
    sqrt_theta: Vec<f64>,
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

impl MatexpOracle {
    /// Diagonalises the window Laplacian, treating the graph as finite.
    pub fn new(g: &WeightedGraph) -> Result<Self, ValidationError> {
        let n = g.vertex_count();
        if n > DENSE_LIMIT {
            return Err(ValidationError::TooLarge { n, limit: DENSE_LIMIT });
        }
        let sqrt_theta: Vec<f64> = g.thetas().iter().map(|t| t.sqrt()).collect();
        let mut s = DMatrix::<f64>::zeros(n, n);
        for x in 0..n {
            s[(x, x)] = g.mu_of(x) / g.theta(x);
            for (y, w) in g.neighbors(x) {
                s[(x, y)] = -w / (sqrt_theta[x] * sqrt_theta[y]);
            }
        }
        let eig = SymmetricEigen::new(s);
        Ok(MatexpOracle { n, sqrt_theta, vectors: eig.eigenvectors, values: eig.eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn kernel(&self, x: usize, y: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.n {
            acc += self.vectors[(x, k)] * self.vectors[(y, k)] * (-t * self.values[k]).exp();
        }
        acc / (self.sqrt_theta[x] * self.sqrt_theta[y])
    }

    /// `H(x, ·; t)` for every vertex.
    pub fn row(&self, x: usize, t: f64) -> Vec<f64> {
        let decay: Vec<f64> = (0..self.n).map(|k| self.vectors[(x, k)] * (-t * self.values[k]).exp()).collect();
        (0..self.n)
            .map(|y| {
                let s: f64 = (0..self.n).map(|k| self.vectors[(y, k)] * decay[k]).sum();
                s / (self.sqrt_theta[x] * self.sqrt_theta[y])
            })
            .collect()
    }
}

/// `H(x, ·; t)` for graphs too large for the dense oracle.
///
/// Applies `exp(−tS)` to the unit vector at `x` in `s` steps of length
/// `τ = t/s` with `τ‖S‖_∞ ≤ 1/2`, each a Taylor polynomial cut where the
/// remainder `‖v‖ Σ_{j>K} 2^{−j}/j!` falls below `10⁻¹⁸‖v‖`. The graph is
/// treated as finite.
pub fn expm_row(g: &WeightedGraph, x: usize, t: f64) -> Result<Vec<f64>, ValidationError> {
    let n = g.vertex_count();
    if x >= n {
        return Err(ValidationError::UnknownVertex);
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(ValidationError::InvalidTime);
    }
    let sq: Vec<f64> = g.thetas().iter().map(|t| t.sqrt()).collect();
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|a| {
                let mut acc = g.mu_of(a) / g.theta(a) * v[a];
                for (b, w) in g.neighbors(a) {
                    acc -= w / (sq[a] * sq[b]) * v[b];
                }
                acc
            })
            .collect()
    };
    let norm = (0..n)
        .map(|a| g.mu_of(a) / g.theta(a) + g.neighbors(a).map(|(b, w)| w / (sq[a] * sq[b])).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = (2.0 * t * norm).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut v = vec![0.0; n];
    v[x] = 1.0;
    for _ in 0..steps {
        let mut term = v.clone();
        let mut sum = v.clone();
        // remainder after K terms ≤ 2^{−K}/K! · 2 (with τ‖S‖ ≤ 1/2)
        let mut k = 1usize;
        let mut bound = 1.0f64;
        loop {
            term = apply(&term);
            let c = -tau / k as f64;
            for (s, u) in sum.iter_mut().zip(term.iter_mut()) {
                *u *= c;
                *s += *u;
            }
            bound *= 0.5 / k as f64;
            if 2.0 * bound <= 1e-18 {
                break;
            }
            k += 1;
        }
        v = sum;
    }
    Ok((0..n).map(|y| v[y] / (sq[x] * sq[y])).collect())
}

/// `H(x, y; t)` of the graph the window was cut from.
///
/// On a window the comparison is only meaningful while the Dirac series
/// order needed for `10⁻¹²` stays inside the window (chain locality); past
/// that the call fails with `WindowTooSmall`.
pub fn matexp_oracle(g: &WeightedGraph, x: usize, y: usize, t: f64) -> Result<f64, ValidationError> {
    let n = g.vertex_count();
    if x >= n || y >= n {
        return Err(ValidationError::UnknownVertex);
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(ValidationError::InvalidTime);
    }
    if t == 0.0 {
        return Ok(if x == y { 1.0 / g.theta(x) } else { 0.0 });
    }
    if let Some(limit) = g.chain_exact_limit(x, y) {
        let order = dirac_plan(g, t, 1e-12).total_order();
        if order >= limit {
            return Err(ValidationError::WindowTooSmall { order, limit });
        }
    }
    Ok(MatexpOracle::new(g)?.kernel(x, y, t))
}

/// Dirac route against the oracle, with `oracle_tolerance` added to the
/// engine's own bound.
pub fn compare_with_oracle(
    g: &WeightedGraph,
    oracle: &MatexpOracle,
    x: usize,
    y: usize,
    t: f64,
    tol: f64,
    oracle_tolerance: f64,
) -> Result<OracleResult, ValidationError> {
    let est = heat_kernel_dirac(g, x, y, t, tol)?;
    Ok(OracleResult::new((x, y, t), oracle.kernel(x, y, t), est.value, est.total_bound, oracle_tolerance))
}
