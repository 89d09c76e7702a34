//! The Dirac route: `H_G(x, y; t) = Σ_ℓ (−t)^ℓ/ℓ! (D^ℓ)_{xy} / θ(y)`.
//!
//! The chain sums `(D^ℓ)_{x,·}` are built by repeated sparse application of
//! `δ`. Terms alternate in sign and grow like `(2At)^ℓ/ℓ!` before they
//! decay, so everything is accumulated in double-double, and long times are
//! split into steps `s` with `2As ≤ 32` joined by the semigroup property.

use alloc::vec::Vec;

use crate::numeric::Dd;

use super::domain::{zero_vector, ChainDomain};
use super::series::{neumann_tail, neumann_tail_order};
use super::{check_query, EngineError, KernelEstimate};

/// Constants of the factorial majorant: `(C, N)` with `C = A/inf θ`
/// bounding `|δ_x(y)/θ(y)|` and `N = 2A` bounding its `L¹(θ)` norm.
fn majorant(dom: &(impl ChainDomain + ?Sized)) -> (f64, f64) {
    let a = dom.laplacian_bound();
    (a / dom.theta_inf(), 2.0 * a)
}

/// `Σ_{ℓ=0}^{L} (−t)^ℓ/ℓ! (D^ℓ)_{x,·}`, i.e. `θ(y)` times the partial sum
/// of the kernel, for every cell `y`.
pub fn dirac_partial_sums<D: ChainDomain + ?Sized>(dom: &D, x: usize, t: f64, order: usize) -> Vec<Dd> {
    let mut v = zero_vector(dom.cell_count());
    v[x] = Dd::from_f64(1.0);
    series_step(dom, v, t, order)
}

/// `w ↦ Σ_{ℓ≤L} (−s)^ℓ/ℓ! w D^ℓ` on a row vector.
fn series_step<D: ChainDomain + ?Sized>(dom: &D, w: Vec<Dd>, s: f64, order: usize) -> Vec<Dd> {
    let n = dom.cell_count();
    let mut v = w;
    let mut sum = v.clone();
    for ell in 1..=order {
        let mut next = zero_vector(n);
        dom.apply_delta(&v, 1.0, &mut next);
        // a rounded f64 step factor would leave coefficient errors of
        // order ℓ·ε on terms as large as e^{2As}
        let step = Dd::quotient(-s, ell as f64);
        for (acc, u) in sum.iter_mut().zip(next.iter_mut()) {
            *u = *u * step;
            *acc += *u;
        }
        v = next;
    }
    sum
}

/// Largest `2A·s` in one step.
const STEP_SPAN: f64 = 32.0;
/// Rounding allowance per unit of term mass and per term (about 20 units
/// of double-double roundoff).
const DD_ROUNDING: f64 = 1e-30;

/// How a Dirac evaluation is carried out: `steps` applications of the
/// series truncated at `step_order`, with a pointwise bound on the error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracPlan {
    pub steps: usize,
    pub step_order: usize,
    pub bound: f64,
}

impl DiracPlan {
    /// Number of `δ` applications, which is what chain locality limits.
    pub fn total_order(&self) -> usize {
        self.steps * self.step_order
    }
}

/// Plan for time `t` and tolerance `tol`.
///
/// With `w̃` the computed row and `w` the exact one, one step adds at most
/// `τ ‖w̃‖₁` to `sup_y |w̃ − w|(y)/θ(y)` and `ρ ‖w̃‖₁` to `‖w̃ − w‖₁`, where `τ`
/// is the pointwise and `ρ` the `ℓ¹` tail of the step series; the exact step
/// contracts both norms. Summing gives `τ ((1 + ρ)^k − 1)/ρ`.
pub fn dirac_plan<D: ChainDomain + ?Sized>(dom: &D, t: f64, tol: f64) -> DiracPlan {
    let (c, n) = majorant(dom);
    let steps = libm::ceil(n * t / STEP_SPAN).max(1.0) as usize;
    let s = t / steps as f64;
    let target = if steps == 1 { tol } else { tol / (2 * steps) as f64 };
    let order = neumann_tail_order(c, n, s, 1, target);
    let tau = neumann_tail(c, n, s, 1, order);
    let rho = neumann_tail(n, n, s, 1, order);
    let growth = if rho > 0.0 { (libm::pow(1.0 + rho, steps as f64) - 1.0) / rho } else { steps as f64 };
    let rounding = DD_ROUNDING * (order + 1) as f64 * libm::exp(n * s) * libm::pow(1.0 + rho, steps as f64) * steps as f64
        / dom.theta_inf();
    DiracPlan { steps, step_order: order, bound: tau * growth + rounding }
}

/// Order and tail bound chosen for tolerance `tol`.
///
/// Convolving with `H` (with `‖H(x, ·)‖_{1,θ} = 1`) raises the order of the
/// majorant by one, so the tail is evaluated with `k = 1`.
pub fn dirac_order<D: ChainDomain + ?Sized>(dom: &D, t: f64, tol: f64) -> (usize, f64) {
    let (c, n) = majorant(dom);
    let order = neumann_tail_order(c, n, t, 1, tol);
    (order, neumann_tail(c, n, t, 1, order))
}

/// `H_G(x, y; t)` from the Dirac parametrix.
pub fn heat_kernel_dirac<D: ChainDomain + ?Sized>(
    dom: &D,
    x: usize,
    y: usize,
    t: f64,
    tol: f64,
) -> Result<KernelEstimate, EngineError> {
    Ok(heat_kernel_dirac_many(dom, x, &[y], t, tol)?.remove(0))
}

/// [`heat_kernel_dirac`] for several targets sharing source and time.
pub fn heat_kernel_dirac_many<D: ChainDomain + ?Sized>(
    dom: &D,
    x: usize,
    ys: &[usize],
    t: f64,
    tol: f64,
) -> Result<Vec<KernelEstimate>, EngineError> {
    check_query(t, tol)?;
    let n = dom.cell_count();
    if x >= n || ys.iter().any(|&y| y >= n) {
        return Err(EngineError::UnknownVertex);
    }
    if !dom.supports_source(x) {
        return Err(EngineError::UnsupportedSource);
    }
    let h0 = |y: usize| if y == x { 1.0 / dom.theta(x) } else { 0.0 };
    if t == 0.0 {
        return Ok(ys.iter().map(|&y| KernelEstimate::exact(h0(y), h0(y))).collect());
    }
    let plan = dirac_plan(dom, t, tol);
    let (order, tail) = (plan.total_order(), plan.bound);
    for &y in ys {
        if let Some(limit) = dom.exact_order_limit(x, y) {
            if order >= limit {
                return Err(EngineError::RegionTooSmall { order, limit });
            }
        }
    }
    let s = t / plan.steps as f64;
    let mut sums = zero_vector(n);
    sums[x] = Dd::from_f64(1.0);
    for _ in 0..plan.steps {
        sums = series_step(dom, sums, s, plan.step_order);
    }
    Ok(ys
        .iter()
        .map(|&y| {
            let value = sums[y].to_f64() / dom.theta(y);
            KernelEstimate {
                value,
                series_order: order,
                series_tail_bound: tail,
                spatial_tail_bound: 0.0,
                quadrature_error_estimate: 0.0,
                total_bound: tail,
                grid_nodes: 0,
                correction: value - h0(y),
            }
        })
        .collect())
}

/// Leading small-time term `(−1)^r t^r/r! c_r(x, y)/θ(y)`, `r = d(x, y) ≥ 1`,
/// and a bound on `|H_G(x, y; t) − leading term|` from the tail of the
/// Dirac series.
pub fn small_time_leading_term<D: ChainDomain + ?Sized>(
    dom: &D,
    x: usize,
    y: usize,
    t: f64,
) -> Result<(f64, f64), EngineError> {
    check_query(t, 1.0)?;
    let n = dom.cell_count();
    if x >= n || y >= n {
        return Err(EngineError::UnknownVertex);
    }
    if !dom.supports_source(x) {
        return Err(EngineError::UnsupportedSource);
    }
    if x == y {
        return Err(EngineError::InvalidQuery("leading term needs x ≠ y"));
    }
    // the distance is the first order with a nonzero chain coefficient
    // (all shortest chains carry the same sign)
    let mut v = zero_vector(n);
    v[x] = Dd::from_f64(1.0);
    let mut r = 0;
    while v[y].hi == 0.0 {
        if r == n {
            return Err(EngineError::InvalidQuery("y is not reachable from x"));
        }
        let mut next = zero_vector(n);
        dom.apply_delta(&v, 1.0, &mut next);
        v = next;
        r += 1;
    }
    if let Some(limit) = dom.exact_order_limit(x, y) {
        if r >= limit {
            return Err(EngineError::RegionTooSmall { order: r, limit });
        }
    }
    let c_r = v[y].to_f64();
    let mut lead = c_r / dom.theta(y);
    for i in 1..=r {
        lead *= -t / i as f64;
    }
    let (c, nn) = majorant(dom);
    Ok((lead, neumann_tail(c, nn, t, 1, r)))
}
