//! Reference kernels with θ ≡ 1, w ≡ 1: the integer lattice and the
//! `(q+1)`-regular tree.

use alloc::vec;
use alloc::vec::Vec;

use crate::numeric::{ln_factorial, CompensatedSum};

use super::bessel::bessel_i_scaled;
use super::KernelError;

fn check_time(t: f64) -> Result<(), KernelError> {
    if !t.is_finite() {
        return Err(KernelError::NonFiniteInput);
    }
    if t < 0.0 {
        return Err(KernelError::NegativeTime);
    }
    Ok(())
}

/// `H_ℤ(j; t) = e^{-2t} I_j(2t)`.
pub fn lattice_z_kernel(j: usize, t: f64) -> Result<f64, KernelError> {
    check_time(t)?;
    bessel_i_scaled(j, 2.0 * t)
}

/// `b_k(r)` for `k = 0..=k_max`: walks of length `k` between two vertices
/// at distance `r` in the `(q+1)`-regular tree.
pub fn tree_walk_counts(q: usize, r: usize, k_max: usize) -> Result<Vec<f64>, KernelError> {
    if q == 0 {
        return Err(KernelError::InvalidParameter("q must be at least 1"));
    }
    let qf = q as f64;
    // b_k(s) for s up to k_max + r is enough: a walk of length k moves at
    // most k shells.
    let width = k_max + r + 2;
    let mut cur = vec![0.0; width];
    let mut next = vec![0.0; width];
    cur[0] = 1.0;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(cur[r]);
    for _ in 0..k_max {
        next[0] = (qf + 1.0) * cur[1];
        for s in 1..width - 1 {
            next[s] = cur[s - 1] + qf * cur[s + 1];
        }
        next[width - 1] = cur[width - 2];
        core::mem::swap(&mut cur, &mut next);
        out.push(cur[r]);
    }
    Ok(out)
}

/// Value of a closed-form kernel with the bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Number of series terms used.
    pub terms: usize,
}

/// Heat kernel of the `(q+1)`-regular tree at distance `r`:
///
/// ```text
/// e^{-(q+1)t} [ q^{-r/2} I_r(z) − (q−1) Σ_{j≥1} q^{-(r+2j)/2} I_{r+2j}(z) ],  z = 2√q t
/// ```
///
/// The series stops at the first `J` whose tail majorant
/// `e^{-(q+1)t} q^{-r/2-J} I_{r+2J+2}(z)` is at most `tail_tol`; the majorant
/// uses that `I_ν(z)` decreases in `ν` and sums the geometric factor `q^{-j}`.
pub fn tree_kernel_bounded(q: usize, r: usize, t: f64, tail_tol: f64) -> Result<ClosedFormValue, KernelError> {
    check_time(t)?;
    if q == 0 {
        return Err(KernelError::InvalidParameter("q must be at least 1"));
    }
    if !(tail_tol > 0.0) {
        return Err(KernelError::InvalidParameter("tail_tol must be positive"));
    }
    if t == 0.0 {
        let v = if r == 0 { 1.0 } else { 0.0 };
        return Ok(ClosedFormValue { value: v, tail_bound: 0.0, terms: 1 });
    }
    let qf = q as f64;
    let sq = libm::sqrt(qf);
    let z = 2.0 * sq * t;
    // e^{-(q+1)t} I(z) = e^{-(√q−1)² t} · (e^{-z} I(z))
    let damp = libm::exp(-(sq - 1.0) * (sq - 1.0) * t);
    let ln_q = libm::log(qf);
    let scale = |p: f64| damp * libm::exp(-p * ln_q);

    let mut acc = CompensatedSum::new();
    acc.add(scale(r as f64 / 2.0) * bessel_i_scaled(r, z)?);
    if q == 1 {
        return Ok(ClosedFormValue { value: acc.value(), tail_bound: 0.0, terms: 1 });
    }
    let mut j = 0usize;
    loop {
        let tail = scale(r as f64 / 2.0 + j as f64) * bessel_i_scaled(r + 2 * j + 2, z)?;
        if tail <= tail_tol {
            return Ok(ClosedFormValue { value: acc.value(), tail_bound: tail, terms: j + 1 });
        }
        j += 1;
        let term = scale((r + 2 * j) as f64 / 2.0) * bessel_i_scaled(r + 2 * j, z)?;
        acc.add(-(qf - 1.0) * term);
    }
}

/// [`tree_kernel_bounded`] without the bookkeeping.
pub fn tree_kernel(q: usize, r: usize, t: f64, tail_tol: f64) -> Result<f64, KernelError> {
    tree_kernel_bounded(q, r, t, tail_tol).map(|v| v.value)
}

/// The same kernel from walk counts: `e^{-(q+1)t} Σ_k b_k(r) t^k / k!`.
///
/// All terms are nonnegative; the tail is bounded by the Poisson tail
/// `Σ_{k>K} e^{-λ} λ^k / k!`, `λ = (q+1)t`, since `b_k(r) ≤ (q+1)^k`.
pub fn tree_walk_series(q: usize, r: usize, t: f64, tail_tol: f64) -> Result<ClosedFormValue, KernelError> {
    check_time(t)?;
    if q == 0 {
        return Err(KernelError::InvalidParameter("q must be at least 1"));
    }
    if t == 0.0 {
        let v = if r == 0 { 1.0 } else { 0.0 };
        return Ok(ClosedFormValue { value: v, tail_bound: 0.0, terms: 1 });
    }
    let lambda = (q as f64 + 1.0) * t;
    // Poisson weight e^{-λ} λ^k / k!; stop once the geometric tail bound
    // of the remaining weights is below tail_tol.
    let weight = |k: usize| libm::exp(k as f64 * libm::log(lambda) - ln_factorial(k) - lambda);
    let mut k_max = r;
    loop {
        let ratio = lambda / (k_max as f64 + 2.0);
        if k_max as f64 + 1.0 > lambda && ratio < 1.0 {
            let tail = weight(k_max + 1) / (1.0 - ratio);
            if tail <= tail_tol {
                break;
            }
        }
        k_max += 1;
    }
    let b = tree_walk_counts(q, r, k_max)?;
    let ln_t = libm::log(t);
    let mut acc = CompensatedSum::new();
    for (k, &bk) in b.iter().enumerate() {
        if bk != 0.0 {
            acc.add(bk * libm::exp(k as f64 * ln_t - ln_factorial(k) - lambda));
        }
    }
    let ratio = lambda / (k_max as f64 + 2.0);
    Ok(ClosedFormValue {
        value: acc.value(),
        tail_bound: weight(k_max + 1) / (1.0 - ratio),
        terms: k_max + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_initial_condition_and_value() {
        assert_eq!(lattice_z_kernel(0, 0.0).unwrap(), 1.0);
        assert_eq!(lattice_z_kernel(2, 0.0).unwrap(), 0.0);
        let v = lattice_z_kernel(0, 1.0).unwrap();
        assert!((v - 0.308_508_322_553_671).abs() < 1e-14);
        assert_eq!(lattice_z_kernel(0, -1.0), Err(KernelError::NegativeTime));
    }

    #[test]
    fn lattice_mass_is_one() {
        for &t in &[0.1, 1.0, 5.0] {
            let s: f64 = lattice_z_kernel(0, t).unwrap()
                + 2.0 * (1..200).map(|j| lattice_z_kernel(j, t).unwrap()).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-13, "t={t}: {s}");
        }
    }

    #[test]
    fn walk_count_examples() {
        for q in 1..5 {
            let b0 = tree_walk_counts(q, 0, 6).unwrap();
            assert_eq!(b0[0], 1.0);
            assert_eq!(b0[2], (q + 1) as f64);
            let b1 = tree_walk_counts(q, 1, 6).unwrap();
            assert_eq!(b1[1], 1.0);
            for r in 0..5 {
                let b = tree_walk_counts(q, r, 12).unwrap();
                for (k, &v) in b.iter().enumerate() {
                    if k < r || (k - r) % 2 == 1 {
                        assert_eq!(v, 0.0, "q={q} r={r} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn tree_examples() {
        assert_eq!(tree_kernel(2, 0, 0.0, 1e-12).unwrap(), 1.0);
        for r in 0..5 {
            for &t in &[0.3, 1.0, 2.5] {
                let a = tree_kernel(1, r, t, 1e-14).unwrap();
                let b = lattice_z_kernel(r, t).unwrap();
                assert_eq!(a, b);
            }
        }
        let walk = tree_walk_series(2, 1, 0.5, 1e-16).unwrap();
        let tk = tree_kernel(2, 1, 0.5, 1e-14).unwrap();
        assert!((walk.value - tk).abs() < 1e-13, "{} vs {}", walk.value, tk);
    }
}
