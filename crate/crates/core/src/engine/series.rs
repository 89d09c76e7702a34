//! Truncation of the Neumann series.
//!
//! If `|f| ≤ C t^k` and `sup_x ‖f(x, ·)‖_{1,θ} ≤ N`, the ℓ-fold convolution
//! obeys `|f^{*ℓ}| ≤ C N^{ℓ−1} t^{k+ℓ−1}/(k+ℓ−1)!`.

use crate::numeric::ln_factorial;

/// `C N^{ℓ−1} t^{k+ℓ−1} / (k+ℓ−1)!` with `0^0 = 1`.
fn term(c: f64, n: f64, t: f64, k: usize, ell: usize) -> f64 {
    let p = k + ell - 1;
    let pow = |b: f64, e: usize| -> f64 {
        if e == 0 {
            0.0
        } else if b == 0.0 {
            f64::NEG_INFINITY
        } else {
            e as f64 * libm::log(b)
        }
    };
    libm::exp(libm::log(c) + pow(n, ell - 1) + pow(t, p) - ln_factorial(p))
}

/// `Σ_{ℓ > L} C N^{ℓ−1} t^{k+ℓ−1}/(k+ℓ−1)!`, summed until the terms decay
/// geometrically with ratio at most 1/2 and then closed with the geometric
/// majorant, so the result is an upper bound.
pub fn neumann_tail(c: f64, n: f64, t: f64, k: usize, order: usize) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut ell = order + 1;
    loop {
        let tl = term(c, n, t, k, ell);
        sum += tl;
        // ratio T_{ℓ+1}/T_ℓ = N t/(k+ℓ), decreasing in ℓ
        let ratio = n * t / (k + ell) as f64;
        if ratio <= 0.5 {
            let rest = tl * ratio / (1.0 - ratio);
            if rest <= 1e-17 * sum || (tl == 0.0 && ratio == 0.0) {
                return sum + rest;
            }
        }
        if !sum.is_finite() {
            return f64::INFINITY;
        }
        ell += 1;
    }
}

/// Smallest `L` with `Σ_{ℓ>L} C N^{ℓ−1} t^{k+ℓ−1}/(k+ℓ−1)! ≤ tol`.
///
/// `tol` must be positive; `C`, `N`, `t` nonnegative.
pub fn neumann_tail_order(c: f64, n: f64, t: f64, k: usize, tol: f64) -> usize {
    let tol = if tol > 0.0 { tol } else { f64::MIN_POSITIVE };
    // exponential search, then bisection: the tail is nonincreasing in L
    if neumann_tail(c, n, t, k, 0) <= tol {
        return 0;
    }
    let mut hi = 1usize;
    while neumann_tail(c, n, t, k, hi) > tol {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if neumann_tail(c, n, t, k, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force oracle: partial sums of 1/(ℓ−1)! against e.
    fn brute(tol: f64) -> usize {
        let mut fact = [1.0f64; 40];
        for i in 1..40 {
            fact[i] = fact[i - 1] * i as f64;
        }
        (0..30)
            .find(|&l| (l + 1..39).map(|ell| 1.0 / fact[ell - 1]).sum::<f64>() <= tol)
            .unwrap()
    }

    #[test]
    fn unit_constants() {
        assert_eq!(neumann_tail_order(1.0, 1.0, 1.0, 0, 1e-12), brute(1e-12));
        assert_eq!(neumann_tail_order(1.0, 1.0, 1.0, 0, 1e-12), 15);
    }

    #[test]
    fn whole_tail_below_tol() {
        let (c, n, t, k) = (2.0, 3.0, 0.5, 1);
        let tol = c * libm::exp(n * t) * t.powi(k as i32);
        assert_eq!(neumann_tail_order(c, n, t, k, tol), 0);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(neumann_tail(1.0, 1.0, 0.0, 0, 0), 1.0);
        assert_eq!(neumann_tail(1.0, 1.0, 0.0, 0, 1), 0.0);
        assert_eq!(neumann_tail_order(1.0, 1.0, 0.0, 1, 1e-12), 0);
        assert_eq!(neumann_tail_order(1.0, 0.0, 1.0, 0, 1e-12), 1);
    }

    proptest! {
        #[test]
        fn order_nonincreasing_as_t_shrinks(t in 0.01f64..3.0, s in 0.01f64..1.0, k in 0usize..3) {
            let a = neumann_tail_order(1.5, 4.0, t, k, 1e-10);
            let b = neumann_tail_order(1.5, 4.0, t * s, k, 1e-10);
            prop_assert!(b <= a);
        }

        #[test]
        fn tail_dominates_partial_sums(c in 0.1f64..5.0, n in 0.1f64..8.0, t in 0.01f64..2.0, k in 0usize..3, l in 0usize..20) {
            let direct: f64 = (l + 1..l + 200).map(|ell| term(c, n, t, k, ell)).sum();
            prop_assert!(neumann_tail(c, n, t, k, l) >= direct * (1.0 - 1e-12));
        }
    }
}
