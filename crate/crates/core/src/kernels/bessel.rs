//! Modified Bessel functions of the first kind of integer order.

use crate::numeric::{ln_factorial, CompensatedSum};

use super::KernelError;

/// Series terms are summed until the remaining tail is below this fraction
/// of the partial sum.
const REL_STOP: f64 = 1e-17;

/// `(x/2)^{n+2k} / (k! (n+k)!)` as `(mantissa, log offset)`: computed as a
/// product where that stays in range (error ~ sqrt(n) ulp instead of the
/// `|ln T|` ulp of going through the logarithm).
fn peak_term(n: usize, k: usize, half: f64) -> (f64, f64) {
    let ln = (n + 2 * k) as f64 * libm::log(half) - ln_factorial(k) - ln_factorial(n + k);
    if half < 300.0 && ln > -700.0 && ln < 700.0 {
        let mut a = 1.0;
        for i in 1..=k {
            a *= half / i as f64;
        }
        let mut b = 1.0;
        for i in 1..=(n + k) {
            b *= half / i as f64;
        }
        (a * b, 0.0)
    } else {
        (1.0, ln)
    }
}

/// Sums `Σ_k T_k` with `T_{k+1}/T_k = (x/2)^2/((k+1)(n+k+1))`, relative to
/// the largest term. Returns `(T_peak, ln offset, Σ T_k / T_peak)`.
fn scaled_series(n: usize, half: f64) -> (f64, f64, f64) {
    let h2 = half * half;
    let nf = n as f64;
    let ratio = |k: f64| h2 / ((k + 1.0) * (nf + k + 1.0));
    // index of the largest term: last k with ratio(k-1) >= 1
    let disc = nf * nf + 4.0 * h2;
    let kp = libm::floor(0.5 * (libm::sqrt(disc) - nf)).max(0.0) as usize;
    let (peak, ln_off) = peak_term(n, kp, half);

    let mut sum = CompensatedSum::new();
    sum.add(1.0);
    // upwards from the peak
    let mut term = 1.0;
    let mut k = kp as f64;
    loop {
        let r = ratio(k);
        term *= r;
        sum.add(term);
        k += 1.0;
        let r_next = ratio(k);
        if r_next < 1.0 && term * r_next / (1.0 - r_next) < REL_STOP * sum.value() {
            break;
        }
    }
    // downwards: ratios only shrink further below the peak
    let mut term = 1.0;
    let mut k = kp;
    while k > 0 {
        term /= ratio((k - 1) as f64);
        sum.add(term);
        k -= 1;
        if term < REL_STOP * sum.value() {
            break;
        }
    }
    (peak, ln_off, sum.value())
}

fn check(x: f64) -> Result<(), KernelError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(KernelError::NonFiniteInput)
    }
}

fn parity(n: usize, x: f64) -> f64 {
    if x < 0.0 && n % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `I_n(x) = Σ_k (x/2)^{n+2k} / (k! (n+k)!)`.
pub fn bessel_i(n: usize, x: f64) -> Result<f64, KernelError> {
    check(x)?;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let (peak, ln_off, s) = scaled_series(n, libm::fabs(x) / 2.0);
    Ok(parity(n, x) * peak * libm::exp(ln_off) * s)
}

/// `e^{-|x|} I_n(x)`, finite for every finite `x`.
pub fn bessel_i_scaled(n: usize, x: f64) -> Result<f64, KernelError> {
    check(x)?;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let ax = libm::fabs(x);
    let (peak, ln_off, s) = scaled_series(n, ax / 2.0);
    Ok(parity(n, x) * peak * libm::exp(ln_off - ax) * s)
}
