//! Continuous-time random walk: holding rate `μ(x)/θ(x)`, jumps to `y` with
//! probability `w(x, y)/μ(x)`. The occupation probability of `y` at time `t`
//! is `θ(y) H(x, y; t)`.

use graphheat_core::WeightedGraph;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trajectories per generator stream.
const CHUNK: usize = 1 << 16;

fn walk(g: &WeightedGraph, x: usize, t: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut v = x;
    let mut clock = 0.0;
    loop {
        let mu = g.mu_of(v);
        if mu == 0.0 {
            return v;
        }
        let rate = mu / g.theta(v);
        // 1 − U lies in (0, 1], so the logarithm is finite
        let u: f64 = rng.gen();
        clock += -(1.0 - u).ln() / rate;
        if clock > t {
            return v;
        }
        let mut pick = rng.gen::<f64>() * mu;
        let mut next = v;
        for (z, w) in g.neighbors(v) {
            next = z;
            if pick < w {
                break;
            }
            pick -= w;
        }
        v = next;
    }
}

/// Occupation frequencies at time `t` of `n_samples` walks from `x`.
///
/// Stream `k` of `ChaCha8Rng::seed_from_u64(seed)` drives trajectories
/// `k·2¹⁶ .. (k+1)·2¹⁶`, so the result does not depend on the thread count.
pub fn ctrw_simulate(g: &WeightedGraph, x: usize, t: f64, n_samples: usize, seed: u64) -> Vec<f64> {
    let n = g.vertex_count();
    if n_samples == 0 {
        return vec![0.0; n];
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(n_samples - k * CHUNK);
            let mut c = vec![0u64; n];
            for _ in 0..len {
                c[walk(g, x, t, &mut rng)] += 1;
            }
            c
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (u, v) in a.iter_mut().zip(b) {
                    *u += v;
                }
                a
            },
        );
    counts.into_iter().map(|c| c as f64 / n_samples as f64).collect()
}

/// `√(p(1 − p)/n)`, floored at `1/n` so that rare states are not judged
/// against a zero error.
pub fn binomial_standard_error(p: f64, n: usize) -> f64 {
    let n = n as f64;
    (p * (1.0 - p) / n).sqrt().max(1.0 / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> WeightedGraph {
        graphheat_core::build_graph([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0)]).unwrap()
    }

    #[test]
    fn zero_time_keeps_mass_at_source() {
        let f = ctrw_simulate(&pair(), 1, 0.0, 1000, 3);
        assert_eq!(f, vec![0.0, 1.0]);
    }

    #[test]
    fn long_time_equilibrates() {
        let f = ctrw_simulate(&pair(), 0, 20.0, 200_000, 5);
        for p in f {
            assert!((p - 0.5).abs() < 3.0 * binomial_standard_error(0.5, 200_000));
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let g = graphheat_core::graph::families::lattice_window(1, 6).unwrap();
        let a = ctrw_simulate(&g, 6, 1.0, 150_000, 9);
        let b = ctrw_simulate(&g, 6, 1.0, 150_000, 9);
        assert_eq!(a, b);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
