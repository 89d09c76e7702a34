//! Heat-equation residual `Δ_x H + ∂_t H` with a centred time difference.

use graphheat_core::graph::apply_laplacian;
use graphheat_core::WeightedGraph;

use super::ValidationError;

/// `|Δ_x H(·, y; t)(x) + (H(x, y; t+h) − H(x, y; t−h))/(2h)|`, where
/// `kernel(z, y, s)` returns `H(z, y; s)`.
pub fn residual_check<K>(g: &WeightedGraph, kernel: K, x: usize, y: usize, t: f64, h: f64) -> Result<f64, ValidationError>
where
    K: Fn(usize, usize, f64) -> Result<f64, ValidationError>,
{
    let n = g.vertex_count();
    if x >= n || y >= n {
        return Err(ValidationError::UnknownVertex);
    }
    if !(h > 0.0 && t - h > 0.0 && t.is_finite()) {
        return Err(ValidationError::InvalidStep);
    }
    let mut vals = vec![(x, kernel(x, y, t)?)];
    for (z, _) in g.neighbors(x) {
        vals.push((z, kernel(z, y, t)?));
    }
    let lap = apply_laplacian(g, |z| vals.iter().find(|e| e.0 == z).map(|e| e.1), x)
        .expect("values supplied for x and its neighbours");
    let dt = (kernel(x, y, t + h)? - kernel(x, y, t - h)?) / (2.0 * h);
    Ok((lap + dt).abs())
}
