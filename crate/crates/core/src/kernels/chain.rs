//! Chain coefficients `c_ℓ(x, y) = Σ δ_x(z_1) δ_{z_1}(z_2) ⋯ δ_{z_{ℓ−1}}(y)`.

use alloc::vec::Vec;

use crate::engine::domain::zero_vector;
use crate::engine::ChainDomain;
use crate::numeric::Dd;

use super::KernelError;

/// Rows `(D^ℓ)_{x,·}` for `ℓ = 0..=ell`.
pub(crate) fn chain_rows<D: ChainDomain + ?Sized>(dom: &D, x: usize, ell: usize) -> Vec<Vec<Dd>> {
    let n = dom.cell_count();
    let mut rows = Vec::with_capacity(ell + 1);
    let mut v = zero_vector(n);
    v[x] = Dd::from_f64(1.0);
    rows.push(v);
    for _ in 0..ell {
        let mut next = zero_vector(n);
        dom.apply_delta(rows.last().unwrap(), 1.0, &mut next);
        rows.push(next);
    }
    rows
}

/// `c_ℓ(x, y) = (D^ℓ)_{xy}` by `ℓ` sparse applications of `δ`.
///
/// Fails with `RegionTooSmall` when a chain of length `ℓ` could reach the
/// frontier of a window and come back to `y`.
pub fn chain_coefficient<D: ChainDomain + ?Sized>(
    dom: &D,
    x: usize,
    y: usize,
    ell: usize,
) -> Result<f64, KernelError> {
    let n = dom.cell_count();
    if x >= n || y >= n || !dom.supports_source(x) {
        return Err(KernelError::UnknownVertex);
    }
    if let Some(limit) = dom.exact_order_limit(x, y) {
        if ell >= limit {
            return Err(KernelError::RegionTooSmall { order: ell, limit });
        }
    }
    Ok(chain_rows(dom, x, ell)[ell][y].to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::delta_kernel;
    use crate::graph::families::{lattice_window, tree_ball};
    use crate::RadialTree;

    #[test]
    fn first_order_is_delta() {
        let g = lattice_window(1, 6).unwrap();
        for x in 2..10 {
            for y in 0..13 {
                let c = chain_coefficient(&g, x, y, 1).unwrap();
                assert_eq!(c, delta_kernel(&g, x, y).unwrap());
            }
        }
    }

    #[test]
    fn below_distance_is_zero_and_z_second_order() {
        let g = lattice_window(1, 10).unwrap();
        let x = g.vertex("0").unwrap();
        assert_eq!(chain_coefficient(&g, x, g.vertex("3").unwrap(), 2).unwrap(), 0.0);
        assert_eq!(chain_coefficient(&g, x, x, 2).unwrap(), 6.0);
        assert_eq!(chain_coefficient(&g, x, g.vertex("2").unwrap(), 2).unwrap(), 1.0);
    }

    #[test]
    fn window_too_small() {
        let g = lattice_window(1, 3).unwrap();
        let x = g.vertex("0").unwrap();
        assert!(matches!(
            chain_coefficient(&g, x, x, 6),
            Err(KernelError::RegionTooSmall { .. })
        ));
    }

    #[test]
    fn radial_tree_matches_ball() {
        let g = tree_ball(2, 7).unwrap();
        let rt = RadialTree::new(2, 7);
        let d = g.hop_distances(0);
        for ell in 0..7 {
            for y in [0usize, 1, 4, 10, 22] {
                let a = chain_coefficient(&g, 0, y, ell).unwrap();
                let b = chain_coefficient(&rt, 0, d[y], ell).unwrap();
                assert_eq!(a, b, "ell={ell} y={y}");
            }
        }
    }
}
