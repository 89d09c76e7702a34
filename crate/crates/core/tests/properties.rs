use graphheat_core::engine::{dirac_partial_sums, heat_kernel_dirac_many};
use graphheat_core::graph::{apply_laplacian, GraphBuilder};
use graphheat_core::numeric::Dd;
use graphheat_core::{bessel_i, lattice_z_kernel, neumann_tail_order, tree_kernel, Metric, WeightedGraph};
use proptest::prelude::*;

/// Connected graph: a random recursive tree plus extra edges.
fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(0.2f64..3.0, n),
                prop::collection::vec((0usize..1000, 0.1f64..2.0), n - 1),
                prop::collection::vec((0usize..1000, 0usize..1000, 0.1f64..2.0), 0..n),
            )
        })
        .prop_map(|(n, theta, tree, extra)| {
            let mut b = GraphBuilder::new();
            for (i, &t) in theta.iter().enumerate() {
                b.add_vertex(i.to_string(), t);
            }
            let mut seen = std::collections::BTreeSet::new();
            for (i, &(p, w)) in tree.iter().enumerate() {
                let v = i + 1;
                let u = p % v;
                seen.insert((u, v));
                b.add_edge(u, v, w);
            }
            for &(a, c, w) in &extra {
                let (u, v) = (a % n, c % n);
                let key = (u.min(v), u.max(v));
                if u != v && seen.insert(key) {
                    b.add_edge(key.0, key.1, w);
                }
            }
            b.build().unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_sums_conserve_mass(g in arb_graph(30), order in 0usize..25, t in 0.01f64..2.0) {
        let x = 0;
        let total = dirac_partial_sums(&g, x, t, order).into_iter().fold(Dd::ZERO, |a, b| a + b).to_f64();
        prop_assert!((total - 1.0).abs() <= 1e-12, "mass {}", total);
    }

    #[test]
    fn kernel_is_symmetric_and_positive(g in arb_graph(20), t in 0.05f64..1.5) {
        let n = g.vertex_count();
        let ys: Vec<usize> = (0..n).collect();
        let rows: Vec<_> = (0..n).map(|x| heat_kernel_dirac_many(&g, x, &ys, t, 1e-13).unwrap()).collect();
        for x in 0..n {
            for y in 0..n {
                let (a, b) = (&rows[x][y], &rows[y][x]);
                prop_assert!((a.value - b.value).abs() <= a.total_bound + b.total_bound + 1e-13);
                prop_assert!(a.value + a.total_bound >= 0.0);
            }
        }
    }

    #[test]
    fn kernel_solves_heat_equation(g in arb_graph(15), t in 0.2f64..1.0) {
        // ∂_t H = −Δ_x H, checked with a centred difference
        let n = g.vertex_count();
        let ys: Vec<usize> = (0..n).collect();
        let h = 1e-3;
        let y = n - 1;
        let col = |s: f64| -> Vec<f64> {
            (0..n).map(|x| heat_kernel_dirac_many(&g, x, &ys, s, 1e-14).unwrap()[y].value).collect()
        };
        let (now, up, down) = (col(t), col(t + h), col(t - h));
        let a = graphheat_core::graph::check_assumptions(&g, None).a;
        for x in 0..n {
            let lap = apply_laplacian(&g, |z| Some(now[z]), x).unwrap();
            let dt = (up[x] - down[x]) / (2.0 * h);
            // centred difference error ≤ h²/6 sup|∂³H| ≤ h²/6 (2A)³/θ_inf, plus rounding
            let allow = h * h / 6.0 * (2.0 * a).powi(3) / g.thetas().iter().cloned().fold(f64::INFINITY, f64::min) + 1e-9;
            prop_assert!((lap + dt).abs() <= allow, "x={} residual {}", x, (lap + dt).abs());
        }
    }

    #[test]
    fn metrics_satisfy_triangle_inequality(g in arb_graph(12)) {
        let n = g.vertex_count();
        for m in [Metric::combinatorial(&g), Metric::intrinsic(&g), Metric::adapted(&g), Metric::edge_weighted(&g, None)] {
            let d: Vec<Vec<f64>> = (0..n).map(|x| m.distances_from(&g, x).unwrap()).collect();
            for x in 0..n {
                prop_assert_eq!(d[x][x], 0.0);
                for y in 0..n {
                    prop_assert!((d[x][y] - d[y][x]).abs() <= 1e-14 * d[x][y]);
                    for z in 0..n {
                        prop_assert!(d[x][z] <= (d[x][y] + d[y][z]) * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn tail_order_is_monotone_in_tolerance(c in 0.1f64..10.0, n in 1.0f64..8.0, t in 0.01f64..2.0, k in 0usize..3) {
        let loose = neumann_tail_order(c, n, t, k, 1e-6);
        let tight = neumann_tail_order(c, n, t, k, 1e-12);
        prop_assert!(loose <= tight);
    }

    #[test]
    fn lattice_kernel_decreases_in_distance(t in 0.01f64..10.0, j in 0usize..30) {
        prop_assert!(lattice_z_kernel(j + 1, t).unwrap() <= lattice_z_kernel(j, t).unwrap());
        let direct = (-2.0 * t).exp() * bessel_i(j, 2.0 * t).unwrap();
        prop_assert!((lattice_z_kernel(j, t).unwrap() - direct).abs() <= 1e-14 * direct.max(1e-300) + 1e-300);
    }

    #[test]
    fn tree_kernel_is_positive_and_radially_decreasing(q in 2usize..5, r in 0usize..10, t in 0.05f64..3.0) {
        let a = tree_kernel(q, r, t, 1e-16).unwrap();
        let b = tree_kernel(q, r + 1, t, 1e-16).unwrap();
        prop_assert!(a > 0.0 && b < a);
    }
}
