//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero when a
//! gating criterion fails; the random-walk criterion is reported only.

use std::time::Instant;

use graphheat::gen::{Generator, RandomParams};
use graphheat::validation::{
    binomial_standard_error, ctrw_simulate, suite_run, CheckKind, MatexpOracle, SuiteConfig,
};
use graphheat_core::engine::{
    convolve, dirac_order, dirac_partial_sums, heat_kernel_dirac_many, heat_kernel_general_many, GeneralOptions,
    TimeGridFunction,
};
use graphheat_core::graph::families::{lattice_window, tree_ball};
use graphheat_core::kernels::tree_walk_series;
use graphheat_core::metrics::verify_metric;
use graphheat_core::numeric::Dd;
use graphheat_core::{
    heat_kernel_dirac, lattice_z_kernel, tree_kernel, DiracParametrix, GaussianParametrix, Metric, MetricKind,
    Parametrix, RadialTree, WeightedGraph,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random(n: usize, max_degree: usize, seed: u64) -> WeightedGraph {
    Generator::Random(RandomParams { n, max_degree, theta: (0.5, 2.0), w: (0.5, 2.0), seed })
        .generate()
        .expect("valid generator parameters")
}

fn lattice_closed_form() -> Outcome {
    let start = Instant::now();
    let z = lattice_window(1, 80).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.25, 1.0, 2.0] {
        for x in [-3i64, 0, 2] {
            let xv = z.vertex(&x.to_string()).unwrap();
            let ys: Vec<usize> = (-5..=5).map(|d| z.vertex(&(x + d).to_string()).unwrap()).collect();
            let est = match heat_kernel_dirac_many(&z, xv, &ys, t, 1e-12) {
                Ok(e) => e,
                Err(e) => return outcome(false, format!("engine error {e}")),
            };
            for (d, e) in (-5i64..=5).zip(&est) {
                let exact = lattice_z_kernel(d.unsigned_abs() as usize, t).unwrap();
                worst = worst.max((e.value - exact).abs() / exact);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-8, format!("max relative error {worst:.3e} (limit 1e-8), {secs:.2} s"))
}

fn tree_closed_form() -> Outcome {
    let mut worst_engine: f64 = 0.0;
    let mut worst_walk: f64 = 0.0;
    for q in [2, 3] {
        let dom = RadialTree::new(q, 40);
        for t in [0.25, 1.0] {
            let shells: Vec<usize> = (0..=4).collect();
            let est = match heat_kernel_dirac_many(&dom, 0, &shells, t, 1e-12) {
                Ok(e) => e,
                Err(e) => return outcome(false, format!("engine error {e}")),
            };
            for (r, e) in shells.iter().zip(&est) {
                let closed = tree_kernel(q, *r, t, 1e-12).unwrap();
                let walk = tree_walk_series(q, *r, t, 1e-16).unwrap().value;
                worst_engine = worst_engine.max((e.value - closed).abs() / closed);
                worst_walk = worst_walk.max((closed - walk).abs());
            }
        }
    }
    outcome(
        worst_engine <= 1e-8 && worst_walk <= 1e-10,
        format!("engine vs closed form {worst_engine:.3e} relative (limit 1e-8), closed form vs walk series {worst_walk:.3e} absolute (limit 1e-10)"),
    )
}

fn mass_conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for seed in 0..24u64 {
        let n = 40 + (seed as usize * 7) % 161;
        let g = random(n, 6, seed);
        for t in [0.1, 1.0] {
            let (needed, _) = dirac_order(&g, t, 1e-12);
            for x in [0, n / 2, n - 1] {
                let sums = dirac_partial_sums(&g, x, t, needed + 3);
                // partial sums through every order L: accumulate one chain order at a time
                for order in [0, 1, 2, 5, needed / 2, needed, needed + 3] {
                    let s = dirac_partial_sums(&g, x, t, order).into_iter().fold(Dd::ZERO, |a, b| a + b).to_f64();
                    worst = worst.max((s - 1.0).abs());
                }
                let s = sums.into_iter().fold(Dd::ZERO, |a, b| a + b).to_f64();
                worst = worst.max((s - 1.0).abs());
                runs += 1;
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |mass − 1| {worst:.3e} over 24 seeds, {runs} source/time runs (limit 1e-12)"))
}

fn oracle_equivalence() -> Outcome {
    let g = random(200, 6, 4242);
    let o = MatexpOracle::new(&g).unwrap();
    let ys: Vec<usize> = (0..200).collect();
    let mut worst = f64::INFINITY;
    let mut worst_err: f64 = 0.0;
    for t in [0.1, 0.5, 1.0] {
        for x in 0..200 {
            let est = match heat_kernel_dirac_many(&g, x, &ys, t, 1e-12) {
                Ok(e) => e,
                Err(e) => return outcome(false, format!("engine error {e}")),
            };
            for (y, e) in est.iter().enumerate() {
                let diff = (e.value - o.kernel(x, y, t)).abs();
                worst = worst.min(e.total_bound + 1e-10 - diff);
                worst_err = worst_err.max(diff);
            }
        }
    }
    outcome(worst >= 0.0, format!("120000 queries, max |engine − oracle| {worst_err:.3e}, worst margin {worst:.3e}"))
}

fn parametrix_independence() -> Outcome {
    let start = Instant::now();
    let tree = tree_ball(2, 8).unwrap().as_finite();
    let rnd = random(50, 5, 77);
    let mut worst_margin = f64::INFINITY;
    let mut worst_abs: f64 = 0.0;
    let mut queries = 0;
    for (g, xs, y, tol) in [
        (&tree, (0..10).collect::<Vec<usize>>(), 0usize, 1e-5),
        (&rnd, (0..50).collect::<Vec<usize>>(), 7usize, 1e-6),
    ] {
        let m = Metric::combinatorial(g);
        let p = match GaussianParametrix::new(g, &m) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("parametrix error {e}")),
        };
        for t in [0.25, 1.0] {
            let gen = match heat_kernel_general_many(&p, &xs, y, t, tol, GeneralOptions::default()) {
                Ok(e) => e,
                Err(e) => return outcome(false, format!("quadrature error {e}")),
            };
            for (&x, a) in xs.iter().zip(&gen) {
                let b = heat_kernel_dirac(g, x, y, t, 1e-12).unwrap();
                let diff = (a.value - b.value).abs();
                worst_margin = worst_margin.min(a.total_bound + b.total_bound - diff);
                worst_abs = worst_abs.max(diff);
                queries += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_margin >= 0.0 && worst_abs <= 1e-4,
        format!("{queries} queries, max |gaussian − dirac| {worst_abs:.3e} (limit 1e-4), worst margin {worst_margin:.3e}, {secs:.1} s"),
    )
}

fn small_time() -> Outcome {
    let z = lattice_window(1, 20).unwrap();
    let o = z.vertex("0").unwrap();
    let zp: Vec<(usize, usize)> = (1..=3).map(|r| (o, z.vertex(&r.to_string()).unwrap())).collect();
    let tree = tree_ball(2, 8).unwrap();
    let d = tree.hop_distances(0);
    let tp: Vec<(usize, usize)> = (1..=3).map(|r| (0, d.iter().position(|&v| v == r).unwrap())).collect();
    let mut worst = f64::INFINITY;
    for (g, pairs) in [(&z, zp), (&tree, tp)] {
        let cfg = SuiteConfig { checks: vec![CheckKind::SmallTime], pairs, as_finite: false, ..SuiteConfig::default() };
        let r = suite_run(g, &cfg);
        let c = &r.deterministic[0];
        if let Some(e) = &c.error {
            return outcome(false, format!("error {e}"));
        }
        worst = worst.min(c.worst_margin.unwrap_or(f64::NEG_INFINITY));
    }
    outcome(worst >= 0.0, format!("ratios of successive deviations within 0.1 ± 0.02, worst margin {worst:.3e}"))
}

fn residual() -> Outcome {
    let g = random(60, 5, 9);
    let pairs: Vec<(usize, usize)> = (0..10).map(|i| (i * 5, (i * 13 + 3) % 60)).collect();
    let cfg = SuiteConfig { checks: vec![CheckKind::Residual], pairs, times: vec![1.0], ..SuiteConfig::default() };
    let r = suite_run(&g, &cfg);
    let c = &r.deterministic[0];
    outcome(
        c.pass && c.queries > 0,
        format!("{} halvings over 10 queries, band 4 ± 0.8, worst margin {:.3e}", c.queries, c.worst_margin.unwrap_or(f64::NAN)),
    )
}

/// Least-squares slope of `log|v|` against `log t`.
fn slope(ts: &[f64], vs: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vs.iter().map(|v| v.abs().ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn contract_for(p: &dyn Parametrix, worst_slope: &mut f64, worst_lh: &mut f64, failures: &mut Vec<String>) {
    let g = p.graph();
    let n = g.vertex_count();
    let k = p.order();
    for x in 0..n {
        for y in 0..n {
            let want = if x == y { 1.0 / g.theta(x) } else { 0.0 };
            if p.eval(x, y, 0.0) != want {
                failures.push(format!("{} initial condition at ({x}, {y})", p.name()));
            }
        }
    }
    let t0 = 0.5;
    let c = p.lh_bound(t0);
    for x in 0..n {
        for y in 0..n {
            for i in 1..=20 {
                let t = t0 * i as f64 / 20.0;
                let ratio = p.heat_op(x, y, t).abs() / (c * t.powi(k as i32));
                *worst_lh = worst_lh.max(ratio);
                if ratio > 1.0 {
                    failures.push(format!("{} heat operator bound at ({x}, {y}, {t})", p.name()));
                }
            }
        }
    }
    let ts: Vec<f64> = (0..9).map(|i| 1e-3 * 10f64.powf(i as f64 / 4.0)).collect();
    let cells: Vec<usize> = (0..n).collect();
    for (x, y) in [(0, 0), (0, 1), (1, n - 1)] {
        let vs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let f1 = TimeGridFunction::sample(cells.clone(), t, 64, |z, s| p.eval(x, z, s));
                let f2 = TimeGridFunction::sample(cells.clone(), t, 64, |z, s| p.heat_op(z, y, s));
                convolve(g, &f1, &f2).unwrap().0
            })
            .collect();
        if vs.iter().all(|v| *v == 0.0) {
            continue;
        }
        let s = slope(&ts, &vs);
        *worst_slope = worst_slope.min(s);
        if s < k as f64 + 1.0 - 0.05 {
            failures.push(format!("{} slope {s:.4} at ({x}, {y}) on {n} vertices", p.name()));
        }
    }
}

fn parametrix_contract() -> Outcome {
    let graphs = [Generator::Pair.generate().unwrap(), random(30, 4, 3), tree_ball(2, 3).unwrap().as_finite()];
    let mut failures = Vec::new();
    let mut worst_slope = f64::INFINITY;
    let mut worst_lh: f64 = 0.0;
    for g in &graphs {
        contract_for(&DiracParametrix::new(g), &mut worst_slope, &mut worst_lh, &mut failures);
        let m = Metric::combinatorial(g);
        match GaussianParametrix::new(g, &m) {
            Ok(p) => contract_for(&p, &mut worst_slope, &mut worst_lh, &mut failures),
            Err(e) => return outcome(false, format!("parametrix error {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "initial condition exact; max |LH|/(C(t₀) t^k) {worst_lh:.6}; min log-log slope of H∗LH {worst_slope:.4} (need ≥ 0.95); failures: {failures:?}"
        ),
    )
}

fn random_walks() -> Outcome {
    let n = 1_000_000;
    let pair = Generator::Pair.generate().unwrap();
    let z = lattice_window(1, 30).unwrap();
    let o = z.vertex("0").unwrap();
    let mut worst: f64 = 0.0;
    for (i, t) in [0.5f64, 1.0].into_iter().enumerate() {
        let f = ctrw_simulate(&pair, 0, t, n, 1000 + i as u64);
        let exact = [(1.0 + (-2.0 * t).exp()) / 2.0, (1.0 - (-2.0 * t).exp()) / 2.0];
        for y in 0..2 {
            worst = worst.max((f[y] - exact[y]).abs() / binomial_standard_error(exact[y], n));
        }
        let f = ctrw_simulate(&z, o, t, n, 2000 + i as u64);
        for d in -5i64..=5 {
            let y = z.vertex(&d.to_string()).unwrap();
            let p = lattice_z_kernel(d.unsigned_abs() as usize, t).unwrap();
            worst = worst.max((f[y] - p).abs() / binomial_standard_error(p, n));
        }
    }
    outcome(worst <= 3.0, format!("10⁶ trajectories, max deviation {worst:.2} standard errors (envelope 3, non-gating)"))
}

fn metric_suite() -> Outcome {
    let families = [
        ("lattice:dim=1,radius=100", lattice_window(1, 100).unwrap()),
        ("lattice:dim=2,radius=7", lattice_window(2, 7).unwrap()),
        ("tree:q=2,radius=6", tree_ball(2, 6).unwrap()),
        ("tree:q=3,radius=4", tree_ball(3, 4).unwrap()),
        ("random:n=200,degree=6", random(200, 6, 5)),
    ];
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, g) in &families {
        let region: Vec<usize> = (0..g.vertex_count()).collect();
        for kind in [MetricKind::Combinatorial, MetricKind::Normalized, MetricKind::Intrinsic, MetricKind::Adapted, MetricKind::EdgeWeighted] {
            let m = match Metric::of_kind(g, kind) {
                Ok(m) => m,
                Err(e) => {
                    failures.push(format!("{name}/{}: {e}", kind.name()));
                    continue;
                }
            };
            // the intrinsic metric is not adapted in general (its sum can reach the degree)
            let adapted = matches!(kind, MetricKind::Normalized | MetricKind::Adapted);
            match verify_metric(g, &m, &region, adapted) {
                Ok(r) if r.pass => checked += 1,
                Ok(_) => failures.push(format!("{name}/{}", kind.name())),
                Err(e) => failures.push(format!("{name}/{}: {e}", kind.name())),
            }
        }
    }
    outcome(failures.is_empty(), format!("{checked} family/metric combinations verified; failures: {failures:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, bool); 10] = [
        ("1 lattice closed form", lattice_closed_form, true),
        ("2 tree closed form", tree_closed_form, true),
        ("3 exact mass conservation", mass_conservation, true),
        ("4 oracle equivalence", oracle_equivalence, true),
        ("5 parametrix independence", parametrix_independence, true),
        ("6 small-time asymptotics", small_time, true),
        ("7 heat-equation residual", residual, true),
        ("8 parametrix contract", parametrix_contract, true),
        ("9 random-walk statistics", random_walks, false),
        ("10 metric suite", metric_suite, true),
    ];
    let mut failed = 0;
    for (name, run, gating) in criteria {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if gating { "" } else { " [reported only]" };
        println!("{tag} criterion {name}: {}{note}", o.detail);
        if gating && !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} gating criteria failed");
        std::process::exit(1);
    }
}
