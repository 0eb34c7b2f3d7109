//! End-to-end acceptance checks. Each criterion prints one `PASS`/`FAIL` line
//! with the measured quantity next to its threshold. Criteria run one after
//! another so each runtime budget applies to that criterion alone.

use std::time::{Duration, Instant};

use divcurl::{run, Experiment, ExperimentConfig};
use divcurl_core::coeff::{compose, make_coefficient, CoeffFamily, TensorField};
use divcurl_core::complex::{self, FaceTensor};
use divcurl_core::divcurl::{solve_full, solve_partial};
use divcurl_core::helmholtz::decompose;
use divcurl_core::lattice::{EdgeField, FaceField};
use divcurl_core::maxwell::{shift_and_solve, verify_maxwell_estimate};
use divcurl_core::mms::{self, make_analytic_case, make_maxwell_case, make_smooth_case, random_compatible_data, CATALOG};
use divcurl_core::norms::{self, campanato_norm, holder_k_norm, holder_seminorm, Channels, SamplingPlan};
use divcurl_core::ops::{self, StencilSpec};
use divcurl_core::{Grid, ScalarField, SolverConfig, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

thread_local! {
    static REPORTED: std::cell::Cell<bool> = const { std::cell::Cell::new(false) };
}

fn record(id: u32, name: &str, ok: bool, detail: String, elapsed: Duration, budget: Duration) {
    REPORTED.with(|r| r.set(true));
    let in_time = elapsed <= budget;
    let status = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "acceptance {id:02} {status} {name}: {detail} [{:.1} s of {:.0} s]",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    if !(ok && in_time) {
        panic!("{name} failed");
    }
}

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

fn drift(values: &[f64]) -> f64 {
    divcurl::report::drift(values.iter().copied())
}

fn rel(u: &FaceField, v: &FaceField) -> f64 {
    u.add_scaled(-1.0, v).unwrap().l2() / v.l2()
}

fn interior_max(g: Grid, values: &[f64], layers: usize) -> f64 {
    (0..g.cell_count())
        .filter(|&i| g.layer(g.cell_of(i)) >= layers)
        .fold(0.0f64, |m, i| m.max(values[i].abs()))
}

fn discrete_identities_hold_to_roundoff() {
    let start = Instant::now();
    let g = grid(32);
    let rule = StencilSpec::ONE_SIDED;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let f = VectorField::from_components(g, [0; 3].map(|_| (0..g.cell_count()).map(|_| rng.random_range(-1.0..1.0)).collect()));
        let s = ScalarField::from_values(g, (0..g.cell_count()).map(|_| rng.random_range(-1.0..1.0)).collect());
        let c = ops::curl(&f, rule);
        let dc = ops::div(&c, rule);
        worst = worst.max(interior_max(g, dc.values(), 2) / (c.max_abs() / g.h()));
        let gs = ops::grad(&s, rule);
        let cg = ops::curl(&gs, rule);
        let m = (0..3).map(|a| interior_max(g, cg.component(a), 2)).fold(0.0, f64::max);
        worst = worst.max(m / (gs.max_abs() / g.h()));

        // the staggered complex used by the solvers is exact up to the boundary
        let w = EdgeField::from_components(g, [0, 1, 2].map(|a| (0..EdgeField::zeros(g).component(a).len()).map(|_| rng.random_range(-1.0..1.0)).collect()));
        let cw = complex::curl_edges(&w);
        worst = worst.max(complex::div_faces(&cw).max_abs() / (cw.max_abs() / g.h()));
        let gq = complex::grad(&s);
        let cq = complex::curl(&gq);
        worst = worst.max(cq.max_abs() / (gq.max_abs() / g.h()));
    }
    record(
        1,
        "discrete identities",
        worst <= 1e-12,
        format!("max |div curl|, |curl grad| / (input scale / h) = {worst:.2e} <= 1e-12"),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

fn helmholtz_splitting_is_accurate_and_stable() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let (mut recon, mut orth) = (0.0f64, 0.0f64);
    let mut per_grid = Vec::new();
    for n in [16, 32, 64] {
        let mut c = 0.0f64;
        for seed in 0..20 {
            let u = mms::random_smooth_face_field(grid(n), seed).unwrap();
            let d = decompose(&u, &cfg).unwrap();
            if n == 32 {
                recon = recon.max(d.reconstruction_residual);
                orth = orth.max(d.orthogonality_defect());
            }
            c = c.max(d.stability_ratio);
        }
        per_grid.push(c);
    }
    let dr = drift(&per_grid);
    record(
        2,
        "helmholtz decomposition",
        recon <= 1e-6 && orth <= 1e-4 && dr < 0.3,
        format!(
            "reconstruction {recon:.2e} <= 1e-6, orthogonality {orth:.2e} <= 1e-4, |phi|_H1/|u| per grid {per_grid:.4?} drift {:.1}% < 30%",
            100.0 * dr
        ),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

fn pipeline_recovers_manufactured_solutions() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let families = [
        ("identity", CoeffFamily::identity()),
        ("lipschitz", CoeffFamily::lipschitz(0.5).with_anisotropy([1.0, 1.5, 2.0])),
        ("holder-0.25", CoeffFamily::holder(0.25, 0.5).with_anisotropy([1.0, 1.5, 2.0])),
        ("holder-0.5", CoeffFamily::holder(0.5, 0.5).with_anisotropy([1.0, 1.5, 2.0])),
        ("holder-0.75", CoeffFamily::holder(0.75, 0.5).with_anisotropy([1.0, 1.5, 2.0])),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, fam) in &families {
        let err = |n: usize| {
            (0..3)
                .map(|seed| {
                    let c = make_smooth_case(grid(n), fam, &CoeffFamily::identity(), seed).unwrap();
                    let s = solve_partial(&c.a, &c.f, &c.g, &cfg).unwrap();
                    rel(&s.u, &c.u_exact)
                })
                .fold(0.0f64, f64::max)
        };
        let (e16, e32) = (err(16), err(32));
        let ratio = e32.max(e16) / e32.min(e16);
        ok &= e32 <= 1e-6 && ratio <= 2.0;
        parts.push(format!("{name} {e32:.1e} (x{ratio:.2})"));
    }
    record(
        3,
        "pipeline closure",
        ok,
        format!("relative L2 error at n=32 <= 1e-6, n=16/32 within 2x: {}", parts.join(", ")),
        start.elapsed(),
        Duration::from_secs(120 * families.len() as u64),
    );
}

fn sweep(mut cfg: ExperimentConfig) -> divcurl::Outcome {
    cfg.checks.max_drift = 0.0;
    let out = run(&cfg, 1).unwrap();
    assert!(out.passed(), "{:?}", out.report.violations);
    out
}

fn l2_constant_is_refinement_stable() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::defaults(Experiment::L2Sweep);
    cfg.a.anisotropy = [1.0, 1.5, 2.0];
    let out = sweep(cfg);
    let r = &out.report;
    let per: Vec<f64> = r.per_grid.iter().map(|g| g.constant).collect();
    record(
        4,
        "L2 stability constant",
        r.rows == 60 && per.len() == 3 && r.drift < 0.2,
        format!("C per grid {per:.4?}, drift {:.1}% < 20% over {} instances", 100.0 * r.drift, r.rows),
        start.elapsed(),
        Duration::from_secs(600),
    );
}

fn holder_constant_is_refinement_stable() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let mut cfg = ExperimentConfig::defaults(Experiment::HolderSweep);
        cfg.norms.alpha = alpha;
        cfg.norms.tau = 2.0 * alpha + 1.0;
        cfg.a.alpha = alpha;
        let out = sweep(cfg);
        let witnessed = out.rows.iter().all(|r| r.witness.starts_with("pair"));
        let per: Vec<f64> = out.report.per_grid.iter().map(|g| g.constant).collect();
        ok &= witnessed && per.len() == 2 && out.report.drift < 0.3;
        parts.push(format!(
            "alpha {alpha}: C {per:.4?} drift {:.1}% witness {}",
            100.0 * out.report.drift,
            out.rows.last().unwrap().witness
        ));
    }
    record(
        5,
        "Holder estimate",
        ok,
        format!("drift < 30% over n=32,64: {}", parts.join("; ")),
        start.elapsed(),
        Duration::from_secs(900),
    );
}

fn coefficient_transform_is_consistent() {
    let start = Instant::now();
    let g = grid(32);
    let cfg = SolverConfig::default();
    let a = CoeffFamily::holder(0.5, 0.5).with_anisotropy([1.0, 1.5, 2.0]);
    let b = CoeffFamily::holder(0.75, 0.5).with_anisotropy([2.0, 1.0, 1.5]);
    let case = make_smooth_case(g, &a, &b, 5).unwrap();
    let full = solve_full(&case.a, &case.b, &case.f, &case.g, &cfg).unwrap();
    let mapped = FaceTensor::new(&case.b).apply(&full.u);
    let partial = solve_partial(&compose(&case.a, &case.b).unwrap(), &case.f, &case.g, &cfg).unwrap();
    let gap = rel(&mapped, &partial.u);
    let r = full.residuals;
    record(
        6,
        "B-transform consistency",
        gap <= 1e-12 && r.r_curl <= 1e-6 && r.r_div <= 1e-6,
        format!(
            "|B u_full - u_partial(AB^-1)| rel {gap:.2e} <= 1e-12, r_curl {:.2e}, r_div {:.2e} <= 1e-6",
            r.r_curl, r.r_div
        ),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

fn analytic_cases_converge_at_second_order() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (id, _) in CATALOG {
        let errs: Vec<(usize, f64)> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let c = make_analytic_case(grid(n), id).unwrap();
                let s = solve_full(&c.a, &c.b, &c.f, &c.g, &cfg).unwrap();
                (n, s.u.add_scaled(-1.0, &c.u_exact).unwrap().l2())
            })
            .collect();
        let orders = divcurl::report::observed_orders(&errs);
        ok &= orders.iter().all(|o| (o - 2.0).abs() <= 0.3);
        parts.push(format!("{id} {orders:.3?}"));
    }
    record(
        7,
        "convergence order",
        ok,
        format!("observed L2 orders in 2.0 +- 0.3: {}", parts.join(", ")),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

/// Every interior cell as a center, every plan radius, direct two-pass
/// oscillation.
fn campanato_brute_force(f: &ScalarField, tau: f64, plan: &SamplingPlan) -> f64 {
    let g = f.grid();
    let (lo, hi) = plan.interior_range(g);
    let cells: Vec<[usize; 3]> = (0..g.cell_count())
        .map(|i| g.cell_of(i))
        .filter(|c| c.iter().all(|&x| x >= lo && x <= hi))
        .collect();
    let mut best = 0.0f64;
    for c in &cells {
        let x = g.center(*c);
        for r in plan.radii(g) {
            let ball: Vec<f64> = cells
                .iter()
                .filter(|d| {
                    let y = g.center(**d);
                    ((0..3).map(|a| (x[a] - y[a]).powi(2)).sum::<f64>()).sqrt() <= r + 1e-12
                })
                .map(|d| f.at(d[0], d[1], d[2]))
                .collect();
            let mean = ball.iter().sum::<f64>() / ball.len() as f64;
            let osc: f64 = ball.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * g.cell_volume();
            best = best.max(osc / r.powf(tau));
        }
    }
    norms::l2_norm(f) + best.sqrt()
}

fn norm_estimators_match_oracles() {
    let start = Instant::now();
    let plan = SamplingPlan::default();

    // odd n puts a cell center on the singular point
    let g = grid(33);
    let x0 = [0.5; 3];
    let cone = ScalarField::sample(g, |x| ((0..3).map(|a| (x[a] - x0[a]).powi(2)).sum::<f64>()).powf(0.25)).unwrap();
    let h = holder_seminorm(&cone, 0.5, &plan).unwrap().value;
    let cone_ok = (0.9..=1.0 + 1e-12).contains(&h);

    let g16 = grid(16);
    let s = ScalarField::sample(g16, |x| (3.0 * x[0]).sin() * x[1] + x[2] * x[2] + (x[0] - 0.4).abs().sqrt()).unwrap();
    let sampled = campanato_norm(&s, 2.0, &plan).unwrap().value;
    let oracle = campanato_brute_force(&s, 2.0, &plan);
    let camp_gap = (sampled - oracle).abs() / oracle;

    let v = Channels {
        grid: g16,
        data: vec![s.values().to_vec(), s.values().iter().map(|x| x * x).collect()],
    };
    let mut homog = 0.0f64;
    for c in [-3.5, 0.25, 7.0] {
        let sv = Channels {
            grid: g16,
            data: v.data.iter().map(|ch| ch.iter().map(|x| c * x).collect()).collect(),
        };
        let pairs = [
            (norms::l2_norm(&sv), norms::l2_norm(&v)),
            (norms::lp_norm(&sv, 3.0).unwrap(), norms::lp_norm(&v, 3.0).unwrap()),
            (norms::h1_norm(&sv), norms::h1_norm(&v)),
            (campanato_norm(&sv, 2.0, &plan).unwrap().value, campanato_norm(&v, 2.0, &plan).unwrap().value),
            (holder_seminorm(&sv, 0.5, &plan).unwrap().value, holder_seminorm(&v, 0.5, &plan).unwrap().value),
            (holder_k_norm(&sv, 1, 0.5, &plan).unwrap().value, holder_k_norm(&v, 1, 0.5, &plan).unwrap().value),
        ];
        for (scaled, base) in pairs {
            homog = homog.max((scaled - c.abs() * base).abs() / (c.abs() * base));
        }
    }
    record(
        8,
        "norm estimators",
        cone_ok && camp_gap <= 0.05 && homog <= 1e-12,
        format!(
            "[|x-x0|^0.5]_0.5 = {h:.4} in [0.9, 1], campanato vs all-centers oracle {:.2}% <= 5%, homogeneity defect {homog:.1e}",
            100.0 * camp_gap
        ),
        start.elapsed(),
        Duration::from_secs(180),
    );
}

fn maxwell_reduction_closes_and_estimate_is_stable() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let plan = SamplingPlan::default();
    let case = make_maxwell_case(grid(16), 0.5, 2).unwrap();
    let sol = shift_and_solve(&case.problem, &cfg).unwrap();
    let closure = rel(&sol.curl_u, &case.curl_exact())
        .max(sol.residuals.r_curl)
        .max(sol.residuals.r_div);
    let base = verify_maxwell_estimate(&case.problem, 0.5, &cfg, &plan).unwrap().ratio;
    let scaled = verify_maxwell_estimate(&case.problem.scaled(10.0), 0.5, &cfg, &plan).unwrap().ratio;
    let homog = (scaled - base).abs() / base;
    let per: Vec<f64> = [16, 32]
        .iter()
        .map(|&n| {
            (0..3)
                .map(|seed| {
                    let c = make_maxwell_case(grid(n), 0.5, seed).unwrap();
                    verify_maxwell_estimate(&c.problem, 0.5, &cfg, &plan).unwrap().ratio
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let dr = drift(&per);
    record(
        9,
        "Maxwell reduction",
        closure <= 1e-6 && homog <= 1e-6 && dr < 0.3,
        format!(
            "closure {closure:.2e} <= 1e-6, 10x scaling changes ratio by {homog:.1e} <= 1e-6, ratio per grid {per:.4?} drift {:.1}% < 30%",
            100.0 * dr
        ),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

fn c1_alpha_constant_is_refinement_stable() {
    let start = Instant::now();
    let out = sweep(ExperimentConfig::defaults(Experiment::CkAlpha));
    let per: Vec<f64> = out.report.per_grid.iter().map(|g| g.constant).collect();
    record(
        10,
        "C^{1,alpha} estimate",
        per.len() == 2 && out.report.drift < 0.3,
        format!("C per grid {per:.4?}, drift {:.1}% < 30%", 100.0 * out.report.drift),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

fn solves_are_unique_and_linear() {
    let start = Instant::now();
    let g = grid(24);
    let cfg = SolverConfig::default();
    let a = make_coefficient(&CoeffFamily::holder(0.5, 0.5).with_anisotropy([1.0, 1.5, 2.0]), g).unwrap();
    let b = make_coefficient(&CoeffFamily::lipschitz(0.4), g).unwrap();
    let (f1, g1) = random_compatible_data(g, 1).unwrap();
    let (f2, g2) = random_compatible_data(g, 2).unwrap();
    let u1 = solve_full(&a, &b, &f1, &g1, &cfg).unwrap().u;
    let u2 = solve_full(&a, &b, &f2, &g2, &cfg).unwrap().u;
    let c = -2.5;
    let u12 = solve_full(&a, &b, &f1.add_scaled(c, &f2).unwrap(), &g1.add_scaled(c, &g2).unwrap(), &cfg)
        .unwrap()
        .u;
    let combo = u1.add_scaled(c, &u2).unwrap();
    let lin = u12.add_scaled(-1.0, &combo).unwrap().l2() / (u1.l2() + c.abs() * u2.l2());
    let zero = solve_full(&a, &b, &EdgeField::zeros(g), &ScalarField::zeros(g), &cfg).unwrap().u;
    let zero_ratio = zero.l2() / u1.l2();
    let half = solve_full(&TensorField::identity(g), &TensorField::scaled_identity(g, 2.0), &f1, &g1, &cfg).unwrap().u;
    let partial = solve_partial(&TensorField::scaled_identity(g, 0.5), &f1, &g1, &cfg).unwrap().u;
    let scaling = rel(&half.scaled(2.0), &partial);
    record(
        11,
        "uniqueness and linearity",
        zero_ratio <= 1e-9 && lin <= 10.0 * cfg.tolerance && scaling <= 10.0 * cfg.tolerance,
        format!(
            "|u(0)| / |u_cal| = {zero_ratio:.1e} <= 1e-9, linearity defect {lin:.1e} <= {:.0e}, 2 u_full(I, 2I) vs u_partial(I/2) {scaling:.1e}",
            10.0 * cfg.tolerance
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

fn full_pipeline_at_64_cubed_finishes_in_time() {
    let g = grid(64);
    let a = CoeffFamily::holder(0.5, 0.5).with_anisotropy([1.0, 1.5, 2.0]);
    let b = CoeffFamily::holder(0.75, 0.5).with_anisotropy([2.0, 1.0, 1.5]);
    let case = make_smooth_case(g, &a, &b, 8).unwrap();
    let start = Instant::now();
    let s = solve_full(&case.a, &case.b, &case.f, &case.g, &SolverConfig::default()).unwrap();
    let elapsed = start.elapsed();
    record(
        12,
        "64^3 full solve",
        s.report.converged,
        format!("{} iterations, {} operator applications", s.report.iterations, s.report.operator_applications),
        elapsed,
        Duration::from_secs(120),
    );
}

fn main() {
    let checks: [(&str, fn()); 12] = [
        ("discrete identities", discrete_identities_hold_to_roundoff),
        ("helmholtz decomposition", helmholtz_splitting_is_accurate_and_stable),
        ("pipeline closure", pipeline_recovers_manufactured_solutions),
        ("L2 stability constant", l2_constant_is_refinement_stable),
        ("Holder estimate", holder_constant_is_refinement_stable),
        ("B-transform consistency", coefficient_transform_is_consistent),
        ("convergence order", analytic_cases_converge_at_second_order),
        ("norm estimators", norm_estimators_match_oracles),
        ("Maxwell reduction", maxwell_reduction_closes_and_estimate_is_stable),
        ("C^{1,alpha} estimate", c1_alpha_constant_is_refinement_stable),
        ("uniqueness and linearity", solves_are_unique_and_linear),
        ("64^3 full solve", full_pipeline_at_64_cubed_finishes_in_time),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        if std::panic::catch_unwind(check).is_err() {
            // failures inside a check that never reached its report line
            failed += 1;
            if !REPORTED.with(|r| r.get()) {
                println!("acceptance {:02} FAIL {name}: aborted before reporting", id + 1);
            }
        }
        REPORTED.with(|r| r.set(false));
    }
    if failed > 0 {
        println!("{failed} of 12 acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
