use divcurl_core::coeff::{make_coefficient, CoeffFamily, TensorField};
use divcurl_core::divcurl::{solve_full, ResidualReport};
use divcurl_core::lattice::{EdgeField, FaceField};
use divcurl_core::maxwell::verify_maxwell_estimate;
use divcurl_core::mms::{self, Construction};
use divcurl_core::norms::{campanato_norm, h1_norm, holder_k_norm, l2_norm, lp_norm, NormReport, SamplingPlan, Witness};
use divcurl_core::{Error, Grid, ScalarField, SolveReport, SolverConfig};
use rayon::prelude::*;

use crate::config::{ConfigError, Experiment, ExperimentConfig, Violation};
use crate::io::FieldDump;
use crate::report::{describe_witness, observed_orders, EstimateReport, Row};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] ConfigError),
    #[error("invalid configuration:\n{}", list(.0))]
    Config(Vec<Violation>),
    #[error("{0}")]
    Numerics(#[from] Error),
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    /// 1 for configuration problems, 2 for solver failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Numerics(Error::SolverFailed { .. }) | RunError::Pool(_) | RunError::Io(_) => 2,
            RunError::Numerics(Error::GridMismatch { .. } | Error::NonFinite { .. }) => 2,
            _ => 1,
        }
    }
}

/// Rows in instance order, their summary, and optional field dumps.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub report: EstimateReport,
    pub fields: Vec<(String, FieldDump)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.violations.is_empty()
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    solver: SolverConfig,
    plan: SamplingPlan,
    a: CoeffFamily,
    b: CoeffFamily,
}

struct Measured {
    row: Row,
    fields: Vec<(String, FieldDump)>,
    /// Known solution built with the solver's own operators.
    discrete: bool,
}

pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<Outcome, RunError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(RunError::Config(violations));
    }
    let ctx = Context {
        cfg,
        solver: cfg.solver.config().expect("validated"),
        plan: cfg.sampling.plan().expect("validated"),
        a: cfg.a.family().expect("validated"),
        b: cfg.b.family().expect("validated"),
    };
    let instances = match cfg.experiment {
        Experiment::Convergence => 1,
        _ => cfg.instances,
    };
    let tasks: Vec<(usize, usize)> = cfg
        .grids
        .iter()
        .flat_map(|&n| (0..instances).map(move |i| (n, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let measured: Vec<Measured> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, i)| measure(&ctx, Grid::new(n)?, i))
            .collect::<Result<_, Error>>()
    })?;

    let discrete: Vec<bool> = measured.iter().map(|m| m.discrete).collect();
    let mut fields = Vec::new();
    let mut rows = Vec::with_capacity(measured.len());
    for m in measured {
        rows.push(m.row);
        fields.extend(m.fields);
    }
    let mut report = EstimateReport::from_rows(cfg.experiment.name(), cfg.seed, &rows);
    if cfg.experiment == Experiment::Convergence {
        let errs: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.lhs)).collect();
        report.orders = observed_orders(&errs);
    }
    report.violations = check(cfg, &rows, &discrete, &report);
    Ok(Outcome { rows, report, fields })
}

fn check(cfg: &ExperimentConfig, rows: &[Row], discrete: &[bool], report: &EstimateReport) -> Vec<String> {
    let c = &cfg.checks;
    let mut out = Vec::new();
    for (r, &d) in rows.iter().zip(discrete) {
        let values = [r.norm_u, r.norm_f, r.norm_g, r.lhs, r.rhs, r.ratio, r.r_curl, r.r_div, r.r_trace];
        if values.iter().any(|v| !v.is_finite()) {
            out.push(format!("non-finite value in row n={} instance={}", r.n, r.instance));
        }
        if d {
            let worst = r.error.unwrap_or(0.0).max(r.r_curl).max(r.r_div);
            if worst > c.max_residual {
                out.push(format!(
                    "closure {worst:e} above {:e} at n={} instance={}",
                    c.max_residual, r.n, r.instance
                ));
            }
        }
    }
    for (i, o) in report.orders.iter().enumerate() {
        if (o - c.order).abs() > c.order_tolerance {
            out.push(format!(
                "observed order {o:.3} between n={} and n={} outside {} ± {}",
                rows[i].n,
                rows[i + 1].n,
                c.order,
                c.order_tolerance
            ));
        }
    }
    if c.max_drift > 0.0 && report.drift > c.max_drift {
        out.push(format!("drift {:.3} above {}", report.drift, c.max_drift));
    }
    out
}

fn l2_cells_faces(u: &FaceField) -> f64 {
    l2_norm(&u.to_cells())
}

fn l2_cells_edges(f: &EdgeField) -> f64 {
    l2_norm(&f.to_cells())
}

fn relative(u: &FaceField, exact: &FaceField) -> f64 {
    let e = u.add_scaled(-1.0, exact).expect("same grid").l2();
    let s = exact.l2();
    if s > 0.0 {
        e / s
    } else {
        e
    }
}

struct Data {
    case: String,
    a: TensorField,
    b: TensorField,
    f: EdgeField,
    g: ScalarField,
    exact: Option<FaceField>,
    discrete: bool,
}

fn sweep_data(ctx: &Context, grid: Grid, seed: u64) -> Result<Data, Error> {
    let (f, g) = mms::random_compatible_data(grid, seed)?;
    Ok(Data {
        case: "random".into(),
        a: make_coefficient(&ctx.a, grid)?,
        b: make_coefficient(&ctx.b, grid)?,
        f,
        g,
        exact: None,
        discrete: false,
    })
}

fn case_data(ctx: &Context, grid: Grid, seed: u64) -> Result<Data, Error> {
    let from_case = |c: mms::ManufacturedCase| Data {
        case: c.label,
        discrete: c.construction == Construction::Discrete,
        a: c.a,
        b: c.b,
        f: c.f,
        g: c.g,
        exact: Some(c.u_exact),
    };
    Ok(match ctx.cfg.case.as_str() {
        "zero" => Data {
            case: "zero".into(),
            a: make_coefficient(&ctx.a, grid)?,
            b: make_coefficient(&ctx.b, grid)?,
            f: EdgeField::zeros(grid),
            g: ScalarField::zeros(grid),
            exact: Some(FaceField::zeros(grid)),
            discrete: true,
        },
        "random" => sweep_data(ctx, grid, seed)?,
        "smooth" => from_case(mms::make_smooth_case(grid, &ctx.a, &ctx.b, seed)?),
        id => from_case(mms::make_analytic_case(grid, id)?),
    })
}

fn base_row(ctx: &Context, grid: Grid, instance: usize, seed: u64, case: &str) -> Row {
    let cfg = ctx.cfg;
    Row {
        experiment: cfg.experiment.name().into(),
        case: case.into(),
        instance,
        n: grid.n(),
        h: grid.h(),
        seed,
        tolerance: ctx.solver.tolerance,
        max_iterations: ctx.solver.iteration_cap(grid),
        preconditioner: ctx.solver.preconditioner.name().into(),
        center_stride: ctx.plan.center_stride.unwrap_or(0),
        pair_budget: ctx.plan.pair_budget,
        near_pair_radius: ctx.plan.near_pair_radius,
        interior_margin: ctx.plan.interior_margin,
        plan_seed: ctx.plan.seed,
        norm_u: 0.0,
        norm_f: 0.0,
        norm_g: 0.0,
        lhs: 0.0,
        rhs: 0.0,
        ratio: 0.0,
        error: None,
        iterations: 0,
        solver_residual: 0.0,
        r_curl: 0.0,
        r_div: 0.0,
        r_trace: 0.0,
        witness: String::new(),
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else {
        0.0
    }
}

fn fill_solve(row: &mut Row, report: &SolveReport, res: &ResidualReport) {
    row.iterations = report.iterations;
    row.solver_residual = report.final_relative_residual;
    row.r_curl = res.r_curl;
    row.r_div = res.r_div;
    row.r_trace = res.r_trace;
}

fn measure(ctx: &Context, grid: Grid, instance: usize) -> Result<Measured, Error> {
    let cfg = ctx.cfg;
    let seed = cfg.seed + instance as u64;
    let alpha = cfg.norms.alpha;
    if cfg.experiment == Experiment::MaxwellEstimate {
        let case = mms::make_maxwell_case(grid, cfg.maxwell.alpha, seed)?;
        let est = verify_maxwell_estimate(&case.problem, cfg.maxwell.alpha, &ctx.solver, &ctx.plan)?;
        let mut row = base_row(ctx, grid, instance, seed, &case.label);
        let exact = case.curl_exact();
        row.norm_u = l2_cells_faces(&est.solution.curl_u);
        row.norm_f = l2_cells_edges(&case.problem.f);
        row.norm_g = l2_norm(&case.problem.h);
        row.lhs = est.lhs.value;
        row.rhs = est.data.value + est.shift.value;
        row.ratio = est.ratio;
        row.error = Some(relative(&est.solution.curl_u, &exact));
        row.witness = describe_witness(&est.lhs.witness);
        fill_solve(&mut row, &est.solution.report, &est.solution.residuals);
        return Ok(Measured {
            row,
            fields: Vec::new(),
            discrete: true,
        });
    }

    let data = match cfg.experiment {
        Experiment::Solve | Experiment::Convergence => case_data(ctx, grid, seed)?,
        _ => sweep_data(ctx, grid, seed)?,
    };
    let sol = solve_full(&data.a, &data.b, &data.f, &data.g, &ctx.solver)?;
    let u = sol.u.to_cells();
    let f = data.f.to_cells();
    let mut row = base_row(ctx, grid, instance, seed, &data.case);
    row.norm_u = l2_norm(&u);
    row.norm_f = l2_norm(&f);
    row.norm_g = l2_norm(&data.g);
    row.error = data.exact.as_ref().map(|e| relative(&sol.u, e));
    fill_solve(&mut row, &sol.report, &sol.residuals);

    let plain = |v: f64| NormReport {
        value: v,
        seminorm: 0.0,
        base: v,
        witness: Witness::None,
        seed: ctx.plan.seed,
        evaluated: 0,
    };
    let tau = cfg.tau();
    let (lhs, rhs) = match cfg.experiment {
        Experiment::Solve | Experiment::L2Sweep => (plain(row.norm_u), row.norm_f + row.norm_g),
        Experiment::H1Remark => (plain(h1_norm(&u)), row.norm_f + row.norm_g),
        Experiment::HolderSweep => (
            holder_k_norm(&u, 0, alpha, &ctx.plan)?,
            campanato_norm(&f, tau, &ctx.plan)?.value + campanato_norm(&data.g, tau, &ctx.plan)?.value,
        ),
        Experiment::LpSweep => (
            holder_k_norm(&u, 0, alpha, &ctx.plan)?,
            lp_norm(&f, cfg.norms.p)? + lp_norm(&data.g, cfg.norms.p)?,
        ),
        Experiment::CkAlpha => (
            holder_k_norm(&u, 1, alpha, &ctx.plan)?,
            holder_k_norm(&f, 0, alpha, &ctx.plan)?.value + holder_k_norm(&data.g, 0, alpha, &ctx.plan)?.value,
        ),
        Experiment::Convergence => {
            let exact = data.exact.as_ref().expect("catalog cases carry a solution");
            (plain(sol.u.add_scaled(-1.0, exact)?.l2()), exact.l2())
        }
        Experiment::MaxwellEstimate => unreachable!(),
    };
    row.lhs = lhs.value;
    row.rhs = rhs;
    row.ratio = ratio(lhs.value, rhs);
    row.witness = describe_witness(&lhs.witness);

    let fields = if cfg.output.fields && matches!(cfg.experiment, Experiment::Solve | Experiment::Convergence) {
        vec![(format!("u_n{}_i{instance}.bin", grid.n()), FieldDump::from_vector(&u))]
    } else {
        Vec::new()
    };
    Ok(Measured {
        row,
        fields,
        discrete: data.discrete,
    })
}
