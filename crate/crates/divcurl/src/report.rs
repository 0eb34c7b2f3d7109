use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use divcurl_core::norms::Witness;
use serde::{Deserialize, Serialize};

/// One solve of a sweep. Norm columns hold whatever the experiment compares:
/// `lhs` is the solution-side norm, `rhs` the data-side one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub case: String,
    pub instance: usize,
    pub n: usize,
    pub h: f64,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: String,
    pub center_stride: usize,
    pub pair_budget: usize,
    pub near_pair_radius: usize,
    pub interior_margin: f64,
    pub plan_seed: u64,
    pub norm_u: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Relative L² error against the known solution, if there is one.
    pub error: Option<f64>,
    pub iterations: usize,
    pub solver_residual: f64,
    pub r_curl: f64,
    pub r_div: f64,
    pub r_trace: f64,
    pub witness: String,
}

pub fn describe_witness(w: &Witness) -> String {
    let p = |x: &[f64; 3]| format!("({:.4} {:.4} {:.4})", x[0], x[1], x[2]);
    match w {
        Witness::None => String::new(),
        Witness::Ball { center, radius } => format!("ball {} r={radius:.4}", p(center)),
        Witness::Pair { x, y, distance } => format!("pair {} {} d={distance:.4}", p(x), p(y)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConstant {
    pub n: usize,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub experiment: String,
    pub seed: u64,
    pub rows: usize,
    /// Largest ratio over all rows.
    pub constant: f64,
    pub per_grid: Vec<GridConstant>,
    /// `(max - min) / min` over `per_grid`.
    pub drift: f64,
    /// Observed orders between consecutive grids (convergence only).
    pub orders: Vec<f64>,
    pub violations: Vec<String>,
}

impl EstimateReport {
    pub fn from_rows(experiment: &str, seed: u64, rows: &[Row]) -> Self {
        let mut grids: Vec<usize> = rows.iter().map(|r| r.n).collect();
        grids.dedup();
        let per_grid: Vec<GridConstant> = grids
            .iter()
            .map(|&n| GridConstant {
                n,
                constant: rows.iter().filter(|r| r.n == n).map(|r| r.ratio).fold(0.0, f64::max),
            })
            .collect();
        Self {
            experiment: experiment.to_string(),
            seed,
            rows: rows.len(),
            constant: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
            drift: drift(per_grid.iter().map(|g| g.constant)),
            per_grid,
            orders: Vec::new(),
            violations: Vec::new(),
        }
    }
}

/// `(max - min) / min`; 0 for a single value or all zeros.
pub fn drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || hi <= 0.0 {
        0.0
    } else {
        (hi - lo) / lo
    }
}

/// `log2(e_coarse / e_fine)` for successive halvings of `h`.
pub fn observed_orders(errors: &[(usize, f64)]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 as f64 / w[0].0 as f64).ln())
        .collect()
}

/// CSV with a leading `#` timestamp line; everything after it depends only
/// on the rows.
pub fn write_rows(path: &Path, rows: &[Row]) -> io::Result<()> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut file = fs::File::create(path)?;
    writeln!(file, "# generated unix={stamp}")?;
    file.write_all(&rows_csv(rows)?)?;
    Ok(())
}

pub fn rows_csv(rows: &[Row]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

pub fn read_rows(path: &Path) -> io::Result<Vec<Row>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(io::Error::other)?;
    r.deserialize().collect::<Result<_, _>>().map_err(io::Error::other)
}

pub fn write_summary(path: &Path, report: &EstimateReport) -> io::Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}
