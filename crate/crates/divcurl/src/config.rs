use std::fmt;
use std::path::Path;

use divcurl_core::coeff::{make_coefficient, CoeffFamily, CoeffKind};
use divcurl_core::grid::Point;
use divcurl_core::norms::SamplingPlan;
use divcurl_core::{Preconditioner, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Solve,
    L2Sweep,
    HolderSweep,
    LpSweep,
    CkAlpha,
    H1Remark,
    MaxwellEstimate,
    Convergence,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Solve,
        Experiment::L2Sweep,
        Experiment::HolderSweep,
        Experiment::LpSweep,
        Experiment::CkAlpha,
        Experiment::H1Remark,
        Experiment::MaxwellEstimate,
        Experiment::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::L2Sweep => "l2_sweep",
            Experiment::HolderSweep => "holder_sweep",
            Experiment::LpSweep => "lp_sweep",
            Experiment::CkAlpha => "ck_alpha",
            Experiment::H1Remark => "h1_remark",
            Experiment::MaxwellEstimate => "maxwell_estimate",
            Experiment::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoeffSpec {
    pub kind: String,
    pub alpha: f64,
    pub amplitude: f64,
    pub center: Point,
    pub anisotropy: [f64; 3],
}

impl Default for CoeffSpec {
    fn default() -> Self {
        Self::from_family(&CoeffFamily::identity())
    }
}

impl CoeffSpec {
    pub fn from_family(f: &CoeffFamily) -> Self {
        Self {
            kind: f.kind.name().to_string(),
            alpha: f.alpha,
            amplitude: f.amplitude,
            center: f.center,
            anisotropy: f.anisotropy,
        }
    }

    pub fn family(&self) -> Result<CoeffFamily, String> {
        let kind = CoeffKind::parse(&self.kind).ok_or_else(|| format!("unknown coefficient kind `{}`", self.kind))?;
        let fam = CoeffFamily {
            kind,
            alpha: self.alpha,
            center: self.center,
            amplitude: self.amplitude,
            anisotropy: self.anisotropy,
        };
        fam.validate().map_err(|e| e.to_string())?;
        Ok(fam)
    }

    fn holder(alpha: f64) -> Self {
        Self::from_family(&CoeffFamily::holder(alpha, divcurl_core::mms::HOLDER_AMPLITUDE))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub tolerance: f64,
    /// 0 means `50 n`.
    pub max_iterations: usize,
    pub preconditioner: String,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tolerance: d.tolerance,
            max_iterations: 0,
            preconditioner: d.preconditioner.name().to_string(),
        }
    }
}

impl SolverSpec {
    pub fn config(&self) -> Result<SolverConfig, String> {
        let preconditioner = Preconditioner::parse(&self.preconditioner)
            .ok_or_else(|| format!("unknown preconditioner `{}`", self.preconditioner))?;
        let cfg = SolverConfig {
            tolerance: self.tolerance,
            max_iterations: (self.max_iterations > 0).then_some(self.max_iterations),
            preconditioner,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormSpec {
    pub alpha: f64,
    pub tau: f64,
    pub p: f64,
    pub k: u8,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            tau: 2.0,
            p: 6.0,
            k: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSpec {
    /// 0 picks a stride giving about eight centers per axis.
    pub center_stride: usize,
    pub pair_budget: usize,
    pub near_pair_radius: usize,
    pub interior_margin: f64,
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        let d = SamplingPlan::default();
        Self {
            center_stride: d.center_stride.unwrap_or(0),
            pair_budget: d.pair_budget,
            near_pair_radius: d.near_pair_radius,
            interior_margin: d.interior_margin,
            seed: d.seed,
        }
    }
}

impl SamplingSpec {
    pub fn plan(&self) -> Result<SamplingPlan, String> {
        let plan = SamplingPlan {
            center_stride: (self.center_stride > 0).then_some(self.center_stride),
            pair_budget: self.pair_budget,
            near_pair_radius: self.near_pair_radius,
            interior_margin: self.interior_margin,
            seed: self.seed,
        };
        plan.validate().map_err(|e| e.to_string())?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaxwellSpec {
    pub alpha: f64,
}

impl Default for MaxwellSpec {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    /// Largest accepted `(max - min) / min` of the per-grid constants; 0
    /// disables the check.
    pub max_drift: f64,
    pub order: f64,
    pub order_tolerance: f64,
    /// Largest accepted closure residual for cases with a known solution.
    pub max_residual: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            max_drift: 0.0,
            order: 2.0,
            order_tolerance: 0.3,
            max_residual: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
    pub fields: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            fields: false,
        }
    }
}

/// Source data for `solve`: `zero`, `random`, `smooth` (discrete
/// manufactured from `a` and `b`) or an analytic catalog id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grids: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub case: String,
    pub a: CoeffSpec,
    pub b: CoeffSpec,
    pub solver: SolverSpec,
    pub norms: NormSpec,
    pub sampling: SamplingSpec,
    pub maxwell: MaxwellSpec,
    pub checks: Checks,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults(Experiment::Solve)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
}

const CASES: [&str; 3] = ["zero", "random", "smooth"];

impl ExperimentConfig {
    /// The documented defaults for one experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            grids: vec![16, 32],
            instances: 1,
            seed: 0,
            case: "smooth".into(),
            a: CoeffSpec::default(),
            b: CoeffSpec::default(),
            solver: SolverSpec::default(),
            norms: NormSpec::default(),
            sampling: SamplingSpec::default(),
            maxwell: MaxwellSpec::default(),
            checks: Checks::default(),
            output: OutputSpec::default(),
        };
        match experiment {
            Experiment::Solve => {}
            Experiment::L2Sweep => {
                c.instances = 20;
                c.grids = vec![16, 32, 64];
                c.a = CoeffSpec::holder(0.5);
                c.checks.max_drift = 0.2;
            }
            Experiment::HolderSweep | Experiment::LpSweep => {
                c.instances = 5;
                c.grids = vec![32, 64];
                c.a = CoeffSpec::holder(c.norms.alpha);
                c.checks.max_drift = 0.3;
            }
            Experiment::CkAlpha => {
                c.instances = 5;
                c.a = CoeffSpec::from_family(&CoeffFamily::smooth(0.5));
                c.checks.max_drift = 0.3;
            }
            Experiment::H1Remark => {
                c.instances = 5;
                c.grids = vec![16, 32, 64];
                c.a = CoeffSpec::from_family(&CoeffFamily::lipschitz(0.5));
                c.b = CoeffSpec::from_family(&CoeffFamily::lipschitz(0.25));
                c.checks.max_drift = 0.3;
            }
            Experiment::MaxwellEstimate => {
                c.instances = 3;
                c.checks.max_drift = 0.3;
            }
            Experiment::Convergence => {
                c.grids = vec![16, 32, 64];
                c.case = "grad-sine".into();
            }
        }
        c
    }

    /// Parses a possibly partial file; missing keys take the defaults of the
    /// file's experiment.
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        let user: toml::Table = toml::from_str(text)?;
        let experiment = match user.get("experiment") {
            Some(v) => Experiment::deserialize(v.clone())?,
            None => Experiment::Solve,
        };
        let mut merged = toml::Table::try_from(Self::defaults(experiment)).expect("defaults serialize");
        merge(&mut merged, user);
        Self::deserialize(merged)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn tau(&self) -> f64 {
        self.norms.tau
    }

    /// Every violated invariant, keyed by the offending config key.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |key: &str, message: String| {
            out.push(Violation {
                key: key.to_string(),
                message,
            })
        };
        if self.grids.is_empty() {
            bad("grids", "at least one grid size required".into());
        }
        if let Some(&n) = self.grids.iter().find(|&&n| n < divcurl_core::Grid::MIN_CELLS) {
            bad("grids", format!("grid size {n} below the minimum of {}", divcurl_core::Grid::MIN_CELLS));
        }
        if self.grids.windows(2).any(|w| w[0] >= w[1]) {
            bad("grids", "grid sizes must be strictly ascending".into());
        }
        if self.instances == 0 {
            bad("instances", "must be at least 1".into());
        }
        for (key, spec) in [("a", &self.a), ("b", &self.b)] {
            if let Err(e) = coefficient_check(spec, &self.grids) {
                bad(key, e);
            }
        }
        if let Err(e) = self.solver.config() {
            bad("solver", e);
        }
        if let Err(e) = self.sampling.plan() {
            bad("sampling", e);
        }
        let alpha = self.norms.alpha;
        let alpha_ok = alpha > 0.0 && alpha < 1.0;
        if !alpha_ok {
            bad("norms.alpha", format!("must lie in (0, 1), got {alpha}"));
        }
        match self.experiment {
            Experiment::HolderSweep if alpha_ok => {
                let want = 2.0 * alpha + 1.0;
                if (self.norms.tau - want).abs() > 1e-12 {
                    bad("norms.tau", format!("τ must equal 2α+1 = {want:.1}"));
                }
            }
            Experiment::LpSweep if alpha_ok => {
                let min = 3.0 / (1.0 - alpha);
                if !(self.norms.p >= min - 1e-12) {
                    bad("norms.p", format!("p ≥ 3/(1−α) = {} required", fmt_number(min)));
                }
            }
            Experiment::CkAlpha if self.norms.k != 1 => {
                bad("norms.k", format!("ck_alpha measures k = 1, got {}", self.norms.k));
            }
            Experiment::Solve | Experiment::Convergence => {
                let catalog = divcurl_core::mms::CATALOG.iter().any(|(id, _)| *id == self.case);
                let known = catalog || (self.experiment == Experiment::Solve && CASES.contains(&self.case.as_str()));
                if !known {
                    bad("case", format!("unknown case `{}`", self.case));
                }
            }
            Experiment::MaxwellEstimate if !(self.maxwell.alpha > 0.0 && self.maxwell.alpha < 1.0) => {
                bad("maxwell.alpha", format!("must lie in (0, 1), got {}", self.maxwell.alpha));
            }
            _ => {}
        }
        if self.checks.max_drift < 0.0 {
            bad("checks.max_drift", "must be non-negative".into());
        }
        out
    }
}

/// The family is valid and positive definite on every grid.
fn coefficient_check(spec: &CoeffSpec, grids: &[usize]) -> Result<(), String> {
    let fam = spec.family()?;
    for g in grids.iter().filter_map(|&n| divcurl_core::Grid::new(n).ok()) {
        make_coefficient(&fam, g).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Shortest decimal spelling, `6` rather than `6.0`.
fn fmt_number(x: f64) -> String {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        format!("{r:.0}")
    } else {
        format!("{x}")
    }
}
