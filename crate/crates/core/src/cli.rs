//! Command-line front end: argument parsing, subcommands and output emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::classifier::{classify_scaling, ScalingClass, ScalingKind};
use crate::config::{load_config, ConfigError, RunConfig};
use crate::elastic3d::{scaling_sweep, SweepMode, SweepOptions, SweepResult};
use crate::grid::MidplateGrid;
use crate::immersion::{expansion_fields, frame_transport, residual_norms, riem_identity_check, ExpansionFields, FrameOptions};
use crate::lbfgs::LbfgsOptions;
use crate::limit_energy::{LimitEnergyResult, LimitProblem, MinimizeOptions};
use crate::linalg::{Mat2, Vec3};
use crate::metric::MetricField;
use crate::quad_forms::{coefficients, coefficients_via_moments, CoefficientSet};
use crate::tensor::{curvature_midplate_jets, CurvatureMidplateJets};

#[derive(Debug, Parser)]
#[command(name = "shellscale", version, about = "Energy scaling of prestrained thin films")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the energy-scaling regime of a metric.
    Classify(ClassifyArgs),
    /// Dump normal jets of the curvature on the midplate grid.
    Curvature(CurvatureArgs),
    /// Build the matched isometry expansion and its residuals.
    Expand(OrderArgs),
    /// Print the limit-energy coefficient table as CSV.
    Coeffs(CoeffsArgs),
    /// Evaluate or minimise the limit energy.
    LimitEnergy(LimitArgs),
    /// Thickness sweep of the 3D energy with a log-log slope fit.
    Sweep(SweepArgs),
    /// Run classify, expand, coeffs, limit-energy and sweep in one document.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long)]
    pub max_order: Option<usize>,
    #[arg(long)]
    pub tol_abs: Option<f64>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long, default_value_t = 4)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Expansion level `n`; defaults to the classified level.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    /// Validated when given; the table itself does not depend on it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long)]
    pub order: Option<usize>,
    /// JSON file `{"v": [[x, y, z], ...]}` on the limit grid.
    #[arg(long)]
    pub displacement: Option<PathBuf>,
    #[arg(long)]
    pub minimize: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub order: Option<usize>,
    /// Comma-separated, strictly decreasing thicknesses.
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<SweepMode>,
    /// `NXxNYxNZ`, e.g. `17x17x5`.
    #[arg(long, value_parser = parse_mesh)]
    pub mesh: Option<[usize; 3]>,
    /// CSV table destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary destination (stdout when omitted).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub displacement: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
}

fn parse_mode(s: &str) -> Result<SweepMode, String> {
    match s {
        "ansatz" => Ok(SweepMode::Ansatz),
        "recovery" => Ok(SweepMode::Recovery),
        "minimize" => Ok(SweepMode::Minimize),
        _ => Err(format!("unknown mode `{s}` (expected ansatz, recovery or minimize)")),
    }
}

fn parse_mesh(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split('x').collect();
    let nums: Result<Vec<usize>, _> = parts.iter().map(|p| p.trim().parse::<usize>()).collect();
    match nums {
        Ok(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        _ => Err(format!("mesh `{s}` is not of the form NXxNYxNZ")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {message}")]
    Numerical { context: &'static str, message: String },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical { .. } => 2,
        }
    }
}

fn numerical<E: std::fmt::Display>(context: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Numerical { context, message: e.to_string() }
}

/// `0` when every gate passed, `2` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub gates_passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.gates_passed {
            0
        } else {
            2
        }
    }
}

const OK: Outcome = Outcome { gates_passed: true };

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Pretty JSON with every float at 17 significant digits.
pub fn to_json(value: &impl Serialize) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsPretty::default());
    value.serialize(&mut ser).expect("report serialises");
    let mut s = String::from_utf8(buf).expect("utf8");
    s.push('\n');
    s
}

/// [`SigDigits`] layered over the pretty formatter.
#[derive(Default)]
struct SigDigitsPretty<'a> {
    pretty: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.pretty.$name(writer $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for SigDigitsPretty<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        SigDigits.write_f64(writer, value)
    }
    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn m2(m: &Mat2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn v3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

impl From<&MidplateGrid> for GridInfo {
    fn from(g: &MidplateGrid) -> GridInfo {
        GridInfo { nx: g.nx, ny: g.ny, x1: g.bounds.x1, x2: g.bounds.x2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    #[serde(flatten)]
    pub class: ScalingClass,
    pub n: Option<usize>,
    pub exponent: Option<usize>,
    pub ladder_consistent: bool,
}

impl From<ScalingClass> for ClassifyReport {
    fn from(class: ScalingClass) -> ClassifyReport {
        ClassifyReport { n: class.n(), exponent: class.exponent(), ladder_consistent: class.ladder_consistent(), class }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub grid: GridInfo,
    pub order: usize,
    /// `normal[k][node]` is `[∂3^k R_{i3,j3}]`.
    pub normal: Vec<Vec<[[f64; 2]; 2]>>,
    /// `(R_{12,12}, R_{12,13}, R_{12,23})` per node.
    pub base: Vec<[f64; 3]>,
    pub scale: Vec<f64>,
}

impl From<&CurvatureMidplateJets> for CurvatureReport {
    fn from(j: &CurvatureMidplateJets) -> CurvatureReport {
        CurvatureReport {
            grid: (&j.grid).into(),
            order: j.order,
            normal: j.normal.iter().map(|k| k.iter().map(m2).collect()).collect(),
            base: j.base.clone(),
            scale: j.scale.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpandReport {
    pub grid: GridInfo,
    pub order: usize,
    pub basepoint: [usize; 2],
    pub holonomy: f64,
    pub metric_defect: f64,
    pub y0: Vec<[f64; 3]>,
    /// `b[k-1]` is `b_k`, `k = 1..=n+2`.
    pub b: Vec<Vec<[f64; 3]>>,
    /// Interior max-norm of the expansion residual for `m = 1..=n+1`.
    pub residual_norms: Vec<f64>,
    pub riem_defect: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub n: usize,
    pub grid: GridInfo,
    pub total: f64,
    pub bending: f64,
    pub complement: f64,
    pub space: f64,
    pub direct_integral: f64,
    pub coefficients: CoefficientSet,
    pub constraint_defect: f64,
    pub symmetry_defect: f64,
    pub projection_iterations: usize,
    pub curvature: Vec<[[f64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<Vec<[f64; 3]>>,
}

fn limit_report(problem: &LimitProblem, r: &LimitEnergyResult, v: &[Vec3], argmin: bool) -> Result<LimitReport, CliError> {
    Ok(LimitReport {
        n: problem.n,
        grid: (&problem.fields.grid).into(),
        total: r.total,
        bending: r.bending,
        complement: r.complement,
        space: r.space,
        direct_integral: problem.direct_integral(v).map_err(numerical("limit-energy"))?,
        coefficients: r.coefficients,
        constraint_defect: r.constraint_defect,
        symmetry_defect: r.symmetry_defect,
        projection_iterations: problem.projection.iterations,
        curvature: r.curvature.iter().map(m2).collect(),
        argmin: argmin.then(|| v.iter().map(v3).collect()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub classification: ClassifyReport,
    pub level: Option<usize>,
    pub residual_norms: Option<Vec<f64>>,
    pub riem_defect: Option<f64>,
    pub coefficients: Vec<CoefficientSet>,
    pub limit_energy: Option<LimitReport>,
    pub sweep: Option<SweepResult>,
    pub gates: Vec<Gate>,
    pub pass: bool,
}

/// Everything needed downstream of the metric.
pub struct Session {
    pub cfg: RunConfig,
    pub metric: MetricField,
}

impl Session {
    pub fn load(path: &Path) -> Result<Session, CliError> {
        let cfg = load_config(path)?;
        Session::new(cfg)
    }

    pub fn new(cfg: RunConfig) -> Result<Session, CliError> {
        let metric = cfg.metric()?;
        Ok(Session { cfg, metric })
    }

    fn frame_options(&self) -> FrameOptions {
        FrameOptions { holonomy_tol: self.cfg.tolerances.holonomy, curl_tol: self.cfg.tolerances.curl, ..Default::default() }
    }

    pub fn classify(&self, max_order: Option<usize>) -> Result<ScalingClass, CliError> {
        let max_order = max_order.unwrap_or(self.cfg.tolerances.max_order);
        let jets = curvature_midplate_jets(&self.metric, &self.cfg.grid(), max_order).map_err(numerical("classify"))?;
        classify_scaling(&jets, max_order, self.cfg.classifier_tolerances()).map_err(numerical("classify"))
    }

    /// The requested level, or the classified one (`1` for flat metrics).
    pub fn level(&self, order: Option<usize>) -> Result<usize, CliError> {
        if let Some(n) = order {
            if n == 0 {
                return Err(CliError::Usage("--order must be at least 1".into()));
            }
            return Ok(n);
        }
        let class = self.classify(None)?;
        match class.kind {
            ScalingKind::Exponent { n } => Ok(n),
            ScalingKind::Flat { .. } => Ok(1),
            ScalingKind::BaseRegime => Err(CliError::Numerical {
                context: "classify",
                message: "the midplate curvature is nonzero: no expansion level exists".into(),
            }),
        }
    }

    pub fn fields(&self, grid: &MidplateGrid, n: usize) -> Result<(ExpansionFields, f64, f64), CliError> {
        let frames = frame_transport(&self.metric, grid, &self.frame_options()).map_err(numerical("expand"))?;
        let defect = frames.metric_defect(&self.metric).map_err(numerical("expand"))?;
        let fields = expansion_fields(&self.metric, &frames, n).map_err(numerical("expand"))?;
        Ok((fields, frames.holonomy, defect))
    }

    pub fn expand(&self, n: usize) -> Result<ExpandReport, CliError> {
        let grid = self.cfg.grid();
        let (fields, holonomy, metric_defect) = self.fields(&grid, n)?;
        let residual_norms = residual_norms(&fields).map_err(numerical("expand"))?;
        let jets = curvature_midplate_jets(&self.metric, &grid, n).map_err(numerical("expand"))?;
        let riem_defect = riem_identity_check(&fields, &jets).ok();
        Ok(ExpandReport {
            grid: (&grid).into(),
            order: n,
            basepoint: [fields.basepoint.0, fields.basepoint.1],
            holonomy,
            metric_defect,
            y0: fields.y0.iter().map(v3).collect(),
            b: fields.normals.iter().map(|b| b.iter().map(v3).collect()).collect(),
            residual_norms,
            riem_defect,
        })
    }

    pub fn limit_problem(&self, grid: &MidplateGrid, n: usize) -> Result<LimitProblem, CliError> {
        let (fields, _, _) = self.fields(grid, n)?;
        let jets = curvature_midplate_jets(&self.metric, grid, n).map_err(numerical("limit-energy"))?;
        LimitProblem::new(&fields, &jets, &self.cfg.density(), n).map_err(numerical("limit-energy"))
    }

    fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions { epsilon: self.cfg.limit.epsilon, ..Default::default() }
    }

    pub fn limit_energy(&self, n: usize, v: Option<Vec<Vec3>>, minimize: bool) -> Result<LimitReport, CliError> {
        let problem = self.limit_problem(&self.cfg.limit_grid(), n)?;
        if minimize {
            let m = problem.minimize(&self.minimize_options()).map_err(numerical("limit-energy"))?;
            return limit_report(&problem, &m.value, &m.v, true);
        }
        let v = v.unwrap_or_else(|| vec![Vec3::zeros(); problem.fields.grid.len()]);
        if v.len() != problem.fields.grid.len() {
            return Err(CliError::Usage(format!(
                "displacement has {} nodes, the limit grid has {}",
                v.len(),
                problem.fields.grid.len()
            )));
        }
        let r = problem.eval(&v).map_err(numerical("limit-energy"))?;
        limit_report(&problem, &r, &v, false)
    }

    pub fn sweep(
        &self,
        n: usize,
        hs: &[f64],
        mode: SweepMode,
        mesh: [usize; 3],
        v: Option<Vec<Vec3>>,
    ) -> Result<SweepResult, CliError> {
        let grid = MidplateGrid::new(mesh[0], mesh[1], self.cfg.domain());
        let d = self.cfg.density();
        let opts = SweepOptions {
            n,
            nz: mesh[2],
            mode,
            lbfgs: LbfgsOptions { max_iter: self.cfg.sweep.max_iter, ..Default::default() },
        };
        if mode == SweepMode::Ansatz {
            let (fields, _, _) = self.fields(&grid, n)?;
            return scaling_sweep(&self.metric, &d, &fields, None, hs, &opts).map_err(numerical("sweep"));
        }
        let problem = self.limit_problem(&grid, n)?;
        let v = match (mode, v) {
            (_, Some(v)) => v,
            (SweepMode::Minimize, None) => problem.minimize(&self.minimize_options()).map_err(numerical("sweep"))?.v,
            _ => vec![Vec3::zeros(); grid.len()],
        };
        if v.len() != grid.len() {
            return Err(CliError::Usage(format!("displacement has {} nodes, the sweep grid has {}", v.len(), grid.len())));
        }
        scaling_sweep(&self.metric, &d, &problem.fields, Some((&problem, &v)), hs, &opts).map_err(numerical("sweep"))
    }

    pub fn report(&self) -> Result<Report, CliError> {
        let tol = &self.cfg.tolerances;
        let class = self.classify(None)?;
        let mut gates = vec![Gate {
            name: "ladder_consistent".into(),
            value: f64::from(u8::from(class.ladder_consistent())),
            bound: "= 1".into(),
            pass: class.ladder_consistent(),
        }];
        let coefficient_table: Vec<CoefficientSet> = (1..=10).map(coefficients).collect();
        let worst_identity = coefficient_table.iter().map(|c| c.identity_defect()).fold(0.0, f64::max);
        gates.push(Gate {
            name: "coefficient_identity".into(),
            value: worst_identity,
            bound: "<= 1e-14".into(),
            pass: worst_identity <= 1e-14,
        });
        let level = match class.kind {
            ScalingKind::Exponent { n } => Some(n),
            ScalingKind::Flat { .. } => Some(1),
            ScalingKind::BaseRegime => None,
        };
        let (mut residuals, mut riem, mut limit, mut sweep) = (None, None, None, None);
        if let Some(n) = level {
            let expand = self.expand(n)?;
            let lower = expand.residual_norms[..n].iter().copied().fold(0.0, f64::max);
            gates.push(Gate {
                name: "expansion_residuals_below_level".into(),
                value: lower,
                bound: format!("<= {:e}", tol.disc),
                pass: lower <= tol.disc,
            });
            if let Some(defect) = expand.riem_defect {
                gates.push(Gate {
                    name: "riem_identity".into(),
                    value: defect,
                    bound: format!("<= {:e}", tol.disc),
                    pass: defect <= tol.disc,
                });
            }
            residuals = Some(expand.residual_norms);
            riem = expand.riem_defect;

            let problem = self.limit_problem(&self.cfg.limit_grid(), n)?;
            let m = problem.minimize(&self.minimize_options()).map_err(numerical("limit-energy"))?;
            limit = Some(limit_report(&problem, &m.value, &m.v, false)?);

            let s = &self.cfg.sweep;
            let result = self.sweep(n, &s.h, s.mode, s.mesh, None)?;
            let target = 2.0 * (n as f64 + 1.0);
            if matches!(class.kind, ScalingKind::Flat { .. }) {
                let above = result.points.iter().filter(|p| !p.at_floor).count();
                gates.push(Gate {
                    name: "sweep_at_floor".into(),
                    value: above as f64,
                    bound: "fewer than 3 points above the floor".into(),
                    pass: result.fit.is_none(),
                });
            } else {
                let (lo, hi) = match s.mode {
                    SweepMode::Minimize => (target - 0.4, f64::INFINITY),
                    _ => (target - 0.2, target + 0.6),
                };
                let slope = result.fit.as_ref().map_or(f64::NAN, |f| f.slope);
                gates.push(Gate {
                    name: "sweep_slope".into(),
                    value: slope,
                    bound: format!("in [{lo}, {hi}]"),
                    pass: slope >= lo && slope <= hi,
                });
            }
            sweep = Some(result);
        }
        let pass = gates.iter().all(|g| g.pass);
        Ok(Report {
            classification: class.into(),
            level,
            residual_norms: residuals,
            riem_defect: riem,
            coefficients: coefficient_table,
            limit_energy: limit,
            sweep,
            gates,
            pass,
        })
    }
}

pub fn coefficients_csv(n_max: usize) -> String {
    let mut s = String::from("route,n,alpha,beta,gamma,delta,identity_defect\n");
    for (route, f) in [("closed", coefficients as fn(usize) -> CoefficientSet), ("moments", coefficients_via_moments)] {
        for n in 1..=n_max {
            let c = f(n);
            s.push_str(&format!(
                "{route},{n},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                c.alpha,
                c.beta,
                c.gamma,
                c.delta,
                c.identity_defect()
            ));
        }
    }
    s
}

pub fn sweep_csv(r: &SweepResult) -> String {
    let mut s = String::from("h,energy,scaled_energy,mode\n");
    for p in &r.points {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{}\n", p.h, p.energy, p.scaled_energy, p.mode.name()));
    }
    s
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct DisplacementFile {
    v: Vec<[f64; 3]>,
}

pub fn load_displacement(path: &Path) -> Result<Vec<Vec3>, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let f: DisplacementFile =
        serde_json::from_str(&src).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(f.v.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect())
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Classify(a) => {
            let mut s = Session::load(&a.common.config)?;
            if let Some(t) = a.tol_abs {
                s.cfg.tolerances.tol_abs = t;
            }
            if let Some(t) = a.tol_rel {
                s.cfg.tolerances.tol_rel = t;
            }
            let class = s.classify(a.max_order)?;
            emit(a.common.out.as_deref(), &to_json(&ClassifyReport::from(class)))?;
            Ok(OK)
        }
        Command::Curvature(a) => {
            let s = Session::load(&a.common.config)?;
            let jets = curvature_midplate_jets(&s.metric, &s.cfg.grid(), a.order).map_err(numerical("curvature"))?;
            emit(a.common.out.as_deref(), &to_json(&CurvatureReport::from(&jets)))?;
            Ok(OK)
        }
        Command::Expand(a) => {
            let s = Session::load(&a.common.config)?;
            let n = s.level(a.order)?;
            emit(a.common.out.as_deref(), &to_json(&s.expand(n)?))?;
            Ok(OK)
        }
        Command::Coeffs(a) => {
            if let Some(p) = &a.config {
                load_config(p)?;
            }
            emit(a.out.as_deref(), &coefficients_csv(a.n_max))?;
            Ok(OK)
        }
        Command::LimitEnergy(a) => {
            let s = Session::load(&a.common.config)?;
            let n = s.level(a.order)?;
            let v = a.displacement.as_deref().map(load_displacement).transpose()?;
            emit(a.common.out.as_deref(), &to_json(&s.limit_energy(n, v, a.minimize)?))?;
            Ok(OK)
        }
        Command::Sweep(a) => {
            let s = Session::load(&a.config)?;
            let n = s.level(a.order)?;
            let hs = a.h.unwrap_or_else(|| s.cfg.sweep.h.clone());
            let mode = a.mode.unwrap_or(s.cfg.sweep.mode);
            let mesh = a.mesh.unwrap_or(s.cfg.sweep.mesh);
            let v = a.displacement.as_deref().map(load_displacement).transpose()?;
            let r = s.sweep(n, &hs, mode, mesh, v)?;
            let csv_out = a.out.or_else(|| s.cfg.output.csv.clone());
            if let Some(p) = csv_out {
                emit(Some(&p), &sweep_csv(&r))?;
            }
            emit(a.summary.as_deref(), &to_json(&r))?;
            Ok(OK)
        }
        Command::Report(a) => {
            let s = Session::load(&a.common.config)?;
            let r = s.report()?;
            let out = a.common.out.or_else(|| s.cfg.output.json.clone());
            emit(out.as_deref(), &to_json(&r))?;
            Ok(Outcome { gates_passed: r.pass })
        }
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5e-300]}));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e-300"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn mesh_and_mode_parsing() {
        assert_eq!(parse_mesh("17x17x5"), Ok([17, 17, 5]));
        assert!(parse_mesh("17x17").is_err());
        assert_eq!(parse_mode("minimize"), Ok(SweepMode::Minimize));
        assert!(parse_mode("fast").is_err());
    }

    #[test]
    fn coefficient_csv_has_both_routes() {
        let csv = coefficients_csv(3);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.lines().nth(4).unwrap().starts_with("moments,1,"));
    }
}
