//! Command-line front end.
//!
//! Every command writes a JSON report (to `--json PATH` or stdout); some also
//! write CSV files. Failures print a JSON error object on stderr and map to
//! exit code 2 (bad input), 3 (singular parameters) or 4 (numerical failure).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::beam::{BeamProblem, OneSidedLimits, PiecewiseSolution};
use crate::closed_form::{self, InterfaceSystem};
use crate::error::Error;
use crate::expr;
use crate::mollify::{self, DistDescriptor, LimitReport, LimitVerdict, MollifierSpec, Profile};
use crate::regularize::{self, CompactSet, ConvergenceTable};
use crate::singular_set::{self, Plane, SpectrumReport, Window, ZeroCurveSet};
use crate::bump::TestFunction;

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "DISTBEAM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "distbeam", version, about = "Interface beam solver with distributional coefficients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form solution, interface system and weak residual.
    Solve(SolveArgs),
    /// Singular compressive loads for a constant force.
    Spectrum(SpectrumArgs),
    /// Zero curves of the two-force determinant.
    Trace(TraceArgs),
    /// Convergence of the smoothed-coefficient problem.
    Regularize(RegularizeArgs),
    /// Limits of mollified products of model distributions.
    ProductCheck(ProductArgs),
    /// Re-checks a stored solve report.
    Residual(ResidualArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long = "A", allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long = "B", allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    /// Force on both sides.
    #[arg(long = "P", allow_negative_numbers = true, conflicts_with_all = ["p1", "p2"])]
    pub p: Option<f64>,
    #[arg(long = "P1", allow_negative_numbers = true, requires = "p2")]
    pub p1: Option<f64>,
    #[arg(long = "P2", allow_negative_numbers = true, requires = "p1")]
    pub p2: Option<f64>,
    /// Forcing as an expression in x.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub g: String,
    /// Singularity hint `loc:exp`; both sides may be constant expressions.
    #[arg(long = "sing", value_delimiter = ',')]
    pub sing: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Samples of u as `x,u,side`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Points per side in the u samples.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Samples of the displacement w as `x,w,dw`.
    #[arg(long)]
    pub w_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    pub w_samples: usize,
    /// Size of the test-function family for the weak residual.
    #[arg(long, default_value_t = 24)]
    pub tests: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long = "A")]
    pub a: f64,
    #[arg(long = "B")]
    pub b: f64,
    #[arg(long)]
    pub x0: f64,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlaneArg {
    #[value(name = "M_prime")]
    MPrime,
    #[value(name = "N")]
    N,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[arg(long = "A")]
    pub a: f64,
    #[arg(long = "B")]
    pub b: f64,
    #[arg(long)]
    pub x0: f64,
    #[arg(long, value_enum, default_value = "M_prime")]
    pub plane: PlaneArg,
    /// `s_min,s_max,t_min,t_max`
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 10.0, 0.0, 10.0])]
    pub window: Vec<f64>,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Vertices as `curve,s,t,p1,p2`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RegularizeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Smoothing widths; each may be a constant expression such as 1/30.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<String>,
    /// Grid intervals per solve; by default chosen from eps.
    #[arg(long)]
    pub n: Option<usize>,
    /// Compact set as `a:b` intervals; by default `[0, x0-0.1] ∪ [x0+0.1, 1]`.
    #[arg(long = "K", value_delimiter = ',')]
    pub k: Vec<String>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Regularized grid solutions as `eps,x,u`.
    #[arg(long)]
    pub grid_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum ProfileArg {
    All,
    Symmetric,
    Asymmetric,
    Polynomial,
}

#[derive(Debug, Clone, Args)]
pub struct ProductArgs {
    /// Two factors from `Hminus`, `Hplus`, `delta`, `deltaK` (K-th derivative).
    #[arg(long, value_delimiter = ',', default_values = ["Hminus", "delta"])]
    pub pair: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    pub x0: f64,
    /// Test function `center,radius`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.45, 0.3])]
    pub psi: Vec<f64>,
    #[arg(long, value_enum, default_value = "all")]
    pub profile: ProfileArg,
    #[arg(long, default_value_t = 0.125)]
    pub eps0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value_t = 7)]
    pub count: usize,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ResidualArgs {
    /// A report written by `solve`.
    #[arg(long)]
    pub report: PathBuf,
    /// Problem to check against; defaults to the one stored in the report.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value_t = 24)]
    pub tests: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub enum CliError {
    Solver(Error),
    Input(String),
    Output(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Solver(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(Error::SingularParameter { .. }) => 3,
            CliError::Solver(e) if e.is_validation() => 2,
            CliError::Solver(_) | CliError::Output(_) => 4,
            CliError::Input(_) => 2,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Solver(e) => {
                let dbg = format!("{e:?}");
                dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
            }
            CliError::Input(_) => "Input".into(),
            CliError::Output(_) => "Output".into(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Solver(e) => e.to_string(),
            CliError::Input(m) | CliError::Output(m) => m.clone(),
        }
    }

    /// The machine-readable form printed on stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "schema": SCHEMA,
            "error": {
                "kind": self.kind(),
                "message": self.message(),
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Problem parameters as stored in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub x0: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    pub g: String,
    /// `(location, exponent)` pairs.
    pub singularities: Vec<(f64, f64)>,
}

impl ProblemSpec {
    pub fn from_args(args: &ProblemArgs) -> CliResult<Self> {
        let (p1, p2) = match (args.p, args.p1, args.p2) {
            (Some(p), None, None) => (p, p),
            (None, Some(p1), Some(p2)) => (p1, p2),
            _ => {
                return Err(Error::InvalidParameter("give either --P or both --P1 and --P2".into()).into());
            }
        };
        let singularities = args
            .sing
            .iter()
            .map(|s| expr::parse_singularity_hint(s))
            .collect::<crate::error::Result<Vec<_>>>()?;
        Ok(Self {
            a: args.a,
            b: args.b,
            x0: args.x0,
            p1,
            p2,
            g: args.g.clone(),
            singularities,
        })
    }

    pub fn build(&self) -> CliResult<BeamProblem> {
        let ast = expr::parse(&self.g)?;
        let g = expr::to_forcing(&ast, &self.singularities)?;
        Ok(BeamProblem::with_two_forces(self.a, self.b, self.x0, self.p1, self.p2, g)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c1: f64,
    pub d1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: u32,
    pub problem: ProblemSpec,
    pub coefficients: Coefficients,
    /// `H` entries, `det`, `z` and the scale used for the singularity test.
    pub system: InterfaceSystem,
    pub limits: OneSidedLimits,
    /// `u(x0-) / u(x0+)`, absent when `u(x0+) = 0`.
    pub jump_ratio: Option<f64>,
    /// `B / A`, the value `jump_ratio` must match.
    pub expected_jump_ratio: f64,
    pub weak_residual: f64,
    pub test_count: usize,
    pub seed: Option<u64>,
    pub displacement_jump: f64,
    pub slope_jump: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Stamped<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    match path {
        Some(p) => write_file(p, &s),
        None => std::io::stdout()
            .write_all(s.as_bytes())
            .map_err(|e| CliError::Output(format!("stdout: {e}"))),
    }
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    fs::write(path, content).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn weak_residual(s: &PiecewiseSolution, problem: &BeamProblem, tests: usize, seed: Option<u64>) -> CliResult<f64> {
    if tests == 0 {
        return Err(Error::InvalidParameter("--tests must be positive".into()).into());
    }
    let family = closed_form::test_family(problem, tests, seed);
    Ok(closed_form::weak_residual(s, problem, &family)?)
}

fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let spec = ProblemSpec::from_args(&args.problem)?;
    let problem = spec.build()?;
    if args.samples < 2 || args.w_samples < 2 {
        return Err(Error::InvalidParameter("sample counts must be at least 2".into()).into());
    }
    let system = closed_form::interface_system(&problem)?;
    let s = closed_form::solve(&problem)?;
    let limits = s.limits();
    let disp = closed_form::recover_displacement(&s)?;
    let report = SolveReport {
        schema: SCHEMA,
        problem: spec,
        coefficients: Coefficients { c1: s.c1, d1: s.d1 },
        system,
        limits,
        jump_ratio: limits.jump_ratio(),
        expected_jump_ratio: problem.a.right / problem.a.left,
        weak_residual: weak_residual(&s, &problem, args.tests, args.seed)?,
        test_count: args.tests,
        seed: args.seed,
        displacement_jump: disp.jump_delta,
        slope_jump: disp.jump_theta,
    };
    if let Some(path) = &args.csv {
        let x0 = problem.x0();
        let n = args.samples - 1;
        let mut out = String::from("x,u,side\n");
        for i in 0..=n {
            let x = if i == n { x0 } else { x0 * i as f64 / n as f64 };
            out.push_str(&format!("{x},{},minus\n", s.eval_minus(x)?));
        }
        for i in 0..=n {
            let x = if i == n { 1.0 } else { x0 + (1.0 - x0) * i as f64 / n as f64 };
            out.push_str(&format!("{x},{},plus\n", s.eval_plus(x)?));
        }
        write_file(path, &out)?;
    }
    if let Some(path) = &args.w_csv {
        let n = args.w_samples - 1;
        let mut out = String::from("x,w,dw\n");
        for i in 0..=n {
            let x = i as f64 / n as f64;
            out.push_str(&format!("{x},{},{}\n", disp.w(x)?, disp.w_prime(x)?));
        }
        write_file(path, &out)?;
    }
    emit_json(&report, args.json.as_deref())
}

fn cmd_spectrum(args: &SpectrumArgs) -> CliResult<()> {
    let r: SpectrumReport = singular_set::pl_sequence(args.a, args.b, args.x0, args.count)?;
    #[derive(Serialize)]
    struct Body {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B")]
        b: f64,
        x0: f64,
        spectrum: SpectrumReport,
    }
    let body = Body {
        a: args.a,
        b: args.b,
        x0: args.x0,
        spectrum: r,
    };
    emit_json(&Stamped { schema: SCHEMA, command: "spectrum", body }, args.json.as_deref())
}

fn cmd_trace(args: &TraceArgs) -> CliResult<()> {
    let w = &args.window;
    if w.len() != 4 {
        return Err(CliError::Input("--window takes s_min,s_max,t_min,t_max".into()));
    }
    let window = Window::new(w[0], w[1], w[2], w[3])?;
    let plane = match args.plane {
        PlaneArg::MPrime => Plane::MPrime,
        PlaneArg::N => Plane::N,
    };
    let set: ZeroCurveSet = singular_set::trace_zero_set(plane, args.a, args.b, args.x0, window, args.grid)?;
    if let Some(path) = &args.csv {
        let mut out = String::from("curve,s,t,p1,p2\n");
        for (i, c) in set.curves.iter().enumerate() {
            for v in &c.vertices {
                out.push_str(&format!("{i},{},{},{},{}\n", v.s, v.t, v.p1, v.p2));
            }
        }
        write_file(path, &out)?;
    }
    emit_json(&Stamped { schema: SCHEMA, command: "trace", body: set }, args.json.as_deref())
}

fn parse_constant(s: &str) -> CliResult<f64> {
    Ok(expr::parse(s)?.eval_constant()?)
}

fn cmd_regularize(args: &RegularizeArgs) -> CliResult<()> {
    let spec = ProblemSpec::from_args(&args.problem)?;
    let problem = spec.build()?;
    let eps: Vec<f64> = args.eps.iter().map(|s| parse_constant(s)).collect::<CliResult<_>>()?;
    let k = if args.k.is_empty() {
        CompactSet::default_for(problem.x0())
    } else {
        let intervals = args
            .k
            .iter()
            .map(|s| {
                let (l, r) = s
                    .split_once(':')
                    .ok_or_else(|| CliError::Input(format!("interval '{s}' must have the form a:b")))?;
                Ok((parse_constant(l)?, parse_constant(r)?))
            })
            .collect::<CliResult<Vec<_>>>()?;
        CompactSet::new(intervals)?
    };
    let fixed = args.n;
    let rule = move |e: f64| fixed.unwrap_or_else(|| regularize::default_n(e));
    let table: ConvergenceTable = regularize::convergence_study(&problem, &eps, &k, rule)?;
    if let Some(path) = &args.grid_csv {
        let mut out = String::from("eps,x,u\n");
        for &e in &eps {
            let grid = regularize::solve_regularized(&problem, e, rule(e))?;
            for (x, u) in grid.points() {
                out.push_str(&format!("{e},{x},{u}\n"));
            }
        }
        write_file(path, &out)?;
    }
    #[derive(Serialize)]
    struct Body {
        problem: ProblemSpec,
        table: ConvergenceTable,
        strictly_decreasing: bool,
    }
    let body = Body {
        problem: spec,
        strictly_decreasing: table.strictly_decreasing(),
        table,
    };
    emit_json(&Stamped { schema: SCHEMA, command: "regularize", body }, args.json.as_deref())
}

fn parse_factor(name: &str, x0: f64) -> CliResult<DistDescriptor> {
    let d = match name {
        "Hminus" => DistDescriptor::heaviside_minus(x0)?,
        "Hplus" => DistDescriptor::heaviside_plus(x0)?,
        "delta" => DistDescriptor::delta(x0, 0)?,
        _ => {
            let k = name
                .strip_prefix("delta")
                .and_then(|k| k.parse::<usize>().ok())
                .ok_or_else(|| CliError::Input(format!("unknown factor '{name}'")))?;
            DistDescriptor::delta(x0, k)?
        }
    };
    Ok(d)
}

#[derive(Debug, Clone, Serialize)]
struct ProductEntry {
    profile: Profile,
    #[serde(flatten)]
    report: LimitReport,
    /// Limit divided by `ψ(x0)` when it converged.
    coefficient: Option<f64>,
}

fn cmd_product(args: &ProductArgs) -> CliResult<()> {
    if args.pair.len() != 2 || args.psi.len() != 2 {
        return Err(CliError::Input("--pair and --psi each take two comma-separated values".into()));
    }
    let u = parse_factor(&args.pair[0], args.x0)?;
    let v = parse_factor(&args.pair[1], args.x0)?;
    let psi = TestFunction::new(args.psi[0], args.psi[1]);
    let profiles: Vec<Profile> = match args.profile {
        ProfileArg::All => Profile::ALL.to_vec(),
        ProfileArg::Symmetric => vec![Profile::SymmetricBump],
        ProfileArg::Asymmetric => vec![Profile::AsymmetricBump],
        ProfileArg::Polynomial => vec![Profile::PolynomialBump],
    };
    let schedule = mollify::geometric_schedule(args.eps0, args.ratio, args.count);
    let psi_x0 = psi.value(args.x0);
    let mut entries = Vec::new();
    for p in profiles {
        let report = mollify::model_product_limit(&u, &v, &psi, &MollifierSpec::model(p), &schedule)?;
        let coefficient = match report.verdict {
            LimitVerdict::Converged { value, .. } if psi_x0 != 0.0 => Some(value / psi_x0),
            _ => None,
        };
        entries.push(ProductEntry {
            profile: p,
            report,
            coefficient,
        });
    }
    #[derive(Serialize)]
    struct Body {
        pair: Vec<String>,
        x0: f64,
        psi: TestFunction,
        psi_at_x0: f64,
        results: Vec<ProductEntry>,
    }
    let body = Body {
        pair: args.pair.clone(),
        x0: args.x0,
        psi,
        psi_at_x0: psi_x0,
        results: entries,
    };
    emit_json(&Stamped { schema: SCHEMA, command: "product-check", body }, args.json.as_deref())
}

fn read_json(path: &Path) -> CliResult<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn field<T: for<'de> Deserialize<'de>>(v: &serde_json::Value, key: &str, path: &Path) -> CliResult<T> {
    let f = v
        .get(key)
        .ok_or_else(|| CliError::Input(format!("{}: missing field '{key}'", path.display())))?;
    serde_json::from_value(f.clone()).map_err(|e| CliError::Input(format!("{}: field '{key}': {e}", path.display())))
}

fn cmd_residual(args: &ResidualArgs) -> CliResult<()> {
    let stored = read_json(&args.report)?;
    let schema: u32 = field(&stored, "schema", &args.report)?;
    if schema != SCHEMA {
        return Err(CliError::Input(format!("unsupported report schema {schema}")));
    }
    let coefficients: Coefficients = field(&stored, "coefficients", &args.report)?;
    let spec: ProblemSpec = match &args.problem {
        Some(p) => field(&read_json(p)?, "problem", p)?,
        None => field(&stored, "problem", &args.report)?,
    };
    let problem = spec.build()?;
    let s = PiecewiseSolution::from_coefficients(problem.clone(), coefficients.c1, coefficients.d1)?;
    let residual = weak_residual(&s, &problem, args.tests, args.seed)?;
    #[derive(Serialize)]
    struct Body {
        problem: ProblemSpec,
        coefficients: Coefficients,
        weak_residual: f64,
        test_count: usize,
        seed: Option<u64>,
    }
    let body = Body {
        problem: spec,
        coefficients,
        weak_residual: residual,
        test_count: args.tests,
        seed: args.seed,
    };
    emit_json(&Stamped { schema: SCHEMA, command: "residual", body }, args.json.as_deref())
}

/// Caps the global worker pool from [`THREADS_ENV`] if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Regularize(a) => cmd_regularize(a),
        Command::ProductCheck(a) => cmd_product(a),
        Command::Residual(a) => cmd_residual(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("distbeam").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn negative_values_and_hints_parse() {
        let cli = parse(&[
            "solve", "--A", "1", "--B", "2", "--x0", "0.5", "--P", "-1", "--g", "-cos(11*x)/sqrt(abs(x-2/3))",
            "--sing", "2/3:-0.5",
        ]);
        let Command::Solve(a) = cli.command else { panic!() };
        let spec = ProblemSpec::from_args(&a.problem).unwrap();
        assert_eq!((spec.p1, spec.p2), (-1.0, -1.0));
        assert_eq!(spec.singularities, vec![(2.0 / 3.0, -0.5)]);
        assert!(spec.build().unwrap().g.singularities().len() == 1);
    }

    #[test]
    fn force_flags_exclusive() {
        let r = Cli::try_parse_from(["distbeam", "solve", "--A", "1", "--B", "1", "--x0", "0.5", "--P", "1", "--P1", "1", "--P2", "2"]);
        assert!(r.is_err());
        let cli = parse(&["solve", "--A", "1", "--B", "1", "--x0", "0.5"]);
        let Command::Solve(a) = cli.command else { panic!() };
        let e = ProblemSpec::from_args(&a.problem).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        let singular = CliError::Solver(Error::SingularParameter { det: 0.0, scale: 1.0, ratio: 0.0 });
        assert_eq!(singular.exit_code(), 3);
        assert_eq!(CliError::Solver(Error::Syntax { pos: 0, message: String::new() }).exit_code(), 2);
        assert_eq!(CliError::Solver(Error::NonFinite { x: 0.1 }).exit_code(), 4);
        let j: serde_json::Value = serde_json::from_str(&singular.to_json()).unwrap();
        assert_eq!(j["error"]["kind"], "SingularParameter");
        assert_eq!(j["error"]["exit_code"], 3);
    }

    #[test]
    fn factor_names() {
        assert!(parse_factor("Hminus", 0.5).is_ok());
        assert!(matches!(parse_factor("delta2", 0.5).unwrap().kind, mollify::DistKind::DeltaDerivative(2)));
        assert!(parse_factor("theta", 0.5).is_err());
    }
}
