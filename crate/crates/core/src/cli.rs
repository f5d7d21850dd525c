//! Command-line front end. Every command prints one JSON document (or a CSV
//! table) on standard output and maps library errors to exit codes:
//! 1 malformed input, 2 domain error or failed battery, 3 non-convergence.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::battery::{run_battery, BatteryConfig};
use crate::connect::{connect, path_to_json, validate_path, ConnectOptions};
use crate::error::{Error, Result};
use crate::grassmann::{
    exact_limit_hyperbolic, exact_limit_nilpotent, infinity_circle_point, infinity_point, infinity_tangent_report,
    limit_convergence, tangent_invariance_check, RaySpec,
};
use crate::json::{matrix_from_json, JsonScalar};
use crate::line::{line_through, line_to_json, Component, TwistorLine};
use crate::matrix::Matrix;
use crate::period::{hdg_dim_formula, hdg_space, kahler_certificate, HdgMode, KahlerCertificate};
use crate::rep::{classify_pair, rep_from_json, rep_to_json, standard_rep, AlgebraRep};
use crate::rng::CountedRng;
use crate::scalar::{q, Rational, Real, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScalarKind {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    ClosedForm,
    GenericSampling,
}

impl From<ModeArg> for HdgMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ClosedForm => HdgMode::ClosedForm,
            ModeArg::GenericSampling => HdgMode::GenericSampling,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "twistor",
    version,
    about = "Generalized twistor lines in the period domain of complex tori"
)]
pub struct Cli {
    /// Scalar domain: exact rationals or floating point.
    #[arg(long, global = true, value_enum, default_value_t = ScalarKind::Exact)]
    pub scalar: ScalarKind,
    /// Comparison tolerance for the float domain.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Complex dimension of the torus (matrices are 4n x 4n).
    #[arg(long, global = true, default_value_t = 1)]
    pub n: usize,
    /// Nilpotent rank parameter for epsilon = 0 (defaults to n).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Algebra type: -1, 0 or 1.
    #[arg(long, global = true, default_value_t = -1, allow_hyphen_values = true)]
    pub epsilon: i32,
    /// Number of sampled points.
    #[arg(long, global = true, default_value_t = 8)]
    pub samples: usize,
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Standard representation of H(epsilon), optionally randomly conjugated.
    GenRep {
        #[arg(long)]
        conjugate: bool,
    },
    /// Anticommutator scalar and type of the line through two complex structures.
    ClassifyPair { a: PathBuf, b: PathBuf },
    /// A line from a representation file, from two complex structures, or
    /// the standard one, with sampled points.
    Line { inputs: Vec<PathBuf> },
    /// Dimension of the classes staying of type (1,1) along a line.
    Hdg {
        rep: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::ClosedForm)]
        mode: ModeArg,
    },
    /// Kähler certificate of a line.
    Kahler {
        rep: Option<PathBuf>,
        #[arg(long)]
        component: Option<Component>,
    },
    /// Points at infinity, tangent-cone report and angle decay.
    Infinity {
        rep: Option<PathBuf>,
        /// Print the angle-decay table as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Chain of lines joining two complex structures (float domain).
    Connect {
        a: PathBuf,
        b: PathBuf,
        /// Initial interpolation step, as a fraction of the way.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Runs the full verification battery.
    VerifyPaper {
        #[arg(long, default_value_t = 2)]
        n_max: usize,
        /// Comma-separated nilpotent ranks (default: all).
        #[arg(long, value_delimiter = ',')]
        k_grid: Option<Vec<usize>>,
    },
}

/// What a command produced: text for standard output and its exit code.
#[derive(Debug, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

fn ok(v: Value) -> Result<Outcome> {
    Ok(Outcome {
        stdout: pretty(&v),
        code: 0,
    })
}

/// Representation from a file (bare or wrapped in a line), else the standard one.
fn load_rep<T: Real + JsonScalar>(cli: &Cli, path: Option<&PathBuf>) -> Result<AlgebraRep<T>> {
    match path {
        Some(p) => {
            let v = read_json(p)?;
            let rep = v.get("rep").unwrap_or(&v);
            rep_from_json(rep, cli.tol)
        }
        None => {
            let k = (cli.epsilon == 0).then_some(cli.k.unwrap_or(cli.n));
            standard_rep(cli.epsilon, cli.n, k)
        }
    }
}

fn load_matrix<T: JsonScalar>(path: &Path) -> Result<Matrix<T>> {
    matrix_from_json(&read_json(path)?)
}

fn gen_rep<T: Real + JsonScalar>(cli: &Cli, conjugate: bool) -> Result<Outcome> {
    let rep: AlgebraRep<T> = load_rep(cli, None)?;
    let rep = if conjugate {
        let mut rng = CountedRng::derive(cli.seed, "gen-rep");
        rep.conjugate(&rng.invertible(rep.dim()).map(T::from_rational))?
    } else {
        rep
    };
    ok(rep_to_json(&rep))
}

fn classify<T: Real + JsonScalar>(cli: &Cli, a: &Path, b: &Path) -> Result<Outcome> {
    let pc = classify_pair(&load_matrix::<T>(a)?, &load_matrix::<T>(b)?, cli.tol)?;
    ok(json!({"alpha": pc.alpha.to_json(), "epsilon": pc.epsilon}))
}

fn line_cmd<T: Real + JsonScalar>(cli: &Cli, inputs: &[PathBuf]) -> Result<Outcome> {
    let line: TwistorLine<T> = match inputs {
        [] => TwistorLine::new(load_rep(cli, None)?),
        [rep] => TwistorLine::new(load_rep(cli, Some(rep))?),
        [a, b] => line_through(&load_matrix::<T>(a)?, &load_matrix::<T>(b)?, cli.tol)?,
        _ => return Err(malformed("line takes a representation file or two complex structures")),
    };
    let points = line
        .sample_points(cli.samples, None)
        .into_iter()
        .map(|p| {
            let component = line.component_of(&p.coords).ok().map(|c| c.to_string());
            Ok(json!({
                "coords": p.coords.iter().map(JsonScalar::to_json).collect::<Vec<_>>(),
                "component": component,
                "tangent_invariant": tangent_invariance_check(&line, &p.coords)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    ok(json!({"line": line_to_json(&line), "points": points}))
}

fn hdg_cmd<T: Real + JsonScalar>(cli: &Cli, rep: Option<&PathBuf>, mode: ModeArg) -> Result<Outcome> {
    let line = TwistorLine::new(load_rep::<T>(cli, rep)?);
    let rep = line.rep();
    let dim = hdg_space(&line, mode.into())?.dim();
    let formula = hdg_dim_formula(rep.epsilon(), rep.n(), rep.k())?;
    ok(json!({"hdg_dim": dim, "formula_dim": formula, "match": dim == formula}))
}

fn kahler_cmd<T: Real + JsonScalar>(cli: &Cli, rep: Option<&PathBuf>, component: Option<Component>) -> Result<Outcome> {
    let line = TwistorLine::new(load_rep::<T>(cli, rep)?);
    let cert = kahler_certificate(&line, component, cli.samples)?;
    let kahler = match &cert {
        KahlerCertificate::Cone {
            component,
            witness,
            points_checked,
            verified,
        } => json!({
            "status": "cone",
            "component": component,
            "witness": crate::json::matrix_to_json(witness),
            "points_checked": points_checked,
            "verified": verified,
        }),
        KahlerCertificate::None {
            reason,
            forms_checked,
            points_checked,
            verified,
        } => json!({
            "status": "none",
            "reason": reason,
            "forms_checked": forms_checked,
            "points_checked": points_checked,
            "verified": verified,
        }),
    };
    let code = if cert.verified() { 0 } else { 2 };
    Ok(Outcome {
        stdout: pretty(&json!({"line": line_to_json(&line), "kahler": kahler})),
        code,
    })
}

const DECAY_GRID: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];

fn infinity_cmd<T: Real + JsonScalar>(cli: &Cli, rep: Option<&PathBuf>, csv: bool) -> Result<Outcome> {
    let line = TwistorLine::new(load_rep::<T>(cli, rep)?);
    let reports = infinity_tangent_report(&line)?;
    let ray = if line.epsilon() == 1 {
        RaySpec::Hyperbolic {
            sheet: Component::Plus,
            c: 1.0,
            s: 0.0,
        }
    } else {
        RaySpec::Nilpotent {
            which: Component::Plus,
            alpha: 1.0,
            beta: 0.0,
        }
    };
    let decay = limit_convergence(&TwistorLine::new(line.rep().to_f64()), &ray, &DECAY_GRID)?;
    if csv {
        let mut out = String::from("t,angle\n");
        for (t, a) in &decay {
            out.push_str(&format!("{t},{a:e}\n"));
        }
        return Ok(Outcome { stdout: out, code: 0 });
    }
    let limits: Vec<Value> = if line.epsilon() == 1 {
        [(q(1, 1), q(0, 1)), (q(3, 5), q(4, 5)), (q(-5, 13), q(12, 13))]
            .iter()
            .map(|(c, s)| {
                let (c, s) = (T::from_rational(c), T::from_rational(s));
                let p = infinity_circle_point(&line, &c, &s)?;
                let lim = exact_limit_hyperbolic(&line, &c, &s, Component::Plus)?;
                Ok(json!({
                    "point": format!("circle({},{})", c.to_json(), s.to_json()).replace('"', ""),
                    "real_dim": p.real_points_dimension(),
                    "limit_matches": lim.equals(&p),
                }))
            })
            .collect::<Result<_>>()?
    } else {
        [Component::Plus, Component::Minus]
            .into_iter()
            .map(|which| {
                let p = infinity_point(&line, which)?;
                let lim = exact_limit_nilpotent(&line, which, &T::one(), &T::zero())?;
                Ok(json!({"point": format!("p{which}"), "real_dim": p.real_points_dimension(), "limit_matches": lim.equals(&p)}))
            })
            .collect::<Result<_>>()?
    };
    let decay: Vec<Value> = decay.iter().map(|(t, a)| json!({"t": t, "angle": a})).collect();
    ok(json!({"line": line_to_json(&line), "limits": limits, "reports": reports, "angle_decay": decay}))
}

fn connect_cmd(cli: &Cli, a: &Path, b: &Path, step: f64) -> Result<Outcome> {
    let (a, b) = (load_matrix::<f64>(a)?, load_matrix::<f64>(b)?);
    let opts = ConnectOptions {
        step,
        ..ConnectOptions::default()
    };
    let mut rng = CountedRng::derive(cli.seed, "connect");
    let path = connect(&a, &b, cli.epsilon, &opts, &mut rng)?;
    let report = validate_path(&path, 1e-8);
    let mut v = path_to_json(&path);
    v["valid"] = json!(report.pass);
    ok(v)
}

fn verify_paper<T: Real + JsonScalar + Send + Sync>(
    cli: &Cli,
    n_max: usize,
    k_grid: &Option<Vec<usize>>,
) -> Result<Outcome> {
    let cfg = BatteryConfig {
        n_max,
        k_grid: k_grid.clone(),
        seed: cli.seed,
        samples: cli.samples,
    };
    let report = run_battery::<T>(&cfg)?;
    let v = serde_json::to_value(&report).expect("report serializes");
    Ok(Outcome {
        stdout: pretty(&v),
        code: if report.all_pass { 0 } else { 2 },
    })
}

fn dispatch<T: Real + JsonScalar + Send + Sync>(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::GenRep { conjugate } => gen_rep::<T>(cli, *conjugate),
        Command::ClassifyPair { a, b } => classify::<T>(cli, a, b),
        Command::Line { inputs } => line_cmd::<T>(cli, inputs),
        Command::Hdg { rep, mode } => hdg_cmd::<T>(cli, rep.as_ref(), *mode),
        Command::Kahler { rep, component } => kahler_cmd::<T>(cli, rep.as_ref(), *component),
        Command::Infinity { rep, csv } => infinity_cmd::<T>(cli, rep.as_ref(), *csv),
        Command::Connect { a, b, step } => connect_cmd(cli, a, b, *step),
        Command::VerifyPaper { n_max, k_grid } => verify_paper::<T>(cli, *n_max, k_grid),
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        return Err(malformed("--tol must be a finite nonnegative number"));
    }
    match cli.scalar {
        ScalarKind::Exact => dispatch::<Rational>(cli),
        ScalarKind::Float => dispatch::<f64>(cli),
    }
}

/// Parses arguments, runs the command, prints its output and returns the
/// process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
