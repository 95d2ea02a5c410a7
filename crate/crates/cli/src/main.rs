//! `nct`: decide, construct and verify constant curvature modules from the
//! command line.
//!
//! Exit codes: 0 constructed or pass, 2 rejected, 3 malformed input,
//! 4 internal theory violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nct_core::clifford::{self, GqeDecision};
use nct_core::exterior::{DualTwoForm, Multivector};
use nct_core::intlat::{self, IntMatrix};
use nct_core::ktheory::{self, KTheoryError, TorusSpec};
use nct_core::pipeline::{self, Instance, PipelineError, Report, RATIONAL_THETA_CAVEAT};
use nct_core::ratmod::{self, RatmodError};
use nct_core::rational::{self, format_rational, Rational};
use nct_core::selftest;

/// Writes a line to stdout; a closed pipe is not an error.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

const OK: u8 = 0;
const REJECTED: u8 = 2;
const MALFORMED: u8 = 3;
const VIOLATION: u8 = 4;

#[derive(Parser)]
#[command(name = "nct", version, about = "Constant curvature modules over noncommutative tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide an instance and emit the construction report.
    Decide {
        instance: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check every identity recorded in a report.
    Verify { report: PathBuf },
    /// Run the generalized quadratic exponent test on an instance's mu.
    Gqe { instance: PathBuf },
    /// Chern character, rank and curvature of an instance.
    Chern { instance: PathBuf },
    /// Skew normal form of an alternating integer matrix.
    Snf { matrix: PathBuf },
    /// Finite-dimensional module over the rational torus with parameter tau.
    Ratmod {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long, value_enum, default_value_t = Render::Symbolic)]
        render: Render,
    },
    /// Run the built-in property suites.
    Selftest {
        #[arg(long, default_value_t = 4)]
        exhaustive: usize,
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = selftest::Config::default().seed)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    Symbolic,
    Float,
}

struct Failure {
    code: u8,
    message: String,
}

type CmdResult = Result<u8, Failure>;

fn malformed(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: MALFORMED,
        message: format!("malformed input: {e}"),
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn print_json(v: &Value) {
    out!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn records(m: &Multivector) -> Value {
    serde_json::to_value(m.to_records()).expect("serializable")
}

fn strings<T: ToString>(xs: &[T]) -> Value {
    Value::from(xs.iter().map(ToString::to_string).collect::<Vec<_>>())
}

fn rational_rows(rows: &[Vec<Rational>]) -> Value {
    Value::from(
        rows.iter()
            .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )
}

fn int_rows(m: &IntMatrix) -> Value {
    Value::from(m.to_rows().iter().map(|r| strings(r)).collect::<Vec<_>>())
}

fn decide(instance: &Path, out: Option<&Path>) -> CmdResult {
    let inst = Instance::from_json(&read(instance)?)?;
    let decision = pipeline::decide(&inst)?;
    let report = decision.report(&inst);
    let text = report.to_json();
    match out {
        Some(path) => {
            fs::write(path, text + "\n").map_err(|e| malformed(format!("{}: {e}", path.display())))?;
            out!("{}: {}", report.decision(), path.display());
        }
        None => out!("{text}"),
    }
    Ok(decision.exit_code() as u8)
}

fn verify(path: &Path) -> CmdResult {
    let report = Report::from_json(&read(path)?)?;
    let checks = pipeline::verify(&report)?;
    out!("decision: {}", report.decision());
    for c in &checks {
        out!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    out!("{}", if pass { "verified" } else { "verification failed" });
    Ok(if pass { OK } else { REJECTED })
}

fn gqe(path: &Path) -> CmdResult {
    let inst = Instance::from_json(&read(path)?)?;
    let mu = inst.mu();
    let decision = clifford::is_gqe(mu.mu()).map_err(|e| Failure {
        code: VIOLATION,
        message: e.to_string(),
    })?;
    match decision {
        GqeDecision::NotGqe { kernel_dim, reason } => {
            print_json(&json!({"gqe": false, "kernelDim": kernel_dim, "reason": reason}));
            Ok(REJECTED)
        }
        GqeDecision::Gqe(cert) => {
            let geom = ktheory::mu_geometry(mu).map_err(|e| Failure {
                code: VIOLATION,
                message: e.to_string(),
            })?;
            let annihilator: Vec<Value> = cert
                .annihilator_basis
                .iter()
                .map(|u| json!({"vee": strings(&fmt_all(&u.vee)), "star": strings(&fmt_all(&u.star))}))
                .collect();
            print_json(&json!({
                "gqe": true,
                "annihilator": annihilator,
                "W": rational_rows(&cert.w_basis),
                "w": records(&cert.w),
                "q1": records(&cert.q1),
                "geometry": {
                    "k": geom.k,
                    "p": geom.p(),
                    "q": geom.q(),
                    "N": geom.n_mult.to_string(),
                    "Umu": rational_rows(&geom.u_mu_basis),
                    "Lmu": int_rows(&geom.l_mu),
                    "Ltilde": int_rows(&geom.l_tilde),
                    "alpha": records(&geom.alpha),
                },
            }));
            Ok(OK)
        }
    }
}

fn fmt_all(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn chern(path: &Path) -> CmdResult {
    let inst = Instance::from_json(&read(path)?)?;
    let spec = TorusSpec::new(inst.theta().clone());
    match ktheory::chern(&spec, inst.mu()) {
        Ok(c) => {
            print_json(&json!({
                "ch": records(&c.ch),
                "dE": format_rational(&c.d_e),
                "f": records(&c.f),
                "caveat": RATIONAL_THETA_CAVEAT,
            }));
            Ok(OK)
        }
        Err(KTheoryError::NotGqe { kernel_dim, reason }) => {
            print_json(&json!({"decision": "notGQE", "kernelDim": kernel_dim, "reason": reason}));
            Ok(REJECTED)
        }
        Err(KTheoryError::NotPositive { ch0 }) => {
            print_json(&json!({"decision": "notPositive", "ch0": format_rational(&ch0)}));
            Ok(REJECTED)
        }
        Err(e) => Err(Failure {
            code: VIOLATION,
            message: e.to_string(),
        }),
    }
}

/// Whitespace separated rows, or a bracketed list of rows `[[a, b], [c, d]]`.
fn parse_matrix(text: &str) -> Result<Vec<Vec<String>>, Failure> {
    let tokens = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || c == ',' || c == '[' || c == ';')
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let rows: Vec<Vec<String>> = if text.contains('[') {
        text.split(']').map(tokens).filter(|r| !r.is_empty()).collect()
    } else {
        text.lines().map(tokens).filter(|r| !r.is_empty()).collect()
    };
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(malformed("matrix must be square"));
    }
    Ok(rows)
}

fn snf(path: &Path) -> CmdResult {
    let rows = parse_matrix(&read(path)?)?;
    let ints = rows
        .iter()
        .map(|r| r.iter().map(|t| t.parse().map_err(|_| malformed(format!("not an integer: {t}")))).collect())
        .collect::<Result<Vec<Vec<_>>, _>>()?;
    let a = IntMatrix::from_rows_with_cols(&ints, rows.len());
    let form = intlat::skew_normal_form(&a).map_err(malformed)?;
    print_json(&json!({
        "U": int_rows(&form.u),
        "divisors": strings(&form.divisors),
        "q": strings(&form.q_factors()),
        "rank": form.rank,
        "blockForm": int_rows(&form.block_form()),
    }));
    Ok(OK)
}

fn ratmod_cmd(n: u64, tau_path: &Path, render: Render) -> CmdResult {
    let rows = parse_matrix(&read(tau_path)?)?;
    let q = rows
        .iter()
        .map(|r| r.iter().map(|t| rational::parse_rational(t).map_err(malformed)).collect())
        .collect::<Result<Vec<Vec<_>>, _>>()?;
    let tau = DualTwoForm::from_rows(&q).map_err(malformed)?;
    let module = match ratmod::build_rational_module(&tau, tau.n(), &n.into()) {
        Ok(m) => m,
        Err(e @ (RatmodError::RelationFailure { .. } | RatmodError::Lattice(_))) => {
            return Err(Failure {
                code: VIOLATION,
                message: e.to_string(),
            })
        }
        Err(e @ (RatmodError::HypothesesUnmet { .. } | RatmodError::DivisibilityFailure { .. })) => {
            out!("rejected: {e}");
            return Ok(REJECTED);
        }
        Err(e) => return Err(malformed(e)),
    };
    let generators: Vec<Value> = match render {
        Render::Symbolic => module
            .generators
            .iter()
            .map(|g| serde_json::to_value(g).expect("serializable"))
            .collect(),
        Render::Float => module
            .generators
            .iter()
            .map(|g| {
                let m: Vec<Vec<[f64; 2]>> =
                    g.render().iter().map(|r| r.iter().map(|&(a, b)| [a, b]).collect()).collect();
                json!(m)
            })
            .collect(),
    };
    print_json(&json!({
        "plan": serde_json::to_value(&module.plan).expect("serializable"),
        "dim": module.dim(),
        "generators": generators,
    }));
    Ok(OK)
}

fn run_selftest(exhaustive: usize, suite: Option<String>, seed: u64) -> CmdResult {
    let config = selftest::Config {
        seed,
        exhaustive,
        suite,
    };
    let summary = selftest::run(&config).map_err(malformed)?;
    out!("{}", summary.render().trim_end());
    Ok(if summary.pass() { OK } else { VIOLATION })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decide { instance, out } => decide(&instance, out.as_deref()),
        Command::Verify { report } => verify(&report),
        Command::Gqe { instance } => gqe(&instance),
        Command::Chern { instance } => chern(&instance),
        Command::Snf { matrix } => snf(&matrix),
        Command::Ratmod { n, tau, render } => ratmod_cmd(n, &tau, render),
        Command::Selftest {
            exhaustive,
            suite,
            seed,
        } => run_selftest(exhaustive, suite, seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
