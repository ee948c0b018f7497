//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad input,
//! 3 the integration stopped early (partial CSV is kept).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::darboux::{integral_basis, IntegralBasis};
use crate::model::{CyclicLVSystem, ModelError};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::sim::{integrate_streaming, IntegratorConfig, Method, SimError, TrajectoryRecord};
use crate::verify::{self, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cyclic-lv",
    version,
    about = "First integrals of cyclic Lotka-Volterra systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the system and print its first integrals.
    Integrals {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the exact verification suite.
    Check {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random rational points per sampled check.
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Extra evaluation point `v1,...,vn` (exact rationals), checked
        /// before the random ones. Repeatable.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Integrate a trajectory and write it as CSV.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        x0: Vec<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long = "t-end", default_value_t = 10.0)]
        t_end: f64,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "sample-every", default_value_t = 1)]
        sample_every: usize,
        #[arg(long = "rel-tol", default_value_t = 1e-9)]
        rel_tol: f64,
        #[arg(long = "abs-tol", default_value_t = 1e-12)]
        abs_tol: f64,
        #[arg(long = "min-step", default_value_t = 1e-12)]
        min_step: f64,
        #[arg(long = "positivity-floor", default_value_t = crate::sim::DEFAULT_POSITIVITY_FLOOR)]
        positivity_floor: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Rk4,
    Rk45,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: format!("I/O error: {e}"),
        }
    }
}

/// Parameter file: `{"k": ["2", "1/3", "0.5", 4]}`.
#[derive(Debug, Deserialize)]
struct SystemSpecFile {
    k: Vec<Value>,
}

/// Reads a system spec; the error names the offending entry (1-based).
pub fn load_system(path: &Path) -> Result<CyclicLVSystem, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_system(&text)
}

pub fn parse_system(text: &str) -> Result<CyclicLVSystem, String> {
    let spec: SystemSpecFile =
        serde_json::from_str(text).map_err(|e| format!("invalid system spec: {e}"))?;
    let mut k = Vec::with_capacity(spec.k.len());
    for (i, v) in spec.k.iter().enumerate() {
        let raw = match v {
            Value::String(s) => s.clone(),
            Value::Number(num) => num.to_string(),
            other => {
                return Err(format!(
                    "entry {} of k: expected a string or number, got {other}",
                    i + 1
                ))
            }
        };
        let r = parse_rational(&raw).map_err(|e| format!("entry {} of k: {e}", i + 1))?;
        k.push(r);
    }
    CyclicLVSystem::new(k).map_err(|e| match e {
        ModelError::ZeroParameter(i) => {
            format!("entry {i} of k is zero; rate parameters must be nonzero")
        }
        other => other.to_string(),
    })
}

/// Entry point used by the binary.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run<I: IntoIterator<Item = OsString>>(
    args: I,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Integrals { system, format } => cmd_integrals(&system, format, out),
        Command::Check {
            system,
            seed,
            samples,
            points,
        } => cmd_check(&system, seed, samples, &points, out),
        Command::Simulate {
            system,
            x0,
            method,
            step,
            t_end,
            out: out_path,
            sample_every,
            rel_tol,
            abs_tol,
            min_step,
            positivity_floor,
        } => {
            let cfg = IntegratorConfig {
                method: match method {
                    MethodArg::Rk4 => Method::Rk4Fixed,
                    MethodArg::Rk45 => Method::AdaptiveRk45,
                },
                step,
                t_end,
                rel_tol,
                abs_tol,
                min_step,
                positivity_floor,
            };
            cmd_simulate(
                &system,
                &x0,
                &cfg,
                out_path.as_deref(),
                sample_every,
                out,
                err,
            )
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BasisJson {
    pub n: usize,
    pub k: Vec<String>,
    pub classification: String,
    pub linear: LinearJson,
    pub monomials: Vec<MonomialJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LinearJson {
    pub name: String,
    pub weights: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MonomialJson {
    pub name: String,
    /// Exact exponents as `p/q` strings.
    pub exponents: Vec<String>,
}

pub fn basis_json(sys: &CyclicLVSystem, basis: &IntegralBasis) -> BasisJson {
    BasisJson {
        n: sys.n(),
        k: sys.params().iter().map(format_rational).collect(),
        classification: basis.classification.to_string(),
        linear: LinearJson {
            name: "H1".into(),
            weights: basis.linear.weights().iter().map(format_rational).collect(),
        },
        monomials: basis
            .monomials
            .iter()
            .enumerate()
            .map(|(j, h)| MonomialJson {
                name: format!("H{}", j + 2),
                exponents: h.exponents().iter().map(format_rational).collect(),
            })
            .collect(),
    }
}

fn join_rationals(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(", ")
}

fn cmd_integrals(path: &Path, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let sys = load_system(path).map_err(Failure::input)?;
    let basis = integral_basis(&sys);
    match format {
        Format::Json => {
            let json =
                serde_json::to_string_pretty(&basis_json(&sys, &basis)).expect("basis serializes");
            writeln!(out, "{json}")?;
        }
        Format::Text => {
            writeln!(
                out,
                "n = {}, k = ({})",
                sys.n(),
                join_rationals(sys.params())
            )?;
            writeln!(out, "classification: {}", basis.classification)?;
            let sum: Vec<String> = (1..=sys.n()).map(|i| format!("x{i}")).collect();
            writeln!(out, "H1 = {}", sum.join(" + "))?;
            if basis.monomials.is_empty() {
                writeln!(out, "no monomial integrals")?;
            }
            for (j, h) in basis.monomials.iter().enumerate() {
                writeln!(out, "H{} = {}", j + 2, h)?;
                writeln!(out, "  exponents: {}", join_rationals(h.exponents()))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn parse_point(text: &str, n: usize) -> Result<Vec<Rational>, Failure> {
    let pt = text
        .split(',')
        .map(|v| parse_rational(v).map_err(|e| Failure::input(format!("--point {text}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if pt.len() != n {
        return Err(Failure::input(format!(
            "--point {text}: expected {n} coordinates"
        )));
    }
    if pt.iter().any(|v| !num_traits::Signed::is_positive(v)) {
        return Err(Failure::input(format!(
            "--point {text}: coordinates must be positive"
        )));
    }
    Ok(pt)
}

fn cmd_check(
    path: &Path,
    seed: u64,
    samples: usize,
    points: &[String],
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let sys = load_system(path).map_err(Failure::input)?;
    if samples == 0 {
        return Err(Failure::input("--samples must be at least 1"));
    }
    let fixed = points
        .iter()
        .map(|p| parse_point(p, sys.n()))
        .collect::<Result<Vec<_>, _>>()?;
    let basis = integral_basis(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.n();
    let mut reports: Vec<VerificationReport> = Vec::new();

    writeln!(out, "n = {}, classification: {}", n, basis.classification)?;
    reports.push(verify::check_linear_integral(&sys));
    let invariant = (1..=n).all(|i| sys.verify_hyperplane_invariance(i).unwrap_or(false));
    reports.push(if invariant {
        VerificationReport::pass("coordinate hyperplanes invariant with cofactors K_i")
    } else {
        VerificationReport::fail(
            "coordinate hyperplanes invariant with cofactors K_i",
            "X(x_i) != K_i x_i",
        )
    });
    if basis.monomials.is_empty() {
        writeln!(out, "note: no monomial integrals")?;
    }
    for h in &basis.monomials {
        reports.push(verify::check_xh_zero(&sys, h).expect("basis matches system dimension"));
    }
    if n >= 3 {
        reports.push(verify::check_formula_nullspace(&sys, &basis));
    } else {
        writeln!(out, "note: exponent system not defined for n = 2")?;
    }
    let mut jacobi_pts = fixed.clone();
    jacobi_pts.extend(verify::random_nonzero_samples(&mut rng, n, samples));
    reports.push(verify::check_jacobi_multiplier(&sys, &jacobi_pts).expect("samples are nonzero"));
    let mut indep_pts = fixed;
    indep_pts.extend(verify::random_positive_samples(&mut rng, n, samples));
    reports
        .push(verify::check_independence(&sys, &basis, &indep_pts).expect("samples are positive"));

    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        writeln!(out, "all {} checks passed", reports.len())?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "{failed} of {} checks failed", reports.len())?;
        Ok(EXIT_CHECK_FAILED)
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(r: &TrajectoryRecord) -> String {
    std::iter::once(r.t)
        .chain(r.x.iter().copied())
        .chain(r.integral_values.iter().copied())
        .chain(r.relative_drift.iter().copied())
        .map(fmt_f64)
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_simulate(
    path: &Path,
    x0: &[f64],
    cfg: &IntegratorConfig,
    out_path: Option<&Path>,
    sample_every: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let sys = load_system(path).map_err(Failure::input)?;
    if x0.len() != sys.n() {
        return Err(Failure::input(format!(
            "--x0 has {} values but the system has n = {}",
            x0.len(),
            sys.n()
        )));
    }
    if let Some(i) = x0.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Failure::input(format!(
            "--x0 entry {} = {} is not strictly positive",
            i + 1,
            x0[i]
        )));
    }
    if sample_every == 0 {
        return Err(Failure::input("--sample-every must be at least 1"));
    }
    cfg.validate().map_err(|e| Failure::input(e.to_string()))?;

    let basis = integral_basis(&sys);
    let mut csv: Box<dyn Write + '_> = match out_path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::input(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(&mut *out)),
    };

    let names: Vec<String> = (1..=basis.len()).map(|j| format!("H{j}")).collect();
    let mut header = vec!["t".to_string()];
    header.extend((1..=sys.n()).map(|i| format!("x{i}")));
    header.extend(names.iter().cloned());
    header.extend(names.iter().map(|h| format!("drift_{h}")));
    writeln!(csv, "{}", header.join(","))?;

    let mut index = 0usize;
    let mut rows = 0usize;
    let mut pending: Option<TrajectoryRecord> = None;
    let mut io_error: Option<io::Error> = None;
    let result = integrate_streaming(&sys, x0, cfg, &basis, |r| {
        if io_error.is_some() {
            return;
        }
        if index % sample_every == 0 {
            if let Err(e) = writeln!(csv, "{}", csv_row(r)) {
                io_error = Some(e);
            }
            rows += 1;
            pending = None;
        } else {
            pending = Some(r.clone());
        }
        index += 1;
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }
    // the final accepted step is always written
    if let Some(r) = pending.take() {
        writeln!(csv, "{}", csv_row(&r))?;
        rows += 1;
    }
    csv.flush()?;
    drop(csv);

    // with the CSV on standard output the summary goes to standard error
    let sink: &mut dyn Write = if out_path.is_some() { out } else { err };
    match result {
        Ok(s) => {
            let drifts: Vec<String> = names
                .iter()
                .zip(&s.max_drift)
                .map(|(h, d)| format!("{h}={d:.3e}"))
                .collect();
            writeln!(
                sink,
                "rows={rows} steps={} t_final={} max_drift: {}",
                s.accepted_steps,
                s.t_final,
                drifts.join(" ")
            )?;
            Ok(EXIT_OK)
        }
        Err(e @ (SimError::PositivityBreached { .. } | SimError::StepUnderflow { .. })) => {
            writeln!(sink, "rows={rows} halted: {e} (partial output kept)")?;
            Err(Failure {
                code: EXIT_RUNTIME,
                message: e.to_string(),
            })
        }
        Err(e) => Err(Failure::input(e.to_string())),
    }
}
