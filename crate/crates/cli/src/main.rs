//! `wpair`: command-line front end for the W-spectral pair toolkit.
//!
//! Exit codes: 0 computed and passed, 1 computed and the checked property
//! fails, 2 bad usage or input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wpair_core::confmap::{build_atlas, Domain};
use wpair_core::dilation::{dilation_calculus_check, egervary_dilation, naimark_dilate, povm_discretize, ModelExport};
use wpair_core::experiments::{
    bsk_fuzz, ellipse_sanity_search, ellipse_violation, involution_demo, pair_refutation, square_search, EllipseParams,
    REFUTATION_TRIALS,
};
use wpair_core::funcalc::{Poly, TestFn};
use wpair_core::io::{boundary_csv, boundary_svg, parse_complex, read_matrix, to_json, write_atomic};
use wpair_core::numrange::{boundary, numerical_radius, range_in_domain_with};
use wpair_core::wspec::{check_condition_i_sampled, check_condition_ii, herglotz_apply};
use wpair_core::{CMatrix, Complex64, Error};

#[derive(Parser, Debug)]
#[command(name = "wpair", version, about = "Numerical ranges, conformal maps and W-spectral pair checks")]
struct Cli {
    /// Seed for randomized steps.
    #[arg(long, global = true, env = "WPAIR_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; JSON reports go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct PairArgs {
    /// Matrix JSON file (`{"n": .., "data": [[re, im], ...]}`).
    #[arg(long)]
    matrix: PathBuf,
    /// Domain such as `disk:r=1`, `ellipse:a=2,b=1`, `square:s=1`, `rect:w=2,h=1`.
    #[arg(long)]
    domain: String,
    /// Base point z0.
    #[arg(long, default_value = "0")]
    base: String,
    /// Quadrature nodes.
    #[arg(long, default_value_t = 256)]
    m: usize,
    /// Approximant degree.
    #[arg(long, default_value_t = 32)]
    d: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum ConditionArg {
    /// `Re h_ζ(T) >= -I` at the quadrature nodes.
    Ii,
    /// Sampled `w(f(T)) <= 1` over normalized test polynomials.
    I,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Boundary of W(T) as CSV, SVG or JSON (by the --out extension).
    Numrange {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 360)]
        samples: usize,
        /// Optional domain to test W(T) against and draw in the SVG.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, default_value = "0")]
        base: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Checks whether (domain, base) is a W-spectral pair for T.
    CheckPair {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = ConditionArg::Ii)]
        condition: ConditionArg,
        /// Random polynomials for the sampled condition.
        #[arg(long, default_value_t = REFUTATION_TRIALS)]
        trials: usize,
    },
    /// f(T) from the boundary Herglotz-type formula, compared with f(T).
    Herglotz {
        #[command(flatten)]
        pair: PairArgs,
        /// Comma-separated coefficients, constant term first (`0,0,1` is z²).
        #[arg(long, conflicts_with = "function")]
        poly: Option<String>,
        /// JSON test function (`{"coeffs": ..}` or `{"num": .., "den": ..}`).
        #[arg(long)]
        function: Option<PathBuf>,
    },
    /// Discretized normal dilation (and optionally the unitary power dilation).
    Dilate {
        #[command(flatten)]
        pair: PairArgs,
        /// Highest power k in the test functions (z - z0)^k.
        #[arg(long, default_value_t = 6)]
        max_power: usize,
        /// Writes V and N of the model to this file.
        #[arg(long)]
        export_model: Option<PathBuf>,
        /// Also builds the unitary dilation reproducing T^k for k <= N.
        #[arg(long)]
        unitary_steps: Option<usize>,
    },
    /// The Crouzeix ellipse violation and its pair refutation.
    ReproduceEllipse {
        #[arg(long, default_value_t = 2.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = REFUTATION_TRIALS)]
        trials: usize,
    },
    /// Seeded involutions: ellipse fit of W(T) and the pair refutation.
    Involution {
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Berger–Stampfli–Kato and teardrop fuzzing on the unit disk.
    BskFuzz {
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
    /// Nelder–Mead search for a 3x3 violation on the square (-1, 1)².
    SearchSquare {
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        degrees: Vec<usize>,
        /// Runs the ellipse-seeded control instead of the square.
        #[arg(long)]
        ellipse_sanity: bool,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_negative_result() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("wpair: cannot configure threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 1 }),
        Err(f) => {
            eprintln!("wpair: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Everything a report needs to be reproduced.
#[derive(Serialize)]
struct RunConfig<'a> {
    subcommand: &'static str,
    seed: u64,
    out: Option<&'a Path>,
    threads: Option<usize>,
    #[serde(flatten)]
    args: Value,
}

fn envelope(cli: &Cli, subcommand: &'static str, args: Value, passed: bool, result: Value) -> Value {
    let config = RunConfig {
        subcommand,
        seed: cli.seed,
        out: cli.out.as_deref(),
        threads: cli.threads,
        args,
    };
    json!({
        "tool": "wpair",
        "version": wpair_core::VERSION,
        "config": config,
        "passed": passed,
        "result": result,
    })
}

fn emit(cli: &Cli, report: &Value) -> Result<(), Failure> {
    let text = to_json(report)?;
    match &cli.out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| usage(format!("serialization failed: {e}")))
}

fn load_pair(pair: &PairArgs) -> Result<(CMatrix, Domain), Failure> {
    let t = read_matrix(&pair.matrix)?;
    let base = parse_complex(&pair.base)?;
    let domain = Domain::parse(&pair.domain, base)?;
    Ok((t, domain))
}

fn parse_poly(text: &str) -> Result<Poly, Failure> {
    let coeffs = text.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>()?;
    Ok(Poly::new(coeffs)?)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Numrange {
            matrix,
            samples,
            domain,
            base,
            tol,
        } => {
            if *samples < 3 {
                return Err(usage("--samples must be at least 3"));
            }
            let t = read_matrix(matrix)?;
            let dom = match domain {
                Some(spec) => Some(Domain::parse(spec, parse_complex(base)?)?),
                None => None,
            };
            let b = boundary(&t, *samples)?;
            let w = numerical_radius(&t)?;
            let containment = match &dom {
                Some(d) => Some(range_in_domain_with(&t, d, *tol, *samples)?),
                None => None,
            };
            let passed = containment.as_ref().is_none_or(|c| c.inside);
            let args = json!({"matrix": matrix, "samples": samples, "domain": domain, "base": base, "tol": tol});
            let ext = cli.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()).unwrap_or("json");
            let summary = json!({"numerical_radius": w, "samples": b.points.len(), "containment": containment});
            match ext {
                "csv" | "svg" => {
                    let text = if ext == "csv" { boundary_csv(&b) } else { boundary_svg(&b, dom.as_ref()) };
                    write_atomic(cli.out.as_ref().expect("extension implies a path"), text.as_bytes())?;
                    print!("{}", to_json(&envelope(cli, "numrange", args, passed, summary))?);
                }
                _ => {
                    let mut result = summary;
                    result["boundary"] = to_value(&b)?;
                    emit(cli, &envelope(cli, "numrange", args, passed, result))?;
                }
            }
            Ok(passed)
        }
        Command::CheckPair { pair, condition, trials } => {
            let (t, domain) = load_pair(pair)?;
            let report = match condition {
                ConditionArg::Ii => check_condition_ii(&t, &domain, pair.m, pair.d, pair.tol)?,
                ConditionArg::I => check_condition_i_sampled(&t, &domain, *trials, pair.tol, cli.seed)?,
            };
            let mut args = to_value(pair)?;
            args["condition"] = to_value(condition)?;
            args["trials"] = json!(trials);
            emit(cli, &envelope(cli, "check-pair", args, report.passed, to_value(&report)?))?;
            Ok(report.passed)
        }
        Command::Herglotz { pair, poly, function } => {
            let (t, domain) = load_pair(pair)?;
            let f: TestFn = match (poly, function) {
                (Some(p), None) => parse_poly(p)?.into(),
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&text).map_err(|e| usage(format!("test function JSON: {e}")))?
                }
                _ => return Err(usage("give exactly one of --poly or --function")),
            };
            let atlas = build_atlas(&domain)?;
            let approx = herglotz_apply(&f, &t, &atlas, pair.m, pair.d)?;
            let exact = f.apply(&t)?;
            let error = (&approx - &exact).op_norm();
            let passed = error <= pair.tol;
            let mut args = to_value(pair)?;
            args["function"] = to_value(&f)?;
            let result = json!({"herglotz": approx, "exact": exact, "error": error});
            emit(cli, &envelope(cli, "herglotz", args, passed, result))?;
            Ok(passed)
        }
        Command::Dilate {
            pair,
            max_power,
            export_model,
            unitary_steps,
        } => {
            let (t, domain) = load_pair(pair)?;
            let atlas = build_atlas(&domain)?;
            let povm = povm_discretize(&t, &atlas, pair.m, pair.d)?;
            let model = naimark_dilate(&povm)?;
            let shift = Poly::new(vec![-domain.base, Complex64::new(1.0, 0.0)])?;
            let mut power = Poly::constant(Complex64::new(1.0, 0.0));
            let mut deltas = Vec::new();
            for k in 1..=*max_power {
                power = power.mul(&shift)?;
                let r = dilation_calculus_check(&t, &model, &power.clone().into())?;
                deltas.push(json!({"power": k, "delta": r.delta}));
            }
            let max_delta = deltas.iter().filter_map(|v| v["delta"].as_f64()).fold(0.0, f64::max);
            let unitary = match unitary_steps {
                Some(steps) => {
                    let u = egervary_dilation(&t, *steps)?;
                    let id = CMatrix::identity(u.dim());
                    let n = t.dim();
                    let power_defect = (1..=*steps as u32)
                        .map(|k| (&u.pow(k).block(0, 0, n) - &t.pow(k)).op_norm())
                        .fold(0.0, f64::max);
                    Some(json!({
                        "steps": steps,
                        "unitary_defect": (&u.adjoint().matmul(&u) - &id).op_norm(),
                        "power_defect": power_defect,
                    }))
                }
                None => None,
            };
            if let Some(path) = export_model {
                write_atomic(path, to_json(&ModelExport::from(&model))?.as_bytes())?;
            }
            let passed = max_delta <= 1e-6;
            let mut args = to_value(pair)?;
            args["max_power"] = json!(max_power);
            args["export_model"] = json!(export_model);
            args["unitary_steps"] = json!(unitary_steps);
            let result = json!({
                "m": model.m(),
                "quadrature_defect": povm.quadrature_defect,
                "naimark_defect": model.naimark_defect(),
                "isometry_defect": model.isometry_defect(),
                "spectrum_boundary_defect": model.spectrum_boundary_defect(),
                "max_delta": max_delta,
                "deltas": deltas,
                "unitary": unitary,
            });
            emit(cli, &envelope(cli, "dilate", args, passed, result))?;
            Ok(passed)
        }
        Command::ReproduceEllipse { a, b, degrees, trials } => {
            let p = EllipseParams::new(*a, *b)?;
            let violation = ellipse_violation(p, degrees)?;
            let refutation = pair_refutation(p, *trials, cli.seed)?;
            let passed = violation.ratio > 1.0 && violation.schwarz_holds && !refutation.passed;
            let args = json!({"a": a, "b": b, "degrees": degrees, "trials": trials});
            let result = json!({"violation": violation, "refutation": refutation});
            emit(cli, &envelope(cli, "reproduce-ellipse", args, passed, result))?;
            Ok(passed)
        }
        Command::Involution { count } => {
            let reports = (0..*count).map(|k| involution_demo(cli.seed + k)).collect::<Result<Vec<_>, _>>()?;
            let passed = reports.iter().all(|r| r.fit.residual < 1e-6 && !r.refutation.passed);
            let args = json!({"count": count});
            emit(cli, &envelope(cli, "involution", args, passed, to_value(&reports)?))?;
            Ok(passed)
        }
        Command::BskFuzz { trials } => {
            let report = bsk_fuzz(*trials, cli.seed)?;
            let args = json!({"trials": trials});
            emit(cli, &envelope(cli, "bsk-fuzz", args, report.passed, to_value(&report)?))?;
            Ok(report.passed)
        }
        Command::SearchSquare {
            budget,
            degrees,
            ellipse_sanity,
        } => {
            if *budget == 0 {
                return Err(usage("--budget must be positive"));
            }
            let report = if *ellipse_sanity {
                ellipse_sanity_search(*budget, cli.seed, degrees)?
            } else {
                square_search(*budget, cli.seed, degrees)?
            };
            let args = json!({"budget": budget, "degrees": degrees, "ellipse_sanity": ellipse_sanity});
            let mut result = to_value(&report)?;
            // the candidate in the shared matrix layout at the top level
            result["n"] = json!(report.best.t.dim());
            result["data"] = to_value(&report.best.t)?["data"].clone();
            result["objective"] = json!(report.best.objective);
            result["penalty"] = json!(report.best.penalty);
            emit(cli, &envelope(cli, "search-square", args, report.feasible, result))?;
            Ok(report.feasible)
        }
    }
}
