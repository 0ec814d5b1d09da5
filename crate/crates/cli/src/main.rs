use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use papdiff_core::expr::format_number;
use papdiff_core::gallery::{CantorApprox, Gallery, ProbeRecord, DEFAULT_DEPTH};
use papdiff_core::verify::{generate_corpus, gradcheck, Sampler};
use papdiff_core::{
    eval, expr_to_repr, jvp, parse, parse_inferred, registry, symbolic_jacobian, vjp, Expr, InputVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const DEFAULT_SEED: u64 = 12345;

#[derive(Parser)]
#[command(
    name = "papdiff",
    version,
    about = "Intensional-derivative autodiff for a small language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Program {
    /// Program text, e.g. "relu(x1)".
    #[arg(short = 'e', long = "expr")]
    expr: String,
    /// Input arity; inferred from the inputs or the program when omitted.
    #[arg(short = 'n', long)]
    arity: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a program at a point.
    Eval {
        #[command(flatten)]
        program: Program,
        /// Input vector as comma-separated values.
        #[arg(short = 'v', long, allow_hyphen_values = true)]
        input: String,
    },
    /// Differentiate a program at a point.
    Grad {
        #[command(flatten)]
        program: Program,
        #[arg(short = 'v', long, allow_hyphen_values = true)]
        input: String,
        #[arg(long, value_enum, default_value_t = Mode::Symbolic)]
        mode: Mode,
        /// Tangent for forward mode; prints the full row when omitted.
        #[arg(short = 'w', long, allow_hyphen_values = true)]
        tangent: Option<String>,
        /// Cotangent for reverse mode.
        #[arg(short = 'u', long, allow_hyphen_values = true, default_value = "1")]
        cotangent: String,
    },
    /// Compare derivatives with central finite differences at random points.
    Gradcheck {
        #[command(flatten)]
        program: Program,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        hi: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Exit with status 1 when the agreement fraction is below this.
        #[arg(long, default_value_t = 0.99)]
        min_fraction: f64,
    },
    /// Print the piecewise representation of a program.
    Repr {
        #[command(flatten)]
        program: Program,
        #[arg(long, value_enum, default_value_t = ReprFormat::Table)]
        format: ReprFormat,
        /// Print the derivative representation instead.
        #[arg(long)]
        derivative: bool,
    },
    /// Generate random programs, one per line.
    Corpus {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(short = 'n', long, default_value_t = 4)]
        arity: usize,
    },
    /// Sample the Cantor-function gallery on a uniform grid.
    Cantor {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Difference-quotient probes around the Cantor set.
    Probe {
        #[arg(value_enum)]
        which: ProbeKind,
        #[arg(long)]
        depth: Option<u32>,
        /// Step k of the removed intervals used by the claim1 probe.
        #[arg(long, default_value_t = 5)]
        step: u32,
        /// Base points (claim1) or removed-interval midpoints (claim3).
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Uniform points for the claim3 composition check.
        #[arg(long, default_value_t = 1000)]
        comparisons: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
        format: DataFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the primitive registry as JSON.
    Primitives,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Forward,
    Reverse,
    Symbolic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReprFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Claim1,
    Claim3,
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Malformed arguments: status 2.
    Usage(anyhow::Error),
    /// A computation or check failed: status 1.
    Check(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn check<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Check(e.into())
}

fn parse_vector(text: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            let v: f64 = s.parse().with_context(|| format!("{what}: `{s}` is not a number"))?;
            if !v.is_finite() {
                bail!("{what}: `{s}` is not finite");
            }
            Ok(v)
        })
        .collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format_number(*v)).collect::<Vec<_>>().join(",")
}

fn load(program: &Program, input_len: Option<usize>) -> Result<(Expr, usize), Failure> {
    match program.arity.or(input_len) {
        Some(n) => Ok((parse(&program.expr, n).map_err(usage)?, n)),
        None => parse_inferred(&program.expr).map_err(usage),
    }
}

fn load_at(program: &Program, input: &str) -> Result<(Expr, InputVector), Failure> {
    let x = parse_vector(input, "input").map_err(usage)?;
    let (e, n) = load(program, Some(x.len()))?;
    if x.len() != n {
        return Err(usage(anyhow!("input has {} values but arity is {n}", x.len())));
    }
    Ok((e, InputVector::new(x).map_err(usage)?))
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))
                .map_err(check)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(check)?;
    writeln!(out).map_err(check)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Eval { program, input } => {
            let (e, v) = load_at(&program, &input)?;
            let value = eval(&e, &v).map_err(check)?;
            writeln!(stdout, "{}", format_number(value)).map_err(check)?;
        }
        Command::Grad {
            program,
            input,
            mode,
            tangent,
            cotangent,
        } => {
            let (e, v) = load_at(&program, &input)?;
            let line = match mode {
                Mode::Symbolic => join(symbolic_jacobian(&e, &v).map_err(check)?.entries()),
                Mode::Forward => match tangent {
                    Some(w) => {
                        let w = parse_vector(&w, "tangent").map_err(usage)?;
                        if w.len() != v.len() {
                            return Err(usage(anyhow!("tangent has {} values, expected {}", w.len(), v.len())));
                        }
                        format_number(jvp(&e, &v, &w).map_err(check)?)
                    }
                    None => {
                        let row = (0..v.len())
                            .map(|i| {
                                let mut w = vec![0.0; v.len()];
                                w[i] = 1.0;
                                jvp(&e, &v, &w)
                            })
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(check)?;
                        join(&row)
                    }
                },
                Mode::Reverse => {
                    let u = parse_vector(&cotangent, "cotangent").map_err(usage)?;
                    let [u] = u[..] else {
                        return Err(usage(anyhow!("cotangent must be a single value")));
                    };
                    join(&vjp(&e, &v, u).map_err(check)?)
                }
            };
            writeln!(stdout, "{line}").map_err(check)?;
        }
        Command::Gradcheck {
            program,
            lo,
            hi,
            samples,
            seed,
            tol,
            min_fraction,
        } => {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(usage(anyhow!("--lo must not exceed --hi")));
            }
            let (e, n) = load(&program, None)?;
            let report = gradcheck(&e, &Sampler::uniform(n, lo, hi, seed), samples, tol);
            write_json(&mut stdout, &report)?;
            if report.agreement_fraction < min_fraction {
                return Err(check(anyhow!(
                    "agreement fraction {} is below {min_fraction}",
                    report.agreement_fraction
                )));
            }
        }
        Command::Repr {
            program,
            format,
            derivative,
        } => {
            let (e, n) = load(&program, None)?;
            let mut repr = expr_to_repr(&e, n);
            if derivative {
                repr = repr.derivative();
            }
            match format {
                ReprFormat::Table => write!(stdout, "{repr}").map_err(check)?,
                ReprFormat::Json => write_json(&mut stdout, &repr.to_json_view())?,
            }
        }
        Command::Corpus {
            seed,
            count,
            depth,
            arity,
        } => {
            if arity == 0 {
                return Err(usage(anyhow!("--arity must be at least 1")));
            }
            for e in generate_corpus(seed, count, depth, arity) {
                writeln!(stdout, "{e}").map_err(check)?;
            }
        }
        Command::Cantor {
            lambda,
            depth,
            samples,
            out,
        } => {
            let phi = CantorApprox::shared(lambda, depth).map_err(usage)?;
            let gal = Gallery::new(depth).map_err(usage)?;
            let mut w = open_output(&out)?;
            writeln!(w, "x,phi_lambda,f,g,g_of_f").map_err(check)?;
            for i in 0..samples {
                let x = (i as f64 + 0.5) / samples as f64;
                let row = [
                    x,
                    phi.phi(x).map_err(check)?,
                    gal.f(x).map_err(check)?,
                    gal.g(x).map_err(check)?,
                    gal.g_of_f(x).map_err(check)?,
                ];
                writeln!(w, "{}", join(&row)).map_err(check)?;
            }
            w.flush().map_err(check)?;
        }
        Command::Probe {
            which,
            depth,
            step,
            count,
            comparisons,
            seed,
            format,
            out,
        } => {
            let mut w = open_output(&out)?;
            match which {
                ProbeKind::Claim1 => {
                    let depth = depth.unwrap_or(12);
                    let gal = Gallery::new(depth).map_err(usage)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let records = (0..count)
                        .map(|_| {
                            let (a, b) = gal.c_half().surviving(depth, rng.gen_range(0..1usize << depth));
                            gal.probe_claim1(if rng.gen_bool(0.5) { a } else { b }, step)
                        })
                        .collect::<Result<Vec<ProbeRecord>, _>>()
                        .map_err(check)?;
                    match format {
                        DataFormat::Json => write_json(&mut w, &records)?,
                        DataFormat::Csv => {
                            writeln!(w, "x,x1,x2,q1,q2,k,d_k").map_err(check)?;
                            for r in &records {
                                let nums = join(&[r.x, r.x1, r.x2, r.q1, r.q2]);
                                writeln!(w, "{nums},{},{}", r.step, format_number(r.bound)).map_err(check)?;
                            }
                        }
                    }
                }
                ProbeKind::Claim3 => {
                    let gal = Gallery::new(depth.unwrap_or(15)).map_err(usage)?;
                    let report = gal.probe_claim3(count, comparisons, seed).map_err(check)?;
                    match format {
                        DataFormat::Json => write_json(&mut w, &report)?,
                        DataFormat::Csv => {
                            writeln!(w, "x,k,f_slope,composed_slope").map_err(check)?;
                            for r in &report.records {
                                writeln!(
                                    w,
                                    "{},{},{}",
                                    format_number(r.x),
                                    r.step,
                                    join(&[r.f_slope, r.composed_slope])
                                )
                                .map_err(check)?;
                            }
                            eprintln!(
                                "max |f' - 2| = {:e}, max |(phi1 o f)'| = {:e}, max |phi1 o f - phi_half| = {:e}",
                                report.max_f_slope_err, report.max_composed_slope, report.max_composition_diff
                            );
                        }
                    }
                }
            }
            w.flush().map_err(check)?;
        }
        Command::Primitives => {
            let infos: Vec<_> = registry().iter().map(|p| p.info()).collect();
            write_json(&mut stdout, &infos)?;
        }
    }
    stdout.flush().map_err(check)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
