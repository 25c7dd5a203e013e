//! `finsler`: command-line front end for the geometry engine.

mod input;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler_core::verify::{self, SuiteConfig};
use finsler_core::{
    chern_coefficients, connect, estimate_convexity_radii, exp_map, integrate_geodesic, spray, ConvexityOptions,
    FinslerError, IntegrateOptions, ShootOptions,
};
use serde_json::json;

use input::{load_metric, load_metric_set, parse_grid, parse_vector, UsageError};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "finsler", version, about = "Numerical Finsler geometry on a coordinate chart")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MetricArg {
    /// Metric JSON: a file path, inline JSON starting with '{', or a zoo name.
    #[arg(long)]
    metric: String,
}

#[derive(Args)]
struct FlagArgs {
    /// Base point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Tangent vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    y: String,
}

#[derive(Args)]
struct IntegrationArgs {
    /// RK4 step size.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Relative F-drift tolerance (the integrator aborts at 100 times this).
    #[arg(long, default_value_t = 1e-6)]
    drift_tol: f64,
}

#[derive(Args)]
struct ShootArgs {
    /// Endpoint hit tolerance in chart units.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Always run the seeded restarts, not only on failure.
    #[arg(long)]
    multistart_always: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate F(x, y).
    Eval {
        #[command(flatten)]
        metric: MetricArg,
        #[command(flatten)]
        flag: FlagArgs,
        #[arg(long)]
        json: bool,
    },
    /// Fundamental tensor g at a flag.
    Tensor {
        #[command(flatten)]
        metric: MetricArg,
        #[command(flatten)]
        flag: FlagArgs,
        #[arg(long)]
        json: bool,
    },
    /// Spray, nonlinear connection and Chern coefficients at a flag.
    Connection {
        #[command(flatten)]
        metric: MetricArg,
        #[command(flatten)]
        flag: FlagArgs,
        #[arg(long)]
        json: bool,
    },
    /// Integrate a geodesic and write CSV samples.
    Trace {
        #[command(flatten)]
        metric: MetricArg,
        #[command(flatten)]
        flag: FlagArgs,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[command(flatten)]
        integration: IntegrationArgs,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exponential map Exp_x(X).
    Exp {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Initial velocity X.
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[command(flatten)]
        integration: IntegrationArgs,
        #[arg(long)]
        json: bool,
    },
    /// Shoot for the geodesic from one point to another.
    Connect {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[command(flatten)]
        shoot: ShootArgs,
        #[command(flatten)]
        integration: IntegrationArgs,
        #[arg(long)]
        json: bool,
    },
    /// Directed Finsler distance d(from, to).
    Distance {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[command(flatten)]
        shoot: ShootArgs,
        #[command(flatten)]
        integration: IntegrationArgs,
        #[arg(long)]
        json: bool,
    },
    /// Estimate convex-neighbourhood radii at a point; prints a JSON report.
    Convexity {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Radii as start:stop:step or a comma list.
        #[arg(long)]
        grid: String,
        /// Point pairs drawn per radius.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// eta = factor * epsilon.
        #[arg(long, default_value_t = 3.0)]
        eta_factor: f64,
        /// Smallest accepted singular value of DExp.
        #[arg(long, default_value_t = 1e-3)]
        rank_tol: f64,
    },
    /// Run the property-check suite.
    Verify {
        /// "zoo", or a JSON file holding one metric or an array of metrics.
        #[arg(long, default_value = "zoo")]
        metric_set: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report to this file ("-" for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Core(FinslerError),
    Io(std::io::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<FinslerError> for Failure {
    fn from(e: FinslerError) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn check_tol(name: &str, v: f64) -> Result<(), UsageError> {
    if v.is_finite() && v >= 1e-14 {
        Ok(())
    } else {
        Err(UsageError(format!("--{name} must be a finite value of at least 1e-14")))
    }
}

fn integrate_opts(a: &IntegrationArgs) -> Result<IntegrateOptions, UsageError> {
    if !(a.step > 0.0 && a.step.is_finite()) {
        return Err(UsageError("--step must be positive".into()));
    }
    check_tol("drift-tol", a.drift_tol)?;
    Ok(IntegrateOptions { step: a.step, drift_tol: a.drift_tol })
}

fn shoot_opts(s: &ShootArgs, i: &IntegrationArgs) -> Result<ShootOptions, UsageError> {
    check_tol("tol", s.tol)?;
    Ok(ShootOptions {
        integrate: integrate_opts(i)?,
        tol: s.tol,
        seed: s.seed,
        policy: if s.multistart_always {
            finsler_core::MultistartPolicy::Always
        } else {
            finsler_core::MultistartPolicy::OnFailure
        },
        ..ShootOptions::default()
    })
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(",")
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn run(cli: Cli) -> Result<(String, u8), Failure> {
    let mut out = String::new();
    let mut code = 0;
    match cli.command {
        Command::Eval { metric, flag, json } => {
            let m = load_metric(&metric.metric)?;
            let f = m.eval(&parse_vector("x", &flag.x)?, &parse_vector("y", &flag.y)?)?;
            if json {
                out = pretty(&json!({ "F": f }));
            } else {
                writeln!(out, "{f:?}").unwrap();
            }
        }
        Command::Tensor { metric, flag, json } => {
            let m = load_metric(&metric.metric)?;
            let t = m.fundamental_tensor(&parse_vector("x", &flag.x)?, &parse_vector("y", &flag.y)?)?;
            let rows = |a: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
                (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
            };
            if json {
                out = pretty(&json!({ "g": rows(&t.g), "g_inv": rows(&t.g_inv), "condition": t.condition }));
            } else {
                for r in rows(&t.g) {
                    writeln!(out, "{}", fmt_vec(&r)).unwrap();
                }
                writeln!(out, "condition {:?}", t.condition).unwrap();
            }
        }
        Command::Connection { metric, flag, json } => {
            let m = load_metric(&metric.metric)?;
            let (x, y) = (parse_vector("x", &flag.x)?, parse_vector("y", &flag.y)?);
            let nc = spray(&m, &x, &y)?;
            let ch = chern_coefficients(&m, &x, &y)?;
            if json {
                out = pretty(&json!({ "connection": nc, "chern": ch.nested(), "asymmetry": ch.asymmetry }));
            } else {
                writeln!(out, "G {}", fmt_vec(&nc.g)).unwrap();
                for i in 0..m.n() {
                    writeln!(out, "P[{}] {}", i + 1, fmt_vec(&nc.p.row(i).iter().copied().collect::<Vec<_>>())).unwrap();
                }
                for (i, block) in ch.nested().iter().enumerate() {
                    for (j, row) in block.iter().enumerate() {
                        writeln!(out, "Gamma[{}][{}] {}", i + 1, j + 1, fmt_vec(row)).unwrap();
                    }
                }
            }
        }
        Command::Trace { metric, flag, t_end, integration, out: path } => {
            let m = load_metric(&metric.metric)?;
            let opts = integrate_opts(&integration)?;
            let sol = integrate_geodesic(&m, &parse_vector("x", &flag.x)?, &parse_vector("y", &flag.y)?, t_end, &opts)?;
            let n = m.n();
            let mut csv = String::new();
            let header: Vec<String> = std::iter::once("t".to_string())
                .chain((1..=n).map(|i| format!("x{i}")))
                .chain((1..=n).map(|i| format!("v{i}")))
                .chain(std::iter::once("F".to_string()))
                .collect();
            writeln!(csv, "{}", header.join(",")).unwrap();
            for k in 0..sol.len() {
                let row: Vec<String> = std::iter::once(sol.t[k])
                    .chain(sol.x[k].iter().copied())
                    .chain(sol.v[k].iter().copied())
                    .chain(std::iter::once(sol.f_values[k]))
                    .map(|v| format!("{v:.16e}"))
                    .collect();
                writeln!(csv, "{}", row.join(",")).unwrap();
            }
            match path {
                Some(p) => std::fs::write(p, csv)?,
                None => out = csv,
            }
        }
        Command::Exp { metric, x, v, integration, json } => {
            let m = load_metric(&metric.metric)?;
            let p = exp_map(&m, &parse_vector("x", &x)?, &parse_vector("v", &v)?, &integrate_opts(&integration)?)?;
            if json {
                out = pretty(&json!({ "point": p }));
            } else {
                writeln!(out, "{}", fmt_vec(&p)).unwrap();
            }
        }
        Command::Connect { metric, from, to, shoot, integration, json } => {
            let m = load_metric(&metric.metric)?;
            let opts = shoot_opts(&shoot, &integration)?;
            let r = connect(&m, &parse_vector("from", &from)?, &parse_vector("to", &to)?, &opts)?;
            if json {
                out = pretty(&r);
            } else {
                writeln!(out, "velocity {}", fmt_vec(&r.velocity)).unwrap();
                writeln!(out, "length {:?}", r.length).unwrap();
                writeln!(out, "iterations {}", r.iterations).unwrap();
                writeln!(out, "residual {:e}", r.residual).unwrap();
            }
        }
        Command::Distance { metric, from, to, shoot, integration, json } => {
            let m = load_metric(&metric.metric)?;
            let opts = shoot_opts(&shoot, &integration)?;
            let d = finsler_core::distance(&m, &parse_vector("from", &from)?, &parse_vector("to", &to)?, &opts)?;
            if json {
                out = pretty(&json!({ "distance": d }));
            } else {
                writeln!(out, "{d:?}").unwrap();
            }
        }
        Command::Convexity { metric, at, grid, samples, seed, eta_factor, rank_tol } => {
            let m = load_metric(&metric.metric)?;
            check_tol("rank-tol", rank_tol)?;
            if !(eta_factor >= 1.0) {
                return Err(Failure::Usage("--eta-factor must be at least 1".into()));
            }
            let opts = ConvexityOptions {
                samples_per_radius: samples,
                rank_tol,
                eta_factor,
                seed,
                shoot: ShootOptions { seed, ..ShootOptions::default() },
                ..ConvexityOptions::default()
            };
            let r = estimate_convexity_radii(&m, &parse_vector("at", &at)?, &parse_grid(&grid)?, &opts)?;
            out = pretty(&r);
        }
        Command::Verify { metric_set, seed, json } => {
            let specs = load_metric_set(&metric_set)?;
            let report = verify::run_all(&specs, seed, &SuiteConfig::default());
            let mut text = String::new();
            for m in &report.metrics {
                if let Some(why) = &m.rejection {
                    writeln!(text, "REJECT {} {}", m.metric, why).unwrap();
                }
                for c in &m.checks {
                    writeln!(
                        text,
                        "{} {} {} max={:e} tol={:e} n={}",
                        if c.pass { "PASS" } else { "FAIL" },
                        m.metric,
                        c.check.name(),
                        c.max_residual,
                        c.tolerance,
                        c.samples
                    )
                    .unwrap();
                }
            }
            writeln!(text, "suite {}", if report.pass { "pass" } else { "fail" }).unwrap();
            match json {
                Some(p) if p.as_os_str() == "-" => out = pretty(&report),
                Some(p) => {
                    std::fs::write(p, pretty(&report))?;
                    out = text;
                }
                None => out = text,
            }
            if !report.pass {
                code = EXIT_VERIFY;
            }
        }
    }
    Ok((out, code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok((out, code)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            let (msg, code) = match f {
                Failure::Usage(m) => (format!("error: {m}"), EXIT_USAGE),
                Failure::Io(e) => (format!("error: {e}"), EXIT_USAGE),
                Failure::Core(e) if e.is_numerical() => (format!("error: {e}"), EXIT_NUMERICAL),
                Failure::Core(e) => (format!("error: {e}"), EXIT_USAGE),
            };
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
