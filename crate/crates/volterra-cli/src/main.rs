//! Command-line driver for the integral-equation toolkit: single solves,
//! convergence studies, solvability reports, and interpolation-bound
//! tables, written as CSV or JSON.

mod config;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use volterra::expr::{parse, Bindings, Var};
use volterra::harness::{
    run_convergence, run_existence, run_interp_bound, ExperimentConfig, Method,
};
use volterra::holder::HolderParams;
use volterra::problem::{by_name, problem_names, Problem, QuadPolicy};
use volterra::solver::linear::{solve_linear, LinearConfig};
use volterra::solver::spectral::{solve_spectral, SpectralConfig};

#[derive(Parser)]
#[command(
    name = "volterra",
    version,
    about = "Collocation solvers and diagnostics for nonlinear Volterra integral equations on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem at one resolution and print the solution values.
    Solve(SolveArgs),
    /// Solve across a resolution ladder and report errors and orders.
    Converge(ConvergeArgs),
    /// Evaluate the solvability condition for a problem's growth data.
    Existence(ExistenceArgs),
    /// Compare measured interpolation errors against the modulus bound.
    InterpBound(InterpBoundArgs),
    /// List the built-in problems.
    ListProblems,
}

#[derive(Args)]
struct ProblemSource {
    /// Name of a built-in problem.
    #[arg(long, conflicts_with = "config")]
    problem: Option<String>,
    /// Path to a JSON problem definition with expression strings.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ProblemSource {
    fn load(&self) -> anyhow::Result<Problem> {
        match (&self.problem, &self.config) {
            (Some(name), None) => by_name(name).map_err(Into::into),
            (None, Some(path)) => config::load_problem(path),
            _ => bail!("exactly one of --problem or --config is required"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Linear,
    Spectral,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Linear => Method::Linear,
            MethodArg::Spectral => Method::Spectral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Wrapper so clap treats a parsed list as one argument value.
#[derive(Clone, Debug)]
struct ResolutionList(Vec<usize>);

#[derive(Clone, Debug)]
struct WidthList(Vec<f64>);

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: ProblemSource,
    #[arg(long, value_enum, default_value = "linear")]
    method: MethodArg,
    /// Mesh cells (linear) or polynomial degree (spectral).
    #[arg(long = "N", default_value = "256")]
    n: usize,
    /// Cell rule for the linear method: trapezoid:k or gauss:m.
    #[arg(long, value_parser = parse_quad)]
    quad: Option<QuadPolicy>,
    /// Absolute residual tolerance (method default when omitted).
    #[arg(long)]
    tol: Option<f64>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    source: ProblemSource,
    #[arg(long, value_enum, default_value = "linear")]
    method: MethodArg,
    /// Explicit resolutions, comma separated: --N 16,32,64
    #[arg(long = "N", value_parser = parse_resolution_list, conflicts_with = "n_range")]
    n: Option<ResolutionList>,
    /// Arithmetic lo:hi:step or dyadic:lo:hi resolution ladder.
    #[arg(long = "N-range", value_parser = parse_resolution_range)]
    n_range: Option<ResolutionList>,
    /// Cell rule for the linear method: trapezoid:k or gauss:m.
    #[arg(long, value_parser = parse_quad)]
    quad: Option<QuadPolicy>,
    #[arg(long)]
    tol: Option<f64>,
    /// Nonlinear iteration budget per solve.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Probe points for error measurement.
    #[arg(long, default_value = "200")]
    probe: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ExistenceArgs {
    #[command(flatten)]
    source: ProblemSource,
    #[arg(long)]
    alpha: f64,
    /// Finite integrability exponent of the solvability condition.
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv renders the human-readable text table.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct InterpBoundArgs {
    /// Expression in t to interpolate, e.g. "sqrt(t)".
    #[arg(long, conflicts_with_all = ["problem", "config"])]
    function: Option<String>,
    /// Built-in problem whose exact solution is interpolated.
    #[arg(long, conflicts_with = "config")]
    problem: Option<String>,
    /// JSON problem definition whose exact solution is interpolated.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: f64,
    /// Omit for the sup-scaled (Holder) variant of the bound.
    #[arg(long)]
    beta: Option<f64>,
    /// Mesh widths, comma separated: --h 0.125,0.0625
    #[arg(long = "h", value_parser = parse_h_list)]
    hs: Option<WidthList>,
    /// Sample count for the modulus evaluation.
    #[arg(long, default_value = "65536")]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn parse_quad(text: &str) -> Result<QuadPolicy, String> {
    let (kind, arg) = text
        .split_once(':')
        .ok_or_else(|| format!("expected trapezoid:k or gauss:m, got {text:?}"))?;
    let value: usize = arg.parse().map_err(|e| format!("{e}"))?;
    match kind {
        "trapezoid" => Ok(QuadPolicy::Trapezoid { panels: value }),
        "gauss" => Ok(QuadPolicy::Gauss { order: value }),
        other => Err(format!("unknown rule {other:?}")),
    }
}

fn parse_resolution_list(text: &str) -> Result<ResolutionList, String> {
    text.split(',')
        .map(|part| part.trim().parse::<usize>().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()
        .map(ResolutionList)
}

fn parse_resolution_range(text: &str) -> Result<ResolutionList, String> {
    if let Some(rest) = text.strip_prefix("dyadic:") {
        let (lo, hi) = rest
            .split_once(':')
            .ok_or_else(|| format!("expected dyadic:lo:hi, got {text:?}"))?;
        let lo: usize = lo.parse().map_err(|e| format!("{e}"))?;
        let hi: usize = hi.parse().map_err(|e| format!("{e}"))?;
        if lo == 0 || hi < lo {
            return Err("need 1 <= lo <= hi".into());
        }
        let mut out = Vec::new();
        let mut n = lo;
        while n <= hi {
            out.push(n);
            match n.checked_mul(2) {
                Some(next) => n = next,
                None => break,
            }
        }
        return Ok(ResolutionList(out));
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step or dyadic:lo:hi, got {text:?}"));
    }
    let lo: usize = parts[0].parse().map_err(|e| format!("{e}"))?;
    let hi: usize = parts[1].parse().map_err(|e| format!("{e}"))?;
    let step: usize = parts[2].parse().map_err(|e| format!("{e}"))?;
    if step == 0 || lo == 0 || hi < lo {
        return Err("need 1 <= lo <= hi and step >= 1".into());
    }
    Ok(ResolutionList((lo..=hi).step_by(step).collect()))
}

fn parse_h_list(text: &str) -> Result<WidthList, String> {
    text.split(',')
        .map(|part| part.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()
        .map(WidthList)
}

fn emit(out: &Option<PathBuf>, payload: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(payload.as_bytes())?;
            Ok(())
        }
    }
}

fn run_solve(args: &SolveArgs) -> anyhow::Result<ExitCode> {
    let problem = args.source.load()?;
    let start = std::time::Instant::now();
    let (points, values, iterations, max_residual, clamped): (Vec<f64>, Vec<f64>, usize, f64, bool) =
        match args.method {
            MethodArg::Linear => {
                let mut cfg = LinearConfig::new(args.n);
                if let Some(quad) = args.quad {
                    cfg.cell_quad = quad;
                }
                if let Some(tol) = args.tol {
                    cfg.tol = tol;
                }
                let sol = solve_linear(&problem, &cfg)?;
                let mesh = sol.interpolant.mesh();
                let points = (0..=args.n).map(|i| mesh.node(i)).collect();
                (
                    points,
                    sol.node_values().to_vec(),
                    sol.iterations,
                    sol.max_residual,
                    sol.clamped,
                )
            }
            MethodArg::Spectral => {
                let mut cfg = SpectralConfig::new(args.n);
                if let Some(tol) = args.tol {
                    cfg.tol = tol;
                }
                let sol = solve_spectral(&problem, &cfg)?;
                (
                    sol.nodes().to_vec(),
                    sol.node_values().to_vec(),
                    sol.iterations,
                    sol.max_residual,
                    sol.clamped,
                )
            }
        };
    let seconds = start.elapsed().as_secs_f64();
    eprintln!(
        "solve {} method={} N={}: converged, {} iterations, max residual {:.3e}, {:.3}s",
        problem.name(),
        match args.method {
            MethodArg::Linear => "linear",
            MethodArg::Spectral => "spectral",
        },
        args.n,
        iterations,
        max_residual,
        seconds
    );
    if clamped {
        eprintln!(
            "warning: the domain floor clamped the nonlinearity at convergence; \
             the solution grazes the admissible boundary"
        );
    }
    let payload = match args.format {
        Format::Csv => {
            let mut text = String::from("t,x\n");
            for (t, x) in points.iter().zip(&values) {
                text.push_str(&format!("{t:.16e},{x:.16e}\n"));
            }
            text
        }
        Format::Json => {
            let body = serde_json::json!({
                "problem": problem.name(),
                "method": match args.method {
                    MethodArg::Linear => "linear",
                    MethodArg::Spectral => "spectral",
                },
                "N": args.n,
                "t": points,
                "x": values,
                "iterations": iterations,
                "max_residual": max_residual,
                "clamped": clamped,
                "seconds": seconds,
            });
            serde_json::to_string_pretty(&body)? + "\n"
        }
    };
    emit(&args.out, &payload)?;
    Ok(ExitCode::SUCCESS)
}

fn run_converge(args: &ConvergeArgs) -> anyhow::Result<ExitCode> {
    let problem = args.source.load()?;
    let resolutions = match (&args.n, &args.n_range) {
        (Some(list), None) => list.0.clone(),
        (None, Some(range)) => range.0.clone(),
        (None, None) => bail!("one of --N or --N-range is required"),
        _ => unreachable!("clap enforces the conflict"),
    };
    let mut config = ExperimentConfig::new(args.method.into(), resolutions);
    if let Some(quad) = args.quad {
        config.cell_quad = quad;
    }
    config.tol = args.tol;
    if let Some(max_iter) = args.max_iter {
        config.max_iter = max_iter;
    }
    config.probes = args.probe;

    let report = run_convergence(&problem, &config)?;
    for row in &report.rows {
        match &row.failure {
            None => eprintln!(
                "N={}: converged, err_sup={:.3e}, {} iterations, {:.3}s",
                row.n,
                row.err_sup.unwrap_or(f64::NAN),
                row.iters.unwrap_or(0),
                row.seconds
            ),
            Some(reason) => eprintln!("N={}: FAILED ({reason})", row.n),
        }
    }
    if let Some(order) = report.observed_order {
        eprintln!("observed order: {order:.3}");
    }
    if !report.decay_factors.is_empty() {
        let rendered: Vec<String> = report
            .decay_factors
            .iter()
            .map(|f| format!("{f:.2}"))
            .collect();
        eprintln!("decay factors: {}", rendered.join(", "));
    }

    let payload = match args.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()? + "\n",
    };
    emit(&args.out, &payload)?;
    Ok(if report.all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_existence_cmd(args: &ExistenceArgs) -> anyhow::Result<ExitCode> {
    let problem = args.source.load()?;
    let meta = problem.meta().ok_or_else(|| {
        anyhow::anyhow!(
            "problem '{}' carries no growth data; supply a meta block",
            problem.name()
        )
    })?;
    let params = HolderParams::finite(args.alpha, args.beta)?;
    let report = run_existence(meta, &params)?;
    let payload = match args.format {
        Format::Csv => report.to_text(),
        Format::Json => report.to_json()? + "\n",
    };
    emit(&args.out, &payload)?;
    Ok(ExitCode::SUCCESS)
}

fn run_interp_bound_cmd(args: &InterpBoundArgs) -> anyhow::Result<ExitCode> {
    let params = match args.beta {
        Some(beta) => HolderParams::finite(args.alpha, beta)?,
        None => HolderParams::infinite(args.alpha)?,
    };
    let hs = match &args.hs {
        Some(list) if !list.0.is_empty() => list.0.clone(),
        _ => bail!("at least one --h mesh width is required"),
    };
    let f: Box<dyn Fn(f64) -> f64> = match (&args.function, &args.problem, &args.config) {
        (Some(source), None, None) => {
            let expr = parse(source)?;
            if expr.uses(Var::S) || expr.uses(Var::X) {
                bail!("--function must be an expression in t only");
            }
            Box::new(move |t| expr.eval(&Bindings::t(t)).unwrap_or(f64::NAN))
        }
        (None, Some(name), None) => {
            let problem = by_name(name)?;
            if !problem.has_exact() {
                bail!("problem '{name}' has no exact solution to interpolate");
            }
            Box::new(move |t| problem.exact_at(t).unwrap_or(f64::NAN))
        }
        (None, None, Some(path)) => {
            let problem = config::load_problem(path)?;
            if !problem.has_exact() {
                bail!("the configured problem has no exact solution to interpolate");
            }
            Box::new(move |t| problem.exact_at(t).unwrap_or(f64::NAN))
        }
        _ => bail!("exactly one of --function, --problem, or --config is required"),
    };
    let report = run_interp_bound(f.as_ref(), &params, &hs, args.samples)?;
    let payload = match args.format {
        Format::Csv => report.to_text(),
        Format::Json => report.to_json()? + "\n",
    };
    emit(&args.out, &payload)?;
    Ok(ExitCode::SUCCESS)
}

fn run_list() -> ExitCode {
    for name in problem_names() {
        let problem = by_name(&name).expect("registry names resolve");
        println!("{name}: {}", problem.description());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Converge(args) => run_converge(args),
        Command::Existence(args) => run_existence_cmd(args),
        Command::InterpBound(args) => run_interp_bound_cmd(args),
        Command::ListProblems => Ok(run_list()),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
