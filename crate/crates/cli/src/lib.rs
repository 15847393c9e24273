//! Command-line front end for `quadint-core`: problem files, CSV and JSON
//! outputs, and the seeded verification suite.

pub mod config;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadint_core::norms::NormReport;
use quadint_core::problem::{certify, Certificate, ProblemSpec};
use quadint_core::sensitivity::{compare_g, SensitivityError, SensitivityReport};
use quadint_core::solver::{solve, Solution, SolveOptions, SolverError};
use serde::Serialize;

use config::{ConfigError, Loaded};
use output::Table;
use verify::VerifyOptions;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// A certificate or property check failed.
    Failed = 1,
    /// Unreadable or invalid input.
    Input = 2,
    NotConverged = 3,
}

#[derive(Debug, Parser)]
#[command(name = "quadint", version, about = "Certify and solve quadratic integral equation systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output style on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Worker threads for the parallel scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the hypotheses of a problem file.
    Check(ProblemArgs),
    /// Certify, then run the Picard iteration.
    Solve(SolveArgs),
    /// Compare the solutions for `g` and `g2`.
    Sensitivity(SolveArgs),
    /// Run the seeded property suite.
    Verify(VerifyArgs),
    /// Norms of the sampled problem data.
    Norms(ProblemArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Problem file (JSON).
    pub config: PathBuf,
    /// Directory for output files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Stop when the update norm falls below tol * max(1, |v|).
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,
    /// Iterate even when the certificate fails.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Grid size (even, at least 16).
    #[arg(long, default_value_t = verify::DEFAULT_POINTS)]
    pub n: usize,
    /// Halve the grid until a property fails.
    #[arg(long)]
    pub refine: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_circular: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

impl SolveArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: usize::try_from(self.max_iter).unwrap_or(usize::MAX),
            force: self.force,
        }
    }
}

/// Everything a run prints and writes.
struct Run {
    format: Format,
    out: Option<PathBuf>,
}

impl Run {
    fn emit<T: Serialize>(&self, file: &str, doc: &T, human: impl FnOnce() -> String) -> Result<(), Exit> {
        let text = output::json(doc);
        self.write(file, &text)?;
        match self.format {
            Format::Machine => print!("{text}"),
            Format::Human => print!("{}", human()),
        }
        Ok(())
    }

    fn write(&self, file: &str, contents: &str) -> Result<(), Exit> {
        let Some(dir) = &self.out else { return Ok(()) };
        output::write(dir, file, contents).map_err(|err| {
            eprintln!("error: cannot write {}: {err}", dir.join(file).display());
            Exit::Input
        })
    }
}

fn input_error(err: impl std::fmt::Display) -> Exit {
    eprintln!("error: {err}");
    Exit::Input
}

fn load(path: &Path) -> Result<Loaded, Exit> {
    config::load(path).map_err(|err: ConfigError| input_error(err))
}

fn certified(spec: &ProblemSpec) -> Result<Certificate, Exit> {
    certify(spec).map_err(input_error)
}

pub fn run(cli: Cli) -> Exit {
    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return input_error(err);
        }
    }
    let result = match &cli.command {
        Command::Check(args) => check(cli.format, args),
        Command::Solve(args) => solve_cmd(cli.format, args),
        Command::Sensitivity(args) => sensitivity(cli.format, args),
        Command::Verify(args) => verify_cmd(cli.format, args),
        Command::Norms(args) => norms(cli.format, args),
    };
    result.unwrap_or_else(|code| code)
}

/// The problem as read, echoed into every document.
#[derive(Serialize)]
struct ProblemEcho {
    #[serde(rename = "N")]
    n: usize,
    grid: quadint_core::grid::GridSpec,
    kernels: Vec<String>,
    multipliers: Vec<String>,
    initial: Vec<String>,
    g: Vec<String>,
    rho: f64,
    options: quadint_core::problem::ProblemOptions,
}

impl ProblemEcho {
    fn new(p: &ProblemSpec) -> Self {
        let text = |es: &[quadint_core::expr::Expr]| es.iter().map(ToString::to_string).collect();
        ProblemEcho {
            n: p.len(),
            grid: *p.grid(),
            kernels: text(p.kernels()),
            multipliers: text(p.multipliers()),
            initial: text(p.initial()),
            g: text(p.nonlinearity()),
            rho: p.rho(),
            options: *p.options(),
        }
    }
}

#[derive(Serialize)]
struct CheckDoc<'a> {
    command: &'static str,
    problem: ProblemEcho,
    passed: bool,
    certificate: &'a Certificate,
}

fn check(format: Format, args: &ProblemArgs) -> Result<Exit, Exit> {
    let loaded = load(&args.config)?;
    let cert = certified(&loaded.spec)?;
    let run = Run { format, out: args.out.clone() };
    let doc = CheckDoc {
        command: "check",
        problem: ProblemEcho::new(&loaded.spec),
        passed: cert.passed(),
        certificate: &cert,
    };
    run.emit("certificate.json", &doc, || output::certificate_table(&cert).render())?;
    Ok(if cert.passed() { Exit::Ok } else { Exit::Failed })
}

#[derive(Serialize)]
struct SolveSummary {
    converged: bool,
    iterations: usize,
    residual: f64,
    /// Largest contraction ratio observed from step 1 on.
    max_ratio: Option<f64>,
    sigma: f64,
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    command: &'static str,
    problem: ProblemEcho,
    options: SolveOptions,
    certificate: &'a Certificate,
    summary: SolveSummary,
    status: &'static str,
    solution: &'a Solution,
}

fn summary(s: &Solution, cert: &Certificate) -> SolveSummary {
    SolveSummary {
        converged: s.converged,
        iterations: s.iterations,
        residual: s.residual,
        max_ratio: s.trace.max_ratio(1),
        sigma: cert.sigma,
    }
}

fn solve_cmd(format: Format, args: &SolveArgs) -> Result<Exit, Exit> {
    let loaded = load(&args.problem.config)?;
    let cert = certified(&loaded.spec)?;
    let run = Run { format, out: args.problem.out.clone() };
    let opts = args.options();
    let (solution, status, code) = match solve(&loaded.spec, &cert, &opts) {
        Ok(s) => (s, "converged", Exit::Ok),
        Err(SolverError::NotConverged(s)) => (*s, "not converged", Exit::NotConverged),
        Err(SolverError::Diverged(s)) => (*s, "diverged", Exit::NotConverged),
        Err(SolverError::Uncertified) => {
            eprintln!("error: certificate failed; pass --force to iterate anyway");
            if format == Format::Human {
                print!("{}", output::certificate_table(&cert).render());
            }
            return Err(Exit::Failed);
        }
        Err(err @ (SolverError::Problem(_) | SolverError::Shape { .. })) => return Err(input_error(err)),
        Err(err) => {
            eprintln!("error: {err}");
            return Err(Exit::NotConverged);
        }
    };
    run.write("solution.csv", &output::solution_csv(&solution.u))?;
    run.write("trace.csv", &output::trace_csv(&solution.trace))?;
    let doc = SolveDoc {
        command: "solve",
        problem: ProblemEcho::new(&loaded.spec),
        options: opts,
        certificate: &cert,
        summary: summary(&solution, &cert),
        status,
        solution: &solution,
    };
    run.emit("summary.json", &doc, || {
        let mut t = output::certificate_table(&cert);
        let ratio = solution.trace.max_ratio(1).map_or(String::from("-"), |r| format!("{r:.6e}"));
        t.row("status", status)
            .row("iterations", solution.iterations)
            .row("residual", format!("{:.6e}", solution.residual))
            .row("max observed ratio vs sigma", format!("{ratio} vs {:.6e}", cert.sigma));
        for note in &solution.notes {
            t.row("note", note);
        }
        t.render()
    })?;
    Ok(code)
}

#[derive(Serialize)]
struct SensitivityDoc<'a> {
    command: &'static str,
    problem: ProblemEcho,
    g2: Vec<String>,
    options: SolveOptions,
    report: &'a SensitivityReport,
}

fn sensitivity(format: Format, args: &SolveArgs) -> Result<Exit, Exit> {
    let loaded = load(&args.problem.config)?;
    let g2 = loaded.g2().map_err(input_error)?;
    let opts = args.options();
    let report = match compare_g(&loaded.spec, loaded.spec.nonlinearity(), g2, &opts) {
        Ok(r) => r,
        Err(SensitivityError::Uncertified { which, certificate }) => {
            eprintln!("error: nonlinearity {which} is not certified under the shared M; pass --force to compare anyway");
            if format == Format::Human {
                print!("{}", output::certificate_table(&certificate).render());
            }
            return Err(Exit::Failed);
        }
        Err(err @ SensitivityError::Solve { .. }) => {
            eprintln!("error: {err}");
            return Err(Exit::NotConverged);
        }
        Err(err) => return Err(input_error(err)),
    };
    let run = Run { format, out: args.problem.out.clone() };
    for (m, s) in report.solutions.iter().enumerate() {
        run.write(&format!("solution_g{}.csv", m + 1), &output::solution_csv(&s.u))?;
    }
    let doc = SensitivityDoc {
        command: "sensitivity",
        problem: ProblemEcho::new(&loaded.spec),
        g2: g2.iter().map(ToString::to_string).collect(),
        options: opts,
        report: &report,
    };
    run.emit("sensitivity.json", &doc, || {
        let mut t = Table::default();
        let r = &report;
        t.row("|g1 - g2|_C1(I)", format!("{:.6e}{}", r.g_distance, if r.g_distance_sampled { " (sampled)" } else { "" }))
            .row("shared M", format!("{:.6e}", r.m_used))
            .row("sigma", format!("{:.6e}", r.sigma_used))
            .row("|u_p1 - u_p2|_H1", format!("{:.6e}", r.lhs))
            .row("continuity bound", format!("{:.6e}", r.rhs))
            .row("margin", format!("{:.6e}", r.margin))
            .row("c_a/(1-sigma) (|u0|+1)^2 Q |g1-g2|", format!("{:.6e}", r.p1p2_bound))
            .row("identity gap", format!("{:.3e}", r.identity_gap))
            .row("|u_p2 - tau_g1 u_p2|_H1", format!("{:.6e} <= {:.6e}", r.eta_gap, r.eta_bound))
            .row("inequality", if r.holds { "holds" } else { "VIOLATED" });
        for (m, c) in r.certificates.iter().enumerate() {
            t.row(format!("certificate g{}", m + 1), if c.passed() { "PASSED" } else { "FAILED" });
        }
        t.render()
    })?;
    Ok(if report.holds { Exit::Ok } else { Exit::Failed })
}

#[derive(Serialize)]
struct VerifyDoc<'a, T: Serialize> {
    command: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

fn verify_cmd(format: Format, args: &VerifyArgs) -> Result<Exit, Exit> {
    let opts = VerifyOptions {
        seed: args.seed,
        points: args.n,
        inject_circular: args.inject_circular,
    };
    let run = Run { format, out: args.out.clone() };
    if args.refine {
        let study = verify::refinement_study(&opts).map_err(input_error)?;
        run.emit("verify.json", &VerifyDoc { command: "verify", body: &study }, || {
            let mut t = Table::default();
            for s in &study.steps {
                let status = if s.passed { String::from("pass") } else { format!("FAIL: {}", s.failing.join(", ")) };
                t.row(format!("n = {}", s.points), status);
            }
            t.row(
                "failure grid size",
                study.failure_points.map_or(String::from("none"), |n| n.to_string()),
            );
            t.render()
        })?;
        return Ok(Exit::Ok);
    }
    let report = verify::run(&opts).map_err(input_error)?;
    run.emit("verify.json", &VerifyDoc { command: "verify", body: &report }, || {
        let mut out = format!(
            "{:<20} {:>7} {:>12} {:>10} {:>12}  {}\n",
            "property", "samples", "worst", "limit", "margin", "status"
        );
        for r in &report.rows {
            out += &format!(
                "{:<20} {:>7} {:>12.4e} {:>10.1e} {:>12.4e}  {}\n",
                r.name,
                r.samples,
                r.worst,
                r.limit,
                r.margin(),
                if r.passed { "pass" } else { "FAIL" }
            );
        }
        out += &format!("seed {}, n = {}, L = {}\n", report.seed, report.points, report.half_width);
        out
    })?;
    Ok(if report.passed { Exit::Ok } else { Exit::Failed })
}

#[derive(Serialize)]
struct NormEntry {
    name: String,
    norms: NormReport,
}

fn norms(format: Format, args: &ProblemArgs) -> Result<Exit, Exit> {
    let loaded = load(&args.config)?;
    let disc = loaded.spec.discretize().map_err(input_error)?;
    let mut entries = Vec::new();
    for (m, f) in disc.u0().components().iter().enumerate() {
        entries.push(NormEntry { name: format!("initial[{m}]"), norms: NormReport::full(f) });
    }
    for (m, f) in disc.multipliers().iter().enumerate() {
        entries.push(NormEntry { name: format!("multipliers[{m}]"), norms: NormReport::full(f) });
    }
    for (m, f) in disc.kernels().iter().enumerate() {
        entries.push(NormEntry { name: format!("kernels[{m}]"), norms: NormReport::full(f) });
    }
    #[derive(Serialize)]
    struct NormsDoc {
        command: &'static str,
        problem: ProblemEcho,
        entries: Vec<NormEntry>,
    }
    let doc = NormsDoc {
        command: "norms",
        problem: ProblemEcho::new(&loaded.spec),
        entries,
    };
    let run = Run { format, out: args.out.clone() };
    run.emit("norms.json", &doc, || {
        let mut out = format!("{:<16} {:>13} {:>13} {:>13} {:>13} {:>13}\n", "function", "L1", "L2", "Linf", "H1", "W11");
        for e in &doc.entries {
            let n = e.norms;
            let cell = |v: Option<f64>| v.map_or(String::from("-"), |v| format!("{v:.6e}"));
            out += &format!(
                "{:<16} {:>13} {:>13} {:>13} {:>13} {:>13}\n",
                e.name,
                cell(n.l1),
                cell(n.l2),
                cell(n.linf),
                cell(n.h1),
                cell(n.w11)
            );
        }
        out
    })?;
    Ok(Exit::Ok)
}
