//! Command-line front end for the `itersplit` integrators and studies.
//!
//! Every subcommand writes CSV to `--output` or, without it, to stdout.
//! Human-readable summaries go to stderr so stdout stays machine-readable.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use itersplit::harness::{
    effort_table, energy_trace, run_sweep, write_csv, ConvergenceReport, SweepPlan,
};
use itersplit::problems::by_name;
use itersplit::scheme::parse_scheme;
use itersplit::stepper::{integrate, step_plan, StepperState};
use itersplit::SchemeSpec;

/// Exit status for runs that completed but where some integration diverged.
pub const EXIT_DIVERGED: i32 = 2;

/// The schemes listed in the effort table by default.
pub const EFFORT_SCHEMES: &str = "S,IS:2,TJ,ITJ:4,C9,IC9:6";

#[derive(Debug, Parser)]
#[command(name = "itersplit", version, about = "Iterated Strang splitting: order studies, benchmarks and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error-vs-step sweep with fitted convergence slopes.
    OrderStudy(StudyArgs),
    /// Error-vs-work sweep with wall-clock timing, without slope fits.
    Benchmark(StudyArgs),
    /// Energy deviation along a trajectory.
    Energy(EnergyArgs),
    /// Final state of a single integration.
    Solve(SolveArgs),
    /// Partial flows per step for each scheme.
    EffortTable(EffortArgs),
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    /// Comma-separated descriptors: S | IS:<i> | TJ | ITJ:<i> | C9 | IC9:<i> | RK4.
    #[arg(long, alias = "scheme", value_delimiter = ',')]
    pub schemes: Vec<String>,
    /// Iteration count for bare `IS`, `ITJ` and `IC9` descriptors.
    #[arg(long)]
    pub iterations: Option<u32>,
}

impl SchemeArgs {
    pub fn parse(&self) -> Result<Vec<SchemeSpec>> {
        if self.schemes.is_empty() {
            bail!("no schemes given (use --schemes)");
        }
        if self.iterations == Some(0) {
            bail!("--iterations must be at least 1");
        }
        self.schemes
            .iter()
            .map(|d| {
                let d = d.trim();
                let full = match (d, self.iterations) {
                    ("IS" | "ITJ" | "IC9", Some(i)) => format!("{d}:{i}"),
                    _ => d.to_string(),
                };
                parse_scheme(&full).map_err(Into::into)
            })
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long)]
    pub problem: String,
    #[command(flatten)]
    pub schemes: SchemeArgs,
    /// Step sizes, largest first; the problem's standard grid when omitted.
    #[arg(long, value_delimiter = ',')]
    pub tau_list: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Step of the fine classic-Strang reference.
    #[arg(long)]
    pub ref_tau: Option<f64>,
    /// Step of the fine RK4 reference errors are measured against.
    #[arg(long)]
    pub rk4_ref_tau: Option<f64>,
    /// Skip the fine-Strang cross-check of the reference.
    #[arg(long)]
    pub skip_reference_check: bool,
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long)]
    pub problem: String,
    #[command(flatten)]
    pub schemes: SchemeArgs,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub t_end: f64,
    /// Record every this many steps.
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: String,
    #[command(flatten)]
    pub schemes: SchemeArgs,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EffortArgs {
    #[arg(long, alias = "scheme", value_delimiter = ',', default_value = EFFORT_SCHEMES)]
    pub schemes: Vec<String>,
    #[arg(long)]
    pub iterations: Option<u32>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::OrderStudy(args) => cmd_study(&args, true),
        Command::Benchmark(args) => cmd_study(&args, false),
        Command::Energy(args) => cmd_energy(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::EffortTable(args) => cmd_effort_table(&args),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn finish(mut out: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    out.flush()
        .with_context(|| format!("cannot write {}", path.map_or("stdout".into(), |p| p.display().to_string())))
}

fn slopes_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map_or("order".into(), |s| s.to_string_lossy().into_owned());
    output.with_file_name(format!("{stem}.slopes.csv"))
}

pub fn build_plan(args: &StudyArgs, fits: bool) -> Result<SweepPlan> {
    let mut plan = SweepPlan::standard(&args.problem, args.schemes.parse()?)?;
    if let Some(taus) = &args.tau_list {
        plan.taus = taus.clone();
    }
    if let Some(t) = args.t_end {
        plan.t_end = t;
    }
    plan.ref_tau = args.ref_tau;
    if args.rk4_ref_tau.is_some() {
        plan.rk4_ref_tau = args.rk4_ref_tau;
    }
    plan.check_references = fits && !args.skip_reference_check;
    plan.repeat = args.repeat;
    plan.validate()?;
    Ok(plan)
}

/// `order-study` (with fits) and `benchmark` (without).
pub fn cmd_study(args: &StudyArgs, fits: bool) -> Result<i32> {
    let plan = build_plan(args, fits)?;
    let result = run_sweep(&plan)?;
    let mut out = open_output(args.output.as_deref())?;
    write_csv(&mut out, &result.records)?;
    finish(out, args.output.as_deref())?;

    for r in &result.records {
        if let Some(cause) = &r.failure {
            eprintln!("{} τ = {}: {cause}", r.scheme, r.tau);
        }
    }
    if fits {
        print_report(&result.report);
        if let Some(path) = &args.output {
            let sp = slopes_path(path);
            let mut f = open_output(Some(&sp))?;
            write_slopes(&mut f, &result.report)?;
            finish(f, Some(&sp))?;
        }
    } else {
        for r in &result.records {
            eprintln!(
                "{:8} τ = {:<10.4e} error {:.3e}  flows {:>10}  {:.3} s",
                r.scheme.to_string(),
                r.tau,
                r.error_scaled,
                r.flows(),
                r.wall_seconds
            );
        }
    }
    Ok(if result.records.iter().any(|r| r.failure.is_some()) {
        EXIT_DIVERGED
    } else {
        0
    })
}

fn print_report(report: &ConvergenceReport) {
    eprintln!("{}: fitted slopes (points below {:.2e} excluded)", report.problem, report.fit_floor);
    for f in &report.fits {
        eprintln!(
            "  {:8} slope {:6.3}  residual {:.2e}  points {}  nominal {}  {}",
            f.scheme.to_string(),
            f.slope,
            f.residual,
            f.points(),
            f.nominal_order,
            if f.meets_nominal() { "pass" } else { "FAIL" }
        );
    }
    if let Some(c) = &report.reference_check {
        eprintln!(
            "  reference check: Strang (τ = {:.3e}) vs RK4 (τ = {:.3e}) differ by {:.2e}; smallest sweep error {:.2e}: {}",
            c.strang_tau,
            c.rk4_tau,
            c.disagreement,
            c.smallest_sweep_error,
            if c.passed() { "pass" } else { "FAIL" }
        );
    }
}

/// Slope table: one row per scheme.
pub fn write_slopes<W: Write>(mut out: W, report: &ConvergenceReport) -> io::Result<()> {
    writeln!(out, "problem,scheme,slope,intercept,residual,points,nominal_order,meets_nominal")?;
    for f in &report.fits {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{},{},{}",
            report.problem,
            f.scheme,
            f.slope,
            f.intercept,
            f.residual,
            f.points(),
            f.nominal_order,
            f.meets_nominal()
        )?;
    }
    Ok(())
}

pub fn cmd_energy(args: &EnergyArgs) -> Result<i32> {
    let problem = by_name(&args.problem)?;
    let schemes = args.schemes.parse()?;
    let traces = schemes
        .iter()
        .map(|s| energy_trace(&*problem, s, args.tau, args.t_end, args.sample_every))
        .collect::<itersplit::Result<Vec<_>>>()?;
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "problem,scheme,tau,t,energy_error")?;
    for (s, trace) in schemes.iter().zip(traces) {
        for (t, e) in trace {
            writeln!(out, "{},{},{:.16e},{:.16e},{:.16e}", args.problem, s, args.tau, t, e)?;
        }
    }
    finish(out, args.output.as_deref())?;
    Ok(0)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let problem = by_name(&args.problem)?;
    let schemes = args.schemes.parse()?;
    let (full, last) = step_plan(args.tau, args.t_end)?;
    let steps = full + usize::from(last.is_some());
    let y0 = problem.initial_state();
    let mut out = open_output(args.output.as_deref())?;
    let comps: Vec<String> = (0..problem.dim()).map(|i| format!("y{i}")).collect();
    writeln!(out, "problem,scheme,tau,t_end,steps,flow_a,flow_b,rhs_evals,{}", comps.join(","))?;
    for s in &schemes {
        let mut acct = StepperState::new();
        let y = integrate(&*problem, s, args.tau, args.t_end, &y0, &mut acct)?;
        let vals: Vec<String> = y.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{},{},{},{},{}",
            args.problem,
            s,
            args.tau,
            args.t_end,
            steps,
            acct.flow_a,
            acct.flow_b,
            acct.rhs,
            vals.join(",")
        )?;
    }
    finish(out, args.output.as_deref())?;
    Ok(0)
}

pub fn cmd_effort_table(args: &EffortArgs) -> Result<i32> {
    let schemes = SchemeArgs {
        schemes: args.schemes.clone(),
        iterations: args.iterations,
    }
    .parse()?;
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "scheme,flow_a,flow_b,flows_per_step,rhs_evals")?;
    for row in effort_table(&schemes)? {
        writeln!(out, "{},{},{},{},{}", row.scheme, row.flow_a, row.flow_b, row.flows(), row.rhs_evals)?;
    }
    finish(out, args.output.as_deref())?;
    Ok(0)
}
