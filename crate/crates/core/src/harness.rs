//! Order, effort and conservation studies.
//!
//! A sweep integrates every (scheme, τ) cell of a [`SweepPlan`], measures the
//! endpoint error against a reference solution and fits log–log slopes. Two
//! references are computed: the fine classic-Strang solution and a fine RK4
//! solution. Errors are measured against RK4, whose own uncertainty is
//! estimated by step doubling; the Strang solution serves as the
//! cross-check reported in [`ReferenceCheck`].

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Result, SplitError};
use crate::problems::{by_name, SplitProblem};
use crate::scheme::SchemeSpec;
use crate::state::State;
use crate::stepper::{integrate, integrate_observed, step_plan, StepperState};

/// Header of every CSV emitted by [`write_csv`].
pub const CSV_HEADER: &str =
    "problem,scheme,tau,steps,error_inf,error_scaled,flow_a,flow_b,rhs_evals,wall_seconds";

/// Fewest surviving points for which a slope is reported.
pub const MIN_FIT_POINTS: usize = 3;

/// Points closer than this factor to the reference uncertainty are not fitted.
pub const REFERENCE_MARGIN: f64 = 10.0;

/// Points below this many units of roundoff (relative to the reference) are not fitted.
pub const ROUNDOFF_MARGIN: f64 = 100.0;

/// Default tolerance on fitted slopes.
pub const SLOPE_TOLERANCE: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub problem: String,
    pub schemes: Vec<SchemeSpec>,
    /// Strictly decreasing step sizes.
    pub taus: Vec<f64>,
    pub t_end: f64,
    /// Divisor for errors; the problem's own scale when `None`.
    pub error_scale: Option<f64>,
    /// Step of the fine classic-Strang reference; `min τ / 20` when `None`.
    pub ref_tau: Option<f64>,
    /// Step of the fine RK4 reference that errors are measured against;
    /// `min τ / 50` when `None`.
    pub rk4_ref_tau: Option<f64>,
    /// Whether to compute the fine-Strang reference and the dual-reference check.
    pub check_references: bool,
    /// Repetitions per cell; the median wall time is reported.
    pub repeat: usize,
}

impl SweepPlan {
    /// The standard study for one of the registered problems.
    pub fn standard(problem: &str, schemes: Vec<SchemeSpec>) -> Result<Self> {
        let halvings = |start: f64| (0..5).map(|k| start / f64::from(1u32 << k)).collect::<Vec<_>>();
        let (taus, t_end, rk4_ref_tau) = match problem {
            "charged-particle" => (halvings(0.02), 100.0, Some(2.5e-5)),
            // T / τ is an integer for every step, including the reference.
            "may" => (halvings(5.0 / 26.0), 5.0, Some(5.0 / 41_600.0)),
            "pn-kepler" => (halvings(100.0), 1e6, Some(0.5)),
            "synthetic-affine" | "synthetic-stiff" => (halvings(0.2), 1.0, None),
            other => {
                by_name(other)?;
                return Err(SplitError::Argument(format!("no standard sweep for `{other}`")));
            }
        };
        Ok(Self {
            problem: problem.to_string(),
            schemes,
            taus,
            t_end,
            error_scale: None,
            ref_tau: None,
            rk4_ref_tau,
            check_references: true,
            repeat: 3,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(SplitError::Configuration("no schemes in sweep".into()));
        }
        for s in &self.schemes {
            s.validate()?;
        }
        if self.taus.is_empty() {
            return Err(SplitError::Configuration("no step sizes in sweep".into()));
        }
        for t in &self.taus {
            step_plan(*t, self.t_end)?;
        }
        if self.taus.windows(2).any(|w| w[1] >= w[0]) {
            return Err(SplitError::Configuration(
                "step sizes must be strictly decreasing".into(),
            ));
        }
        if self.repeat == 0 {
            return Err(SplitError::Configuration("repeat must be at least 1".into()));
        }
        if let Some(s) = self.error_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(SplitError::Configuration(format!("error scale must be positive, got {s}")));
            }
        }
        if let Some(r) = self.ref_tau {
            if r > self.min_tau() / 20.0 * (1.0 + 1e-12) {
                return Err(SplitError::Configuration(format!(
                    "reference step {r} exceeds min τ / 20 = {}",
                    self.min_tau() / 20.0
                )));
            }
        }
        Ok(())
    }

    pub fn min_tau(&self) -> f64 {
        self.taus.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn strang_ref_tau(&self) -> f64 {
        self.ref_tau.unwrap_or(self.min_tau() / 20.0)
    }

    pub fn rk4_ref_tau(&self) -> f64 {
        self.rk4_ref_tau.unwrap_or(self.min_tau() / 50.0)
    }
}

/// One (scheme, τ) cell of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub scheme: SchemeSpec,
    pub tau: f64,
    pub steps: usize,
    /// `‖y - y_ref‖∞`; infinite for a divergent run.
    pub error_inf: f64,
    /// `error_inf` divided by the error scale.
    pub error_scaled: f64,
    pub flow_a: u64,
    pub flow_b: u64,
    pub rhs_evals: u64,
    pub wall_seconds: f64,
    /// Cause of divergence, if the run diverged.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn flows(&self) -> u64 {
        self.flow_a + self.flow_b
    }
}

/// Least-squares fit of `log error = slope · log τ + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub scheme: SchemeSpec,
    /// `NaN` when fewer than [`MIN_FIT_POINTS`] points survive.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
    /// Step sizes that entered the fit.
    pub fitted_taus: Vec<f64>,
    pub nominal_order: u32,
}

impl SlopeFit {
    pub fn points(&self) -> usize {
        self.fitted_taus.len()
    }

    /// `|slope - expected| ≤ tol`.
    pub fn matches(&self, expected: f64, tol: f64) -> bool {
        (self.slope - expected).abs() <= tol
    }

    /// At least the worst-case order, up to [`SLOPE_TOLERANCE`].
    pub fn meets_nominal(&self) -> bool {
        self.slope >= f64::from(self.nominal_order) - SLOPE_TOLERANCE
    }
}

/// Agreement between the fine-Strang and fine-RK4 references, in scaled units.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceCheck {
    pub strang_tau: f64,
    pub rk4_tau: f64,
    /// `‖y_Strang - y_RK4‖∞ / scale`.
    pub disagreement: f64,
    /// Step-doubling estimate of the RK4 reference error, scaled.
    pub rk4_uncertainty: f64,
    /// Smallest finite scaled error in the sweep.
    pub smallest_sweep_error: f64,
}

impl ReferenceCheck {
    pub fn passed(&self) -> bool {
        REFERENCE_MARGIN * self.disagreement <= self.smallest_sweep_error
    }

    /// Turns a failed check into a configuration error.
    pub fn require(&self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(SplitError::Configuration(format!(
                "Strang (τ = {}) and RK4 (τ = {}) references differ by {:.3e}, \
                 not {REFERENCE_MARGIN}x below the smallest sweep error {:.3e}",
                self.strang_tau, self.rk4_tau, self.disagreement, self.smallest_sweep_error
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub fits: Vec<SlopeFit>,
    /// Scaled errors below this are excluded from fits.
    pub fit_floor: f64,
    pub rk4_uncertainty: f64,
    /// Absent when the plan skips the dual-reference check.
    pub reference_check: Option<ReferenceCheck>,
}

impl ConvergenceReport {
    pub fn fit(&self, scheme: &SchemeSpec) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| &f.scheme == scheme)
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub records: Vec<RunRecord>,
    pub report: ConvergenceReport,
}

/// Fine classic-Strang endpoint at step `ref_tau`.
pub fn reference_solution(problem: &dyn SplitProblem, t_end: f64, ref_tau: f64) -> Result<State> {
    let y0 = problem.initial_state();
    integrate(problem, &SchemeSpec::ClassicStrang, ref_tau, t_end, &y0, &mut StepperState::new())
}

/// Fine RK4 endpoint at step `tau`, with a step-doubling estimate of its
/// error (unscaled ∞-norm).
pub fn rk4_reference(problem: &dyn SplitProblem, t_end: f64, tau: f64) -> Result<(State, f64)> {
    let y0 = problem.initial_state();
    let fine = integrate(problem, &SchemeSpec::Rk4, tau, t_end, &y0, &mut StepperState::new())?;
    let coarse = integrate(problem, &SchemeSpec::Rk4, 2.0 * tau, t_end, &y0, &mut StepperState::new())?;
    Ok((fine.clone(), fine.distance_inf(&coarse) / 15.0))
}

pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    let problem = by_name(&plan.problem)?;
    run_sweep_on(&*problem, plan)
}

/// [`run_sweep`] for a problem instance that is not in the registry, or not
/// in its default configuration. `plan.problem` only labels the records.
pub fn run_sweep_on(problem: &dyn SplitProblem, plan: &SweepPlan) -> Result<SweepResult> {
    plan.validate()?;
    let scale = plan.error_scale.unwrap_or_else(|| problem.error_scale());
    let (y_ref, rk4_err) = rk4_reference(problem, plan.t_end, plan.rk4_ref_tau())?;
    let y0 = problem.initial_state();

    let cells: Vec<(usize, usize)> = (0..plan.schemes.len())
        .flat_map(|s| (0..plan.taus.len()).map(move |t| (s, t)))
        .collect();
    let mut records = cells
        .par_iter()
        .map(|&(s, t)| {
            run_cell(problem, &plan.problem, &plan.schemes[s], plan.taus[t], plan.t_end, &y0, &y_ref, scale, plan.repeat)
        })
        .collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);

    let smallest_sweep_error = records
        .iter()
        .map(|r| r.error_scaled)
        .filter(|e| e.is_finite())
        .fold(f64::INFINITY, f64::min);
    let reference_check = if plan.check_references {
        let strang = reference_solution(problem, plan.t_end, plan.strang_ref_tau())?;
        Some(ReferenceCheck {
            strang_tau: plan.strang_ref_tau(),
            rk4_tau: plan.rk4_ref_tau(),
            disagreement: strang.distance_inf(&y_ref) / scale,
            rk4_uncertainty: rk4_err / scale,
            smallest_sweep_error,
        })
    } else {
        None
    };

    let fit_floor = (ROUNDOFF_MARGIN * f64::EPSILON * y_ref.norm_inf() / scale)
        .max(REFERENCE_MARGIN * rk4_err / scale);
    let fits = plan
        .schemes
        .iter()
        .map(|scheme| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| &r.scheme == scheme).collect();
            let taus: Vec<f64> = mine.iter().map(|r| r.tau).collect();
            let errs: Vec<f64> = mine.iter().map(|r| r.error_scaled).collect();
            let (slope, intercept, residual, fitted_taus) = fit_slope(&taus, &errs, fit_floor);
            SlopeFit {
                scheme: scheme.clone(),
                slope,
                intercept,
                residual,
                fitted_taus,
                nominal_order: scheme.nominal_order(),
            }
        })
        .collect();

    Ok(SweepResult {
        records,
        report: ConvergenceReport {
            problem: plan.problem.clone(),
            fits,
            fit_floor,
            rk4_uncertainty: rk4_err / scale,
            reference_check,
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    problem: &dyn SplitProblem,
    label: &str,
    scheme: &SchemeSpec,
    tau: f64,
    t_end: f64,
    y0: &[f64],
    y_ref: &[f64],
    scale: f64,
    repeat: usize,
) -> Result<RunRecord> {
    let (full, last) = step_plan(tau, t_end)?;
    let mut times = Vec::with_capacity(repeat);
    let mut outcome = None;
    for _ in 0..repeat {
        let mut acct = StepperState::new();
        let start = Instant::now();
        let res = integrate(problem, scheme, tau, t_end, y0, &mut acct);
        times.push(start.elapsed().as_secs_f64());
        outcome = Some((res, acct));
    }
    let (res, acct) = outcome.expect("repeat >= 1");
    let (error_inf, failure) = match res {
        Ok(y) => (y.distance_inf(y_ref), None),
        Err(e @ SplitError::Divergence { .. }) => (f64::INFINITY, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(RunRecord {
        problem: label.to_string(),
        scheme: scheme.clone(),
        tau,
        steps: full + usize::from(last.is_some()),
        error_inf,
        error_scaled: error_inf / scale,
        flow_a: acct.flow_a,
        flow_b: acct.flow_b,
        rhs_evals: acct.rhs,
        wall_seconds: median(&mut times),
        failure,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sorts by scheme descriptor, then by τ descending.
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.scheme
            .to_string()
            .cmp(&b.scheme.to_string())
            .then(b.tau.total_cmp(&a.tau))
    });
}

/// Ordinary least squares on `(ln τ, ln error)`.
///
/// Points are visited from the largest τ down. Non-finite or non-positive
/// errors and errors below `floor` are skipped; the first error that fails
/// to decrease marks the roundoff floor, and it and every smaller step are
/// dropped. Returns `(slope, intercept, rms residual, fitted τ)`, with `NaN`
/// statistics when fewer than [`MIN_FIT_POINTS`] points remain.
pub fn fit_slope(taus: &[f64], errors: &[f64], floor: f64) -> (f64, f64, f64, Vec<f64>) {
    assert_eq!(taus.len(), errors.len());
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[b].total_cmp(&taus[a]));
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut last_err = f64::INFINITY;
    for i in order {
        let e = errors[i];
        if !(e.is_finite() && e > 0.0) {
            continue;
        }
        if e >= last_err {
            break;
        }
        last_err = e;
        if e < floor {
            continue;
        }
        pts.push((taus[i], e));
    }
    let fitted: Vec<f64> = pts.iter().map(|p| p.0).collect();
    if pts.len() < MIN_FIT_POINTS {
        return (f64::NAN, f64::NAN, f64::NAN, fitted);
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|(t, e)| (t.ln(), e.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt(), fitted)
}

/// Geometric mean of `error / τ^order`, the error constant at a fixed order.
pub fn error_constant(taus: &[f64], errors: &[f64], order: f64) -> f64 {
    assert_eq!(taus.len(), errors.len());
    let n = taus.len() as f64;
    let mean_log: f64 = taus
        .iter()
        .zip(errors)
        .map(|(t, e)| e.ln() - order * t.ln())
        .sum::<f64>()
        / n;
    mean_log.exp()
}

/// `(t, |H(y_t) - H(y0)|)` every `sample_every` steps, starting at `t = 0`
/// and always including the final step.
pub fn energy_trace(
    problem: &dyn SplitProblem,
    scheme: &SchemeSpec,
    tau: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Vec<(f64, f64)>> {
    if sample_every == 0 {
        return Err(SplitError::Argument("sample interval must be at least 1".into()));
    }
    let y0 = problem.initial_state();
    let h0 = problem
        .energy(&y0)
        .ok_or_else(|| SplitError::UnsupportedDiagnostic(problem.name().to_string()))?;
    let (full, last) = step_plan(tau, t_end)?;
    let total = full + usize::from(last.is_some());
    let mut trace = vec![(0.0, 0.0)];
    integrate_observed(problem, scheme, tau, t_end, &y0, &mut StepperState::new(), |k, t, y| {
        if k % sample_every == 0 || k == total {
            let h = problem.energy(y).unwrap_or(f64::NAN);
            trace.push((t, (h - h0).abs()));
        }
    })?;
    Ok(trace)
}

/// Largest deviation in an energy trace.
pub fn max_energy_deviation(trace: &[(f64, f64)]) -> f64 {
    trace.iter().map(|p| p.1).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffortRow {
    pub scheme: SchemeSpec,
    pub flow_a: u64,
    pub flow_b: u64,
    pub rhs_evals: u64,
}

impl EffortRow {
    pub fn flows(&self) -> u64 {
        self.flow_a + self.flow_b
    }
}

/// Work per step, counted by taking one step of each scheme.
pub fn effort_table(schemes: &[SchemeSpec]) -> Result<Vec<EffortRow>> {
    let problem = by_name("synthetic-affine")?;
    let y0 = problem.initial_state();
    schemes
        .iter()
        .map(|s| {
            s.validate()?;
            let mut acct = StepperState::new();
            crate::stepper::step(&*problem, s, 0.01, &y0, &mut acct)?;
            Ok(EffortRow {
                scheme: s.clone(),
                flow_a: acct.flow_a,
                flow_b: acct.flow_b,
                rhs_evals: acct.rhs,
            })
        })
        .collect()
}

/// Writes `records` as CSV (header included) with floats at 17 significant digits.
pub fn write_csv<W: Write>(mut out: W, records: &[RunRecord]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let scheme = r.scheme.to_string();
        // Deep compositions print as `COMP(base,levels)`.
        let scheme = if scheme.contains(',') { format!("\"{scheme}\"") } else { scheme };
        writeln!(
            out,
            "{},{},{:.16e},{},{:.16e},{:.16e},{},{},{},{:.16e}",
            r.problem,
            scheme,
            r.tau,
            r.steps,
            r.error_inf,
            r.error_scaled,
            r.flow_a,
            r.flow_b,
            r.rhs_evals,
            r.wall_seconds
        )?;
    }
    Ok(())
}
