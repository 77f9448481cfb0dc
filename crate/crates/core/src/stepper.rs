//! One-step maps and time integration.
//!
//! Every partial-flow application goes through [`flow_a`] or
//! [`flow_frozen_b`] (or their compensated twins), which bump the counters in
//! [`StepperState`]; the counts per step are therefore a property of the
//! scheme, not of the problem.
//!
//! Internally a state is carried as an unevaluated sum `hi + lo` and every
//! flow is applied as an increment added with an error-free two-sum. Flows
//! are evaluated at `hi`. Without this the rounding of `y + Δy` over 10⁵
//! steps or more is biased and dominates the error of high-order schemes.

use crate::baseline::{rk4_increment_at, Recombined};
use crate::error::{Result, SplitError};
use crate::problems::SplitProblem;
use crate::scheme::{composition_weights, SchemeSpec};
use crate::state::State;

/// Per-run work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepperState {
    pub flow_a: u64,
    pub flow_b: u64,
    pub rhs: u64,
}

impl StepperState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn flows(&self) -> u64 {
        self.flow_a + self.flow_b
    }
}

/// `hi + lo` with `|lo| ≤ ulp(hi)/2` componentwise.
#[derive(Clone, Debug)]
struct Compensated {
    hi: State,
    lo: Vec<f64>,
}

impl Compensated {
    fn exact(y: &[f64]) -> Self {
        Self {
            hi: State::from(y),
            lo: vec![0.0; y.len()],
        }
    }

    fn plus(&self, inc: &[f64]) -> Self {
        let mut hi = self.hi.clone();
        let mut lo = self.lo.clone();
        for i in 0..hi.len() {
            let (s, e) = two_sum(hi[i], inc[i]);
            let (h, l) = two_sum(s, lo[i] + e);
            hi[i] = h;
            lo[i] = l;
        }
        Self { hi, lo }
    }

    fn is_finite(&self) -> bool {
        self.hi.is_finite()
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn finite(y: State, stage: &'static str) -> Result<State> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(SplitError::NonFinite(stage))
    }
}

fn finite_comp(y: Compensated, stage: &'static str) -> Result<Compensated> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(SplitError::NonFinite(stage))
    }
}

/// `φ_t^A(y)`.
pub fn flow_a(
    problem: &dyn SplitProblem,
    t: f64,
    y: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    acct.flow_a += 1;
    finite(problem.flow_a(t, y)?, "A flow")
}

/// `φ_t^{b(y*)}(y0) = e^{t b(y*)} y0 + t φ₁(t b(y*)) d`.
pub fn flow_frozen_b(
    problem: &dyn SplitProblem,
    y_star: &[f64],
    t: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    acct.flow_b += 1;
    finite(problem.flow_frozen(y_star, t, y0)?, "frozen-coefficient flow")
}

fn flow_a_comp(
    problem: &dyn SplitProblem,
    t: f64,
    y: &Compensated,
    acct: &mut StepperState,
) -> Result<Compensated> {
    acct.flow_a += 1;
    let inc = problem.flow_a_increment(t, &y.hi)?;
    finite_comp(y.plus(&inc), "A flow")
}

fn flow_frozen_comp(
    problem: &dyn SplitProblem,
    y_star: &[f64],
    t: f64,
    y0: &Compensated,
    acct: &mut StepperState,
) -> Result<Compensated> {
    acct.flow_b += 1;
    let inc = problem.flow_frozen_increment(y_star, t, &y0.hi)?;
    finite_comp(y0.plus(&inc), "frozen-coefficient flow")
}

/// Lie half-step `y_{1/2} = φ_{τ/2}^{b(y0)} ∘ φ_{τ/2}^A (y0)`.
pub fn lie_half_step(
    problem: &dyn SplitProblem,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    Ok(lie_half_comp(problem, tau, &Compensated::exact(y0), acct)?.hi)
}

fn lie_half_comp(
    problem: &dyn SplitProblem,
    tau: f64,
    y0: &Compensated,
    acct: &mut StepperState,
) -> Result<Compensated> {
    let half = 0.5 * tau;
    let ya = flow_a_comp(problem, half, y0, acct)?;
    flow_frozen_comp(problem, &y0.hi, half, &ya, acct)
}

/// `S⁽ⁱ⁾_τ`: the Lie half-step followed by `i` iterations of
/// `y ↦ φ_{τ/2}^A ∘ φ_{τ/2}^{b(y)} (y_{1/2})`, started from `y_{1/2}`.
pub fn iterated_strang_step(
    problem: &dyn SplitProblem,
    iterations: u32,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    Ok(iterated_comp(problem, iterations, tau, &Compensated::exact(y0), acct)?.hi)
}

fn iterated_comp(
    problem: &dyn SplitProblem,
    iterations: u32,
    tau: f64,
    y0: &Compensated,
    acct: &mut StepperState,
) -> Result<Compensated> {
    if iterations == 0 {
        return Err(SplitError::Argument(
            "iterated Strang needs at least one iteration".into(),
        ));
    }
    let half = 0.5 * tau;
    let y_half = lie_half_comp(problem, tau, y0, acct)?;
    let mut y = y_half.clone();
    for k in 1..=iterations {
        let next = flow_frozen_comp(problem, &y.hi, half, &y_half, acct)
            .and_then(|yb| flow_a_comp(problem, half, &yb, acct));
        y = match next {
            Ok(v) => v,
            Err(SplitError::NonFinite(_)) => {
                return Err(SplitError::IterateDivergence { iterate: k })
            }
            Err(e) => return Err(e),
        };
    }
    Ok(y)
}

/// Strang splitting with the coefficient frozen at the Lie midpoint:
/// `y1 = φ_{τ/2}^A ∘ φ_τ^{b(y_{1/2})} ∘ φ_{τ/2}^A (y0)`, sharing the first `A` half-flow.
pub fn classic_strang_step(
    problem: &dyn SplitProblem,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    Ok(classic_comp(problem, tau, &Compensated::exact(y0), acct)?.hi)
}

fn classic_comp(
    problem: &dyn SplitProblem,
    tau: f64,
    y0: &Compensated,
    acct: &mut StepperState,
) -> Result<Compensated> {
    let half = 0.5 * tau;
    let ya = flow_a_comp(problem, half, y0, acct)?;
    let y_half = flow_frozen_comp(problem, &y0.hi, half, &ya, acct)?;
    let yb = flow_frozen_comp(problem, &y_half.hi, tau, &ya, acct)?;
    flow_a_comp(problem, half, &yb, acct)
}

/// `levels` nested triple jumps over `base`.
pub fn composed_step(
    problem: &dyn SplitProblem,
    base: &SchemeSpec,
    levels: u32,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    Ok(composed_comp(problem, base, levels, tau, &Compensated::exact(y0), acct)?.hi)
}

fn composed_comp(
    problem: &dyn SplitProblem,
    base: &SchemeSpec,
    levels: u32,
    tau: f64,
    y0: &Compensated,
    acct: &mut StepperState,
) -> Result<Compensated> {
    if levels == 0 {
        return step_comp(problem, base, tau, y0, acct);
    }
    let (g1, g2, g3) = composition_weights(SchemeSpec::layer_weight_order(base, levels))?;
    let y = composed_comp(problem, base, levels - 1, g1 * tau, y0, acct)?;
    let y = composed_comp(problem, base, levels - 1, g2 * tau, &y, acct)?;
    composed_comp(problem, base, levels - 1, g3 * tau, &y, acct)
}

/// One step of `scheme`.
pub fn step(
    problem: &dyn SplitProblem,
    scheme: &SchemeSpec,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    Ok(step_comp(problem, scheme, tau, &Compensated::exact(y0), acct)?.hi)
}

fn step_comp(
    problem: &dyn SplitProblem,
    scheme: &SchemeSpec,
    tau: f64,
    y0: &Compensated,
    acct: &mut StepperState,
) -> Result<Compensated> {
    match scheme {
        SchemeSpec::ClassicStrang => classic_comp(problem, tau, y0, acct),
        SchemeSpec::IteratedStrang(i) => iterated_comp(problem, *i, tau, y0, acct),
        SchemeSpec::Composition { base, levels } => {
            composed_comp(problem, base, *levels, tau, y0, acct)
        }
        SchemeSpec::Rk4 => {
            let inc = rk4_increment_at(&Recombined(problem), 0.0, tau, &y0.hi, acct)?;
            finite_comp(y0.plus(&inc), "RK4 step")
        }
    }
}

/// Step layout for covering `[0, t_end]` with step `tau`: the number of
/// full steps and, when `t_end/tau` is not integral, the length of one
/// shorter final step.
pub fn step_plan(tau: f64, t_end: f64) -> Result<(usize, Option<f64>)> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(SplitError::Argument(format!("step size must be positive, got {tau}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(SplitError::Argument(format!(
            "final time must be non-negative, got {t_end}"
        )));
    }
    let ratio = t_end / tau;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        return Ok((rounded as usize, None));
    }
    let full = ratio.floor() as usize;
    Ok((full, Some(t_end - full as f64 * tau)))
}

/// Integrates from `0` to `t_end`, calling `observe(step_index, t, y)` after every step.
pub fn integrate_observed<F>(
    problem: &dyn SplitProblem,
    scheme: &SchemeSpec,
    tau: f64,
    t_end: f64,
    y0: &[f64],
    acct: &mut StepperState,
    mut observe: F,
) -> Result<State>
where
    F: FnMut(usize, f64, &State),
{
    scheme.validate()?;
    let (full, last) = step_plan(tau, t_end)?;
    let mut y = Compensated::exact(y0);
    let steps = (0..full).map(|_| tau).chain(last);
    let mut t = 0.0;
    for (k, h) in steps.enumerate() {
        y = match step_comp(problem, scheme, h, &y, acct) {
            Ok(next) => next,
            Err(e @ (SplitError::NonFinite(_) | SplitError::IterateDivergence { .. })) => {
                return Err(SplitError::Divergence {
                    step: k + 1,
                    cause: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        };
        t = if k + 1 == full && last.is_none() {
            t_end
        } else {
            t + h
        };
        observe(k + 1, t, &y.hi);
    }
    Ok(y.hi)
}

/// Integrates from `0` to `t_end` with step `tau`.
pub fn integrate(
    problem: &dyn SplitProblem,
    scheme: &SchemeSpec,
    tau: f64,
    t_end: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    integrate_observed(problem, scheme, tau, t_end, y0, acct, |_, _, _| {})
}

/// `‖Φ_{-τ}(Φ_τ(y0)) - y0‖∞`; zero for a symmetric method.
pub fn symmetry_defect(
    problem: &dyn SplitProblem,
    scheme: &SchemeSpec,
    tau: f64,
    y0: &[f64],
) -> Result<f64> {
    let mut acct = StepperState::new();
    let forward = step_comp(problem, scheme, tau, &Compensated::exact(y0), &mut acct)?;
    let back = step_comp(problem, scheme, -tau, &forward, &mut acct)?;
    // Measure hi + lo - y0 without rounding hi + lo first.
    Ok((0..y0.len())
        .map(|i| ((back.hi[i] - y0[i]) + back.lo[i]).abs())
        .fold(0.0, f64::max))
}
