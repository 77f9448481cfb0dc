//! Classical fourth-order Runge–Kutta on the recombined right-hand side.

use crate::error::{Result, SplitError};
use crate::problems::SplitProblem;
use crate::state::State;
use crate::stepper::StepperState;

/// An ODE `y' = f(t, y)` given only through its right-hand side.
pub trait RhsProblem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64]) -> Result<State>;
}

/// Views a split problem as `y' = A(y) + b(y)y + d`.
pub struct Recombined<'a>(pub &'a dyn SplitProblem);

impl RhsProblem for Recombined<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rhs(&self, _t: f64, y: &[f64]) -> Result<State> {
        self.0.rhs(y)
    }
}

/// One step of the classical RK4 tableau from `t = 0`; counts four right-hand-side evaluations.
pub fn rk4_step(
    p: &dyn RhsProblem,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    rk4_step_at(p, 0.0, tau, y0, acct)
}

pub fn rk4_step_at(
    p: &dyn RhsProblem,
    t: f64,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    let mut out = rk4_increment_at(p, t, tau, y0, acct)?;
    out.axpy(1.0, y0);
    if out.is_finite() {
        Ok(out)
    } else {
        Err(SplitError::NonFinite("RK4 step"))
    }
}

/// The RK4 update `y1 - y0`, without adding it to `y0`.
pub fn rk4_increment_at(
    p: &dyn RhsProblem,
    t: f64,
    tau: f64,
    y0: &[f64],
    acct: &mut StepperState,
) -> Result<State> {
    let stage = |k: &State, h: f64| {
        let mut out = State::from(y0);
        out.axpy(h, k);
        out
    };
    let k1 = p.rhs(t, y0)?;
    let k2 = p.rhs(t + 0.5 * tau, &stage(&k1, 0.5 * tau))?;
    let k3 = p.rhs(t + 0.5 * tau, &stage(&k2, 0.5 * tau))?;
    let k4 = p.rhs(t + tau, &stage(&k3, tau))?;
    acct.rhs += 4;
    let inc: Vec<f64> = (0..y0.len())
        .map(|i| tau / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    let inc = State::new(inc);
    if inc.is_finite() {
        Ok(inc)
    } else {
        Err(SplitError::NonFinite("RK4 step"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Growth;

    impl RhsProblem for Growth {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64]) -> Result<State> {
            Ok(State::from([y[0]]))
        }
    }

    struct Still;

    impl RhsProblem for Still {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, _y: &[f64]) -> Result<State> {
            Ok(State::zeros(2))
        }
    }

    struct Clock;

    impl RhsProblem for Clock {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, _y: &[f64]) -> Result<State> {
            Ok(State::from([3.0 * t * t]))
        }
    }

    #[test]
    fn zero_field_keeps_state() {
        let mut acct = StepperState::new();
        let y = rk4_step(&Still, 0.3, &[1.0, -2.0], &mut acct).unwrap();
        assert_eq!(&*y, &[1.0, -2.0]);
        assert_eq!(acct.rhs, 4);
    }

    #[test]
    fn exponential_growth_local_error() {
        let mut acct = StepperState::new();
        let y = rk4_step(&Growth, 0.1, &[1.0], &mut acct).unwrap();
        assert!((y[0] - 0.1f64.exp()).abs() <= 1e-7);
        // Taylor polynomial of degree four, exactly.
        let taylor = 1.0 + 0.1 + 0.01 / 2.0 + 0.001 / 6.0 + 0.0001 / 24.0;
        assert!((y[0] - taylor).abs() < 1e-15);
    }

    #[test]
    fn integrates_cubic_quadrature_exactly() {
        let mut acct = StepperState::new();
        let y = rk4_step_at(&Clock, 1.0, 0.5, &[0.0], &mut acct).unwrap();
        assert!((y[0] - (1.5f64.powi(3) - 1.0)).abs() < 1e-14);
    }
}
