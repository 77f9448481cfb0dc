//! May predator-prey model.
//!
//! ```text
//! x' = a x (1 - x/b) - c x y / (x + d)
//! y' = e y - y² / (f x)
//! ```
//!
//! `A` is the decoupled logistic/exponential growth, whose flow is known in
//! closed form; the interaction terms freeze to a diagonal `b(x*, y*)`.

use super::{FrozenLinear, SplitProblem};
use crate::error::{Result, SplitError};
use crate::matfun::Matrix;
use crate::state::State;

/// Prey populations below this are treated as extinct and abort the run.
pub const MIN_PREY: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct MayConfig {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub x0: f64,
    pub y0: f64,
}

impl Default for MayConfig {
    fn default() -> Self {
        Self {
            a: 0.6,
            b: 10.0,
            c: 0.5,
            d: 1.0,
            e: 0.1,
            f: 2.0,
            x0: 100.0,
            y0: 20.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct May {
    cfg: MayConfig,
}

impl May {
    pub fn new(cfg: MayConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &MayConfig {
        &self.cfg
    }

    fn check_prey(&self, x: f64, what: &str) -> Result<()> {
        if !(x >= MIN_PREY) {
            return Err(SplitError::Domain(format!(
                "prey population {x:e} in {what} is not positive"
            )));
        }
        Ok(())
    }

    /// Diagonal of `b(x*, y*)`.
    fn rates(&self, y_star: &[f64]) -> Result<[f64; 2]> {
        let (xs, ys) = (y_star[0], y_star[1]);
        self.check_prey(xs, "frozen state")?;
        let MayConfig { c, d, f, .. } = self.cfg;
        Ok([-c * ys / (xs + d), -ys / (f * xs)])
    }
}

impl SplitProblem for May {
    fn name(&self) -> &str {
        "may"
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial_state(&self) -> State {
        State::from([self.cfg.x0, self.cfg.y0])
    }

    fn a_field(&self, y: &[f64]) -> Result<State> {
        let MayConfig { a, b, e, .. } = self.cfg;
        Ok(State::from([a * y[0] * (1.0 - y[0] / b), e * y[1]]))
    }

    fn flow_a(&self, t: f64, y: &[f64]) -> Result<State> {
        let mut out = self.flow_a_increment(t, y)?;
        out.axpy(1.0, y);
        Ok(out)
    }

    fn flow_a_increment(&self, t: f64, y: &[f64]) -> Result<State> {
        let MayConfig { a, b, e, .. } = self.cfg;
        let x0 = y[0];
        self.check_prey(x0, "logistic flow")?;
        // x(t) = b e^{at} / (e^{at} - 1 + b/x0), rearranged as an increment
        // over x0 that stays finite for large |t|.
        let decay_m1 = (-a * t).exp_m1();
        let dx = -x0 * (b - x0) * decay_m1 / (b + (b - x0) * decay_m1);
        let x = x0 + dx;
        if !(x > 0.0 && x.is_finite()) {
            return Err(SplitError::Domain(format!(
                "logistic flow from x = {x0} over t = {t} leaves the positive axis"
            )));
        }
        Ok(State::from([dx, (e * t).exp_m1() * y[1]]))
    }

    fn frozen(&self, y_star: &[f64]) -> Result<FrozenLinear> {
        Ok(FrozenLinear::homogeneous(Matrix::diag(&self.rates(y_star)?)))
    }

    fn flow_frozen_increment(&self, y_star: &[f64], t: f64, y0: &[f64]) -> Result<State> {
        let [rx, ry] = self.rates(y_star)?;
        Ok(State::from([(rx * t).exp_m1() * y0[0], (ry * t).exp_m1() * y0[1]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::linear_flow;

    #[test]
    fn carrying_capacity_is_fixed_point() {
        let m = May::new(Default::default());
        for t in [0.1, 1.0, 5.0, -0.5] {
            let out = m.flow_a(t, &[10.0, 1.0]).unwrap();
            assert!((out[0] - 10.0).abs() < 1e-14);
        }
    }

    #[test]
    fn predator_grows_exponentially() {
        let m = May::new(Default::default());
        let out = m.flow_a(5.0, &[100.0, 20.0]).unwrap();
        assert!((out[1] - 20.0 * 0.5f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn logistic_flow_derivative_at_zero() {
        let m = May::new(Default::default());
        let y = [37.0, 4.0];
        let h = 1e-6;
        let fwd = m.flow_a(h, &y).unwrap();
        let bwd = m.flow_a(-h, &y).unwrap();
        let field = m.a_field(&y).unwrap();
        for k in 0..2 {
            let fd = (fwd[k] - bwd[k]) / (2.0 * h);
            assert!((fd - field[k]).abs() < 1e-7 * field[k].abs().max(1.0));
        }
    }

    #[test]
    fn logistic_flow_approaches_capacity_monotonically() {
        let m = May::new(Default::default());
        for x0 in [0.01, 3.0, 10.5, 100.0, 1e4] {
            let mut prev = (x0 - 10.0f64).abs();
            for k in 1..40 {
                let x = m.flow_a(0.25 * k as f64, &[x0, 1.0]).unwrap()[0];
                let gap = (x - 10.0).abs();
                assert!(gap <= prev, "x0 = {x0}");
                prev = gap;
            }
        }
    }

    #[test]
    fn nonpositive_prey_is_a_domain_error() {
        let m = May::new(Default::default());
        assert!(matches!(m.frozen(&[0.0, 1.0]), Err(SplitError::Domain(_))));
        assert!(matches!(
            m.flow_frozen(&[-1.0, 1.0], 0.1, &[1.0, 1.0]),
            Err(SplitError::Domain(_))
        ));
        assert!(matches!(m.flow_a(0.1, &[1e-9, 1.0]), Err(SplitError::Domain(_))));
    }

    #[test]
    fn diagonal_flow_matches_generic() {
        let m = May::new(Default::default());
        let ys = [42.0, 7.0];
        let y0 = [40.0, 8.0];
        let a = m.flow_frozen(&ys, 0.05, &y0).unwrap();
        let b = linear_flow(&m.frozen(&ys).unwrap(), 0.05, &y0).unwrap();
        assert!(a.distance_inf(&b) < 1e-13);
    }
}
