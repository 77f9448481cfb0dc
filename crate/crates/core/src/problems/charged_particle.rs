//! A charged particle in a Penning-trap electric field with an inhomogeneous
//! magnetic field. State layout: `(x1, x2, x3, p1, p2, p3)`.
//!
//! `A(x, p) = (0, F(x))` with `F = qE`, and `b(x*) = [[0, I/m], [0, Ω(x*)]]`
//! with `Ω p = p × B̃`. Both partial flows are exact: the first is a momentum
//! kick, the second a rotation of `p` plus the integrated drift of `x`.

use super::{FrozenLinear, SplitProblem};
use crate::error::Result;
use crate::matfun::{skew_exp_increment, skew_exp_integral, skew_generator, Matrix, SkewParams};
use crate::state::State;

#[derive(Clone, Debug, PartialEq)]
pub struct ChargedParticleConfig {
    pub mass: f64,
    pub charge: f64,
    pub x0: [f64; 3],
    pub p0: [f64; 3],
    /// Scales the electric field; `0` switches it off.
    pub electric_strength: f64,
    /// Scales the magnetic field; `0` switches it off.
    pub magnetic_strength: f64,
}

impl Default for ChargedParticleConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            charge: 1.0,
            x0: [0.1, 0.1, 0.1],
            p0: [0.05, 0.05, 0.05],
            electric_strength: 1.0,
            magnetic_strength: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChargedParticle {
    cfg: ChargedParticleConfig,
}

impl ChargedParticle {
    pub fn new(cfg: ChargedParticleConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &ChargedParticleConfig {
        &self.cfg
    }

    /// Electric potential `φ(x) = (2x3² - x1² - x2²) / 20`.
    pub fn potential(&self, x: &[f64]) -> f64 {
        self.cfg.electric_strength * (2.0 * x[2] * x[2] - x[0] * x[0] - x[1] * x[1]) / 20.0
    }

    /// `E = -∇φ`.
    pub fn electric_field(&self, x: &[f64]) -> [f64; 3] {
        let s = self.cfg.electric_strength;
        [s * x[0] / 10.0, s * x[1] / 10.0, -s * x[2] / 5.0]
    }

    pub fn magnetic_field(&self, x: &[f64]) -> [f64; 3] {
        let s = self.cfg.magnetic_strength;
        [
            s * x[2] / 10.0,
            s * x[1] / 10.0,
            s * (100.0 * x[2].sin() + x[1]),
        ]
    }

    /// `B̃ = qB/m`.
    pub fn b_tilde(&self, x: &[f64]) -> [f64; 3] {
        let k = self.cfg.charge / self.cfg.mass;
        self.magnetic_field(x).map(|b| k * b)
    }

    /// `F = qE`.
    pub fn force(&self, x: &[f64]) -> [f64; 3] {
        self.electric_field(x).map(|e| self.cfg.charge * e)
    }
}

impl SplitProblem for ChargedParticle {
    fn name(&self) -> &str {
        "charged-particle"
    }

    fn dim(&self) -> usize {
        6
    }

    fn initial_state(&self) -> State {
        let [x1, x2, x3] = self.cfg.x0;
        let [p1, p2, p3] = self.cfg.p0;
        State::new(vec![x1, x2, x3, p1, p2, p3])
    }

    fn a_field(&self, y: &[f64]) -> Result<State> {
        let f = self.force(&y[..3]);
        Ok(State::new(vec![0.0, 0.0, 0.0, f[0], f[1], f[2]]))
    }

    fn flow_a(&self, t: f64, y: &[f64]) -> Result<State> {
        let mut out = self.flow_a_increment(t, y)?;
        out.axpy(1.0, y);
        Ok(out)
    }

    fn flow_a_increment(&self, t: f64, y: &[f64]) -> Result<State> {
        let f = self.force(&y[..3]);
        Ok(State::new(vec![0.0, 0.0, 0.0, t * f[0], t * f[1], t * f[2]]))
    }

    fn frozen(&self, y_star: &[f64]) -> Result<FrozenLinear> {
        let mut b = Matrix::zeros(6, 6);
        b.set_block(0, 3, &Matrix::identity(3).scaled(1.0 / self.cfg.mass));
        b.set_block(3, 3, &skew_generator(self.b_tilde(&y_star[..3])));
        Ok(FrozenLinear::homogeneous(b))
    }

    fn flow_frozen_increment(&self, y_star: &[f64], t: f64, y0: &[f64]) -> Result<State> {
        let params = SkewParams::new(self.b_tilde(&y_star[..3]), t);
        let p0 = &y0[3..];
        let drift = skew_exp_integral(&params).mul_vec(p0);
        let kick = skew_exp_increment(&params).mul_vec(p0);
        let inv_m = 1.0 / self.cfg.mass;
        Ok(State::new(vec![
            inv_m * drift[0],
            inv_m * drift[1],
            inv_m * drift[2],
            kick[0],
            kick[1],
            kick[2],
        ]))
    }

    fn energy(&self, y: &[f64]) -> Option<f64> {
        let p2 = y[3] * y[3] + y[4] * y[4] + y[5] * y[5];
        Some(p2 / (2.0 * self.cfg.mass) + self.cfg.charge * self.potential(&y[..3]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::linear_flow;

    #[test]
    fn force_is_negative_potential_gradient() {
        let cp = ChargedParticle::new(Default::default());
        let x = [1.0, 0.0, 0.0];
        assert!((cp.force(&x)[0] - 0.1).abs() < 1e-15);
        // Central differences on φ.
        let pts = [[1.0, 0.0, 0.0], [0.3, -0.7, 0.45]];
        for x in pts {
            let f = cp.force(&x);
            for k in 0..3 {
                let h = 1e-6;
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let grad = (cp.potential(&xp) - cp.potential(&xm)) / (2.0 * h);
                assert!((f[k] + grad).abs() < 1e-9, "component {k}");
            }
        }
    }

    #[test]
    fn field_free_frozen_flow_is_free_drift() {
        let cp = ChargedParticle::new(ChargedParticleConfig {
            electric_strength: 0.0,
            magnetic_strength: 0.0,
            ..Default::default()
        });
        let y = [0.1, 0.2, 0.3, 1.0, -2.0, 0.5];
        let out = cp.flow_frozen(&y, 0.25, &y).unwrap();
        let want = [0.35, -0.3, 0.425, 1.0, -2.0, 0.5];
        for k in 0..6 {
            assert!((out[k] - want[k]).abs() < 1e-15);
        }
        let kicked = cp.flow_a(0.7, &y).unwrap();
        assert_eq!(&*kicked, &y);
    }

    #[test]
    fn closed_form_frozen_flow_matches_generic_exponential() {
        let cp = ChargedParticle::new(Default::default());
        let y_star = [0.4, -0.3, 0.2, 0.0, 0.0, 0.0];
        let y0 = [0.1, 0.2, -0.1, 0.3, -0.2, 0.6];
        let t = 0.013;
        let closed = cp.flow_frozen(&y_star, t, &y0).unwrap();
        let generic = linear_flow(&cp.frozen(&y_star).unwrap(), t, &y0).unwrap();
        assert!(closed.distance_inf(&generic) < 1e-14);
    }

    #[test]
    fn magnetic_rotation_preserves_momentum_norm() {
        let cp = ChargedParticle::new(Default::default());
        let y = [0.3, 0.9, -1.1, 0.7, -0.4, 0.2];
        let out = cp.flow_frozen(&y, 0.37, &y).unwrap();
        let n0: f64 = y[3..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let n1: f64 = out[3..].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n0 - n1).abs() < 1e-12);
    }

    #[test]
    fn one_small_step_nearly_conserves_energy() {
        let cp = ChargedParticle::new(Default::default());
        let y0 = cp.initial_state();
        let tau = 1e-4;
        let half = cp.flow_a(tau / 2.0, &y0).unwrap();
        let mid = cp.flow_frozen(&half, tau, &half).unwrap();
        let y1 = cp.flow_a(tau / 2.0, &mid).unwrap();
        let drift = (cp.energy(&y1).unwrap() - cp.energy(&y0).unwrap()).abs();
        assert!(drift <= 1e-8, "drift {drift}");
    }
}
