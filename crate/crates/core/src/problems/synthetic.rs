//! Two small validation problems that exercise paths the application
//! problems leave untouched: a nonzero affine term `d`, and a stiff linear
//! part inside the frozen coefficient.

use super::{FrozenLinear, SplitProblem};
use crate::error::{Result, SplitError};
use crate::matfun::Matrix;
use crate::state::State;

/// `A(u, w) = (0, u²/2)`, `b(u*, w*) = [[-0.1, 1], [-(1 + sin(u*)/2), -0.1]]`, constant `d`.
///
/// A damped nonlinear oscillator with a constant forcing. The `A` flow is a
/// shear, so it is exact for either sign of `t`.
#[derive(Clone, Debug)]
pub struct SyntheticAffine {
    forcing: [f64; 2],
}

impl SyntheticAffine {
    pub const DEFAULT_FORCING: [f64; 2] = [0.3, -0.2];

    pub fn new() -> Self {
        Self::with_forcing(Self::DEFAULT_FORCING)
    }

    pub fn with_forcing(forcing: [f64; 2]) -> Self {
        Self { forcing }
    }

    pub fn coefficient(&self, y_star: &[f64]) -> Matrix {
        let k = 1.0 + 0.5 * y_star[0].sin();
        Matrix::from_row_major(2, 2, vec![-0.1, 1.0, -k, -0.1]).expect("2x2")
    }
}

impl Default for SyntheticAffine {
    fn default() -> Self {
        Self::new()
    }
}

impl SplitProblem for SyntheticAffine {
    fn name(&self) -> &str {
        "synthetic-affine"
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial_state(&self) -> State {
        State::from([1.0, 0.0])
    }

    fn a_field(&self, y: &[f64]) -> Result<State> {
        Ok(State::from([0.0, 0.5 * y[0] * y[0]]))
    }

    fn flow_a(&self, t: f64, y: &[f64]) -> Result<State> {
        Ok(State::from([y[0], y[1] + 0.5 * t * y[0] * y[0]]))
    }

    fn flow_a_increment(&self, t: f64, y: &[f64]) -> Result<State> {
        Ok(State::from([0.0, 0.5 * t * y[0] * y[0]]))
    }

    fn frozen(&self, y_star: &[f64]) -> Result<FrozenLinear> {
        Ok(FrozenLinear {
            b: self.coefficient(y_star),
            d: State::from(self.forcing),
        })
    }
}

/// `b(y*) = b_S + b_N(y*)` with `b_S = diag(-s, -1)` and a Lipschitz `b_N`.
///
/// ```text
/// A(u, w)    = (u cos w, 1)
/// b_N(u*, w*) = [[0, cos w*], [-sin(u*)/2, -1/5]]
/// ```
///
/// The stiff entry of `b_S` commutes with `A`, so the stiffness enters only
/// through the frozen flow, which is an exact (contractive) exponential. The
/// initial state starts with `u = 0`, close to the slow manifold
/// `u ≈ w cos(w)/s`. `‖b_S‖ = max(s, 1)`.
#[derive(Clone, Debug)]
pub struct SyntheticStiff {
    stiffness: f64,
}

impl SyntheticStiff {
    pub fn new(stiffness: f64) -> Result<Self> {
        if !(stiffness >= 0.0 && stiffness.is_finite()) {
            return Err(SplitError::Argument(format!(
                "stiffness must be finite and non-negative, got {stiffness}"
            )));
        }
        Ok(Self { stiffness })
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    pub fn stiff_part(&self) -> Matrix {
        Matrix::diag(&[-self.stiffness, -1.0])
    }

    pub fn nonstiff_part(&self, y_star: &[f64]) -> Matrix {
        Matrix::from_row_major(
            2,
            2,
            vec![0.0, y_star[1].cos(), -0.5 * y_star[0].sin(), -0.2],
        )
        .expect("2x2")
    }
}

impl SplitProblem for SyntheticStiff {
    fn name(&self) -> &str {
        "synthetic-stiff"
    }

    fn dim(&self) -> usize {
        2
    }

    fn initial_state(&self) -> State {
        State::from([0.0, 0.5])
    }

    fn a_field(&self, y: &[f64]) -> Result<State> {
        Ok(State::from([y[0] * y[1].cos(), 1.0]))
    }

    fn flow_a(&self, t: f64, y: &[f64]) -> Result<State> {
        let mut out = self.flow_a_increment(t, y)?;
        out.axpy(1.0, y);
        Ok(out)
    }

    fn flow_a_increment(&self, t: f64, y: &[f64]) -> Result<State> {
        let (u, w) = (y[0], y[1]);
        Ok(State::from([u * ((w + t).sin() - w.sin()).exp_m1(), t]))
    }

    fn frozen(&self, y_star: &[f64]) -> Result<FrozenLinear> {
        Ok(FrozenLinear::homogeneous(
            &self.stiff_part() + &self.nonstiff_part(y_star),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::linear_flow;

    /// Independent 2x2 closed form: `e^{tB} = e^{tm}(C I + S (B - mI))` with
    /// `m = tr/2`, `δ² = m² - det`, and the forced part `B⁻¹(e^{tB} - I) d`.
    fn closed_form(b: &Matrix, d: [f64; 2], t: f64, y0: [f64; 2]) -> [f64; 2] {
        let (p, q, r, s) = (b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]);
        let m = 0.5 * (p + s);
        let det = p * s - q * r;
        let disc = m * m - det;
        let (c, sh) = if disc >= 0.0 {
            let delta = disc.sqrt();
            ((t * delta).cosh(), (t * delta).sinh() / delta)
        } else {
            let delta = (-disc).sqrt();
            ((t * delta).cos(), (t * delta).sin() / delta)
        };
        let g = (t * m).exp();
        let e = [
            [g * (c + sh * (p - m)), g * sh * q],
            [g * sh * r, g * (c + sh * (s - m))],
        ];
        let ey = [
            e[0][0] * y0[0] + e[0][1] * y0[1],
            e[1][0] * y0[0] + e[1][1] * y0[1],
        ];
        let rhs = [
            (e[0][0] - 1.0) * d[0] + e[0][1] * d[1],
            e[1][0] * d[0] + (e[1][1] - 1.0) * d[1],
        ];
        let forced = [
            (s * rhs[0] - q * rhs[1]) / det,
            (-r * rhs[0] + p * rhs[1]) / det,
        ];
        [ey[0] + forced[0], ey[1] + forced[1]]
    }

    #[test]
    fn affine_frozen_flow_matches_closed_form() {
        let prob = SyntheticAffine::new();
        for (ys, t) in [([1.0, 0.0], 0.1), ([-0.4, 2.0], 0.7), ([2.5, -1.0], -0.3)] {
            let y0 = [0.8, -0.6];
            let frozen = prob.frozen(&ys).unwrap();
            let got = prob.flow_frozen(&ys, t, &y0).unwrap();
            let want = closed_form(&frozen.b, SyntheticAffine::DEFAULT_FORCING, t, y0);
            assert!((got[0] - want[0]).abs() < 1e-12);
            assert!((got[1] - want[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn unforced_affine_flow_is_pure_exponential() {
        let prob = SyntheticAffine::with_forcing([0.0, 0.0]);
        let ys = [0.3, 0.1];
        let y0 = [1.0, 2.0];
        let got = prob.flow_frozen(&ys, 0.4, &y0).unwrap();
        let want = closed_form(&prob.coefficient(&ys), [0.0, 0.0], 0.4, y0);
        assert!((got[0] - want[0]).abs() < 1e-14 && (got[1] - want[1]).abs() < 1e-14);
    }

    #[test]
    fn zero_stiffness_leaves_only_unit_damping() {
        let p = SyntheticStiff::new(0.0).unwrap();
        let ys = [0.2, 0.7];
        let b = p.frozen(&ys).unwrap().b;
        assert_eq!(b, &Matrix::diag(&[0.0, -1.0]) + &p.nonstiff_part(&ys));
    }

    #[test]
    fn stiff_part_is_negative_definite() {
        for s in [1.0, 10.0, 1000.0] {
            let b = SyntheticStiff::new(s).unwrap().stiff_part();
            assert!(b[(0, 0)] < 0.0 && b[(1, 1)] < 0.0 && b[(0, 1)] == 0.0);
            assert_eq!(b.norm_inf(), s);
        }
    }

    #[test]
    fn stiff_frozen_flow_is_bounded() {
        let p = SyntheticStiff::new(1000.0).unwrap();
        let ys = [0.3, 1.2];
        let y0 = [1.0, 1.0];
        // τ·stiffness = 100
        let out = linear_flow(&p.frozen(&ys).unwrap(), 0.1, &y0).unwrap();
        assert!(out.is_finite());
        assert!(out[0].abs() < 1e-2, "stiff component decays: {}", out[0]);
        assert!(out.norm_inf() <= 2.0);
    }

    #[test]
    fn stiffness_is_validated() {
        assert!(SyntheticStiff::new(-1.0).is_err());
        assert!(SyntheticStiff::new(f64::NAN).is_err());
    }
}
