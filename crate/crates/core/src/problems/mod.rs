//! Test problems of the form `y' = A(y) + b(y)y + d`.

mod charged_particle;
mod may;
mod pn_kepler;
mod synthetic;

pub use charged_particle::{ChargedParticle, ChargedParticleConfig};
pub use may::{May, MayConfig};
pub use pn_kepler::{PnKepler, PnKeplerConfig};
pub use synthetic::{SyntheticAffine, SyntheticStiff};

use crate::error::{Result, SplitError};
use crate::matfun::{exp_and_phi1, Matrix};
use crate::state::State;

/// Coefficients of the linear field `y ↦ b(y*) y + d` obtained by freezing `y*`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenLinear {
    pub b: Matrix,
    pub d: State,
}

impl FrozenLinear {
    pub fn homogeneous(b: Matrix) -> Self {
        let n = b.nrows();
        Self {
            b,
            d: State::zeros(n),
        }
    }

    /// `b y + d`
    pub fn apply(&self, y: &[f64]) -> State {
        let mut out = State::new(self.b.mul_vec(y));
        out.axpy(1.0, &self.d);
        out
    }
}

/// A problem split as `y' = A(y) + b(y)y + d`.
///
/// Implementors provide the exact flow of `A` and the frozen coefficients.
/// The frozen flow has a generic implementation in terms of φ₁; problems
/// with a cheaper closed form override it.
///
/// The integrators accumulate flows as increments `φ_t(y) - y` in
/// compensated arithmetic, so problems whose increments can be formed
/// without cancellation should override the `*_increment` methods.
pub trait SplitProblem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn initial_state(&self) -> State;

    /// The vector field `A(y)`.
    fn a_field(&self, y: &[f64]) -> Result<State>;

    /// Exact flow of `y' = A(y)` over time `t` (either sign).
    fn flow_a(&self, t: f64, y: &[f64]) -> Result<State>;

    /// `φ_t^A(y) - y`.
    fn flow_a_increment(&self, t: f64, y: &[f64]) -> Result<State> {
        let mut out = self.flow_a(t, y)?;
        out.axpy(-1.0, y);
        Ok(out)
    }

    /// `b(y*)` and `d`.
    fn frozen(&self, y_star: &[f64]) -> Result<FrozenLinear>;

    /// Exact flow of `y' = b(y*)y + d` over time `t`:
    /// `e^{t b} y0 + t φ₁(t b) d`.
    fn flow_frozen(&self, y_star: &[f64], t: f64, y0: &[f64]) -> Result<State> {
        let mut out = self.flow_frozen_increment(y_star, t, y0)?;
        out.axpy(1.0, y0);
        Ok(out)
    }

    /// `φ_t^{b(y*)}(y0) - y0 = t φ₁(t b)(b y0 + d)`.
    fn flow_frozen_increment(&self, y_star: &[f64], t: f64, y0: &[f64]) -> Result<State> {
        linear_increment(&self.frozen(y_star)?, t, y0)
    }

    /// Conserved energy, when the problem has one.
    fn energy(&self, _y: &[f64]) -> Option<f64> {
        None
    }

    /// Divisor applied to ∞-norm errors (1 unless the problem has a natural length scale).
    fn error_scale(&self) -> f64 {
        1.0
    }

    /// The recombined right-hand side `A(y) + b(y)y + d`.
    fn rhs(&self, y: &[f64]) -> Result<State> {
        let mut out = self.a_field(y)?;
        out.axpy(1.0, &self.frozen(y)?.apply(y));
        Ok(out)
    }
}

/// `e^{t b} y0 + t φ₁(t b) d` for arbitrary (small, dense) `b`.
pub fn linear_flow(frozen: &FrozenLinear, t: f64, y0: &[f64]) -> Result<State> {
    let mut out = linear_increment(frozen, t, y0)?;
    out.axpy(1.0, y0);
    Ok(out)
}

/// `t φ₁(t b)(b y0 + d)`, the increment of [`linear_flow`], formed without
/// subtracting two O(1) terms.
pub fn linear_increment(frozen: &FrozenLinear, t: f64, y0: &[f64]) -> Result<State> {
    if y0.len() != frozen.b.nrows() {
        return Err(SplitError::Dimension(format!(
            "state of length {} for a {}x{} coefficient",
            y0.len(),
            frozen.b.nrows(),
            frozen.b.ncols()
        )));
    }
    let (_, phi) = exp_and_phi1(&frozen.b.scaled(t))?;
    let mut out = State::new(phi.mul_vec(&frozen.apply(y0)));
    out.iter_mut().for_each(|v| *v *= t);
    Ok(out)
}

/// Names accepted by [`by_name`].
pub const PROBLEM_NAMES: [&str; 5] = [
    "charged-particle",
    "pn-kepler",
    "may",
    "synthetic-affine",
    "synthetic-stiff",
];

/// Stiffness used when `synthetic-stiff` is requested by name.
pub const DEFAULT_STIFFNESS: f64 = 1000.0;

/// Looks up a problem with its default configuration.
pub fn by_name(name: &str) -> Result<Box<dyn SplitProblem>> {
    Ok(match name {
        "charged-particle" => Box::new(ChargedParticle::new(ChargedParticleConfig::default())),
        "pn-kepler" => Box::new(PnKepler::new(PnKeplerConfig::default())),
        "may" => Box::new(May::new(MayConfig::default())),
        "synthetic-affine" => Box::new(SyntheticAffine::new()),
        "synthetic-stiff" => Box::new(SyntheticStiff::new(DEFAULT_STIFFNESS)?),
        other => {
            return Err(SplitError::Argument(format!(
                "unknown problem `{other}`; expected one of {}",
                PROBLEM_NAMES.join(", ")
            )))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_knows_every_name() {
        for name in PROBLEM_NAMES {
            let p = by_name(name).unwrap();
            assert_eq!(p.name(), name);
            assert_eq!(p.initial_state().len(), p.dim());
        }
        assert!(matches!(by_name("brusselator"), Err(SplitError::Argument(_))));
    }

    #[test]
    fn scalar_linear_flow_is_variation_of_constants() {
        let (lambda, c, y0, t) = (-0.7, 0.4, 1.3, 0.9);
        let frozen = FrozenLinear {
            b: Matrix::diag(&[lambda]),
            d: State::from([c]),
        };
        let got = linear_flow(&frozen, t, &[y0]).unwrap();
        let e = (lambda * t).exp();
        let want = e * y0 + c * (e - 1.0) / lambda;
        assert!((got[0] - want).abs() < 1e-15);
    }

    #[test]
    fn zero_coefficients_leave_state_unchanged() {
        let frozen = FrozenLinear::homogeneous(Matrix::zeros(3, 3));
        let y = [1.0, -2.0, 3.0];
        assert_eq!(&*linear_flow(&frozen, 0.5, &y).unwrap(), &y);
    }

    #[test]
    fn linear_flow_rejects_wrong_length() {
        let frozen = FrozenLinear::homogeneous(Matrix::identity(2));
        assert!(matches!(
            linear_flow(&frozen, 1.0, &[1.0]),
            Err(SplitError::Dimension(_))
        ));
    }
}
