//! Splitting integrators for `y' = A(y) + b(y)y + d` where the flow of `A`
//! is known exactly and the flow of `b(y)y + d` is only available once the
//! coefficient is frozen at some state `y*`.
//!
//! The crate provides the classic (non-symmetric) Strang scheme, the iterated
//! Strang scheme `S⁽ⁱ⁾` whose fixed-point iteration makes it symmetric up to
//! order `i`, triple-jump compositions of either, an RK4 baseline, five test
//! problems and a harness for order and efficiency studies.

pub mod baseline;
pub mod error;
pub mod harness;
pub mod matfun;
pub mod problems;
pub mod scheme;
pub mod state;
pub mod stepper;

pub use error::{Result, SplitError};
pub use matfun::{Matrix, SkewParams};
pub use problems::SplitProblem;
pub use scheme::SchemeSpec;
pub use state::State;
pub use stepper::{integrate, StepperState};
