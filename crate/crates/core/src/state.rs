use std::ops::{Deref, DerefMut};

/// The integrated unknown: a dense real vector of problem dimension.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct State(Vec<f64>);

impl State {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// ∞-norm of `self - other`.
    pub fn distance_inf(&self, other: &[f64]) -> f64 {
        assert_eq!(self.len(), other.len(), "state dimension mismatch");
        self.0
            .iter()
            .zip(other)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// `self + alpha * other`, in place.
    pub fn axpy(&mut self, alpha: f64, other: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += alpha * b;
        }
    }
}

impl Deref for State {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for State {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for State {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[f64; N]> for State {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

impl From<&[f64]> for State {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}
