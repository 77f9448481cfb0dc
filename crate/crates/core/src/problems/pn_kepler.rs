//! First post-Newtonian two-body problem in SI units.
//!
//! State layout: `(r1, v1, r2, v2)`, each a 3-vector. `A` holds the
//! velocity-independent accelerations (Newtonian plus the `μ/r³` 1/c²
//! terms) and has zero position components, so its flow is a velocity kick.
//! The frozen coefficient is `M(y*) ⊗ I₃` with
//!
//! ```text
//! M = [[0,  1,   0,   0 ],
//!      [K1, L1, -K1, -L1],
//!      [0,  0,   0,   1 ],
//!      [K2, L2, -K2, -L2]]
//! ```
//!
//! so its matrix functions are computed on the 4x4 matrix and applied blockwise.

use super::{FrozenLinear, SplitProblem};
use crate::error::{Result, SplitError};
use crate::matfun::{exp_and_phi1, Matrix};
use crate::state::State;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Debug, PartialEq)]
pub struct PnKeplerConfig {
    pub mu1: f64,
    pub mu2: f64,
    pub c: f64,
    pub r1: [f64; 3],
    pub v1: [f64; 3],
    pub r2: [f64; 3],
    pub v2: [f64; 3],
}

impl Default for PnKeplerConfig {
    fn default() -> Self {
        Self {
            mu1: 1e26,
            mu2: 1e20,
            c: SPEED_OF_LIGHT,
            r1: [0.0; 3],
            v1: [0.0; 3],
            r2: [4.6e10, 0.0, 0.0],
            v2: [0.0, 5.898e7, 0.0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct PnKepler {
    cfg: PnKeplerConfig,
    initial_separation: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Relative geometry of the two bodies.
struct Separation {
    r: f64,
    n: [f64; 3],
}

impl PnKepler {
    pub fn new(cfg: PnKeplerConfig) -> Self {
        let d: Vec<f64> = (0..3).map(|k| cfg.r1[k] - cfg.r2[k]).collect();
        let initial_separation = dot(&d, &d).sqrt();
        Self {
            cfg,
            initial_separation,
        }
    }

    pub fn config(&self) -> &PnKeplerConfig {
        &self.cfg
    }

    fn separation(&self, y: &[f64]) -> Result<Separation> {
        let d = [y[0] - y[6], y[1] - y[7], y[2] - y[8]];
        let r = dot(&d, &d).sqrt();
        if !(r >= 1e-6 * self.initial_separation) {
            return Err(SplitError::Singularity(format!(
                "bodies collided (separation {r:e} m)"
            )));
        }
        Ok(Separation {
            r,
            n: d.map(|v| v / r),
        })
    }

    /// Velocity-independent accelerations of body 1 and body 2.
    fn position_accelerations(&self, y: &[f64]) -> Result<([f64; 3], [f64; 3])> {
        let PnKeplerConfig { mu1, mu2, c, .. } = self.cfg;
        let Separation { r, n } = self.separation(y)?;
        let c2 = c * c;
        let r2 = r * r;
        let r3 = r2 * r;
        let s1 = -mu2 / r2 + (5.0 * mu1 * mu2 / r3 + 4.0 * mu2 * mu2 / r3) / c2;
        let s2 = mu1 / r2 - (5.0 * mu1 * mu2 / r3 + 4.0 * mu1 * mu1 / r3) / c2;
        Ok((n.map(|v| s1 * v), n.map(|v| s2 * v)))
    }

    /// The 4x4 coefficient matrix `M(y*)`.
    pub fn coefficient_matrix(&self, y_star: &[f64]) -> Result<Matrix> {
        let PnKeplerConfig { mu1, mu2, c, .. } = self.cfg;
        let Separation { r, n } = self.separation(y_star)?;
        let (v1, v2) = (&y_star[3..6], &y_star[9..12]);
        let c2 = c * c;
        let (nv1, nv2) = (dot(&n, v1), dot(&n, v2));
        let (v1v1, v2v2, v1v2) = (dot(v1, v1), dot(v2, v2), dot(v1, v2));

        let k1 = mu2 / (c2 * r * r * r) * (1.5 * nv2 * nv2 - v1v1 + 4.0 * v1v2 - 2.0 * v2v2);
        let l1 = mu2 / (c2 * r * r) * (4.0 * nv1 - 3.0 * nv2);
        // Body 2 by exchanging indices (n21 = -n12); the row acts on r1 - r2 = -(r2 - r1).
        let k2 = -mu1 / (c2 * r * r * r) * (1.5 * nv1 * nv1 - v2v2 + 4.0 * v1v2 - 2.0 * v1v1);
        let l2 = -mu1 / (c2 * r * r) * (-4.0 * nv2 + 3.0 * nv1);

        Matrix::from_rows(&[
            [0.0, 1.0, 0.0, 0.0],
            [k1, l1, -k1, -l1],
            [0.0, 0.0, 0.0, 1.0],
            [k2, l2, -k2, -l2],
        ])
    }

    /// Separation of the bodies at the initial condition (the perihelion distance).
    pub fn perihelion(&self) -> f64 {
        self.initial_separation
    }
}

impl SplitProblem for PnKepler {
    fn name(&self) -> &str {
        "pn-kepler"
    }

    fn dim(&self) -> usize {
        12
    }

    fn initial_state(&self) -> State {
        let c = &self.cfg;
        State::new([c.r1, c.v1, c.r2, c.v2].concat())
    }

    fn a_field(&self, y: &[f64]) -> Result<State> {
        let (a1, a2) = self.position_accelerations(y)?;
        let mut out = State::zeros(12);
        out[3..6].copy_from_slice(&a1);
        out[9..12].copy_from_slice(&a2);
        Ok(out)
    }

    fn flow_a(&self, t: f64, y: &[f64]) -> Result<State> {
        let mut out = self.flow_a_increment(t, y)?;
        out.axpy(1.0, y);
        Ok(out)
    }

    fn flow_a_increment(&self, t: f64, y: &[f64]) -> Result<State> {
        let (a1, a2) = self.position_accelerations(y)?;
        let mut out = State::zeros(12);
        for k in 0..3 {
            out[3 + k] = t * a1[k];
            out[9 + k] = t * a2[k];
        }
        Ok(out)
    }

    fn frozen(&self, y_star: &[f64]) -> Result<FrozenLinear> {
        let m = self.coefficient_matrix(y_star)?;
        let mut b = Matrix::zeros(12, 12);
        for i in 0..4 {
            for j in 0..4 {
                b.set_block(3 * i, 3 * j, &Matrix::identity(3).scaled(m[(i, j)]));
            }
        }
        Ok(FrozenLinear::homogeneous(b))
    }

    fn flow_frozen_increment(&self, y_star: &[f64], t: f64, y0: &[f64]) -> Result<State> {
        // t φ₁(tM)(M y0), blockwise. M annihilates common translations, so
        // the large absolute positions never meet the rounding error of the
        // matrix function.
        let m = self.coefficient_matrix(y_star)?;
        let (_, phi) = exp_and_phi1(&m.scaled(t))?;
        let mut slope = [0.0; 12];
        for i in 0..4 {
            for j in 0..4 {
                let w = m[(i, j)];
                if w != 0.0 {
                    for k in 0..3 {
                        slope[3 * i + k] += w * y0[3 * j + k];
                    }
                }
            }
        }
        let mut out = State::zeros(12);
        for i in 0..4 {
            for j in 0..4 {
                let w = t * phi[(i, j)];
                for k in 0..3 {
                    out[3 * i + k] += w * slope[3 * j + k];
                }
            }
        }
        Ok(out)
    }

    fn error_scale(&self) -> f64 {
        self.perihelion()
    }
}
