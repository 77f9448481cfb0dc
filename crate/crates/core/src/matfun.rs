//! Dense matrix-function kernels.
//!
//! The problems in this crate are small (dimension at most 12, and the
//! exponentials that are actually formed are at most 8x8), so everything here
//! works on a plain row-major [`Matrix`] without any attempt at blocking.
//!
//! [`mat_exp`] is scaling and squaring around diagonal Padé approximants of
//! degree 3 to 13 with the usual backward-error thresholds. [`mat_phi1`] is
//! read off the exponential of the augmented block matrix `[[M, I], [0, 0]]`,
//! which avoids inverting `M`, and falls back to the power series for tiny
//! arguments. [`skew_exp`] and [`skew_exp_integral`] are the Rodrigues closed
//! forms for a 3x3 skew-symmetric generator.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Result, SplitError};

/// Dense real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_row_major(nrows: usize, ncols: usize, entries: Vec<f64>) -> Result<Self> {
        if nrows == 0 || ncols == 0 || entries.len() != nrows * ncols {
            return Err(SplitError::Dimension(format!(
                "{} entries cannot form a {nrows}x{ncols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            nrows,
            ncols,
            entries,
        })
    }

    /// Builds a matrix from nested rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(SplitError::Dimension("ragged rows".into()));
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(nrows, ncols, entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.entries
            .chunks(self.ncols)
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.ncols)
            .map(|j| (0..self.nrows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry in absolute value.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matrix-vector dimension mismatch");
        self.entries
            .chunks(self.ncols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn axpy(&mut self, alpha: f64, other: &Matrix) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += alpha * b;
        }
    }

    fn add_diag(&mut self, alpha: f64) {
        for i in 0..self.nrows.min(self.ncols) {
            self[(i, i)] += alpha;
        }
    }

    /// Copies `block` into `self` with its top-left corner at `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &Matrix) {
        for i in 0..block.nrows {
            for j in 0..block.ncols {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> Matrix {
        let mut b = Matrix::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                b[(i, j)] = self[(row + i, col + j)];
            }
        }
        b
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.ncols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.ncols, rhs.nrows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.entries[k * rhs.ncols..(k + 1) * rhs.ncols];
                let dst = &mut out.entries[i * rhs.ncols..(i + 1) * rhs.ncols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

fn check_square_finite(m: &Matrix) -> Result<()> {
    if !m.is_square() {
        return Err(SplitError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows, m.ncols
        )));
    }
    if !m.is_finite() {
        return Err(SplitError::Domain("matrix has non-finite entries".into()));
    }
    Ok(())
}

// Padé numerator coefficients b_k; the denominator uses (-1)^k b_k.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm bounds below which the degree-m approximant is accurate to unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

/// Returns `(U, V)` with `r_m(A) = (V - U)^{-1} (V + U)` for degree 3..9.
fn pade_low(a: &Matrix, coeffs: &[f64]) -> (Matrix, Matrix) {
    let n = a.nrows;
    let a2 = a * a;
    let mut u_inner = Matrix::identity(n).scaled(coeffs[1]);
    let mut v = Matrix::identity(n).scaled(coeffs[0]);
    let mut power = a2.clone();
    let degree = coeffs.len() - 1;
    let mut k = 2;
    while k <= degree {
        v.axpy(coeffs[k], &power);
        if k + 1 <= degree {
            u_inner.axpy(coeffs[k + 1], &power);
        }
        k += 2;
        if k <= degree {
            power = &power * &a2;
        }
    }
    (a * &u_inner, v)
}

fn pade13(a: &Matrix) -> (Matrix, Matrix) {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut inner = a6.scaled(b[13]);
    inner.axpy(b[11], &a4);
    inner.axpy(b[9], &a2);
    let mut u = &a6 * &inner;
    u.axpy(b[7], &a6);
    u.axpy(b[5], &a4);
    u.axpy(b[3], &a2);
    u.add_diag(b[1]);
    let u = a * &u;

    let mut inner = a6.scaled(b[12]);
    inner.axpy(b[10], &a4);
    inner.axpy(b[8], &a2);
    let mut v = &a6 * &inner;
    v.axpy(b[6], &a6);
    v.axpy(b[4], &a4);
    v.axpy(b[2], &a2);
    v.add_diag(b[0]);
    (u, v)
}

/// Solves `lhs * X = rhs` by Gaussian elimination with partial pivoting.
fn solve(mut lhs: Matrix, mut rhs: Matrix) -> Result<Matrix> {
    let n = lhs.nrows;
    let m = rhs.ncols;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lhs[(i, col)].abs().total_cmp(&lhs[(j, col)].abs()))
            .unwrap_or(col);
        if lhs[(pivot, col)] == 0.0 {
            return Err(SplitError::Domain("singular Padé denominator".into()));
        }
        if pivot != col {
            for j in 0..n {
                lhs.entries.swap(pivot * n + j, col * n + j);
            }
            for j in 0..m {
                rhs.entries.swap(pivot * m + j, col * m + j);
            }
        }
        let p = lhs[(col, col)];
        for row in col + 1..n {
            let factor = lhs[(row, col)] / p;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                lhs[(row, j)] -= factor * lhs[(col, j)];
            }
            for j in 0..m {
                rhs[(row, j)] -= factor * rhs[(col, j)];
            }
        }
    }
    for col in (0..n).rev() {
        let p = lhs[(col, col)];
        for j in 0..m {
            let mut acc = rhs[(col, j)];
            for k in col + 1..n {
                acc -= lhs[(col, k)] * rhs[(k, j)];
            }
            rhs[(col, j)] = acc / p;
        }
    }
    Ok(rhs)
}

fn exp_unchecked(m: &Matrix) -> Result<Matrix> {
    let norm = m.norm_one();
    if norm == 0.0 {
        return Ok(Matrix::identity(m.nrows));
    }
    let (u, v, squarings) = if norm <= THETA3 {
        let (u, v) = pade_low(m, &PADE3);
        (u, v, 0)
    } else if norm <= THETA5 {
        let (u, v) = pade_low(m, &PADE5);
        (u, v, 0)
    } else if norm <= THETA7 {
        let (u, v) = pade_low(m, &PADE7);
        (u, v, 0)
    } else if norm <= THETA9 {
        let (u, v) = pade_low(m, &PADE9);
        (u, v, 0)
    } else {
        let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
        let scaled = m.scaled(0.5f64.powi(s));
        let (u, v) = pade13(&scaled);
        (u, v, s)
    };
    let mut r = solve(&v - &u, &v + &u)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Matrix exponential `e^m`.
pub fn mat_exp(m: &Matrix) -> Result<Matrix> {
    check_square_finite(m)?;
    exp_unchecked(m)
}

/// Below this ∞-norm the φ₁ power series is summed directly; larger
/// arguments are scaled down to it first.
const SERIES_THRESHOLD: f64 = 0.25;
const SERIES_TERMS: usize = 14;

/// `(e^m, φ₁(m))` from a single evaluation.
///
/// The series gives `φ₁` and `D = e^m - I` for `m / 2^s`, and each doubling
/// applies `φ₁(2x) = φ₁(x)(D + 2I)/2`, `D(2x) = D(D + 2I)`. Carrying `D`
/// rather than `e^m` keeps small increments `e^m y - y` accurate.
pub fn exp_and_phi1(m: &Matrix) -> Result<(Matrix, Matrix)> {
    check_square_finite(m)?;
    let n = m.nrows;
    let norm = m.norm_inf();
    let s = if norm < SERIES_THRESHOLD {
        0
    } else {
        (norm / SERIES_THRESHOLD).log2().floor() as i32 + 1
    };
    let x = m.scaled(0.5f64.powi(s));
    // φ₁(x) = I + x/2 (I + x/3 (I + ...))
    let mut phi = Matrix::identity(n);
    for k in (2..=SERIES_TERMS + 1).rev() {
        phi = (&x * &phi).scaled(1.0 / k as f64);
        phi.add_diag(1.0);
    }
    let mut d = &x * &phi;
    for _ in 0..s {
        let mut d_plus = d.clone();
        d_plus.add_diag(2.0);
        phi = (&phi * &d_plus).scaled(0.5);
        d = &d * &d_plus;
    }
    d.add_diag(1.0);
    Ok((d, phi))
}

/// `φ₁(m) = Σ_{k≥0} m^k / (k+1)!`, i.e. `(e^m - I) m^{-1}` when `m` is invertible.
pub fn mat_phi1(m: &Matrix) -> Result<Matrix> {
    exp_and_phi1(m).map(|(_, phi)| phi)
}

/// Magnetic generator: `B̃` (charge times field over mass) and a time span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewParams {
    pub b_tilde: [f64; 3],
    pub tau: f64,
}

impl SkewParams {
    pub fn new(b_tilde: [f64; 3], tau: f64) -> Self {
        Self { b_tilde, tau }
    }

    pub fn field_norm(&self) -> f64 {
        let [b1, b2, b3] = self.b_tilde;
        (b1 * b1 + b2 * b2 + b3 * b3).sqrt()
    }
}

/// The generator `Ω` with `Ω p = p × B̃`.
pub fn skew_generator(b: [f64; 3]) -> Matrix {
    let [b1, b2, b3] = b;
    Matrix {
        nrows: 3,
        ncols: 3,
        entries: vec![0.0, b3, -b2, -b3, 0.0, b1, b2, -b1, 0.0],
    }
}

/// Below this value of `τ‖B̃‖` the trigonometric ratios come from their Taylor series.
const SKEW_TAYLOR_THRESHOLD: f64 = 1e-4;

/// sin(θ)/θ
fn sinc(theta: f64) -> f64 {
    if theta.abs() < SKEW_TAYLOR_THRESHOLD {
        let t2 = theta * theta;
        1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0))
    } else {
        theta.sin() / theta
    }
}

/// (1 - cos θ)/θ², via the half-angle form which has no cancellation.
fn cosc(theta: f64) -> f64 {
    if theta.abs() < SKEW_TAYLOR_THRESHOLD {
        let t2 = theta * theta;
        0.5 - t2 / 24.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0))
    } else {
        let s = sinc(0.5 * theta);
        0.5 * s * s
    }
}

/// (θ - sin θ)/θ³
fn sinc3(theta: f64) -> f64 {
    let t2 = theta * theta;
    if theta.abs() < SKEW_TAYLOR_THRESHOLD {
        1.0 / 6.0 - t2 / 120.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0))
    } else if theta.abs() < 1.0 {
        // θ - sin θ cancels badly here; sum Σ (-1)^k θ^{2k} / (2k+3)! directly.
        let mut term = 1.0 / 6.0;
        let mut acc = term;
        for k in 1..=12 {
            let m = (2 * k + 2) as f64 * (2 * k + 3) as f64;
            term *= -t2 / m;
            acc += term;
        }
        acc
    } else {
        (theta - theta.sin()) / (t2 * theta)
    }
}

/// `I + c1 Ω + c2 Ω²`, using `Ω² = B̃B̃ᵀ - ‖B̃‖² I`.
fn rodrigues(b: [f64; 3], c0: f64, c1: f64, c2: f64) -> Matrix {
    let n2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let omega = skew_generator(b);
    let mut out = Matrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let sq = b[i] * b[j] - if i == j { n2 } else { 0.0 };
            out[(i, j)] = c1 * omega[(i, j)] + c2 * sq;
        }
        out[(i, i)] += c0;
    }
    out
}

/// `exp(τΩ)` in closed form; a rotation.
pub fn skew_exp(p: &SkewParams) -> Matrix {
    let mut out = skew_exp_increment(p);
    out.add_diag(1.0);
    out
}

/// `exp(τΩ) - I`, without the cancellation of forming the difference.
pub fn skew_exp_increment(p: &SkewParams) -> Matrix {
    let tau = p.tau;
    let theta = tau * p.field_norm();
    rodrigues(p.b_tilde, 0.0, tau * sinc(theta), tau * tau * cosc(theta))
}

/// `∫₀^τ exp(sΩ) ds` in closed form.
pub fn skew_exp_integral(p: &SkewParams) -> Matrix {
    let tau = p.tau;
    let theta = tau * p.field_norm();
    rodrigues(
        p.b_tilde,
        tau,
        tau * tau * cosc(theta),
        tau * tau * tau * sinc3(theta),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, FRAC_PI_2};

    fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e, Matrix::identity(3));
    }

    #[test]
    fn exp_of_diagonal() {
        let e = mat_exp(&Matrix::diag(&[1.0, -1.0])).unwrap();
        assert_abs_diff_eq!(e[(0, 0)], E, epsilon = 1e-15 * E);
        assert_abs_diff_eq!(e[(1, 1)], 1.0 / E, epsilon = 1e-16);
        assert_eq!(e[(0, 1)], 0.0);
        assert_eq!(e[(1, 0)], 0.0);
    }

    #[test]
    fn exp_handles_large_rotation_and_growth() {
        let rot = Matrix::from_rows(&[[0.0, 50.0], [-50.0, 0.0]]).unwrap();
        let e = mat_exp(&rot).unwrap();
        let (c, s) = (50f64.cos(), 50f64.sin());
        let want = Matrix::from_rows(&[[c, s], [-s, c]]).unwrap();
        assert!(max_diff(&e, &want) < 1e-13);

        let e = mat_exp(&Matrix::diag(&[50.0, -50.0])).unwrap();
        assert!((e[(0, 0)] / 50f64.exp() - 1.0).abs() < 1e-12);
        assert!((e[(1, 1)] / (-50f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let rect = Matrix::zeros(2, 3);
        assert!(matches!(mat_exp(&rect), Err(SplitError::Dimension(_))));
        let mut bad = Matrix::identity(2);
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(mat_exp(&bad), Err(SplitError::Domain(_))));
        assert!(matches!(mat_phi1(&bad), Err(SplitError::Domain(_))));
        assert!(Matrix::from_row_major(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn phi1_limits() {
        assert_eq!(mat_phi1(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
        let phi = mat_phi1(&Matrix::diag(&[1.0])).unwrap();
        assert_abs_diff_eq!(phi[(0, 0)], E - 1.0, epsilon = 1e-15);
        let phi = mat_phi1(&Matrix::diag(&[1e-5])).unwrap();
        assert_abs_diff_eq!(phi[(0, 0)], 1.0 + 0.5e-5 + 1e-10 / 6.0, epsilon = 1e-16);
    }

    #[test]
    fn phi1_of_singular_matrix() {
        // Nilpotent: φ₁(N) = I + N/2.
        let n = Matrix::from_rows(&[[0.0, 3.0], [0.0, 0.0]]).unwrap();
        let phi = mat_phi1(&n).unwrap();
        let want = Matrix::from_rows(&[[1.0, 1.5], [0.0, 1.0]]).unwrap();
        assert!(max_diff(&phi, &want) < 1e-15);
    }

    #[test]
    fn direct_and_scaled_series_agree_across_threshold() {
        let base = Matrix::from_rows(&[[0.3, -0.2], [0.4, 0.1]]).unwrap();
        for target in [0.2499, 0.2501] {
            let m = base.scaled(target / base.norm_inf());
            let (e, phi) = exp_and_phi1(&m).unwrap();
            assert!(max_diff(&e, &mat_exp(&m).unwrap()) < 4.0 * f64::EPSILON);
            let resid = &(&m * &phi) - &(&e - &Matrix::identity(2));
            assert!(resid.max_abs() < 2.0 * f64::EPSILON, "{}", resid.max_abs());
        }
    }

    #[test]
    fn phi1_matches_augmented_exponential() {
        // φ₁(m) is the upper-right block of exp([[m, I], [0, 0]]).
        let m = Matrix::from_rows(&[
            [-2.0, 4.5, 0.3, 1.0],
            [0.7, -6.0, 2.0, 0.0],
            [1.0, 0.0, 0.5, -3.0],
            [0.0, 2.0, 1.5, -1.0],
        ])
        .unwrap();
        let mut aug = Matrix::zeros(8, 8);
        aug.set_block(0, 0, &m);
        aug.set_block(0, 4, &Matrix::identity(4));
        let want = mat_exp(&aug).unwrap().block(0, 4, 4, 4);
        let got = mat_phi1(&m).unwrap();
        assert!(max_diff(&got, &want) < 1e-12 * want.max_abs(), "{}", max_diff(&got, &want));
    }

    #[test]
    fn skew_exp_zero_field_is_identity() {
        let r = skew_exp(&SkewParams::new([0.0; 3], 3.7));
        assert_eq!(r, Matrix::identity(3));
        let i = skew_exp_integral(&SkewParams::new([0.0; 3], 0.3));
        assert!(max_diff(&i, &Matrix::identity(3).scaled(0.3)) < 1e-16);
    }

    #[test]
    fn skew_exp_quarter_turn_matches_generic_exponential() {
        let p = SkewParams::new([0.0, 0.0, 1.0], FRAC_PI_2);
        let closed = skew_exp(&p);
        let generic = mat_exp(&skew_generator(p.b_tilde).scaled(p.tau)).unwrap();
        assert!(max_diff(&closed, &generic) < 1e-13);
        // Ω p = p × B̃ with B̃ = e3 maps e1 to -e2 at unit rate.
        let rotated = closed.mul_vec(&[1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(rotated[1], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn skew_generator_is_cross_product() {
        let b = [0.3, -1.2, 2.0];
        let p = [1.5, 0.25, -0.75];
        let got = skew_generator(b).mul_vec(&p);
        let cross = [
            p[1] * b[2] - p[2] * b[1],
            p[2] * b[0] - p[0] * b[2],
            p[0] * b[1] - p[1] * b[0],
        ];
        for k in 0..3 {
            assert_abs_diff_eq!(got[k], cross[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn skew_forms_are_continuous_at_zero_field() {
        let tau = 0.7;
        let tiny = [1e-9 / 3f64.sqrt(); 3];
        let a = skew_exp(&SkewParams::new(tiny, tau));
        let b = skew_exp(&SkewParams::new([0.0; 3], tau));
        assert!(max_diff(&a, &b) <= 1e-8);
        let a = skew_exp_integral(&SkewParams::new(tiny, tau));
        let b = skew_exp_integral(&SkewParams::new([0.0; 3], tau));
        assert!(max_diff(&a, &b) <= 1e-8);
    }

    #[test]
    fn taylor_switch_is_seamless() {
        // Either side of τ‖B̃‖ = 1e-4 the ratios must agree to roundoff.
        for f in [sinc, cosc, sinc3] {
            let lo = f(0.99999e-4);
            let hi = f(1.00001e-4);
            assert!((lo - hi).abs() < 1e-12, "{lo} vs {hi}");
        }
    }
}
