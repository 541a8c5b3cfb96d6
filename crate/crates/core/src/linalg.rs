//! Fixed-size linear algebra for the attitude problem.
//!
//! Everything here works on 3-vectors, 3×3 and 9×9 matrices stored by value.
//! The 9×9 routines (spectral norm, exponential, eigenvalues) exist to check
//! the stability certificate of the observer error system numerically.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `| |v| - 1 |` for [`UnitVector3`].
pub const UNIT_TOL: f64 = 1e-9;

/// Tolerance on `‖RᵀR - I‖` for [`RotationMatrix`].
pub const ORTHO_TOL: f64 = 1e-8;

/// A vector of ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vector3(pub [f64; 3]);

impl Vector3 {
    pub const ZERO: Vector3 = Vector3([0.0; 3]);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Vector3([x1, x2, x3])
    }

    pub const fn e(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        Vector3(v)
    }

    pub fn dot(&self, o: &Vector3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vector3) -> Vector3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Vector3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Componentwise product.
    pub fn hadamard(&self, o: &Vector3) -> Vector3 {
        Vector3([self.0[0] * o.0[0], self.0[1] * o.0[1], self.0[2] * o.0[2]])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vector3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vector3 {
    fn add_assign(&mut self, o: Vector3) {
        *self = *self + o;
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl SubAssign for Vector3 {
    fn sub_assign(&mut self, o: Vector3) {
        *self = *self - o;
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<Vector3> for f64 {
    type Output = Vector3;
    fn mul(self, v: Vector3) -> Vector3 {
        v * self
    }
}

/// A unit-norm 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector3(Vector3);

impl UnitVector3 {
    /// Normalizes `v`. Fails for a zero or non-finite vector.
    pub fn new_normalize(v: Vector3) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot normalize vector {:?}",
                v.0
            )));
        }
        Ok(UnitVector3(v * (1.0 / n)))
    }

    /// Accepts `v` only if it is already unit norm within [`UNIT_TOL`].
    pub fn try_new(v: Vector3) -> Result<Self> {
        if (v.norm() - 1.0).abs() > UNIT_TOL || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "vector {:?} is not unit norm",
                v.0
            )));
        }
        Ok(UnitVector3(v))
    }

    pub const fn e(i: usize) -> Self {
        UnitVector3(Vector3::e(i))
    }

    pub fn into_inner(self) -> Vector3 {
        self.0
    }

    pub fn as_vector(&self) -> &Vector3 {
        &self.0
    }
}

impl std::ops::Deref for UnitVector3 {
    type Target = Vector3;
    fn deref(&self) -> &Vector3 {
        &self.0
    }
}

impl<'de> Deserialize<'de> for UnitVector3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vector3::deserialize(d)?;
        UnitVector3::new_normalize(v).map_err(serde::de::Error::custom)
    }
}

/// A 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub const ZERO: Matrix3 = Matrix3([[0.0; 3]; 3]);
    pub const IDENTITY: Matrix3 = Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diag(d: Vector3) -> Self {
        Matrix3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn from_columns(c: [Vector3; 3]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (j, col) in c.iter().enumerate() {
            for (i, row) in m.iter_mut().enumerate() {
                row[j] = col[i];
            }
        }
        Matrix3(m)
    }

    pub fn column(&self, j: usize) -> Vector3 {
        Vector3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn transpose(&self) -> Matrix3 {
        let m = &self.0;
        Matrix3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &Vector3) -> Vector3 {
        let m = &self.0;
        Vector3([
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Result<Matrix3> {
        let d = self.det();
        if d.abs() < 1e-300 || !d.is_finite() {
            return Err(Error::Singular);
        }
        let m = &self.0;
        let cof = |i1: usize, i2: usize, j1: usize, j2: usize| {
            m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]
        };
        // adjugate = transpose of the cofactor matrix
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Ok(Matrix3(adj) * (1.0 / d))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `MᵀM − I`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.transpose() * *self - Matrix3::IDENTITY).frobenius()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;
    fn mul(self, o: Matrix3) -> Matrix3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|l| self.0[i][l] * o.0[l][j]).sum();
            }
        }
        Matrix3(r)
    }
}

impl Mul<f64> for Matrix3 {
    type Output = Matrix3;
    fn mul(self, s: f64) -> Matrix3 {
        Matrix3(self.0.map(|row| row.map(|x| x * s)))
    }
}

impl Mul<Vector3> for Matrix3 {
    type Output = Vector3;
    fn mul(self, v: Vector3) -> Vector3 {
        self.mul_vec(&v)
    }
}

impl Add for Matrix3 {
    type Output = Matrix3;
    fn add(self, o: Matrix3) -> Matrix3 {
        let mut r = self.0;
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x += o.0[i][j];
            }
        }
        Matrix3(r)
    }
}

impl Sub for Matrix3 {
    type Output = Matrix3;
    fn sub(self, o: Matrix3) -> Matrix3 {
        self + o * -1.0
    }
}

/// The skew-symmetric matrix `[x]` with `[x] y = x × y`.
pub fn cross_matrix(x: &Vector3) -> Matrix3 {
    Matrix3([[0.0, -x[2], x[1]], [x[2], 0.0, -x[0]], [-x[1], x[0], 0.0]])
}

/// A proper orthogonal 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RotationMatrix(Matrix3);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix = RotationMatrix(Matrix3::IDENTITY);

    /// Validates `m` against the rotation invariants without modifying it.
    pub fn try_new(m: Matrix3) -> Result<Self> {
        let defect = m.orthogonality_defect();
        if !(defect <= ORTHO_TOL) || m.det() <= 0.0 {
            return Err(Error::NotNearlyOrthogonal { deviation: defect });
        }
        Ok(RotationMatrix(m))
    }

    /// Rotation by `angle` (rad) about the unit axis `axis` (Rodrigues formula).
    pub fn from_axis_angle(axis: &UnitVector3, angle: f64) -> Self {
        let k = cross_matrix(axis);
        let m = Matrix3::IDENTITY + k * angle.sin() + (k * k) * (1.0 - angle.cos());
        RotationMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.0
    }

    pub fn into_inner(self) -> Matrix3 {
        self.0
    }

    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }

    pub fn rotate(&self, v: &Vector3) -> Vector3 {
        self.0.mul_vec(v)
    }

    /// `Rᵀ v`.
    pub fn rotate_inverse(&self, v: &Vector3) -> Vector3 {
        self.0.transpose().mul_vec(v)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, o: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * o.0)
    }
}

impl<'de> Deserialize<'de> for RotationMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Matrix3::deserialize(d)?;
        RotationMatrix::try_new(m).map_err(serde::de::Error::custom)
    }
}

/// Projects a nearly orthogonal matrix onto the nearest rotation.
///
/// Uses the Newton iteration `X ← (X + X⁻ᵀ)/2`, which converges quadratically
/// to the orthogonal polar factor.
pub fn reorthonormalize(r: &Matrix3) -> Result<RotationMatrix> {
    let defect = r.orthogonality_defect();
    if !(defect <= 0.1) {
        return Err(Error::NotNearlyOrthogonal { deviation: defect });
    }
    if r.det() <= 0.0 {
        return Err(Error::NotNearlyOrthogonal { deviation: defect });
    }
    let mut x = *r;
    for _ in 0..20 {
        let next = (x + x.inverse()?.transpose()) * 0.5;
        let step = (next - x).frobenius();
        x = next;
        if step <= 1e-15 {
            break;
        }
    }
    RotationMatrix::try_new(x)
}

/// A 9×9 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix9(pub [[f64; 9]; 9]);

impl Default for Matrix9 {
    fn default() -> Self {
        Matrix9::ZERO
    }
}

impl Matrix9 {
    pub const ZERO: Matrix9 = Matrix9([[0.0; 9]; 9]);

    pub fn identity() -> Self {
        let mut m = [[0.0; 9]; 9];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Matrix9(m)
    }

    pub fn diag(d: [f64; 9]) -> Self {
        let mut m = Matrix9::ZERO;
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    /// Writes the 3×3 block at block-row `bi`, block-column `bj`.
    pub fn set_block(&mut self, bi: usize, bj: usize, b: &Matrix3) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[3 * bi + i][3 * bj + j] = b.0[i][j];
            }
        }
    }

    pub fn block(&self, bi: usize, bj: usize) -> Matrix3 {
        let mut b = Matrix3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                b.0[i][j] = self.0[3 * bi + i][3 * bj + j];
            }
        }
        b
    }

    pub fn transpose(&self) -> Matrix9 {
        let mut t = [[0.0; 9]; 9];
        for (i, row) in self.0.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                t[j][i] = *x;
            }
        }
        Matrix9(t)
    }

    pub fn mul_vec(&self, v: &[f64; 9]) -> [f64; 9] {
        let mut r = [0.0; 9];
        for (ri, row) in r.iter_mut().zip(self.0.iter()) {
            *ri = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        r
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..9).map(|i| self.0[i][i]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        let mut a = self.0;
        let mut det = 1.0;
        for c in 0..9 {
            let p = (c..9)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap_or(c);
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= a[c][c];
            for r in c + 1..9 {
                let f = a[r][c] / a[c][c];
                for j in c..9 {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix9> {
        let mut a = self.0;
        let mut inv = Matrix9::identity().0;
        let scale = self.max_abs();
        for c in 0..9 {
            let p = (c..9)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .unwrap_or(c);
            if !(a[p][c].abs() > 1e-13 * scale) {
                return Err(Error::Singular);
            }
            a.swap(p, c);
            inv.swap(p, c);
            let d = 1.0 / a[c][c];
            for j in 0..9 {
                a[c][j] *= d;
                inv[c][j] *= d;
            }
            for r in 0..9 {
                if r != c {
                    let f = a[r][c];
                    if f != 0.0 {
                        for j in 0..9 {
                            a[r][j] -= f * a[c][j];
                            inv[r][j] -= f * inv[c][j];
                        }
                    }
                }
            }
        }
        Ok(Matrix9(inv))
    }
}

impl Mul for Matrix9 {
    type Output = Matrix9;
    fn mul(self, o: Matrix9) -> Matrix9 {
        let mut r = [[0.0; 9]; 9];
        for (i, row) in r.iter_mut().enumerate() {
            for l in 0..9 {
                let a = self.0[i][l];
                if a != 0.0 {
                    for (x, b) in row.iter_mut().zip(o.0[l].iter()) {
                        *x += a * b;
                    }
                }
            }
        }
        Matrix9(r)
    }
}

impl Mul<f64> for Matrix9 {
    type Output = Matrix9;
    fn mul(self, s: f64) -> Matrix9 {
        Matrix9(self.0.map(|row| row.map(|x| x * s)))
    }
}

impl Add for Matrix9 {
    type Output = Matrix9;
    fn add(self, o: Matrix9) -> Matrix9 {
        let mut r = self.0;
        for (row, orow) in r.iter_mut().zip(o.0.iter()) {
            for (x, y) in row.iter_mut().zip(orow.iter()) {
                *x += y;
            }
        }
        Matrix9(r)
    }
}

impl Sub for Matrix9 {
    type Output = Matrix9;
    fn sub(self, o: Matrix9) -> Matrix9 {
        self + o * -1.0
    }
}

/// A complex number, used for eigenvalues of real matrices.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn dist(&self, o: &Complex) -> f64 {
        (self.re - o.re).hypot(self.im - o.im)
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im >= 0.0 {
            write!(f, "{:.8}+{:.8}i", self.re, self.im)
        } else {
            write!(f, "{:.8}-{:.8}i", self.re, -self.im)
        }
    }
}

/// Greedy nearest pairing of two multisets of complex numbers.
///
/// Returns the largest pairing distance, or `None` when the sizes differ or
/// some element has no partner within `tol`.
pub fn match_multisets(left: &[Complex], right: &[Complex], tol: f64) -> Option<f64> {
    if left.len() != right.len() {
        return None;
    }
    let mut free: Vec<Complex> = right.to_vec();
    let mut worst: f64 = 0.0;
    for z in left {
        let (idx, d) = free
            .iter()
            .enumerate()
            .map(|(i, w)| (i, z.dist(w)))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if d > tol {
            return None;
        }
        worst = worst.max(d);
        free.swap_remove(idx);
    }
    Some(worst)
}

const JACOBI_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<const N: usize>(m: &[[f64; N]; N]) -> Result<[f64; N]> {
    let mut a = *m;
    // symmetrize against rounding in the caller's product
    for i in 0..N {
        for j in 0..i {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    let total: f64 = a.iter().flatten().map(|x| x * x).sum();
    let mut converged = false;
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * total || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "Jacobi eigenvalue sweep",
            iterations: JACOBI_SWEEPS,
        });
    }
    let mut ev = [0.0; N];
    for (i, e) in ev.iter_mut().enumerate() {
        *e = a[i][i];
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Induced 2-norm: the largest singular value, from the spectrum of `MᵀM`.
pub fn spectral_norm(m: &Matrix9) -> Result<f64> {
    let gram = m.transpose() * *m;
    let ev = symmetric_eigenvalues(&gram.0)?;
    Ok(ev[8].max(0.0).sqrt())
}

/// `e^{M s}` by scaling and squaring a truncated Taylor series.
///
/// The argument is scaled by `2^-j` until its Frobenius norm is at most 0.5;
/// the series stops once a term's norm drops below 1e-16.
pub fn matrix_exp(m: &Matrix9, s: f64) -> Matrix9 {
    let x = *m * s;
    let norm = x.frobenius();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let x = x * 2f64.powi(-squarings);
    let mut result = Matrix9::identity();
    let mut term = Matrix9::identity();
    for i in 1..60 {
        term = (term * x) * (1.0 / i as f64);
        result = result + term;
        if term.frobenius() < 1e-16 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Reduces `a` to upper Hessenberg form by Householder reflections.
fn hessenberg<const N: usize>(a: &mut [[f64; N]; N]) {
    for k in 0..N.saturating_sub(2) {
        let alpha: f64 = (k + 1..N).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -alpha } else { alpha };
        let mut v = [0.0; N];
        v[k + 1] = a[k + 1][k] - alpha;
        for i in k + 2..N {
            v[i] = a[i][k];
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A ← H A H with H = I − 2vvᵀ/(vᵀv)
        for j in 0..N {
            let dot: f64 = (k + 1..N).map(|i| v[i] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k + 1..N {
                a[i][j] -= f * v[i];
            }
        }
        for row in a.iter_mut() {
            let dot: f64 = (k + 1..N).map(|j| row[j] * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k + 1..N {
                row[j] -= f * v[j];
            }
        }
        for i in k + 2..N {
            a[i][k] = 0.0;
        }
    }
}

const QR_ITERATIONS: usize = 60;

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.
fn hessenberg_qr<const N: usize>(a: &mut [[f64; N]; N]) -> Result<Vec<Complex>> {
    let mut out = vec![Complex::default(); N];
    let mut anorm = 0.0;
    for i in 0..N {
        for j in i.saturating_sub(1)..N {
            anorm += a[i][j].abs();
        }
    }
    let sign = |x: f64, s: f64| if s >= 0.0 { x.abs() } else { -x.abs() };
    let mut active = N;
    let mut shift_acc = 0.0;
    while active > 0 {
        let nn = active - 1;
        let mut its = 0;
        loop {
            // find a negligible subdiagonal element
            let mut l = nn;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                out[nn] = Complex::new(x + shift_acc, 0.0);
                active -= 1;
                break;
            }
            let mut y = a[nn - 1][nn - 1];
            let mut w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += shift_acc;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    let lo = if z != 0.0 { x - w / z } else { x + z };
                    out[nn - 1] = Complex::new(x + z, 0.0);
                    out[nn] = Complex::new(lo, 0.0);
                } else {
                    out[nn - 1] = Complex::new(x + p, -z);
                    out[nn] = Complex::new(x + p, z);
                }
                active -= 2;
                break;
            }
            if its == QR_ITERATIONS {
                return Err(Error::NoConvergence {
                    what: "Hessenberg QR",
                    iterations: QR_ITERATIONS,
                });
            }
            if its == 10 || its == 20 || its == 40 {
                // exceptional shift
                shift_acc += x;
                for (i, row) in a.iter_mut().enumerate().take(nn + 1) {
                    row[i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                let mut xk = 0.0;
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * xk;
                    }
                    p += s;
                    let xs = p / s;
                    let ys = q / s;
                    let zs = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k != nn - 1 {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * zs;
                        }
                        a[k + 1][j] -= pp * ys;
                        a[k][j] -= pp * xs;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        let mut pp = xs * row[k] + ys * row[k + 1];
                        if k != nn - 1 {
                            pp += zs * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k + 1] -= pp * q;
                        row[k] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(out)
}

/// All eigenvalues of a real square matrix, with multiplicity, in no particular order.
pub fn eigenvalues_of<const N: usize>(m: &[[f64; N]; N]) -> Result<Vec<Complex>> {
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    let mut a = *m;
    hessenberg(&mut a);
    hessenberg_qr(&mut a)
}

/// All nine eigenvalues of `M`.
pub fn eigenvalues(m: &Matrix9) -> Result<Vec<Complex>> {
    eigenvalues_of(&m.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random9(seed: &mut u64, scale: f64) -> Matrix9 {
        let mut m = Matrix9::ZERO;
        for row in m.0.iter_mut() {
            for x in row.iter_mut() {
                *x = scale * lcg(seed);
            }
        }
        m
    }

    #[test]
    fn cross_matrix_basis() {
        let c = cross_matrix(&Vector3::e(0));
        assert_eq!(c.mul_vec(&Vector3::e(1)), Vector3::e(2));
        assert_eq!(c.mul_vec(&Vector3::e(2)), -Vector3::e(1));
        let x = Vector3::new(0.3, -1.2, 2.5);
        assert_eq!(cross_matrix(&x).mul_vec(&x).norm(), 0.0);
        assert_eq!(cross_matrix(&x).transpose(), cross_matrix(&x) * -1.0);
    }

    #[test]
    fn spectral_norm_simple() {
        assert!((spectral_norm(&Matrix9::identity()).unwrap() - 1.0).abs() < 1e-15);
        let mut d = [1.0; 9];
        d[0] = 3.0;
        assert!((spectral_norm(&Matrix9::diag(d)).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        assert_eq!(matrix_exp(&Matrix9::ZERO, 1.0), Matrix9::identity());
        let lam = [-3.0, -1.0, -0.5, 0.0, 0.25, 1.0, 2.0, 3.5, -7.0];
        let e = matrix_exp(&Matrix9::diag(lam), 1.0);
        for i in 0..9 {
            let want = lam[i].exp();
            assert!((e.0[i][i] - want).abs() <= 1e-10 * want, "{i}");
        }
    }

    #[test]
    fn exp_semigroup() {
        let mut seed = 7;
        for _ in 0..20 {
            let m = random9(&mut seed, 0.5);
            let (s, t) = (0.7, 1.3);
            let lhs = matrix_exp(&m, s + t);
            let rhs = matrix_exp(&m, s) * matrix_exp(&m, t);
            let rel = (lhs - rhs).frobenius() / lhs.frobenius();
            assert!(rel < 1e-8, "{rel}");
        }
    }

    #[test]
    fn exp_of_skew_is_orthogonal() {
        let mut seed = 11;
        let m = random9(&mut seed, 1.0);
        let s = m - m.transpose();
        let e = matrix_exp(&s, 1.0);
        let defect = (e.transpose() * e - Matrix9::identity()).frobenius();
        assert!(defect < 1e-9, "{defect}");
    }

    #[test]
    fn eigenvalues_diagonal() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let ev = eigenvalues(&Matrix9::diag(d)).unwrap();
        let want: Vec<Complex> = d.iter().map(|&x| Complex::new(x, 0.0)).collect();
        assert!(match_multisets(&ev, &want, 1e-12).is_some());
    }

    #[test]
    fn eigenvalues_rotation_generator() {
        let mut m = Matrix9::diag([0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        m.0[0][1] = -1.0;
        m.0[1][0] = 1.0;
        let ev = eigenvalues(&m).unwrap();
        let mut want = vec![Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)];
        want.extend((1..8).map(|x| Complex::new(x as f64, 0.0)));
        assert!(match_multisets(&ev, &want, 1e-10).is_some());
    }

    #[test]
    fn eigenvalues_trace_and_determinant() {
        let mut seed = 3;
        for _ in 0..50 {
            let m = random9(&mut seed, 1.0);
            let ev = eigenvalues(&m).unwrap();
            let sum: f64 = ev.iter().map(|z| z.re).sum();
            let imag: f64 = ev.iter().map(|z| z.im).sum();
            assert!((sum - m.trace()).abs() < 1e-8);
            assert!(imag.abs() < 1e-8);
            let prod = ev.iter().fold(Complex::new(1.0, 0.0), |acc, z| acc.mul(z));
            let det = m.det();
            assert!(
                (prod.re - det).abs() <= 1e-6 * det.abs().max(1e-3),
                "{prod:?} vs {det}"
            );
        }
    }

    #[test]
    fn reorthonormalize_fixed_point_and_perturbation() {
        let r = RotationMatrix::from_axis_angle(
            &UnitVector3::new_normalize(Vector3::new(1.0, 2.0, -0.5)).unwrap(),
            0.9,
        );
        let back = reorthonormalize(r.matrix()).unwrap();
        assert!((*back.matrix() - *r.matrix()).frobenius() < 1e-12);

        let mut p = *r.matrix();
        p.0[0][1] += 1e-6;
        p.0[2][0] -= 1e-6;
        let q = reorthonormalize(&p).unwrap();
        assert!((*q.matrix() - p).frobenius() < 2e-6);
        assert!(q.matrix().orthogonality_defect() < 1e-14);
    }

    #[test]
    fn reorthonormalize_rejects_far_matrices() {
        let m = Matrix3::diag(Vector3::new(1.0, 2.0, 1.0));
        assert!(matches!(
            reorthonormalize(&m),
            Err(Error::NotNearlyOrthogonal { .. })
        ));
        let reflect = Matrix3::diag(Vector3::new(1.0, 1.0, -1.0));
        assert!(reorthonormalize(&reflect).is_err());
    }

    #[test]
    fn multiset_matching() {
        let a = [Complex::new(1.0, 0.0), Complex::new(2.0, 1.0)];
        let b = [Complex::new(2.0, 1.0 + 1e-9), Complex::new(1.0, 0.0)];
        assert!(match_multisets(&a, &b, 1e-7).is_some());
        assert!(match_multisets(&a, &b[..1], 1e-7).is_none());
        let c = [Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)];
        assert!(match_multisets(&a, &c, 1e-7).is_none());
    }
}
