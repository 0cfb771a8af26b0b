//! Small dense matrices over `f64` and `Complex64`.
//!
//! Everything here is sized for derivative matrices of maps on the unit ball
//! (a few rows, never more than 16). Singular values come from a one-sided
//! (Hestenes) Jacobi sweep, which gives the extreme values with high relative
//! accuracy; determinants and inverses use LU with partial pivoting.

use std::fmt::Debug;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative floor under which a matrix is treated as singular by [`invert`].
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Entry type of a dense matrix: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conjugate(self) -> Self;
    fn to_complex(self) -> Complex64;
    fn is_finite_value(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conjugate(self) -> Self {
        self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<T>,
}

/// `n x n` complex matrix (Dh, Dg, Dg[Dh]^-1, ...).
pub type CMatrix = Matrix<Complex64>;
/// Real matrix; the real Jacobian of a map on C^n is `2n x 2n`.
pub type RMatrix = Matrix<f64>;

impl<T: Scalar> Matrix<T> {
    /// Builds a matrix from row-major entries, rejecting empty, ragged or
    /// non-finite input.
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite_value()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| T::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(values: &[T]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite_value())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x.conjugate()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conjugate())
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matmul");
        let n = self.dim;
        Self::from_fn(n, |i, j| {
            (0..n).fold(T::zero(), |acc, l| acc + self[(i, l)] * rhs[(l, j)])
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.dim, v.len(), "dimension mismatch in mul_vec");
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> CMatrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x.to_complex()).collect(),
        }
    }

    pub fn singular_values(&self) -> SingularSpectrum {
        singular_values(self)
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(self)
    }

    pub fn min_gain(&self) -> f64 {
        min_gain(self)
    }

    pub fn det(&self) -> T {
        det(self)
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs)
    }
}

/// Singular values in nonincreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }
}

/// Euclidean norm of a vector.
pub fn vec_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
}

/// Singular values by one-sided Jacobi on the columns of a complex copy.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> SingularSpectrum {
    let n = a.dim;
    // cols[j][i] = a[i][j]
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].to_complex()).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma: Complex64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate column q's phase so the pair's inner product is real.
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let up = cols[p][i];
                    let uq = cols[q][i] * phase;
                    cols[p][i] = up * c - uq * s;
                    cols[q][i] = up * s + uq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut values: Vec<f64> = cols.iter().map(|c| vec_norm(c)).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    SingularSpectrum { values }
}

/// Largest singular value, i.e. `max ||A theta||` over unit `theta`.
pub fn operator_norm<T: Scalar>(a: &Matrix<T>) -> f64 {
    singular_values(a).max()
}

/// Smallest singular value, i.e. `min ||A theta||` over unit `theta`.
pub fn min_gain<T: Scalar>(a: &Matrix<T>) -> f64 {
    singular_values(a).min()
}

struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign_flips: usize,
    singular: bool,
}

fn lu_decompose<T: Scalar>(a: &Matrix<T>) -> Lu<T> {
    let n = a.dim;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign_flips = 0;
    let mut singular = false;
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&i, &j| lu[(i, k)].modulus().total_cmp(&lu[(j, k)].modulus()))
            .unwrap();
        if lu[(pivot_row, k)].modulus() == 0.0 {
            singular = true;
            continue;
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            perm.swap(k, pivot_row);
            sign_flips += 1;
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let v = lu[(k, j)];
                lu[(i, j)] = lu[(i, j)] - factor * v;
            }
        }
    }
    Lu {
        lu,
        perm,
        sign_flips,
        singular,
    }
}

/// Determinant by LU factorization with partial pivoting.
pub fn det<T: Scalar>(a: &Matrix<T>) -> T {
    let Lu {
        lu,
        sign_flips,
        singular,
        ..
    } = lu_decompose(a);
    if singular {
        return T::zero();
    }
    let mut d = (0..a.dim).fold(T::one(), |acc, i| acc * lu[(i, i)]);
    if sign_flips % 2 == 1 {
        d = -d;
    }
    d
}

/// Inverse, refusing matrices whose minimal gain is below
/// `SINGULARITY_TOLERANCE * max(1, ||A||)`.
pub fn invert<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let spectrum = singular_values(a);
    let tolerance = SINGULARITY_TOLERANCE * spectrum.max().max(1.0);
    if spectrum.min() < tolerance {
        return Err(Error::SingularMatrix {
            min_gain: spectrum.min(),
            tolerance,
        });
    }
    let n = a.dim;
    let Lu { lu, perm, .. } = lu_decompose(a);
    let mut inv = Matrix::zeros(n);
    for col in 0..n {
        // Solve L y = P e_col, then U x = y.
        let mut x: Vec<T> = perm
            .iter()
            .map(|&p| if p == col { T::one() } else { T::zero() })
            .collect();
        for i in 0..n {
            for j in 0..i {
                let v = x[j];
                x[i] = x[i] - lu[(i, j)] * v;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let v = x[j];
                x[i] = x[i] - lu[(i, j)] * v;
            }
            x[i] = x[i] / lu[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    Ok(inv)
}
