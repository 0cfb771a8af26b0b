//! Pluriharmonic mappings `f = h + conj(g)` on the unit ball of C^n.
//!
//! `h` and `g` are holomorphic models: either explicit polynomials indexed by
//! multi-indices, or closed-form one-variable families. The mapping exposes the
//! pointwise quantities the distortion theory is phrased in: Dh, Dg, the
//! directional derivative, the dilatation norm `||Dg [Dh]^-1||`, the real
//! Jacobian and its extreme singular values, and the factored Jacobian
//! determinant.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, vec_norm, CMatrix, RMatrix};

/// Points with `||z|| >= 1 - BOUNDARY_MARGIN` are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Largest total degree accepted in a polynomial model.
pub const MAX_POLYNOMIAL_DEGREE: u32 = 16;

/// Tolerance on `||theta|| = 1` for directional derivatives.
pub const DIRECTION_TOLERANCE: f64 = 1e-12;

pub(crate) fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Checks that `z` is a finite point of the open ball in C^n.
pub fn check_point(z: &[Complex64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::domain(format!(
            "point has dimension {}, expected {n}",
            z.len()
        )));
    }
    if !z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::domain("point has non-finite coordinates"));
    }
    let norm = vec_norm(z);
    if norm >= 1.0 - BOUNDARY_MARGIN {
        return Err(Error::domain(format!(
            "||z|| = {norm} is not inside the open unit ball"
        )));
    }
    Ok(())
}

/// Exponent vector of a monomial `z_1^b_1 ... z_n^b_n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    /// `e_j` in dimension `n`.
    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn monomial(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&b, &zj)| acc * zj.powu(b))
    }

    /// `d/dz_j z^beta`.
    fn partial(&self, z: &[Complex64], j: usize) -> Complex64 {
        let bj = self.0[j];
        if bj == 0 {
            return czero();
        }
        let mut lowered = self.0.clone();
        lowered[j] -= 1;
        MultiIndex(lowered).monomial(z) * bj as f64
    }

    /// `d^2/(dz_j dz_l) z^beta`.
    fn second_partial(&self, z: &[Complex64], j: usize, l: usize) -> Complex64 {
        let mut lowered = self.0.clone();
        let mut factor = 1.0;
        for idx in [j, l] {
            if lowered[idx] == 0 {
                return czero();
            }
            factor *= lowered[idx] as f64;
            lowered[idx] -= 1;
        }
        MultiIndex(lowered).monomial(z) * factor
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Holomorphic polynomial map C^n -> C^n, `sum_beta c_beta z^beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialModel {
    n: usize,
    terms: BTreeMap<MultiIndex, Vec<Complex64>>,
}

impl PolynomialModel {
    pub fn new(n: usize, terms: BTreeMap<MultiIndex, Vec<Complex64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadSpec("dimension must be at least 1".into()));
        }
        for (beta, coeff) in &terms {
            if beta.0.len() != n {
                return Err(Error::BadSpec(format!(
                    "multi-index ({beta}) has length {}, expected {n}",
                    beta.0.len()
                )));
            }
            if beta.degree() > MAX_POLYNOMIAL_DEGREE {
                return Err(Error::BadSpec(format!(
                    "multi-index ({beta}) exceeds degree cap {MAX_POLYNOMIAL_DEGREE}"
                )));
            }
            if coeff.len() != n {
                return Err(Error::BadSpec(format!(
                    "coefficient of ({beta}) has {} components, expected {n}",
                    coeff.len()
                )));
            }
            if !coeff.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::BadSpec(format!("coefficient of ({beta}) is not finite")));
            }
        }
        Ok(Self { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The linear map `z -> A z`.
    pub fn linear(a: &CMatrix) -> Self {
        let n = a.dim();
        let terms = (0..n)
            .map(|j| (MultiIndex::unit(n, j), (0..n).map(|i| a[(i, j)]).collect()))
            .collect();
        Self { n, terms }
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(&CMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Vec<Complex64>> {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Adds `coeff * z^beta` to the model.
    pub fn add_term(&mut self, beta: MultiIndex, coeff: Vec<Complex64>) {
        assert_eq!(beta.0.len(), self.n);
        assert_eq!(coeff.len(), self.n);
        let entry = self.terms.entry(beta).or_insert_with(|| vec![czero(); self.n]);
        for (e, c) in entry.iter_mut().zip(coeff) {
            *e += c;
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (b.clone(), c.iter().map(|x| x * s).collect()))
                .collect(),
        }
    }

    fn value(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![czero(); self.n];
        for (beta, coeff) in &self.terms {
            let m = beta.monomial(z);
            for (o, c) in out.iter_mut().zip(coeff) {
                *o += c * m;
            }
        }
        out
    }

    fn jacobian(&self, z: &[Complex64]) -> CMatrix {
        let mut d = CMatrix::zeros(self.n);
        for (beta, coeff) in &self.terms {
            for j in 0..self.n {
                let p = beta.partial(z, j);
                if p == czero() {
                    continue;
                }
                for (i, c) in coeff.iter().enumerate() {
                    d[(i, j)] += c * p;
                }
            }
        }
        d
    }

    fn hessian(&self, z: &[Complex64]) -> BilinearForm {
        let n = self.n;
        let mut form = BilinearForm::zero(n);
        for (beta, coeff) in &self.terms {
            if beta.degree() < 2 {
                continue;
            }
            for j in 0..n {
                for l in 0..n {
                    let p = beta.second_partial(z, j, l);
                    if p == czero() {
                        continue;
                    }
                    for (i, c) in coeff.iter().enumerate() {
                        *form.at_mut(i, j, l) += c * p;
                    }
                }
            }
        }
        form
    }
}

/// Closed-form holomorphic families of one complex variable.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedFormModel {
    /// `scale * [((1 + q z) / (1 - q z))^exponent - 1]` with `|q| <= 1` and the
    /// principal branch of the power; `(1 + qz)/(1 - qz)` has positive real
    /// part on the disk, so the branch is continuous there.
    PowerRatio {
        scale: Complex64,
        rotation: Complex64,
        exponent: f64,
    },
}

impl ClosedFormModel {
    pub fn power_ratio(scale: Complex64, rotation: Complex64, exponent: f64) -> Result<Self> {
        if !(scale.re.is_finite() && scale.im.is_finite()) {
            return Err(Error::BadSpec("power_ratio scale must be finite".into()));
        }
        if !(rotation.norm() <= 1.0 + 1e-12) {
            return Err(Error::BadSpec(format!(
                "power_ratio rotation must satisfy |q| <= 1, got {}",
                rotation.norm()
            )));
        }
        if !exponent.is_finite() {
            return Err(Error::BadSpec("power_ratio exponent must be finite".into()));
        }
        Ok(ClosedFormModel::PowerRatio {
            scale,
            rotation,
            exponent,
        })
    }

    pub fn family_id(&self) -> &'static str {
        match self {
            ClosedFormModel::PowerRatio { .. } => "power_ratio",
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        match *self {
            ClosedFormModel::PowerRatio {
                scale,
                rotation,
                exponent,
            } => ClosedFormModel::PowerRatio {
                scale: scale * s,
                rotation,
                exponent,
            },
        }
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedFormModel::PowerRatio {
                scale,
                rotation: q,
                exponent,
            } => {
                let w = (1.0 + q * z) / (1.0 - q * z);
                scale * (w.powf(exponent) - 1.0)
            }
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedFormModel::PowerRatio {
                scale,
                rotation: q,
                exponent,
            } => {
                // d/dz w^a = a w^(a-1) * 2q / (1 - qz)^2
                let w = (1.0 + q * z) / (1.0 - q * z);
                let one_minus = 1.0 - q * z;
                scale * exponent * w.powf(exponent - 1.0) * 2.0 * q / (one_minus * one_minus)
            }
        }
    }

    pub fn second_derivative(&self, z: Complex64) -> Complex64 {
        match *self {
            ClosedFormModel::PowerRatio {
                rotation: q,
                exponent,
                ..
            } => {
                // logarithmic derivative of (1+qz)^(a-1) (1-qz)^(-a-1)
                let log_deriv = q * (exponent - 1.0) / (1.0 + q * z) + q * (exponent + 1.0) / (1.0 - q * z);
                self.derivative(z) * log_deriv
            }
        }
    }
}

/// Holomorphic part model: either `h` or `g` of a pluriharmonic map.
#[derive(Clone, Debug, PartialEq)]
pub enum HolomorphicModel {
    Polynomial(PolynomialModel),
    ClosedForm(ClosedFormModel),
}

impl HolomorphicModel {
    /// Dimension `n`; closed-form families live on the disk.
    pub fn dim(&self) -> usize {
        match self {
            HolomorphicModel::Polynomial(p) => p.dim(),
            HolomorphicModel::ClosedForm(_) => 1,
        }
    }

    pub fn value(&self, z: &[Complex64]) -> Vec<Complex64> {
        match self {
            HolomorphicModel::Polynomial(p) => p.value(z),
            HolomorphicModel::ClosedForm(c) => vec![c.value(z[0])],
        }
    }

    pub fn jacobian(&self, z: &[Complex64]) -> CMatrix {
        match self {
            HolomorphicModel::Polynomial(p) => p.jacobian(z),
            HolomorphicModel::ClosedForm(c) => CMatrix::diag(&[c.derivative(z[0])]),
        }
    }

    /// Second complex derivative at `z` as a symmetric bilinear form.
    pub fn hessian(&self, z: &[Complex64]) -> BilinearForm {
        match self {
            HolomorphicModel::Polynomial(p) => p.hessian(z),
            HolomorphicModel::ClosedForm(c) => {
                let mut form = BilinearForm::zero(1);
                *form.at_mut(0, 0, 0) = c.second_derivative(z[0]);
                form
            }
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        match self {
            HolomorphicModel::Polynomial(p) => HolomorphicModel::Polynomial(p.scaled(s)),
            HolomorphicModel::ClosedForm(c) => HolomorphicModel::ClosedForm(c.scaled(s)),
        }
    }
}

/// Vector-valued symmetric bilinear form on C^n, stored as
/// `coeffs[i][j][l] = d^2 h_i / (dz_j dz_l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearForm {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl BilinearForm {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![czero(); n * n * n],
        }
    }

    /// Builds the form from its values on basis pairs, `(j, l) -> D^2 h (e_j, e_l)`.
    pub fn from_basis_values(n: usize, mut f: impl FnMut(usize, usize) -> Vec<Complex64>) -> Self {
        let mut form = Self::zero(n);
        for j in 0..n {
            for l in 0..n {
                for (i, v) in f(j, l).into_iter().enumerate().take(n) {
                    *form.at_mut(i, j, l) = v;
                }
            }
        }
        form
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize, l: usize) -> Complex64 {
        self.coeffs[(i * self.n + j) * self.n + l]
    }

    fn at_mut(&mut self, i: usize, j: usize, l: usize) -> &mut Complex64 {
        &mut self.coeffs[(i * self.n + j) * self.n + l]
    }

    /// `(theta, eta) -> D^2 h (theta, eta)`.
    pub fn apply(&self, theta: &[Complex64], eta: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = czero();
                for j in 0..n {
                    for l in 0..n {
                        acc += self.at(i, j, l) * theta[j] * eta[l];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == czero())
    }
}

/// Where a map came from: a builtin family id, a file, or code.
pub type Provenance = String;

/// Pluriharmonic map `f = h + conj(g)` from the ball of C^n into C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct MapModel {
    n: usize,
    h: HolomorphicModel,
    g: HolomorphicModel,
    provenance: Provenance,
}

/// Value and complex derivative matrices of a map at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointDerivatives {
    pub z: Vec<Complex64>,
    pub f_value: Vec<Complex64>,
    pub dh: CMatrix,
    pub dg: CMatrix,
}

impl MapModel {
    pub fn new(h: HolomorphicModel, g: HolomorphicModel, provenance: impl Into<String>) -> Result<Self> {
        let n = h.dim();
        if g.dim() != n {
            return Err(Error::BadSpec(format!(
                "h has dimension {n} but g has dimension {}",
                g.dim()
            )));
        }
        Ok(Self {
            n,
            h,
            g,
            provenance: provenance.into(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            h: HolomorphicModel::Polynomial(PolynomialModel::identity(n)),
            g: HolomorphicModel::Polynomial(PolynomialModel::zero(n)),
            provenance: format!("builtin:identity?n={n}"),
        }
    }

    /// `f(z) = z + c conj(z)` in one variable.
    pub fn affine(c: f64) -> Self {
        let h = PolynomialModel::identity(1);
        let g = PolynomialModel::identity(1).scaled(Complex64::new(c, 0.0));
        Self {
            n: 1,
            h: HolomorphicModel::Polynomial(h),
            g: HolomorphicModel::Polynomial(g),
            provenance: format!("builtin:affine?c={c}"),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &HolomorphicModel {
        &self.h
    }

    pub fn g(&self) -> &HolomorphicModel {
        &self.g
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// `h(z) + conj(g(z))`.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_point(z, self.n)?;
        Ok(self.value_unchecked(z))
    }

    fn value_unchecked(&self, z: &[Complex64]) -> Vec<Complex64> {
        let h = self.h.value(z);
        let g = self.g.value(z);
        h.iter().zip(&g).map(|(a, b)| a + b.conj()).collect()
    }

    pub fn h_value(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_point(z, self.n)?;
        Ok(self.h.value(z))
    }

    pub fn derivatives(&self, z: &[Complex64]) -> Result<PointDerivatives> {
        check_point(z, self.n)?;
        Ok(PointDerivatives {
            z: z.to_vec(),
            f_value: self.value_unchecked(z),
            dh: self.h.jacobian(z),
            dg: self.g.jacobian(z),
        })
    }

    /// `Dh(z) theta + conj(Dg(z) theta)`.
    pub fn directional_derivative(&self, z: &[Complex64], theta: &[Complex64]) -> Result<Vec<Complex64>> {
        check_point(z, self.n)?;
        check_direction(theta, self.n)?;
        let dh = self.h.jacobian(z).mul_vec(theta);
        let dg = self.g.jacobian(z).mul_vec(theta);
        Ok(dh.iter().zip(&dg).map(|(a, b)| a + b.conj()).collect())
    }

    /// `Dg(z) [Dh(z)]^-1`.
    pub fn dilatation_matrix(&self, z: &[Complex64]) -> Result<CMatrix> {
        let d = self.derivatives(z)?;
        let inv = linalg::invert(&d.dh)?;
        Ok(d.dg.matmul(&inv))
    }

    /// `||Dg(z) [Dh(z)]^-1||`.
    pub fn dilatation_norm(&self, z: &[Complex64]) -> Result<f64> {
        Ok(self.dilatation_matrix(z)?.operator_norm())
    }

    pub fn real_jacobian(&self, z: &[Complex64]) -> Result<RMatrix> {
        let d = self.derivatives(z)?;
        Ok(real_jacobian_from(&d.dh, &d.dg))
    }

    /// `(Lambda_f(z), lambda_f(z))`: the extreme singular values of the real
    /// Jacobian, i.e. the max and min of `||d_theta f(z)||` over unit theta.
    pub fn lambda_extremes(&self, z: &[Complex64]) -> Result<(f64, f64)> {
        let s = self.real_jacobian(z)?.singular_values();
        Ok((s.max(), s.min()))
    }

    /// `|det Dh|^2 det(I - W conj(W))` with `W = Dg [Dh]^-1`.
    pub fn det_jacobian(&self, z: &[Complex64]) -> Result<f64> {
        let d = self.derivatives(z)?;
        factored_det(&d.dh, &d.dg)
    }

    /// Determinant of the complex block matrix `[[Dh, conj Dg], [Dg, conj Dh]]`.
    pub fn block_det(&self, z: &[Complex64]) -> Result<Complex64> {
        let d = self.derivatives(z)?;
        let n = self.n;
        let (dh, dg) = (&d.dh, &d.dg);
        let block = CMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => dh[(i, j)],
            (true, false) => dg[(i, j - n)].conj(),
            (false, true) => dg[(i - n, j)],
            (false, false) => dh[(i - n, j - n)].conj(),
        });
        Ok(block.det())
    }

    /// True iff Dh(z) is invertible and the dilatation norm is at most `k`.
    pub fn is_sense_preserving(&self, z: &[Complex64], k: f64) -> bool {
        match self.dilatation_norm(z) {
            Ok(kappa) => kappa <= k + 1e-12,
            Err(_) => false,
        }
    }
}

/// `D^2 h(0)` of a holomorphic model.
pub fn second_derivative_at_zero(h: &HolomorphicModel) -> BilinearForm {
    h.hessian(&vec![czero(); h.dim()])
}

pub(crate) fn check_direction(theta: &[Complex64], n: usize) -> Result<()> {
    let norm = vec_norm(theta);
    if theta.len() != n || !((norm - 1.0).abs() <= DIRECTION_TOLERANCE) {
        return Err(Error::BadDirection { norm });
    }
    Ok(())
}

/// Real Jacobian in the coordinates `(x_1, y_1, ..., x_n, y_n)` ->
/// `(u_1, v_1, ..., u_n, v_n)`.
///
/// With `P = Dh + conj(Dg)` and `Q = i (Dh - conj(Dg))`, the block for
/// `(f_j, z_k)` is `[[Re P, Re Q], [Im P, Im Q]]`.
pub fn real_jacobian_from(dh: &CMatrix, dg: &CMatrix) -> RMatrix {
    let n = dh.dim();
    let i_unit = Complex64::new(0.0, 1.0);
    RMatrix::from_fn(2 * n, |row, col| {
        let (j, k) = (row / 2, col / 2);
        let p = dh[(j, k)] + dg[(j, k)].conj();
        let q = i_unit * (dh[(j, k)] - dg[(j, k)].conj());
        match (row % 2, col % 2) {
            (0, 0) => p.re,
            (0, _) => q.re,
            (_, 0) => p.im,
            _ => q.im,
        }
    })
}

/// Factored Jacobian determinant from Dh and Dg.
pub fn factored_det(dh: &CMatrix, dg: &CMatrix) -> Result<f64> {
    let n = dh.dim();
    let w = dg.matmul(&linalg::invert(dh)?);
    let inner = &CMatrix::identity(n) - &w.matmul(&w.conj());
    Ok(dh.det().norm_sqr() * inner.det().re)
}
