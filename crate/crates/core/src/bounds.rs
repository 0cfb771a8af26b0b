//! Closed-form and quadrature evaluation of the distortion, growth, covering,
//! Jacobian and starlikeness bounds for the class PH(alpha, k), and the root
//! `k_n` that enters the quasiregular covering radius.
//!
//! Radii are `r = ||z||`. All functions are pure; parameter validation happens
//! on entry and reports [`Error::Domain`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::numerics;

/// Constant `m` in the quasiregular covering radius.
pub const QR_COVERING_M: f64 = 4.2;

/// Absolute tolerance of the covering-radius quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;

const KN_BRACKET: (f64, f64) = (1e-15, 1.0 - 1e-15);
const KN_MAX_ITER: usize = 200;
const KN_WIDTH: f64 = 1e-15;

/// Scalar inputs of the bound formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub alpha: f64,
    pub k: f64,
    /// `||[Dh(0)]^-1||`
    pub norm_dh0_inv: f64,
    /// `||Dh(0)||`
    pub norm_dh0: f64,
    /// `|det Dh(0)|`
    pub det_dh0: f64,
    /// dilatation cap for the quasiregular statements
    pub c: f64,
    /// quasiregularity constant of `h`
    pub big_k: f64,
}

impl BoundParams {
    /// Parameters with `Dh(0) = I` and no quasiregular data.
    pub fn new(n: usize, alpha: f64, k: f64) -> Result<Self> {
        let p = Self {
            n,
            alpha,
            k,
            norm_dh0_inv: 1.0,
            norm_dh0: 1.0,
            det_dh0: 1.0,
            c: 0.0,
            big_k: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Reads `||Dh(0)||`, `||[Dh(0)]^-1||` and `|det Dh(0)|` off a derivative matrix.
    pub fn with_dh0(mut self, dh0: &CMatrix) -> Result<Self> {
        let inv = linalg::invert(dh0)?;
        self.norm_dh0 = dh0.operator_norm();
        self.norm_dh0_inv = inv.operator_norm();
        self.det_dh0 = dh0.det().norm();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must be a finite value >= 1, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.k) {
            return Err(Error::domain(format!("k must lie in [0, 1), got {}", self.k)));
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::domain(format!("c must lie in [0, 1), got {}", self.c)));
        }
        if !(self.big_k >= 1.0 && self.big_k.is_finite()) {
            return Err(Error::domain(format!("K must be a finite value >= 1, got {}", self.big_k)));
        }
        if !(self.norm_dh0_inv > 0.0 && self.norm_dh0_inv.is_finite()) {
            return Err(Error::domain("||[Dh(0)]^-1|| must be positive and finite"));
        }
        if !(self.norm_dh0 > 0.0 && self.norm_dh0.is_finite()) {
            return Err(Error::domain("||Dh(0)|| must be positive and finite"));
        }
        if !(self.det_dh0 >= 0.0 && self.det_dh0.is_finite()) {
            return Err(Error::domain("|det Dh(0)| must be nonnegative and finite"));
        }
        Ok(())
    }
}

fn check_radius_open(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

fn checked(p: &BoundParams, r: f64) -> Result<()> {
    p.validate()?;
    check_radius_open(r)
}

/// Upper distortion bound on `Lambda_f`:
/// `(1+k)/(1-k) * (1+r)^(alpha-1) / (1-r)^(alpha+1)`.
pub fn distortion_upper(r: f64, p: &BoundParams) -> Result<f64> {
    checked(p, r)?;
    let a = p.alpha;
    Ok((1.0 + p.k) / (1.0 - p.k) * (1.0 + r).powf(a - 1.0) / (1.0 - r).powf(a + 1.0))
}

/// Lower distortion bound on `Lambda_f`:
/// `(1-k)/||[Dh(0)]^-1|| * (1-r)^(alpha-1) / (1+r)^(alpha+1)`.
pub fn distortion_lower(r: f64, p: &BoundParams) -> Result<f64> {
    checked(p, r)?;
    let a = p.alpha;
    Ok((1.0 - p.k) / p.norm_dh0_inv * (1.0 - r).powf(a - 1.0) / (1.0 + r).powf(a + 1.0))
}

/// Growth bound on `||f(z)||`:
/// `(1+k) / (2 alpha (1-k)) * [((1+r)/(1-r))^alpha - 1]`.
pub fn growth_bound(r: f64, p: &BoundParams) -> Result<f64> {
    checked(p, r)?;
    let a = p.alpha;
    // ((1+r)/(1-r))^a - 1 = expm1(a * log((1+r)/(1-r))), accurate near r = 0
    let log_ratio = (2.0 * r / (1.0 - r)).ln_1p();
    Ok((1.0 + p.k) / (2.0 * a * (1.0 - p.k)) * (a * log_ratio).exp_m1())
}

/// Exponents `(a, b)` of the covering integrand `(1-x)^a / (1+x)^b`.
pub fn covering_exponents(n: usize, alpha: f64) -> (f64, f64) {
    let n = n as f64;
    let shift = (n - 3.0) / 2.0;
    ((2.0 * n - 1.0) * alpha + shift, (2.0 * n - 1.0) * alpha - shift)
}

/// `int_0^r (1-x)^a / (1+x)^b dx` by adaptive Gauss-Kronrod.
pub fn covering_integral(n: usize, alpha: f64, r: f64) -> Result<numerics::Quadrature> {
    if n == 0 || !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::domain("covering integral needs n >= 1 and finite alpha >= 1"));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("covering radius argument must lie in (0, 1], got {r}")));
    }
    let (a, b) = covering_exponents(n, alpha);
    Ok(numerics::integrate(
        |x| (1.0 - x).powf(a) / (1.0 + x).powf(b),
        0.0,
        r,
        QUADRATURE_TOLERANCE,
    ))
}

/// Lower bound on the radius of the univalent ball around 0 inside
/// `f(B(r))`: `(1-k) |det Dh(0)| / ||Dh(0)||^(n-1) * covering_integral`.
pub fn covering_radius(r: f64, p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let integral = covering_integral(p.n, p.alpha, r)?;
    let prefactor = (1.0 - p.k) * p.det_dh0 / p.norm_dh0.powi(p.n as i32 - 1);
    Ok(prefactor * integral.value)
}

/// One-variable covering radius in closed form:
/// `(1-k) [1 - ((1-r)/(1+r))^alpha] / (2 alpha (1+k))`.
pub fn covering_radius_n1_closed_form(r: f64, alpha: f64, k: f64) -> Result<f64> {
    BoundParams::new(1, alpha, k)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("radius must lie in (0, 1], got {r}")));
    }
    let ratio = (1.0 - r) / (1.0 + r);
    Ok((1.0 - k) * (1.0 - ratio.powf(alpha)) / (2.0 * alpha * (1.0 + k)))
}

/// `|det Dh(0)|` value that turns the general covering prefactor into the
/// one-variable `(1-k)/(1+k)`: the lower bound `1/(1+k)` on `|h'(0)|`.
pub fn n1_covering_bridge(k: f64) -> f64 {
    1.0 / (1.0 + k)
}

/// Lower bound on `|det J_f(z)|`:
/// `(1-k^2)^n |det Dh(0)|^2 (1-r)^(2n alpha - n - 1) / (1+r)^(2n alpha + n + 1)`.
pub fn jacobian_lower_bound(r: f64, p: &BoundParams) -> Result<f64> {
    checked(p, r)?;
    if !(p.det_dh0 > 0.0) {
        return Err(Error::domain("jacobian bound needs |det Dh(0)| > 0"));
    }
    let n = p.n as f64;
    let a = p.alpha;
    Ok((1.0 - p.k * p.k).powf(n) * p.det_dh0 * p.det_dh0 * (1.0 - r).powf(2.0 * n * a - n - 1.0)
        / (1.0 + r).powf(2.0 * n * a + n + 1.0))
}

/// Radius `4 alpha / (1 + 4 alpha^2)` of the ball on which fully starlike maps
/// with `h` of order alpha are bounded away from zero.
pub fn starlike_r0(alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be a finite value >= 1, got {alpha}")));
    }
    Ok(4.0 * alpha / (1.0 + 4.0 * alpha * alpha))
}

/// `r0^2 (1 - r0) |z| / (r0 + |z|)^2` for `|z| < r0`.
pub fn starlike_lower_bound(norm_z: f64, alpha: f64) -> Result<f64> {
    let r0 = starlike_r0(alpha)?;
    if !(norm_z >= 0.0 && norm_z < r0) {
        return Err(Error::domain(format!("|z| must lie in [0, r0 = {r0}), got {norm_z}")));
    }
    Ok(r0 * r0 * (1.0 - r0) * norm_z / ((r0 + norm_z) * (r0 + norm_z)))
}

/// Root `k_n` in (0, 1) of `-4n log(1-k) = (4n-1) k/(1-k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub n: usize,
    pub k_n: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl RootResult {
    /// `k_n` rounded to six significant figures.
    pub fn rounded(&self) -> f64 {
        round_significant(self.k_n, 6)
    }
}

pub fn round_significant(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let e = digits - 1 - magnitude;
    // 10^-e is inexact, so scale down by dividing with the exact 10^e
    if e >= 0 {
        let scale = 10f64.powi(e);
        (x * scale).round() / scale
    } else {
        let scale = 10f64.powi(-e);
        (x / scale).round() * scale
    }
}

/// `F(k) = -4n log(1-k) - (4n-1) k/(1-k)`; positive near 0, `-inf` at 1.
pub fn kn_equation(n: usize, k: f64) -> f64 {
    let n = n as f64;
    -4.0 * n * (-k).ln_1p() - (4.0 * n - 1.0) * k / (1.0 - k)
}

pub fn solve_kn(n: usize) -> Result<RootResult> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let root = numerics::bisect(|k| kn_equation(n, k), KN_BRACKET.0, KN_BRACKET.1, KN_WIDTH, KN_MAX_ITER)
        .expect("F changes sign on the bracket for every n >= 1");
    Ok(RootResult {
        n,
        k_n: root.root,
        residual: root.residual,
        iterations: root.iterations,
    })
}

fn check_qr(c: f64, big_k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::domain(format!("c must lie in [0, 1), got {c}")));
    }
    if !(big_k >= 1.0 && big_k.is_finite()) {
        return Err(Error::domain(format!("K must be a finite value >= 1, got {big_k}")));
    }
    Ok(())
}

/// Radius of a univalent ball inside `f(B^n)` for pluriharmonic `f` with
/// `det J_f(0) = 1`, dilatation at most `c` and `K`-quasiregular `h`.
/// Evaluated in log space so small radii do not underflow prematurely.
pub fn qr_ball_radius(n: usize, c: f64, big_k: f64) -> Result<f64> {
    check_qr(c, big_k)?;
    let kn = solve_kn(n)?.k_n;
    let exponent = 4.0 * n as f64 - 1.0;
    let log_lead = (kn * PI / (8.0 * QR_COVERING_M)).ln();
    let log_base = (kn * PI).ln() + 0.5 * (-c).ln_1p()
        - (4.0 * big_k).ln()
        - 0.5 * c.ln_1p()
        - (-(-kn).ln_1p()).ln();
    Ok((log_lead + exponent * log_base).exp())
}

/// `K_2 = K sqrt((1+c)/(1-c))`: quasiregularity constant of `f` from that of `h`.
pub fn qr_constant_forward(big_k: f64, c: f64, n: usize) -> Result<f64> {
    check_qr(c, big_k)?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok(big_k * ((1.0 + c) / (1.0 - c)).sqrt())
}

/// `K_1 sqrt(1+c^2)/(1-c)`: quasiregularity constant of `h` from that of `f`.
pub fn qr_constant_backward(k1: f64, c: f64, n: usize) -> Result<f64> {
    check_qr(c, k1)?;
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok(k1 * (1.0 + c * c).sqrt() / (1.0 - c))
}
