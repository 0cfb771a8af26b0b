//! Closed-form one-variable extremal mappings for the distortion and covering
//! bounds, plus the Pommerenke-type generator of order alpha.
//!
//! Every family is `s [((1 + qz)/(1 - qz))^alpha - 1]` for a suitable scale `s`
//! and unimodular `q`, paired with `g = +-k h`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundParams};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mapping::{ClosedFormModel, HolomorphicModel, MapModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalFamily {
    /// `f = h - k conj(h)`, attains the upper distortion bound along `z = r e^{it}`.
    UpperThm2,
    /// `f = h* + k conj(h*)`, attains the lower distortion bound along `z = r e^{it}`.
    LowerThm2,
    /// `f = h + k conj(h)` with `h` built on `(1 +- iz)/(1 -+ iz)` raised to alpha.
    CoveringThm4,
    /// The covering family with the exponent alpha dropped, kept for comparison.
    CoveringThm4Literal,
    /// `h = [((1+z)/(1-z))^alpha - 1] / (2 alpha)`, `g = 0`.
    Pommerenke,
}

impl ExtremalFamily {
    pub const ALL: [ExtremalFamily; 5] = [
        ExtremalFamily::UpperThm2,
        ExtremalFamily::LowerThm2,
        ExtremalFamily::CoveringThm4,
        ExtremalFamily::CoveringThm4Literal,
        ExtremalFamily::Pommerenke,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ExtremalFamily::UpperThm2 => "upper_thm2",
            ExtremalFamily::LowerThm2 => "lower_thm2",
            ExtremalFamily::CoveringThm4 => "covering_thm4",
            ExtremalFamily::CoveringThm4Literal => "covering_thm4_literal",
            ExtremalFamily::Pommerenke => "pommerenke",
        }
    }
}

impl fmt::Display for ExtremalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ExtremalFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExtremalFamily::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::BadSpec(format!("unknown extremal family '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSpec {
    pub family: ExtremalFamily,
    pub alpha: f64,
    pub k: f64,
    /// rotation angle of the distortion families
    #[serde(default)]
    pub t: f64,
    /// +1 or -1, selects `(1 + iz)/(1 - iz)` or `(1 - iz)/(1 + iz)` for the covering families
    #[serde(default = "default_sign")]
    pub sign: i8,
}

fn default_sign() -> i8 {
    1
}

impl ExtremalSpec {
    pub fn new(family: ExtremalFamily, alpha: f64, k: f64) -> Self {
        Self {
            family,
            alpha,
            k,
            t: 0.0,
            sign: 1,
        }
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = sign;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::BadSpec(format!("alpha must be a finite value >= 1, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.k) {
            return Err(Error::BadSpec(format!("k must lie in [0, 1), got {}", self.k)));
        }
        if self.family == ExtremalFamily::Pommerenke && self.k != 0.0 {
            return Err(Error::BadSpec("the pommerenke family has g = 0; k must be 0".into()));
        }
        if !self.t.is_finite() {
            return Err(Error::BadSpec("t must be finite".into()));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::BadSpec(format!("sign must be +1 or -1, got {}", self.sign)));
        }
        Ok(())
    }

    /// Builtin identifier, e.g. `builtin:upper_thm2?alpha=2&k=0.5&t=0`.
    pub fn builtin_id(&self) -> String {
        let mut id = format!("builtin:{}?alpha={}&k={}", self.family, self.alpha, self.k);
        match self.family {
            ExtremalFamily::UpperThm2 | ExtremalFamily::LowerThm2 => id.push_str(&format!("&t={}", self.t)),
            ExtremalFamily::CoveringThm4 | ExtremalFamily::CoveringThm4Literal => {
                id.push_str(&format!("&sign={}", self.sign))
            }
            ExtremalFamily::Pommerenke => {
                id = format!("builtin:pommerenke?alpha={}", self.alpha);
            }
        }
        id
    }

    /// The holomorphic part `h` as a closed-form model.
    pub fn holomorphic_part(&self) -> Result<ClosedFormModel> {
        self.validate()?;
        let (alpha, k) = (self.alpha, self.k);
        let rot = Complex64::from_polar(1.0, self.t);
        let i_sign = Complex64::new(0.0, self.sign as f64);
        match self.family {
            ExtremalFamily::UpperThm2 => {
                ClosedFormModel::power_ratio(rot / (2.0 * alpha * (1.0 - k)), rot.conj(), alpha)
            }
            // ((1 - u)/(1 + u))^alpha with u = z e^{-it} is the power ratio at q = -e^{-it}
            ExtremalFamily::LowerThm2 => {
                ClosedFormModel::power_ratio(rot / (2.0 * alpha * (1.0 + k)), -rot.conj(), alpha)
            }
            ExtremalFamily::CoveringThm4 => {
                ClosedFormModel::power_ratio(i_sign / (2.0 * alpha * (1.0 + k)), i_sign, alpha)
            }
            ExtremalFamily::CoveringThm4Literal => {
                ClosedFormModel::power_ratio(i_sign / (2.0 * alpha * (1.0 + k)), i_sign, 1.0)
            }
            ExtremalFamily::Pommerenke => {
                ClosedFormModel::power_ratio(Complex64::new(0.5 / alpha, 0.0), Complex64::new(1.0, 0.0), alpha)
            }
        }
    }

    /// Multiplier `lambda` with `g = lambda h`.
    fn co_analytic_factor(&self) -> f64 {
        match self.family {
            ExtremalFamily::UpperThm2 => -self.k,
            ExtremalFamily::Pommerenke => 0.0,
            _ => self.k,
        }
    }
}

/// Builds the `n = 1` extremal map of the given family.
pub fn build_extremal(spec: &ExtremalSpec) -> Result<MapModel> {
    let h = spec.holomorphic_part()?;
    let g = h.scaled(Complex64::new(spec.co_analytic_factor(), 0.0));
    MapModel::new(
        HolomorphicModel::ClosedForm(h),
        HolomorphicModel::ClosedForm(g),
        spec.builtin_id(),
    )
}

fn check_open_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

/// `|Lambda_f(r e^{it}) - distortion_upper(r)|` for the upper extremal map.
pub fn sharpness_gap_upper(alpha: f64, k: f64, t: f64, r: f64) -> Result<f64> {
    check_open_radius(r)?;
    let f = build_extremal(&ExtremalSpec::new(ExtremalFamily::UpperThm2, alpha, k).with_t(t))?;
    let z = [Complex64::from_polar(r, t)];
    let (big, _) = f.lambda_extremes(&z)?;
    let p = BoundParams::new(1, alpha, k)?;
    Ok((big - bounds::distortion_upper(r, &p)?).abs())
}

/// Gap between the smallest directional derivative `lambda_f(r e^{it})` of
/// the lower extremal map and the lower distortion bound evaluated with
/// `||[Dh(0)]^-1||` read off the map.
///
/// For `f = h* + k conj(h*)` the directional derivatives range over
/// `[(1-k)|h*'|, (1+k)|h*'|]`; only the minimum meets the lower bound.
pub fn sharpness_gap_lower(alpha: f64, k: f64, t: f64, r: f64) -> Result<f64> {
    check_open_radius(r)?;
    let f = build_extremal(&ExtremalSpec::new(ExtremalFamily::LowerThm2, alpha, k).with_t(t))?;
    let z = [Complex64::from_polar(r, t)];
    let (_, small) = f.lambda_extremes(&z)?;
    let dh0 = f.derivatives(&[Complex64::new(0.0, 0.0)])?.dh;
    let p = BoundParams::new(1, alpha, k)?.with_dh0(&dh0)?;
    Ok((small - bounds::distortion_lower(r, &p)?).abs())
}

/// Outcome of [`covering_sharpness_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCheck {
    pub spec: ExtremalSpec,
    pub r: f64,
    /// point on `|z| = r` where `h` is closest to 0
    pub critical_point: [f64; 2],
    /// `|f(critical_point)|`
    pub distance: f64,
    /// smallest `|f|` over the sampled circle `|z| = r`
    pub sampled_min: f64,
    /// one-variable closed-form covering radius
    pub expected: f64,
    pub gap: f64,
    /// `|Dh(0) + conj(Dg(0))|`; equals 1 for members of PH(alpha, k)
    pub normalization: f64,
}

impl CoveringCheck {
    pub fn attains(&self, tol: f64) -> bool {
        self.gap <= tol
    }
}

const COVERING_CIRCLE_SAMPLES: usize = 4096;

/// Distance from 0 of the image of `|z| = r` under the covering extremal,
/// compared with the closed-form covering radius. Works for the literal
/// variant too, whose result is reported as is.
pub fn covering_sharpness_check(spec: &ExtremalSpec, r: f64) -> Result<CoveringCheck> {
    if !matches!(spec.family, ExtremalFamily::CoveringThm4 | ExtremalFamily::CoveringThm4Literal) {
        return Err(Error::BadSpec(format!("{} is not a covering family", spec.family)));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("radius must lie in (0, 1), got {r}")));
    }
    let f = build_extremal(spec)?;
    // q z = -r, i.e. z = sign * i r
    let critical = Complex64::new(0.0, spec.sign as f64 * r);
    let distance = f.evaluate(&[critical])?[0].norm();
    let mut sampled_min = distance;
    for j in 0..COVERING_CIRCLE_SAMPLES {
        let angle = 2.0 * std::f64::consts::PI * j as f64 / COVERING_CIRCLE_SAMPLES as f64;
        let v = f.evaluate(&[Complex64::from_polar(r, angle)])?[0].norm();
        sampled_min = sampled_min.min(v);
    }
    let expected = bounds::covering_radius_n1_closed_form(r, spec.alpha, spec.k)?;
    let d0 = f.derivatives(&[Complex64::new(0.0, 0.0)])?;
    let normalization = linalg::operator_norm(&(&d0.dh + &d0.dg.conj()));
    Ok(CoveringCheck {
        spec: *spec,
        r,
        critical_point: [critical.re, critical.im],
        distance,
        sampled_min,
        expected,
        gap: (distance - expected).abs(),
        normalization,
    })
}

/// Angle on which the growth bound is attained by the upper extremal map: with
/// `t = pi/2` the map `h - k conj(h)` is `(1+k) h` along `z = r e^{it}`.
pub const GROWTH_EXTREMAL_ANGLE: f64 = FRAC_PI_2;
