//! Seeded sampling harness for the distortion, growth, Jacobian, dilatation,
//! starlikeness and quasiregularity inequalities.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundParams};
use crate::error::{Error, Result};
use crate::lif::check_membership_ph;
use crate::linalg::{self, vec_norm, CMatrix};
use crate::mapping::{HolomorphicModel, MapModel, MultiIndex, PolynomialModel};
use crate::report::{CheckEntry, Summary, VerificationReport};

/// Relative tolerance for closed-form identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Bound on `||Dg(0)||` below which `Dg(0)` counts as zero.
pub const DG0_ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub points_per_radius: usize,
    pub radii: Vec<f64>,
    pub directions_per_point: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            points_per_radius: 32,
            radii: vec![0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.95],
            directions_per_point: 8,
        }
    }
}

/// A sample point; index 0 is the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub radius: f64,
    pub z: Vec<Complex64>,
}

/// Gaussian vector in C^n normalized to the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = vec_norm(&v);
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

impl SampleConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_radius == 0 || self.directions_per_point == 0 || self.radii.is_empty() {
            return Err(Error::BadSpec("sample counts and the radius list must be nonempty".into()));
        }
        if let Some(r) = self.radii.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::BadSpec(format!("sample radius {r} is outside (0, 1)")));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// The origin followed by `points_per_radius` sphere points per radius.
    pub fn points(&self, n: usize) -> Result<Vec<Sample>> {
        self.validate()?;
        let mut rng = self.rng(0);
        let mut out = vec![Sample {
            index: 0,
            radius: 0.0,
            z: vec![Complex64::new(0.0, 0.0); n],
        }];
        for &r in &self.radii {
            for _ in 0..self.points_per_radius {
                let u = random_unit_vector(&mut rng, n);
                out.push(Sample {
                    index: out.len(),
                    radius: r,
                    z: u.into_iter().map(|x| x * r).collect(),
                });
            }
        }
        Ok(out)
    }

    /// `directions_per_point` unit directions for each of `count` samples.
    pub fn directions(&self, n: usize, count: usize) -> Vec<Vec<Vec<Complex64>>> {
        let mut rng = self.rng(1);
        (0..count)
            .map(|_| (0..self.directions_per_point).map(|_| random_unit_vector(&mut rng, n)).collect())
            .collect()
    }

    pub fn sample_count(&self) -> usize {
        1 + self.radii.len() * self.points_per_radius
    }
}

fn refuted_message(report: &VerificationReport) -> String {
    let failed: Vec<String> = report
        .failures()
        .map(|e| format!("{}[{}]", e.check, e.index))
        .take(8)
        .collect();
    format!(
        "{} of {} membership checks failed: {}",
        report.summary.total - report.summary.passed,
        report.summary.total,
        failed.join(", ")
    )
}

/// Runs the membership check and turns a refutation into an error.
fn membership_gate(map: &MapModel, alpha: f64, k: f64, config: &SampleConfig) -> Result<Summary> {
    let report = check_membership_ph(map, alpha, k, config);
    if report.all_passed() {
        Ok(report.summary)
    } else {
        Err(Error::MembershipRefuted(refuted_message(&report)))
    }
}

fn map_params(map: &MapModel, alpha: f64, k: f64) -> Result<BoundParams> {
    let zero = vec![Complex64::new(0.0, 0.0); map.dim()];
    BoundParams::new(map.dim(), alpha, k)?.with_dh0(&map.derivatives(&zero)?.dh)
}

fn per_sample<F>(points: &[Sample], f: F) -> Vec<CheckEntry>
where
    F: Fn(&Sample) -> Vec<CheckEntry> + Sync + Send,
{
    points.par_iter().map(f).collect::<Vec<_>>().into_iter().flatten().collect()
}

fn suite_report(map: &MapModel, suite: &str, entries: Vec<CheckEntry>, config: &SampleConfig) -> VerificationReport {
    VerificationReport::new(map.provenance(), suite, entries).with_config(config)
}

/// `distortion_lower(|z|) <= Lambda_f(z) <= distortion_upper(|z|)`, plus the
/// upper bound on each sampled directional derivative.
pub fn verify_distortion(map: &MapModel, alpha: f64, k: f64, config: &SampleConfig) -> Result<VerificationReport> {
    let membership = membership_gate(map, alpha, k, config)?;
    let p = map_params(map, alpha, k)?;
    let points = config.points(map.dim())?;
    let dirs = config.directions(map.dim(), points.len());
    let m = config.directions_per_point;
    let entries = per_sample(&points, |s| {
        let lower = bounds::distortion_lower(s.radius, &p);
        let upper = bounds::distortion_upper(s.radius, &p);
        let (Ok(lower), Ok(upper)) = (lower, upper) else {
            return vec![CheckEntry::failure("distortion.upper", s.index, &s.z, "bound undefined")];
        };
        let (big, _) = match map.lambda_extremes(&s.z) {
            Ok(v) => v,
            Err(e) => return vec![CheckEntry::failure("distortion.upper", s.index, &s.z, e.to_string())],
        };
        let mut out = vec![
            CheckEntry::le("distortion.lower", s.index, &s.z, lower, big),
            CheckEntry::le("distortion.upper", s.index, &s.z, big, upper),
        ];
        for (j, theta) in dirs[s.index].iter().enumerate() {
            let idx = s.index * m + j;
            match map.directional_derivative(&s.z, theta) {
                Ok(d) => out.push(CheckEntry::le("distortion.directional", idx, &s.z, vec_norm(&d), upper)),
                Err(e) => out.push(CheckEntry::failure("distortion.directional", idx, &s.z, e.to_string())),
            }
        }
        out
    });
    Ok(suite_report(map, "distortion", entries, config).with_membership(membership))
}

/// `||f(z)|| <= growth_bound(|z|)`.
pub fn verify_growth(map: &MapModel, alpha: f64, k: f64, config: &SampleConfig) -> Result<VerificationReport> {
    let membership = membership_gate(map, alpha, k, config)?;
    let p = BoundParams::new(map.dim(), alpha, k)?;
    let points = config.points(map.dim())?;
    let entries = per_sample(&points, |s| {
        let entry = match (map.evaluate(&s.z), bounds::growth_bound(s.radius, &p)) {
            (Ok(f), Ok(bound)) => CheckEntry::le("growth", s.index, &s.z, vec_norm(&f), bound),
            (Err(e), _) | (_, Err(e)) => CheckEntry::failure("growth", s.index, &s.z, e.to_string()),
        };
        vec![entry]
    });
    Ok(suite_report(map, "growth", entries, config).with_membership(membership))
}

/// `|det J_f(z)| >= jacobian_lower_bound(|z|)` with `|det Dh(0)|` read off the map.
pub fn verify_jacobian_bound(map: &MapModel, alpha: f64, k: f64, config: &SampleConfig) -> Result<VerificationReport> {
    let membership = membership_gate(map, alpha, k, config)?;
    let p = map_params(map, alpha, k)?;
    let points = config.points(map.dim())?;
    let entries = per_sample(&points, |s| {
        let entry = match (map.det_jacobian(&s.z), bounds::jacobian_lower_bound(s.radius, &p)) {
            (Ok(det), Ok(bound)) => CheckEntry::le("jacobian", s.index, &s.z, bound, det.abs()),
            (Err(e), _) | (_, Err(e)) => CheckEntry::failure("jacobian", s.index, &s.z, e.to_string()),
        };
        vec![entry]
    });
    Ok(suite_report(map, "jacobian", entries, config).with_membership(membership))
}

fn relative_difference(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
}

/// Factored determinant and the complex block determinant against the
/// determinant of the real Jacobian, relative error at most `1e-9`.
pub fn verify_det_factorization(map: &MapModel, config: &SampleConfig) -> Result<VerificationReport> {
    let points = config.points(map.dim())?;
    let entries = per_sample(&points, |s| {
        let direct = match map.real_jacobian(&s.z) {
            Ok(j) => j.det(),
            Err(e) => return vec![CheckEntry::failure("det_factorization", s.index, &s.z, e.to_string())],
        };
        let factored = match map.det_jacobian(&s.z) {
            Ok(d) => CheckEntry::with_tolerance(
                "det_factorization",
                s.index,
                &s.z,
                relative_difference(d, direct),
                0.0,
                IDENTITY_TOLERANCE,
            ),
            Err(e) => CheckEntry::failure("det_factorization", s.index, &s.z, e.to_string()),
        };
        let block = match map.block_det(&s.z) {
            Ok(b) => CheckEntry::with_tolerance(
                "det_factorization.block",
                s.index,
                &s.z,
                (b - direct).norm() / direct.abs().max(b.norm()).max(f64::MIN_POSITIVE),
                0.0,
                IDENTITY_TOLERANCE,
            ),
            Err(e) => CheckEntry::failure("det_factorization.block", s.index, &s.z, e.to_string()),
        };
        vec![factored, block]
    });
    Ok(suite_report(map, "det_factorization", entries, config))
}

/// `||Dg(z) [Dh(z)]^-1|| <= ||z||` for maps with `Dg(0) = 0`.
pub fn verify_schwarz_dilatation(map: &MapModel, config: &SampleConfig) -> Result<VerificationReport> {
    let zero = vec![Complex64::new(0.0, 0.0); map.dim()];
    let dg0 = map.derivatives(&zero)?.dg.operator_norm();
    if dg0 > DG0_ZERO_TOLERANCE {
        return Err(Error::PreconditionFailed(format!("||Dg(0)|| = {dg0:e} is not zero")));
    }
    let points = config.points(map.dim())?;
    let entries = per_sample(&points, |s| {
        let entry = match map.dilatation_norm(&s.z) {
            Ok(kappa) if kappa < 1.0 => CheckEntry::le("schwarz_dilatation", s.index, &s.z, kappa, s.radius),
            Ok(kappa) => CheckEntry::failure(
                "schwarz_dilatation",
                s.index,
                &s.z,
                format!("dilatation {kappa} is not below 1"),
            ),
            Err(e) => CheckEntry::failure("schwarz_dilatation", s.index, &s.z, e.to_string()),
        };
        vec![entry]
    });
    Ok(suite_report(map, "schwarz_dilatation", entries, config))
}

const STARLIKE_HYPOTHESIS: &str = "conditional on declared hypothesis: f is fully starlike";

/// `||h(z)|| <= ||f(z)|| / (1 - r)` on the closed ball of radius `r`. The
/// sample points are the configured points scaled by `r`, together with
/// their radial projections onto the sphere of radius `r`.
pub fn verify_starlike_hbound(map: &MapModel, r: f64, config: &SampleConfig) -> Result<VerificationReport> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius must lie in [0, 1), got {r}")));
    }
    let points = config.points(map.dim())?;
    let count = points.len();
    let entries = per_sample(&points, |s| {
        let mut zs = vec![(s.index, s.z.iter().map(|x| x * r).collect::<Vec<_>>())];
        if s.radius > 0.0 {
            zs.push((count + s.index, s.z.iter().map(|x| x * (r / s.radius)).collect()));
        }
        zs.into_iter()
            .map(|(idx, z)| match (map.h_value(&z), map.evaluate(&z)) {
                (Ok(h), Ok(f)) => CheckEntry::le("starlike_hbound", idx, &z, vec_norm(&h), vec_norm(&f) / (1.0 - r)),
                (Err(e), _) | (_, Err(e)) => CheckEntry::failure("starlike_hbound", idx, &z, e.to_string()),
            })
            .collect()
    });
    Ok(suite_report(map, "starlike_hbound", entries, config).with_hypothesis(STARLIKE_HYPOTHESIS))
}

/// `||f(z)|| >= starlike_lower_bound(||z||, alpha)` and `f(z) != 0` on the
/// configured points scaled into the ball of radius `starlike_r0(alpha)`.
pub fn verify_starlike_lower(map: &MapModel, alpha: f64, config: &SampleConfig) -> Result<VerificationReport> {
    let r0 = bounds::starlike_r0(alpha)?;
    let points = config.points(map.dim())?;
    let entries = per_sample(&points, |s| {
        let z: Vec<Complex64> = s.z.iter().map(|x| x * r0).collect();
        let rz = s.radius * r0;
        let f = match map.evaluate(&z) {
            Ok(f) => vec_norm(&f),
            Err(e) => return vec![CheckEntry::failure("starlike_lower", s.index, &z, e.to_string())],
        };
        let mut out = vec![match bounds::starlike_lower_bound(rz, alpha) {
            Ok(bound) => CheckEntry::le("starlike_lower", s.index, &z, bound, f),
            Err(e) => CheckEntry::failure("starlike_lower", s.index, &z, e.to_string()),
        }];
        if s.index > 0 {
            out.push(CheckEntry::with_tolerance(
                "starlike_lower.nonvanishing",
                s.index,
                &z,
                f64::MIN_POSITIVE,
                f,
                0.0,
            ));
        }
        out
    });
    Ok(suite_report(map, "starlike_lower", entries, config)
        .with_hypothesis(format!("{STARLIKE_HYPOTHESIS}; [Dh(0)]^-1 h has norm order at most {alpha}")))
}

struct QrSample {
    index: usize,
    z: Vec<Complex64>,
    big_lambda: f64,
    det_j: f64,
    norm_dh: f64,
    det_dh: f64,
    kappa: f64,
}

fn qr_samples(map: &MapModel, config: &SampleConfig) -> Result<Vec<QrSample>> {
    let n = map.dim();
    let points = config.points(n)?;
    let samples: Vec<Result<QrSample>> = points
        .par_iter()
        .map(|s| {
            let d = map.derivatives(&s.z)?;
            let (big_lambda, _) = map.lambda_extremes(&s.z)?;
            let det_j = linalg::det(&map.real_jacobian(&s.z)?);
            if !(det_j > 0.0) {
                return Err(Error::DegenerateJacobian {
                    det: det_j,
                    index: s.index,
                });
            }
            let inv = linalg::invert(&d.dh)?;
            Ok(QrSample {
                index: s.index,
                z: s.z.clone(),
                big_lambda,
                det_j,
                norm_dh: d.dh.operator_norm(),
                det_dh: d.dh.det().norm(),
                kappa: d.dg.matmul(&inv).operator_norm(),
            })
        })
        .collect();
    samples.into_iter().collect()
}

/// Sample supremum of `Lambda_f(z)^{2n} / det J_f(z)`.
pub fn estimate_qr_constant(map: &MapModel, config: &SampleConfig) -> Result<f64> {
    let n = map.dim() as i32;
    let samples = qr_samples(map, config)?;
    Ok(samples
        .iter()
        .map(|s| s.big_lambda.powi(2 * n) / s.det_j)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// The two implications between quasiregularity of `h` and of `f` at each
/// sample, for dilatation at most `c`.
///
/// forward: `Lambda_f <= K_h sqrt((1+c)/(1-c)) |det J_f|^{1/(2n)}` with
/// `K_h = sup ||Dh|| / |det Dh|^{1/n}`;
/// backward: `||Dh|| <= K_1 sqrt(1+c^2)/(1-c) |det Dh|^{1/n}` with
/// `K_1 = sup Lambda_f / |det J_f|^{1/(2n)}`.
pub fn verify_thm6_equivalence(map: &MapModel, c: f64, config: &SampleConfig) -> Result<VerificationReport> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::domain(format!("c must lie in [0, 1), got {c}")));
    }
    let n = map.dim();
    let nf = n as f64;
    let samples = qr_samples(map, config)?;
    if let Some(s) = samples.iter().find(|s| s.kappa > c + IDENTITY_TOLERANCE) {
        return Err(Error::DilatationCapViolated {
            value: s.kappa,
            cap: c,
            index: s.index,
        });
    }
    let k_h = samples
        .iter()
        .map(|s| s.norm_dh / s.det_dh.powf(1.0 / nf))
        .fold(1.0, f64::max);
    let k_1 = samples
        .iter()
        .map(|s| s.big_lambda / s.det_j.powf(0.5 / nf))
        .fold(1.0, f64::max);
    let k_2 = bounds::qr_constant_forward(k_h, c, n)?;
    let k_back = bounds::qr_constant_backward(k_1, c, n)?;
    let level = k_2.powi(2 * n as i32);
    let mut entries = Vec::with_capacity(3 * samples.len());
    for s in &samples {
        entries.push(CheckEntry::le(
            "thm6.forward",
            s.index,
            &s.z,
            s.big_lambda,
            k_2 * s.det_j.powf(0.5 / nf),
        ));
        entries.push(CheckEntry::le(
            "thm6.backward",
            s.index,
            &s.z,
            s.norm_dh,
            k_back * s.det_dh.powf(1.0 / nf),
        ));
        entries.push(CheckEntry::le(
            "thm6.qr_level",
            s.index,
            &s.z,
            s.big_lambda.powi(2 * n as i32) / s.det_j,
            level,
        ));
    }
    Ok(suite_report(map, "thm6", entries, config).with_hypothesis(format!(
        "sampled constants are lower estimates: K_h = {k_h}, K_1 = {k_1}"
    )))
}

fn random_coefficient<R: Rng + ?Sized>(rng: &mut R, n: usize, max_norm: f64) -> Vec<Complex64> {
    let scale = max_norm * rng.random::<f64>();
    random_unit_vector(rng, n).into_iter().map(|x| x * scale).collect()
}

fn random_monomial<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MultiIndex {
    let degree = rng.random_range(2..=3u32);
    let mut e = vec![0u32; n];
    for _ in 0..degree {
        e[rng.random_range(0..n)] += 1;
    }
    MultiIndex::new(e)
}

fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, n: usize, base: &CMatrix) -> PolynomialModel {
    let mut p = PolynomialModel::linear(base);
    for _ in 0..3 {
        let beta = random_monomial(rng, n);
        let coeff = random_coefficient(rng, n, 0.1);
        p.add_term(beta, coeff);
    }
    p
}

/// Random map with `h = z + ` three monomials of degree 2 or 3 and
/// coefficients of norm at most 0.1, and `g` rescaled so the dilatation on
/// the default sample points equals `cap`.
pub fn random_polynomial_map<R: Rng + ?Sized>(rng: &mut R, n: usize, cap: f64) -> Result<MapModel> {
    if !(0.0..1.0).contains(&cap) {
        return Err(Error::domain(format!("dilatation cap must lie in [0, 1), got {cap}")));
    }
    let h = random_polynomial(rng, n, &CMatrix::identity(n));
    let w = CMatrix::from_fn(n, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let w_norm = w.operator_norm().max(f64::MIN_POSITIVE);
    let g0 = random_polynomial(rng, n, &w.scale(Complex64::new(1.0 / w_norm, 0.0)));
    let map0 = MapModel::new(
        HolomorphicModel::Polynomial(h.clone()),
        HolomorphicModel::Polynomial(g0.clone()),
        "random_polynomial",
    )?;
    let probe = SampleConfig::default().points(n)?;
    let mut kappa_max: f64 = 0.0;
    for s in &probe {
        kappa_max = kappa_max.max(map0.dilatation_norm(&s.z)?);
    }
    let factor = if kappa_max > 0.0 { cap / kappa_max } else { 0.0 };
    MapModel::new(
        HolomorphicModel::Polynomial(h),
        HolomorphicModel::Polynomial(g0.scaled(Complex64::new(factor, 0.0))),
        "random_polynomial",
    )
}

/// Holomorphic `g` with `g' = z h'` for a one-variable polynomial `h`, so
/// that the dilatation of `h + conj(g)` is `|z|`.
pub fn schwarz_partner(h: &PolynomialModel) -> Result<PolynomialModel> {
    if h.dim() != 1 {
        return Err(Error::Unsupported("schwarz_partner is defined for n = 1".into()));
    }
    let mut terms = BTreeMap::new();
    for (beta, coeff) in h.terms() {
        let m = beta.exponents()[0];
        if m == 0 {
            continue;
        }
        // z * m c z^{m-1} integrates to m c z^{m+1} / (m+1)
        terms.insert(
            MultiIndex::new(vec![m + 1]),
            vec![coeff[0] * (m as f64 / (m as f64 + 1.0))],
        );
    }
    PolynomialModel::new(1, terms)
}
