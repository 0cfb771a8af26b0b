//! Ball automorphisms, Koebe transforms, norm order and membership checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, vec_norm, CMatrix};
use crate::mapping::{check_point, BilinearForm, HolomorphicModel, MapModel, PolynomialModel};
use crate::numerics::golden_max;
use crate::report::{CheckEntry, VerificationReport};
use crate::verify::{random_unit_vector, SampleConfig};

/// Normalization tolerance for `h(0) = 0`, `Dh(0) = I`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Slack allowed above the declared order in membership checks.
pub const ORDER_TOLERANCE: f64 = 5e-3;

/// Outermost automorphism center radius reached by refinement.
pub const MAX_CENTER_RADIUS: f64 = 1.0 - 1e-8;

fn dot_h(a: &[Complex64], z: &[Complex64]) -> Complex64 {
    a.iter().zip(z).map(|(x, y)| x.conj() * y).sum()
}

/// The involution `phi_a(z) = (a - P_a z - s Q_a z) / (1 - <z, a>)`,
/// `s = sqrt(1 - |a|^2)`, with `P_a` the projection onto `a` and `Q_a = I - P_a`.
/// At `a = 0` this is `-z`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallAutomorphism {
    a: Vec<Complex64>,
    norm2: f64,
    s: f64,
}

impl BallAutomorphism {
    pub fn new(a: &[Complex64]) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::domain("automorphism center must have dimension >= 1"));
        }
        check_point(a, a.len())?;
        let norm2: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        Ok(Self {
            a: a.to_vec(),
            norm2,
            s: (1.0 - norm2).sqrt(),
        })
    }

    pub fn center(&self) -> &[Complex64] {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `L v = P_a v + s Q_a v`.
    fn l_apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        if self.norm2 == 0.0 {
            return v.to_vec();
        }
        let proj = dot_h(&self.a, v) / self.norm2 * (1.0 - self.s);
        v.iter().zip(&self.a).map(|(x, a)| x * self.s + a * proj).collect()
    }

    fn check_input(&self, z: &[Complex64]) -> Result<()> {
        let n = self.dim();
        if z.len() != n || !z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) || vec_norm(z) >= 1.0 {
            return Err(Error::domain(format!(
                "automorphism argument must be a finite point of the open unit ball of C^{n}"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_input(z)?;
        let d = Complex64::new(1.0, 0.0) - dot_h(&self.a, z);
        let lz = self.l_apply(z);
        Ok(self.a.iter().zip(&lz).map(|(a, l)| (a - l) / d).collect())
    }

    /// `D phi(z) = -L/d + (a - L z) a^H / d^2` with `d = 1 - a^H z`.
    pub fn derivative(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.check_input(z)?;
        let n = self.dim();
        let d = Complex64::new(1.0, 0.0) - dot_h(&self.a, z);
        let lz = self.l_apply(z);
        let num: Vec<Complex64> = self.a.iter().zip(&lz).map(|(a, l)| a - l).collect();
        let l = self.l_matrix();
        let d2 = d * d;
        Ok(CMatrix::from_fn(n, |i, j| -l[(i, j)] / d + num[i] * self.a[j].conj() / d2))
    }

    fn l_matrix(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, |i, j| {
            let e: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0))
                .collect();
            self.l_apply(&e)[i]
        })
    }

    /// `D phi(0) = -(1 - |a|^2) P_a - s Q_a`.
    pub fn derivative_at_zero(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, |i, j| {
            let id = if i == j { self.s } else { 0.0 };
            let p = if self.norm2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                self.a[i] * self.a[j].conj() / self.norm2
            };
            -(Complex64::new(id, 0.0) + p * ((1.0 - self.norm2) - self.s))
        })
    }

    /// `D^2 phi(0)(theta, eta) = 2 (a^H theta)(a^H eta) a - (a^H eta) L theta - (a^H theta) L eta`.
    pub fn second_derivative_at_zero(&self, theta: &[Complex64], eta: &[Complex64]) -> Vec<Complex64> {
        let at = dot_h(&self.a, theta);
        let ae = dot_h(&self.a, eta);
        let lt = self.l_apply(theta);
        let le = self.l_apply(eta);
        (0..self.dim())
            .map(|i| 2.0 * at * ae * self.a[i] - ae * lt[i] - at * le[i])
            .collect()
    }
}

pub fn ball_automorphism(a: &[Complex64]) -> Result<BallAutomorphism> {
    BallAutomorphism::new(a)
}

/// `T(z) = [D phi(0)]^-1 [Dh(phi(0))]^-1 [h(phi(z)) - h(phi(0))]`.
#[derive(Clone, Debug)]
pub struct KoebeTransform {
    h: HolomorphicModel,
    phi: BallAutomorphism,
    m_inv: CMatrix,
    h_at_center: Vec<Complex64>,
}

pub fn koebe_transform(h: &HolomorphicModel, phi: &BallAutomorphism) -> Result<KoebeTransform> {
    if h.dim() != phi.dim() {
        return Err(Error::domain(format!(
            "automorphism of C^{} cannot be composed with a map of C^{}",
            phi.dim(),
            h.dim()
        )));
    }
    let a = phi.center();
    let m = h.jacobian(a).matmul(&phi.derivative_at_zero());
    Ok(KoebeTransform {
        h: h.clone(),
        phi: phi.clone(),
        m_inv: linalg::invert(&m)?,
        h_at_center: h.value(a),
    })
}

impl KoebeTransform {
    pub fn automorphism(&self) -> &BallAutomorphism {
        &self.phi
    }

    pub fn value(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let w = self.phi.apply(z)?;
        let diff: Vec<Complex64> = self.h.value(&w).iter().zip(&self.h_at_center).map(|(x, y)| x - y).collect();
        Ok(self.m_inv.mul_vec(&diff))
    }

    pub fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        let w = self.phi.apply(z)?;
        Ok(self.m_inv.matmul(&self.h.jacobian(&w)).matmul(&self.phi.derivative(z)?))
    }

    /// `D^2 T(0)(theta, eta) = M^-1 [D^2 h(a)(Dphi(0) theta, Dphi(0) eta) + Dh(a) D^2 phi(0)(theta, eta)]`.
    pub fn second_derivative_at_zero(&self) -> BilinearForm {
        let a = self.phi.center();
        let n = self.phi.dim();
        let dphi = self.phi.derivative_at_zero();
        let hess = self.h.hessian(a);
        let dh = self.h.jacobian(a);
        let basis = |j: usize| -> Vec<Complex64> {
            (0..n)
                .map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        };
        BilinearForm::from_basis_values(n, |j, l| {
            let (ej, el) = (basis(j), basis(l));
            let first = hess.apply(&dphi.mul_vec(&ej), &dphi.mul_vec(&el));
            let second = dh.mul_vec(&self.phi.second_derivative_at_zero(&ej, &el));
            let sum: Vec<Complex64> = first.iter().zip(&second).map(|(x, y)| x + y).collect();
            self.m_inv.mul_vec(&sum)
        })
    }
}

/// `[Dh(0)]^-1 (h - h(0))`.
pub fn normalize_holomorphic(h: &HolomorphicModel) -> Result<HolomorphicModel> {
    let n = h.dim();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let inv = linalg::invert(&h.jacobian(&zero))?;
    match h {
        HolomorphicModel::ClosedForm(c) => {
            if c.value(zero[0]).norm() != 0.0 {
                return Err(Error::Unsupported("closed-form model with h(0) != 0".into()));
            }
            Ok(HolomorphicModel::ClosedForm(c.scaled(inv[(0, 0)])))
        }
        HolomorphicModel::Polynomial(p) => {
            let terms: BTreeMap<_, _> = p
                .terms()
                .iter()
                .filter(|(beta, _)| beta.degree() > 0)
                .map(|(beta, coeff)| (beta.clone(), inv.mul_vec(coeff)))
                .collect();
            Ok(HolomorphicModel::Polynomial(PolynomialModel::new(n, terms)?))
        }
    }
}

/// Largest deviation of `h` from the normalization `h(0) = 0`, `Dh(0) = I`.
pub fn normalization_defect(h: &HolomorphicModel) -> f64 {
    let n = h.dim();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let value = vec_norm(&h.value(&zero));
    let jac = &h.jacobian(&zero) - &CMatrix::identity(n);
    value.max(jac.operator_norm())
}

/// Sample budget of [`norm_order_estimate`]. Stage `s` uses a radial grid of
/// spacing `0.1 / (s + 1)` on `[0, 0.9]` and `16 (s + 1)` phases per direction;
/// the estimate is the maximum over stages `0..=level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderBudget {
    pub level: u32,
}

impl Default for OrderBudget {
    fn default() -> Self {
        Self { level: 1 }
    }
}

impl OrderBudget {
    pub fn new(level: u32) -> Self {
        Self { level }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub value: f64,
    pub samples_used: usize,
    /// automorphism center `a` and unit direction `theta` of the best sample
    pub max_attained_at: (Vec<Complex64>, Vec<Complex64>),
}

const GOLDEN_ITERATIONS: usize = 60;
const ASCENT_ITERATIONS: usize = 30;

fn diagonal_value(form: &BilinearForm, theta: &[Complex64]) -> f64 {
    0.5 * vec_norm(&form.apply(theta, theta))
}

/// `(1/2) sup_theta ||B(theta, theta)||` from a candidate set refined by a
/// fixed-point ascent on the sphere.
fn diagonal_sup(form: &BilinearForm, candidates: &[Vec<Complex64>]) -> (f64, Vec<Complex64>) {
    let n = form.dim();
    if n == 1 {
        return (0.5 * form.at(0, 0, 0).norm(), vec![Complex64::new(1.0, 0.0)]);
    }
    let mut best = (f64::NEG_INFINITY, candidates[0].clone());
    for c in candidates {
        let v = diagonal_value(form, c);
        if v > best.0 {
            best = (v, c.clone());
        }
    }
    let mut theta = best.1.clone();
    for _ in 0..ASCENT_ITERATIONS {
        let v = form.apply(&theta, &theta);
        let w: Vec<Complex64> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let bij: Complex64 = (0..n).map(|l| form.at(i, j, l) * theta[l]).sum();
                        v[i] * bij.conj()
                    })
                    .sum()
            })
            .collect();
        let norm = vec_norm(&w);
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        theta = w.iter().map(|x| x / norm).collect();
        let value = diagonal_value(form, &theta);
        if value > best.0 {
            best = (value, theta.clone());
        }
    }
    best
}

struct OrderSearch<'a> {
    h: &'a HolomorphicModel,
    n: usize,
    thetas: Vec<Vec<Complex64>>,
}

impl OrderSearch<'_> {
    /// Half the diagonal sup of `D^2 T_a(0)`, or `None` when `T_a` is undefined.
    fn evaluate(&self, a: &[Complex64]) -> Option<(f64, Vec<Complex64>)> {
        let phi = BallAutomorphism::new(a).ok()?;
        let t = koebe_transform(self.h, &phi).ok()?;
        let form = t.second_derivative_at_zero();
        let mut candidates = self.thetas.clone();
        let r = vec_norm(a);
        if r > 0.0 {
            candidates.insert(0, a.iter().map(|x| x / r).collect());
        }
        let (value, theta) = diagonal_sup(&form, &candidates);
        value.is_finite().then_some((value, theta))
    }
}

#[derive(Clone)]
struct Best {
    value: f64,
    a: Vec<Complex64>,
    theta: Vec<Complex64>,
}

impl Best {
    fn offer(&mut self, value: f64, a: &[Complex64], theta: Vec<Complex64>) {
        if value > self.value {
            *self = Best {
                value,
                a: a.to_vec(),
                theta,
            };
        }
    }
}

fn scaled(u: &[Complex64], r: f64) -> Vec<Complex64> {
    u.iter().map(|x| x * r).collect()
}

fn rotated(u: &[Complex64], psi: f64) -> Vec<Complex64> {
    let p = Complex64::from_polar(1.0, psi);
    u.iter().map(|x| x * p).collect()
}

/// Grid directions for stage `stage`: phases of each basis vector, plus
/// seeded random unit vectors when `n > 1`.
fn stage_directions(n: usize, stage: u32) -> (Vec<Vec<Complex64>>, usize) {
    let phases = 16 * (stage as usize + 1);
    let mut dirs = Vec::new();
    for j in 0..n {
        for m in 0..phases {
            let mut u = vec![Complex64::new(0.0, 0.0); n];
            u[j] = Complex64::from_polar(1.0, 2.0 * PI * m as f64 / phases as f64);
            dirs.push(u);
        }
    }
    if n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6c69_6600 + stage as u64);
        for _ in 0..phases {
            dirs.push(random_unit_vector(&mut rng, n));
        }
    }
    (dirs, phases)
}

fn stage_thetas(n: usize, stage: u32) -> Vec<Vec<Complex64>> {
    let mut thetas: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    if n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7468_0000 + stage as u64);
        for _ in 0..2 * n {
            thetas.push(random_unit_vector(&mut rng, n));
        }
    }
    thetas
}

fn run_stage(h: &HolomorphicModel, n: usize, stage: u32, best: &mut Best) -> usize {
    let search = OrderSearch {
        h,
        n,
        thetas: stage_thetas(n, stage),
    };
    let radial = 9 * (stage as usize + 1);
    let spacing = 0.9 / radial as f64;
    let (dirs, phases) = stage_directions(n, stage);

    // grid index 0 is a = 0; then radius-major, direction-minor
    let mut grid: Vec<(usize, usize)> = vec![(0, 0)];
    for i in 1..=radial {
        for d in 0..dirs.len() {
            grid.push((i, d));
        }
    }
    let results: Vec<Option<(f64, Vec<Complex64>)>> = grid
        .par_iter()
        .map(|&(i, d)| {
            let a = if i == 0 {
                vec![Complex64::new(0.0, 0.0); search.n]
            } else {
                scaled(&dirs[d], i as f64 * spacing)
            };
            search.evaluate(&a)
        })
        .collect();
    let mut samples = grid.len();

    let mut global: Option<(f64, usize)> = None;
    let mut outer: Option<(f64, usize)> = None;
    for (idx, res) in results.iter().enumerate() {
        let Some((v, _)) = res else { continue };
        if global.is_none_or(|(b, _)| *v > b) {
            global = Some((*v, idx));
        }
        if grid[idx].0 == radial && outer.is_none_or(|(b, _)| *v > b) {
            outer = Some((*v, idx));
        }
    }
    for (idx, res) in results.iter().enumerate() {
        if let Some((v, theta)) = res {
            let (i, d) = grid[idx];
            let a = if i == 0 {
                vec![Complex64::new(0.0, 0.0); n]
            } else {
                scaled(&dirs[d], i as f64 * spacing)
            };
            best.offer(*v, &a, theta.clone());
        }
    }

    let mut seeds: Vec<usize> = global.into_iter().chain(outer).map(|(_, idx)| idx).collect();
    seeds.dedup();
    for idx in seeds {
        let (i, d) = grid[idx];
        let u = if i == 0 { dirs[0].clone() } else { dirs[d].clone() };
        let r0 = i as f64 * spacing;
        let lo = (r0 - spacing).max(0.0);
        let hi = if i == radial { MAX_CENTER_RADIUS } else { r0 + spacing };
        let eval_r = |r: f64| search.evaluate(&scaled(&u, r)).map_or(f64::NEG_INFINITY, |(v, _)| v);
        let (r_star, _) = golden_max(eval_r, lo, hi, GOLDEN_ITERATIONS);
        samples += GOLDEN_ITERATIONS + 4;
        let dpsi = 2.0 * PI / phases as f64;
        let eval_psi = |psi: f64| {
            search
                .evaluate(&scaled(&rotated(&u, psi), r_star))
                .map_or(f64::NEG_INFINITY, |(v, _)| v)
        };
        let (psi_star, _) = golden_max(eval_psi, -dpsi, dpsi, GOLDEN_ITERATIONS);
        samples += GOLDEN_ITERATIONS + 4;
        for a in [scaled(&u, r_star), scaled(&rotated(&u, psi_star), r_star)] {
            if let Some((v, theta)) = search.evaluate(&a) {
                best.offer(v, &a, theta);
            }
            samples += 1;
        }
    }
    samples
}

/// Lower estimate of the norm order `sup_a (1/2) sup_theta ||D^2 T_a(0)(theta, theta)||`
/// over Koebe transforms `T_a` of a normalized `h`.
pub fn norm_order_estimate(h: &HolomorphicModel, budget: OrderBudget) -> Result<OrderEstimate> {
    let defect = normalization_defect(h);
    if !(defect <= NORMALIZATION_TOLERANCE) {
        return Err(Error::NotNormalized(format!(
            "need h(0) = 0 and Dh(0) = I within {NORMALIZATION_TOLERANCE:e}, deviation is {defect:e}"
        )));
    }
    let n = h.dim();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut best = Best {
        value: f64::NEG_INFINITY,
        a: zero.clone(),
        theta: zero,
    };
    let mut samples_used = 0;
    for stage in 0..=budget.level {
        samples_used += run_stage(h, n, stage, &mut best);
    }
    Ok(OrderEstimate {
        value: best.value.max(0.0),
        samples_used,
        max_attained_at: (best.a, best.theta),
    })
}

fn membership_hypothesis(alpha: f64, k: f64) -> String {
    format!("membership in PH(alpha={alpha}, k={k}) by sampling; a failure refutes membership, passing does not certify it")
}

/// Sampled membership test for `PH(alpha, k)`.
pub fn check_membership_ph(map: &MapModel, alpha: f64, k: f64, config: &SampleConfig) -> VerificationReport {
    check_membership_ph_with(map, alpha, k, config, OrderBudget::default())
}

pub fn check_membership_ph_with(
    map: &MapModel,
    alpha: f64,
    k: f64,
    config: &SampleConfig,
    budget: OrderBudget,
) -> VerificationReport {
    let n = map.dim();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut entries = Vec::new();
    let report = |entries: Vec<CheckEntry>| {
        VerificationReport::new(map.provenance(), "membership", entries)
            .with_config(config)
            .with_hypothesis(membership_hypothesis(alpha, k))
    };
    if !(alpha >= 1.0 && alpha.is_finite() && (0.0..1.0).contains(&k)) {
        entries.push(CheckEntry::failure(
            "membership.params",
            0,
            &zero,
            format!("need alpha >= 1 and 0 <= k < 1, got alpha={alpha}, k={k}"),
        ));
        return report(entries);
    }
    let d0 = match map.derivatives(&zero) {
        Ok(d) => d,
        Err(e) => {
            entries.push(CheckEntry::failure("membership.h0", 0, &zero, e.to_string()));
            return report(entries);
        }
    };
    entries.push(CheckEntry::with_tolerance(
        "membership.h0",
        0,
        &zero,
        vec_norm(&map.h().value(&zero)),
        0.0,
        NORMALIZATION_TOLERANCE,
    ));
    entries.push(CheckEntry::with_tolerance(
        "membership.g0",
        0,
        &zero,
        vec_norm(&map.g().value(&zero)),
        0.0,
        NORMALIZATION_TOLERANCE,
    ));
    let norm0 = (&d0.dh + &d0.dg.conj()).operator_norm();
    entries.push(
        CheckEntry::with_tolerance(
            "membership.normalization",
            0,
            &zero,
            (norm0 - 1.0).abs(),
            0.0,
            NORMALIZATION_TOLERANCE,
        )
        .noted(format!("||Dh(0) + conj(Dg(0))|| = {norm0}")),
    );

    match config.points(n) {
        Ok(points) => {
            let dil: Vec<CheckEntry> = points
                .par_iter()
                .map(|s| match map.dilatation_norm(&s.z) {
                    Ok(kappa) => CheckEntry::le("membership.dilatation", s.index, &s.z, kappa, k),
                    Err(e) => CheckEntry::failure("membership.dilatation", s.index, &s.z, e.to_string()),
                })
                .collect();
            entries.extend(dil);
        }
        Err(e) => entries.push(CheckEntry::failure("membership.dilatation", 0, &zero, e.to_string())),
    }

    let order = normalize_holomorphic(map.h()).and_then(|hn| norm_order_estimate(&hn, budget));
    match order {
        Ok(est) => entries.push(
            CheckEntry::with_tolerance("membership.norm_order", 0, &est.max_attained_at.0, est.value, alpha, ORDER_TOLERANCE)
                .noted(format!("lower estimate from {} samples", est.samples_used)),
        ),
        Err(e) => entries.push(CheckEntry::failure("membership.norm_order", 0, &zero, e.to_string())),
    }
    report(entries)
}

/// The coefficient inequalities at the origin for a normalized map with
/// dilatation bounded by `k`: `||Dg(0)|| <= k/(1-k)` and
/// `1/(1+k) <= ||Dh(0)|| <= 1/(1-k)`.
pub fn coefficient_bounds_check(map: &MapModel, k: f64) -> VerificationReport {
    let n = map.dim();
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut entries = Vec::new();
    if !(0.0..1.0).contains(&k) {
        entries.push(CheckEntry::failure("coefficients.params", 0, &zero, format!("k must lie in [0, 1), got {k}")));
        return VerificationReport::new(map.provenance(), "coefficients", entries);
    }
    let d0 = match map.derivatives(&zero) {
        Ok(d) => d,
        Err(e) => {
            entries.push(CheckEntry::failure("coefficients.precondition", 0, &zero, e.to_string()));
            return VerificationReport::new(map.provenance(), "coefficients", entries);
        }
    };
    let norm0 = (&d0.dh + &d0.dg.conj()).operator_norm();
    entries.push(
        CheckEntry::with_tolerance(
            "coefficients.precondition",
            0,
            &zero,
            (norm0 - 1.0).abs(),
            0.0,
            NORMALIZATION_TOLERANCE,
        )
        .noted(format!("||Dh(0) + conj(Dg(0))|| = {norm0}")),
    );
    let dh = d0.dh.operator_norm();
    let dg = d0.dg.operator_norm();
    entries.push(CheckEntry::le("coefficients.dg0_upper", 0, &zero, dg, k / (1.0 - k)));
    entries.push(CheckEntry::le("coefficients.dh0_upper", 0, &zero, dh, 1.0 / (1.0 - k)));
    entries.push(CheckEntry::le("coefficients.dh0_lower", 0, &zero, 1.0 / (1.0 + k), dh));
    VerificationReport::new(map.provenance(), "coefficients", entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::{build_extremal, ExtremalFamily, ExtremalSpec};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_mobius() {
        let phi = BallAutomorphism::new(&[c(0.4, 0.0)]).unwrap();
        assert_abs_diff_eq!(phi.apply(&[c(0.4, 0.0)]).unwrap()[0].norm(), 0.0, epsilon = 1e-16);
        let z = c(0.1, -0.3);
        let expected = (c(0.4, 0.0) - z) / (1.0 - 0.4 * z);
        assert_abs_diff_eq!((phi.apply(&[z]).unwrap()[0] - expected).norm(), 0.0, epsilon = 1e-15);
        let zero = BallAutomorphism::new(&[c(0.0, 0.0)]).unwrap();
        assert_eq!(zero.apply(&[z]).unwrap(), vec![-z]);
    }

    #[test]
    fn derivative_at_zero_matches_general_formula() {
        let phi = BallAutomorphism::new(&[c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
        let zero = [c(0.0, 0.0), c(0.0, 0.0)];
        let diff = &phi.derivative(&zero).unwrap() - &phi.derivative_at_zero();
        assert!(diff.max_abs() < 1e-15);
    }

    #[test]
    fn identity_koebe_second_coefficient_is_conj_a() {
        let h = HolomorphicModel::Polynomial(PolynomialModel::identity(1));
        let a = c(0.5, 0.3);
        let t = koebe_transform(&h, &BallAutomorphism::new(&[a]).unwrap()).unwrap();
        let half = t.second_derivative_at_zero().at(0, 0, 0) / 2.0;
        assert_abs_diff_eq!((half - a.conj()).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((t.jacobian(&[c(0.0, 0.0)]).unwrap()[(0, 0)] - 1.0).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn not_normalized_is_rejected() {
        let h = HolomorphicModel::Polynomial(PolynomialModel::identity(1).scaled(c(2.0, 0.0)));
        assert!(matches!(norm_order_estimate(&h, OrderBudget::new(0)), Err(Error::NotNormalized(_))));
        let hn = normalize_holomorphic(&h).unwrap();
        assert!(normalization_defect(&hn) < 1e-15);
    }

    #[test]
    fn order_of_identity_and_pommerenke() {
        let id = HolomorphicModel::Polynomial(PolynomialModel::identity(1));
        let est = norm_order_estimate(&id, OrderBudget::new(0)).unwrap();
        assert!((est.value - 1.0).abs() < 5e-3, "{}", est.value);
        let p = build_extremal(&ExtremalSpec::new(ExtremalFamily::Pommerenke, 2.0, 0.0)).unwrap();
        let est = norm_order_estimate(p.h(), OrderBudget::new(0)).unwrap();
        assert!((est.value - 2.0).abs() < 5e-3, "{}", est.value);
    }

    #[test]
    fn membership_examples() {
        let config = SampleConfig::default();
        let upper = build_extremal(&ExtremalSpec::new(ExtremalFamily::UpperThm2, 2.0, 0.5)).unwrap();
        let r = check_membership_ph(&upper, 2.0, 0.5, &config);
        assert!(r.all_passed(), "{:?}", r.failures().next());
        assert!(check_membership_ph(&MapModel::identity(1), 1.0, 0.0, &config).all_passed());
        let r = check_membership_ph(&MapModel::affine(0.6), 1.0, 0.5, &config);
        assert!(r.failures().any(|e| e.check == "membership.dilatation"));
    }

    #[test]
    fn coefficient_examples() {
        let r = coefficient_bounds_check(&MapModel::identity(2), 0.0);
        assert!(r.all_passed());
        let upper = build_extremal(&ExtremalSpec::new(ExtremalFamily::UpperThm2, 1.5, 0.5)).unwrap();
        let r = coefficient_bounds_check(&upper, 0.5);
        assert!(r.all_passed());
        let e = r.entries.iter().find(|e| e.check == "coefficients.dh0_upper").unwrap();
        assert_abs_diff_eq!(e.lhs, 2.0, epsilon = 1e-14);
        let bad = MapModel::identity(1).with_provenance("x");
        let bad = MapModel::new(bad.h().scaled(c(3.0, 0.0)), bad.g().clone(), "scaled").unwrap();
        let r = coefficient_bounds_check(&bad, 0.0);
        assert!(r.failures().any(|e| e.check == "coefficients.precondition"));
    }
}
