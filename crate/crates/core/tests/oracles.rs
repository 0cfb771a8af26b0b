//! Library results against independent computations: finite differences,
//! cofactor expansion, power iteration, midpoint sums and classical identities.

use pluriharmonic::bounds::{self, BoundParams};
use pluriharmonic::extremal::{build_extremal, ExtremalFamily, ExtremalSpec};
use pluriharmonic::lif::{koebe_transform, BallAutomorphism};
use pluriharmonic::linalg::vec_norm;
use pluriharmonic::verify::{random_polynomial_map, random_unit_vector};
use pluriharmonic::{CMatrix, Complex64, HolomorphicModel, MapModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type V = Vec<Complex64>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_point(r: &mut ChaCha8Rng, n: usize, max_radius: f64) -> V {
    let radius = max_radius * r.random::<f64>();
    random_unit_vector(r, n).into_iter().map(|x| x * radius).collect()
}

fn basis(n: usize, j: usize) -> V {
    (0..n).map(|k| c(if k == j { 1.0 } else { 0.0 }, 0.0)).collect()
}

fn shifted(z: &[Complex64], dir: &[Complex64], t: f64) -> V {
    z.iter().zip(dir).map(|(a, b)| a + b * t).collect()
}

fn diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    vec_norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<V>())
}

fn fd_step(z: &[Complex64]) -> f64 {
    1e-6 * vec_norm(z).max(1.0)
}

/// Central difference of a vector function along a complex direction.
fn central(f: impl Fn(&[Complex64]) -> V, z: &[Complex64], dir: &[Complex64]) -> V {
    let eps = fd_step(z);
    let plus = f(&shifted(z, dir, eps));
    let minus = f(&shifted(z, dir, -eps));
    plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * eps)).collect()
}

fn cofactor_det(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<V> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            m[0][j] * cofactor_det(&minor) * sign
        })
        .sum()
}

fn gaussian_cmatrix(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |_, _| {
        c(r.sample::<f64, _>(StandardNormal), r.sample::<f64, _>(StandardNormal))
    })
}

fn power_norm(a: &CMatrix, r: &mut ChaCha8Rng) -> f64 {
    let aha = a.adjoint().matmul(a);
    let mut v = random_unit_vector(r, a.dim());
    for _ in 0..2000 {
        let w = aha.mul_vec(&v);
        let norm = vec_norm(&w);
        v = w.into_iter().map(|x| x / norm).collect();
    }
    vec_norm(&a.mul_vec(&v))
}

fn sample_maps() -> Vec<MapModel> {
    let mut r = rng(11);
    let mut maps: Vec<MapModel> = (1..=3)
        .flat_map(|n| (0..4).map(move |_| n))
        .map(|n| random_polynomial_map(&mut r, n, 0.6).unwrap())
        .collect();
    for family in [ExtremalFamily::UpperThm2, ExtremalFamily::LowerThm2, ExtremalFamily::CoveringThm4] {
        maps.push(build_extremal(&ExtremalSpec::new(family, 2.5, 0.3).with_t(0.7)).unwrap());
    }
    maps
}

#[test]
fn first_derivatives_match_finite_differences() {
    let mut r = rng(1);
    for f in sample_maps() {
        let n = f.dim();
        for _ in 0..10 {
            let z = random_point(&mut r, n, 0.8);
            let d = f.derivatives(&z).unwrap();
            for j in 0..n {
                let e = basis(n, j);
                let dh_fd = central(|w| f.h().value(w), &z, &e);
                let dg_fd = central(|w| f.g().value(w), &z, &e);
                let dh_col: V = (0..n).map(|i| d.dh[(i, j)]).collect();
                let dg_col: V = (0..n).map(|i| d.dg[(i, j)]).collect();
                let tol = 1e-6 * vec_norm(&dh_col).max(1.0);
                assert!(diff(&dh_fd, &dh_col) <= tol, "{}: Dh column {j} at {z:?}", f.provenance());
                assert!(diff(&dg_fd, &dg_col) <= tol, "{}: Dg column {j} at {z:?}", f.provenance());
            }
            let theta = random_unit_vector(&mut r, n);
            let dir = f.directional_derivative(&z, &theta).unwrap();
            // f is not holomorphic; the real directional derivative comes from f itself
            let fd = central(|w| f.evaluate(w).unwrap(), &z, &theta);
            assert!(diff(&dir, &fd) <= 1e-6 * vec_norm(&dir).max(1.0));
        }
    }
}

#[test]
fn hessians_match_finite_differences() {
    let mut r = rng(2);
    for f in sample_maps() {
        let n = f.dim();
        for _ in 0..5 {
            let z = random_point(&mut r, n, 0.7);
            let hess = f.h().hessian(&z);
            for j in 0..n {
                for l in 0..n {
                    let (ej, el) = (basis(n, j), basis(n, l));
                    let fd = central(|w| f.h().jacobian(w).mul_vec(&ej), &z, &el);
                    let exact = hess.apply(&ej, &el);
                    assert!(
                        diff(&fd, &exact) <= 1e-5 * vec_norm(&exact).max(1.0),
                        "{}: {fd:?} vs {exact:?}",
                        f.provenance()
                    );
                }
            }
        }
    }
}

#[test]
fn one_variable_closed_forms() {
    let mut r = rng(3);
    for f in sample_maps().into_iter().filter(|f| f.dim() == 1) {
        for _ in 0..20 {
            let z = random_point(&mut r, 1, 0.9);
            let d = f.derivatives(&z).unwrap();
            let (hp, gp) = (d.dh[(0, 0)].norm(), d.dg[(0, 0)].norm());
            let (big, small) = f.lambda_extremes(&z).unwrap();
            assert!((big - (hp + gp)).abs() <= 1e-12 * big.max(1.0));
            assert!((small - (hp - gp).abs()).abs() <= 1e-12 * big.max(1.0));
            let det = f.det_jacobian(&z).unwrap();
            assert!((det - (hp * hp - gp * gp)).abs() <= 1e-12 * (hp * hp).max(1.0));
        }
    }
}

#[test]
fn determinants_match_cofactor_expansion() {
    let mut r = rng(4);
    for n in 1..=5 {
        for _ in 0..50 {
            let a = gaussian_cmatrix(&mut r, n);
            let rows: Vec<V> = (0..n).map(|i| a.row(i).to_vec()).collect();
            let want = cofactor_det(&rows);
            assert!((a.det() - want).norm() <= 1e-11 * want.norm().max(1.0));
            let product = a.singular_values().product();
            assert!((product - want.norm()).abs() <= 1e-9 * want.norm().max(1e-300));
        }
    }
}

#[test]
fn block_determinant_matches_factored_form() {
    let mut r = rng(5);
    for f in sample_maps() {
        for _ in 0..10 {
            let z = random_point(&mut r, f.dim(), 0.9);
            let factored = f.det_jacobian(&z).unwrap();
            let block = f.block_det(&z).unwrap();
            assert!(block.im.abs() <= 1e-12 * factored.abs().max(1.0));
            assert!((block.re - factored).abs() <= 1e-9 * factored.abs());
        }
    }
}

#[test]
fn operator_norm_matches_power_iteration() {
    let mut r = rng(6);
    for n in 1..=6 {
        for _ in 0..20 {
            let a = gaussian_cmatrix(&mut r, n);
            let want = power_norm(&a, &mut r);
            assert!((a.operator_norm() - want).abs() <= 1e-8 * want);
        }
    }
}

#[test]
fn automorphism_is_an_involution() {
    let mut r = rng(7);
    for i in 0..100 {
        let n = 1 + i % 3;
        let a = random_point(&mut r, n, 0.95);
        let z = random_point(&mut r, n, 0.95);
        let phi = BallAutomorphism::new(&a).unwrap();
        let w = phi.apply(&z).unwrap();
        let back = phi.apply(&w).unwrap();
        assert!(diff(&back, &z) <= 1e-10, "a={a:?} z={z:?}");
        assert!(diff(&phi.apply(&vec![c(0.0, 0.0); n]).unwrap(), &a) <= 1e-14);
        assert!(vec_norm(&phi.apply(&a).unwrap()) <= 1e-14);
        // 1 - |phi_a(z)|^2 = (1 - |a|^2)(1 - |z|^2) / |1 - <z, a>|^2
        let za: Complex64 = z.iter().zip(&a).map(|(x, y)| x * y.conj()).sum();
        let (na, nz) = (vec_norm(&a), vec_norm(&z));
        let want = (1.0 - na * na) * (1.0 - nz * nz) / (c(1.0, 0.0) - za).norm_sqr();
        let nw = vec_norm(&w);
        assert!(((1.0 - nw * nw) - want).abs() <= 1e-12);
    }
}

#[test]
fn automorphism_derivatives_match_finite_differences() {
    let mut r = rng(8);
    for i in 0..30 {
        let n = 1 + i % 3;
        let a = random_point(&mut r, n, 0.9);
        let phi = BallAutomorphism::new(&a).unwrap();
        let zero = vec![c(0.0, 0.0); n];
        let d0 = phi.derivative_at_zero();
        let z = random_point(&mut r, n, 0.5);
        let dz = phi.derivative(&z).unwrap();
        assert!((&d0 - &phi.derivative(&zero).unwrap()).max_abs() <= 1e-14);
        let theta = random_unit_vector(&mut r, n);
        let eta = random_unit_vector(&mut r, n);
        let fd = central(|w| phi.apply(w).unwrap(), &z, &theta);
        assert!(diff(&fd, &dz.mul_vec(&theta)) <= 1e-7);
        let fd2 = central(|w| phi.derivative(w).unwrap().mul_vec(&theta), &zero, &eta);
        let exact = phi.second_derivative_at_zero(&theta, &eta);
        assert!(diff(&fd2, &exact) <= 1e-6, "{fd2:?} vs {exact:?}");
    }
}

#[test]
fn koebe_transform_is_normalized() {
    let mut r = rng(9);
    for f in sample_maps() {
        let n = f.dim();
        let zero = vec![c(0.0, 0.0); n];
        for _ in 0..5 {
            let a = random_point(&mut r, n, 0.7);
            let phi = BallAutomorphism::new(&a).unwrap();
            let t = match koebe_transform(f.h(), &phi) {
                Ok(t) => t,
                Err(_) => continue,
            };
            assert!(vec_norm(&t.value(&zero).unwrap()) <= 1e-12);
            assert!((&t.jacobian(&zero).unwrap() - &CMatrix::identity(n)).max_abs() <= 1e-9);
            let form = t.second_derivative_at_zero();
            let theta = random_unit_vector(&mut r, n);
            let eta = random_unit_vector(&mut r, n);
            let fd = central(|w| t.jacobian(w).unwrap().mul_vec(&theta), &zero, &eta);
            let exact = form.apply(&theta, &eta);
            assert!(diff(&fd, &exact) <= 1e-5 * vec_norm(&exact).max(1.0), "{}", f.provenance());
        }
    }
}

#[test]
fn koebe_of_identity_has_second_coefficient_of_size_abs_a() {
    let h = HolomorphicModel::Polynomial(pluriharmonic::PolynomialModel::identity(1));
    for a in [0.0, 0.3, 0.9, 0.99] {
        let phi = BallAutomorphism::new(&[c(a, 0.0)]).unwrap();
        let form = koebe_transform(&h, &phi).unwrap().second_derivative_at_zero();
        assert!((0.5 * form.at(0, 0, 0).norm() - a).abs() <= 1e-12);
    }
}

fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn covering_integral_matches_midpoint_rule() {
    let (ea, eb) = bounds::covering_exponents(2, 1.5);
    let want = midpoint(|x| (1.0 - x).powf(ea) / (1.0 + x).powf(eb), 0.0, 0.5, 1_000_000);
    let got = bounds::covering_integral(2, 1.5, 0.5).unwrap().value;
    assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
}

#[test]
fn growth_is_the_integral_of_the_upper_bound() {
    for (alpha, k) in [(1.0, 0.0), (2.0, 0.5), (3.5, 0.2)] {
        let p = BoundParams::new(1, alpha, k).unwrap();
        for r in [0.1, 0.5, 0.8] {
            let want = midpoint(|x| bounds::distortion_upper(x, &p).unwrap(), 0.0, r, 200_000);
            let got = bounds::growth_bound(r, &p).unwrap();
            assert!((got - want).abs() <= 1e-8 * want, "alpha={alpha} k={k} r={r}");
        }
    }
}

#[test]
fn pommerenke_derivative_meets_its_envelope() {
    for alpha in [1.0, 2.0, 3.0] {
        let f = build_extremal(&ExtremalSpec::new(ExtremalFamily::Pommerenke, alpha, 0.0)).unwrap();
        let p = BoundParams::new(1, alpha, 0.0).unwrap();
        for r in [0.1, 0.4, 0.8] {
            let envelope = bounds::distortion_upper(r, &p).unwrap();
            let lower = bounds::distortion_lower(r, &p).unwrap();
            for j in 0..64 {
                let z = [Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / 64.0)];
                let hp = f.derivatives(&z).unwrap().dh[(0, 0)].norm();
                assert!(hp <= envelope * (1.0 + 1e-12) && hp >= lower * (1.0 - 1e-12));
            }
            let hp = f.derivatives(&[c(r, 0.0)]).unwrap().dh[(0, 0)].norm();
            assert!((hp - envelope).abs() <= 1e-12 * envelope);
            let hm = f.derivatives(&[c(-r, 0.0)]).unwrap().dh[(0, 0)].norm();
            assert!((hm - lower).abs() <= 1e-12);
        }
    }
}

#[test]
fn kn_roots_bracket_a_sign_change() {
    for n in 1..=8 {
        let root = bounds::solve_kn(n).unwrap();
        assert!(bounds::kn_equation(n, root.k_n * (1.0 - 1e-9)) > 0.0);
        assert!(bounds::kn_equation(n, root.k_n * (1.0 + 1e-9)) < 0.0);
    }
}
