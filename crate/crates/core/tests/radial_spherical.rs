use kaf_core::poly::Poly;
use kaf_core::quadrature::{radial_rule, sphere_rule};
use kaf_core::radial::{
    apply_diff, basis_eval, expand_radial, op_nplus, sl2_matrix, synthesize_radial, DiffOp, Params, RadialCoeffs, Sl2,
};
use kaf_core::spherical::{dim_harmonic, fischer_l2_ratio, harmonic_decompose, random_homogeneous, sph_basis, HarmonicPoly};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_dev_block(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

#[test]
fn cayley_commutators_on_interior_block() {
    let len = 14;
    let inner = len - 2;
    for &lam in &[-0.5, 0.0, 1.0, 2.5, 9.0] {
        let k = sl2_matrix(Sl2::K, lam, len);
        let np = sl2_matrix(Sl2::NPlus, lam, len);
        let nm = sl2_matrix(Sl2::NMinus, lam, len);
        let br = |x: &DMatrix<Complex64>, y: &DMatrix<Complex64>| x * y - y * x;
        let scale = 2.0 * (lam + 2.0 * len as f64);
        assert!(max_dev_block(&br(&k, &np), &(&np * cx(2.0)), inner) <= 1e-12 * scale);
        assert!(max_dev_block(&br(&k, &nm), &(&nm * cx(-2.0)), inner) <= 1e-12 * scale);
        assert!(max_dev_block(&br(&np, &nm), &k, inner) <= 1e-12 * scale);
        let h = sl2_matrix(Sl2::H, lam, len);
        let ep = sl2_matrix(Sl2::EPlus, lam, len);
        let em = sl2_matrix(Sl2::EMinus, lam, len);
        assert!(max_dev_block(&br(&h, &ep), &(&ep * cx(2.0)), inner) <= 1e-12 * scale);
        assert!(max_dev_block(&br(&h, &em), &(&em * cx(-2.0)), inner) <= 1e-12 * scale);
        assert!(max_dev_block(&br(&ep, &em), &h, inner) <= 1e-12 * scale);
    }
}

#[test]
fn ground_state_is_the_half_gaussian() {
    // N = 1, a = 2: ν = 0 and f_0 = (4/π)^{1/4} e^{-r²/2}
    let p = Params::rational(1, 2, 1, 0.0).unwrap();
    for &r in &[0.0f64, 0.3, 1.0, 2.7] {
        let want = (4.0 / std::f64::consts::PI).powf(0.25) * (-r * r / 2.0).exp();
        assert!((basis_eval(&p, 0, 0, r).unwrap() - want).abs() < 1e-14);
    }
    assert!(basis_eval(&p, 0, 0, -1.0).is_err());
    // a = 1/2 on the line leaves m = 0 outside λ > -1
    let q = Params::rational(1, 1, 2, 0.0).unwrap();
    assert!(basis_eval(&q, 0, 0, 1.0).is_err());
    assert_eq!(q.first_valid_m(), 1);
}

#[test]
fn eplus_matrix_matches_multiplication_by_r_to_the_a() {
    for &(dim, num, den, m) in &[(1usize, 2u64, 1u64, 0usize), (2, 2, 3, 1), (3, 1, 1, 0), (2, 3, 2, 2)] {
        let p = Params::rational(dim, num, den, 0.0).unwrap();
        let len = 10;
        let rule = radial_rule(&p, m, len + 10).unwrap();
        let lam = p.lambda(m);
        let mat = sl2_matrix(Sl2::EPlus, lam, len + 1);
        for l in 0..len {
            for j in 0..len {
                let q = rule.integrate(|r| r.powf(p.a) / p.a * basis_eval(&p, m, l, r).unwrap() * basis_eval(&p, m, j, r).unwrap());
                let got = mat[(j, l)];
                assert!((got - I * q).norm() <= 1e-10 * (1.0 + q.abs()), "N={dim} a={} m={m} ({j},{l}): {got} vs i{q}", p.a);
            }
        }
    }
}

#[test]
fn differential_operators_match_bands() {
    let p = Params::rational(2, 2, 1, 0.0).unwrap();
    let m = 1;
    let lam = p.lambda(m);
    let pr = &p;
    let f = |l: usize| move |r: f64| cx(basis_eval(pr, m, l, r).unwrap());
    for l in 1..8 {
        for &r in &[0.4, 1.1, 2.3] {
            let hf = apply_diff(&p, m, DiffOp::H, f(l), r).unwrap();
            let (sub, _, sup) = Sl2::H.bands(lam, l);
            let want = sub * basis_eval(&p, m, l + 1, r).unwrap() + sup * basis_eval(&p, m, l - 1, r).unwrap();
            assert!((hf - want).norm() <= 1e-6, "l={l} r={r}: {hf} vs {want}");
            let ep = apply_diff(&p, m, DiffOp::EPlus, f(l), r).unwrap();
            assert!((ep - I / p.a * r.powf(p.a) * basis_eval(&p, m, l, r).unwrap()).norm() < 1e-14);
        }
    }
    assert!(apply_diff(&p, m, DiffOp::H, f(0), 0.0).is_err());
}

#[test]
fn eminus_annihilates_the_leading_power() {
    for &(dim, a, k, m) in &[(1usize, 2.0, 0.0, 0usize), (1, 1.5, 0.7, 1), (2, 2.0 / 3.0, 0.0, 2), (3, 1.0, 0.0, 3)] {
        let p = Params::new(dim, a, k).unwrap();
        for &r in &[0.5, 1.0, 1.7] {
            let v = apply_diff(&p, m, DiffOp::EMinus, |s: f64| cx(s.powi(m as i32)), r).unwrap();
            assert!(v.norm() <= 1e-7 * r.powi(m as i32).max(1.0), "N={dim} a={a} m={m} r={r}: {v}");
        }
    }
}

#[test]
fn expand_then_synthesize_round_trip() {
    let p = Params::rational(2, 2, 3, 0.0).unwrap();
    let m = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c: Vec<f64> = (0..8).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
    let f = |r: f64| cx(c.iter().enumerate().map(|(l, cl)| cl * basis_eval(&p, m, l, r).unwrap()).sum());
    let rule = radial_rule(&p, m, 40).unwrap();
    let got = expand_radial(&p, m, f, 15, &rule).unwrap();
    for l in 0..15 {
        let want = if l < 8 { c[l] } else { 0.0 };
        assert!((got.c[l] - want).norm() < 1e-12, "l={l}");
    }
    for &r in &[0.0, 0.2, 1.5, 4.0] {
        assert!((synthesize_radial(&got, r) - f(r)).norm() < 1e-12);
    }
    let other = Params::rational(2, 2, 1, 0.0).unwrap();
    assert!(expand_radial(&other, m, f, 4, &rule).is_err());
}

proptest! {
    #[test]
    fn nplus_leak_from_the_last_mode(k in 0.0f64..20.0, len in 1usize..40) {
        let p = Params::new(1, 2.0, k).unwrap();
        let lam = p.lambda(0);
        let e = RadialCoeffs::unit(p, 0, len, len - 1).unwrap();
        let out = op_nplus(&e);
        let want = (len as f64 * (lam + len as f64)).sqrt();
        prop_assert!((out.leak - want).abs() <= 1e-12 * want);
        prop_assert!(out.norm_sqr() == 0.0);
    }
}

#[test]
fn decomposition_reconstructs_and_is_harmonic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in 1..=3 {
        for m in 0..=10 {
            let p = random_homogeneous(&mut rng, dim, m);
            let parts = harmonic_decompose(&p).unwrap();
            let mut sum = Poly::zero(dim);
            for (n, h) in &parts {
                assert_eq!(h.degree + 2 * n, m);
                let lap = h.poly.laplacian().max_abs();
                assert!(lap <= 1e-10 * p.max_abs(), "N={dim} m={m} n={n}: Δh = {lap}");
                let mut lifted = h.poly.clone();
                for _ in 0..*n {
                    lifted = lifted.mul(&Poly::norm_sq(dim));
                }
                sum = sum.add(&lifted);
            }
            assert!(sum.rel_diff(&p) <= 1e-12, "N={dim} m={m}");
            // N = 1: only degrees 0 and 1 carry harmonics
            if dim == 1 {
                assert!(parts.iter().all(|(_, h)| h.degree <= 1));
            }
        }
    }
    assert!(harmonic_decompose(&Poly::constant(2, 1.0).add(&Poly::coordinate(2, 0))).is_err());
}

#[test]
fn sphere_bases_are_orthonormal_with_the_right_size() {
    for dim in 1..=3 {
        let rule = sphere_rule(dim, 24).unwrap();
        for m in 0..=10u32 {
            let b = sph_basis(dim, m).unwrap();
            assert_eq!(b.len(), dim_harmonic(dim, m as usize), "N={dim} m={m}");
            if dim == 1 && m > 1 {
                assert!(b.is_empty());
                continue;
            }
            for i in 0..b.len() {
                HarmonicPoly::new(b.polys[i].clone(), m).unwrap();
                for j in 0..b.len() {
                    let g = rule.integrate(|w| b.polys[i].eval(w) * b.polys[j].eval(w));
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12, "N={dim} m={m} ({i},{j}) = {g}");
                }
            }
        }
    }
    // N = 3: 2m + 1; N = 2: 2
    assert_eq!(dim_harmonic(3, 7), 15);
    assert_eq!(dim_harmonic(2, 7), 2);
    assert!(sph_basis(4, 1).is_err());
}

#[test]
fn fischer_pairing_is_a_multiple_of_the_sphere_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in 2..=3 {
        let rule = sphere_rule(dim, 20).unwrap();
        for m in 1..=8u32 {
            let take = |rng: &mut ChaCha8Rng| {
                let p = random_homogeneous(rng, dim, m);
                harmonic_decompose(&p).unwrap().into_iter().find(|(n, _)| *n == 0).unwrap().1.poly
            };
            let (p, q) = (take(&mut rng), take(&mut rng));
            let sphere = rule.integrate(|w| p.eval(w) * q.eval(w));
            let ratio = p.fischer(&q) / sphere;
            let want = fischer_l2_ratio(m, dim);
            assert!((ratio - want).abs() <= 1e-9 * want, "N={dim} m={m}: {ratio} vs {want}");
        }
    }
    // ⟨x, x⟩_F = 1 and ∫ cos² = π on the circle
    assert!((fischer_l2_ratio(1, 2) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
}
