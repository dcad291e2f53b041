//! Shared checks for the acceptance suite and the integration tests. The
//! oracles here use closed forms or brute-force numerics that do not go
//! through the code path they are checking.

#![allow(dead_code)]

use kaf_core::quadrature::radial_rule;
use kaf_core::radial::{apply_diff, basis_all, basis_eval, sl2_matrix, DiffOp, Params, Sl2};
use kaf_core::transform::{
    analyze, apply_fourier, classical_fourier_oracle, fourier_order, synthesize, AnalysisRules, CoeffField,
    OracleBox, RadialScheme,
};
use kaf_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cx(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every valid (N, a, k, m) of the radial parameter grid.
pub fn radial_grid(m_max: usize) -> Vec<(Params, usize)> {
    let mut out = Vec::new();
    for dim in 1..=3 {
        for &(num, den) in &[(1u64, 2u64), (1, 1), (4, 3), (2, 1), (3, 1)] {
            for &k in &[0.0, 0.7] {
                if dim >= 2 && k != 0.0 {
                    continue;
                }
                let p = Params::rational(dim, num, den, k).unwrap();
                for m in 0..=m_max {
                    if p.lambda(m) > -1.0 {
                        out.push((p.clone(), m));
                    }
                }
            }
        }
    }
    out
}

/// max |⟨f_l, f_l'⟩ - δ| over the grid for l, l' ≤ l_max.
pub fn gram_sweep(l_max: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (p, m) in radial_grid(4) {
        let rule = radial_rule(&p, m, l_max + 10).unwrap();
        let vals: Vec<Vec<f64>> = rule.nodes.iter().map(|&r| basis_all(&p, m, l_max, r).unwrap()).collect();
        for i in 0..=l_max {
            for j in 0..=i {
                let g: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| w * v[i] * v[j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
    }
    worst
}

/// max over the grid of |⟨X f_l, f_l'⟩ - (op_X)_{l',l}| for X ∈ {H, E⁺, E⁻}.
pub fn diff_vs_matrix_sweep(l_max: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (p, m) in radial_grid(2) {
        let lam = p.lambda(m);
        let rule = radial_rule(&p, m, l_max + 20).unwrap();
        let basis: Vec<Vec<f64>> = rule.nodes.iter().map(|&r| basis_all(&p, m, l_max + 1, r).unwrap()).collect();
        for (op, x) in [(DiffOp::H, Sl2::H), (DiffOp::EPlus, Sl2::EPlus), (DiffOp::EMinus, Sl2::EMinus)] {
            let mat = sl2_matrix(x, lam, l_max + 2);
            for l in 0..=l_max {
                let fl = |r: f64| cx(basis_eval(&p, m, l, r).unwrap());
                let applied: Vec<Complex64> =
                    rule.nodes.iter().map(|&r| apply_diff(&p, m, op, fl, r).unwrap()).collect();
                for lp in 0..=l_max {
                    let q: Complex64 = applied
                        .iter()
                        .zip(&basis)
                        .zip(&rule.weights)
                        .map(|((g, b), w)| g * (b[lp] * w))
                        .sum();
                    worst = worst.max((q - mat[(lp, l)]).norm());
                }
            }
        }
    }
    worst
}

fn gauss(x: &[f64]) -> f64 {
    (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp()
}

/// Spectral F_{0,2} against direct Fourier quadrature. Returns the worst error
/// on Gaussian-class inputs (N = 1, 2) and the worst error for e^{-|x|}
/// against √(2/π)/(1+ξ²).
pub fn oracle_comparison() -> (f64, f64) {
    let inputs: Vec<(&str, fn(&[f64]) -> Complex64)> = vec![
        ("gauss", |x| cx(gauss(x))),
        ("x1 gauss", |x| cx(x[0] * gauss(x))),
        ("(1-r^2) gauss", |x| cx((1.0 - x.iter().map(|v| v * v).sum::<f64>()) * gauss(x))),
    ];
    let mut smooth: f64 = 0.0;
    for dim in [1usize, 2] {
        let p = Params::rational(dim, 2, 1, 0.0).unwrap();
        let (m_max, l_max) = (4, 6);
        let grid: Vec<Vec<f64>> = if dim == 1 {
            (0..17).map(|i| vec![-4.0 + 0.5 * i as f64]).collect()
        } else {
            let mut g = Vec::new();
            for &u in &[-2.5, -0.7, 0.0, 1.1, 3.0] {
                for &v in &[-1.9, 0.0, 0.6, 2.2] {
                    g.push(vec![u, v]);
                }
            }
            g
        };
        let bx = if dim == 1 {
            OracleBox { half_width: 12.0, panels: 48, order: 12 }
        } else {
            OracleBox { half_width: 10.0, panels: 30, order: 10 }
        };
        for (_, f) in &inputs {
            let field = analyze(&p, f, m_max, l_max, &AnalysisRules::gauss(m_max, l_max)).unwrap();
            let ff = apply_fourier(&field);
            for xi in &grid {
                let spectral = synthesize(&ff, xi).unwrap();
                let direct = classical_fourier_oracle(f, xi, &bx).unwrap();
                smooth = smooth.max((spectral - direct).norm());
            }
        }
    }
    let p = Params::rational(1, 2, 1, 0.0).unwrap();
    let rules = AnalysisRules {
        radial: RadialScheme::Panel { r_max: 50.0, panels: 100, order: 20 },
        sphere_order: 2,
    };
    let f = |x: &[f64]| cx((-x[0].abs()).exp());
    let field = analyze(&p, f, 1, 200, &rules).unwrap();
    let ff = apply_fourier(&field);
    let mut kink: f64 = 0.0;
    for i in 0..=50 {
        let xi = -5.0 + 0.2 * i as f64;
        let want = (2.0 / std::f64::consts::PI).sqrt() / (1.0 + xi * xi);
        kink = kink.max((synthesize(&ff, &[xi]).unwrap() - want).norm());
    }
    (smooth, kink)
}

pub struct OrderRow {
    pub label: String,
    pub computed: u64,
    pub brute: u64,
    pub residual: f64,
}

/// Independent phase: e^{-iπ(m/a + l)} evaluated in floating point.
fn float_phase(a: f64, m: usize, l: usize) -> Complex64 {
    Complex64::from_polar(1.0, -std::f64::consts::PI * (m as f64 / a + l as f64))
}

pub fn brute_force_order(a: f64, idx_max: usize, k_max: u64) -> u64 {
    (1..=k_max)
        .find(|&k| {
            (0..=idx_max).all(|m| (0..=idx_max).all(|l| (float_phase(a, m, l).powu(k as u32) - 1.0).norm() < 1e-9))
        })
        .unwrap_or(0)
}

pub fn random_field(p: &Params, m_max: usize, l_max: usize, seed: u64) -> CoeffField {
    let mut r = rng(seed);
    CoeffField::zeros(p.clone(), m_max, l_max).map_entries(|_, _, _, _| {
        Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    })
}

pub fn finite_order_rows() -> Vec<OrderRow> {
    let cases = [("2", 2u64, 1u64), ("1", 1, 1), ("2/3", 2, 3), ("4/3", 4, 3), ("3", 3, 1)];
    cases
        .iter()
        .map(|&(label, num, den)| {
            let p = Params::rational(2, num, den, 0.0).unwrap();
            let computed = fourier_order(&p).unwrap();
            let brute = brute_force_order(num as f64 / den as f64, 50, 64);
            let field = random_field(&p, 10, 10, 7);
            let mut g = field.clone();
            for _ in 0..computed {
                g = apply_fourier(&g);
            }
            OrderRow {
                label: label.to_string(),
                computed,
                brute,
                residual: g.max_diff(&field),
            }
        })
        .collect()
}

pub struct HarmonicBoundReport {
    pub polys: usize,
    pub checks: usize,
    pub violations: usize,
    pub worst_rel_margin: f64,
    pub fischer_err: f64,
}

/// Every multi-index in `dim` variables with |γ| ≤ g_max.
pub fn small_multi_indices(dim: usize, g_max: u32) -> Vec<Vec<u32>> {
    (0..=g_max).flat_map(|g| kaf_core::poly::multi_indices(dim, g)).collect()
}

/// L² derivative and pointwise bounds over random harmonic polynomials, and
/// the Fischer/L² ratio against sphere quadrature.
pub fn harmonic_bound_sweep(count: usize, seed: u64) -> HarmonicBoundReport {
    use kaf_core::spherical::{
        check_derivative_bound, check_pointwise_bound, fischer_inner, fischer_l2_ratio, random_harmonic, sphere_inner,
        sphere_norm,
    };
    let mut r = rng(seed);
    let mut rep = HarmonicBoundReport { polys: 0, checks: 0, violations: 0, worst_rel_margin: f64::INFINITY, fischer_err: 0.0 };
    for i in 0..count {
        let dim = 2 + i % 2;
        let m = (i / 2 % 9) as u32;
        let p = random_harmonic(&mut r, dim, m);
        let norm = sphere_norm(&p.poly, m).unwrap();
        rep.polys += 1;
        let points: Vec<Vec<f64>> =
            (0..10).map(|_| (0..dim).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        for gamma in small_multi_indices(dim, 3) {
            let mut margins = vec![(check_derivative_bound(&p, &gamma).unwrap(), norm)];
            for x in &points {
                let rx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                margins.push((check_pointwise_bound(&p, &gamma, x).unwrap(), norm * rx.max(1.0).powi(m as i32)));
            }
            for (margin, scale) in margins {
                rep.checks += 1;
                if margin < -1e-9 * scale {
                    rep.violations += 1;
                }
                rep.worst_rel_margin = rep.worst_rel_margin.min(margin / scale);
            }
        }
        let q = random_harmonic(&mut r, dim, m);
        let f = fischer_inner(&p.poly, &q.poly);
        let l2 = fischer_l2_ratio(m, dim) * sphere_inner(&p.poly, &q.poly, m).unwrap();
        rep.fischer_err = rep.fischer_err.max((f - l2).abs() / f.abs().max(l2.abs()).max(f64::MIN_POSITIVE));
    }
    rep
}

/// One-sided forward difference Δ_h^k f(0)/h^k, Richardson-extrapolated over
/// h, h/2, ..., h/2^{levels-1} assuming an error series in powers of h.
pub fn richardson_forward_derivative<F: Fn(f64) -> f64>(f: F, k: usize, h: f64, levels: usize) -> f64 {
    let binom = |n: usize, i: usize| -> f64 { (0..i).map(|j| (n - j) as f64 / (j + 1) as f64).product() };
    let d = |h: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..=k {
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * binom(k, i) * f(i as f64 * h);
        }
        s / h.powi(k as i32)
    };
    let mut table: Vec<f64> = (0..levels).map(|i| d(h / 2f64.powi(i as i32))).collect();
    for j in 1..levels {
        let fac = 2f64.powi(j as i32) - 1.0;
        for i in (j..levels).rev() {
            table[i] += (table[i] - table[i - 1]) / fac;
        }
    }
    table[levels - 1]
}

pub struct BorelCheck {
    /// max |FD h^{(k)}(0) - δ_{kn} c| over single-order jets
    pub fd_err: f64,
    /// max |h[c] - Σ_n h[c^{(n)} e_n]| on a grid
    pub superposition_err: f64,
    /// max |jet access h^{(n)}(0) - c^{(n)}|
    pub jet_err: f64,
}

/// Borel families for random O(1) jets, n ≤ 5, m, l ≤ 2. Finite differences
/// are taken on single-order jets, whose terms are active on a plateau wide
/// enough for f64 differences; the full family is then compared with the sum
/// of its single-order parts.
pub fn borel_jet_check(seed: u64) -> BorelCheck {
    use kaf_core::schwartz::{borel_family, borel_radius};
    let n_max = 5;
    let mut r = rng(seed);
    let table: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|_| (0..3).map(|_| (0..=n_max).map(|_| r.random_range(-1.0..1.0)).collect()).collect())
        .collect();
    let full = borel_family(table.clone(), n_max).unwrap();
    let mut out = BorelCheck { fd_err: 0.0, superposition_err: 0.0, jet_err: 0.0 };
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    for m in 0..3 {
        for l in 0..3 {
            let mut singles = Vec::new();
            for n in 0..=n_max {
                let c = table[m][l][n];
                let mut e = vec![0.0; n_max + 1];
                e[n] = c;
                let fam = borel_family(vec![vec![e]], n_max).unwrap();
                let plateau = 0.5 / borel_radius(n, c / fact(n));
                for k in 0..=n_max {
                    // the widest stencil k·h stays on the plateau
                    let h = plateau / (k as f64 + 1.0);
                    let fd = richardson_forward_derivative(|t| fam.value(0, 0, t), k, h, 3);
                    let want = if k == n { c } else { 0.0 };
                    out.fd_err = out.fd_err.max((fd - want).abs());
                }
                singles.push(fam);
            }
            for i in 0..=400 {
                let t = i as f64 / 400.0;
                let sum: f64 = singles.iter().map(|f| f.value(0, 0, t)).sum();
                out.superposition_err = out.superposition_err.max((full.value(m, l, t) - sum).abs());
            }
            let jet = full.jet(m, l, 0.0, n_max).derivs();
            for n in 0..=n_max {
                out.jet_err = out.jet_err.max((jet[n] - table[m][l][n]).abs());
            }
        }
    }
    out
}

/// Worst PG reconstruction residual over several families and q ∈ {1, 2, 3}.
pub fn pg_residuals() -> Vec<(String, usize, f64)> {
    use kaf_core::jet::Jet;
    use kaf_core::schwartz::{laguerre_normalized_family, pg_decompose, FamilySpec};
    let exp_family = FamilySpec::new("e^{-(1+m+l) t}", 3, 3, usize::MAX, |m, l, t, n| {
        Jet::variable(t, n).scale(-(1.0 + (m + l) as f64)).exp()
    });
    let rational = FamilySpec::new("1/(1+t^2) + m t", 2, 2, usize::MAX, |m, _l, t, n| {
        let x = Jet::variable(t, n);
        x.mul(&x).add_const(1.0).recip().add(&x.scale(m as f64))
    });
    let lag = laguerre_normalized_family(&[0.0, 1.0, 2.0], 4).unwrap();
    let poly = FamilySpec::polynomial("1+t+t^2", 0, 0, |_, _| vec![1.0, 1.0, 1.0]);
    let mut rows = Vec::new();
    for fam in [exp_family, rational, lag, poly] {
        for q in 1..=3 {
            let d = pg_decompose(&fam, q, 9).unwrap();
            rows.push((fam.label.clone(), q, d.residual));
        }
    }
    rows
}

pub struct RankOneRow {
    pub label: String,
    pub u_err: f64,
    pub v_err: f64,
    pub before: (bool, bool),
    pub after: (bool, bool),
}

type Profile = fn(f64) -> f64;

/// Five inputs u(|x|^a) + x v(|x|^a) with closed-form u, v. Each split is
/// compared with the construction, and the m = 0, 1 decay verdicts are
/// recomputed after the spectral transform.
pub fn rank_one_rows() -> Vec<RankOneRow> {
    use kaf_core::schwartz::{decay_report, rank1_split, restrict_to_sector};
    let cases: Vec<(&str, (u64, u64), f64, Profile, Profile)> = vec![
        ("a=2 even gaussian", (2, 1), 0.0, |t| (-t / 2.0).exp(), |_| 0.0),
        ("a=1 odd", (1, 1), 0.0, |_| 0.0, |t| (-t).exp()),
        ("a=4/3 k=0.7 mixed", (4, 3), 0.7, |t| (1.0 + t) * (-t).exp(), |t| t * (-t / 2.0).exp()),
        ("a=3 mixed", (3, 1), 0.0, |t| (-t * t).exp(), |t| t.cos() * (-t).exp()),
        ("a=1/2 k=0.7 mixed", (1, 2), 0.7, |t| (2.0 - t) * (-t).exp(), |t| (-2.0 * t).exp()),
    ];
    let grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
    let l_max = 30;
    cases
        .into_iter()
        .map(|(label, (num, den), k, u, v)| {
            let p = Params::rational(1, num, den, k).unwrap();
            let a = p.a;
            let f = move |x: f64| u(x.abs().powf(a)) + x * v(x.abs().powf(a));
            let split = rank1_split(f, &p, &grid, l_max, 6).unwrap();
            let u_err = grid.iter().zip(&split.u).map(|(&t, s)| (s - u(t)).abs()).fold(0.0, f64::max);
            let v_err = grid.iter().zip(&split.v).map(|(&t, s)| (s - v(t)).abs()).fold(0.0, f64::max);
            let field = analyze(&p, |x: &[f64]| cx(f(x[0])), 1, l_max, &AnalysisRules::gauss(1, l_max)).unwrap();
            let ff = apply_fourier(&field);
            let verdicts = |fl: &CoeffField| {
                (
                    decay_report(&restrict_to_sector(fl, 0), 6).verdict,
                    decay_report(&restrict_to_sector(fl, 1), 6).verdict,
                )
            };
            RankOneRow {
                label: label.to_string(),
                u_err,
                v_err,
                before: (split.even_decay.verdict, split.odd_decay.verdict),
                after: verdicts(&ff),
            }
        })
        .collect()
}

pub struct ForwardDecayRow {
    pub label: String,
    pub verdict: bool,
    pub first_fail: Option<u32>,
}

/// ‖x‖^{ja} h(x) e^{-‖x‖^{2p}/p} with h harmonic, a = 2p/q, j < q, N = 2,
/// analyzed at M = L = 20.
pub fn forward_decay_rows() -> Vec<ForwardDecayRow> {
    use kaf_core::schwartz::decay_report;
    use kaf_core::spherical::random_harmonic;
    let mut r = rng(10);
    let mut rows = Vec::new();
    for &(pp, q) in &[(1u64, 1u64), (1, 2), (1, 3)] {
        let p = Params::rational(2, 2 * pp, q, 0.0).unwrap();
        let a = p.a;
        for j in 0..q {
            for m in [0u32, 1, 3] {
                let h = random_harmonic(&mut r, 2, m);
                let pf = pp as f64;
                let f = |x: &[f64]| {
                    let rr = (x[0] * x[0] + x[1] * x[1]).sqrt();
                    cx(rr.powf(j as f64 * a) * h.poly.eval(x) * (-rr.powf(2.0 * pf) / pf).exp())
                };
                let field = analyze(&p, f, 20, 20, &AnalysisRules::gauss(20, 20)).unwrap();
                let rep = decay_report(&field, 6);
                rows.push(ForwardDecayRow {
                    label: format!("a={}/{} j={j} m={m}", 2 * pp, q),
                    verdict: rep.verdict,
                    first_fail: rep.first_failing_order,
                });
            }
        }
    }
    rows
}

/// Brute-force S_{2p} test: the Fischer-orthogonal projection of each
/// homogeneous part onto ‖x‖^{2n} P^{d-2n} minus its projection onto
/// ‖x‖^{2n+2} P^{d-2n-2} is the component in ‖x‖^{2n} H^{d-2n}.
pub fn s2p_brute_force(poly: &kaf_core::poly::Poly, p: u32) -> bool {
    use kaf_core::poly::{multi_indices, Poly};
    use nalgebra::{DMatrix, DVector};
    let dim = poly.dim;
    let scale = poly.max_abs().max(f64::MIN_POSITIVE);
    // Fischer-orthogonal projection of target onto ‖x‖^{2n} P^{d-2n}
    let project = |target: &Poly, d: u32, n: u32| -> Poly {
        if 2 * n > d {
            return Poly::zero(dim);
        }
        let mut r2n = Poly::constant(dim, 1.0);
        for _ in 0..n {
            r2n = r2n.mul(&Poly::norm_sq(dim));
        }
        let span: Vec<Poly> =
            multi_indices(dim, d - 2 * n).into_iter().map(|b| r2n.mul(&Poly::monomial(b, 1.0))).collect();
        let k = span.len();
        let g = DMatrix::from_fn(k, k, |i, j| span[i].fischer(&span[j]));
        let rhs = DVector::from_fn(k, |i, _| span[i].fischer(target));
        let coef = g.svd(true, true).solve(&rhs, 1e-14).unwrap();
        span.iter().zip(coef.iter()).fold(Poly::zero(dim), |acc, (s, c)| acc.add(&s.scale(*c)))
    };
    let deg = poly.degree().unwrap_or(0);
    for d in 0..=deg {
        let part = poly.part(d);
        if part.max_abs() <= 1e-13 * scale {
            continue;
        }
        let total = part.fischer(&part);
        for n in 0..=d / 2 {
            let diff = project(&part, d, n).sub(&project(&part, d, n + 1));
            let comp = diff.fischer(&diff);
            if n % p != 0 && comp > 1e-10 * total {
                return false;
            }
        }
    }
    true
}

/// Random polynomials of degree ≤ 8 assembled from random ‖x‖^{2n} H^{d-2n}
/// blocks (so both verdicts occur), N ∈ {2, 3}, p ∈ {1, 2, 3}. Returns
/// (cases, disagreements, accepted count).
pub fn s2p_agreement(count: usize, seed: u64) -> (usize, usize, usize) {
    use kaf_core::poly::Poly;
    use kaf_core::schwartz::s2p_membership;
    use kaf_core::spherical::random_harmonic;
    let mut r = rng(seed);
    let (mut bad, mut acc) = (0, 0);
    for i in 0..count {
        let dim = 2 + i % 2;
        let p = 1 + (i / 2 % 3) as u32;
        let mut poly = Poly::zero(dim);
        for d in 0..=r.random_range(2..=8u32) {
            for n in 0..=d / 2 {
                // blocks with n ≢ 0 mod p are rare so that accepts occur
                let keep = if n % p == 0 { r.random_bool(0.6) } else { r.random_bool(0.08) };
                if !keep {
                    continue;
                }
                let mut blk = random_harmonic(&mut r, dim, d - 2 * n).poly;
                for _ in 0..n {
                    blk = blk.mul_norm_sq();
                }
                poly = poly.add(&blk);
            }
        }
        let fast = s2p_membership(&poly, p).unwrap().accept;
        let brute = s2p_brute_force(&poly, p);
        bad += (fast != brute) as usize;
        acc += fast as usize;
    }
    (count, bad, acc)
}

/// (a-PG) verdicts for the normalized Laguerre family with λ_m = λ_{0,a,m}
/// for N = 2, at m, l ≤ 20. Returns (a, verdict, worst exponent).
pub fn laguerre_apg_rows() -> Vec<(f64, bool, f64)> {
    use kaf_core::estimates::uniform_grid;
    use kaf_core::schwartz::{apg_check, laguerre_normalized_family};
    let grid = uniform_grid(0.0, 400.0, 2000);
    [(2u64, 1u64), (1, 1), (2, 3), (3, 1)]
        .iter()
        .map(|&(num, den)| {
            let p = Params::rational(2, num, den, 0.0).unwrap();
            let lams: Vec<f64> = (0..=20).map(|m| p.lambda(m)).collect();
            let fam = laguerre_normalized_family(&lams, 20).unwrap();
            let rep = apg_check(&fam, p.a, &[-2.0, 0.0, 2.0], 3, &grid);
            let worst = rep.rows.iter().map(|r| r.exponent).fold(f64::NEG_INFINITY, f64::max);
            (p.a, rep.verdict, worst)
        })
        .collect()
}

/// ∫ F conj(G) ‖x‖^{-1} dx in polar coordinates: trapezoid in the angles
/// (Gauss–Legendre in cos θ for N = 3) and Gauss–Legendre panels in r.
pub fn polar_inner(f: &kaf_core::conformal::TermSum, g: &kaf_core::conformal::TermSum) -> Complex64 {
    use kaf_core::quadrature::gauss_legendre;
    let dim = f.dim;
    let mut dirs: Vec<(Vec<f64>, f64)> = Vec::new();
    // integrands are trigonometric polynomials of degree < 24 in each angle
    let nphi = 24;
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
    if dim == 2 {
        for k in 0..nphi {
            let p = k as f64 * dphi;
            dirs.push((vec![p.cos(), p.sin()], dphi));
        }
    } else {
        let ct = gauss_legendre(16, -1.0, 1.0);
        for (&c, &w) in ct.nodes.iter().zip(&ct.weights) {
            let st = (1.0 - c * c).sqrt();
            for k in 0..nphi {
                let p = k as f64 * dphi;
                dirs.push((vec![st * p.cos(), st * p.sin(), c], w * dphi));
            }
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    let panels = 12;
    let r_max = 12.0;
    for p in 0..panels {
        let lo = r_max * p as f64 / panels as f64;
        let rule = gauss_legendre(12, lo, lo + r_max / panels as f64);
        for (&r, &wr) in rule.nodes.iter().zip(&rule.weights) {
            let jac = r.powi(dim as i32 - 2);
            for (d, wd) in &dirs {
                let x: Vec<f64> = d.iter().map(|v| v * r).collect();
                total += f.eval(&x) * g.eval(&x).conj() * (wr * wd * jac);
            }
        }
    }
    total
}

/// Worst relative error of the closed-form inner product against
/// [`polar_inner`] on random class members (and generator images) for N = 2, 3.
pub fn conformal_inner_oracle(pairs: usize, seed: u64) -> f64 {
    use kaf_core::conformal::{dpi1_apply, inner_conformal, norm_conformal, random_class_member, ConformalGen};
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for dim in [2usize, 3] {
        for i in 0..pairs {
            let f = random_class_member(&mut r, dim, 3);
            let mut g = random_class_member(&mut r, dim, 3);
            if i % 2 == 1 {
                g = dpi1_apply(&ConformalGen::N(1 + i % (dim + 1)), &g).unwrap();
            }
            let closed = inner_conformal(&f, &g).unwrap();
            let brute = polar_inner(&f, &g);
            let scale = norm_conformal(&f).unwrap() * norm_conformal(&g).unwrap();
            worst = worst.max((closed - brute).norm() / scale);
        }
    }
    worst
}
