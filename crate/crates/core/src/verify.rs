//! Named invariant suites behind `kaf verify`. Each suite returns a table of
//! checks with the measured value, the limit it is held to and a verdict.
//! Reports contain no timings, so equal configs give equal reports.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::estimates::{check_duran, check_koornwinder, check_weighted, uniform_grid, DuranGrid, KoornwinderGrid, WeightedGrid};
use crate::jet::Jet;
use crate::quadrature::radial_rule;
use crate::radial::{apply_diff, basis_all, basis_eval, cayley_defect, sl2_matrix, DiffOp, Params, Sl2};
use crate::transform::{
    analyze, apply_fourier, classical_fourier_oracle, fourier_order, synthesize, AnalysisRules, CoeffField, OracleBox,
};

pub const SUITES: [&str; 8] = ["basis", "sl2", "fourier", "estimates", "schwartz", "appendixB", "harmonic", "conformal"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub params: Params,
    #[serde(rename = "M")]
    pub m_max: usize,
    #[serde(rename = "L")]
    pub l_max: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    /// `value <= limit` passes unless the row says otherwise in `detail`
    pub limit: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckRow {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        CheckRow { name: name.into(), value, limit, pass: value <= limit, detail: String::new() }
    }

    fn flag(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        CheckRow {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            limit: 1.0,
            pass: ok,
            detail: detail.into(),
        }
    }

    fn with(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let rows = match name {
        "basis" => basis(cfg)?,
        "sl2" => sl2(cfg)?,
        "fourier" => fourier(cfg)?,
        "estimates" => estimates(),
        "schwartz" => schwartz(cfg)?,
        "appendixB" => borel_pg(cfg)?,
        "harmonic" => harmonic(cfg)?,
        "conformal" => conformal(cfg)?,
        _ => return usage(format!("unknown suite '{name}' (expected one of {})", SUITES.join(", "))),
    };
    let passed = rows.iter().all(|r| r.pass);
    Ok(SuiteReport { suite: name.to_string(), rows, passed })
}

fn valid_ms(p: &Params, m_max: usize) -> Vec<usize> {
    (0..=m_max).filter(|&m| p.lambda(m) > -1.0).collect()
}

fn basis(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let p = &cfg.params;
    let l_max = cfg.l_max;
    let mut worst: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for m in valid_ms(p, cfg.m_max) {
        let rule = radial_rule(p, m, l_max + 10)?;
        let vals: Vec<Vec<f64>> = rule.nodes.iter().map(|&r| basis_all(p, m, l_max, r)).collect::<Result<_>>()?;
        for i in 0..=l_max {
            for j in 0..=i {
                let g: f64 = vals.iter().zip(&rule.weights).map(|(v, w)| w * v[i] * v[j]).sum();
                let dev = (g - if i == j { 1.0 } else { 0.0 }).abs();
                worst = worst.max(dev);
                if i == j {
                    worst_norm = worst_norm.max(dev);
                }
            }
        }
    }
    Ok(vec![
        CheckRow::at_most("gram deviation", worst, 1e-10),
        CheckRow::at_most("norm deviation", worst_norm, 1e-10),
    ])
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// max |entry| over the leading n×n block, away from the truncation edge.
fn block_max(m: &DMatrix<Complex64>, n: usize) -> f64 {
    m.view((0, 0), (n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn sl2(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let p = &cfg.params;
    let l_max = cfg.l_max.min(10);
    let mut worst: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for m in valid_ms(p, cfg.m_max.min(2)) {
        let lam = p.lambda(m);
        let rule = radial_rule(p, m, l_max + 20)?;
        let basis: Vec<Vec<f64>> =
            rule.nodes.iter().map(|&r| basis_all(p, m, l_max + 1, r)).collect::<Result<_>>()?;
        for (op, x) in [(DiffOp::H, Sl2::H), (DiffOp::EPlus, Sl2::EPlus), (DiffOp::EMinus, Sl2::EMinus)] {
            let mat = sl2_matrix(x, lam, l_max + 2);
            for l in 0..=l_max {
                let fl = |r: f64| Complex64::new(basis_eval(p, m, l, r).unwrap_or(f64::NAN), 0.0);
                let applied: Vec<Complex64> =
                    rule.nodes.iter().map(|&r| apply_diff(p, m, op, fl, r)).collect::<Result<_>>()?;
                for lp in 0..=l_max {
                    let q: Complex64 =
                        applied.iter().zip(&basis).zip(&rule.weights).map(|((g, b), w)| g * (b[lp] * w)).sum();
                    worst = worst.max((q - mat[(lp, l)]).norm());
                }
            }
        }
        // bracket relations on the interior of the truncated matrices
        let n = l_max + 1;
        let len = n + 2;
        let [h, ep, em, k, np, nm] =
            [Sl2::H, Sl2::EPlus, Sl2::EMinus, Sl2::K, Sl2::NPlus, Sl2::NMinus].map(|x| sl2_matrix(x, lam, len));
        let two = Complex64::new(2.0, 0.0);
        let defects = [
            block_max(&(commutator(&h, &ep) - &ep * two), n),
            block_max(&(commutator(&h, &em) + &em * two), n),
            block_max(&(commutator(&ep, &em) - &h), n),
            block_max(&(commutator(&k, &np) - &np * two), n),
            block_max(&(commutator(&k, &nm) + &nm * two), n),
            block_max(&(commutator(&np, &nm) - &k), n),
        ];
        let scale = block_max(&k, n);
        rel = defects.iter().fold(rel, |acc, d| acc.max(d / scale));
    }
    Ok(vec![
        CheckRow::at_most("differential vs matrix elements", worst, 1e-6)
            .with(format!("l <= {l_max}, m <= {}", cfg.m_max.min(2))),
        CheckRow::at_most("bracket relations (relative)", rel, 1e-12),
        CheckRow::at_most("cayley transform", cayley_defect(), 1e-14),
    ])
}

fn float_phase_order(a: f64, idx_max: usize, k_max: u64) -> u64 {
    let phase = |m: usize, l: usize| Complex64::from_polar(1.0, -std::f64::consts::PI * (m as f64 / a + l as f64));
    (1..=k_max)
        .find(|&k| {
            (0..=idx_max).all(|m| (0..=idx_max).all(|l| (phase(m, l).powu(k as u32) - 1.0).norm() < 1e-9))
        })
        .unwrap_or(0)
}

fn fourier(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let p = &cfg.params;
    let order = fourier_order(p)?;
    let brute = float_phase_order(p.a, 50, 256.max(order));
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    let field = CoeffField::zeros(p.clone(), cfg.m_max, cfg.l_max)
        .map_entries(|_, _, _, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    let mut g = field.clone();
    for _ in 0..order {
        g = apply_fourier(&g);
    }
    let mut rows = vec![
        CheckRow::flag("order matches phase enumeration", order == brute, format!("K = {order}, brute force {brute}")),
        CheckRow::at_most(format!("F^{order} = id residual"), g.max_diff(&field), 1e-12),
    ];
    // the ground state e^{-r^a/a} is fixed by F
    let a = p.a;
    let ground = analyze(p, |x: &[f64]| {
        let rr = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new((-rr.powf(a) / a).exp(), 0.0)
    }, 0, cfg.l_max, &AnalysisRules::gauss(0, cfg.l_max));
    match ground {
        Ok(f) => rows.push(CheckRow::at_most("ground state fixed point", apply_fourier(&f).max_diff(&f), 1e-10)),
        Err(crate::KafError::Capability(_)) => {}
        Err(e) => return Err(e),
    }
    if p.a == 2.0 && p.k == 0.0 && p.dim <= 2 {
        let f = |x: &[f64]| {
            let r2 = x.iter().map(|v| v * v).sum::<f64>();
            Complex64::new((1.0 + x[0]) * (-r2 / 2.0).exp(), 0.0)
        };
        let (m_max, l_max) = (4, 6);
        let field = analyze(p, f, m_max, l_max, &AnalysisRules::gauss(m_max, l_max))?;
        let ff = apply_fourier(&field);
        let bx = if p.dim == 1 {
            OracleBox { half_width: 12.0, panels: 48, order: 12 }
        } else {
            OracleBox { half_width: 10.0, panels: 30, order: 10 }
        };
        let mut worst: f64 = 0.0;
        for &u in &[-2.0, -0.5, 0.0, 1.3] {
            let xi: Vec<f64> = if p.dim == 1 { vec![u] } else { vec![u, 0.4 - u / 2.0] };
            let spectral = synthesize(&ff, &xi)?;
            let direct = classical_fourier_oracle(f, &xi, &bx)?;
            worst = worst.max((spectral - direct).norm());
        }
        rows.push(CheckRow::at_most("classical oracle (1+x1) gaussian", worst, 1e-5));
    }
    Ok(rows)
}

fn estimates() -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for rep in [check_duran(&DuranGrid::default()), check_weighted(&WeightedGrid::default())] {
        rows.push(CheckRow::at_most(format!("{} violations", rep.name), rep.violations as f64, 0.0).with(format!(
            "{} cases, min relative margin {:.3e} at {}",
            rep.cases, rep.min_rel_margin, rep.worst_case
        )));
    }
    let k = check_koornwinder(&KoornwinderGrid::default());
    rows.push(CheckRow::at_most("koornwinder overshoot", k.max_overshoot, 1e-12));
    rows.push(CheckRow::flag("koornwinder monotone", k.monotone, format!("{} cases", k.cases)));
    rows.push(CheckRow::at_most("koornwinder final error", k.max_final_error, 1e-8));
    rows
}

fn schwartz(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    use crate::schwartz::{apg_check, decay_report, laguerre_normalized_family, FamilySpec};
    let p = &cfg.params;
    let a = p.a;
    let (m_max, l_max) = (cfg.m_max, cfg.l_max);
    let f = |x: &[f64]| {
        let rr = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new((1.0 + x[0]) * (-2.0 * rr.powf(a) / a).exp(), 0.0)
    };
    let field = analyze(p, f, m_max, l_max, &AnalysisRules::gauss(m_max, l_max))?;
    let rep = decay_report(&field, 6);
    let mut rows = vec![CheckRow::flag(
        "decay verdict (1+x1) exp(-2 r^a/a)",
        rep.verdict,
        format!("first failing order {:?}", rep.first_failing_order),
    )];
    let slow = CoeffField::zeros(p.clone(), 0, 40).map_entries(|_, _, l, _| Complex64::new(1.0 / ((1 + l) as f64).powi(2), 0.0));
    let rep = decay_report(&slow, 6);
    let caught = !rep.verdict && rep.first_failing_order.is_some_and(|q| q <= 4);
    rows.push(CheckRow::flag(
        "negative control 1/(1+l)^2 rejected by p = 4",
        caught,
        format!("first failing order {:?}", rep.first_failing_order),
    ));
    let grid = uniform_grid(0.0, 400.0, 2000);
    let lams: Vec<f64> = (0..=20).map(|m| p.lambda(m)).collect();
    if lams.iter().all(|&l| l > -1.0) {
        let fam = laguerre_normalized_family(&lams, 20)?;
        let rep = apg_check(&fam, a, &[-2.0, 0.0, 2.0], 3, &grid);
        rows.push(CheckRow::flag("laguerre family is a-PG", rep.verdict, ""));
    }
    let growth = FamilySpec::new("e^{(m+l) t}", 10, 10, usize::MAX, |m, l, t, n| {
        Jet::variable(t, n).scale((m + l) as f64).exp()
    });
    let rep = apg_check(&growth, a, &[0.0], 2, &uniform_grid(0.0, 5.0, 200));
    rows.push(CheckRow::flag("e^{(m+l) t} family rejected", !rep.verdict, ""));
    Ok(rows)
}

fn borel_pg(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    use crate::schwartz::{borel_family, laguerre_normalized_family, pg_decompose, FamilySpec};
    let n_max = 5;
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    let table: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|_| (0..3).map(|_| (0..=n_max).map(|_| r.random_range(-1.0..1.0)).collect()).collect())
        .collect();
    let fam = borel_family(table.clone(), n_max)?;
    let mut jet_err: f64 = 0.0;
    for (m, row) in table.iter().enumerate() {
        for (l, c) in row.iter().enumerate() {
            let d = fam.jet(m, l, 0.0, n_max).derivs();
            jet_err = c.iter().zip(&d).fold(jet_err, |acc, (x, y)| acc.max((x - y).abs()));
        }
    }
    let mut tail: f64 = 0.0;
    for i in 0..=100 {
        let t = 1.0 + i as f64 / 10.0;
        for m in 0..3 {
            for l in 0..3 {
                tail = tail.max(fam.value(m, l, t).abs());
            }
        }
    }
    let exp_family = FamilySpec::new("e^{-(1+m+l) t}", 3, 3, usize::MAX, |m, l, t, n| {
        Jet::variable(t, n).scale(-(1.0 + (m + l) as f64)).exp()
    });
    let lams: Vec<f64> = (0..=2).map(|m| cfg.params.lambda(m).max(0.0)).collect();
    let lag = laguerre_normalized_family(&lams, 4)?;
    let mut pg: f64 = 0.0;
    for fam in [&exp_family, &lag] {
        for q in 1..=3 {
            pg = pg.max(pg_decompose(fam, q, 9)?.residual);
        }
    }
    Ok(vec![
        CheckRow::at_most("borel jet at 0", jet_err, 1e-12),
        CheckRow::at_most("borel support in [0, 1)", tail, 0.0),
        CheckRow::at_most("pg reconstruction residual", pg, 1e-9).with("q = 1, 2, 3"),
    ])
}

fn harmonic(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    use crate::poly::Poly;
    use crate::schwartz::s2p_membership;
    use crate::spherical::{
        check_derivative_bound, check_pointwise_bound, fischer_inner, fischer_l2_ratio, random_harmonic, sphere_inner,
        sphere_norm,
    };
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut checks, mut violations) = (0usize, 0usize);
    let mut worst_margin = f64::INFINITY;
    let mut fischer_err: f64 = 0.0;
    for i in 0..40 {
        let dim = 2 + i % 2;
        let m = (i / 2 % 7) as u32;
        let p = random_harmonic(&mut r, dim, m);
        let norm = sphere_norm(&p.poly, m)?;
        let x: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let rx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for g in 0..=2u32 {
            for gamma in crate::poly::multi_indices(dim, g) {
                for (margin, scale) in [
                    (check_derivative_bound(&p, &gamma)?, norm),
                    (check_pointwise_bound(&p, &gamma, &x)?, norm * rx.max(1.0).powi(m as i32)),
                ] {
                    checks += 1;
                    violations += (margin < -1e-9 * scale) as usize;
                    worst_margin = worst_margin.min(margin / scale);
                }
            }
        }
        let q = random_harmonic(&mut r, dim, m);
        let f = fischer_inner(&p.poly, &q.poly);
        let l2 = fischer_l2_ratio(m, dim) * sphere_inner(&p.poly, &q.poly, m)?;
        fischer_err = fischer_err.max((f - l2).abs() / f.abs().max(l2.abs()).max(f64::MIN_POSITIVE));
    }
    // ‖x‖² x1 has an n = 1 harmonic component, ‖x‖⁴ x1 only n = 2
    let x1 = Poly::monomial(vec![1, 0, 0], 1.0);
    let r2x1 = x1.mul_norm_sq();
    let r4x1 = r2x1.mul_norm_sq();
    let s2p_ok = s2p_membership(&r2x1, 1)?.accept
        && !s2p_membership(&r2x1, 2)?.accept
        && s2p_membership(&r4x1, 2)?.accept
        && !s2p_membership(&r4x1.add(&x1), 3)?.accept;
    Ok(vec![
        CheckRow::at_most("bound violations", violations as f64, 0.0)
            .with(format!("{checks} checks, worst relative margin {worst_margin:.3e}")),
        CheckRow::at_most("fischer vs sphere inner product", fischer_err, 1e-8),
        CheckRow::flag("S_2p membership examples", s2p_ok, ""),
    ])
}

fn conformal(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let s = crate::conformal::conformal_suite(&[2, 3], 20, cfg.seed)?;
    let mut rows: Vec<CheckRow> = s
        .rows
        .iter()
        .map(|row| {
            let mut c = CheckRow::at_most(format!("N={} {} skew defect", row.dim, row.generator), row.worst_rel_defect, 1e-8);
            if !row.stable {
                c.pass = false;
                c.detail = "image left the gaussian class".into();
            }
            c
        })
        .collect();
    rows.push(CheckRow::at_most("bracket homomorphism", s.bracket_defect, 1e-12));
    rows.push(CheckRow::at_most("scaling isometry", s.phi_defect, 1e-10));
    Ok(rows)
}
