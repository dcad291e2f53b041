//! Membership diagnostics for the generalized Schwartz spaces and the
//! constructive family machinery: rapid-decay reports, the rank-one split on
//! the line, the S_{2p} Taylor test, (a-PG) growth checks, Borel's theorem for
//! families and the PG decomposition.
//!
//! Rapid decay and polynomial growth cannot be decided from finitely many
//! samples. Every verdict here is "consistent with" the property at the given
//! cutoffs and grids.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::estimates::weighted_laguerre_deriv;
use crate::jet::Jet;
use crate::poly::Poly;
use crate::radial::Params;
use crate::specfun::{falling, ln_gamma};
use crate::spherical::harmonic_decompose;
use crate::transform::{analyze, AnalysisRules, CoeffField};

// ---------------------------------------------------------------- decay

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayOrder {
    pub p: u32,
    pub sup: f64,
    /// sup over the outer band divided by sup over the middle band
    pub tail_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoffs {
    #[serde(rename = "M")]
    pub m_max: usize,
    #[serde(rename = "L")]
    pub l_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub orders: Vec<DecayOrder>,
    /// consistent with rapid decay up to order P at these cutoffs
    pub verdict: bool,
    pub first_failing_order: Option<u32>,
    pub cutoffs: Cutoffs,
    /// block weights below floor·max weight count as zero
    pub floor: f64,
}

/// Default resolution floor on Σ_μ|c|², relative to the largest block.
pub const DECAY_FLOOR: f64 = 1e-24;

pub fn decay_report(field: &CoeffField, p_max: u32) -> DecayReport {
    decay_report_with(field, p_max, DECAY_FLOOR)
}

/// Sups of (1+m+l)^p Σ_μ|c_{m,μ,l}|² for p ≤ P. Order p passes when the sup
/// over the outer band 3S/4 ≤ m+l ≤ S is strictly below the sup over the
/// middle band S/2 ≤ m+l < 3S/4, where S is the largest m+l whose block is
/// above the floor (at most M + L).
pub fn decay_report_with(field: &CoeffField, p_max: u32, floor: f64) -> DecayReport {
    let mut blocks: Vec<(usize, f64)> = Vec::new();
    for (m, sector) in field.data.iter().enumerate() {
        for l in 0..=field.l_max {
            let w: f64 = sector.iter().map(|row| row[l].norm_sqr()).sum();
            if !sector.is_empty() {
                blocks.push((m + l, w));
            }
        }
    }
    let wmax = blocks.iter().map(|b| b.1).fold(0.0, f64::max);
    let cut = floor * wmax;
    // bands sit on the resolved extent: the largest m+l above the floor
    let s_tot = blocks.iter().filter(|b| b.1 > cut).map(|b| b.0).max().unwrap_or(0);
    let mid_lo = s_tot.div_ceil(2);
    let out_lo = (3 * s_tot).div_ceil(4).max(mid_lo + 1);
    let mut orders = Vec::new();
    let mut first_fail = None;
    for p in 0..=p_max {
        let (mut sup, mut mid, mut outer) = (0.0f64, 0.0f64, 0.0f64);
        for &(s, w) in &blocks {
            let v = (1.0 + s as f64).powi(p as i32) * w;
            sup = sup.max(v);
            if w <= cut {
                continue;
            }
            if s >= out_lo {
                outer = outer.max(v);
            } else if s >= mid_lo {
                mid = mid.max(v);
            }
        }
        let ratio = if outer == 0.0 {
            0.0
        } else if mid == 0.0 {
            f64::INFINITY
        } else {
            outer / mid
        };
        let ok = s_tot < 4 || ratio < 1.0 - 1e-6;
        if !ok && first_fail.is_none() {
            first_fail = Some(p);
        }
        orders.push(DecayOrder { p, sup, tail_ratio: ratio });
    }
    DecayReport {
        orders,
        verdict: first_fail.is_none(),
        first_failing_order: first_fail,
        cutoffs: Cutoffs { m_max: field.m_max, l_max: field.l_max },
        floor,
    }
}

/// Copy of the field with every sector except m zeroed.
pub fn restrict_to_sector(field: &CoeffField, m: usize) -> CoeffField {
    field.map_entries(|mm, _, _, c| if mm == m { c } else { Complex64::new(0.0, 0.0) })
}

// ---------------------------------------------------------------- rank one

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneSplit {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// grid points where the t → 0 limit did not settle
    pub flagged: Vec<f64>,
    pub even_decay: DecayReport,
    pub odd_decay: DecayReport,
}

/// fn(x) = u(|x|^a) + x v(|x|^a) on the line: u(t) = f(t^{1/a}),
/// v(t) = g(t^{1/a})/t^{1/a} from the even/odd parts f, g. The m = 0 and m = 1
/// coefficient families of fn are reported as the membership diagnostic.
pub fn rank1_split<F>(f: F, params: &Params, t_grid: &[f64], l_max: usize, p_max: u32) -> Result<RankOneSplit>
where
    F: Fn(f64) -> f64 + Sync,
{
    if params.dim != 1 {
        return usage("rank1_split needs N = 1");
    }
    let a = params.a;
    let even = |r: f64| (f(r) + f(-r)) / 2.0;
    let odd = |r: f64| (f(r) - f(-r)) / 2.0;
    let mut out = RankOneSplit {
        t: t_grid.to_vec(),
        u: Vec::with_capacity(t_grid.len()),
        v: Vec::with_capacity(t_grid.len()),
        flagged: Vec::new(),
        even_decay: DecayReport::empty(),
        odd_decay: DecayReport::empty(),
    };
    // v is smooth in t, not in r: the limit at t → 0 is extrapolated in t
    // from points whose r stays well above rounding.
    let v_at = |t: f64| {
        let r = t.powf(1.0 / a);
        odd(r) / r
    };
    let t_small = 1e-3f64.max(1e-5f64.powf(a));
    for &t in t_grid {
        let r = t.max(0.0).powf(1.0 / a);
        out.u.push(even(r));
        if t >= t_small {
            out.v.push(v_at(t));
            continue;
        }
        let levels: Vec<f64> = (0..4).map(|i| v_at(t_small / 2f64.powi(i))).collect();
        let mut tab = levels.clone();
        for j in 1..tab.len() {
            let fac = 2f64.powi(j as i32) - 1.0;
            for i in (j..tab.len()).rev() {
                tab[i] += (tab[i] - tab[i - 1]) / fac;
            }
        }
        let lim = tab[3];
        if (tab[3] - tab[2]).abs() > 1e-6 * lim.abs().max(1.0) {
            out.flagged.push(t);
        }
        // linear interpolation between the limit and t_small
        let s = t / t_small;
        out.v.push(lim * (1.0 - s) + levels[0] * s);
    }
    let field = analyze(params, |x: &[f64]| Complex64::new(f(x[0]), 0.0), 1, l_max, &AnalysisRules::gauss(1, l_max))?;
    out.even_decay = decay_report(&restrict_to_sector(&field, 0), p_max);
    out.odd_decay = decay_report(&restrict_to_sector(&field, 1), p_max);
    Ok(out)
}

impl DecayReport {
    fn empty() -> Self {
        DecayReport {
            orders: Vec::new(),
            verdict: false,
            first_failing_order: None,
            cutoffs: Cutoffs { m_max: 0, l_max: 0 },
            floor: DECAY_FLOOR,
        }
    }
}

// ---------------------------------------------------------------- S_{2p}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2pVerdict {
    pub accept: bool,
    /// first offending (homogeneous degree, n) with a nonzero ‖x‖^{2n} h_n
    pub witness: Option<(u32, u32)>,
}

/// Accept iff every nonzero component ‖x‖^{2n} h of every homogeneous part
/// has n ≡ 0 (mod p).
pub fn s2p_membership(poly: &Poly, p: u32) -> Result<S2pVerdict> {
    if p == 0 {
        return usage("p must be positive");
    }
    let scale = poly.max_abs().max(f64::MIN_POSITIVE);
    let Some(deg) = poly.degree() else {
        return Ok(S2pVerdict { accept: true, witness: None });
    };
    for d in 0..=deg {
        let part = poly.part(d);
        if part.max_abs() <= 1e-13 * scale {
            continue;
        }
        for (n, h) in harmonic_decompose(&part)? {
            if n % p != 0 && h.poly.max_abs() > 1e-10 * scale {
                return Ok(S2pVerdict { accept: false, witness: Some((d, n)) });
            }
        }
    }
    Ok(S2pVerdict { accept: true, witness: None })
}

// ---------------------------------------------------------------- families

type FamilyFn = dyn Fn(usize, usize, f64, usize) -> Jet + Send + Sync;
type PolyFn = dyn Fn(usize, usize) -> Vec<f64> + Send + Sync;

/// A family h_{m,l} of smooth functions on [0, ∞) with derivative access
/// through jets: `jet(m, l, t, n)` returns the Taylor coefficients to order n.
#[derive(Clone)]
pub struct FamilySpec {
    pub label: String,
    pub m_max: usize,
    pub l_max: usize,
    pub n_max: usize,
    /// true when every member is bounded by a polynomial times e^{-κt}, so
    /// grid sups over a long enough grid are the true sups
    pub tail_envelope: bool,
    eval: Arc<FamilyFn>,
    poly: Option<Arc<PolyFn>>,
}

impl std::fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FamilySpec")
            .field("label", &self.label)
            .field("m_max", &self.m_max)
            .field("l_max", &self.l_max)
            .field("n_max", &self.n_max)
            .finish()
    }
}

impl FamilySpec {
    pub fn new<F>(label: impl Into<String>, m_max: usize, l_max: usize, n_max: usize, f: F) -> Self
    where
        F: Fn(usize, usize, f64, usize) -> Jet + Send + Sync + 'static,
    {
        FamilySpec {
            label: label.into(),
            m_max,
            l_max,
            n_max,
            tail_envelope: false,
            eval: Arc::new(f),
            poly: None,
        }
    }

    /// Polynomial family from its coefficient lists (ascending powers of t).
    pub fn polynomial<P>(label: impl Into<String>, m_max: usize, l_max: usize, coeffs: P) -> Self
    where
        P: Fn(usize, usize) -> Vec<f64> + Send + Sync + 'static,
    {
        let coeffs = Arc::new(coeffs);
        let c2 = coeffs.clone();
        let mut fam = FamilySpec::new(label, m_max, l_max, usize::MAX, move |m, l, t, n| {
            let x = Jet::variable(t, n);
            let mut acc = Jet::zero(n);
            for c in c2(m, l).iter().rev() {
                acc = acc.mul(&x).add_const(*c);
            }
            acc
        });
        fam.poly = Some(coeffs);
        fam
    }

    pub fn with_tail_envelope(mut self) -> Self {
        self.tail_envelope = true;
        self
    }

    pub fn jet(&self, m: usize, l: usize, t: f64, n: usize) -> Jet {
        (self.eval)(m, l, t, n)
    }

    pub fn value(&self, m: usize, l: usize, t: f64) -> f64 {
        self.jet(m, l, t, 0).value()
    }

    pub fn deriv(&self, m: usize, l: usize, t: f64, n: usize) -> f64 {
        self.jet(m, l, t, n).deriv(n)
    }

    pub fn poly_coeffs(&self, m: usize, l: usize) -> Option<Vec<f64>> {
        self.poly.as_ref().map(|p| p(m, l))
    }
}

/// The family of the identity h ≡ 0.
pub fn zero_family(m_max: usize, l_max: usize) -> FamilySpec {
    FamilySpec::polynomial("zero", m_max, l_max, |_, _| Vec::new())
}

/// (Γ(l+1)/Γ(λ_m+l+1))^{1/2} L_l^{λ_m}(t) e^{-t/2}, with exact derivatives.
pub fn laguerre_normalized_family(lambdas: &[f64], l_max: usize) -> Result<FamilySpec> {
    if lambdas.is_empty() {
        return usage("need at least one λ_m");
    }
    if let Some(l) = lambdas.iter().find(|l| **l < -1.0) {
        return usage(format!("λ_m = {l} is below -1"));
    }
    let lam: Vec<f64> = lambdas.to_vec();
    let fam = FamilySpec::new("normalized Laguerre", lam.len() - 1, l_max, usize::MAX, move |m, l, t, n| {
        let lm = lam[m];
        let norm = if lm + l as f64 + 1.0 <= 0.0 {
            // λ = -1, l = 0: L_0^{-1} = 1 and the Γ ratio has a pole; use the limit 0
            0.0
        } else {
            (0.5 * (ln_gamma(l as f64 + 1.0) - ln_gamma(lm + l as f64 + 1.0))).exp()
        };
        let d: Vec<f64> = (0..=n).map(|g| norm * weighted_laguerre_deriv(l as i64, lm, g as u32, t)).collect();
        Jet::from_derivs(&d)
    });
    Ok(fam.with_tail_envelope())
}

/// t ↦ t^c h(t^d), evaluated through jets. Integer c, d are exact at t = 0;
/// real powers need t > 0.
pub fn power_transform(fam: &FamilySpec, c: f64, d: f64) -> FamilySpec {
    let inner = fam.clone();
    let mut out = FamilySpec::new(format!("t^{c} h(t^{d})"), fam.m_max, fam.l_max, fam.n_max, move |m, l, t, n| {
        let x = Jet::variable(t, n);
        let pw = |e: f64| {
            if e.fract() == 0.0 && e >= 0.0 {
                x.powi(e as u32)
            } else {
                x.powf(e)
            }
        };
        let u = pw(d);
        let h = u.compose(&inner.jet(m, l, u.value(), n));
        pw(c).mul(&h)
    });
    out.tail_envelope = fam.tail_envelope;
    out
}

// ---------------------------------------------------------------- bump

/// ρ(t) = 1 on [0, 1/2], exp(1 - 1/(1 - σ)) on (1/2, 1), 0 beyond, with the
/// smooth ramp σ(s) = ψ(s)/(ψ(s) + ψ(1-s)), ψ(s) = e^{-1/s}, s = 2t - 1.
/// Written as exp(-exp(1/(1-s) - 1/s)) to avoid cancellation.
pub fn bump_jet(t: f64, order: usize) -> Jet {
    if t <= 0.5 {
        return Jet::constant(1.0, order);
    }
    if t >= 1.0 {
        return Jet::zero(order);
    }
    let s = Jet::variable(t, order).scale(2.0).add_const(-1.0);
    let one_minus = s.scale(-1.0).add_const(1.0);
    let g = one_minus.recip().sub(&s.recip());
    if g.value() > 700.0 {
        return Jet::zero(order);
    }
    if g.value() < -700.0 {
        return Jet::constant(1.0, order);
    }
    g.exp().scale(-1.0).exp()
}

pub fn bump(t: f64) -> f64 {
    bump_jet(t, 0).value()
}

/// Highest bump derivative order with a cached sup norm.
pub const BUMP_ORDERS: usize = 16;

/// ‖ρ^{(k)}‖_∞ for k ≤ BUMP_ORDERS by dense sampling of (1/2, 1).
pub fn bump_sup_norms() -> &'static [f64] {
    static NORMS: OnceLock<Vec<f64>> = OnceLock::new();
    NORMS.get_or_init(|| {
        let mut sup = vec![0.0f64; BUMP_ORDERS + 1];
        sup[0] = 1.0;
        let n = 20000;
        for i in 1..n {
            let t = 0.5 + 0.5 * i as f64 / n as f64;
            for (k, d) in bump_jet(t, BUMP_ORDERS).derivs().iter().enumerate() {
                sup[k] = sup[k].max(d.abs());
            }
        }
        sup
    })
}

// ---------------------------------------------------------------- Borel

/// C_{n,γ} = Σ_{j≤γ} n^{underline j} ‖ρ^{(γ-j)}‖_∞.
pub fn borel_constant(n: usize, gamma: usize) -> f64 {
    let norms = bump_sup_norms();
    (0..=gamma).map(|j| falling(n as f64, j as u32) * norms[(gamma - j).min(BUMP_ORDERS)]).sum()
}

/// R = max(max_{γ<n} (2ⁿ C_{n,γ} |d|)^{1/(n-γ)}, 1) for the effective
/// coefficient d of tⁿ.
pub fn borel_radius(n: usize, d: f64) -> f64 {
    let mut r: f64 = 1.0;
    for gamma in 0..n {
        let v = 2f64.powi(n as i32) * borel_constant(n, gamma) * d.abs();
        if v > 0.0 {
            r = r.max(v.powf(1.0 / (n - gamma) as f64));
        }
    }
    r
}

/// Σ_n d_n ρ(R_n t) tⁿ with d_n = c^{(n)}/n!, so that h^{(n)}(0) = c^{(n)}.
fn borel_sum(d: &[f64], radii: &[f64], t: f64, order: usize) -> Jet {
    let x = Jet::variable(t, order);
    let mut acc = Jet::zero(order);
    for (n, (dn, rn)) in d.iter().zip(radii).enumerate() {
        if *dn == 0.0 || rn * t >= 1.0 {
            continue;
        }
        let rho = bump_jet(rn * t, order).rescale_arg(*rn);
        acc = acc.add(&rho.mul(&x.powi(n as u32)).scale(*dn));
    }
    acc
}

/// Borel's theorem for families: h_{m,l} with h^{(n)}_{m,l}(0) = c[m][l][n]
/// for n ≤ n_max and derivatives of every order.
pub fn borel_family(c: Vec<Vec<Vec<f64>>>, n_max: usize) -> Result<FamilySpec> {
    if c.is_empty() || c[0].is_empty() {
        return usage("empty coefficient table");
    }
    let l_max = c[0].len() - 1;
    if c.iter().any(|row| row.len() != l_max + 1) {
        return usage("ragged coefficient table");
    }
    let mut fact = vec![1.0f64; n_max + 1];
    for n in 1..=n_max {
        fact[n] = fact[n - 1] * n as f64;
    }
    let table: Vec<Vec<(Vec<f64>, Vec<f64>)>> = c
        .iter()
        .map(|row| {
            row.iter()
                .map(|cn| {
                    let d: Vec<f64> = (0..=n_max).map(|n| cn.get(n).copied().unwrap_or(0.0) / fact[n]).collect();
                    let r: Vec<f64> = d.iter().enumerate().map(|(n, dn)| borel_radius(n, *dn)).collect();
                    (d, r)
                })
                .collect()
        })
        .collect();
    let m_max = table.len() - 1;
    Ok(FamilySpec::new("Borel family", m_max, l_max, usize::MAX, move |m, l, t, n| {
        let (d, r) = &table[m][l];
        borel_sum(d, r, t, n)
    }))
}

// ---------------------------------------------------------------- a-PG

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApgOptions {
    /// largest accepted growth exponent of the tail envelope in (1+m+l)
    pub exponent_cap: f64,
}

impl Default for ApgOptions {
    fn default() -> Self {
        ApgOptions { exponent_cap: 12.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApgRow {
    pub b: f64,
    pub n: usize,
    /// (U(S) - U(S/2)) / ln((1+S)/(1+S/2)) for the running-max envelope
    /// U(s) = max_{m+l ≤ s} ln S_{m,l}
    pub exponent: f64,
    pub max_sup: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApgReport {
    pub a: f64,
    pub rows: Vec<ApgRow>,
    pub verdict: bool,
    /// false when the family has no decay envelope and sups are grid sups only
    pub tail_envelope: bool,
}

pub fn apg_check(fam: &FamilySpec, a: f64, b_list: &[f64], n_max: usize, t_grid: &[f64]) -> ApgReport {
    apg_check_with(fam, a, b_list, n_max, t_grid, &ApgOptions::default())
}

/// S_{m,l} = max over the grid of t^{max((m+b)/a, 0)} |h^{(n)}_{m,l}(t)|; the
/// growth exponent is read off the upper envelope over the outer half of m+l.
pub fn apg_check_with(
    fam: &FamilySpec,
    a: f64,
    b_list: &[f64],
    n_max: usize,
    t_grid: &[f64],
    opts: &ApgOptions,
) -> ApgReport {
    // derivs[m][l][i] = h^{(0..=n_max)} at t_grid[i]
    let derivs: Vec<Vec<Vec<Vec<f64>>>> = (0..=fam.m_max)
        .map(|m| {
            (0..=fam.l_max)
                .map(|l| t_grid.iter().map(|&t| fam.jet(m, l, t, n_max).derivs()).collect())
                .collect()
        })
        .collect();
    let s_tot = fam.m_max + fam.l_max;
    let mut rows = Vec::new();
    for &b in b_list {
        for n in 0..=n_max {
            let mut env = vec![f64::NEG_INFINITY; s_tot + 1];
            for (m, dm) in derivs.iter().enumerate() {
                let e = ((m as f64 + b) / a).max(0.0);
                for (l, dl) in dm.iter().enumerate() {
                    let s = t_grid
                        .iter()
                        .zip(dl)
                        .map(|(&t, d)| if e == 0.0 { d[n].abs() } else { t.powf(e) * d[n].abs() })
                        .fold(0.0, f64::max);
                    env[m + l] = env[m + l].max(s.ln());
                }
            }
            for i in 1..env.len() {
                env[i] = env[i].max(env[i - 1]);
            }
            let max_sup = env[s_tot].exp();
            let half = s_tot / 2;
            let exponent = if s_tot < 2 || env[s_tot] == f64::NEG_INFINITY {
                0.0
            } else if env[half] == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                (env[s_tot] - env[half]) / ((1.0 + s_tot as f64) / (1.0 + half as f64)).ln()
            };
            let pass = max_sup.is_finite() && exponent <= opts.exponent_cap;
            rows.push(ApgRow { b, n, exponent, max_sup, pass });
        }
    }
    let verdict = rows.iter().all(|r| r.pass);
    ApgReport { a, rows, verdict, tail_envelope: fam.tail_envelope }
}

// ---------------------------------------------------------------- PG decomposition

pub struct PgDecomposition {
    /// h_{m,l;j} for j = 0..q-1
    pub parts: Vec<FamilySpec>,
    /// sup over the check grid of |h - Σ_j t^j h_j(t^q)|
    pub residual: f64,
}

/// Default grid for the reconstruction residual: 501 points on [0, 10].
pub fn pg_residual_grid() -> Vec<f64> {
    crate::estimates::uniform_grid(0.0, 10.0, 501)
}

pub fn pg_decompose(fam: &FamilySpec, q: usize, n_max: usize) -> Result<PgDecomposition> {
    pg_decompose_with(fam, q, n_max, &pg_residual_grid())
}

/// h(t) = Σ_{j<q} t^j h_j(t^q). The h_j come from Borel families on the
/// Taylor data h^{(nq+j)}(0)/(nq+j)!; the remainder h - Σ t^j h_j(t^q) is
/// folded into h_0 through s ↦ s^{1/q}. Polynomial families split exactly.
pub fn pg_decompose_with(fam: &FamilySpec, q: usize, n_max: usize, grid: &[f64]) -> Result<PgDecomposition> {
    if q == 0 {
        return usage("q must be positive");
    }
    let parts = if q == 1 {
        vec![fam.clone()]
    } else if fam.poly.is_some() {
        split_polynomial(fam, q)
    } else {
        split_general(fam, q, n_max)?
    };
    let mut residual: f64 = 0.0;
    for m in 0..=fam.m_max {
        for l in 0..=fam.l_max {
            for &t in grid {
                let rec: f64 = parts
                    .iter()
                    .enumerate()
                    .map(|(j, p)| t.powi(j as i32) * p.value(m, l, t.powi(q as i32)))
                    .sum();
                residual = residual.max((fam.value(m, l, t) - rec).abs());
            }
        }
    }
    Ok(PgDecomposition { parts, residual })
}

fn split_polynomial(fam: &FamilySpec, q: usize) -> Vec<FamilySpec> {
    (0..q)
        .map(|j| {
            let src = fam.clone();
            FamilySpec::polynomial(format!("{} part {j}", fam.label), fam.m_max, fam.l_max, move |m, l| {
                src.poly_coeffs(m, l).unwrap_or_default().into_iter().skip(j).step_by(q).collect()
            })
        })
        .collect()
}

fn split_general(fam: &FamilySpec, q: usize, n_max: usize) -> Result<Vec<FamilySpec>> {
    let mut base = Vec::with_capacity(q);
    for j in 0..q {
        let mut table = vec![vec![Vec::new(); fam.l_max + 1]; fam.m_max + 1];
        for (m, row) in table.iter_mut().enumerate() {
            for (l, cell) in row.iter_mut().enumerate() {
                let taylor = fam.jet(m, l, 0.0, n_max);
                let mut fact = 1.0;
                let mut cs = Vec::new();
                for n in 0.. {
                    let k = n * q + j;
                    if k > n_max {
                        break;
                    }
                    if n > 0 {
                        fact *= n as f64;
                    }
                    // (h_j)^{(n)}(0) = n! h^{(k)}(0)/k!
                    cs.push(fact * taylor.c[k]);
                }
                *cell = cs;
            }
        }
        let nj = table[0][0].len().saturating_sub(1);
        base.push(borel_family(table, nj)?);
    }
    let base = Arc::new(base);
    let src = fam.clone();
    // Taylor jet of Σ_j t^j h_j(t^q) at t
    let recon = {
        let base = base.clone();
        move |m: usize, l: usize, t: f64, n: usize| {
            let x = Jet::variable(t, n);
            let u = x.powi(q as u32);
            let mut acc = Jet::zero(n);
            for (j, p) in base.iter().enumerate() {
                acc = acc.add(&x.powi(j as u32).mul(&u.compose(&p.jet(m, l, u.value(), n))));
            }
            acc
        }
    };
    let mut parts: Vec<FamilySpec> = base.iter().cloned().collect();
    let h0 = base[0].clone();
    let qf = q as f64;
    parts[0] = FamilySpec::new(format!("{} part 0", fam.label), fam.m_max, fam.l_max, usize::MAX, move |m, l, s, n| {
        let head = h0.jet(m, l, s, n);
        if s <= 0.0 {
            return head;
        }
        let u = Jet::variable(s, n).powf(1.0 / qf);
        let t0 = u.value();
        let rem = src.jet(m, l, t0, n).sub(&recon(m, l, t0, n));
        head.add(&u.compose(&rem))
    });
    for (j, p) in parts.iter_mut().enumerate().skip(1) {
        p.label = format!("{} part {j}", fam.label);
    }
    Ok(parts)
}
