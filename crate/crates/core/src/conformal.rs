//! Closed-form operator algebra for the minimal representation of the
//! conformal group on L²(ℝ^N, ‖x‖^{-1}dx).
//!
//! A [`TermSum`] is a finite sum of c·x^α‖x‖^s e^{-κ‖x‖²}. The canonical form
//! keeps s ∈ {0, 1} wherever possible: even powers ‖x‖² are expanded into the
//! polynomial, and when negative powers occur the polynomial is split into
//! harmonic pieces so that ‖x‖² factors cancel exactly.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{capability, domain, usage, Result};
use crate::poly::{multi_indices, Poly};
use crate::specfun::ln_gamma;
use crate::spherical::harmonic_decompose;

const PRUNE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex64,
    pub alpha: Vec<u32>,
    pub s: i32,
    pub kappa: f64,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let mono: f64 = self.alpha.iter().zip(x).map(|(&a, v)| v.powi(a as i32)).product();
        let rs = if self.s == 0 { 1.0 } else { r2.sqrt().powi(self.s) };
        self.coeff * (mono * rs * (-self.kappa * r2).exp())
    }
}

/// Σ c·x^α‖x‖^s e^{-κ‖x‖²} on ℝ^N, kept in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSum {
    pub dim: usize,
    pub terms: Vec<Term>,
}

type CPoly = BTreeMap<Vec<u32>, Complex64>;

fn cpoly_add(p: &mut CPoly, alpha: Vec<u32>, c: Complex64) {
    *p.entry(alpha).or_insert(Complex64::new(0.0, 0.0)) += c;
}

fn cpoly_mul_norm_sq(p: &CPoly, dim: usize) -> CPoly {
    let mut out = CPoly::new();
    for (a, c) in p {
        for j in 0..dim {
            let mut b = a.clone();
            b[j] += 2;
            cpoly_add(&mut out, b, *c);
        }
    }
    out
}

fn to_real(p: &CPoly, dim: usize, imag: bool) -> Poly {
    let mut out = Poly::zero(dim);
    for (a, c) in p {
        let v = if imag { c.im } else { c.re };
        if v != 0.0 {
            out.add_term(a.clone(), v);
        }
    }
    out
}

fn expanded(alpha: &[u32], c: Complex64, k: i32, dim: usize) -> CPoly {
    let mut p = CPoly::new();
    p.insert(alpha.to_vec(), c);
    for _ in 0..k {
        p = cpoly_mul_norm_sq(&p, dim);
    }
    p
}

// canonical form of one (κ, parity of s) group
fn normalize_group(
    dim: usize,
    group: &[(Vec<u32>, i32, Complex64)],
    odd: bool,
    floor: f64,
) -> Vec<(Vec<u32>, i32, Complex64)> {
    let scale = group.iter().map(|g| g.2.norm()).fold(floor, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let target = i32::from(odd);
    let smin = group.iter().map(|g| g.1).min().unwrap_or(target);
    let base = smin.min(target);
    let mut q = CPoly::new();
    for (a, s, c) in group {
        for (b, v) in expanded(a, *c, (s - base) / 2, dim) {
            cpoly_add(&mut q, b, v);
        }
    }
    let mut out: BTreeMap<(i32, Vec<u32>), Complex64> = BTreeMap::new();
    if base == target {
        for (a, c) in q {
            *out.entry((target, a)).or_default() += c;
        }
    } else {
        let mut by_deg: BTreeMap<u32, CPoly> = BTreeMap::new();
        for (a, c) in q {
            by_deg.entry(a.iter().sum()).or_default().insert(a, c);
        }
        for part in by_deg.values() {
            for (imag, unit) in [(false, Complex64::new(1.0, 0.0)), (true, Complex64::new(0.0, 1.0))] {
                let rp = to_real(part, dim, imag);
                if rp.is_zero() {
                    continue;
                }
                // homogeneous by construction, so decomposition cannot fail
                let pieces = harmonic_decompose(&rp).unwrap_or_default();
                for (n, h) in pieces {
                    let sp = base + 2 * n as i32;
                    let (s_out, k) = if sp >= target { (target, (sp - target) / 2) } else { (sp, 0) };
                    for (a, v) in &h.poly.terms {
                        for (b, w) in expanded(a, unit * *v, k, dim) {
                            *out.entry((s_out, b)).or_default() += w;
                        }
                    }
                }
            }
        }
    }
    out.into_iter()
        .filter(|(_, c)| c.norm() > PRUNE * scale)
        .map(|((s, a), c)| (a, s, c))
        .collect()
}

// Terms merged on equal (κ, s, α) only; intermediate results skip the
// harmonic normalization, which runs once in `finish`.
#[derive(Debug, Clone)]
struct Raw {
    dim: usize,
    terms: Vec<Term>,
    // largest coefficient seen before cancellation, the pruning reference
    scale: f64,
}

impl Raw {
    fn map<F: FnMut(&Term, &mut Vec<Term>)>(&self, mut f: F) -> Raw {
        let mut out = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            f(t, &mut out);
        }
        Raw::merged(self.dim, out, self.scale)
    }

    fn merged(dim: usize, terms: Vec<Term>, scale: f64) -> Raw {
        let scale = terms.iter().map(|t| t.coeff.norm()).fold(scale, f64::max);
        let mut m: BTreeMap<(u64, i32, Vec<u32>), Complex64> = BTreeMap::new();
        for t in terms {
            *m.entry((t.kappa.to_bits(), t.s, t.alpha)).or_default() += t.coeff;
        }
        let terms = m
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|((kb, s, alpha), coeff)| Term { coeff, alpha, s, kappa: f64::from_bits(kb) })
            .collect();
        Raw { dim, terms, scale }
    }

    fn finish(self) -> TermSum {
        TermSum::from_raw_scaled(self.dim, self.terms, self.scale)
    }

    fn add(&self, o: &Raw) -> Raw {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        Raw::merged(self.dim, t, self.scale.max(o.scale))
    }

    fn sub(&self, o: &Raw) -> Raw {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    fn scale(&self, c: Complex64) -> Raw {
        self.map(|t, out| out.push(Term { coeff: t.coeff * c, ..t.clone() }))
    }

    fn mul_coordinate(&self, j: usize) -> Raw {
        self.map(|t, out| {
            let mut a = t.alpha.clone();
            a[j] += 1;
            out.push(Term { alpha: a, ..t.clone() });
        })
    }

    fn mul_norm_pow(&self, p: i32) -> Raw {
        self.map(|t, out| out.push(Term { s: t.s + p, ..t.clone() }))
    }

    // ∂_j‖x‖^s = s x_j‖x‖^{s-2}, ∂_j e^{-κ‖x‖²} = -2κ x_j e^{-κ‖x‖²}
    fn partial(&self, j: usize) -> Raw {
        self.map(|t, out| {
            let aj = t.alpha[j];
            if aj > 0 {
                let mut a = t.alpha.clone();
                a[j] -= 1;
                out.push(Term { coeff: t.coeff * aj as f64, alpha: a, ..t.clone() });
            }
            let mut up = t.alpha.clone();
            up[j] += 1;
            if t.s != 0 {
                out.push(Term { coeff: t.coeff * t.s as f64, alpha: up.clone(), s: t.s - 2, kappa: t.kappa });
            }
            out.push(Term { coeff: t.coeff * (-2.0 * t.kappa), alpha: up, s: t.s, kappa: t.kappa });
        })
    }

    fn laplacian(&self) -> Raw {
        let mut acc = Raw { dim: self.dim, terms: Vec::new(), scale: 0.0 };
        for j in 0..self.dim {
            acc = acc.add(&self.partial(j).partial(j));
        }
        acc
    }

    fn euler(&self) -> Raw {
        self.map(|t, out| {
            let h = t.degree() as f64 + t.s as f64;
            out.push(Term { coeff: t.coeff * h, ..t.clone() });
            out.push(Term { coeff: t.coeff * (-2.0 * t.kappa), s: t.s + 2, ..t.clone() });
        })
    }
}

impl TermSum {
    pub fn zero(dim: usize) -> TermSum {
        TermSum { dim, terms: Vec::new() }
    }

    /// Validates multi-index lengths and κ > 0, then normalizes.
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<TermSum> {
        if dim == 0 {
            return usage("dimension must be at least 1");
        }
        for t in &terms {
            if t.alpha.len() != dim {
                return usage(format!("multi-index {:?} does not have length {dim}", t.alpha));
            }
            if !(t.kappa > 0.0 && t.kappa.is_finite()) {
                return usage(format!("Gaussian rate must be positive, got {}", t.kappa));
            }
        }
        Ok(TermSum::from_raw(dim, terms))
    }

    fn from_raw(dim: usize, terms: Vec<Term>) -> TermSum {
        TermSum::from_raw_scaled(dim, terms, 0.0)
    }

    // coefficients below 1e-13 of max(`scale`, group maximum) are rounding residue
    fn from_raw_scaled(dim: usize, terms: Vec<Term>, scale: f64) -> TermSum {
        let mut groups: BTreeMap<(u64, bool), Vec<(Vec<u32>, i32, Complex64)>> = BTreeMap::new();
        for t in terms {
            if t.coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            groups
                .entry((t.kappa.to_bits(), t.s.rem_euclid(2) == 1))
                .or_default()
                .push((t.alpha, t.s, t.coeff));
        }
        let mut out = Vec::new();
        for ((kb, odd), g) in groups {
            let kappa = f64::from_bits(kb);
            for (alpha, s, coeff) in normalize_group(dim, &g, odd, scale) {
                out.push(Term { coeff, alpha, s, kappa });
            }
        }
        out.sort_by(|a, b| {
            (a.kappa.to_bits(), a.s, &a.alpha).cmp(&(b.kappa.to_bits(), b.s, &b.alpha))
        });
        TermSum { dim, terms: out }
    }

    /// c·x^α‖x‖^s e^{-κ‖x‖²}
    pub fn monomial(alpha: Vec<u32>, s: i32, kappa: f64, coeff: Complex64) -> Result<TermSum> {
        let dim = alpha.len();
        TermSum::new(dim, vec![Term { coeff, alpha, s, kappa }])
    }

    /// e^{-κ‖x‖²}
    pub fn gaussian(dim: usize, kappa: f64) -> Result<TermSum> {
        TermSum::monomial(vec![0; dim], 0, kappa, Complex64::new(1.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Smallest and largest power of ‖x‖.
    pub fn s_range(&self) -> Option<(i32, i32)> {
        let lo = self.terms.iter().map(|t| t.s).min()?;
        let hi = self.terms.iter().map(|t| t.s).max()?;
        Some((lo, hi))
    }

    /// True when every term has s ∈ {0, 1}.
    pub fn in_gaussian_class(&self) -> bool {
        self.terms.iter().all(|t| t.s == 0 || t.s == 1)
    }

    /// ‖F‖ < ∞ in L²(‖x‖^{-1}dx): 2(|α| + s) + N - 2 > -1 for every term.
    pub fn is_square_integrable(&self) -> bool {
        self.terms
            .iter()
            .all(|t| 2 * (t.degree() as i64 + t.s as i64) + self.dim as i64 - 2 > -1)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    fn raw(&self) -> Raw {
        Raw { dim: self.dim, terms: self.terms.clone(), scale: self.max_abs() }
    }

    pub fn add(&self, o: &TermSum) -> TermSum {
        self.raw().add(&o.raw()).finish()
    }

    pub fn sub(&self, o: &TermSum) -> TermSum {
        self.raw().sub(&o.raw()).finish()
    }

    pub fn scale(&self, c: Complex64) -> TermSum {
        self.raw().scale(c).finish()
    }

    /// x_j·F, j 0-based.
    pub fn mul_coordinate(&self, j: usize) -> TermSum {
        self.raw().mul_coordinate(j).finish()
    }

    /// ‖x‖^p·F
    pub fn mul_norm_pow(&self, p: i32) -> TermSum {
        self.raw().mul_norm_pow(p).finish()
    }

    /// ∂_j F, j 0-based.
    pub fn partial(&self, j: usize) -> TermSum {
        self.raw().partial(j).finish()
    }

    pub fn laplacian(&self) -> TermSum {
        self.raw().laplacian().finish()
    }

    /// E_x = Σ x_j∂_j: x^α‖x‖^s is homogeneous of degree |α| + s.
    pub fn euler(&self) -> TermSum {
        self.raw().euler().finish()
    }

    /// max |coefficient| of self − other over max(|self|, |other|, tiny).
    pub fn rel_diff(&self, other: &TermSum) -> f64 {
        let d = self.sub(other).max_abs();
        let s = self.max_abs().max(other.max_abs());
        if s == 0.0 {
            d
        } else {
            d / s
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.terms).unwrap_or(serde_json::Value::Null)
    }

    pub fn from_json(dim: usize, v: &serde_json::Value) -> Result<TermSum> {
        let terms: Vec<Term> =
            serde_json::from_value(v.clone()).map_err(|e| crate::KafError::Usage(format!("bad term list: {e}")))?;
        TermSum::new(dim, terms)
    }
}

/// ∫_{S^{N-1}} ω^α dω
pub fn sphere_moment(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let dim = alpha.len() as f64;
    let deg: u32 = alpha.iter().sum();
    let ln: f64 = alpha.iter().map(|&a| ln_gamma((a as f64 + 1.0) / 2.0)).sum::<f64>()
        - ln_gamma((deg as f64 + dim) / 2.0);
    2.0 * ln.exp()
}

/// ∫_0^∞ r^p e^{-κr²} dr = Γ((p+1)/2) / (2κ^{(p+1)/2}), p > -1.
fn radial_moment(p: i64, kappa: f64) -> f64 {
    let h = (p as f64 + 1.0) / 2.0;
    0.5 * (ln_gamma(h) - h * kappa.ln()).exp()
}

/// ⟨F, G⟩ = ∫ F conj(G) ‖x‖^{-1} dx, in closed form term by term.
pub fn inner_conformal(f: &TermSum, g: &TermSum) -> Result<Complex64> {
    if f.dim != g.dim {
        return usage("inner product of TermSums of different dimension");
    }
    let dim = f.dim as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &f.terms {
        for b in &g.terms {
            let alpha: Vec<u32> = a.alpha.iter().zip(&b.alpha).map(|(x, y)| x + y).collect();
            let deg: i64 = alpha.iter().map(|&v| v as i64).sum();
            let p = deg + a.s as i64 + b.s as i64 + dim - 2;
            if p <= -1 {
                return domain(format!(
                    "term pair x^{:?}‖x‖^{} is not integrable against ‖x‖^(-1)dx",
                    alpha,
                    a.s + b.s
                ));
            }
            let sm = sphere_moment(&alpha);
            if sm == 0.0 {
                continue;
            }
            acc += a.coeff * b.coeff.conj() * (sm * radial_moment(p, a.kappa + b.kappa));
        }
    }
    Ok(acc)
}

pub fn norm_conformal(f: &TermSum) -> Result<f64> {
    Ok(inner_conformal(f, f)?.re.max(0.0).sqrt())
}

/// ΦF(x) = 2^{(N-1)/2} F(2x), unitary on L²(‖x‖^{-1}dx).
pub fn scaling_phi(f: &TermSum) -> TermSum {
    let c = 2f64.powf((f.dim as f64 - 1.0) / 2.0);
    let terms = f
        .terms
        .iter()
        .map(|t| Term {
            coeff: t.coeff * c * 2f64.powi(t.degree() as i32 + t.s),
            alpha: t.alpha.clone(),
            s: t.s,
            kappa: 4.0 * t.kappa,
        })
        .collect();
    TermSum::from_raw(f.dim, terms)
}

/// Generators of 𝔬(N+1, 2) = n̄ ⊕ 𝔪 ⊕ 𝔞 ⊕ 𝔫. Indices j are 1-based, j ≤ N+1.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalGen {
    E,
    NBar(usize),
    N(usize),
    /// X ∈ 𝔬(N, 1) as an (N+1)×(N+1) matrix on coordinates 1..=N+1.
    M(DMatrix<f64>),
}

impl ConformalGen {
    /// X ∈ 𝔬(N,1) from N(N+1)/2 parameters: first the rotations X_{ij} = -X_{ji}
    /// for i < j ≤ N in lexicographic order, then the boosts X_{N+1,j} = X_{j,N+1}.
    pub fn m_from_params(dim: usize, p: &[f64]) -> Result<ConformalGen> {
        let want = dim * (dim + 1) / 2;
        if p.len() != want {
            return usage(format!("o({dim},1) needs {want} parameters, got {}", p.len()));
        }
        let mut x = DMatrix::zeros(dim + 1, dim + 1);
        let mut k = 0;
        for i in 0..dim {
            for j in i + 1..dim {
                x[(i, j)] = p[k];
                x[(j, i)] = -p[k];
                k += 1;
            }
        }
        for j in 0..dim {
            x[(dim, j)] = p[k];
            x[(j, dim)] = p[k];
            k += 1;
        }
        Ok(ConformalGen::M(x))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ConformalGen::E => Ok(()),
            ConformalGen::NBar(j) | ConformalGen::N(j) => {
                if *j == 0 || *j > dim + 1 {
                    usage(format!("generator index {j} outside 1..={}", dim + 1))
                } else {
                    Ok(())
                }
            }
            ConformalGen::M(x) => {
                if x.nrows() != dim + 1 || x.ncols() != dim + 1 {
                    return usage(format!("M(X) needs a {0}×{0} matrix", dim + 1));
                }
                let mut sig = DMatrix::identity(dim + 1, dim + 1);
                sig[(dim, dim)] = -1.0;
                let d = x.transpose() * &sig + &sig * x;
                let scale = x.amax().max(1.0);
                if d.amax() > 1e-12 * scale {
                    usage("M(X) needs X in o(N,1)")
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ConformalGen::E => "E".into(),
            ConformalGen::NBar(j) => format!("Nbar_{j}"),
            ConformalGen::N(j) => format!("N_{j}"),
            ConformalGen::M(_) => "M(X)".into(),
        }
    }

    /// The generator as an (N+3)×(N+3) matrix, coordinates 0..=N+2.
    pub fn matrix(&self, dim: usize) -> Result<DMatrix<f64>> {
        self.validate(dim)?;
        let n = dim + 3;
        let top = dim + 2;
        let mut y = DMatrix::zeros(n, n);
        let eps = |j: usize| if j == dim + 1 { -1.0 } else { 1.0 };
        match self {
            ConformalGen::E => {
                y[(0, top)] = 1.0;
                y[(top, 0)] = 1.0;
            }
            ConformalGen::NBar(j) => {
                let j = *j;
                y[(j, 0)] = 1.0;
                y[(j, top)] = 1.0;
                y[(0, j)] = -eps(j);
                y[(top, j)] = eps(j);
            }
            ConformalGen::N(j) => {
                let j = *j;
                y[(j, 0)] = 1.0;
                y[(j, top)] = -1.0;
                y[(0, j)] = -eps(j);
                y[(top, j)] = -eps(j);
            }
            ConformalGen::M(x) => {
                for i in 0..=dim {
                    for j in 0..=dim {
                        y[(i + 1, j + 1)] = x[(i, j)];
                    }
                }
            }
        }
        Ok(y)
    }
}

/// Every basis generator: E, N̄_j, N_j for j ≤ N+1 and the N(N+1)/2 unit M(X).
pub fn basis_generators(dim: usize) -> Vec<ConformalGen> {
    let mut out = vec![ConformalGen::E];
    for j in 1..=dim + 1 {
        out.push(ConformalGen::NBar(j));
    }
    for j in 1..=dim + 1 {
        out.push(ConformalGen::N(j));
    }
    let np = dim * (dim + 1) / 2;
    for k in 0..np {
        let mut p = vec![0.0; np];
        p[k] = 1.0;
        if let Ok(g) = ConformalGen::m_from_params(dim, &p) {
            out.push(g);
        }
    }
    out
}

/// A matrix of 𝔬(N+1,2) split along the basis: (coefficient, generator) pairs.
pub fn decompose(dim: usize, y: &DMatrix<f64>) -> Result<Vec<(f64, ConformalGen)>> {
    let n = dim + 3;
    if y.nrows() != n || y.ncols() != n {
        return usage(format!("expected a {n}×{n} matrix"));
    }
    let top = dim + 2;
    let mut parts = vec![(y[(0, top)], ConformalGen::E)];
    for j in 1..=dim + 1 {
        parts.push(((y[(j, 0)] + y[(j, top)]) / 2.0, ConformalGen::NBar(j)));
        parts.push(((y[(j, 0)] - y[(j, top)]) / 2.0, ConformalGen::N(j)));
    }
    let x = y.view((1, 1), (dim + 1, dim + 1)).into_owned();
    parts.push((1.0, ConformalGen::M(x)));
    let mut rec = DMatrix::zeros(n, n);
    for (c, g) in &parts {
        rec += g.matrix(dim)? * *c;
    }
    if (&rec - y).amax() > 1e-12 * y.amax().max(1.0) {
        return usage("matrix is not in o(N+1,2)");
    }
    Ok(parts.into_iter().filter(|(c, _)| *c != 0.0).collect())
}

fn need_dim(f: &TermSum) -> Result<()> {
    if f.dim < 2 {
        capability("the conformal model needs N >= 2")
    } else {
        Ok(())
    }
}

fn i_times(f: &Raw, c: f64) -> Raw {
    f.scale(Complex64::new(0.0, c))
}

/// dΠ₁(gen) applied symbolically.
pub fn dpi1_apply(gen: &ConformalGen, f: &TermSum) -> Result<TermSum> {
    need_dim(f)?;
    let dim = f.dim;
    gen.validate(dim)?;
    let nm1 = dim as f64 - 1.0;
    let f = f.raw();
    let out = match gen {
        ConformalGen::E => f.euler().add(&f.scale((0.5 * nm1).into())).scale((-1.0).into()),
        ConformalGen::NBar(j) if *j <= dim => i_times(&f.mul_coordinate(j - 1), 2.0),
        ConformalGen::NBar(_) => i_times(&f.mul_norm_pow(1), 2.0),
        ConformalGen::N(j) if *j <= dim => {
            let dj = f.partial(j - 1);
            let d = f.laplacian().mul_coordinate(j - 1).sub(&dj.euler().scale(2.0.into()).add(&dj.scale(nm1.into())));
            i_times(&d, 0.5)
        }
        ConformalGen::N(_) => i_times(&f.laplacian().mul_norm_pow(1), 0.5),
        ConformalGen::M(x) => {
            let mut acc = Raw { dim, terms: Vec::new(), scale: 0.0 };
            for j in 0..dim {
                let dj = f.partial(j);
                for i in 0..dim {
                    if x[(i, j)] != 0.0 {
                        acc = acc.add(&dj.mul_coordinate(i).scale(x[(i, j)].into()));
                    }
                }
                if x[(dim, j)] != 0.0 {
                    acc = acc.add(&dj.mul_norm_pow(1).scale(x[(dim, j)].into()));
                }
            }
            acc
        }
    };
    Ok(out.finish())
}

/// dΠ₁ of an arbitrary element of 𝔬(N+1,2), by linearity over [`decompose`].
pub fn dpi1_apply_matrix(y: &DMatrix<f64>, f: &TermSum) -> Result<TermSum> {
    need_dim(f)?;
    let mut acc = TermSum::zero(f.dim);
    for (c, g) in decompose(f.dim, y)? {
        acc = acc.add(&dpi1_apply(&g, f)?.scale(c.into()));
    }
    Ok(acc)
}

/// Segal–Shale–Weil sl(2)-subtriple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dpi2 {
    #[serde(rename = "h")]
    H,
    #[serde(rename = "e+")]
    EPlus,
    #[serde(rename = "e-")]
    EMinus,
}

/// h = E_x + N/2, e⁺ = (i/2)‖x‖², e⁻ = (i/2)Δ.
pub fn dpi2_sl2_apply(which: Dpi2, f: &TermSum) -> TermSum {
    let f = f.raw();
    match which {
        Dpi2::H => f.euler().add(&f.scale((f.dim as f64 / 2.0).into())),
        Dpi2::EPlus => i_times(&f.mul_norm_pow(2), 0.5),
        Dpi2::EMinus => i_times(&f.laplacian(), 0.5),
    }
    .finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryDefect {
    /// |⟨AF, G⟩ + ⟨F, AG⟩|
    pub defect: f64,
    /// ‖AF‖‖G‖ + ‖F‖‖AG‖
    pub scale: f64,
}

impl SymmetryDefect {
    pub fn rel(&self) -> f64 {
        if self.scale > 0.0 {
            self.defect / self.scale
        } else {
            self.defect
        }
    }
}

/// Skew-symmetry defect of dΠ₁(gen) on the pair (F, G). For N_j this is the
/// symmetry defect of the real operator x_jΔ - (2E_x + N - 1)∂_j.
pub fn symmetry_check(gen: &ConformalGen, f: &TermSum, g: &TermSum) -> Result<SymmetryDefect> {
    let af = dpi1_apply(gen, f)?;
    let ag = dpi1_apply(gen, g)?;
    let defect = (inner_conformal(&af, g)? + inner_conformal(f, &ag)?).norm();
    let scale = norm_conformal(&af)? * norm_conformal(g)? + norm_conformal(f)? * norm_conformal(&ag)?;
    Ok(SymmetryDefect { defect, scale })
}

/// Random element of polynomial(deg ≤ `deg`)·{1, ‖x‖}·e^{-κ‖x‖²}, κ ∈ [0.3, 1.5].
pub fn random_class_member<R: Rng>(rng: &mut R, dim: usize, deg: u32) -> TermSum {
    let kappa = rng.random_range(0.3..1.5);
    let mut terms = Vec::new();
    for s in 0..2 {
        for d in 0..=deg {
            for alpha in multi_indices(dim, d) {
                if rng.random_bool(0.5) {
                    let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    terms.push(Term { coeff: c, alpha, s, kappa });
                }
            }
        }
    }
    if terms.is_empty() {
        terms.push(Term { coeff: Complex64::new(1.0, 0.0), alpha: vec![0; dim], s: 0, kappa });
    }
    TermSum::from_raw(dim, terms)
}

/// Lie bracket consistency [dΠ₁(A), dΠ₁(B)]F against dΠ₁([A, B])F.
pub fn bracket_defect(a: &ConformalGen, b: &ConformalGen, f: &TermSum) -> Result<f64> {
    let dim = f.dim;
    let lhs = dpi1_apply(a, &dpi1_apply(b, f)?)?.sub(&dpi1_apply(b, &dpi1_apply(a, f)?)?);
    let (ma, mb) = (a.matrix(dim)?, b.matrix(dim)?);
    let br = &ma * &mb - &mb * &ma;
    let rhs = dpi1_apply_matrix(&br, f)?;
    Ok(lhs.rel_diff(&rhs))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalSuiteRow {
    pub dim: usize,
    pub generator: String,
    pub pairs: usize,
    pub worst_rel_defect: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformalSuite {
    pub rows: Vec<ConformalSuiteRow>,
    pub worst_rel_defect: f64,
    pub stable: bool,
    pub bracket_defect: f64,
    pub phi_defect: f64,
}

impl ConformalSuite {
    pub fn passed(&self) -> bool {
        self.worst_rel_defect <= 1e-8 && self.stable && self.bracket_defect <= 1e-12 && self.phi_defect <= 1e-10
    }
}

/// Runs every basis generator plus one random M(X) over `pairs` random pairs
/// per dimension, checks the N̄_{N+1}, N_{N+1} bracket and Φ unitarity.
pub fn conformal_suite(dims: &[usize], pairs: usize, seed: u64) -> Result<ConformalSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut bracket = 0.0f64;
    let mut phi = 0.0f64;
    for &dim in dims {
        let suite: Vec<(TermSum, TermSum)> = (0..pairs)
            .map(|_| (random_class_member(&mut rng, dim, 4), random_class_member(&mut rng, dim, 4)))
            .collect();
        let mut gens = basis_generators(dim);
        let np = dim * (dim + 1) / 2;
        let p: Vec<f64> = (0..np).map(|_| rng.random_range(-1.0..1.0)).collect();
        gens.push(ConformalGen::m_from_params(dim, &p)?);
        for g in &gens {
            let mut worst = 0.0f64;
            let mut stable = true;
            for (f, h) in &suite {
                worst = worst.max(symmetry_check(g, f, h)?.rel());
                stable &= dpi1_apply(g, f)?.in_gaussian_class();
            }
            rows.push(ConformalSuiteRow { dim, generator: g.label(), pairs, worst_rel_defect: worst, stable });
        }
        for (f, _) in &suite {
            bracket = bracket.max(bracket_defect(&ConformalGen::NBar(dim + 1), &ConformalGen::N(dim + 1), f)?);
            let n0 = norm_conformal(f)?;
            let n1 = norm_conformal(&scaling_phi(f))?;
            phi = phi.max((n1 / n0 - 1.0).abs());
        }
    }
    let worst_rel_defect = rows.iter().map(|r| r.worst_rel_defect).fold(0.0, f64::max);
    let stable = rows.iter().all(|r| r.stable);
    Ok(ConformalSuite { rows, worst_rel_defect, stable, bracket_defect: bracket, phi_defect: phi })
}
