//! Parameters (N, a, k), the radial basis f_{k,a,m;l}, the radial sl(2)
//! differential operators and their tridiagonal coefficient actions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{capability, domain, usage, Result};
use crate::quadrature::{QuadRule, RuleKind};
use crate::specfun::{ln_gamma, orthonormal_laguerre};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Problem parameters. `a_ratio` holds a = num/den in lowest terms when a
/// was supplied as a rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "N")]
    pub dim: usize,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_ratio: Option<(u64, u64)>,
    pub k: f64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Params {
    pub fn new(dim: usize, a: f64, k: f64) -> Result<Self> {
        if dim == 0 {
            return domain("N must be positive");
        }
        if !(a > 0.0) || !a.is_finite() {
            return domain(format!("a must be positive, got {a}"));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return domain(format!("k must be non-negative, got {k}"));
        }
        if dim >= 2 && k != 0.0 {
            return capability("multiplicity k must be 0 when N >= 2");
        }
        Ok(Params { dim, a, a_ratio: None, k })
    }

    /// a = num/den, stored in lowest terms.
    pub fn rational(dim: usize, num: u64, den: u64, k: f64) -> Result<Self> {
        if num == 0 || den == 0 {
            return domain("a = num/den needs positive num and den");
        }
        let g = gcd(num, den);
        let mut p = Params::new(dim, num as f64 / den as f64, k)?;
        p.a_ratio = Some((num / g, den / g));
        Ok(p)
    }

    /// a written as 2p/q; returns (p, q) in lowest terms.
    pub fn two_p_over_q(&self) -> Option<(u64, u64)> {
        let (num, den) = self.a_ratio?;
        // a = num/den = 2p/q  =>  p/q = num/(2 den)
        let g = gcd(num, 2 * den);
        Some((num / g, 2 * den / g))
    }

    /// <k>: k itself for N = 1, 0 otherwise.
    pub fn idx_k(&self) -> f64 {
        if self.dim == 1 {
            self.k
        } else {
            0.0
        }
    }

    /// λ_{k,a,m} = (2m + 2<k> + N - 2)/a
    pub fn lambda(&self, m: usize) -> f64 {
        lambda_index(self, m)
    }

    /// Exponent ν of the radial weight r^ν dr.
    pub fn nu(&self) -> f64 {
        2.0 * self.idx_k() + self.a + self.dim as f64 - 3.0
    }

    /// λ_{k,a,m} after checking the standing hypothesis λ > -1 for this m.
    pub fn check_m(&self, m: usize) -> Result<f64> {
        let lam = self.lambda(m);
        if lam > -1.0 {
            Ok(lam)
        } else {
            domain(format!(
                "lambda_{{k,a,{m}}} = {lam} violates lambda > -1 (N={}, a={}, k={})",
                self.dim, self.a, self.k
            ))
        }
    }

    /// Smallest m with λ_{k,a,m} > -1.
    pub fn first_valid_m(&self) -> usize {
        (0..).find(|&m| self.lambda(m) > -1.0).unwrap()
    }
}

/// λ_{k,a,m}
pub fn lambda_index(params: &Params, m: usize) -> f64 {
    (2.0 * m as f64 + 2.0 * params.idx_k() + params.dim as f64 - 2.0) / params.a
}

fn ln_norm(lam: f64, a: f64) -> f64 {
    0.5 * ((lam + 1.0) * std::f64::consts::LN_2 - lam * a.ln())
}

/// f_{k,a,m;l}(r) for l = 0..=lmax.
pub fn basis_all(params: &Params, m: usize, lmax: usize, r: f64) -> Result<Vec<f64>> {
    let lam = params.check_m(m)?;
    if !(r >= 0.0) {
        return domain(format!("radius must be non-negative, got {r}"));
    }
    Ok(basis_all_unchecked(params.a, lam, m, lmax, r))
}

pub(crate) fn basis_all_unchecked(a: f64, lam: f64, m: usize, lmax: usize, r: f64) -> Vec<f64> {
    if r == 0.0 && m > 0 {
        return vec![0.0; lmax + 1];
    }
    let t = 2.0 / a * r.powf(a);
    let lr = if m == 0 { 0.0 } else { m as f64 * r.ln() };
    orthonormal_laguerre(lmax, lam, t, ln_norm(lam, a) + lr)
}

/// f_{k,a,m;l}(r).
pub fn basis_eval(params: &Params, m: usize, l: usize, r: f64) -> Result<f64> {
    Ok(basis_all(params, m, l, r)?[l])
}

/// Coefficients c_0..c_{L-1} in one radial sector. `leak` is the norm of the
/// image that fell outside the truncation in the operator that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCoeffs {
    pub params: Params,
    pub m: usize,
    pub c: Vec<Complex64>,
    pub leak: f64,
}

impl RadialCoeffs {
    pub fn new(params: Params, m: usize, c: Vec<Complex64>) -> Result<Self> {
        if c.is_empty() {
            return usage("coefficient vector must be non-empty");
        }
        params.check_m(m)?;
        Ok(RadialCoeffs { params, m, c, leak: 0.0 })
    }

    pub fn unit(params: Params, m: usize, len: usize, l: usize) -> Result<Self> {
        let mut c = vec![Complex64::new(0.0, 0.0); len];
        c[l] = Complex64::new(1.0, 0.0);
        Self::new(params, m, c)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda(self.m)
    }
}

/// c_l = ∫ fn(r) f_{k,a,m;l}(r) r^ν dr using the supplied radial rule.
pub fn expand_radial<F>(params: &Params, m: usize, f: F, len: usize, rule: &QuadRule) -> Result<RadialCoeffs>
where
    F: Fn(f64) -> Complex64,
{
    match &rule.kind {
        RuleKind::Radial { params: p, .. } | RuleKind::RadialPanel { params: p, .. } if p == params => {}
        _ => return usage("expand_radial needs a radial rule built for the same parameters"),
    }
    let lam = params.check_m(m)?;
    if len == 0 {
        return usage("need at least one radial coefficient");
    }
    let mut c = vec![Complex64::new(0.0, 0.0); len];
    for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
        let fr = f(r) * w;
        let b = basis_all_unchecked(params.a, lam, m, len - 1, r);
        for (cl, bl) in c.iter_mut().zip(&b) {
            *cl += fr * *bl;
        }
    }
    RadialCoeffs::new(params.clone(), m, c)
}

/// Σ_l c_l f_{k,a,m;l}(r)
pub fn synthesize_radial(coeffs: &RadialCoeffs, r: f64) -> Complex64 {
    let lam = coeffs.lambda();
    let b = basis_all_unchecked(coeffs.params.a, lam, coeffs.m, coeffs.c.len() - 1, r);
    coeffs.c.iter().zip(&b).map(|(c, b)| c * *b).sum()
}

/// Elements of the complexified sl(2): the Cayley basis k, n⁺, n⁻ and the
/// standard basis h, e⁺, e⁻.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sl2 {
    K,
    #[serde(rename = "n+")]
    NPlus,
    #[serde(rename = "n-")]
    NMinus,
    H,
    #[serde(rename = "e+")]
    EPlus,
    #[serde(rename = "e-")]
    EMinus,
}

impl Sl2 {
    pub const ALL: [Sl2; 6] = [Sl2::K, Sl2::NPlus, Sl2::NMinus, Sl2::H, Sl2::EPlus, Sl2::EMinus];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "k" => Some(Sl2::K),
            "n+" | "nplus" => Some(Sl2::NPlus),
            "n-" | "nminus" => Some(Sl2::NMinus),
            "h" => Some(Sl2::H),
            "e+" | "eplus" => Some(Sl2::EPlus),
            "e-" | "eminus" => Some(Sl2::EMinus),
            _ => None,
        }
    }

    /// (sub, diag, super) entries acting on column l: X_{l+1,l}, X_{l,l}, X_{l-1,l}.
    pub fn bands(self, lam: f64, l: usize) -> (Complex64, Complex64, Complex64) {
        let lf = l as f64;
        let up = ((lf + 1.0) * (lam + lf + 1.0)).sqrt();
        let down = if l == 0 { 0.0 } else { (lf * (lam + lf)).sqrt() };
        let kk = lam + 2.0 * lf + 1.0;
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Sl2::K => (zero, kk.into(), zero),
            Sl2::NPlus => (I * up, zero, zero),
            Sl2::NMinus => (zero, zero, I * down),
            // h = -i(n⁺ - n⁻)
            Sl2::H => (up.into(), zero, (-down).into()),
            // e± = (-(n⁺ + n⁻) ± i k)/2
            Sl2::EPlus => (-0.5 * I * up, 0.5 * I * kk, -0.5 * I * down),
            Sl2::EMinus => (-0.5 * I * up, -0.5 * I * kk, -0.5 * I * down),
        }
    }
}

/// Apply a Cayley or standard generator to truncated coefficients.
pub fn apply_sl2(x: Sl2, coeffs: &RadialCoeffs) -> RadialCoeffs {
    let lam = coeffs.lambda();
    let n = coeffs.c.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut leak = 0.0;
    for (l, &c) in coeffs.c.iter().enumerate() {
        let (sub, diag, sup) = x.bands(lam, l);
        out[l] += diag * c;
        if l + 1 < n {
            out[l + 1] += sub * c;
        } else {
            leak += (sub * c).norm_sqr();
        }
        if l > 0 {
            out[l - 1] += sup * c;
        }
    }
    RadialCoeffs {
        params: coeffs.params.clone(),
        m: coeffs.m,
        c: out,
        leak: leak.sqrt(),
    }
}

pub fn op_k(coeffs: &RadialCoeffs) -> RadialCoeffs {
    apply_sl2(Sl2::K, coeffs)
}
pub fn op_nplus(coeffs: &RadialCoeffs) -> RadialCoeffs {
    apply_sl2(Sl2::NPlus, coeffs)
}
pub fn op_nminus(coeffs: &RadialCoeffs) -> RadialCoeffs {
    apply_sl2(Sl2::NMinus, coeffs)
}
pub fn op_h(coeffs: &RadialCoeffs) -> RadialCoeffs {
    apply_sl2(Sl2::H, coeffs)
}
pub fn op_eplus(coeffs: &RadialCoeffs) -> RadialCoeffs {
    apply_sl2(Sl2::EPlus, coeffs)
}
pub fn op_eminus(coeffs: &RadialCoeffs) -> RadialCoeffs {
    apply_sl2(Sl2::EMinus, coeffs)
}

/// Truncated L×L matrix of a generator in the basis f_{k,a,m;l}.
pub fn sl2_matrix(x: Sl2, lam: f64, len: usize) -> DMatrix<Complex64> {
    let mut mat = DMatrix::from_element(len, len, Complex64::new(0.0, 0.0));
    for l in 0..len {
        let (sub, diag, sup) = x.bands(lam, l);
        mat[(l, l)] = diag;
        if l + 1 < len {
            mat[(l + 1, l)] = sub;
        }
        if l > 0 {
            mat[(l - 1, l)] = sup;
        }
    }
    mat
}

/// The 2×2 matrices of h, e⁺, e⁻ and of their Cayley transforms k, n⁺, n⁻.
/// Returns the largest deviation in the inversion formulas
/// h = -i(n⁺-n⁻), e± = (-(n⁺+n⁻) ± i k)/2 and in Ad(c)·(h, e⁺, e⁻) = (k, n⁺, n⁻).
pub fn cayley_defect() -> f64 {
    use nalgebra::Matrix2;
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let h = Matrix2::new(one, z, z, -one);
    let ep = Matrix2::new(z, one, z, z);
    let em = Matrix2::new(z, z, one, z);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = Matrix2::new(-I, -one, one, I) * Complex64::new(s, 0.0);
    let cinv = c.try_inverse().unwrap();
    let ad = |x: &Matrix2<Complex64>| c * x * cinv;
    let k = Matrix2::new(z, -I, I, z);
    let half = Complex64::new(0.5, 0.0);
    let np = Matrix2::new(I, -one, -one, -I) * half;
    let nm = Matrix2::new(-I, -one, -one, I) * half;
    let checks = [
        ad(&h) - k,
        ad(&ep) - np,
        ad(&em) - nm,
        h - (np - nm) * (-I),
        ep - (-(np + nm) + k * I) * half,
        em - (-(np + nm) - k * I) * half,
    ];
    checks.iter().map(|d| d.iter().map(|v| v.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
}

/// Radial differential operators H_{k,a}[m], E⁺_{k,a}[m], E⁻_{k,a}[m].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffOp {
    H,
    EPlus,
    EMinus,
}

/// Pointwise value of a radial differential operator applied to `f` at r,
/// by five-point differences in s = ln r (so that E_r = d/ds).
pub fn apply_diff<F>(params: &Params, m: usize, which: DiffOp, f: F, r: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(r > 0.0) {
        return domain(format!("apply_diff needs r > 0, got {r}"));
    }
    params.check_m(m)?;
    let a = params.a;
    let mf = m as f64;
    let ra = r.powf(a);
    match which {
        DiffOp::EPlus => Ok(I / a * ra * f(r)),
        DiffOp::H => {
            let (g0, g1, _) = log_derivs(&f, r, ra);
            let c = (2.0 * params.idx_k() + a + params.dim as f64 - 2.0) / a;
            Ok(2.0 / a * g1 + c * g0)
        }
        DiffOp::EMinus => {
            let (g0, g1, g2) = log_derivs(&f, r, ra);
            let c = mf + 2.0 * params.idx_k() + params.dim as f64 - 2.0;
            let inner = g2 + (c - mf) * g1 - mf * c * g0;
            Ok(I / a / ra * inner)
        }
    }
}

fn log_derivs<F: Fn(f64) -> Complex64>(f: &F, r: f64, ra: f64) -> (Complex64, Complex64, Complex64) {
    let delta = f64::EPSILON.powf(1.0 / 6.0) / ra.max(1.0);
    let s = r.ln();
    let g = |k: f64| f((s + k * delta).exp());
    let (m2, m1, z0, p1, p2) = (g(-2.0), g(-1.0), f(r), g(1.0), g(2.0));
    let d1 = (m2 - m1 * 8.0 + p1 * 8.0 - p2) / (12.0 * delta);
    let d2 = (-m2 + m1 * 16.0 - z0 * 30.0 + p1 * 16.0 - p2) / (12.0 * delta * delta);
    (z0, d1, d2)
}

/// Unitary rescaling L²(r^ν dr) → L²(r^{λ_m} dr) taking f_{k,a,m;l} to f_{λ_m;l}:
/// Φf(r) = a^{λ_{k,a,0}/2} r^{-m/a} f(a^{1/a} r^{1/a}).
pub fn rescale_to_normal_form<F>(params: &Params, m: usize, f: F, r: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let a = params.a;
    let lam0 = params.lambda(0);
    a.powf(0.5 * lam0) * r.powf(-(m as f64) / a) * f((a * r).powf(1.0 / a))
}

/// f_{λ;l}(r) = (2^{λ+1} l!/Γ(λ+l+1))^{1/2} L_l^λ(2r) e^{-r}, the a = 1, m = 0 normal form.
pub fn normal_form_basis(lam: f64, l: usize, r: f64) -> f64 {
    orthonormal_laguerre(l, lam, 2.0 * r, 0.5 * (lam + 1.0) * std::f64::consts::LN_2)[l]
}

/// Ψf(r) = r^{λ/2} f(r), onto the L²(dr) model.
pub fn kostant_map<F>(lam: f64, f: F, r: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    r.powf(0.5 * lam) * f(r)
}

/// Normalization constant of f_{k,a,m;0} at r = 0 (m = 0), i.e. f_{k,a,0;0}(0).
pub fn ground_state_at_origin(params: &Params) -> f64 {
    let lam = params.lambda(0);
    (ln_norm(lam, params.a) - 0.5 * ln_gamma(lam + 1.0)).exp()
}
