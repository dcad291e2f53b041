//! Harmonic polynomials: decomposition P = Σ ‖x‖^{2n} h_n, the Fischer pairing,
//! explicit orthonormal bases on S^{N-1} for N ≤ 3 and the derivative bounds
//! for harmonic polynomials.

use serde::Serialize;

use crate::error::{capability, usage, Result};
use crate::poly::{multi_indices, Poly};
use crate::quadrature::{sphere_rule, SphereRule};
use crate::specfun::{binom_int, falling, ln_gamma};

/// dim H^m(ℝ^N) = C(m+N-1, N-1) - C(m+N-3, N-1).
pub fn dim_harmonic(dim: usize, m: usize) -> usize {
    let n1 = dim as i64 - 1;
    let a = binom_int(m as i64 + n1, n1);
    let b = binom_int(m as i64 + dim as i64 - 3, n1);
    (a - b).round() as usize
}

/// vol(S^{N-1}) = 2π^{N/2}/Γ(N/2)
pub fn sphere_volume(dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / ln_gamma(h).exp()
}

/// Homogeneous polynomial known to be harmonic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicPoly {
    pub poly: Poly,
    pub degree: u32,
}

impl HarmonicPoly {
    /// Accepts `p` when it is homogeneous of degree `degree` and Δp vanishes
    /// to 1e-12 relative to the coefficient scale.
    pub fn new(poly: Poly, degree: u32) -> Result<Self> {
        if !poly.is_zero() && poly.homogeneous_degree() != Some(degree) {
            return usage(format!("polynomial is not homogeneous of degree {degree}"));
        }
        let lap = poly.laplacian().max_abs();
        if lap > 1e-12 * poly.max_abs().max(f64::MIN_POSITIVE) * (degree as f64).powi(2).max(1.0) {
            return usage("polynomial is not harmonic");
        }
        Ok(HarmonicPoly { poly, degree })
    }

    pub fn dim(&self) -> usize {
        self.poly.dim
    }
}

/// Components (n, h_n) with P = Σ_n ‖x‖^{2n} h_n, h_n harmonic of degree m - 2n.
/// Solved from the top n down using Δ(‖x‖^{2n} h) = 2n(2n + 2 deg h + N - 2)‖x‖^{2n-2} h.
pub fn harmonic_decompose(p: &Poly) -> Result<Vec<(u32, HarmonicPoly)>> {
    let dim = p.dim;
    if p.is_zero() {
        return Ok(Vec::new());
    }
    let m = match p.homogeneous_degree() {
        Some(m) => m,
        None => return usage("harmonic_decompose needs a homogeneous polynomial"),
    };
    let mut rest = p.clone();
    let mut out = Vec::new();
    for n in (0..=m / 2).rev() {
        let d = m - 2 * n;
        let mut lap = rest.clone();
        for _ in 0..n {
            lap = lap.laplacian();
        }
        let mut c = 1.0;
        for j in 1..=n {
            c *= 2.0 * j as f64 * (2.0 * j as f64 + 2.0 * d as f64 + dim as f64 - 2.0);
        }
        let h = lap.scale(1.0 / c);
        if h.max_abs() > 1e-14 * p.max_abs() {
            let mut lifted = h.clone();
            for _ in 0..n {
                lifted = lifted.mul_norm_sq();
            }
            rest = rest.sub(&lifted);
            out.push((n, HarmonicPoly { poly: h, degree: d }));
        }
    }
    out.reverse();
    Ok(out)
}

/// ⟨p, q⟩_F = (p(∂) q̄)(0)
pub fn fischer_inner(p: &Poly, q: &Poly) -> f64 {
    p.fischer(q)
}

/// 2^{m-1} Γ(m + N/2) / π^{N/2}, the ratio ⟨p,q⟩_F / ⟨p,q⟩_{L²(S^{N-1})} on H^m.
pub fn fischer_l2_ratio(m: u32, dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    ((m as f64 - 1.0) * std::f64::consts::LN_2 + ln_gamma(m as f64 + h) - h * std::f64::consts::PI.ln()).exp()
}

/// Orthonormal basis of H^m(S^{N-1}) for the unnormalized surface measure.
#[derive(Debug, Clone, Serialize)]
pub struct SphBasis {
    pub dim: usize,
    pub degree: u32,
    pub polys: Vec<Poly>,
}

impl SphBasis {
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Values of every basis function at a unit vector.
    pub fn eval(&self, omega: &[f64]) -> Vec<f64> {
        self.polys.iter().map(|p| p.eval(omega)).collect()
    }
}

// Re and Im of (x + i y)^m as polynomials in the first two coordinates.
fn complex_power(dim: usize, m: u32) -> (Poly, Poly) {
    let mut re = Poly::zero(dim);
    let mut im = Poly::zero(dim);
    for j in 0..=m {
        let c = binom_int(m as i64, j as i64);
        let mut alpha = vec![0; dim];
        alpha[0] = m - j;
        alpha[1] = j;
        // i^j
        match j % 4 {
            0 => re.add_term(alpha, c),
            1 => im.add_term(alpha, c),
            2 => re.add_term(alpha, -c),
            _ => im.add_term(alpha, -c),
        }
    }
    (re, im)
}

pub fn sph_basis(dim: usize, m: u32) -> Result<SphBasis> {
    let pi = std::f64::consts::PI;
    let polys = match dim {
        1 => match m {
            0 => vec![Poly::constant(1, std::f64::consts::FRAC_1_SQRT_2)],
            1 => vec![Poly::coordinate(1, 0).scale(std::f64::consts::FRAC_1_SQRT_2)],
            _ => Vec::new(),
        },
        2 => {
            if m == 0 {
                vec![Poly::constant(2, 1.0 / (2.0 * pi).sqrt())]
            } else {
                let (re, im) = complex_power(2, m);
                let s = 1.0 / pi.sqrt();
                vec![re.scale(s), im.scale(s)]
            }
        }
        3 => {
            let l = m;
            let mut out = Vec::with_capacity(2 * l as usize + 1);
            for mm in 0..=l {
                // r^{l-mm} P_l^{(mm)}(z/r) as a polynomial in (x, y, z)
                let mut radial_part = Poly::zero(3);
                let mut k = 0;
                while 2 * k + mm <= l {
                    let num = ln_gamma((2 * l - 2 * k) as f64 + 1.0);
                    let den = l as f64 * std::f64::consts::LN_2
                        + ln_gamma(k as f64 + 1.0)
                        + ln_gamma((l - k) as f64 + 1.0)
                        + ln_gamma((l - 2 * k - mm) as f64 + 1.0);
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let mut term = Poly::monomial(vec![0, 0, l - mm - 2 * k], sign * (num - den).exp());
                    for _ in 0..k {
                        term = term.mul_norm_sq();
                    }
                    radial_part = radial_part.add(&term);
                    k += 1;
                }
                let ratio = (ln_gamma((l + mm) as f64 + 1.0) - ln_gamma((l - mm) as f64 + 1.0)).exp();
                if mm == 0 {
                    let norm = (4.0 * pi / (2 * l + 1) as f64).sqrt();
                    out.push(radial_part.scale(1.0 / norm));
                } else {
                    let norm = (2.0 * pi / (2 * l + 1) as f64 * ratio).sqrt();
                    let (re, im) = complex_power(3, mm);
                    out.push(re.mul(&radial_part).scale(1.0 / norm));
                    out.push(im.mul(&radial_part).scale(1.0 / norm));
                }
            }
            out
        }
        _ => return capability(format!("explicit spherical harmonics exist for N = 1, 2, 3 only (got {dim})")),
    };
    Ok(SphBasis { dim, degree: m, polys })
}

/// ‖p‖_{L²(S^{N-1})} for a polynomial of degree ≤ deg, with an exact rule.
pub fn sphere_norm(p: &Poly, deg: u32) -> Result<f64> {
    let rule = sphere_rule(p.dim, 2 * deg as usize)?;
    Ok(sphere_norm_with(p, &rule))
}

pub fn sphere_norm_with(p: &Poly, rule: &SphereRule) -> f64 {
    rule.integrate(|w| p.eval(w).powi(2)).sqrt()
}

pub fn sphere_inner(p: &Poly, q: &Poly, deg: u32) -> Result<f64> {
    let rule = sphere_rule(p.dim, 2 * deg as usize)?;
    Ok(rule.integrate(|w| p.eval(w) * q.eval(w)))
}

/// Right-hand side factor ((2m)^g (m + N/2 - 1)^{underline g})^{1/2} of the derivative bound.
pub fn derivative_bound_factor(m: u32, dim: usize, g: u32) -> f64 {
    if g > m {
        return 0.0;
    }
    ((2.0 * m as f64).powi(g as i32) * falling(m as f64 + dim as f64 / 2.0 - 1.0, g)).sqrt()
}

/// RHS - ‖∂^γ p‖_{L²(S^{N-1})} for the L² derivative bound on harmonic p.
pub fn check_derivative_bound(p: &HarmonicPoly, gamma: &[u32]) -> Result<f64> {
    let g: u32 = gamma.iter().sum();
    let m = p.degree;
    let norm = sphere_norm(&p.poly, m)?;
    let rhs = derivative_bound_factor(m, p.dim(), g) * norm;
    if g > m {
        return Ok(rhs);
    }
    let lhs = sphere_norm(&p.poly.derivative(gamma), m)?;
    Ok(rhs - lhs)
}

/// RHS(‖x‖) - |∂^γ p(x)| for the pointwise bound on harmonic p.
pub fn check_pointwise_bound(p: &HarmonicPoly, gamma: &[u32], x: &[f64]) -> Result<f64> {
    let g: u32 = gamma.iter().sum();
    let m = p.degree;
    let dim = p.dim();
    if g > m {
        return Ok(0.0);
    }
    let norm = sphere_norm(&p.poly, m)?;
    let rx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dimh = dim_harmonic(dim, (m - g) as usize) as f64;
    let rhs = derivative_bound_factor(m, dim, g) * (dimh / sphere_volume(dim)).sqrt() * norm * rx.powi((m - g) as i32);
    let lhs = p.poly.derivative(gamma).eval(x).abs();
    Ok(rhs - lhs)
}

/// Random homogeneous polynomial of degree m with coefficients in [-1, 1].
pub fn random_homogeneous<R: rand::Rng>(rng: &mut R, dim: usize, m: u32) -> Poly {
    let mut p = Poly::zero(dim);
    for alpha in multi_indices(dim, m) {
        p.add_term(alpha, rng.random_range(-1.0..1.0));
    }
    p
}

/// Random harmonic polynomial of degree m: the ‖x‖⁰ component of a random
/// homogeneous polynomial.
pub fn random_harmonic<R: rand::Rng>(rng: &mut R, dim: usize, m: u32) -> HarmonicPoly {
    loop {
        let p = random_homogeneous(rng, dim, m);
        if let Some((0, h)) = harmonic_decompose(&p).ok().and_then(|v| v.into_iter().find(|(n, _)| *n == 0)) {
            return h;
        }
        if m == 0 {
            return HarmonicPoly { poly: Poly::constant(dim, 1.0), degree: 0 };
        }
    }
}
