//! Gauss rules: generalized Gauss–Laguerre, Gauss–Legendre, the radial rule
//! for r^{2<k>+a+N-3} dr, composite panel rules and sphere rules.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{capability, domain, Result};
use crate::radial::Params;
use crate::specfun::{ln_christoffel_sum, ln_gamma, orthonormal_pair};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RuleKind {
    Laguerre { alpha: f64 },
    Legendre { lo: f64, hi: f64 },
    Radial { params: Params, m: usize },
    RadialPanel { params: Params, r_max: f64 },
}

/// One-dimensional rule: Σ w_i g(x_i) approximates the weighted integral.
#[derive(Debug, Clone, Serialize)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }

    /// Radial rules carry their parameter set; other kinds return None.
    pub fn radial_params(&self) -> Option<&Params> {
        match &self.kind {
            RuleKind::Radial { params, .. } | RuleKind::RadialPanel { params, .. } => Some(params),
            _ => None,
        }
    }
}

/// Nodes and log-weights of the n-point rule for t^α e^{-t} on (0, ∞).
pub fn gauss_laguerre_log(alpha: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(alpha > -1.0) {
        return domain(format!("Gauss–Laguerre needs alpha > -1, got {alpha}"));
    }
    if n == 0 {
        return domain("Gauss–Laguerre needs n >= 1");
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let fi = i as f64;
        jac[(i, i)] = 2.0 * fi + 1.0 + alpha;
        if i + 1 < n {
            let b = ((fi + 1.0) * (fi + 1.0 + alpha)).sqrt();
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let c = (nf * (nf + alpha)).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..4 {
            let (pn, pm) = orthonormal_pair(n, alpha, *x);
            let denom = nf * pn - c * pm;
            if denom == 0.0 {
                break;
            }
            let step = *x * pn / denom;
            let next = *x - step;
            if !(next > 0.0) {
                break;
            }
            *x = next;
            if step.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
    }
    let ln_w = nodes.iter().map(|&x| -ln_christoffel_sum(n, alpha, x)).collect();
    Ok((nodes, ln_w))
}

/// n-point generalized Gauss–Laguerre rule, exact for P(t) t^α e^{-t}, deg P ≤ 2n-1.
pub fn gauss_laguerre(alpha: f64, n: usize) -> Result<QuadRule> {
    let (nodes, ln_w) = gauss_laguerre_log(alpha, n)?;
    Ok(QuadRule {
        nodes,
        weights: ln_w.iter().map(|w| w.exp()).collect(),
        kind: RuleKind::Laguerre { alpha },
    })
}

/// n-point Gauss–Legendre rule on [lo, hi].
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> QuadRule {
    let (x, w) = legendre_unit(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    QuadRule {
        nodes: x.iter().map(|&t| mid + half * t).collect(),
        weights: w.iter().map(|&v| v * half).collect(),
        kind: RuleKind::Legendre { lo, hi },
    }
}

fn legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_p(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_p(n, z);
        if d != 0.0 {
            dp = d;
        }
        // descending cos gives decreasing nodes; store ascending
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

// P_n(z) and P_n'(z)
fn legendre_p(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Rule for ∫₀^∞ g(r) r^{2<k>+a+N-3} dr, exact for g = Q(t) r^{2m} e^{-t}
/// with t = (2/a) r^a and deg Q ≤ 2n-1.
pub fn radial_rule(params: &Params, m: usize, n: usize) -> Result<QuadRule> {
    let lam_m = params.check_m(m)?;
    let a = params.a;
    let lam0 = params.lambda(0);
    let (t, ln_w) = gauss_laguerre_log(lam_m, n)?;
    let ln_c = -a.ln() + (lam0 + 1.0) * (0.5 * a).ln();
    let shift = 2.0 * m as f64 / a;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (ti, lw) in t.iter().zip(&ln_w) {
        nodes.push((0.5 * a * ti).powf(1.0 / a));
        weights.push((ln_c + lw + ti - shift * ti.ln()).exp());
    }
    Ok(QuadRule {
        nodes,
        weights,
        kind: RuleKind::Radial { params: params.clone(), m },
    })
}

/// Composite Gauss–Legendre rule on [0, r_max] with the radial weight folded in.
/// The first panel is graded geometrically toward 0 to absorb a singular r^ν.
pub fn radial_panel_rule(params: &Params, r_max: f64, panels: usize, order: usize) -> QuadRule {
    let nu = params.nu();
    let h = r_max / panels as f64;
    let mut cuts = vec![0.0];
    let grading = if nu.fract() == 0.0 && nu >= 0.0 { 0 } else { 12 };
    for g in (1..=grading).rev() {
        cuts.push(h * 0.25f64.powi(g));
    }
    for p in 1..=panels {
        cuts.push(h * p as f64);
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for win in cuts.windows(2) {
        let rule = gauss_legendre(order, win[0], win[1]);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push(*x);
            weights.push(w * x.powf(nu));
        }
    }
    QuadRule {
        nodes,
        weights,
        kind: RuleKind::RadialPanel { params: params.clone(), r_max },
    }
}

/// Points on S^{N-1} with positive weights for the unnormalized surface measure.
#[derive(Debug, Clone, Serialize)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut g: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, &w)| w * g(p)).sum()
    }
}

/// Sphere rule for N ∈ {1, 2, 3} exact for spherical polynomials of degree ≤ order.
pub fn sphere_rule(dim: usize, order: usize) -> Result<SphereRule> {
    let two_pi = 2.0 * std::f64::consts::PI;
    match dim {
        1 => Ok(SphereRule {
            dim,
            points: vec![vec![-1.0], vec![1.0]],
            weights: vec![1.0, 1.0],
        }),
        2 => {
            let n = order + 1;
            let points = (0..n)
                .map(|j| {
                    let th = two_pi * j as f64 / n as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect();
            Ok(SphereRule {
                dim,
                points,
                weights: vec![two_pi / n as f64; n],
            })
        }
        3 => {
            let n_theta = order / 2 + 1;
            let n_phi = order + 1;
            let gl = gauss_legendre(n_theta, -1.0, 1.0);
            let mut points = Vec::with_capacity(n_theta * n_phi);
            let mut weights = Vec::with_capacity(n_theta * n_phi);
            for (z, wz) in gl.nodes.iter().zip(&gl.weights) {
                let s = (1.0 - z * z).sqrt();
                for j in 0..n_phi {
                    let ph = two_pi * j as f64 / n_phi as f64;
                    points.push(vec![s * ph.cos(), s * ph.sin(), *z]);
                    weights.push(wz * two_pi / n_phi as f64);
                }
            }
            Ok(SphereRule { dim, points, weights })
        }
        _ => capability(format!("sphere rules exist for N = 1, 2, 3 only (got {dim})")),
    }
}

/// Σ weights of the Laguerre rule should equal Γ(α+1).
pub fn laguerre_mass(alpha: f64) -> f64 {
    ln_gamma(alpha + 1.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rules() {
        let r = gauss_laguerre(0.0, 1).unwrap();
        assert!((r.nodes[0] - 1.0).abs() < 1e-14);
        assert!((r.weights[0] - 1.0).abs() < 1e-14);
        let r = gauss_laguerre(2.5, 1).unwrap();
        assert!((r.nodes[0] - 3.5).abs() < 1e-14);
        assert!((r.weights[0] - laguerre_mass(2.5)).abs() < 1e-12);
    }

    #[test]
    fn alpha_out_of_range() {
        assert!(gauss_laguerre(-1.0, 3).is_err());
    }

    #[test]
    fn laguerre_moments() {
        for &alpha in &[-0.9, -0.5, 0.0, 1.3, 7.0, 30.0] {
            let r = gauss_laguerre(alpha, 12).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            // ∫ t^j t^α e^{-t} = Γ(α+j+1)
            for j in 0..24 {
                let got = r.integrate(|t| t.powi(j));
                let want = ln_gamma(alpha + j as f64 + 1.0).exp();
                assert!(((got - want) / want).abs() < 1e-11, "alpha {alpha} j {j}");
            }
        }
    }

    #[test]
    fn legendre_polynomials_exact() {
        let r = gauss_legendre(7, -1.0, 3.0);
        for j in 0..14 {
            let got = r.integrate(|x| x.powi(j));
            let want = (3f64.powi(j + 1) - (-1f64).powi(j + 1)) / (j + 1) as f64;
            assert!((got - want).abs() < 1e-11 * want.abs().max(1.0));
        }
    }

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        let s2 = sphere_rule(2, 6).unwrap();
        assert!((s2.integrate(|_| 1.0) - 2.0 * pi).abs() < 1e-13);
        assert!((s2.integrate(|p| p[0] * p[0]) - pi).abs() < 1e-13);
        let s3 = sphere_rule(3, 6).unwrap();
        assert!((s3.integrate(|_| 1.0) - 4.0 * pi).abs() < 1e-12);
        assert!(sphere_rule(4, 2).is_err());
    }

    #[test]
    fn gaussian_radial_integral() {
        let p = Params::new(1, 2.0, 0.0).unwrap();
        let rule = radial_rule(&p, 0, 10).unwrap();
        let got = rule.integrate(|r| 2.0 / std::f64::consts::PI.sqrt() * (-r * r).exp());
        assert!((got - 1.0).abs() < 1e-13);
    }
}
