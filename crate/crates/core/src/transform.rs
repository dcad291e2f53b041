//! Analysis and synthesis in the basis H^m ⊗ f_{k,a,m;l}, the spectral
//! transform F_{k,a}, the SO(2) flow, finite order and a direct Fourier
//! quadrature used as an independent oracle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{capability, usage, Result};
use crate::quadrature::{gauss_legendre, radial_panel_rule, radial_rule, sphere_rule, QuadRule};
use crate::radial::{apply_sl2, basis_all_unchecked, Params, RadialCoeffs, Sl2};
use crate::spherical::{sph_basis, SphBasis};

/// Coefficients c_{m,μ,l} for m ≤ M and l ≤ L. Sectors whose λ_{k,a,m} ≤ -1
/// or whose harmonic space is trivial hold no entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffField {
    pub params: Params,
    pub m_max: usize,
    pub l_max: usize,
    /// data[m][μ][l]
    pub data: Vec<Vec<Vec<Complex64>>>,
    /// accumulated truncation leak of operators applied to this field
    pub leak: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub m: usize,
    pub mu: usize,
    pub l: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    params: Params,
    #[serde(rename = "M")]
    m_max: usize,
    #[serde(rename = "L")]
    l_max: usize,
    entries: Vec<Entry>,
}

/// Sector multiplicities: number of μ for each m (0 where the sector is unused).
pub fn sector_sizes(params: &Params, m_max: usize) -> Vec<usize> {
    (0..=m_max)
        .map(|m| {
            if params.lambda(m) > -1.0 {
                crate::spherical::dim_harmonic(params.dim, m)
            } else {
                0
            }
        })
        .collect()
}

impl CoeffField {
    pub fn zeros(params: Params, m_max: usize, l_max: usize) -> Self {
        let data = sector_sizes(&params, m_max)
            .into_iter()
            .map(|d| vec![vec![Complex64::new(0.0, 0.0); l_max + 1]; d])
            .collect();
        CoeffField { params, m_max, l_max, data, leak: 0.0 }
    }

    pub fn get(&self, m: usize, mu: usize, l: usize) -> Complex64 {
        self.data[m][mu][l]
    }

    pub fn set(&mut self, m: usize, mu: usize, l: usize, v: Complex64) {
        self.data[m][mu][l] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, Complex64)> + '_ {
        self.data.iter().enumerate().flat_map(|(m, sec)| {
            sec.iter()
                .enumerate()
                .flat_map(move |(mu, row)| row.iter().enumerate().map(move |(l, &c)| (m, mu, l, c)))
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries().map(|(_, _, _, c)| c.norm_sqr()).sum()
    }

    pub fn map_entries<F: FnMut(usize, usize, usize, Complex64) -> Complex64>(&self, mut f: F) -> CoeffField {
        let mut out = self.clone();
        for (m, sec) in out.data.iter_mut().enumerate() {
            for (mu, row) in sec.iter_mut().enumerate() {
                for (l, c) in row.iter_mut().enumerate() {
                    *c = f(m, mu, l, *c);
                }
            }
        }
        out
    }

    /// Largest |difference| between two fields of equal shape.
    pub fn max_diff(&self, other: &CoeffField) -> f64 {
        self.entries()
            .zip(other.entries())
            .map(|((_, _, _, a), (_, _, _, b))| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries = self
            .entries()
            .map(|(m, mu, l, c)| Entry { m, mu, l, re: c.re, im: c.im })
            .collect();
        serde_json::to_value(FieldJson {
            params: self.params.clone(),
            m_max: self.m_max,
            l_max: self.l_max,
            entries,
        })
        .expect("field serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let parsed: FieldJson =
            serde_json::from_value(v.clone()).map_err(|e| crate::KafError::Usage(format!("bad coefficient JSON: {e}")))?;
        let mut field = CoeffField::zeros(parsed.params, parsed.m_max, parsed.l_max);
        for e in parsed.entries {
            if e.m > field.m_max || e.l > field.l_max || e.mu >= field.data[e.m].len() {
                return usage(format!("entry ({}, {}, {}) outside the cutoffs", e.m, e.mu, e.l));
            }
            field.set(e.m, e.mu, e.l, Complex64::new(e.re, e.im));
        }
        Ok(field)
    }

    /// CSV with header m,mu,l,re,im,abs
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,mu,l,re,im,abs\n");
        for (m, mu, l, c) in self.entries() {
            s.push_str(&format!("{m},{mu},{l},{:e},{:e},{:e}\n", c.re, c.im, c.norm()));
        }
        s
    }

    /// One radial sector as a RadialCoeffs value.
    pub fn radial(&self, m: usize, mu: usize) -> Result<RadialCoeffs> {
        RadialCoeffs::new(self.params.clone(), m, self.data[m][mu].clone())
    }
}

/// Radial integration scheme used by [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadialScheme {
    /// Gauss–Laguerre in t = (2/a) r^a with this many nodes per sector.
    Gauss { nodes: usize },
    /// Composite Gauss–Legendre in r on [0, r_max].
    Panel { r_max: f64, panels: usize, order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRules {
    pub radial: RadialScheme,
    /// Sphere rule exactness degree.
    pub sphere_order: usize,
}

impl AnalysisRules {
    /// Gauss–Laguerre radial rule with spare nodes and a sphere rule exact to
    /// degree 2M + slack.
    pub fn gauss(m_max: usize, l_max: usize) -> Self {
        AnalysisRules {
            radial: RadialScheme::Gauss { nodes: 2 * l_max + 40 },
            sphere_order: 2 * m_max + 24,
        }
    }
}

fn check_supported(params: &Params) -> Result<()> {
    if params.dim >= 2 && params.k != 0.0 {
        return capability("k != 0 is only supported for N = 1");
    }
    if params.dim > 3 {
        return capability(format!("analysis needs an explicit sphere rule; N = {} is unsupported", params.dim));
    }
    Ok(())
}

fn bases(params: &Params, m_max: usize) -> Result<Vec<SphBasis>> {
    (0..=m_max).map(|m| sph_basis(params.dim, m as u32)).collect()
}

fn scale_point(omega: &[f64], r: f64) -> Vec<f64> {
    omega.iter().map(|w| w * r).collect()
}

/// c_{m,μ,l} = ∬ fn(rω) Y_{m,μ}(ω) f_{k,a,m;l}(r) dω r^ν dr.
pub fn analyze<F>(params: &Params, f: F, m_max: usize, l_max: usize, rules: &AnalysisRules) -> Result<CoeffField>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    check_supported(params)?;
    let sph = sphere_rule(params.dim, rules.sphere_order)?;
    let bases = bases(params, m_max)?;
    let sizes = sector_sizes(params, m_max);
    let ylm: Vec<Vec<Vec<f64>>> = bases
        .iter()
        .map(|b| sph.points.iter().map(|w| b.eval(w)).collect())
        .collect();

    let shared_panel = match rules.radial {
        RadialScheme::Panel { r_max, panels, order } => Some(radial_panel_rule(params, r_max, panels, order)),
        RadialScheme::Gauss { .. } => None,
    };
    // f sampled on the panel grid is reused by every sector
    let shared_samples: Option<Vec<Vec<Complex64>>> = shared_panel.as_ref().map(|rule| {
        rule.nodes
            .par_iter()
            .map(|&r| sph.points.iter().map(|w| f(&scale_point(w, r))).collect())
            .collect()
    });

    let sectors: Result<Vec<Vec<Vec<Complex64>>>> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            if sizes[m] == 0 {
                return Ok(Vec::new());
            }
            let lam = params.lambda(m);
            let own_rule;
            let (rule, samples): (&QuadRule, Vec<Vec<Complex64>>) = match (&shared_panel, &shared_samples) {
                (Some(rule), Some(s)) => (rule, s.clone()),
                _ => {
                    let n = match rules.radial {
                        RadialScheme::Gauss { nodes } => nodes.max(l_max + 1),
                        RadialScheme::Panel { .. } => unreachable!(),
                    };
                    own_rule = radial_rule(params, m, n)?;
                    let s = own_rule
                        .nodes
                        .iter()
                        .map(|&r| sph.points.iter().map(|w| f(&scale_point(w, r))).collect())
                        .collect();
                    (&own_rule, s)
                }
            };
            let mut out = vec![vec![Complex64::new(0.0, 0.0); l_max + 1]; sizes[m]];
            for ((&r, &wr), vals) in rule.nodes.iter().zip(&rule.weights).zip(&samples) {
                let radial = basis_all_unchecked(params.a, lam, m, l_max, r);
                for (mu, row) in out.iter_mut().enumerate() {
                    let proj: Complex64 = vals
                        .iter()
                        .zip(&sph.weights)
                        .zip(&ylm[m])
                        .map(|((v, &w), y)| v * (w * y[mu]))
                        .sum();
                    let g = proj * wr;
                    for (c, b) in row.iter_mut().zip(&radial) {
                        *c += g * *b;
                    }
                }
            }
            Ok(out)
        })
        .collect();
    Ok(CoeffField {
        params: params.clone(),
        m_max,
        l_max,
        data: sectors?,
        leak: 0.0,
    })
}

/// ∬ |fn(rω)|² dω r^ν dr on the rules `analyze` would use, for Parseval
/// comparisons. The Gauss scheme uses the radial rule of the first valid sector.
pub fn weighted_norm_sqr<F>(params: &Params, f: F, rules: &AnalysisRules) -> Result<f64>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    check_supported(params)?;
    let sph = sphere_rule(params.dim, rules.sphere_order)?;
    let rule = match rules.radial {
        RadialScheme::Gauss { nodes } => radial_rule(params, params.first_valid_m(), nodes)?,
        RadialScheme::Panel { r_max, panels, order } => radial_panel_rule(params, r_max, panels, order),
    };
    let per_node: Vec<f64> = rule
        .nodes
        .par_iter()
        .map(|&r| sph.points.iter().zip(&sph.weights).map(|(w, &ww)| ww * f(&scale_point(w, r)).norm_sqr()).sum())
        .collect();
    Ok(per_node.iter().zip(&rule.weights).map(|(v, w)| v * w).sum())
}

/// Σ c_{m,μ,l} Y_{m,μ}(x/‖x‖) f_{k,a,m;l}(‖x‖)
pub fn synthesize(field: &CoeffField, x: &[f64]) -> Result<Complex64> {
    let params = &field.params;
    check_supported(params)?;
    if x.len() != params.dim {
        return usage(format!("point has {} coordinates, expected {}", x.len(), params.dim));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let omega: Vec<f64> = if r > 0.0 {
        x.iter().map(|v| v / r).collect()
    } else {
        let mut e = vec![0.0; params.dim];
        e[0] = 1.0;
        e
    };
    let mut total = Complex64::new(0.0, 0.0);
    for (m, sector) in field.data.iter().enumerate() {
        if sector.is_empty() || (r == 0.0 && m > 0) {
            continue;
        }
        let y = sph_basis(params.dim, m as u32)?.eval(&omega);
        let radial = basis_all_unchecked(params.a, params.lambda(m), m, field.l_max, r);
        for (mu, row) in sector.iter().enumerate() {
            let s: Complex64 = row.iter().zip(&radial).map(|(c, b)| c * *b).sum();
            total += s * y[mu];
        }
    }
    Ok(total)
}

/// Eigenvalue of F_{k,a} on p ⊗ f_{k,a,m;l}: e^{-iπ(m/a + l)}.
pub fn fourier_phase(params: &Params, m: usize, l: usize) -> Complex64 {
    // reduce the exponent modulo 2 before taking cos/sin
    let half_turns = match params.a_ratio {
        Some((num, den)) => {
            let modulus = 2 * num as u128;
            let e = (m as u128 * den as u128 + l as u128 * num as u128) % modulus;
            e as f64 / num as f64
        }
        None => ((m as f64 / params.a) + l as f64).rem_euclid(2.0),
    };
    exact_unit(-half_turns)
}

// e^{iπ s} with exact values at multiples of 1/2
fn exact_unit(s: f64) -> Complex64 {
    let s = s.rem_euclid(2.0);
    if s == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if s == 0.5 {
        Complex64::new(0.0, 1.0)
    } else if s == 1.0 {
        Complex64::new(-1.0, 0.0)
    } else if s == 1.5 {
        Complex64::new(0.0, -1.0)
    } else {
        let th = std::f64::consts::PI * s;
        Complex64::new(th.cos(), th.sin())
    }
}

pub fn apply_fourier(field: &CoeffField) -> CoeffField {
    let p = &field.params;
    field.map_entries(|m, _, l, c| c * fourier_phase(p, m, l))
}

/// Entrywise e^{it(λ_{k,a,m} + 2l + 1)}.
pub fn so2_flow(field: &CoeffField, t: f64) -> CoeffField {
    let p = &field.params;
    field.map_entries(|m, _, l, c| {
        let th = t * (p.lambda(m) + 2.0 * l as f64 + 1.0);
        c * Complex64::new(th.cos(), th.sin())
    })
}

/// Constant e^{iπ(λ_{k,a,0}+1)/2} relating F_{k,a} to the SO(2) flow at t = -π/2.
pub fn fourier_constant(params: &Params) -> Complex64 {
    let th = std::f64::consts::FRAC_PI_2 * (params.lambda(0) + 1.0);
    Complex64::new(th.cos(), th.sin())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest K ≥ 1 with F_{k,a}^K = id for rational a = num/den:
/// K = lcm(2, 2num/gcd(2num, den)).
pub fn fourier_order(params: &Params) -> Result<u64> {
    let (num, den) = match params.a_ratio {
        Some(r) => r,
        None => return capability("finite order needs a rational a = p/q"),
    };
    if params.dim >= 2 && params.k != 0.0 {
        return capability("k != 0 is only supported for N = 1");
    }
    let two_num = 2 * num;
    let k = two_num / gcd(two_num, den);
    Ok(k / gcd(k, 2) * 2)
}

/// Blockwise action of a radial sl(2) generator.
pub fn op_field(x: Sl2, field: &CoeffField) -> CoeffField {
    let mut out = field.clone();
    let mut leak2 = 0.0;
    for (m, sector) in out.data.iter_mut().enumerate() {
        for row in sector.iter_mut() {
            let rc = RadialCoeffs {
                params: field.params.clone(),
                m,
                c: row.clone(),
                leak: 0.0,
            };
            let res = apply_sl2(x, &rc);
            leak2 += res.leak * res.leak;
            *row = res.c;
        }
    }
    out.leak = (field.leak * field.leak + leak2).sqrt();
    out
}

/// Panel layout for the direct Fourier quadrature on [-half_width, half_width]^N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleBox {
    pub half_width: f64,
    pub panels: usize,
    pub order: usize,
}

impl Default for OracleBox {
    fn default() -> Self {
        OracleBox { half_width: 12.0, panels: 48, order: 10 }
    }
}

fn panel_rule_1d(b: &OracleBox) -> (Vec<f64>, Vec<f64>) {
    // an even panel count keeps 0 on a panel boundary
    let panels = b.panels + b.panels % 2;
    let h = 2.0 * b.half_width / panels as f64;
    let mut x = Vec::new();
    let mut w = Vec::new();
    for p in 0..panels {
        let lo = -b.half_width + h * p as f64;
        let rule = gauss_legendre(b.order, lo, lo + h);
        x.extend(rule.nodes);
        w.extend(rule.weights);
    }
    (x, w)
}

/// (2π)^{-N/2} ∫ fn(x) e^{-i⟨x,ξ⟩} dx by tensor panel quadrature, N ≤ 2.
pub fn classical_fourier_oracle<F>(f: F, xi: &[f64], bx: &OracleBox) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64,
{
    let (x, w) = panel_rule_1d(bx);
    match xi.len() {
        1 => {
            let s: Complex64 = x
                .iter()
                .zip(&w)
                .map(|(&t, &wt)| f(&[t]) * Complex64::from_polar(wt, -t * xi[0]))
                .sum();
            Ok(s / (2.0 * std::f64::consts::PI).sqrt())
        }
        2 => {
            let e0: Vec<Complex64> = x.iter().map(|&t| Complex64::from_polar(1.0, -t * xi[0])).collect();
            let e1: Vec<Complex64> = x.iter().map(|&t| Complex64::from_polar(1.0, -t * xi[1])).collect();
            let mut s = Complex64::new(0.0, 0.0);
            for (i, (&xi0, &wi)) in x.iter().zip(&w).enumerate() {
                let mut row = Complex64::new(0.0, 0.0);
                for (j, (&xj, &wj)) in x.iter().zip(&w).enumerate() {
                    row += f(&[xi0, xj]) * e1[j] * wj;
                }
                s += row * e0[i] * wi;
            }
            Ok(s / (2.0 * std::f64::consts::PI))
        }
        n => capability(format!("the direct Fourier oracle handles N <= 2 (got {n})")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::basis_eval;

    fn cx(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn phase_examples() {
        let p = Params::rational(1, 2, 1, 0.0).unwrap();
        assert_eq!(fourier_phase(&p, 0, 0), cx(1.0));
        assert_eq!(fourier_phase(&p, 1, 0), Complex64::new(0.0, -1.0));
        assert_eq!(fourier_phase(&p, 0, 1), cx(-1.0));
        let q = Params::new(1, 2.0, 0.0).unwrap();
        assert_eq!(fourier_phase(&q, 1, 0), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn order_examples() {
        let cases = [((2, 1), 4), ((1, 1), 2), ((2, 3), 4), ((4, 3), 8), ((3, 1), 6)];
        for ((n, d), want) in cases {
            let p = Params::rational(2, n, d, 0.0).unwrap();
            assert_eq!(fourier_order(&p).unwrap(), want, "a = {n}/{d}");
        }
        assert!(fourier_order(&Params::new(2, 2.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn gaussian_is_fixed_at_a2() {
        let p = Params::rational(2, 2, 1, 0.0).unwrap();
        let f = |x: &[f64]| cx((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
        let field = analyze(&p, f, 3, 4, &AnalysisRules::gauss(3, 4)).unwrap();
        let c00 = field.get(0, 0, 0);
        for (m, mu, l, c) in field.entries() {
            if (m, mu, l) != (0, 0, 0) {
                assert!(c.norm() < 1e-12, "({m},{mu},{l}) = {c}");
            }
        }
        assert!(c00.norm() > 0.1);
        let ff = apply_fourier(&field);
        assert!(ff.max_diff(&field) < 3e-12);
        let back = synthesize(&field, &[0.3, -0.4]).unwrap();
        assert!((back - f(&[0.3, -0.4])).norm() < 1e-12);
    }

    #[test]
    fn single_mode_round_trip() {
        let p = Params::new(3, 1.5, 0.0).unwrap();
        let y = sph_basis(3, 2).unwrap();
        let f = |x: &[f64]| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let w: Vec<f64> = x.iter().map(|v| v / r).collect();
            cx(y.polys[3].eval(&w) * basis_eval(&p, 2, 1, r).unwrap())
        };
        let field = analyze(&p, f, 3, 3, &AnalysisRules::gauss(3, 3)).unwrap();
        for (m, mu, l, c) in field.entries() {
            let want = if (m, mu, l) == (2, 3, 1) { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-9, "({m},{mu},{l}) = {c}");
        }
        let x = [0.4, 0.1, -0.7];
        assert!((synthesize(&field, &x).unwrap() - f(&x)).norm() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let p = Params::new(2, 1.0, 0.0).unwrap();
        let mut field = CoeffField::zeros(p, 2, 3);
        field.set(1, 1, 2, Complex64::new(0.5, -0.25));
        let back = CoeffField::from_json(&field.to_json()).unwrap();
        assert_eq!(back, field);
        assert!(field.to_csv().starts_with("m,mu,l,re,im,abs\n"));
    }

    #[test]
    fn oracle_gaussian_pair() {
        let f = |x: &[f64]| cx((-x[0] * x[0] / 2.0).exp());
        let xi: f64 = 1.3;
        let got = classical_fourier_oracle(f, &[xi], &OracleBox::default()).unwrap();
        assert!((got - cx((-xi * xi / 2.0).exp())).norm() < 1e-10);
    }
}
