//! Real polynomials on ℝ^N stored as exact multi-index coefficient maps.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub type MultiIndex = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub dim: usize,
    pub terms: BTreeMap<MultiIndex, f64>,
}

/// All multi-indices of length `dim` with |α| = deg, in lexicographic order.
pub fn multi_indices(dim: usize, deg: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, left: u32, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            rec(dim, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    rec(dim, deg, &mut Vec::with_capacity(dim), &mut out);
    out
}

pub fn factorial_index(alpha: &[u32]) -> f64 {
    alpha.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product()
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Poly::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Poly::zero(alpha.len());
        p.add_term(alpha, c);
        p
    }

    /// x_j (0-based j).
    pub fn coordinate(dim: usize, j: usize) -> Self {
        let mut alpha = vec![0; dim];
        alpha[j] = 1;
        Poly::monomial(alpha, 1.0)
    }

    /// ‖x‖^2
    pub fn norm_sq(dim: usize) -> Self {
        let mut p = Poly::zero(dim);
        for j in 0..dim {
            let mut alpha = vec![0; dim];
            alpha[j] = 2;
            p.add_term(alpha, 1.0);
        }
        p
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        debug_assert_eq!(alpha.len(), self.dim);
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(alpha).or_insert(0.0);
        *e += c;
    }

    /// Drop coefficients with |c| ≤ tol·max|c|.
    pub fn pruned(mut self, tol: f64) -> Self {
        let scale = self.max_abs();
        self.terms.retain(|_, c| c.abs() > tol * scale && *c != 0.0);
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|&c| c == 0.0)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .map(|(a, _)| a.iter().sum())
            .max()
    }

    /// Some(m) if every nonzero term has total degree m (zero polynomial: None).
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.iter().filter(|(_, &c)| c != 0.0).map(|(a, _)| a.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Homogeneous part of degree d.
    pub fn part(&self, d: u32) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (a, &c) in &self.terms {
            if a.iter().sum::<u32>() == d {
                p.add_term(a.clone(), c);
            }
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (a, &c) in &other.terms {
            p.add_term(a.clone(), c);
        }
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, &c)| (a.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (a, &c) in &self.terms {
            for (b, &d) in &other.terms {
                let ab = a.iter().zip(b).map(|(x, y)| x + y).collect();
                p.add_term(ab, c * d);
            }
        }
        p
    }

    pub fn mul_norm_sq(&self) -> Poly {
        self.mul(&Poly::norm_sq(self.dim))
    }

    /// ∂/∂x_j
    pub fn partial(&self, j: usize) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (a, &c) in &self.terms {
            if a[j] > 0 {
                let mut b = a.clone();
                b[j] -= 1;
                p.add_term(b, c * a[j] as f64);
            }
        }
        p
    }

    /// ∂^γ
    pub fn derivative(&self, gamma: &[u32]) -> Poly {
        let mut p = Poly::zero(self.dim);
        for (a, &c) in &self.terms {
            if a.iter().zip(gamma).all(|(x, g)| x >= g) {
                let mut f = c;
                let mut b = a.clone();
                for (bi, &g) in b.iter_mut().zip(gamma) {
                    for t in 0..g {
                        f *= (*bi - t) as f64;
                    }
                    *bi -= g;
                }
                p.add_term(b, f);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Poly {
        let mut p = Poly::zero(self.dim);
        for j in 0..self.dim {
            p = p.add(&self.partial(j).partial(j));
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, &c)| c * a.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Fischer pairing (p(∂) q)(0) for real coefficients: Σ α! p_α q_α.
    pub fn fischer(&self, other: &Poly) -> f64 {
        self.terms
            .iter()
            .filter_map(|(a, &c)| other.terms.get(a).map(|&d| c * d * factorial_index(a)))
            .sum()
    }

    /// Largest coefficient difference, relative to the larger of the two scales.
    pub fn rel_diff(&self, other: &Poly) -> f64 {
        let d = self.sub(other).max_abs();
        let s = self.max_abs().max(other.max_abs());
        if s == 0.0 {
            d
        } else {
            d / s
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, &c) in &self.terms {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (j, &e) in a.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", j + 1)?,
                    _ => write!(f, "*x{}^{}", j + 1, e)?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
