//! Grid verification of the Laguerre estimates: Duran's bound, the weighted
//! bound with t^{α/2+β}, and Koornwinder's sum identity.

use serde::{Deserialize, Serialize};

use crate::specfun::{binom_int, binom_real, falling, laguerre, ln_gamma};

/// (d/dt)^γ (L_l^λ(t) e^{-t/2}) = (-1)^γ Σ_j C(γ,j) 2^{-(γ-j)} L_{l-j}^{λ+j}(t) e^{-t/2}
pub fn weighted_laguerre_deriv(l: i64, lam: f64, gamma: u32, t: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..=gamma {
        s += binom_int(gamma as i64, j as i64) * 0.5f64.powi((gamma - j) as i32) * laguerre(l - j as i64, lam + j as f64, t);
    }
    let sign = if gamma % 2 == 0 { 1.0 } else { -1.0 };
    sign * s * (-0.5 * t).exp()
}

/// Summary of a grid sweep over one inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub cases: usize,
    pub points: usize,
    pub violations: usize,
    /// min over cases of (RHS - sup LHS)/RHS
    pub min_rel_margin: f64,
    pub worst_case: String,
}

impl BoundReport {
    fn new(name: &str) -> Self {
        BoundReport {
            name: name.to_string(),
            cases: 0,
            points: 0,
            violations: 0,
            min_rel_margin: f64::INFINITY,
            worst_case: String::new(),
        }
    }

    fn record(&mut self, sup: f64, rhs: f64, points: usize, label: impl FnOnce() -> String) {
        self.cases += 1;
        self.points += points;
        if sup > rhs * (1.0 + 1e-12) {
            self.violations += 1;
        }
        let margin = (rhs - sup) / rhs;
        if margin < self.min_rel_margin {
            self.min_rel_margin = margin;
            self.worst_case = label();
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Evenly spaced grid of `n` points on [lo, hi].
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DuranGrid {
    pub l_max: u32,
    pub lambdas: Vec<f64>,
    pub beta_max: u32,
    pub gamma_max: u32,
    pub t_max: f64,
    pub t_points: usize,
}

impl Default for DuranGrid {
    fn default() -> Self {
        DuranGrid {
            l_max: 20,
            lambdas: vec![-0.5, 0.0, 0.7, 3.0, 10.0],
            beta_max: 4,
            gamma_max: 4,
            t_max: 100.0,
            t_points: 2000,
        }
    }
}

/// 2^{β+max(β-λ,0)} (l+β)^{underline β} C(max(λ-β,0)+l+γ, l)
pub fn duran_rhs(l: u32, lam: f64, beta: u32, gamma: u32) -> f64 {
    let b = beta as f64;
    2f64.powf(b + (b - lam).max(0.0))
        * falling(l as f64 + b, beta)
        * binom_real((lam - b).max(0.0) + (l + gamma) as f64, l)
}

pub fn check_duran(grid: &DuranGrid) -> BoundReport {
    let ts = uniform_grid(0.0, grid.t_max, grid.t_points);
    let mut rep = BoundReport::new("Duran bound");
    for l in 0..=grid.l_max {
        for &lam in &grid.lambdas {
            if lam < -(l as f64) - 1.0 {
                continue;
            }
            for gamma in 0..=grid.gamma_max {
                let vals: Vec<f64> = ts.iter().map(|&t| weighted_laguerre_deriv(l as i64, lam, gamma, t)).collect();
                for beta in 0..=grid.beta_max {
                    let sup = ts
                        .iter()
                        .zip(&vals)
                        .map(|(&t, v)| (t.powi(beta as i32) * v).abs())
                        .fold(0.0, f64::max);
                    let rhs = duran_rhs(l, lam, beta, gamma);
                    rep.record(sup, rhs, ts.len(), || format!("l={l} lambda={lam} beta={beta} gamma={gamma}"));
                }
            }
        }
    }
    rep
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightedGrid {
    pub l_max: u32,
    pub lambdas: Vec<f64>,
    pub gamma_max: u32,
    pub t_max: f64,
    pub t_points: usize,
}

impl Default for WeightedGrid {
    fn default() -> Self {
        WeightedGrid {
            l_max: 20,
            lambdas: vec![1.0, 2.0, 5.0, 10.0],
            gamma_max: 3,
            t_max: 200.0,
            t_points: 4000,
        }
    }
}

/// 2^β (λ+l)^{underline β} C(λ+l+γ, l+β) (α!)^{1/2} C(λ-β+γ, α)^{1/2} C(λ+l, α)^{-1/2}
pub fn weighted_rhs(l: u32, lam: f64, alpha: u32, beta: u32, gamma: u32) -> f64 {
    let lf = l as f64;
    let afact = (ln_gamma(alpha as f64 + 1.0)).exp();
    2f64.powi(beta as i32)
        * falling(lam + lf, beta)
        * binom_real(lam + lf + gamma as f64, l + beta)
        * afact.sqrt()
        * binom_real(lam - beta as f64 + gamma as f64, alpha).sqrt()
        / binom_real(lam + lf, alpha).sqrt()
}

/// Sweep of sup_t |t^{α/2+β} (d/dt)^γ (L_l^λ e^{-t/2})| against the bound, for α + β ≤ λ.
pub fn check_weighted(grid: &WeightedGrid) -> BoundReport {
    let ts = uniform_grid(0.0, grid.t_max, grid.t_points);
    let mut rep = BoundReport::new("weighted Laguerre bound");
    for l in 0..=grid.l_max {
        for &lam in &grid.lambdas {
            for gamma in 0..=grid.gamma_max {
                let vals: Vec<f64> = ts.iter().map(|&t| weighted_laguerre_deriv(l as i64, lam, gamma, t)).collect();
                let ab_max = lam.floor() as u32;
                for alpha in 0..=ab_max {
                    for beta in 0..=(ab_max - alpha) {
                        let e = alpha as f64 / 2.0 + beta as f64;
                        let sup = ts
                            .iter()
                            .zip(&vals)
                            .map(|(&t, v)| (t.powf(e) * v).abs())
                            .fold(0.0, f64::max);
                        let rhs = weighted_rhs(l, lam, alpha, beta, gamma);
                        rep.record(sup, rhs, ts.len(), || {
                            format!("l={l} lambda={lam} alpha={alpha} beta={beta} gamma={gamma}")
                        });
                    }
                }
            }
        }
    }
    rep
}

/// ln of the coefficient
/// C(l,j) λ/(λ+i+j) (λ+l+1)^{(i)} / (i! (λ+j)^{(i)} (λ+i)^{(j)})
fn ln_koornwinder_coeff(lam: f64, l: u32, i: u32, j: u32) -> f64 {
    let (fi, fj, fl) = (i as f64, j as f64, l as f64);
    binom_int(l as i64, j as i64).ln() + lam.ln() - (lam + fi + fj).ln()
        + (ln_gamma(lam + fl + 1.0 + fi) - ln_gamma(lam + fl + 1.0))
        - ln_gamma(fi + 1.0)
        - (ln_gamma(lam + fj + fi) - ln_gamma(lam + fj))
        - (ln_gamma(lam + fi + fj) - ln_gamma(lam + fi))
}

/// The j-sum of Koornwinder's identity for a single i.
pub fn koornwinder_row(lam: f64, l: u32, i: u32, t: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..=l {
        let deg = (l - j) as i64;
        let par = lam + (i + j) as f64;
        let at0 = binom_real(par + deg as f64, deg as u32);
        let ratio = laguerre(deg, par, t * t) / at0;
        if t == 0.0 {
            if i + j == 0 {
                s += ratio * ratio;
            }
            continue;
        }
        let ln_pref = ln_koornwinder_coeff(lam, l, i, j) + 2.0 * (i + j) as f64 * t.ln() - t * t;
        s += ln_pref.exp() * ratio * ratio;
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KoornwinderReport {
    pub cases: usize,
    /// max over cases and truncations of partial sum - 1
    pub max_overshoot: f64,
    pub monotone: bool,
    /// max |sum - 1| at the adaptive truncation
    pub max_final_error: f64,
    pub max_terms: u32,
}

impl KoornwinderReport {
    pub fn passed(&self) -> bool {
        self.max_overshoot <= 1e-12 && self.monotone && self.max_final_error <= 1e-8
    }
}

/// Partial sums over i of Koornwinder's identity, truncated adaptively once the
/// row terms are past their peak and below 1e-18 of the running sum.
pub fn koornwinder_partial_sums(lam: f64, l: u32, t: f64) -> Vec<f64> {
    let mut sums = Vec::new();
    let mut acc = 0.0;
    let mut prev_row = 0.0;
    for i in 0..2000 {
        let row = koornwinder_row(lam, l, i, t);
        acc += row;
        sums.push(acc);
        let decreasing = row <= prev_row;
        prev_row = row;
        if i > 0 && decreasing && row <= 1e-18 * acc {
            break;
        }
    }
    sums
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct KoornwinderGrid {
    pub lambdas: Vec<f64>,
    pub l_max: u32,
    pub t_max: f64,
    pub t_points: usize,
}

impl Default for KoornwinderGrid {
    fn default() -> Self {
        KoornwinderGrid {
            lambdas: vec![0.5, 1.0, 3.0],
            l_max: 8,
            t_max: 5.0,
            t_points: 51,
        }
    }
}

pub fn check_koornwinder(grid: &KoornwinderGrid) -> KoornwinderReport {
    let mut rep = KoornwinderReport {
        cases: 0,
        max_overshoot: f64::NEG_INFINITY,
        monotone: true,
        max_final_error: 0.0,
        max_terms: 0,
    };
    for &lam in &grid.lambdas {
        for l in 0..=grid.l_max {
            for t in uniform_grid(0.0, grid.t_max, grid.t_points) {
                let sums = koornwinder_partial_sums(lam, l, t);
                rep.cases += 1;
                rep.max_terms = rep.max_terms.max(sums.len() as u32);
                rep.monotone &= sums.windows(2).all(|w| w[1] >= w[0]);
                for s in &sums {
                    rep.max_overshoot = rep.max_overshoot.max(s - 1.0);
                }
                let last = *sums.last().unwrap();
                rep.max_final_error = rep.max_final_error.max((last - 1.0).abs());
            }
        }
    }
    rep
}
