//! Truncated Taylor series ("jets") at a point. Coefficient k holds f^{(k)}(t0)/k!.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at t.
    pub fn variable(t: f64, order: usize) -> Jet {
        let mut j = Jet::constant(t, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn zero(order: usize) -> Jet {
        Jet::constant(0.0, order)
    }

    pub fn from_derivs(d: &[f64]) -> Jet {
        let mut f = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    f *= k as f64;
                }
                v / f
            })
            .collect();
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// f^{(k)}(t0) for k = 0..=order.
    pub fn derivs(&self) -> Vec<f64> {
        let mut f = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k > 0 {
                    f *= k as f64;
                }
                v * f
            })
            .collect()
    }

    pub fn deriv(&self, k: usize) -> f64 {
        let f: f64 = (1..=k).map(|i| i as f64).product();
        self.c.get(k).copied().unwrap_or(0.0) * f
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let mut c = self.c.clone();
        c.resize(order + 1, 0.0);
        Jet { c }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn add_const(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len().min(o.c.len());
        let mut c = vec![0.0; n];
        for (i, a) in self.c.iter().take(n).enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in o.c.iter().take(n - i).enumerate() {
                c[i + j] += a * b;
            }
        }
        Jet { c }
    }

    pub fn powi(&self, p: u32) -> Jet {
        let mut r = Jet::constant(1.0, self.order());
        for _ in 0..p {
            r = r.mul(self);
        }
        r
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut b = vec![0.0; n];
        b[0] = self.c[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }

    pub fn recip(&self) -> Jet {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.c[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Jet { c: b }
    }

    /// Natural log; requires a positive value.
    pub fn ln(&self) -> Jet {
        let n = self.c.len();
        let a0 = self.c[0];
        let mut b = vec![0.0; n];
        b[0] = a0.ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * self.c[k - j]).sum();
            b[k] = (self.c[k] - s / k as f64) / a0;
        }
        Jet { c: b }
    }

    /// Real power of a jet with positive value.
    pub fn powf(&self, p: f64) -> Jet {
        self.ln().scale(p).exp()
    }

    /// outer ∘ self, where `outer` is the Taylor jet of a function at self.value().
    pub fn compose(&self, outer: &Jet) -> Jet {
        let n = self.order();
        let mut du = self.clone();
        du.c[0] = 0.0;
        let mut acc = Jet::zero(n);
        let mut pw = Jet::constant(1.0, n);
        for (k, ok) in outer.c.iter().enumerate().take(n + 1) {
            if k > 0 {
                pw = pw.mul(&du);
            }
            acc = acc.add(&pw.scale(*ok));
        }
        acc
    }

    /// Jet of t ↦ f(R t) given the jet of f at R t0.
    pub fn rescale_arg(&self, r: f64) -> Jet {
        let mut f = 1.0;
        let c = self
            .c
            .iter()
            .map(|v| {
                let out = v * f;
                f *= r;
                out
            })
            .collect();
        Jet { c }
    }
}
