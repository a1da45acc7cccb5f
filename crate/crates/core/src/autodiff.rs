//! Second-order forward-mode jets.
//!
//! Catalog systems are written once, generically over [`Scalar`], and
//! evaluated either on plain `f64` or on [`Jet`] to obtain exact gradients and
//! Hessians. Phase spaces handled here have at most [`MAX_DIM`] coordinates.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest phase-space dimension a [`Jet`] can carry.
pub const MAX_DIM: usize = 8;
const TRI: usize = MAX_DIM * (MAX_DIM + 1) / 2;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;

    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

/// Value, gradient and Hessian of a function of `dim` variables.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub dim: usize,
    pub v: f64,
    pub g: [f64; MAX_DIM],
    h: [f64; TRI],
}

impl Jet {
    pub fn constant(dim: usize, v: f64) -> Self {
        Jet { dim, v, g: [0.0; MAX_DIM], h: [0.0; TRI] }
    }

    /// The `i`-th coordinate function evaluated at `v`.
    pub fn variable(dim: usize, i: usize, v: f64) -> Self {
        let mut j = Jet::constant(dim, v);
        j.g[i] = 1.0;
        j
    }

    /// Seeds one jet per coordinate of `p`.
    pub fn seed(p: &[f64]) -> Vec<Jet> {
        assert!(p.len() <= MAX_DIM, "jet dimension {} exceeds {}", p.len(), MAX_DIM);
        p.iter().enumerate().map(|(i, &x)| Jet::variable(p.len(), i, x)).collect()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[tri(i, j)]
    }

    pub fn gradient(&self) -> Vec<f64> {
        self.g[..self.dim].to_vec()
    }

    /// Dense row-major Hessian.
    pub fn hessian(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = self.hess(i, j);
            }
        }
        out
    }

    /// Chain rule for a scalar function with derivatives `d1`, `d2` at `self.v`.
    fn compose(self, f: f64, d1: f64, d2: f64) -> Jet {
        let d = self.dim;
        let mut out = Jet::constant(d, f);
        for i in 0..d {
            out.g[i] = d1 * self.g[i];
        }
        for j in 0..d {
            for i in 0..=j {
                let k = tri(i, j);
                out.h[k] = d1 * self.h[k] + d2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.dim = self.dim.min(o.dim);
        self.v += o.v;
        for i in 0..self.dim {
            self.g[i] += o.g[i];
        }
        let t = self.dim * (self.dim + 1) / 2;
        for k in 0..t {
            self.h[k] += o.h[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.v = -self.v;
        for x in self.g.iter_mut() {
            *x = -*x;
        }
        for x in self.h.iter_mut() {
            *x = -*x;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let d = self.dim.min(o.dim);
        let mut out = Jet::constant(d, self.v * o.v);
        for i in 0..d {
            out.g[i] = self.v * o.g[i] + o.v * self.g[i];
        }
        for j in 0..d {
            for i in 0..=j {
                let k = tri(i, j);
                out.h[k] = self.v * o.h[k]
                    + o.v * self.h[k]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let inv = 1.0 / o.v;
        self * o.compose(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        // The dimension is fixed up by the first binary operation with a variable.
        Jet::constant(MAX_DIM, v)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * s * s))
    }
}

/// Values, Jacobian (row-major `n × dim`) and Hessians of a vector of jets.
pub fn unpack(jets: &[Jet], dim: usize) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let values = jets.iter().map(|j| j.v).collect();
    let mut jac = Vec::with_capacity(jets.len() * dim);
    for j in jets {
        jac.extend_from_slice(&j.g[..dim]);
    }
    let hess = jets
        .iter()
        .map(|j| {
            let mut out = vec![0.0; dim * dim];
            for a in 0..dim {
                for b in 0..dim {
                    out[a * dim + b] = j.hess(a, b);
                }
            }
            out
        })
        .collect();
    (values, jac, hess)
}
