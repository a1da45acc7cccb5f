//! Linear local models `Q_k`, their flows, and the semi-toric transition
//! machinery: the maps `zeta_B`, `eta_B`, the joint flow `Upsilon`, and
//! verifiers for the constrained Jacobian layouts of transition functions.
//!
//! Phase-space layout of a model of type `(k_e, k_f, k_h, k_x)`: elliptic
//! degrees of freedom first, then hyperbolic, then focus-focus pairs, then the
//! transverse ones, whose `(x, xi)` coordinates are the angle-action pairs
//! `(theta, I)`.
//!
//! Transition values are ordered `(q1, q2, q_e..., I...)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::intmat::IntMatrix;
use crate::linalg::Mat;
use crate::symplectic::{PhasePoint, QuadraticHamiltonian, SmoothHamiltonian};
use crate::williamson::WilliamsonType;

/// One component function of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Elliptic(usize),
    Hyperbolic(usize),
    /// `x1 xi1 + x2 xi2` of the `j`-th focus-focus pair.
    FocusRadial(usize),
    /// `x1 xi2 - x2 xi1` of the `j`-th focus-focus pair.
    FocusAngular(usize),
    Transverse(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelQ {
    wtype: WilliamsonType,
    components: Vec<Component>,
}

pub fn build_model(w: WilliamsonType) -> ModelQ {
    let mut components = Vec::with_capacity(w.n());
    components.extend((0..w.k_e()).map(Component::Elliptic));
    components.extend((0..w.k_h()).map(Component::Hyperbolic));
    for j in 0..w.k_f() {
        components.push(Component::FocusRadial(j));
        components.push(Component::FocusAngular(j));
    }
    components.extend((0..w.k_x()).map(Component::Transverse));
    ModelQ { wtype: w, components }
}

impl ModelQ {
    pub fn wtype(&self) -> WilliamsonType {
        self.wtype
    }

    pub fn n(&self) -> usize {
        self.wtype.n()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    fn focus_dofs(&self, j: usize) -> (usize, usize) {
        let a = self.wtype.k_e() + self.wtype.k_h() + 2 * j;
        (a, a + 1)
    }

    /// Degree of freedom carrying an elliptic, hyperbolic or transverse component.
    fn dof(&self, c: Component) -> usize {
        let w = &self.wtype;
        match c {
            Component::Elliptic(j) => j,
            Component::Hyperbolic(j) => w.k_e() + j,
            Component::FocusRadial(j) | Component::FocusAngular(j) => self.focus_dofs(j).0,
            Component::Transverse(j) => w.n() - w.k_x() + j,
        }
    }

    pub fn eval_component(&self, c: Component, p: &[f64]) -> f64 {
        let n = self.n();
        let x = |i: usize| p[i];
        let xi = |i: usize| p[n + i];
        match c {
            Component::Elliptic(_) => {
                let d = self.dof(c);
                x(d) * x(d) + xi(d) * xi(d)
            }
            Component::Hyperbolic(_) => {
                let d = self.dof(c);
                x(d) * xi(d)
            }
            Component::FocusRadial(j) => {
                let (a, b) = self.focus_dofs(j);
                x(a) * xi(a) + x(b) * xi(b)
            }
            Component::FocusAngular(j) => {
                let (a, b) = self.focus_dofs(j);
                x(a) * xi(b) - x(b) * xi(a)
            }
            Component::Transverse(_) => xi(self.dof(c)),
        }
    }

    /// Quadratic form of a singular component; `None` for transverse ones.
    pub fn quadratic(&self, c: Component) -> Option<QuadraticHamiltonian> {
        let n = self.n();
        let mut s = Mat::zeros(2 * n, 2 * n);
        let mut put = |i: usize, j: usize, v: f64| {
            s[(i, j)] += v / 2.0;
            s[(j, i)] += v / 2.0;
        };
        match c {
            Component::Elliptic(_) => {
                let d = self.dof(c);
                put(d, d, 1.0);
                put(n + d, n + d, 1.0);
            }
            Component::Hyperbolic(_) => {
                let d = self.dof(c);
                put(d, n + d, 1.0);
            }
            Component::FocusRadial(j) => {
                let (a, b) = self.focus_dofs(j);
                put(a, n + a, 1.0);
                put(b, n + b, 1.0);
            }
            Component::FocusAngular(j) => {
                let (a, b) = self.focus_dofs(j);
                put(a, n + b, 1.0);
                put(b, n + a, -1.0);
            }
            Component::Transverse(_) => return None,
        }
        Some(QuadraticHamiltonian::new(s).expect("square even matrix"))
    }

    /// Hamiltonian of a component as a smooth function on `R^{2n}`.
    pub fn hamiltonian(&self, c: Component) -> SmoothHamiltonian {
        match self.quadratic(c) {
            Some(q) => q.to_smooth(),
            None => SmoothHamiltonian::momentum(self.n(), self.dof(c)),
        }
    }

    /// Exact flow of one component on phase coordinates (no angle reduction).
    pub fn flow_component(&self, c: Component, p: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.n();
        check_dim(2 * n, p.len())?;
        let mut out = p.to_vec();
        match c {
            Component::Elliptic(_) => {
                let d = self.dof(c);
                let z = Complex64::new(p[d], p[n + d]) * Complex64::from_polar(1.0, -2.0 * t);
                out[d] = z.re;
                out[n + d] = z.im;
            }
            Component::Hyperbolic(_) => {
                let d = self.dof(c);
                out[d] = p[d] * t.exp();
                out[n + d] = p[n + d] * (-t).exp();
            }
            Component::FocusRadial(j) | Component::FocusAngular(j) => {
                let (a, b) = self.focus_dofs(j);
                let (f1, f2) = match c {
                    Component::FocusRadial(_) => (Complex64::new(t.exp(), 0.0), Complex64::new((-t).exp(), 0.0)),
                    _ => (Complex64::from_polar(1.0, t), Complex64::from_polar(1.0, t)),
                };
                let z1 = Complex64::new(p[a], p[b]) * f1;
                let z2 = Complex64::new(p[n + a], p[n + b]) * f2;
                out[a] = z1.re;
                out[b] = z1.im;
                out[n + a] = z2.re;
                out[n + b] = z2.im;
            }
            Component::Transverse(_) => out[self.dof(c)] += t,
        }
        Ok(out)
    }

    /// Period of a component flow, `None` for non-compact ones.
    pub fn period(&self, c: Component) -> Option<f64> {
        match c {
            Component::Elliptic(_) => Some(std::f64::consts::PI),
            Component::FocusAngular(_) | Component::Transverse(_) => Some(TAU),
            Component::Hyperbolic(_) | Component::FocusRadial(_) => None,
        }
    }

    /// Wraps the transverse angle coordinates into `[0, 2 pi)`.
    pub fn reduce_angles(&self, p: &mut [f64]) {
        let n = self.n();
        for d in n - self.wtype.k_x()..n {
            p[d] = reduce_angle(p[d]);
        }
    }

    /// Quadratic parts restricted to the singular degrees of freedom; the
    /// Cartan candidate of the model at the origin.
    pub fn singular_hessians(&self) -> Vec<QuadraticHamiltonian> {
        let m = self.wtype.singular_dofs();
        let n = self.n();
        let keep: Vec<usize> = (0..m).chain(n..n + m).collect();
        self.components
            .iter()
            .filter_map(|&c| self.quadratic(c))
            .map(|q| {
                let s = Mat::from_fn(2 * m, 2 * m, |i, j| q.matrix()[(keep[i], keep[j])]);
                QuadraticHamiltonian::new(s).expect("square even matrix")
            })
            .collect()
    }
}

pub fn eval_model(m: &ModelQ, p: &PhasePoint) -> Result<Vec<f64>> {
    check_dim(m.n(), p.n())?;
    Ok(m.components.iter().map(|&c| m.eval_component(c, p.coords())).collect())
}

/// A point of the semi-toric model `(k_e, 1, 0, k_x)` in complex coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    /// `x1 + i x2` of the focus-focus block.
    pub z1: Complex64,
    /// `xi1 + i xi2` of the focus-focus block.
    pub z2: Complex64,
    /// `x + i xi` per elliptic block.
    pub ze: Vec<Complex64>,
    pub theta: Vec<f64>,
    pub action: Vec<f64>,
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl ModelPoint {
    pub fn new(
        z1: Complex64,
        z2: Complex64,
        ze: Vec<Complex64>,
        theta: Vec<f64>,
        action: Vec<f64>,
    ) -> Result<Self> {
        check_dim(theta.len(), action.len())?;
        Ok(ModelPoint { z1, z2, ze, theta, action }.normalized())
    }

    /// Angles reduced to `[0, 2 pi)`.
    pub fn normalized(mut self) -> Self {
        self.theta.iter_mut().for_each(|t| *t = reduce_angle(*t));
        self
    }

    pub fn wtype(&self) -> WilliamsonType {
        WilliamsonType::new(self.ze.len(), 1, 0, self.theta.len())
    }

    /// Phase-space coordinates without angle reduction.
    pub fn to_phase(&self) -> PhasePoint {
        let ke = self.ze.len();
        let kx = self.theta.len();
        let n = ke + 2 + kx;
        let mut c = vec![0.0; 2 * n];
        for (j, z) in self.ze.iter().enumerate() {
            c[j] = z.re;
            c[n + j] = z.im;
        }
        c[ke] = self.z1.re;
        c[ke + 1] = self.z1.im;
        c[n + ke] = self.z2.re;
        c[n + ke + 1] = self.z2.im;
        for j in 0..kx {
            c[ke + 2 + j] = self.theta[j];
            c[n + ke + 2 + j] = self.action[j];
        }
        PhasePoint::new(c).expect("even length")
    }

    /// Inverse of [`ModelPoint::to_phase`], without angle reduction.
    pub fn from_phase(w: WilliamsonType, p: &[f64]) -> Result<Self> {
        require_semitoric(&w)?;
        let n = w.n();
        check_dim(2 * n, p.len())?;
        let ke = w.k_e();
        Ok(ModelPoint {
            z1: Complex64::new(p[ke], p[ke + 1]),
            z2: Complex64::new(p[n + ke], p[n + ke + 1]),
            ze: (0..ke).map(|j| Complex64::new(p[j], p[n + j])).collect(),
            theta: (0..w.k_x()).map(|j| p[ke + 2 + j]).collect(),
            action: (0..w.k_x()).map(|j| p[n + ke + 2 + j]).collect(),
        })
    }

    /// `q1 + i q2 = conj(z1) z2`.
    pub fn q(&self) -> Complex64 {
        self.z1.conj() * self.z2
    }

    /// Values in transition order `(q1, q2, q_e..., I...)`.
    pub fn values(&self) -> Vec<f64> {
        let q = self.q();
        let mut out = vec![q.re, q.im];
        out.extend(self.ze.iter().map(|z| z.norm_sqr()));
        out.extend_from_slice(&self.action);
        out
    }
}

fn require_semitoric(w: &WilliamsonType) -> Result<()> {
    if w.k_f() != 1 || w.k_h() != 0 {
        return Err(Error::Precondition(format!(
            "semi-toric local model needs k_f = 1 and k_h = 0, got {w}"
        )));
    }
    Ok(())
}

/// A point of the model whose value (in transition order) is `values`.
pub fn model_lift(w: WilliamsonType, values: &[f64], theta: &[f64]) -> Result<ModelPoint> {
    require_semitoric(&w)?;
    check_dim(w.n(), values.len())?;
    check_dim(w.k_x(), theta.len())?;
    let ke = w.k_e();
    let mut ze = Vec::with_capacity(ke);
    for &qe in &values[2..2 + ke] {
        if qe < 0.0 {
            return Err(Error::Domain(format!("elliptic value {qe} is negative")));
        }
        ze.push(Complex64::new(qe.sqrt(), 0.0));
    }
    Ok(ModelPoint {
        z1: Complex64::new(1.0, 0.0),
        z2: Complex64::new(values[0], values[1]),
        ze,
        theta: theta.to_vec(),
        action: values[2 + ke..].to_vec(),
    })
}

/// Flow generators with closed-form flows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    Elliptic(usize),
    Q1,
    Q2,
    Transverse(usize),
}

impl Species {
    /// The corresponding model component.
    pub fn component(&self) -> Component {
        match *self {
            Species::Elliptic(j) => Component::Elliptic(j),
            Species::Q1 => Component::FocusRadial(0),
            Species::Q2 => Component::FocusAngular(0),
            Species::Transverse(j) => Component::Transverse(j),
        }
    }
}

/// Exact flows: `q2` rotates both focus-focus variables by `e^{it}`, `q1`
/// scales them by `(e^t, e^{-t})`, `e_j` rotates `z^e_j` by `e^{-2it}` and
/// `I_j` translates `theta_j`.
pub fn flow_closed_form(species: Species, p: &ModelPoint, t: f64) -> Result<ModelPoint> {
    let mut out = p.clone();
    match species {
        Species::Q2 => {
            let r = Complex64::from_polar(1.0, t);
            out.z1 *= r;
            out.z2 *= r;
        }
        Species::Q1 => {
            out.z1 *= t.exp();
            out.z2 *= (-t).exp();
        }
        Species::Elliptic(j) => {
            let z = out
                .ze
                .get_mut(j)
                .ok_or_else(|| Error::Precondition(format!("no elliptic component {j}")))?;
            *z *= Complex64::from_polar(1.0, -2.0 * t);
        }
        Species::Transverse(j) => {
            let th = out
                .theta
                .get_mut(j)
                .ok_or_else(|| Error::Precondition(format!("no transverse component {j}")))?;
            *th += t;
        }
    }
    Ok(out.normalized())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpsilonResult {
    pub s: f64,
    pub t: f64,
    pub end: ModelPoint,
}

/// Joint flow `phi_{q1}^s ∘ phi_{q2}^t` taking `(c, conj(delta), theta, I)` to
/// `(delta, conj(c), theta, I)` with `s = ln|delta / c|`, `t = arg delta - arg c`.
pub fn upsilon(c: Complex64, delta: Complex64, theta: &[f64], action: &[f64]) -> Result<UpsilonResult> {
    if c.norm() == 0.0 || delta.norm() == 0.0 {
        return Err(Error::Domain("upsilon needs c != 0 and delta != 0".into()));
    }
    let start = ModelPoint::new(c, delta.conj(), Vec::new(), theta.to_vec(), action.to_vec())?;
    let s = (delta.norm() / c.norm()).ln();
    let t = delta.arg() - c.arg();
    let mid = flow_closed_form(Species::Q2, &start, t)?;
    let end = flow_closed_form(Species::Q1, &mid, s)?;
    Ok(UpsilonResult { s, t, end })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonSigns {
    pub eps_f1: i8,
    pub eps_f2: i8,
    pub eps_e: Vec<i8>,
}

impl EpsilonSigns {
    pub fn new(eps_f1: i8, eps_f2: i8, eps_e: Vec<i8>) -> Result<Self> {
        for e in std::iter::once(&eps_f1).chain(std::iter::once(&eps_f2)).chain(eps_e.iter()) {
            if *e != 1 && *e != -1 {
                return Err(Error::Domain(format!("sign {e} is not ±1")));
            }
        }
        Ok(EpsilonSigns { eps_f1, eps_f2, eps_e })
    }

    pub fn identity(k_e: usize) -> Self {
        EpsilonSigns { eps_f1: 1, eps_f2: 1, eps_e: vec![1; k_e] }
    }
}

/// `E_1` acting on `(x1, xi1, x2, xi2)`.
pub fn e1_matrix(eps_f1: i8) -> Mat {
    let e = eps_f1 as f64;
    Mat::from_row_slice(
        4,
        4,
        &[
            1.0 + e, 1.0 - e, 0.0, 0.0,
            -1.0 + e, 1.0 + e, 0.0, 0.0,
            0.0, 0.0, 1.0 + e, 1.0 - e,
            0.0, 0.0, -1.0 + e, 1.0 + e,
        ],
    ) * 0.5
}

/// `E_2` acting on `(x1, xi1, x2, xi2)`.
pub fn e2_matrix(eps_f2: i8) -> Mat {
    let e = eps_f2 as f64;
    Mat::from_row_slice(
        4,
        4,
        &[
            1.0 + e, 0.0, 1.0 - e, 0.0,
            0.0, 1.0 + e, 0.0, 1.0 - e,
            1.0 - e, 0.0, 1.0 + e, 0.0,
            0.0, 1.0 - e, 0.0, 1.0 + e,
        ],
    ) * 0.5
}

/// Applies `E = E_1 E_2` to the focus-focus block.
pub fn apply_focus_block(eps: &EpsilonSigns, p: &ModelPoint) -> ModelPoint {
    let e = e1_matrix(eps.eps_f1) * e2_matrix(eps.eps_f2);
    let v = nalgebra::DVector::from_column_slice(&[p.z1.re, p.z2.re, p.z1.im, p.z2.im]);
    let w = e * v;
    let mut out = p.clone();
    out.z1 = Complex64::new(w[0], w[2]);
    out.z2 = Complex64::new(w[1], w[3]);
    out
}

/// `zeta_B`: rotates the focus-focus and elliptic variables by angles linear in
/// `theta` and shifts the actions accordingly.
///
/// `xf` has length `k_x`, `xe` is `k_x × k_e`. Elliptic variables turn by
/// `e^{2i (theta·X^e)_j}`, the time `-(theta·X^e)_j` flow of `e_j`, which is
/// what makes the map symplectic for `e = x^2 + xi^2`.
pub fn zeta(xf: &[i64], xe: &IntMatrix, p: &ModelPoint) -> Result<ModelPoint> {
    Ok(zeta_raw(xf, xe, p)?.normalized())
}

fn zeta_raw(xf: &[i64], xe: &IntMatrix, p: &ModelPoint) -> Result<ModelPoint> {
    let kx = p.theta.len();
    let ke = p.ze.len();
    check_dim(kx, xf.len())?;
    check_dim(kx, xe.rows())?;
    check_dim(ke, xe.cols())?;
    let psi: f64 = p.theta.iter().zip(xf).map(|(t, &x)| t * x as f64).sum();
    let rot = Complex64::from_polar(1.0, -psi);
    let q2 = p.q().im;
    let mut out = p.clone();
    out.z1 *= rot;
    out.z2 *= rot;
    for j in 0..ke {
        let phi: f64 = (0..kx).map(|i| p.theta[i] * xe.get(i, j) as f64).sum();
        out.ze[j] *= Complex64::from_polar(1.0, 2.0 * phi);
    }
    for i in 0..kx {
        let shift: f64 =
            (0..ke).map(|j| xe.get(i, j) as f64 * p.ze[j].norm_sqr()).sum::<f64>() + xf[i] as f64 * q2;
        out.action[i] += shift;
    }
    Ok(out)
}

/// `eta_B`: `E_1 E_2` on the focus-focus block, `theta -> theta (X^x)^{-1}`,
/// `I -> I (X^x)^T`.
pub fn eta(eps: &EpsilonSigns, xx: &IntMatrix, p: &ModelPoint) -> Result<ModelPoint> {
    Ok(eta_raw(eps, xx, p)?.normalized())
}

fn eta_raw(eps: &EpsilonSigns, xx: &IntMatrix, p: &ModelPoint) -> Result<ModelPoint> {
    let kx = p.theta.len();
    check_dim(kx, xx.rows())?;
    check_dim(kx, xx.cols())?;
    let inv = xx.inverse_unimodular()?;
    let mut out = apply_focus_block(eps, p);
    for j in 0..kx {
        out.theta[j] = (0..kx).map(|i| p.theta[i] * inv.get(i, j) as f64).sum();
        out.action[j] = (0..kx).map(|i| p.action[i] * xx.get(j, i) as f64).sum();
    }
    Ok(out)
}

/// `zeta_B` on raw phase coordinates (no angle reduction), for Jacobians.
pub fn zeta_phase(w: WilliamsonType, xf: &[i64], xe: &IntMatrix, p: &[f64]) -> Result<Vec<f64>> {
    let mp = ModelPoint::from_phase(w, p)?;
    Ok(zeta_raw(xf, xe, &mp)?.to_phase().into_vec())
}

/// `eta_B` on raw phase coordinates (no angle reduction), for Jacobians.
pub fn eta_phase(w: WilliamsonType, eps: &EpsilonSigns, xx: &IntMatrix, p: &[f64]) -> Result<Vec<f64>> {
    let mp = ModelPoint::from_phase(w, p)?;
    Ok(eta_raw(eps, xx, &mp)?.to_phase().into_vec())
}

/// Linear transition in the normal form `(eps_f1 q1, eps_f2 q2, eps_e q_e,
/// X^f q2 + X^e q_e + X^x I)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarTransition {
    pub eps: EpsilonSigns,
    pub xf: Vec<i64>,
    pub xe: IntMatrix,
    pub xx: IntMatrix,
}

impl StarTransition {
    pub fn identity(w: WilliamsonType) -> Self {
        StarTransition {
            eps: EpsilonSigns::identity(w.k_e()),
            xf: vec![0; w.k_x()],
            xe: IntMatrix::zeros(w.k_x(), w.k_e()),
            xx: IntMatrix::identity(w.k_x()),
        }
    }

    pub fn k_e(&self) -> usize {
        self.eps.eps_e.len()
    }

    pub fn k_x(&self) -> usize {
        self.xf.len()
    }

    pub fn n(&self) -> usize {
        2 + self.k_e() + self.k_x()
    }

    pub fn jacobian(&self) -> Mat {
        let (ke, kx) = (self.k_e(), self.k_x());
        let n = self.n();
        let mut j = Mat::zeros(n, n);
        j[(0, 0)] = self.eps.eps_f1 as f64;
        j[(1, 1)] = self.eps.eps_f2 as f64;
        for a in 0..ke {
            j[(2 + a, 2 + a)] = self.eps.eps_e[a] as f64;
        }
        for i in 0..kx {
            let r = 2 + ke + i;
            j[(r, 1)] = self.xf[i] as f64;
            for a in 0..ke {
                j[(r, 2 + a)] = self.xe.get(i, a) as f64;
            }
            for b in 0..kx {
                j[(r, 2 + ke + b)] = self.xx.get(i, b) as f64;
            }
        }
        j
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let j = self.jacobian();
        (j * nalgebra::DVector::from_column_slice(values)).iter().copied().collect()
    }

    /// Group law: `self ∘ first`.
    pub fn compose(&self, first: &StarTransition) -> StarTransition {
        let (ke, kx) = (self.k_e(), self.k_x());
        let eps = EpsilonSigns {
            eps_f1: self.eps.eps_f1 * first.eps.eps_f1,
            eps_f2: self.eps.eps_f2 * first.eps.eps_f2,
            eps_e: (0..ke).map(|a| self.eps.eps_e[a] * first.eps.eps_e[a]).collect(),
        };
        let xf = (0..kx)
            .map(|i| {
                self.xf[i] * first.eps.eps_f2 as i64
                    + (0..kx).map(|b| self.xx.get(i, b) * first.xf[b]).sum::<i64>()
            })
            .collect();
        let xe = IntMatrix::from_fn(kx, ke, |i, a| {
            self.xe.get(i, a) * first.eps.eps_e[a] as i64
                + (0..kx).map(|b| self.xx.get(i, b) * first.xe.get(b, a)).sum::<i64>()
        });
        let xx = self.xx.mul(&first.xx).expect("square blocks");
        StarTransition { eps, xf, xe, xx }
    }

    /// Phase-space realization `zeta_B ∘ eta_B`; only defined when every
    /// elliptic sign is `+1`.
    pub fn realize(&self, p: &ModelPoint) -> Result<ModelPoint> {
        if self.eps.eps_e.iter().any(|&e| e != 1) {
            return Err(Error::Domain("elliptic sign flips have no symplectic realization".into()));
        }
        // Q ∘ zeta ∘ eta = B_zeta ∘ B_eta ∘ Q, and B_zeta ∘ B_eta has exactly
        // the blocks of `self` once X^f is divided by eps_f2.
        let xf: Vec<i64> = self.xf.iter().map(|x| x * self.eps.eps_f2 as i64).collect();
        let inner = eta_raw(&self.eps, &self.xx, p)?;
        zeta_raw(&xf, &self.xe, &inner)
    }
}

/// Jacobian of the value-space map `B` induced by a fiber-preserving map
/// `psi` (`Q ∘ psi = B ∘ Q`), by differences through a model lift.
///
/// Elliptic values at zero are differenced forward; everything else centrally.
pub fn transition_jacobian(
    w: WilliamsonType,
    psi: impl Fn(&ModelPoint) -> Result<ModelPoint>,
    at: &[f64],
    theta: &[f64],
    h: f64,
) -> Result<Mat> {
    let n = w.n();
    check_dim(n, at.len())?;
    let b = |v: &[f64]| -> Result<Vec<f64>> { Ok(psi(&model_lift(w, v, theta)?)?.values()) };
    let mut j = Mat::zeros(n, n);
    let mut v = at.to_vec();
    for col in 0..n {
        let one_sided = (2..2 + w.k_e()).contains(&col) && at[col] < h;
        let (fp, fm, span) = if one_sided {
            v[col] = at[col] + h;
            let fp = b(&v)?;
            v[col] = at[col];
            (fp, b(&v)?, h)
        } else {
            v[col] = at[col] + h;
            let fp = b(&v)?;
            v[col] = at[col] - h;
            let fm = b(&v)?;
            v[col] = at[col];
            (fp, fm, 2.0 * h)
        };
        for row in 0..n {
            j[(row, col)] = (fp[row] - fm[row]) / span;
        }
    }
    Ok(j)
}

/// Named integer blocks of a transition Jacobian.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionBlocks {
    /// Lower-right `(n-1) × (n-1)` block, rounded.
    pub a: IntMatrix,
    /// `(dG1/dq1, dG1/dq2, dG1/dq_e..., dG1/dI...)`.
    pub first_row: Vec<f64>,
    pub k_e: usize,
    pub k_x: usize,
}

impl TransitionBlocks {
    fn sub(&self, rows: (usize, usize), cols: (usize, usize)) -> IntMatrix {
        self.a.block(rows.0, cols.0, rows.1, cols.1)
    }
    fn f_rows(&self) -> (usize, usize) {
        (0, 1)
    }
    fn e_rows(&self) -> (usize, usize) {
        (1, self.k_e)
    }
    fn x_rows(&self) -> (usize, usize) {
        (1 + self.k_e, self.k_x)
    }
    fn f_cols(&self) -> (usize, usize) {
        (0, 1)
    }
    fn e_cols(&self) -> (usize, usize) {
        (1, self.k_e)
    }
    fn x_cols(&self) -> (usize, usize) {
        (1 + self.k_e, self.k_x)
    }

    pub fn f_f(&self) -> i64 {
        self.a.get(0, 0)
    }
    pub fn f_e(&self) -> IntMatrix {
        self.sub(self.f_rows(), self.e_cols())
    }
    pub fn f_x(&self) -> IntMatrix {
        self.sub(self.f_rows(), self.x_cols())
    }
    pub fn e_f(&self) -> IntMatrix {
        self.sub(self.e_rows(), self.f_cols())
    }
    pub fn e_e(&self) -> IntMatrix {
        self.sub(self.e_rows(), self.e_cols())
    }
    pub fn e_x(&self) -> IntMatrix {
        self.sub(self.e_rows(), self.x_cols())
    }
    pub fn x_f(&self) -> IntMatrix {
        self.sub(self.x_rows(), self.f_cols())
    }
    pub fn x_e(&self) -> IntMatrix {
        self.sub(self.x_rows(), self.e_cols())
    }
    pub fn x_x(&self) -> IntMatrix {
        self.sub(self.x_rows(), self.x_cols())
    }
}

/// One named structural check, serialized as
/// `{check-name, pass, measured, tolerance}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    #[serde(rename = "check-name")]
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), pass: measured.is_finite() && measured <= tolerance, measured, tolerance }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Check { name: name.into(), pass, measured: if pass { 0.0 } else { 1.0 }, tolerance: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub checks: Vec<Check>,
    pub blocks: Option<TransitionBlocks>,
    /// Normal-form data read off a Jacobian that passed the (★) layout.
    pub star: Option<StarTransition>,
}

impl StructureReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn max_abs_block(j: &Mat, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> f64 {
    let mut m = 0.0_f64;
    for r in rows {
        for c in cols.clone() {
            m = m.max(j[(r, c)].abs());
        }
    }
    m
}

fn spade_checks(j: &Mat, w: &WilliamsonType, tol: f64) -> Result<(Vec<Check>, TransitionBlocks)> {
    if w.k_f() != 1 {
        return Err(Error::Precondition(format!("transition layout needs k_f = 1, got {w}")));
    }
    let n = w.n();
    check_dim(n, j.nrows())?;
    check_dim(n, j.ncols())?;
    let below = max_abs_block(j, 1..n, 0..1);
    let lower = j.view((1, 1), (n - 1, n - 1)).into_owned();
    let (a, frac) = IntMatrix::round_from(&lower);
    let det = a.det()?;
    let checks = vec![
        Check::at_most("first-column-zero", below, tol),
        Check::at_most("integer-entries", frac, tol),
        Check { name: "unimodular".into(), pass: det.abs() == 1, measured: det as f64, tolerance: 0.0 },
    ];
    let blocks = TransitionBlocks {
        a,
        first_row: (0..n).map(|c| j[(0, c)]).collect(),
        k_e: w.k_e(),
        k_x: w.k_x(),
    };
    Ok((checks, blocks))
}

/// Checks the (♠) layout: zero first column below the top entry, integral
/// lower-right block `A` with `det A = ±1`.
pub fn verify_spade(j: &Mat, w: &WilliamsonType, tol: f64) -> Result<StructureReport> {
    let (checks, blocks) = spade_checks(j, w, tol)?;
    Ok(StructureReport { checks, blocks: Some(blocks), star: None })
}

/// Checks the (★) layout on top of (♠). With `critical_set`, the Jacobian is
/// taken at a focus-focus critical value and the first row must reduce to
/// `(±1, 0, ..., 0)`, the first-order trace of the flat remainder.
pub fn verify_star(j: &Mat, w: &WilliamsonType, critical_set: bool, tol: f64) -> Result<StructureReport> {
    let (mut checks, blocks) = spade_checks(j, w, tol)?;
    let (ke, kx) = (w.k_e(), w.k_x());
    let lower = j.view((1, 1), (w.n() - 1, w.n() - 1)).into_owned();
    // measured on the unrounded entries so perturbations below 1/2 still show
    let e_f = max_abs_block(&lower, 1..1 + ke, 0..1);
    let e_x = max_abs_block(&lower, 1..1 + ke, 1 + ke..1 + ke + kx);
    let mut e_e: f64 = 0.0;
    for a in 0..ke {
        for b in 0..ke {
            let v = lower[(1 + a, 1 + b)];
            e_e = e_e.max(if a == b { (v.abs() - 1.0).abs() } else { v.abs() });
        }
    }
    let f_e = max_abs_block(&lower, 0..1, 1..1 + ke);
    let f_x = max_abs_block(&lower, 0..1, 1 + ke..1 + ke + kx);
    let f_f = (lower[(0, 0)].abs() - 1.0).abs();
    checks.push(Check::at_most("E^f-zero", e_f, tol));
    checks.push(Check::at_most("E^x-zero", e_x, tol));
    checks.push(Check::at_most("E^e-diagonal-signs", e_e, tol));
    checks.push(Check::at_most("F^e-zero", f_e, tol));
    checks.push(Check::at_most("F^x-zero", f_x, tol));
    checks.push(Check::at_most("F^f-sign", f_f, tol));
    if critical_set {
        let d_q1 = (j[(0, 0)].abs() - 1.0).abs();
        let d_q2 = j[(0, 1)].abs();
        let d_e = max_abs_block(j, 0..1, 2..2 + ke);
        let d_i = max_abs_block(j, 0..1, 2 + ke..2 + ke + kx);
        checks.push(Check::at_most("dG1/dq1-sign", d_q1, tol));
        checks.push(Check::at_most("dG1/dq2-zero", d_q2, tol));
        checks.push(Check::at_most("dG1/dqe-zero", d_e, tol));
        checks.push(Check::at_most("dG1/dI-zero", d_i, tol));
    }
    let pass = checks.iter().all(|c| c.pass);
    let star = pass.then(|| {
        let sign = |v: f64| if v < 0.0 { -1 } else { 1 };
        StarTransition {
            eps: EpsilonSigns {
                eps_f1: sign(j[(0, 0)]),
                eps_f2: sign(blocks.f_f() as f64),
                eps_e: (0..ke).map(|a| sign(blocks.e_e().get(a, a) as f64)).collect(),
            },
            xf: (0..kx).map(|i| blocks.x_f().get(i, 0)).collect(),
            xe: blocks.x_e(),
            xx: blocks.x_x(),
        }
    });
    Ok(StructureReport { checks, blocks: Some(blocks), star })
}
