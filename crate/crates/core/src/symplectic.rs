//! Linear symplectic machinery on chart-local `R^{2n}`.
//!
//! Coordinates are laid out as `(x_1..x_n, xi_1..xi_n)` and the form is
//! `omega_0 = sum dxi_i ^ dx_i`. Hamiltonian vector fields satisfy
//! `i_X omega_0 = -dH`, i.e. `x' = dH/dxi`, `xi' = -dH/dx`, and the bracket is
//! `{F, G} = omega_0(X_F, X_G)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{max_abs, Mat};

/// Default central-difference step for gradients.
pub const GRADIENT_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    coords: Vec<f64>,
}

impl PhasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() % 2 != 0 {
            return Err(Error::Dimension { expected: coords.len() + 1, got: coords.len() });
        }
        Ok(PhasePoint { coords })
    }

    pub fn zeros(n: usize) -> Self {
        PhasePoint { coords: vec![0.0; 2 * n] }
    }

    /// Builds a point from separate position and momentum blocks.
    pub fn from_blocks(x: &[f64], xi: &[f64]) -> Result<Self> {
        check_dim(x.len(), xi.len())?;
        let mut coords = x.to_vec();
        coords.extend_from_slice(xi);
        Ok(PhasePoint { coords })
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.coords[self.n() + i]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }
}

impl From<PhasePoint> for Vec<f64> {
    fn from(p: PhasePoint) -> Self {
        p.coords
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: Mat,
}

impl SymplecticForm {
    /// `omega_0` on `R^{2n}`: `Omega[xi_i, x_i] = 1`, `Omega[x_i, xi_i] = -1`.
    pub fn standard(n: usize) -> Self {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            m[(n + i, i)] = 1.0;
            m[(i, n + i)] = -1.0;
        }
        SymplecticForm { n, matrix: m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
}

/// `p^T S p`, with `S` symmetrized on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticHamiltonian {
    s: Mat,
}

impl QuadraticHamiltonian {
    pub fn new(s: Mat) -> Result<Self> {
        if s.nrows() != s.ncols() {
            return Err(Error::Dimension { expected: s.nrows(), got: s.ncols() });
        }
        if s.nrows() % 2 != 0 {
            return Err(Error::Dimension { expected: s.nrows() + 1, got: s.nrows() });
        }
        let sym = (&s + s.transpose()) * 0.5;
        Ok(QuadraticHamiltonian { s: sym })
    }

    /// Quadratic form whose Hessian is `hess` (so `S = hess / 2`).
    pub fn from_hessian(hess: &Mat) -> Result<Self> {
        Self::new(hess * 0.5)
    }

    pub fn matrix(&self) -> &Mat {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(p);
        (v.transpose() * &self.s * &v)[(0, 0)]
    }

    /// Linearized Hamiltonian vector field `p -> A p`, `A = -2 Omega S`.
    pub fn hamiltonian_matrix(&self) -> Mat {
        let n = self.dim() / 2;
        let omega = SymplecticForm::standard(n);
        -(omega.matrix() * &self.s) * 2.0
    }

    pub fn to_smooth(&self) -> SmoothHamiltonian {
        let s = self.s.clone();
        let s2 = self.s.clone();
        let s3 = self.s.clone();
        let dim = self.dim();
        SmoothHamiltonian::new(dim, move |p| {
            let v = nalgebra::DVector::from_column_slice(p);
            (v.transpose() * &s * &v)[(0, 0)]
        })
        .with_gradient(move |p| {
            let v = nalgebra::DVector::from_column_slice(p);
            (&s2 * v * 2.0).iter().copied().collect()
        })
        .with_hessian(move |_| (&s3 * 2.0).iter().copied().collect())
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A smooth function on `R^{2n}` with optional analytic derivative oracles.
///
/// Missing oracles fall back to central differences: gradient step `h`
/// (default [`GRADIENT_STEP`]), Hessian step `1e-3 * (1 + |p|)`.
#[derive(Clone)]
pub struct SmoothHamiltonian {
    dim: usize,
    f: ScalarFn,
    grad: Option<VectorFn>,
    hess: Option<VectorFn>,
    step: f64,
}

impl fmt::Debug for SmoothHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothHamiltonian")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.grad.is_some())
            .field("analytic_hessian", &self.hess.is_some())
            .finish()
    }
}

impl SmoothHamiltonian {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        SmoothHamiltonian { dim, f: Arc::new(f), grad: None, hess: None, step: GRADIENT_STEP }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    /// Row-major `dim × dim` Hessian oracle.
    pub fn with_hessian(mut self, h: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.hess = Some(Arc::new(h));
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = h;
        self
    }

    /// Constant function.
    pub fn constant(dim: usize, c: f64) -> Self {
        SmoothHamiltonian::new(dim, move |_| c)
            .with_gradient(move |_| vec![0.0; dim])
            .with_hessian(move |_| vec![0.0; dim * dim])
    }

    /// The coordinate function `xi_i` on `R^{2n}`.
    pub fn momentum(n: usize, i: usize) -> Self {
        let dim = 2 * n;
        SmoothHamiltonian::new(dim, move |p| p[n + i])
            .with_gradient(move |_| {
                let mut g = vec![0.0; dim];
                g[n + i] = 1.0;
                g
            })
            .with_hessian(move |_| vec![0.0; dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        (self.f)(p)
    }

    pub fn gradient(&self, p: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(p);
        }
        let h = self.step;
        let mut q = p.to_vec();
        (0..p.len())
            .map(|i| {
                q[i] = p[i] + h;
                let fp = (self.f)(&q);
                q[i] = p[i] - h;
                let fm = (self.f)(&q);
                q[i] = p[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    pub fn hessian(&self, p: &[f64]) -> Mat {
        let d = p.len();
        if let Some(h) = &self.hess {
            return DMatrix::from_row_slice(d, d, &h(p));
        }
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let h = 1e-3 * (1.0 + norm);
        let mut q = p.to_vec();
        let mut out = DMatrix::zeros(d, d);
        let f0 = (self.f)(p);
        for i in 0..d {
            for j in i..d {
                let val = if i == j {
                    q[i] = p[i] + h;
                    let fp = (self.f)(&q);
                    q[i] = p[i] - h;
                    let fm = (self.f)(&q);
                    q[i] = p[i];
                    (fp - 2.0 * f0 + fm) / (h * h)
                } else {
                    let mut eval = |si: f64, sj: f64| {
                        q[i] = p[i] + si * h;
                        q[j] = p[j] + sj * h;
                        let v = (self.f)(&q);
                        q[i] = p[i];
                        q[j] = p[j];
                        v
                    };
                    (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                        / (4.0 * h * h)
                };
                out[(i, j)] = val;
                out[(j, i)] = val;
            }
        }
        out
    }
}

/// Sign convention used to turn `dH` into a vector field.
///
/// `Standard` is the library convention. `FlippedMomentum` drops the minus sign
/// in `xi' = -dH/dx`; it exists only as a negative control for the flow checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    #[default]
    Standard,
    FlippedMomentum,
}

pub fn omega_pair(form: &SymplecticForm, u: &[f64], v: &[f64]) -> Result<f64> {
    let d = 2 * form.n();
    check_dim(d, u.len())?;
    check_dim(d, v.len())?;
    let m = form.matrix();
    let mut acc = 0.0;
    for i in 0..d {
        if u[i] == 0.0 {
            continue;
        }
        for j in 0..d {
            acc += u[i] * m[(i, j)] * v[j];
        }
    }
    Ok(acc)
}

fn field_from_gradient(g: &[f64], convention: Convention) -> Vec<f64> {
    let n = g.len() / 2;
    let sign = match convention {
        Convention::Standard => -1.0,
        Convention::FlippedMomentum => 1.0,
    };
    let mut out = Vec::with_capacity(2 * n);
    out.extend_from_slice(&g[n..]);
    out.extend(g[..n].iter().map(|d| sign * d));
    out
}

pub fn hamiltonian_vector_field(h: &SmoothHamiltonian, p: &PhasePoint) -> Result<Vec<f64>> {
    hamiltonian_vector_field_with(h, p.coords(), Convention::Standard)
}

pub fn hamiltonian_vector_field_with(
    h: &SmoothHamiltonian,
    p: &[f64],
    convention: Convention,
) -> Result<Vec<f64>> {
    check_dim(h.dim(), p.len())?;
    let g = h.gradient(p);
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite gradient".into()));
    }
    Ok(field_from_gradient(&g, convention))
}

/// `{F, G}(p) = sum_i (dF/dxi_i dG/dx_i - dF/dx_i dG/dxi_i)`.
pub fn poisson_bracket(f: &SmoothHamiltonian, g: &SmoothHamiltonian, p: &PhasePoint) -> Result<f64> {
    check_dim(f.dim(), p.coords().len())?;
    check_dim(g.dim(), p.coords().len())?;
    let df = f.gradient(p.coords());
    let dg = g.gradient(p.coords());
    if df.iter().chain(dg.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite gradient".into()));
    }
    Ok(bracket_of_gradients(&df, &dg))
}

pub fn bracket_of_gradients(df: &[f64], dg: &[f64]) -> f64 {
    let n = df.len() / 2;
    (0..n).map(|i| df[n + i] * dg[i] - df[i] * dg[n + i]).sum()
}

pub fn flow(h: &SmoothHamiltonian, p: &PhasePoint, t: f64, tol: f64) -> Result<PhasePoint> {
    let out = integrate(h, p.coords(), t, tol, Convention::Standard, None)?;
    Ok(PhasePoint { coords: out })
}

/// Domain predicate for [`integrate`]: the trajectory must stay where it holds.
pub type Domain<'a> = &'a (dyn Fn(&[f64]) -> bool + Sync);

/// Adaptive Dormand–Prince 5(4) integration of the Hamiltonian vector field.
///
/// Relative tolerance `tol`, absolute tolerance `tol * 1e-2`.
pub fn integrate(
    h: &SmoothHamiltonian,
    p: &[f64],
    t: f64,
    tol: f64,
    convention: Convention,
    domain: Option<Domain<'_>>,
) -> Result<Vec<f64>> {
    check_dim(h.dim(), p.len())?;
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::Precondition(format!("flow tolerance must be positive, got {tol}")));
    }
    if t == 0.0 {
        return Ok(p.to_vec());
    }
    let rhs = |y: &[f64]| hamiltonian_vector_field_with(h, y, convention);
    dopri5(rhs, p, t, tol, tol * 1e-2, domain)
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri5(
    rhs: impl Fn(&[f64]) -> Result<Vec<f64>>,
    y0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
    domain: Option<Domain<'_>>,
) -> Result<Vec<f64>> {
    let d = y0.len();
    let dir = t_end.signum();
    let span = t_end.abs();
    let mut y = y0.to_vec();
    let mut t = 0.0_f64;
    let mut h = (span * 1e-2).min(0.1).max(1e-6);
    let mut k = vec![vec![0.0; d]; 7];
    let mut tmp = vec![0.0; d];
    let mut accepted = 0usize;
    k[0] = rhs(&y)?;
    while t < span {
        if accepted > 5_000_000 {
            return Err(Error::Integration("too many steps".into()));
        }
        let last = t + h >= span;
        if last {
            h = span - t;
        }
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::Integration(format!("step size underflow at t = {}", dir * t)));
        }
        for s in 1..7 {
            for i in 0..d {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += dir * h * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            k[s] = rhs(&tmp)?;
        }
        // stage 7 is evaluated at the 5th-order solution (FSAL)
        let mut err = 0.0;
        let mut y_new = vec![0.0; d];
        for i in 0..d {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B5[s] * k[s][i];
                lo += B4[s] * k[s][i];
            }
            y_new[i] = y[i] + dir * h * hi;
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            let e = dir * h * (hi - lo) / sc;
            err += e * e;
        }
        let err = (err / d as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            if let Some(inside) = domain {
                if !inside(&y_new) {
                    return Err(Error::Integration(format!(
                        "trajectory left the chart at t = {}",
                        dir * (t + h)
                    )));
                }
            }
            t = if last { span } else { t + h };
            y = y_new;
            k[0] = k[6].clone();
            accepted += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(y)
}

/// `max |M^T Omega M - Omega|`.
pub fn symplectic_residual(m: &Mat, form: &SymplecticForm) -> Result<f64> {
    let d = 2 * form.n();
    check_dim(d, m.nrows())?;
    check_dim(d, m.ncols())?;
    let om = form.matrix();
    Ok(max_abs(&(m.transpose() * om * m - om)))
}

/// Central-difference Jacobian of a map `R^d -> R^d`.
pub fn numerical_jacobian(map: impl Fn(&[f64]) -> Result<Vec<f64>>, p: &[f64], h: f64) -> Result<Mat> {
    let d = p.len();
    let mut out = DMatrix::zeros(d, d);
    let mut q = p.to_vec();
    for j in 0..d {
        q[j] = p[j] + h;
        let fp = map(&q)?;
        q[j] = p[j] - h;
        let fm = map(&q)?;
        q[j] = p[j];
        check_dim(d, fp.len())?;
        for i in 0..d {
            out[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(out)
}

/// Random linear symplectomorphism `exp(Omega S)` with `S` symmetric Gaussian
/// of entry scale `scale`, resampled until its condition number is at most
/// `max_cond`.
pub fn random_symplectic<R: rand::Rng>(n: usize, scale: f64, max_cond: f64, rng: &mut R) -> Result<Mat> {
    use rand_distr::{Distribution, StandardNormal};
    let omega = SymplecticForm::standard(n);
    for _ in 0..200 {
        let g = DMatrix::from_fn(2 * n, 2 * n, |_, _| {
            let z: f64 = StandardNormal.sample(rng);
            z * scale
        });
        let s = (&g + g.transpose()) * 0.5;
        let m = crate::linalg::expm(&(omega.matrix() * s));
        if crate::linalg::condition_number(&m)? <= max_cond {
            return Ok(m);
        }
    }
    Err(Error::Numerical(format!("no symplectic sample with condition <= {max_cond}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(d: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    }

    fn q2() -> SmoothHamiltonian {
        // x1 xi2 - x2 xi1 on R^4
        SmoothHamiltonian::new(4, |p| p[0] * p[3] - p[1] * p[2])
    }

    #[test]
    fn omega_pair_examples() {
        let w1 = SymplecticForm::standard(1);
        assert_eq!(omega_pair(&w1, &unit(2, 1), &unit(2, 0)).unwrap(), 1.0);
        let u = [0.3, -1.2];
        assert_eq!(omega_pair(&w1, &u, &u).unwrap(), 0.0);
        let w2 = SymplecticForm::standard(2);
        assert_eq!(omega_pair(&w2, &unit(4, 0), &unit(4, 3)).unwrap(), 0.0);
        assert!(matches!(omega_pair(&w2, &[1.0], &unit(4, 0)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn standard_form_squares_to_minus_identity() {
        let w = SymplecticForm::standard(3);
        let m = w.matrix();
        assert_eq!(m.transpose(), -m);
        assert_eq!(m * m, -Mat::identity(6, 6));
    }

    #[test]
    fn vector_field_examples() {
        let xi1 = SmoothHamiltonian::momentum(1, 0);
        let p = PhasePoint::new(vec![0.4, -2.0]).unwrap();
        let chi = hamiltonian_vector_field(&xi1, &p).unwrap();
        assert_eq!(chi, vec![1.0, 0.0]);

        let c = SmoothHamiltonian::constant(2, 3.0);
        assert_eq!(hamiltonian_vector_field(&c, &p).unwrap(), vec![0.0, 0.0]);

        // z1 = (1, 0), z2 = 0: x' = (0, 1)
        let p = PhasePoint::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let chi = hamiltonian_vector_field(&q2(), &p).unwrap();
        assert!(chi[0].abs() < 1e-10 && (chi[1] - 1.0).abs() < 1e-10);
        assert!(chi[2].abs() < 1e-10 && chi[3].abs() < 1e-10);
    }

    #[test]
    fn non_finite_gradient_is_numerical_error() {
        let bad = SmoothHamiltonian::new(2, |p| p[0].ln());
        let p = PhasePoint::new(vec![-1.0, 0.0]).unwrap();
        assert!(matches!(hamiltonian_vector_field(&bad, &p), Err(Error::Numerical(_))));
    }

    #[test]
    fn bracket_examples() {
        let xi1 = SmoothHamiltonian::momentum(1, 0);
        let x1 = SmoothHamiltonian::new(2, |p| p[0]);
        let p = PhasePoint::new(vec![0.7, 0.1]).unwrap();
        assert!((poisson_bracket(&xi1, &x1, &p).unwrap() - 1.0).abs() < 1e-9);
        assert!(poisson_bracket(&xi1, &xi1, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn flow_examples() {
        let h = q2();
        let p = PhasePoint::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(flow(&h, &p, 0.0, 1e-10).unwrap(), p);
        let q = flow(&h, &p, PI / 2.0, 1e-11).unwrap();
        assert!(q.x(0).abs() < 1e-9 && (q.x(1) - 1.0).abs() < 1e-9);
        let r = flow(&h, &p, 2.0 * PI, 1e-11).unwrap();
        for (a, b) in r.coords().iter().zip(p.coords()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(matches!(flow(&h, &p, 1.0, 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn flow_reports_leaving_the_domain() {
        let h = SmoothHamiltonian::momentum(1, 0);
        let p = PhasePoint::new(vec![0.0, 0.0]).unwrap();
        let inside = |y: &[f64]| y[0] < 1.0;
        let r = integrate(&h, p.coords(), 2.0, 1e-8, Convention::Standard, Some(&inside));
        assert!(matches!(r, Err(Error::Integration(_))));
    }

    #[test]
    fn random_symplectic_matrices_are_symplectic_and_bounded() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for n in 1..=3 {
            let m = random_symplectic(n, 0.6, 1e3, &mut rng).unwrap();
            let w = SymplecticForm::standard(n);
            assert!(symplectic_residual(&m, &w).unwrap() < 1e-10);
            assert!(crate::linalg::condition_number(&m).unwrap() <= 1e3);
        }
    }

    #[test]
    fn residual_examples() {
        let w = SymplecticForm::standard(1);
        assert_eq!(symplectic_residual(&Mat::identity(2, 2), &w).unwrap(), 0.0);
        let twice = Mat::identity(2, 2) * 2.0;
        assert!((symplectic_residual(&twice, &w).unwrap() - 3.0).abs() < 1e-15);
        assert!(symplectic_residual(&Mat::identity(3, 3), &w).is_err());
    }

    #[test]
    fn quadratic_hamiltonian_has_unit_diagonal_for_harmonic_oscillator() {
        let e = QuadraticHamiltonian::new(Mat::identity(2, 2)).unwrap();
        assert_eq!(e.value(&[1.0, 0.0]), 1.0);
        let hs = e.to_smooth();
        assert_eq!(hs.gradient(&[1.0, 2.0]), vec![2.0, 4.0]);
    }

    #[test]
    fn finite_difference_hessian_is_accurate_on_polynomials() {
        let f = SmoothHamiltonian::new(2, |p| p[0] * p[0] * p[1] + p[1].powi(3));
        let h = f.hessian(&[0.5, -0.3]);
        assert!((h[(0, 0)] - 2.0 * -0.3).abs() < 1e-6);
        assert!((h[(0, 1)] - 1.0).abs() < 1e-6);
        assert!((h[(1, 1)] - 6.0 * -0.3).abs() < 1e-6);
    }
}
