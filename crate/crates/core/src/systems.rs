//! Catalog of integrable systems used as test beds.
//!
//! Every system is a product of factors, each with its own chart atlas, plus an
//! optional recombination `f_target += lambda * f_source^2`. Functions are
//! written once over [`Scalar`] so derivatives come from [`Jet`] evaluation.
//!
//! Spheres use Lambert azimuthal equal-area charts. They are Darboux charts for
//! the area form (total area `4 pi`), so the symplectic form is the constant
//! standard one in every chart. In a sphere chart with Lambert coordinates
//! `(a, b)` the phase coordinates are `x = b`, `xi = a`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{unpack, Jet, Scalar, MAX_DIM};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{from_row_major, singular_values, Mat};
use crate::localmodel::build_model;
use crate::localmodel::Component;
use crate::symplectic::{bracket_of_gradients, integrate, Convention, SmoothHamiltonian};
use crate::williamson::WilliamsonType;

/// Charts are searched only where every sphere factor has Lambert radius at
/// most this value (the chart itself extends to radius 2).
pub const SEARCH_RADIUS: f64 = 1.8;

#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// `x^2 + xi^2` on `R^2`.
    Oscillator,
    /// Height function on the unit sphere.
    Sphere,
    /// `(H, J) = ((X u + Y v) / 2, Z + (u^2 + v^2) / 2)` on `S^2 × R^2`.
    SpinOscillator,
    /// The linear model `Q_w` on `R^{2n}`.
    Model(WilliamsonType),
}

fn sphere_point<T: Scalar>(chart: usize, a: T, b: T) -> [T; 3] {
    let r2 = a * a + b * b;
    let s = (T::cst(1.0) - r2 / T::cst(4.0)).sqrt();
    if chart == 0 {
        [a * s, b * s, T::cst(1.0) - r2 / T::cst(2.0)]
    } else {
        [a * s, -(b * s), r2 / T::cst(2.0) - T::cst(1.0)]
    }
}

/// Lambert coordinates `(a, b)` of one chart to the other; the same formula in
/// both directions.
fn sphere_switch<T: Scalar>(a: T, b: T) -> Option<(T, T)> {
    let r2 = a * a + b * b;
    if r2.value() == 0.0 || r2.value() >= 4.0 {
        return None;
    }
    let k = (T::cst(4.0) - r2).sqrt() / r2.sqrt();
    Some((a * k, -(b * k)))
}

impl Factor {
    pub fn dofs(&self) -> usize {
        match self {
            Factor::Oscillator | Factor::Sphere => 1,
            Factor::SpinOscillator => 2,
            Factor::Model(w) => w.n(),
        }
    }

    pub fn chart_names(&self) -> &'static [&'static str] {
        match self {
            Factor::Sphere | Factor::SpinOscillator => &["N", "S"],
            _ => &["R"],
        }
    }

    fn eval<T: Scalar>(&self, chart: usize, x: &[T], xi: &[T]) -> Vec<T> {
        match self {
            Factor::Oscillator => vec![x[0] * x[0] + xi[0] * xi[0]],
            Factor::Sphere => vec![sphere_point(chart, xi[0], x[0])[2]],
            Factor::SpinOscillator => {
                let [sx, sy, sz] = sphere_point(chart, xi[0], x[0]);
                let (u, v) = (x[1], xi[1]);
                let h = (sx * u + sy * v) / T::cst(2.0);
                let j = sz + (u * u + v * v) / T::cst(2.0);
                vec![h, j]
            }
            Factor::Model(w) => {
                let model = build_model(*w);
                let dof = |c: Component| -> usize {
                    match c {
                        Component::Elliptic(j) => j,
                        Component::Hyperbolic(j) => w.k_e() + j,
                        Component::FocusRadial(j) | Component::FocusAngular(j) => {
                            w.k_e() + w.k_h() + 2 * j
                        }
                        Component::Transverse(j) => w.n() - w.k_x() + j,
                    }
                };
                model
                    .components()
                    .iter()
                    .map(|&c| {
                        let d = dof(c);
                        match c {
                            Component::Elliptic(_) => x[d] * x[d] + xi[d] * xi[d],
                            Component::Hyperbolic(_) => x[d] * xi[d],
                            Component::FocusRadial(_) => x[d] * xi[d] + x[d + 1] * xi[d + 1],
                            Component::FocusAngular(_) => x[d] * xi[d + 1] - x[d + 1] * xi[d],
                            Component::Transverse(_) => xi[d],
                        }
                    })
                    .collect()
            }
        }
    }

    /// Distance to the chart boundary in chart coordinates (infinite for
    /// global charts).
    fn margin(&self, x: &[f64], xi: &[f64]) -> f64 {
        match self {
            Factor::Sphere | Factor::SpinOscillator => 2.0 - (x[0] * x[0] + xi[0] * xi[0]).sqrt(),
            _ => f64::INFINITY,
        }
    }

    fn embed(&self, chart: usize, x: &[f64], xi: &[f64], out: &mut Vec<f64>) {
        match self {
            Factor::Oscillator => out.extend_from_slice(&[x[0], xi[0]]),
            Factor::Sphere => out.extend_from_slice(&sphere_point(chart, xi[0], x[0])),
            Factor::SpinOscillator => {
                out.extend_from_slice(&sphere_point(chart, xi[0], x[0]));
                out.extend_from_slice(&[x[1], xi[1]]);
            }
            Factor::Model(w) => {
                let first_angle = w.n() - w.k_x();
                for d in 0..w.n() {
                    if d >= first_angle {
                        out.extend_from_slice(&[x[d].cos(), x[d].sin(), xi[d]]);
                    } else {
                        out.extend_from_slice(&[x[d], xi[d]]);
                    }
                }
            }
        }
    }

    /// Coordinates in chart `to` of a point given in chart `from`.
    fn switch<T: Scalar>(&self, from: usize, to: usize, x: &mut [T], xi: &mut [T]) -> bool {
        if from == to {
            return true;
        }
        match self {
            Factor::Sphere | Factor::SpinOscillator => match sphere_switch(xi[0], x[0]) {
                Some((a, b)) => {
                    xi[0] = a;
                    x[0] = b;
                    true
                }
                None => false,
            },
            _ => true,
        }
    }

    /// Which components generate circle actions of period dividing `2 pi`.
    fn periodic(&self) -> Vec<bool> {
        match self {
            Factor::Oscillator | Factor::Sphere => vec![true],
            Factor::SpinOscillator => vec![false, true],
            Factor::Model(w) => {
                let m = build_model(*w);
                m.components().iter().map(|&c| m.period(c).is_some()).collect()
            }
        }
    }
}

/// `f_target += lambda * f_source^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recombination {
    pub target: usize,
    pub source: usize,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq)]
struct Chart {
    id: String,
    per_factor: Vec<usize>,
}

/// Axis-aligned search box in the phase coordinates of some charts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRegion {
    pub charts: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub step: Vec<f64>,
}

/// Values, Jacobian (`n × 2n`) and Hessians at one point.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub values: Vec<f64>,
    pub jacobian: Mat,
    pub hessians: Vec<Mat>,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Toric,
    Spin,
    FfX(f64),
    Model(WilliamsonType),
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentMapSystem {
    name: String,
    factors: Vec<Factor>,
    recombination: Option<Recombination>,
    charts: Vec<Chart>,
    kind: Kind,
}

impl MomentMapSystem {
    pub fn from_factors(
        name: impl Into<String>,
        factors: Vec<Factor>,
        recombination: Option<Recombination>,
    ) -> Result<Self> {
        let n: usize = factors.iter().map(Factor::dofs).sum();
        if n == 0 {
            return Err(Error::Precondition("a system needs at least one degree of freedom".into()));
        }
        if 2 * n > MAX_DIM {
            return Err(Error::Precondition(format!(
                "phase dimension {} exceeds the supported {MAX_DIM}",
                2 * n
            )));
        }
        if let Some(r) = recombination {
            if r.target >= n || r.source >= n || r.target == r.source {
                return Err(Error::Precondition(format!("bad recombination {r:?} for n = {n}")));
            }
        }
        let mut charts = vec![Chart { id: String::new(), per_factor: Vec::new() }];
        for f in &factors {
            let names = f.chart_names();
            let mut next = Vec::new();
            for c in &charts {
                for (k, name) in names.iter().enumerate() {
                    let mut id = c.id.clone();
                    if names.len() > 1 {
                        id.push_str(name);
                    }
                    let mut per_factor = c.per_factor.clone();
                    per_factor.push(k);
                    next.push(Chart { id, per_factor });
                }
            }
            charts = next;
        }
        for c in &mut charts {
            if c.id.is_empty() {
                c.id = "R".into();
            }
        }
        Ok(MomentMapSystem { name: name.into(), factors, recombination, charts, kind: Kind::Custom })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.factors.iter().map(Factor::dofs).sum()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn chart_ids(&self) -> Vec<String> {
        self.charts.iter().map(|c| c.id.clone()).collect()
    }

    fn chart(&self, id: &str) -> Result<&Chart> {
        self.charts
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::Chart(format!("{} has no chart {id:?}", self.name)))
    }

    fn split<'a, T>(&self, p: &'a [T]) -> Vec<(&'a [T], &'a [T])> {
        let n = self.n();
        let mut off = 0;
        self.factors
            .iter()
            .map(|f| {
                let d = f.dofs();
                let s = (&p[off..off + d], &p[n + off..n + off + d]);
                off += d;
                s
            })
            .collect()
    }

    fn eval_generic<T: Scalar>(&self, chart: &Chart, p: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n());
        for (k, (f, (x, xi))) in self.factors.iter().zip(self.split(p)).enumerate() {
            out.extend(f.eval(chart.per_factor[k], x, xi));
        }
        if let Some(r) = self.recombination {
            let s = out[r.source];
            out[r.target] = out[r.target] + T::cst(r.lambda) * s * s;
        }
        out
    }

    /// Distance to the nearest chart boundary, in chart coordinates.
    pub fn chart_margin(&self, chart: &str, p: &[f64]) -> Result<f64> {
        self.chart(chart)?;
        check_dim(2 * self.n(), p.len())?;
        Ok(self.split(p).iter().zip(&self.factors).map(|((x, xi), f)| f.margin(x, xi)).fold(f64::INFINITY, f64::min))
    }

    pub fn in_domain(&self, chart: &str, p: &[f64]) -> bool {
        self.chart_margin(chart, p).is_ok_and(|m| m > 0.0)
    }

    /// Inside the part of the chart used for searches.
    pub fn in_search_domain(&self, chart: &str, p: &[f64]) -> bool {
        self.chart_margin(chart, p).is_ok_and(|m| m >= 2.0 - SEARCH_RADIUS)
    }

    fn checked(&self, chart: &str, p: &[f64]) -> Result<&Chart> {
        let c = self.chart(chart)?;
        check_dim(2 * self.n(), p.len())?;
        if !self.in_domain(chart, p) {
            return Err(Error::Chart(format!("point outside chart {chart} of {}", self.name)));
        }
        Ok(c)
    }

    pub fn eval(&self, chart: &str, p: &[f64]) -> Result<Vec<f64>> {
        let c = self.checked(chart, p)?;
        Ok(self.eval_generic(c, p))
    }

    pub fn derivatives(&self, chart: &str, p: &[f64]) -> Result<Derivatives> {
        let c = self.checked(chart, p)?;
        let d = p.len();
        let jets = self.eval_generic(c, &Jet::seed(p));
        let (values, jac, hess) = unpack(&jets, d);
        if values.iter().chain(jac.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite derivatives in chart {chart}")));
        }
        Ok(Derivatives {
            values,
            jacobian: from_row_major(self.n(), d, &jac),
            hessians: hess.iter().map(|h| from_row_major(d, d, h)).collect(),
        })
    }

    pub fn jacobian(&self, chart: &str, p: &[f64]) -> Result<Mat> {
        Ok(self.derivatives(chart, p)?.jacobian)
    }

    pub fn hessians(&self, chart: &str, p: &[f64]) -> Result<Vec<Mat>> {
        Ok(self.derivatives(chart, p)?.hessians)
    }

    /// Component `i` in one chart, with exact derivative oracles.
    pub fn component(&self, chart: &str, i: usize) -> Result<SmoothHamiltonian> {
        let c = self.chart(chart)?.clone();
        if i >= self.n() {
            return Err(Error::Precondition(format!("component {i} of an n = {} system", self.n())));
        }
        let d = 2 * self.n();
        let (s1, s2, s3) = (self.clone(), self.clone(), self.clone());
        let (c1, c2, c3) = (c.clone(), c.clone(), c);
        Ok(SmoothHamiltonian::new(d, move |p| s1.eval_generic(&c1, p)[i])
            .with_gradient(move |p| s2.eval_generic(&c2, &Jet::seed(p))[i].gradient())
            .with_hessian(move |p| s3.eval_generic(&c3, &Jet::seed(p))[i].hessian()))
    }

    /// Coordinates in chart `to` of the point `p` of chart `from`.
    pub fn transition(&self, from: &str, to: &str, p: &[f64]) -> Result<Vec<f64>> {
        let q = self.transition_generic(from, to, p.to_vec())?;
        if !self.in_domain(to, &q) {
            return Err(Error::Chart(format!("point of chart {from} is not in chart {to}")));
        }
        Ok(q)
    }

    /// Exact Jacobian of [`MomentMapSystem::transition`] at `p`.
    pub fn transition_jacobian(&self, from: &str, to: &str, p: &[f64]) -> Result<Mat> {
        self.transition(from, to, p)?;
        let q = self.transition_generic(from, to, Jet::seed(p))?;
        let (_, jac, _) = unpack(&q, p.len());
        Ok(from_row_major(p.len(), p.len(), &jac))
    }

    fn transition_generic<T: Scalar>(&self, from: &str, to: &str, mut q: Vec<T>) -> Result<Vec<T>> {
        let p: Vec<f64> = q.iter().map(|v| v.value()).collect();
        let a = self.checked(from, &p)?;
        let b = self.chart(to)?;
        let n = self.n();
        let mut off = 0;
        for (k, f) in self.factors.iter().enumerate() {
            let d = f.dofs();
            let (xs, xis) = q.split_at_mut(n);
            if !f.switch(a.per_factor[k], b.per_factor[k], &mut xs[off..off + d], &mut xis[off..off + d]) {
                return Err(Error::Chart(format!("point of chart {from} is not in chart {to}")));
            }
            off += d;
        }
        Ok(q)
    }

    /// Chart-independent coordinates of a point (spheres embedded in `R^3`,
    /// model angles as `(cos, sin)`), used for comparing points across charts.
    pub fn embed(&self, chart: &str, p: &[f64]) -> Result<Vec<f64>> {
        let c = self.checked(chart, p)?;
        let mut out = Vec::new();
        for (k, (f, (x, xi))) in self.factors.iter().zip(self.split(p)).enumerate() {
            f.embed(c.per_factor[k], x, xi, &mut out);
        }
        Ok(out)
    }

    /// The chart in which `p` (given in chart `chart`) is farthest from the
    /// boundary, with its coordinates there.
    pub fn best_chart(&self, chart: &str, p: &[f64]) -> Result<(String, Vec<f64>)> {
        let mut best = (chart.to_string(), p.to_vec(), self.chart_margin(chart, p)?);
        for c in &self.charts {
            if let Ok(q) = self.transition(chart, &c.id, p) {
                let m = self.chart_margin(&c.id, &q)?;
                if m > best.2 + 1e-12 {
                    best = (c.id.clone(), q, m);
                }
            }
        }
        Ok((best.0, best.1))
    }

    /// Components expected to generate `2 pi`-periodic flows.
    pub fn periodic_components(&self) -> Vec<usize> {
        let mut flags: Vec<bool> = self.factors.iter().flat_map(Factor::periodic).collect();
        if let Some(r) = self.recombination {
            flags[r.target] = false;
        }
        flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect()
    }

    /// Focus-focus-transverse value at transverse parameter `t`, when known in
    /// closed form.
    pub fn known_nodal_value(&self, t: f64) -> Option<Vec<f64>> {
        match self.kind {
            Kind::FfX(lambda) => Some(vec![lambda * t * t, 1.0, t]),
            Kind::Spin => Some(vec![0.0, 1.0]),
            _ => None,
        }
    }

    pub fn default_region(&self) -> ScanRegion {
        let n = self.n();
        let uniform = |charts: Vec<String>, lo: f64, hi: f64, step: f64| ScanRegion {
            charts,
            min: vec![lo; 2 * n],
            max: vec![hi; 2 * n],
            step: vec![step; 2 * n],
        };
        match self.kind {
            Kind::Toric => uniform(self.chart_ids(), -2.0, 2.0, 0.2),
            // axes (b, u, a, v)
            Kind::Spin => ScanRegion {
                charts: vec!["N".into(), "S".into()],
                min: vec![-1.5, -3.0, -1.5, -3.0],
                max: vec![1.5, 3.0, 1.5, 3.0],
                step: vec![0.2; 4],
            },
            // axes (b1, u, b3, a1, v, a3)
            Kind::FfX(_) => ScanRegion {
                charts: vec!["NN".into(), "NS".into()],
                min: vec![-0.2, -0.2, -1.5, -0.2, -0.2, -1.5],
                max: vec![0.2, 0.2, 1.5, 0.2, 0.2, 1.5],
                step: vec![0.2, 0.2, 0.1, 0.2, 0.2, 0.1],
            },
            _ => {
                let step = match n {
                    0..=2 => 0.2,
                    3 => 0.25,
                    _ => 0.5,
                };
                uniform(self.chart_ids(), -1.0, 1.0, step)
            }
        }
    }

    pub fn is_model(&self) -> Option<WilliamsonType> {
        match self.kind {
            Kind::Model(w) => Some(w),
            _ => None,
        }
    }

    fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = kind;
        self
    }
}

/// `F = (x_1^2 + xi_1^2, ..., x_m^2 + xi_m^2)` on `R^{2m}`.
pub fn toric_oscillator(m: usize) -> Result<MomentMapSystem> {
    if m == 0 {
        return Err(Error::Precondition("toric oscillator needs m >= 1".into()));
    }
    Ok(MomentMapSystem::from_factors(format!("toric-oscillator:{m}"), vec![Factor::Oscillator; m], None)?
        .with_kind(Kind::Toric))
}

/// `F = (H, J)` on `S^2 × R^2` with one focus-focus point at
/// (north pole, origin).
pub fn spin_oscillator() -> MomentMapSystem {
    MomentMapSystem::from_factors("spin-oscillator", vec![Factor::SpinOscillator], None)
        .expect("valid factors")
        .with_kind(Kind::Spin)
}

/// `F = (H + lambda z_3^2, J, z_3)` on `S^2 × R^2 × S^2`.
pub fn ff_x_family(lambda: f64) -> MomentMapSystem {
    MomentMapSystem::from_factors(
        format!("ff-x-family:{lambda}"),
        vec![Factor::SpinOscillator, Factor::Sphere],
        Some(Recombination { target: 0, source: 2, lambda }),
    )
    .expect("valid factors")
    .with_kind(Kind::FfX(lambda))
}

/// The linear model `Q_w` as a system on `R^{2n}`.
pub fn model_system(w: WilliamsonType) -> Result<MomentMapSystem> {
    Ok(MomentMapSystem::from_factors(format!("model:{},{},{},{}", w.k_e(), w.k_f(), w.k_h(), w.k_x()), vec![Factor::Model(w)], None)?
        .with_kind(Kind::Model(w)))
}

/// Looks up `toric-oscillator:m`, `spin-oscillator`, `ff-x-family:lambda` or
/// `model:a,b,c,d`.
pub fn system_by_name(name: &str) -> Result<MomentMapSystem> {
    let unknown = || Error::UnknownSystem(name.to_string());
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    match (head, arg) {
        ("spin-oscillator", None) => Ok(spin_oscillator()),
        ("toric-oscillator", Some(a)) => toric_oscillator(a.trim().parse().map_err(|_| unknown())?),
        ("ff-x-family", Some(a)) => {
            let lambda: f64 = a.trim().parse().map_err(|_| unknown())?;
            if !lambda.is_finite() {
                return Err(unknown());
            }
            Ok(ff_x_family(lambda))
        }
        ("model", Some(a)) => model_system(a.parse()?),
        _ => Err(unknown()),
    }
}

/// Random point of `region` inside the search part of a random chart.
fn sample_point(sys: &MomentMapSystem, region: &ScanRegion, rng: &mut ChaCha8Rng) -> Option<(String, Vec<f64>)> {
    if region.charts.is_empty() {
        return None;
    }
    for _ in 0..1000 {
        let chart = &region.charts[rng.random_range(0..region.charts.len())];
        let p: Vec<f64> = region
            .min
            .iter()
            .zip(&region.max)
            .map(|(&lo, &hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
            .collect();
        if sys.in_search_domain(chart, &p) {
            return Some((chart.clone(), p));
        }
    }
    None
}

/// Largest pairwise Poisson bracket over `samples` random points of the
/// default region.
pub fn integrability_residual(sys: &MomentMapSystem, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = sys.default_region();
    let n = sys.n();
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let Some((chart, p)) = sample_point(sys, &region, &mut rng) else { break };
        let d = sys.derivatives(&chart, &p)?;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| d.jacobian.row(i).iter().copied().collect()).collect();
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max(bracket_of_gradients(&rows[i], &rows[j]).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest return error (in embedded coordinates) of the periodic components
/// after time `2 pi`, over `samples` random regular points.
pub fn periodicity_residual(
    sys: &MomentMapSystem,
    samples: usize,
    seed: u64,
    tol: f64,
    convention: Convention,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = sys.default_region();
    let mut worst = 0.0_f64;
    let mut done = 0;
    let mut tries = 0;
    while done < samples && tries < 100 * samples.max(1) {
        tries += 1;
        let Some((chart, p)) = sample_point(sys, &region, &mut rng) else { break };
        let s = singular_values(&sys.jacobian(&chart, &p)?)?;
        if s.last().copied().unwrap_or(0.0) < 1e-2 {
            continue;
        }
        done += 1;
        let start = sys.embed(&chart, &p)?;
        for i in sys.periodic_components() {
            let h = sys.component(&chart, i)?;
            let domain = |q: &[f64]| sys.in_domain(&chart, q);
            let end = match integrate(&h, &p, TAU, tol, convention, Some(&domain)) {
                Ok(q) => q,
                Err(Error::Integration(_)) => {
                    worst = f64::INFINITY;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let e = sys.embed(&chart, &end)?;
            let err = start.iter().zip(&e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{numerical_jacobian, symplectic_residual, SymplecticForm};

    #[test]
    fn catalog_names_resolve() {
        assert_eq!(system_by_name("toric-oscillator:2").unwrap().n(), 2);
        assert_eq!(system_by_name("spin-oscillator").unwrap().chart_ids(), vec!["N", "S"]);
        let f = system_by_name("ff-x-family:0.5").unwrap();
        assert_eq!(f.chart_ids(), vec!["NN", "NS", "SN", "SS"]);
        assert_eq!(system_by_name("model:0,1,0,1").unwrap().n(), 3);
        assert!(matches!(system_by_name("pendulum"), Err(Error::UnknownSystem(_))));
        assert!(system_by_name("toric-oscillator:x").is_err());
        assert!(system_by_name("model:1,1,0").is_err());
    }

    #[test]
    fn chart_eval_examples() {
        let spin = spin_oscillator();
        let v = spin.eval("N", &[0.0; 4]).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);
        let v = spin.eval("S", &[0.0; 4]).unwrap();
        assert_eq!(v, vec![0.0, -1.0]);
        assert_eq!(toric_oscillator(2).unwrap().eval("R", &[0.0; 4]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(spin.eval("N", &[0.0, 0.0, 2.5, 0.0]), Err(Error::Chart(_))));
        assert!(matches!(spin.eval("E", &[0.0; 4]), Err(Error::Chart(_))));
    }

    #[test]
    fn ff_x_values_follow_the_substitution() {
        let sys = ff_x_family(0.5);
        // spin part at the focus-focus point, third sphere at height z
        for r in [0.0, 0.4, 1.0, 1.7] {
            let p = [0.0, 0.0, r, 0.0, 0.0, 0.0];
            let z = 1.0 - r * r / 2.0;
            let v = sys.eval("NN", &p).unwrap();
            assert!((v[0] - z * z / 2.0).abs() < 1e-15 && v[1] == 1.0 && (v[2] - z).abs() < 1e-15);
        }
    }

    #[test]
    fn sphere_transition_is_an_exact_involution_and_symplectic() {
        let sys = MomentMapSystem::from_factors("sphere", vec![Factor::Sphere], None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let form = SymplecticForm::standard(1);
        for _ in 0..100 {
            let p = [rng.random_range(-1.3..1.3), rng.random_range(-1.3..1.3)];
            let q = sys.transition("N", "S", &p).unwrap();
            let back = sys.transition("S", "N", &q).unwrap();
            assert!((back[0] - p[0]).abs() <= 1e-12 && (back[1] - p[1]).abs() <= 1e-12);
            let e1 = sys.embed("N", &p).unwrap();
            let e2 = sys.embed("S", &q).unwrap();
            assert!(e1.iter().zip(&e2).all(|(a, b)| (a - b).abs() < 1e-12));
            assert!((e1.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            let j = numerical_jacobian(|x| sys.transition("N", "S", x), &p, 1e-6).unwrap();
            assert!(symplectic_residual(&j, &form).unwrap() < 1e-7);
        }
        assert!(sys.transition("N", "S", &[0.0, 0.0]).is_err());
    }

    #[test]
    fn overlap_values_and_derivatives_agree() {
        let sys = ff_x_family(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p: Vec<f64> = (0..6).map(|_| rng.random_range(-1.2..1.2)).collect();
            let Ok(q) = sys.transition("NN", "SS", &p) else { continue };
            let a = sys.derivatives("NN", &p).unwrap();
            let b = sys.derivatives("SS", &q).unwrap();
            assert!(a.values.iter().zip(&b.values).all(|(x, y)| (x - y).abs() <= 1e-10));
            let t = sys.transition_jacobian("NN", "SS", &p).unwrap();
            let fd = numerical_jacobian(|x| sys.transition("NN", "SS", x), &p, 1e-6).unwrap();
            assert!((&fd - &t).amax() < 1e-6);
            let pulled = &b.jacobian * t;
            let err = (pulled - &a.jacobian).amax();
            assert!(err <= 1e-8, "{err} at {p:?}");
        }
    }

    #[test]
    fn catalog_systems_are_integrable() {
        for name in ["toric-oscillator:2", "spin-oscillator", "ff-x-family:0.5", "ff-x-family:0", "model:1,1,0,1"] {
            let sys = system_by_name(name).unwrap();
            let r = integrability_residual(&sys, 500, 1).unwrap();
            assert!(r <= 1e-8, "{name}: {r}");
        }
    }

    #[test]
    fn last_components_are_periodic() {
        for name in ["toric-oscillator:2", "spin-oscillator", "ff-x-family:0.5"] {
            let sys = system_by_name(name).unwrap();
            let r = periodicity_residual(&sys, 50, 2, 1e-10, Convention::Standard).unwrap();
            assert!(r <= 1e-6, "{name}: {r}");
        }
        let spin = spin_oscillator();
        assert_eq!(spin.periodic_components(), vec![1]);
        assert_eq!(ff_x_family(0.5).periodic_components(), vec![1, 2]);
    }

    #[test]
    fn jet_gradients_match_finite_differences() {
        let sys = ff_x_family(0.5);
        let p = [0.3, -0.2, 0.9, 0.1, 0.4, -0.5];
        for i in 0..3 {
            let h = sys.component("NN", i).unwrap();
            let exact = h.gradient(&p);
            let fd = SmoothHamiltonian::new(6, {
                let s = sys.clone();
                move |q| s.eval("NN", q).unwrap()[i]
            })
            .gradient(&p);
            assert!(exact.iter().zip(&fd).all(|(a, b)| (a - b).abs() < 1e-8));
        }
    }
}
