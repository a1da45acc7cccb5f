//! Self-checking suites over the local models: transition machinery
//! ([`model_suite`]) and Hamiltonian flows ([`flow_suite`]).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::intmat::IntMatrix;
use crate::linalg::Mat;
use crate::localmodel::{
    build_model, e1_matrix, e2_matrix, eta, eta_phase, transition_jacobian, upsilon, verify_spade,
    verify_star, zeta, zeta_phase, Check, Component, EpsilonSigns, ModelPoint, StarTransition,
};
use crate::symplectic::{
    integrate, numerical_jacobian, symplectic_residual, Convention, SymplecticForm,
};
use crate::williamson::{classify_fixed, CartanCandidate, WilliamsonType};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub wtype: WilliamsonType,
    pub checks: Vec<Check>,
    /// Checks that do not apply to this type.
    pub skipped: Vec<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct ModelSuiteOptions {
    pub samples: usize,
    /// Pointwise bound for pullback identities.
    pub pullback_tol: f64,
    pub symplectic_tol: f64,
    /// Integer snap tolerance of the transition verifiers.
    pub integer_tol: f64,
    pub upsilon_tol: f64,
    pub block_range: i64,
}

impl Default for ModelSuiteOptions {
    fn default() -> Self {
        ModelSuiteOptions {
            samples: 100,
            pullback_tol: 1e-10,
            symplectic_tol: 1e-5,
            integer_tol: 1e-9,
            upsilon_tol: 1e-9,
            block_range: 3,
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_point(w: &WilliamsonType, rng: &mut ChaCha8Rng) -> ModelPoint {
    ModelPoint {
        z1: random_complex(rng),
        z2: random_complex(rng),
        ze: (0..w.k_e()).map(|_| random_complex(rng)).collect(),
        theta: (0..w.k_x()).map(|_| rng.random_range(0.0..TAU)).collect(),
        action: (0..w.k_x()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

fn random_block(rows: usize, cols: usize, range: i64, rng: &mut ChaCha8Rng) -> IntMatrix {
    let data: Vec<i64> = (0..rows * cols).map(|_| rng.random_range(-range..=range)).collect();
    IntMatrix::from_fn(rows, cols, |i, j| data[i * cols + j])
}

/// Random matrix with entries in `[-range, range]` and determinant `±1`.
pub fn random_unimodular(k: usize, range: i64, rng: &mut ChaCha8Rng) -> IntMatrix {
    for _ in 0..100_000 {
        let m = random_block(k, k, range, rng);
        if m.is_unimodular() {
            return m;
        }
    }
    IntMatrix::identity(k)
}

fn random_sign(rng: &mut ChaCha8Rng) -> i8 {
    if rng.random_bool(0.5) {
        1
    } else {
        -1
    }
}

/// Random transition with all elliptic signs `+1`, so that it has a
/// phase-space realization.
pub fn random_transition(w: &WilliamsonType, range: i64, rng: &mut ChaCha8Rng) -> StarTransition {
    StarTransition {
        eps: EpsilonSigns { eps_f1: random_sign(rng), eps_f2: random_sign(rng), eps_e: vec![1; w.k_e()] },
        xf: (0..w.k_x()).map(|_| rng.random_range(-range..=range)).collect(),
        xe: random_block(w.k_x(), w.k_e(), range, rng),
        xx: random_unimodular(w.k_x(), range, rng),
    }
}

fn values_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Transition-machinery suite for one model type: pullback identities and
/// symplecticity of `zeta`/`eta`, `E_1`/`E_2` rows, (♠)/(★) recovery with
/// negative controls, composition, `upsilon`, and classification of the model
/// at the origin.
pub fn model_suite(w: WilliamsonType, seed: u64, opts: &ModelSuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut skipped = Vec::new();

    checks.push(Check::flag("eq1", w.k_e() + 2 * w.k_f() + w.k_h() + w.k_x() == w.n()));
    classify_origin(&w, seed, &mut checks, &mut skipped)?;

    if w.k_f() != 1 || w.k_h() != 0 {
        skipped.push("semi-toric transition checks need k_f = 1 and k_h = 0".into());
        return Ok(SuiteReport { suite: "model".into(), wtype: w, checks, skipped });
    }

    pullback_checks(&w, opts, &mut rng, &mut checks)?;
    symplectic_checks(&w, opts, &mut rng, &mut checks)?;
    e_matrix_checks(&mut checks);
    transition_checks(&w, opts, &mut rng, &mut checks)?;
    upsilon_check(&w, opts, &mut rng, &mut checks)?;

    Ok(SuiteReport { suite: "model".into(), wtype: w, checks, skipped })
}

fn classify_origin(
    w: &WilliamsonType,
    seed: u64,
    checks: &mut Vec<Check>,
    skipped: &mut Vec<String>,
) -> Result<()> {
    if w.singular_dofs() == 0 {
        skipped.push("classification at the origin: regular model".into());
        return Ok(());
    }
    let cand = CartanCandidate::new(build_model(*w).singular_hessians())?.with_ambient(w.n());
    let report = classify_fixed(&cand, seed)?;
    checks.push(Check::flag("origin-classifies-as-type", report.wtype == Some(*w)));
    Ok(())
}

fn pullback_checks(
    w: &WilliamsonType,
    opts: &ModelSuiteOptions,
    rng: &mut ChaCha8Rng,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let (ke, kx) = (w.k_e(), w.k_x());
    let (mut zq, mut zqe, mut zi, mut e1, mut e2, mut ex) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let id = IntMatrix::identity(kx);
    for _ in 0..opts.samples {
        let p = random_point(w, rng);
        let xf: Vec<i64> = (0..kx).map(|_| rng.random_range(-opts.block_range..=opts.block_range)).collect();
        let xe = random_block(kx, ke, opts.block_range, rng);
        let xx = random_unimodular(kx, opts.block_range, rng);
        let before = p.values();

        let after = zeta(&xf, &xe, &p)?.values();
        zq = zq.max(values_distance(&before[..2], &after[..2]));
        zqe = zqe.max(values_distance(&before[2..2 + ke], &after[2..2 + ke]));
        let expected: Vec<f64> = (0..kx)
            .map(|i| {
                before[2 + ke + i]
                    + xf[i] as f64 * before[1]
                    + (0..ke).map(|j| xe.get(i, j) as f64 * before[2 + j]).sum::<f64>()
            })
            .collect();
        zi = zi.max(values_distance(&expected, &after[2 + ke..]));

        let a1 = eta(&EpsilonSigns::new(-1, 1, vec![1; ke])?, &id, &p)?.values();
        e1 = e1.max((a1[0] + before[0]).abs()).max((a1[1] - before[1]).abs());
        let a2 = eta(&EpsilonSigns::new(1, -1, vec![1; ke])?, &id, &p)?.values();
        e2 = e2.max((a2[0] - before[0]).abs()).max((a2[1] + before[1]).abs());
        let ax = eta(&EpsilonSigns::identity(ke), &xx, &p)?.values();
        let expected = xx.mul_vec(&before[2 + ke..]);
        ex = ex.max(values_distance(&expected, &ax[2 + ke..]));
    }
    let tol = opts.pullback_tol;
    checks.push(Check::at_most("zeta-pullback-q", zq, tol));
    checks.push(Check::at_most("zeta-pullback-qe", zqe, tol));
    checks.push(Check::at_most("zeta-pullback-I", zi, tol));
    checks.push(Check::at_most("E1-pullback", e1, tol));
    checks.push(Check::at_most("E2-pullback", e2, tol));
    checks.push(Check::at_most("Xx-pullback", ex, tol));
    Ok(())
}

fn symplectic_checks(
    w: &WilliamsonType,
    opts: &ModelSuiteOptions,
    rng: &mut ChaCha8Rng,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let (ke, kx) = (w.k_e(), w.k_x());
    let form = SymplecticForm::standard(w.n());
    let (mut rz, mut re) = (0.0_f64, 0.0_f64);
    for _ in 0..opts.samples {
        let p = random_point(w, rng).to_phase().into_vec();
        let xf: Vec<i64> = (0..kx).map(|_| rng.random_range(-opts.block_range..=opts.block_range)).collect();
        let xe = random_block(kx, ke, opts.block_range, rng);
        let t = random_transition(w, opts.block_range, rng);
        let jz = numerical_jacobian(|q| zeta_phase(*w, &xf, &xe, q), &p, 1e-6)?;
        let je = numerical_jacobian(|q| eta_phase(*w, &t.eps, &t.xx, q), &p, 1e-6)?;
        rz = rz.max(symplectic_residual(&jz, &form)?);
        re = re.max(symplectic_residual(&je, &form)?);
    }
    checks.push(Check::at_most("zeta-symplectic", rz, opts.symplectic_tol));
    checks.push(Check::at_most("eta-symplectic", re, opts.symplectic_tol));
    Ok(())
}

fn e_matrix_checks(checks: &mut Vec<Check>) {
    let v = nalgebra::DVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
    let r1 = e1_matrix(-1) * &v;
    let r2 = e2_matrix(-1) * &v;
    let d1 = values_distance(r1.as_slice(), &[2.0, -1.0, 4.0, -3.0]);
    let d2 = values_distance(r2.as_slice(), &[3.0, 4.0, 1.0, 2.0]);
    checks.push(Check::at_most("E1-rows", d1, 0.0));
    checks.push(Check::at_most("E2-rows", d2, 0.0));
    let form = SymplecticForm::standard(2);
    // (x1, xi1, x2, xi2) -> (x1, x2, xi1, xi2)
    let perm = Mat::from_fn(4, 4, |i, j| if [0, 2, 1, 3][i] == j { 1.0 } else { 0.0 });
    let mut worst = 0.0_f64;
    for (a, b) in [(-1, 1), (1, -1), (-1, -1)] {
        let e = &perm * e1_matrix(a) * e2_matrix(b) * perm.transpose();
        worst = worst.max(symplectic_residual(&e, &form).unwrap_or(f64::INFINITY));
    }
    checks.push(Check::at_most("E-symplectic", worst, 1e-15));
}

fn random_values(w: &WilliamsonType, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    v.extend((0..w.k_e()).map(|_| rng.random_range(0.1..1.0)));
    v.extend((0..w.k_x()).map(|_| rng.random_range(-1.0..1.0)));
    v
}

fn critical_values(w: &WilliamsonType, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![0.0; 2 + w.k_e()];
    v.extend((0..w.k_x()).map(|_| rng.random_range(-1.0..1.0)));
    v
}

fn transition_checks(
    w: &WilliamsonType,
    opts: &ModelSuiteOptions,
    rng: &mut ChaCha8Rng,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let tol = opts.integer_tol;
    let trials = opts.samples.clamp(1, 20);
    let (mut spade_ok, mut star_ok, mut recovered, mut composed, mut group_law) = (true, true, true, true, true);
    let (mut neg_column, mut neg_fraction, mut neg_star, mut neg_trace) = (true, true, true, true);
    for _ in 0..trials {
        let t = random_transition(w, opts.block_range, rng);
        let theta: Vec<f64> = (0..w.k_x()).map(|_| rng.random_range(0.0..TAU)).collect();

        let off = random_values(w, rng);
        let j = transition_jacobian(*w, |p| t.realize(p), &off, &theta, 1e-3)?;
        let spade = verify_spade(&j, w, tol)?;
        let blocks = spade.blocks.clone().expect("blocks");
        spade_ok &= spade.pass();
        recovered &= blocks.x_x() == t.xx && blocks.x_e() == t.xe;

        let at = critical_values(w, rng);
        let jc = transition_jacobian(*w, |p| t.realize(p), &at, &theta, 1e-3)?;
        let star = verify_star(&jc, w, true, tol)?;
        star_ok &= star.pass();
        recovered &= star.star.as_ref() == Some(&t);

        let mut bad = jc.clone();
        bad[(1, 0)] += 0.2;
        neg_column &= !verify_spade(&bad, w, tol)?.pass();
        let mut bad = jc.clone();
        bad[(1, 1)] += 0.37;
        neg_fraction &= !verify_spade(&bad, w, tol)?.pass();
        let mut bad = jc.clone();
        if w.n() > 2 {
            // an integer entry in F^e or F^x keeps (♠) integral but breaks (★)
            bad[(1, 2)] += 1.0;
            neg_star &= !verify_star(&bad, w, false, tol)?.pass();
        }
        let mut bad = jc.clone();
        bad[(0, 1)] += 0.25;
        neg_trace &= verify_star(&bad, w, false, tol)?.pass() && !verify_star(&bad, w, true, tol)?.pass();

        let t2 = random_transition(w, opts.block_range, rng);
        let psi = |p: &ModelPoint| t.realize(&t2.realize(p)?);
        let jj = transition_jacobian(*w, psi, &at, &theta, 1e-3)?;
        let report = verify_star(&jj, w, true, tol)?;
        composed &= report.star == Some(t.compose(&t2));

        let mut s1 = t.clone();
        let mut s2 = t2.clone();
        s1.eps.eps_e.iter_mut().for_each(|e| *e = random_sign(rng));
        s2.eps.eps_e.iter_mut().for_each(|e| *e = random_sign(rng));
        let diff = s1.jacobian() * s2.jacobian() - s1.compose(&s2).jacobian();
        group_law &= diff.amax() == 0.0;
    }
    checks.push(Check::flag("spade-pass", spade_ok));
    checks.push(Check::flag("star-pass-on-critical-set", star_ok));
    checks.push(Check::flag("blocks-recovered", recovered));
    checks.push(Check::flag("negative-first-column", neg_column));
    checks.push(Check::flag("negative-non-integer", neg_fraction));
    if w.n() > 2 {
        checks.push(Check::flag("negative-star-block", neg_star));
    }
    checks.push(Check::flag("negative-flat-trace", neg_trace));
    checks.push(Check::flag("composition-coherence", composed));
    checks.push(Check::flag("group-law", group_law));
    Ok(())
}

fn upsilon_check(
    w: &WilliamsonType,
    opts: &ModelSuiteOptions,
    rng: &mut ChaCha8Rng,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let mut worst = 0.0_f64;
    for _ in 0..opts.samples {
        let c = Complex64::from_polar(rng.random_range(0.1..10.0), rng.random_range(-PI..PI));
        let d = Complex64::from_polar(rng.random_range(0.1..10.0), rng.random_range(-PI..PI));
        let theta: Vec<f64> = (0..w.k_x()).map(|_| rng.random_range(0.0..TAU)).collect();
        let action: Vec<f64> = (0..w.k_x()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = upsilon(c, d, &theta, &action)?;
        let mut err = (r.end.z1 - d).norm().max((r.end.z2 - c.conj()).norm());
        err = err.max(values_distance(&r.end.theta, &theta)).max(values_distance(&r.end.action, &action));
        worst = worst.max(err);
    }
    checks.push(Check::at_most("upsilon-end-state", worst, opts.upsilon_tol));
    Ok(())
}

#[derive(Clone, Debug)]
pub struct FlowSuiteOptions {
    pub t_max: f64,
    pub samples: usize,
    /// Integrator tolerance.
    pub ode_tol: f64,
    pub conservation_tol: f64,
    pub periodicity_tol: f64,
    pub agreement_tol: f64,
    pub upsilon_tol: f64,
    pub convention: Convention,
}

impl Default for FlowSuiteOptions {
    fn default() -> Self {
        FlowSuiteOptions {
            t_max: TAU,
            samples: 10,
            ode_tol: 1e-11,
            conservation_tol: 1e-8,
            periodicity_tol: 1e-6,
            agreement_tol: 1e-7,
            upsilon_tol: 1e-9,
            convention: Convention::Standard,
        }
    }
}

/// Flow suite on the model `Q_w`: energy conservation over `[-t_max, t_max]`,
/// periodicity of the compact components, closed form against integration,
/// flow symplecticity and the joint-flow identity.
///
/// Conservation is `|H(t) - H(0)| / (1 + |H(0)|)`; closed-form agreement is
/// measured relative to `max(1, |closed|_inf)`.
pub fn flow_suite(w: WilliamsonType, seed: u64, opts: &FlowSuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = build_model(w);
    let n = w.n();
    let times: Vec<f64> = (0..=8).map(|k| -opts.t_max + 2.0 * opts.t_max * k as f64 / 8.0).collect();
    let points: Vec<Vec<f64>> = (0..opts.samples)
        .map(|_| (0..2 * n).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();

    let mut conservation = 0.0_f64;
    let mut agreement = 0.0_f64;
    let mut period_2pi = 0.0_f64;
    let mut period_pi = 0.0_f64;
    let mut symplectic = 0.0_f64;
    let form = SymplecticForm::standard(n);
    for &c in model.components() {
        let h = model.hamiltonian(c);
        for p in &points {
            let h0 = h.value(p);
            for &t in &times {
                let q = integrate(&h, p, t, opts.ode_tol, opts.convention, None)?;
                conservation = conservation.max((h.value(&q) - h0).abs() / (1.0 + h0.abs()));
                let exact = model.flow_component(c, p, t)?;
                let scale = exact.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
                agreement = agreement.max(values_distance(&exact, &q) / scale);
            }
            if let Some(period) = model.period(c) {
                let mut q = integrate(&h, p, period, opts.ode_tol, opts.convention, None)?;
                let mut start = p.clone();
                model.reduce_angles(&mut q);
                model.reduce_angles(&mut start);
                let err = angle_aware_distance(&model, &start, &q);
                match c {
                    Component::Elliptic(_) => period_pi = period_pi.max(err),
                    _ => period_2pi = period_2pi.max(err),
                }
            }
        }
        let p = &points[0];
        let jac = numerical_jacobian(|q| integrate(&h, q, 1.0, opts.ode_tol, opts.convention, None), p, 1e-6)?;
        symplectic = symplectic.max(symplectic_residual(&jac, &form)?);
    }

    let mut checks = vec![
        Check::at_most("conservation", conservation, opts.conservation_tol),
        Check::at_most("closed-form-agreement", agreement, opts.agreement_tol),
        Check::at_most("flow-symplectic", symplectic, 1e-5),
    ];
    let mut skipped = Vec::new();
    if w.k_f() + w.k_x() > 0 {
        checks.push(Check::at_most("periodicity-2pi", period_2pi, opts.periodicity_tol));
    } else {
        skipped.push("periodicity-2pi: no q2 or transverse component".into());
    }
    if w.k_e() > 0 {
        checks.push(Check::at_most("periodicity-elliptic-pi", period_pi, opts.periodicity_tol));
    }
    if w.k_f() == 1 && w.k_h() == 0 {
        upsilon_check(&w, &ModelSuiteOptions { samples: 100, ..Default::default() }, &mut rng, &mut checks)?;
    } else {
        skipped.push("upsilon: needs k_f = 1 and k_h = 0".into());
    }
    Ok(SuiteReport { suite: "flows".into(), wtype: w, checks, skipped })
}

fn angle_aware_distance(model: &crate::localmodel::ModelQ, a: &[f64], b: &[f64]) -> f64 {
    let n = model.n();
    let first_angle = n - model.wtype().k_x();
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let d = (x - y).abs();
            if (first_angle..n).contains(&i) {
                d.min(TAU - d)
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}
