//! Williamson types, the type poset and classification of commuting quadratic
//! families at a fixed point.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{singular_values, Mat};
use crate::symplectic::{QuadraticHamiltonian, SymplecticForm};

/// `(k_e, k_f, k_h, k_x)` with `k_e + 2 k_f + k_h + k_x = n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 4]", into = "[usize; 4]")]
pub struct WilliamsonType {
    k_e: usize,
    k_f: usize,
    k_h: usize,
    k_x: usize,
}

impl WilliamsonType {
    pub const ZERO: WilliamsonType = WilliamsonType { k_e: 0, k_f: 0, k_h: 0, k_x: 0 };

    /// The ambient dimension is implied by the counts.
    pub fn new(k_e: usize, k_f: usize, k_h: usize, k_x: usize) -> Self {
        WilliamsonType { k_e, k_f, k_h, k_x }
    }

    /// Validates the counts against an explicit ambient `n`.
    pub fn with_n(k_e: usize, k_f: usize, k_h: usize, k_x: usize, n: usize) -> Result<Self> {
        let w = WilliamsonType::new(k_e, k_f, k_h, k_x);
        if w.n() != n {
            return Err(Error::InvalidType(format!(
                "({k_e},{k_f},{k_h},{k_x}) has k_e + 2k_f + k_h + k_x = {} but n = {n}",
                w.n()
            )));
        }
        Ok(w)
    }

    /// The regular type `(0, 0, 0, n)`.
    pub fn regular(n: usize) -> Self {
        WilliamsonType::new(0, 0, 0, n)
    }

    pub fn k_e(&self) -> usize {
        self.k_e
    }
    pub fn k_f(&self) -> usize {
        self.k_f
    }
    pub fn k_h(&self) -> usize {
        self.k_h
    }
    pub fn k_x(&self) -> usize {
        self.k_x
    }

    pub fn n(&self) -> usize {
        self.k_e + 2 * self.k_f + self.k_h + self.k_x
    }

    /// Degrees of freedom that are not transverse.
    pub fn singular_dofs(&self) -> usize {
        self.n() - self.k_x
    }

    pub fn is_regular(&self) -> bool {
        self.k_x == self.n()
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.k_e, self.k_f, self.k_h, self.k_x]
    }
}

impl TryFrom<[usize; 4]> for WilliamsonType {
    type Error = Error;
    fn try_from(a: [usize; 4]) -> Result<Self> {
        Ok(WilliamsonType::new(a[0], a[1], a[2], a[3]))
    }
}

impl From<WilliamsonType> for [usize; 4] {
    fn from(w: WilliamsonType) -> Self {
        w.as_array()
    }
}

impl fmt::Display for WilliamsonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.k_e, self.k_f, self.k_h, self.k_x)
    }
}

impl FromStr for WilliamsonType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().trim_matches(|c| c == '(' || c == ')').split(',').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidType(format!("expected four comma-separated counts, got {s:?}")));
        }
        let mut k = [0usize; 4];
        for (slot, p) in k.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidType(format!("not a non-negative integer: {p:?}")))?;
        }
        Ok(WilliamsonType::new(k[0], k[1], k[2], k[3]))
    }
}

/// `a ⪯ b` iff `a` has at least as many elliptic, focus-focus and hyperbolic
/// components as `b`.
pub fn type_leq(a: &WilliamsonType, b: &WilliamsonType) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::Dimension { expected: a.n(), got: b.n() });
    }
    Ok(a.k_e >= b.k_e && a.k_f >= b.k_f && a.k_h >= b.k_h)
}

/// Type of a critical point of a product system.
pub fn type_of_product(a: &WilliamsonType, b: &WilliamsonType) -> WilliamsonType {
    WilliamsonType::new(a.k_e + b.k_e, a.k_f + b.k_f, a.k_h + b.k_h, a.k_x + b.k_x)
}

/// The set of types occurring for one system, ordered by `⪯`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TypePoset {
    n: Option<usize>,
    members: BTreeSet<WilliamsonType>,
}

impl TypePoset {
    pub fn new() -> Self {
        TypePoset::default()
    }

    pub fn insert(&mut self, w: WilliamsonType) -> Result<bool> {
        match self.n {
            Some(n) if n != w.n() => Err(Error::Dimension { expected: n, got: w.n() }),
            _ => {
                self.n = Some(w.n());
                Ok(self.members.insert(w))
            }
        }
    }

    pub fn members(&self) -> impl Iterator<Item = &WilliamsonType> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Minimal elements: the most singular types.
    pub fn minimal(&self) -> Vec<WilliamsonType> {
        self.members
            .iter()
            .filter(|a| {
                !self
                    .members
                    .iter()
                    .any(|b| b != *a && type_leq(b, a).unwrap_or(false))
            })
            .copied()
            .collect()
    }

    /// Pairs `(a, b)` with `a ⪯ b`, `a != b`.
    pub fn strict_relations(&self) -> Vec<(WilliamsonType, WilliamsonType)> {
        let mut out = Vec::new();
        for a in &self.members {
            for b in &self.members {
                if a != b && type_leq(a, b).unwrap_or(false) {
                    out.push((*a, *b));
                }
            }
        }
        out
    }
}

/// Hessians of a commuting family at a fixed point of the reduced space.
#[derive(Clone, Debug)]
pub struct CartanCandidate {
    pub hessians: Vec<QuadraticHamiltonian>,
    pub tolerance: f64,
    /// Ambient number of degrees of freedom; transverse count is `ambient_n - m`.
    pub ambient_n: usize,
}

/// Eigenvalue clustering tolerance used when none is given.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-7;
const MAX_DRAWS: usize = 5;

impl CartanCandidate {
    pub fn new(hessians: Vec<QuadraticHamiltonian>) -> Result<Self> {
        let first = hessians
            .first()
            .ok_or_else(|| Error::Precondition("empty Hessian list".into()))?;
        let d = first.dim();
        for h in &hessians {
            if h.dim() != d {
                return Err(Error::Dimension { expected: d, got: h.dim() });
            }
        }
        Ok(CartanCandidate { hessians, tolerance: DEFAULT_CLASSIFY_TOL, ambient_n: d / 2 })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_ambient(mut self, n: usize) -> Self {
        self.ambient_n = n;
        self
    }

    /// Reduced number of degrees of freedom.
    pub fn m(&self) -> usize {
        self.hessians[0].dim() / 2
    }
}

/// Pairwise brackets of quadratic forms vanish iff the Hamiltonian matrices
/// `Omega S_i` commute.
pub fn is_commuting(c: &CartanCandidate) -> Result<bool> {
    let m = c.m();
    let omega = SymplecticForm::standard(m);
    let maps: Vec<Mat> = c.hessians.iter().map(|h| omega.matrix() * h.matrix()).collect();
    let norms: Vec<f64> = maps.iter().map(|a| a.norm()).collect();
    for i in 0..maps.len() {
        for j in (i + 1)..maps.len() {
            let comm = &maps[i] * &maps[j] - &maps[j] * &maps[i];
            let scale = (norms[i] * norms[j]).max(f64::MIN_POSITIVE);
            if comm.norm() > c.tolerance * scale {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    /// `None` when the family is degenerate.
    pub wtype: Option<WilliamsonType>,
    pub nondegenerate: bool,
    #[serde(serialize_with = "ser_complex")]
    pub eigenvalues: Vec<Complex64>,
    pub coefficients: Vec<f64>,
    pub diagnostics: String,
}

fn ser_complex<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

#[derive(Debug, PartialEq)]
struct SpeciesCount {
    elliptic: usize,
    focus: usize,
    hyperbolic: usize,
}

fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    // Exactly structured matrices can stall the QR iteration; a fixed
    // similarity transform breaks the structure without changing the spectrum.
    let n = a.nrows();
    let conjugated = |k: usize| {
        let p = Mat::from_fn(n, n, |i, j| {
            if i == j { 1.0 } else { 0.3 * (((i * 7 + j * 13 + k * 5) % 11) as f64 / 11.0 - 0.5) }
        });
        p.clone().try_inverse().map(|inv| &p * a * inv)
    };
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .or_else(|| {
            (0..6).find_map(|k| conjugated(k).and_then(|b| nalgebra::linalg::Schur::try_new(b, 1e-14, 10_000)))
        })
        .ok_or_else(|| Error::Numerical("eigenvalue solver did not converge".into()))?;
    let ev = schur.complex_eigenvalues();
    Ok(ev.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

fn has_partner(ev: &[Complex64], target: Complex64, tol: f64) -> bool {
    ev.iter().any(|z| (z - target).norm() <= tol)
}

/// Sorts eigenvalues into the three species; `Err` carries the reason a draw
/// is not generic.
fn species(ev: &[Complex64], tol: f64) -> std::result::Result<SpeciesCount, String> {
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err("all eigenvalues vanish".into());
    }
    let sep = tol * scale;
    let pair_tol = (10.0 * tol).max(1e-9) * scale;
    if let Some(z) = ev.iter().find(|z| z.norm() <= sep) {
        return Err(format!("eigenvalue {z:.3e} is zero within tolerance"));
    }
    for i in 0..ev.len() {
        for j in (i + 1)..ev.len() {
            if (ev[i] - ev[j]).norm() <= sep {
                return Err(format!("eigenvalues {:.6e} and {:.6e} collide", ev[i], ev[j]));
            }
        }
    }
    let (mut imag, mut real, mut cplx) = (0, 0, 0);
    for z in ev {
        let r = z.norm();
        if z.re.abs() <= tol * r {
            imag += 1;
            if !has_partner(ev, -z, pair_tol) {
                return Err(format!("imaginary eigenvalue {z:.6e} lacks its negative"));
            }
        } else if z.im.abs() <= tol * r {
            real += 1;
            if !has_partner(ev, -z, pair_tol) {
                return Err(format!("real eigenvalue {z:.6e} lacks its negative"));
            }
        } else {
            cplx += 1;
            for w in [z.conj(), -z, -z.conj()] {
                if !has_partner(ev, w, pair_tol) {
                    return Err(format!("complex eigenvalue {z:.6e} is not part of a quadruple"));
                }
            }
        }
    }
    if imag % 2 != 0 || real % 2 != 0 || cplx % 4 != 0 {
        return Err(format!("unbalanced species counts imag={imag} real={real} complex={cplx}"));
    }
    Ok(SpeciesCount { elliptic: imag / 2, focus: cplx / 4, hyperbolic: real / 2 })
}

/// Dimension of the linear span of the Hessians.
fn span_dimension(hessians: &[QuadraticHamiltonian]) -> Result<usize> {
    let d = hessians[0].dim();
    let rows = hessians.len();
    let stacked = DMatrix::from_fn(rows, d * d, |i, k| hessians[i].matrix()[(k / d, k % d)]);
    let s = singular_values(&stacked)?;
    let top = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&x| top > 0.0 && x > 1e-8 * top).count())
}

/// Classifies a commuting family by the spectrum of a generic element.
///
/// Up to five random unit combinations are tried with a generator seeded by
/// `seed`; the first whose linearized map has `2m` distinct, non-zero,
/// species-separable eigenvalues decides the type.
pub fn classify_fixed(c: &CartanCandidate, seed: u64) -> Result<ClassificationReport> {
    let m = c.m();
    if m == 0 {
        return Err(Error::Precondition("reduced dimension must be positive".into()));
    }
    if c.ambient_n < m {
        return Err(Error::Dimension { expected: m, got: c.ambient_n });
    }
    let omega = SymplecticForm::standard(m);
    let span = span_dimension(&c.hessians)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diagnostics = Vec::new();
    if span < m {
        diagnostics.push(format!("Hessians span dimension {span} < {m}"));
    }
    let mut last_ev = Vec::new();
    let mut last_coef = Vec::new();
    for draw in 0..MAX_DRAWS {
        let mut coef: Vec<f64> =
            (0..c.hessians.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = coef.iter().map(|x| x * x).sum::<f64>().sqrt();
        coef.iter_mut().for_each(|x| *x /= norm);
        let mut s = Mat::zeros(2 * m, 2 * m);
        for (ci, h) in coef.iter().zip(&c.hessians) {
            s += h.matrix() * *ci;
        }
        let ev = match eigenvalues(&(omega.matrix() * s)) {
            Ok(ev) => ev,
            Err(e) => {
                diagnostics.push(format!("draw {draw}: {e}"));
                continue;
            }
        };
        match species(&ev, c.tolerance) {
            Ok(count) if span == m => {
                let w = WilliamsonType::new(
                    count.elliptic,
                    count.focus,
                    count.hyperbolic,
                    c.ambient_n - m,
                );
                diagnostics.push(format!("draw {draw} accepted"));
                return Ok(ClassificationReport {
                    wtype: Some(w),
                    nondegenerate: true,
                    eigenvalues: ev,
                    coefficients: coef,
                    diagnostics: diagnostics.join("; "),
                });
            }
            Ok(_) => {
                last_ev = ev;
                last_coef = coef;
                break;
            }
            Err(why) => {
                diagnostics.push(format!("draw {draw}: {why}"));
                last_ev = ev;
                last_coef = coef;
            }
        }
    }
    Ok(ClassificationReport {
        wtype: None,
        nondegenerate: false,
        eigenvalues: last_ev,
        coefficients: last_coef,
        diagnostics: diagnostics.join("; "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::random_symplectic;
    use proptest::prelude::*;

    /// Hand-written model forms on R^{2m}: elliptic x^2+xi^2, hyperbolic x xi,
    /// focus-focus pair (x1 xi1 + x2 xi2, x1 xi2 - x2 xi1).
    fn planted(w: WilliamsonType) -> Vec<QuadraticHamiltonian> {
        let m = w.k_e() + 2 * w.k_f() + w.k_h();
        let mut out = Vec::new();
        let mut dof = 0;
        let blank = || Mat::zeros(2 * m, 2 * m);
        for _ in 0..w.k_e() {
            let mut s = blank();
            s[(dof, dof)] = 1.0;
            s[(m + dof, m + dof)] = 1.0;
            out.push(QuadraticHamiltonian::new(s).unwrap());
            dof += 1;
        }
        for _ in 0..w.k_h() {
            let mut s = blank();
            s[(dof, m + dof)] = 0.5;
            s[(m + dof, dof)] = 0.5;
            out.push(QuadraticHamiltonian::new(s).unwrap());
            dof += 1;
        }
        for _ in 0..w.k_f() {
            let (a, b) = (dof, dof + 1);
            let mut s1 = blank();
            for k in [a, b] {
                s1[(k, m + k)] = 0.5;
                s1[(m + k, k)] = 0.5;
            }
            let mut s2 = blank();
            s2[(a, m + b)] = 0.5;
            s2[(m + b, a)] = 0.5;
            s2[(b, m + a)] = -0.5;
            s2[(m + a, b)] = -0.5;
            out.push(QuadraticHamiltonian::new(s1).unwrap());
            out.push(QuadraticHamiltonian::new(s2).unwrap());
            dof += 2;
        }
        out
    }

    fn conjugate(hs: &[QuadraticHamiltonian], p: &Mat) -> Vec<QuadraticHamiltonian> {
        hs.iter()
            .map(|h| QuadraticHamiltonian::new(p.transpose() * h.matrix() * p).unwrap())
            .collect()
    }

    #[test]
    fn eq1_is_enforced_by_with_n() {
        assert!(WilliamsonType::with_n(1, 1, 0, 1, 4).is_ok());
        assert!(matches!(WilliamsonType::with_n(1, 1, 0, 1, 3), Err(Error::InvalidType(_))));
        assert_eq!(WilliamsonType::new(0, 1, 0, 1).n(), 3);
    }

    #[test]
    fn parses_and_prints() {
        let w: WilliamsonType = "0,1,0,1".parse().unwrap();
        assert_eq!(w, WilliamsonType::new(0, 1, 0, 1));
        assert_eq!(w.to_string(), "(0,1,0,1)");
        assert!("1,2,3".parse::<WilliamsonType>().is_err());
        assert!("a,0,0,0".parse::<WilliamsonType>().is_err());
    }

    #[test]
    fn leq_examples() {
        let ff = WilliamsonType::new(0, 1, 0, 0);
        assert!(type_leq(&ff, &WilliamsonType::new(0, 0, 0, 2)).unwrap());
        assert!(!type_leq(&WilliamsonType::new(1, 0, 0, 1), &ff).unwrap());
        assert!(type_leq(&ff, &ff).unwrap());
        assert!(type_leq(&ff, &WilliamsonType::new(0, 0, 0, 3)).is_err());
    }

    #[test]
    fn product_examples() {
        let a = WilliamsonType::new(0, 1, 0, 0);
        let b = WilliamsonType::new(0, 0, 0, 1);
        assert_eq!(type_of_product(&a, &b), WilliamsonType::new(0, 1, 0, 1));
        assert_eq!(type_of_product(&a, &WilliamsonType::ZERO), a);
        let c = WilliamsonType::new(1, 0, 0, 1);
        let d = WilliamsonType::new(1, 0, 0, 0);
        let p = type_of_product(&c, &d);
        assert_eq!(p, WilliamsonType::new(2, 0, 0, 1));
        assert_eq!(p.n(), 3);
    }

    #[test]
    fn poset_rejects_mixed_dimensions_and_finds_minimal() {
        let mut poset = TypePoset::new();
        poset.insert(WilliamsonType::new(0, 1, 0, 1)).unwrap();
        poset.insert(WilliamsonType::new(1, 1, 0, 0)).unwrap();
        poset.insert(WilliamsonType::regular(3)).unwrap();
        assert!(poset.insert(WilliamsonType::regular(2)).is_err());
        assert_eq!(poset.minimal(), vec![WilliamsonType::new(1, 1, 0, 0)]);
        assert_eq!(poset.strict_relations().len(), 3);
    }

    #[test]
    fn commuting_examples() {
        let ff = planted(WilliamsonType::new(0, 1, 0, 0));
        assert!(is_commuting(&CartanCandidate::new(ff).unwrap()).unwrap());

        let mut x2 = Mat::zeros(2, 2);
        x2[(0, 0)] = 1.0;
        let mut xi2 = Mat::zeros(2, 2);
        xi2[(1, 1)] = 1.0;
        let pair = vec![
            QuadraticHamiltonian::new(x2).unwrap(),
            QuadraticHamiltonian::new(xi2).unwrap(),
        ];
        assert!(!is_commuting(&CartanCandidate::new(pair).unwrap()).unwrap());

        let single = planted(WilliamsonType::new(1, 0, 0, 0));
        assert!(is_commuting(&CartanCandidate::new(single).unwrap()).unwrap());
    }

    #[test]
    fn classify_examples() {
        let e = CartanCandidate::new(planted(WilliamsonType::new(1, 0, 0, 0))).unwrap();
        let r = classify_fixed(&e, 1).unwrap();
        assert_eq!(r.wtype, Some(WilliamsonType::new(1, 0, 0, 0)));
        assert!(r.nondegenerate);

        let ff = CartanCandidate::new(planted(WilliamsonType::new(0, 1, 0, 0))).unwrap();
        assert_eq!(classify_fixed(&ff, 2).unwrap().wtype, Some(WilliamsonType::new(0, 1, 0, 0)));

        let w = WilliamsonType::new(1, 1, 0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_symplectic(3, 0.5, 1e3, &mut rng).unwrap();
        let c = CartanCandidate::new(conjugate(&planted(w), &p)).unwrap();
        assert_eq!(classify_fixed(&c, 3).unwrap().wtype, Some(w));
    }

    #[test]
    fn ambient_dimension_sets_transverse_count() {
        let c = CartanCandidate::new(planted(WilliamsonType::new(0, 1, 0, 0)))
            .unwrap()
            .with_ambient(3);
        assert_eq!(classify_fixed(&c, 0).unwrap().wtype, Some(WilliamsonType::new(0, 1, 0, 1)));
    }

    #[test]
    fn degenerate_families_are_reported_not_errors() {
        // span of dimension 1 < m = 2
        let mut hs = planted(WilliamsonType::new(2, 0, 0, 0));
        hs[1] = hs[0].clone();
        let r = classify_fixed(&CartanCandidate::new(hs).unwrap(), 5).unwrap();
        assert!(!r.nondegenerate);
        assert!(r.wtype.is_none());
        assert!(r.diagnostics.contains("span"));

        // nilpotent: x^2 alone on R^2
        let mut s = Mat::zeros(2, 2);
        s[(0, 0)] = 1.0;
        let c = CartanCandidate::new(vec![QuadraticHamiltonian::new(s).unwrap()]).unwrap();
        assert!(!classify_fixed(&c, 5).unwrap().nondegenerate);
    }

    #[test]
    fn classification_survives_recombination() {
        let w = WilliamsonType::new(1, 1, 0, 0);
        let hs = planted(w);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..20 {
            let k = hs.len();
            let mix = loop {
                let m = Mat::from_fn(k, k, |_, _| StandardNormal.sample(&mut rng));
                if m.determinant().abs() > 0.1 {
                    break m;
                }
            };
            let mixed: Vec<QuadraticHamiltonian> = (0..k)
                .map(|i| {
                    let mut s = Mat::zeros(6, 6);
                    for j in 0..k {
                        s += hs[j].matrix() * mix[(i, j)];
                    }
                    QuadraticHamiltonian::new(s).unwrap()
                })
                .collect();
            let r = classify_fixed(&CartanCandidate::new(mixed).unwrap(), trial).unwrap();
            assert_eq!(r.wtype, Some(w), "trial {trial}: {}", r.diagnostics);
        }
    }

    fn arb_type(n: usize) -> impl Strategy<Value = WilliamsonType> {
        (0..=n, 0..=n / 2, 0..=n).prop_filter_map("the dimension count must leave k_x >= 0", move |(e, f, h)| {
            let used = e + 2 * f + h;
            (used <= n).then(|| WilliamsonType::new(e, f, h, n - used))
        })
    }

    fn arb_triple() -> impl Strategy<Value = (WilliamsonType, WilliamsonType, WilliamsonType)> {
        (1usize..=6).prop_flat_map(|n| (arb_type(n), arb_type(n), arb_type(n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn poset_axioms((a, b, c) in arb_triple()) {
            prop_assert_eq!(a.n(), a.k_e() + 2 * a.k_f() + a.k_h() + a.k_x());
            prop_assert!(type_leq(&a, &a).unwrap());
            if type_leq(&a, &b).unwrap() && type_leq(&b, &a).unwrap() {
                prop_assert_eq!(a, b);
            }
            if type_leq(&a, &b).unwrap() && type_leq(&b, &c).unwrap() {
                prop_assert!(type_leq(&a, &c).unwrap());
            }
        }
    }
}
