//! Critical-point search, reduction to the symplectic quotient, Williamson
//! classification and strata.
//!
//! A scan scores every grid point by the smallest singular value of `dF`,
//! keeps axis-wise local minima that are below a Lipschitz bound, and refines
//! each with Gauss–Newton on `U_perp^T dF` for hypothesized ranks `r = 0..n-1`.
//! Grid cells are independent; results are merged in cell order so the output
//! does not depend on the number of worker threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{condition_number, dist, left_singular_basis, lstsq_min_norm, singular_values, Mat};
use crate::symplectic::{QuadraticHamiltonian, SymplecticForm};
use crate::systems::{Derivatives, MomentMapSystem, ScanRegion};
use crate::williamson::{classify_fixed, type_leq, CartanCandidate, WilliamsonType};

/// Absolute floor below which a singular value never counts toward the rank.
pub const RANK_ABS_FLOOR: f64 = 1e-9;

/// Number of singular values above `max(tol * s_max, RANK_ABS_FLOOR)`.
pub fn numerical_rank(j: &Mat, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("rank tolerance must be positive, got {tol}")));
    }
    let s = singular_values(j)?;
    let cut = (tol * s.first().copied().unwrap_or(0.0)).max(RANK_ABS_FLOOR);
    Ok(s.iter().filter(|&&v| v > cut).count())
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    pub chart: String,
    pub coords: Vec<f64>,
    pub rank: usize,
    /// `None` when the point is degenerate.
    pub wtype: Option<WilliamsonType>,
    pub value: Vec<f64>,
    pub nondegenerate: bool,
    /// Norm of the `n - rank` smallest singular values of `dF`.
    pub residual: f64,
    /// Chart-independent coordinates.
    pub embedding: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanOptions {
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub dedup_radius: f64,
    pub classify_tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            rank_tol: 1e-7,
            residual_tol: 1e-10,
            dedup_radius: 1e-4,
            classify_tol: 1e-6,
            max_iterations: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub points: Vec<CriticalPoint>,
    pub grid_points: usize,
    pub candidates: usize,
    /// Candidates whose refinement did not settle.
    pub skipped: usize,
}

/// Per-task seed derived from the run seed and a task index.
pub fn task_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Grid {
    min: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
    total: usize,
}

impl Grid {
    fn new(sys: &MomentMapSystem, region: &ScanRegion) -> Result<Self> {
        let d = 2 * sys.n();
        check_dim(d, region.min.len())?;
        check_dim(d, region.max.len())?;
        check_dim(d, region.step.len())?;
        if region.step.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Precondition("grid steps must be positive".into()));
        }
        for c in &region.charts {
            if !sys.chart_ids().contains(c) {
                return Err(Error::Chart(format!("{} has no chart {c:?}", sys.name())));
            }
        }
        let counts: Vec<usize> = (0..d)
            .map(|k| {
                let span = region.max[k] - region.min[k];
                if span < 0.0 {
                    0
                } else {
                    (span / region.step[k] + 1e-9).floor() as usize + 1
                }
            })
            .collect();
        let total = counts.iter().product();
        Ok(Grid { min: region.min.clone(), step: region.step.clone(), counts, total })
    }

    fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.counts.len()];
        for k in (0..self.counts.len()).rev() {
            let i = flat % self.counts[k];
            flat /= self.counts[k];
            p[k] = self.min[k] + i as f64 * self.step[k];
        }
        p
    }

    /// Flat indices of the two axis neighbours along `axis`, where they exist.
    fn neighbours(&self, flat: usize, axis: usize) -> [Option<usize>; 2] {
        let stride: usize = self.counts[axis + 1..].iter().product();
        let i = (flat / stride) % self.counts[axis];
        [
            (i > 0).then(|| flat - stride),
            (i + 1 < self.counts[axis]).then(|| flat + stride),
        ]
    }

    fn diagonal(&self) -> f64 {
        self.step.iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Smallest singular value of `dF` and the Lipschitz bound on how small it
/// can be at a grid point near a critical point.
fn score(sys: &MomentMapSystem, chart: &str, p: &[f64], half_diag: f64) -> Option<(f64, f64)> {
    if !sys.in_search_domain(chart, p) {
        return None;
    }
    let d = sys.derivatives(chart, p).ok()?;
    let s = singular_values(&d.jacobian).ok()?;
    let lip = d.hessians.iter().map(|h| h.norm_squared()).sum::<f64>().sqrt();
    Some((s.last().copied().unwrap_or(0.0), 1.5 * lip * half_diag))
}

/// Residual `c_a^T dF(p)` for the left singular vectors `c_a` of the `n - r`
/// smallest singular values, flattened, with its Jacobian in `p` and in a
/// correction `c_a + U_r beta_a` of those vectors. The extra columns account
/// for the null vectors turning with `p`.
pub(crate) fn rank_residual(der: &Derivatives, r: usize) -> Result<(Vec<f64>, Mat)> {
    let n = der.jacobian.nrows();
    let d = der.jacobian.ncols();
    let m = n - r;
    let (u, _) = left_singular_basis(&der.jacobian)?;
    let range_rows = u.columns(0, r).transpose() * &der.jacobian;
    let mut res = vec![0.0; m * d];
    let mut jac = Mat::zeros(m * d, d + m * r);
    for a in 0..m {
        let c = u.column(r + a);
        for j in 0..d {
            res[a * d + j] = (0..n).map(|i| c[i] * der.jacobian[(i, j)]).sum();
            for k in 0..d {
                jac[(a * d + j, k)] = (0..n).map(|i| c[i] * der.hessians[i][(j, k)]).sum();
            }
            for b in 0..r {
                jac[(a * d + j, d + a * r + b)] = range_rows[(b, j)];
            }
        }
    }
    Ok((res, jac))
}

/// Newton iteration on `rank_residual` for a hypothesized rank `r`. Returns
/// the refined point and the norm of the `n - r` smallest singular values.
pub fn refine_rank(
    sys: &MomentMapSystem,
    chart: &str,
    start: &[f64],
    r: usize,
    max_iterations: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = sys.n();
    if r >= n {
        return Err(Error::Precondition(format!("rank hypothesis {r} must be below n = {n}")));
    }
    let d = 2 * n;
    let mut p = start.to_vec();
    for _ in 0..max_iterations {
        let der = sys.derivatives(chart, &p)?;
        let (res, jac) = rank_residual(&der, r)?;
        if res.iter().all(|v| v.abs() < 1e-15) {
            break;
        }
        let rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        let step = lstsq_min_norm(&jac, &rhs, 1e-12)?;
        let size = step[..d].iter().map(|s| s * s).sum::<f64>().sqrt();
        for (x, s) in p.iter_mut().zip(&step) {
            *x += s;
        }
        if !sys.in_domain(chart, &p) {
            return Err(Error::Chart("refinement left the chart".into()));
        }
        if size < 1e-15 {
            break;
        }
    }
    let s = singular_values(&sys.jacobian(chart, &p)?)?;
    let residual = s[r..].iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((p, residual))
}

/// Smallest rank hypothesis whose refinement converges near `start`.
fn refine_candidate(
    sys: &MomentMapSystem,
    chart: &str,
    start: &[f64],
    reach: f64,
    opts: &ScanOptions,
) -> Option<(Vec<f64>, usize, f64)> {
    for r in 0..sys.n() {
        let Ok((p, residual)) = refine_rank(sys, chart, start, r, opts.max_iterations) else { continue };
        if !(residual <= opts.residual_tol) || dist(&p, start) > reach || !sys.in_search_domain(chart, &p) {
            continue;
        }
        let Ok(j) = sys.jacobian(chart, &p) else { continue };
        if numerical_rank(&j, opts.rank_tol).ok() == Some(r) {
            return Some((p, r, residual));
        }
    }
    None
}

/// Grid scan of `region` for critical points, refined, deduplicated across
/// charts and classified.
pub fn find_critical(sys: &MomentMapSystem, region: &ScanRegion, opts: &ScanOptions) -> Result<ScanResult> {
    let grid = Grid::new(sys, region)?;
    let half_diag = grid.diagonal() / 2.0;
    let mut refined: Vec<(u64, String, Vec<f64>, usize, f64)> = Vec::new();
    let mut candidates = 0;
    let mut skipped = 0;
    for (ci, chart) in region.charts.iter().enumerate() {
        let scores: Vec<Option<(f64, f64)>> = (0..grid.total)
            .into_par_iter()
            .map(|k| score(sys, chart, &grid.point(k), half_diag))
            .collect();
        let cand: Vec<usize> = (0..grid.total)
            .filter(|&k| {
                let Some((s, bound)) = scores[k] else { return false };
                let mut strict = s < 1e-12;
                let minimum = (0..grid.counts.len()).all(|axis| {
                    grid.neighbours(k, axis).iter().flatten().all(|&m| match scores[m] {
                        Some((t, _)) => {
                            strict |= t > s;
                            t >= s
                        }
                        None => true,
                    })
                });
                // a flat plateau in every direction is not a minimum of interest
                s <= bound && minimum && strict
            })
            .collect();
        candidates += cand.len();
        let results: Vec<Option<(Vec<f64>, usize, f64)>> = cand
            .par_iter()
            .map(|&k| refine_candidate(sys, chart, &grid.point(k), 1.5 * grid.diagonal(), opts))
            .collect();
        for (&k, r) in cand.iter().zip(results) {
            match r {
                Some((p, rank, res)) => {
                    let index = (ci * grid.total + k) as u64;
                    refined.push((index, chart.clone(), p, rank, res));
                }
                None => skipped += 1,
            }
        }
    }

    let mut unique: Vec<(u64, String, Vec<f64>, usize, f64, Vec<f64>)> = Vec::new();
    for (index, chart, p, rank, res) in refined {
        let e = sys.embed(&chart, &p)?;
        if unique.iter().any(|u| dist(&u.5, &e) <= opts.dedup_radius) {
            continue;
        }
        unique.push((index, chart, p, rank, res, e));
    }
    let points = unique
        .into_par_iter()
        .map(|(index, chart, p, rank, res, _)| {
            classify_with_rank(sys, &chart, &p, rank, res, opts.classify_tol, task_seed(opts.seed, index))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { points, grid_points: grid.total * region.charts.len(), candidates, skipped })
}

/// Reduced Hessians at a critical point of rank `r`: Hessians of the `n - r`
/// combinations `c·F` with `c` in the left null space of `dF`, restricted to a
/// symplectic basis of a complement of `span{chi_{f_i}}` inside `ker dF`.
pub fn reduce_hessians(
    sys: &MomentMapSystem,
    chart: &str,
    p: &[f64],
    r: usize,
    tol: f64,
) -> Result<CartanCandidate> {
    let n = sys.n();
    if r >= n {
        return Err(Error::Precondition(format!("rank {r} is not below n = {n}")));
    }
    let der = sys.derivatives(chart, p)?;
    let m = n - r;
    let combos: Vec<Mat> = if r == 0 {
        der.hessians.clone()
    } else {
        let (u, _) = left_singular_basis(&der.jacobian)?;
        (0..m)
            .map(|a| {
                let c = u.column(r + a);
                der.hessians.iter().enumerate().fold(Mat::zeros(2 * n, 2 * n), |acc, (i, h)| acc + h * c[i])
            })
            .collect()
    };
    let basis = if r == 0 { Mat::identity(2 * n, 2 * n) } else { quotient_basis(&der.jacobian, r)? };
    let reduced = combos
        .iter()
        .map(|h| QuadraticHamiltonian::from_hessian(&(basis.transpose() * h * &basis)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CartanCandidate::new(reduced)?.with_tolerance(tol).with_ambient(n))
}

/// Columns `[e_1..e_m | f_1..f_m]` with `omega(f_i, e_j) = delta_ij`, spanning
/// a complement of the orbit directions inside `ker dF`.
fn quotient_basis(jac: &Mat, r: usize) -> Result<Mat> {
    let (n, d) = jac.shape();
    let m = n - r;
    let form = SymplecticForm::standard(n);
    let om = form.matrix();
    let (kernel_full, _) = left_singular_basis(&jac.transpose())?;
    let kernel = kernel_full.columns(r, d - r).into_owned();
    // chi_f = Omega^T grad f in the (x, xi) layout: (grad_xi f, -grad_x f)
    let chi = om.transpose() * jac.transpose();
    let (chi_basis, _) = left_singular_basis(&chi)?;
    let q = chi_basis.columns(0, r).into_owned();
    let projected = &kernel - &q * (q.transpose() * &kernel);
    let (comp, s) = left_singular_basis(&projected)?;
    if s.get(2 * m - 1).is_none_or(|&v| v < 1e-8) {
        return Err(Error::Numerical("orbit directions are not independent in ker dF".into()));
    }
    let mut pool: Vec<nalgebra::DVector<f64>> = (0..2 * m).map(|k| comp.column(k).into_owned()).collect();
    let w = |a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>| (a.transpose() * om * b)[(0, 0)];
    let mut es = Vec::with_capacity(m);
    let mut fs = Vec::with_capacity(m);
    while !pool.is_empty() {
        let mut best = (0, 1, 0.0_f64);
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                let v = w(&pool[i], &pool[j]).abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 < 1e-10 {
            return Err(Error::Numerical("restricted form is degenerate".into()));
        }
        let (i, j, _) = best;
        let b = pool.remove(j);
        let a = pool.remove(i);
        let e = a.clone();
        let f = &b / w(&b, &a);
        pool = pool
            .into_iter()
            .map(|v| {
                let (vf, ve) = (w(&v, &f), w(&v, &e));
                &v + &e * vf - &f * ve
            })
            .collect();
        es.push(e);
        fs.push(f);
    }
    let mut basis = Mat::zeros(d, 2 * m);
    for k in 0..m {
        basis.set_column(k, &es[k]);
        basis.set_column(m + k, &fs[k]);
    }
    if condition_number(&basis)? > 1e8 {
        return Err(Error::Numerical("quotient basis condition exceeds 1e8".into()));
    }
    Ok(basis)
}

fn classify_with_rank(
    sys: &MomentMapSystem,
    chart: &str,
    p: &[f64],
    rank: usize,
    residual: f64,
    tol: f64,
    seed: u64,
) -> Result<CriticalPoint> {
    let n = sys.n();
    let value = sys.eval(chart, p)?;
    let embedding = sys.embed(chart, p)?;
    let (wtype, nondegenerate) = if rank >= n {
        (Some(WilliamsonType::regular(n)), true)
    } else {
        match reduce_hessians(sys, chart, p, rank, tol) {
            Ok(cand) => {
                let report = classify_fixed(&cand, seed)?;
                (report.wtype, report.nondegenerate)
            }
            Err(Error::Numerical(_)) => (None, false),
            Err(e) => return Err(e),
        }
    };
    Ok(CriticalPoint { chart: chart.to_string(), coords: p.to_vec(), rank, wtype, value, nondegenerate, residual, embedding })
}

/// Rank, reduction and classification at one point; regular points get
/// `(0, 0, 0, n)`.
pub fn classify_point(sys: &MomentMapSystem, chart: &str, p: &[f64], opts: &ScanOptions) -> Result<CriticalPoint> {
    let s = singular_values(&sys.jacobian(chart, p)?)?;
    let cut = (opts.rank_tol * s.first().copied().unwrap_or(0.0)).max(RANK_ABS_FLOOR);
    let rank = s.iter().filter(|&&v| v > cut).count();
    let residual = s[rank..].iter().map(|v| v * v).sum::<f64>().sqrt();
    classify_with_rank(sys, chart, p, rank, residual, opts.classify_tol, opts.seed)
}

/// Classifies every grid point of `region`, regular ones included.
pub fn sample_strata(sys: &MomentMapSystem, region: &ScanRegion, opts: &ScanOptions) -> Result<StratumMap> {
    let grid = Grid::new(sys, region)?;
    let mut points = Vec::new();
    for (ci, chart) in region.charts.iter().enumerate() {
        let found = (0..grid.total)
            .into_par_iter()
            .map(|k| {
                let p = grid.point(k);
                if !sys.in_search_domain(chart, &p) {
                    return Ok(None);
                }
                let o = ScanOptions { seed: task_seed(opts.seed, (ci * grid.total + k) as u64), ..opts.clone() };
                classify_point(sys, chart, &p, &o).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        points.extend(found.into_iter().flatten());
    }
    Ok(StratumMap::from_points(sys.n(), points, Some(region.clone())))
}

/// Critical points grouped by Williamson type; degenerate ones kept apart.
#[derive(Clone, Debug, Default)]
pub struct StratumMap {
    pub n: usize,
    pub strata: BTreeMap<WilliamsonType, Vec<CriticalPoint>>,
    pub degenerate: Vec<CriticalPoint>,
    pub region: Option<ScanRegion>,
}

impl StratumMap {
    pub fn from_points(n: usize, points: Vec<CriticalPoint>, region: Option<ScanRegion>) -> Self {
        let mut map = StratumMap { n, region, ..Default::default() };
        for p in points {
            map.insert(p);
        }
        map
    }

    pub fn insert(&mut self, p: CriticalPoint) {
        match p.wtype {
            Some(w) if p.nondegenerate => self.strata.entry(w).or_default().push(p),
            _ => self.degenerate.push(p),
        }
    }

    pub fn points(&self, w: &WilliamsonType) -> &[CriticalPoint] {
        self.strata.get(w).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn counts(&self) -> Vec<(WilliamsonType, usize)> {
        self.strata.iter().map(|(w, v)| (*w, v.len())).collect()
    }

    pub fn len(&self) -> usize {
        self.strata.values().map(Vec::len).sum::<usize>() + self.degenerate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored points whose type breaks `k_e + 2 k_f + k_h + k_x = n` or disagrees with the rank.
    pub fn eq1_violations(&self) -> usize {
        self.strata
            .iter()
            .flat_map(|(w, pts)| pts.iter().map(move |p| (w, p)))
            .filter(|(w, p)| w.n() != self.n || w.k_x() != p.rank || p.wtype != Some(**w))
            .count()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Adjacency {
    /// Type of the lower-rank stratum (the one in the closure).
    pub lower: WilliamsonType,
    pub upper: WilliamsonType,
    pub distance: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjacencyReport {
    pub tolerance: f64,
    pub pairs: Vec<Adjacency>,
    pub violations: usize,
}

fn min_distance(a: &[CriticalPoint], b: &[CriticalPoint], tol: f64) -> Option<f64> {
    let mut sorted: Vec<&CriticalPoint> = b.iter().collect();
    sorted.sort_by(|x, y| x.embedding[0].total_cmp(&y.embedding[0]));
    let mut best: Option<f64> = None;
    for p in a {
        let x = p.embedding[0];
        let start = sorted.partition_point(|q| q.embedding[0] < x - tol);
        for q in &sorted[start..] {
            if q.embedding[0] > x + tol {
                break;
            }
            let dd = dist(&p.embedding, &q.embedding);
            if dd <= tol && best.is_none_or(|b| dd < b) {
                best = Some(dd);
            }
        }
    }
    best
}

/// For each pair of strata within `tol` of each other, the lower-rank one
/// must precede the other in the type order.
pub fn closure_check(strata: &StratumMap, tol: f64) -> AdjacencyReport {
    let types: Vec<&WilliamsonType> = strata.strata.keys().collect();
    let mut pairs = Vec::new();
    for (i, a) in types.iter().enumerate() {
        for b in &types[i + 1..] {
            let Some(d) = min_distance(strata.points(a), strata.points(b), tol) else { continue };
            let (lower, upper) = if a.k_x() <= b.k_x() { (**a, **b) } else { (**b, **a) };
            let consistent = lower.k_x() < upper.k_x() && type_leq(&lower, &upper).unwrap_or(false);
            pairs.push(Adjacency { lower, upper, distance: d, consistent });
        }
    }
    let violations = pairs.iter().filter(|p| !p.consistent).count();
    AdjacencyReport { tolerance: tol, pairs, violations }
}

/// CSV header for points of an `n`-degree-of-freedom system.
pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["chart".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=n).map(|i| format!("xi{i}")));
    cols.extend(["rank", "k_e", "k_f", "k_h", "k_x", "nondegenerate"].map(String::from));
    cols.extend((1..=n).map(|i| format!("f{i}")));
    cols.push("residual".into());
    cols.join(",")
}

pub fn csv_row(p: &CriticalPoint) -> String {
    let mut cols = vec![p.chart.clone()];
    cols.extend(p.coords.iter().map(|v| v.to_string()));
    cols.push(p.rank.to_string());
    match p.wtype {
        Some(w) => cols.extend(w.as_array().iter().map(|v| v.to_string())),
        None => cols.extend(["", "", ""].map(String::from).into_iter().chain([p.rank.to_string()])),
    }
    cols.push(p.nondegenerate.to_string());
    cols.extend(p.value.iter().map(|v| v.to_string()));
    cols.push(p.residual.to_string());
    cols.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{ff_x_family, spin_oscillator, toric_oscillator};

    #[test]
    fn numerical_rank_examples() {
        assert_eq!(numerical_rank(&Mat::zeros(2, 4), 1e-7).unwrap(), 0);
        let j = Mat::from_row_slice(2, 4, &[1.0, 0.3, -0.2, 0.5, 0.1, 2.0, 0.7, -1.0]);
        assert_eq!(numerical_rank(&j, 1e-7).unwrap(), 2);
        let spin = spin_oscillator();
        assert_eq!(numerical_rank(&spin.jacobian("N", &[0.0; 4]).unwrap(), 1e-7).unwrap(), 0);
        assert!(numerical_rank(&j, 0.0).is_err());
    }

    #[test]
    fn spin_oscillator_fixed_points() {
        let spin = spin_oscillator();
        let opts = ScanOptions::default();
        let ff = classify_point(&spin, "N", &[0.0; 4], &opts).unwrap();
        assert_eq!(ff.wtype, Some(WilliamsonType::new(0, 1, 0, 0)));
        assert_eq!(ff.value, vec![0.0, 1.0]);
        let ee = classify_point(&spin, "S", &[0.0; 4], &opts).unwrap();
        assert_eq!(ee.wtype, Some(WilliamsonType::new(2, 0, 0, 0)));
        let reg = classify_point(&spin, "N", &[0.3, 0.2, -0.1, 0.4], &opts).unwrap();
        assert_eq!(reg.wtype, Some(WilliamsonType::regular(2)));
    }

    #[test]
    fn ff_x_points_classify() {
        let opts = ScanOptions::default();
        for lambda in [0.0, 0.5] {
            let sys = ff_x_family(lambda);
            // third sphere on the equator, then at z = 0.3
            for r in [2f64.sqrt(), (2.0 * 0.7f64).sqrt()] {
                let p = classify_point(&sys, "NN", &[0.0, 0.0, r, 0.0, 0.0, 0.0], &opts).unwrap();
                assert_eq!(p.rank, 1);
                assert_eq!(p.wtype, Some(WilliamsonType::new(0, 1, 0, 1)), "lambda {lambda}, r {r}");
            }
            let pole = classify_point(&sys, "NN", &[0.0; 6], &opts).unwrap();
            assert_eq!(pole.wtype, Some(WilliamsonType::new(1, 1, 0, 0)));
        }
    }

    #[test]
    fn toric_points_classify() {
        let sys = toric_oscillator(2).unwrap();
        let opts = ScanOptions::default();
        let o = classify_point(&sys, "R", &[0.0; 4], &opts).unwrap();
        assert_eq!(o.wtype, Some(WilliamsonType::new(2, 0, 0, 0)));
        let c = classify_point(&sys, "R", &[0.0, 0.7, 0.0, -0.2], &opts).unwrap();
        assert_eq!(c.wtype, Some(WilliamsonType::new(1, 0, 0, 1)));
        let r = classify_point(&sys, "R", &[0.5, 0.7, 0.1, -0.2], &opts).unwrap();
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn reduced_hessians_have_quotient_size() {
        let sys = ff_x_family(0.0);
        let c = reduce_hessians(&sys, "NN", &[0.0, 0.0, 2f64.sqrt(), 0.0, 0.0, 0.0], 1, 1e-6).unwrap();
        assert_eq!(c.m(), 2);
        assert!(c.hessians.iter().all(|h| h.dim() == 4));
        let spin = spin_oscillator();
        let c = reduce_hessians(&spin, "N", &[0.0; 4], 0, 1e-6).unwrap();
        assert_eq!(c.m(), 2);
        assert!(reduce_hessians(&spin, "N", &[0.0; 4], 2, 1e-6).is_err());
    }

    #[test]
    fn empty_region_gives_no_points() {
        let sys = toric_oscillator(2).unwrap();
        let mut region = sys.default_region();
        region.charts.clear();
        let r = find_critical(&sys, &region, &ScanOptions::default()).unwrap();
        assert!(r.points.is_empty());
    }

    #[test]
    fn csv_row_has_header_width() {
        let sys = spin_oscillator();
        let p = classify_point(&sys, "N", &[0.0; 4], &ScanOptions::default()).unwrap();
        assert_eq!(csv_row(&p).split(',').count(), csv_header(2).split(',').count());
    }

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(1, 0), task_seed(1, 1));
        assert_ne!(task_seed(1, 0), task_seed(2, 0));
    }
}
