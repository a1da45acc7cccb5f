//! Focus-focus-transverse critical values: affine plane, integer directions,
//! graph, isolation and continuation of the nodal curve.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::critical::{classify_point, rank_residual, find_critical, numerical_rank, CriticalPoint, ScanOptions, StratumMap};
use crate::error::{Error, Result};
use crate::linalg::{dist, left_singular_basis, lstsq_min_norm, norm, Mat};
use crate::localmodel::Check;
use crate::svg::Plot;
use crate::systems::{MomentMapSystem, ScanRegion};
use crate::williamson::WilliamsonType;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodalOptions {
    pub qmax: i64,
    pub direction_tol: f64,
    pub merge_tol: f64,
    pub delta_t: f64,
    pub graph_tol: f64,
    pub plane_tol: f64,
    pub step: f64,
    pub max_steps: usize,
    pub isolation_radius: f64,
    pub isolation_tol: f64,
    pub isolation_boxes: usize,
    /// Transverse range over which the closed-form graph is compared.
    pub known_range: f64,
    pub known_tol: f64,
    pub trace_tol: f64,
}

impl Default for NodalOptions {
    fn default() -> Self {
        NodalOptions {
            qmax: 64,
            direction_tol: 1e-6,
            merge_tol: 1e-8,
            delta_t: 1e-3,
            graph_tol: 1e-6,
            plane_tol: 1e-6,
            step: 0.05,
            max_steps: 16,
            isolation_radius: 0.05,
            isolation_tol: 1e-6,
            isolation_boxes: 12,
            known_range: 0.8,
            known_tol: 1e-4,
            trace_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalValueCloud {
    pub wtype: WilliamsonType,
    pub values: Vec<Vec<f64>>,
}

/// Merges values closer than `tol`, keeping the first of each group.
pub fn merge_values(values: impl IntoIterator<Item = Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut sorted: Vec<Vec<f64>> = values.into_iter().collect();
    sorted.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in sorted {
        let lo = out.partition_point(|u| u[0] < v[0] - tol);
        if !out[lo..].iter().any(|u| dist(u, &v) <= tol) {
            out.push(v);
        }
    }
    out
}

/// Images of the points of type `w`.
pub fn collect_values(strata: &StratumMap, w: &WilliamsonType, merge_tol: f64) -> Result<CriticalValueCloud> {
    if w.k_f() != 1 {
        return Err(Error::Precondition(format!("nodal analysis needs k_f = 1, got {w}")));
    }
    let values = merge_values(strata.points(w).iter().map(|p| p.value.clone()), merge_tol);
    Ok(CriticalValueCloud { wtype: *w, values })
}

#[derive(Clone, Debug, Serialize)]
pub struct AffineFit {
    pub base: Vec<f64>,
    /// Orthonormal directions, `k_x + 1` of them.
    pub basis: Vec<Vec<f64>>,
    pub residual: f64,
    /// Dimension actually spanned by the centred cloud.
    pub spanned_dim: usize,
    pub degenerate: bool,
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// Centroid and top principal directions. A cloud spanning fewer than
/// `k_x + 1` dimensions is completed with `e_1` and then the last coordinate
/// axes, and flagged as degenerate.
pub fn fit_affine(values: &[Vec<f64>], k_x: usize) -> Result<AffineFit> {
    if values.len() < k_x + 2 {
        return Err(Error::Precondition(format!("{} values cannot fix a {}-plane", values.len(), k_x + 1)));
    }
    let n = values[0].len();
    if values.iter().any(|v| v.len() != n) || k_x + 1 > n {
        return Err(Error::Dimension { expected: n, got: k_x + 1 });
    }
    let count = values.len() as f64;
    let base: Vec<f64> = (0..n).map(|i| values.iter().map(|v| v[i]).sum::<f64>() / count).collect();
    let centred = Mat::from_fn(values.len(), n, |r, c| values[r][c] - base[c]);
    let cov = centred.transpose() * &centred;
    let (dirs, s) = left_singular_basis(&cov)?;
    let top = s.first().copied().unwrap_or(0.0);
    let spanned_dim = s.iter().filter(|&&v| v > 1e-16 * count + 1e-14 * top).count();
    let mut basis: Vec<Vec<f64>> =
        (0..spanned_dim.min(k_x + 1)).map(|k| dirs.column(k).iter().copied().collect()).collect();
    let fallback = std::iter::once(0).chain((0..n).rev());
    for axis in fallback {
        if basis.len() == k_x + 1 {
            break;
        }
        let mut e = unit(n, axis);
        project_out(&mut e, &basis);
        let l = norm(&e);
        if l > 1e-6 {
            basis.push(e.iter().map(|x| x / l).collect());
        }
    }
    let residual = values
        .iter()
        .map(|v| {
            let mut d: Vec<f64> = v.iter().zip(&base).map(|(a, b)| a - b).collect();
            project_out(&mut d, &basis);
            norm(&d)
        })
        .fold(0.0, f64::max);
    Ok(AffineFit { base, basis, residual, spanned_dim, degenerate: spanned_dim < k_x + 1 })
}

/// Best rational approximation `p/q` with `q <= qmax` among continued
/// fraction convergents.
pub fn best_rational(x: f64, qmax: i64) -> (i64, i64) {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut best = (x.round() as i64, 1);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let (h2, k2) = (ai.saturating_mul(h1).saturating_add(h0), ai.saturating_mul(k1).saturating_add(k0));
        if k2 > qmax || k2 <= 0 {
            break;
        }
        best = (h2, k2);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    best
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Primitive integer vectors spanning the plane directions other than `e_1`.
pub fn rationalize_directions(basis: &[Vec<f64>], qmax: i64, tol: f64) -> Result<Vec<Vec<i64>>> {
    let Some(n) = basis.first().map(Vec::len) else { return Ok(Vec::new()) };
    let k = basis.len() - 1;
    if k == 0 {
        return Ok(Vec::new());
    }
    let projected = Mat::from_fn(n, basis.len(), |i, j| if i == 0 { 0.0 } else { basis[j][i] });
    let (u, s) = left_singular_basis(&projected)?;
    if s[k - 1] < 1e-6 {
        return Err(Error::NoIntegerDirection(u.column(k - 1).iter().copied().collect()));
    }
    let d = u.columns(0, k).into_owned();
    // reduced row echelon form with full pivoting on the rows of d^T
    let mut rows: Vec<Vec<f64>> = (0..k).map(|j| d.column(j).iter().copied().collect()).collect();
    let mut used = vec![false; n];
    for i in 0..k {
        let (pc, _) = (0..n)
            .filter(|&c| !used[c])
            .map(|c| (c, rows[i][c].abs()))
            .fold((usize::MAX, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        used[pc] = true;
        let pv = rows[i][pc];
        rows[i].iter_mut().for_each(|x| *x /= pv);
        for r in 0..k {
            if r != i {
                let f = rows[r][pc];
                let pivot_row = rows[i].clone();
                rows[r].iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
            }
        }
    }
    rows.iter()
        .map(|row| {
            let fracs: Vec<(i64, i64)> =
                row.iter().map(|&x| if x.abs() < 1e-12 { (0, 1) } else { best_rational(x, qmax) }).collect();
            let lcm = fracs.iter().fold(1i64, |l, &(_, q)| l / gcd(l, q) * q);
            let mut v: Vec<i64> = fracs.iter().map(|&(p, q)| p * (lcm / q)).collect();
            let g = v.iter().fold(0, |g, &x| gcd(g, x));
            if g == 0 {
                return Err(Error::NoIntegerDirection(row.clone()));
            }
            v.iter_mut().for_each(|x| *x /= g);
            if v.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let vf: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let l = norm(&vf);
            let vh = DVector::from_iterator(n, vf.iter().map(|x| x / l));
            let off = (&vh - &d * (d.transpose() * &vh)).norm();
            if off <= tol { Ok(v) } else { Err(Error::NoIntegerDirection(row.clone())) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSample {
    pub t: Vec<f64>,
    pub h: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Graph {
    pub samples: Vec<GraphSample>,
    pub residual: f64,
}

fn plane_matrix(n: usize, directions: &[Vec<i64>]) -> Mat {
    Mat::from_fn(n, directions.len() + 1, |i, j| if j == 0 { (i == 0) as u8 as f64 } else { directions[j - 1][i] as f64 })
}

/// `(h, t, distance off the plane)` of `y` relative to `base + h e_1 + t·v`.
fn decompose(m: &Mat, base: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let rhs: Vec<f64> = y.iter().zip(base).map(|(a, b)| a - b).collect();
    let c = lstsq_min_norm(m, &rhs, 1e-12)?;
    let fitted = m * DVector::from_column_slice(&c);
    let off = rhs.iter().zip(fitted.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok((c[0], c[1..].to_vec(), off))
}

fn cmp_t(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Largest deviation from a local linear fit `h ~ a + b·t` over samples whose
/// `t` lies within `delta_t` (per axis) of each sample; with repeated `t` this
/// is half the spread of `h`.
fn local_linear_residual(samples: &[GraphSample], delta_t: f64) -> Result<(f64, Vec<f64>)> {
    let mut worst = (0.0, Vec::new());
    for (i, s) in samples.iter().enumerate() {
        let near: Vec<&GraphSample> = samples
            .iter()
            .skip(samples[..i].partition_point(|q| q.t.first().is_some_and(|&t| t < s.t[0] - delta_t)).min(i))
            .take_while(|q| q.t.first().is_none_or(|&t| t <= s.t[0] + delta_t))
            .filter(|q| q.t.iter().zip(&s.t).all(|(a, b)| (a - b).abs() <= delta_t))
            .collect();
        if near.len() < 2 {
            continue;
        }
        let k = s.t.len();
        let a = Mat::from_fn(near.len(), k + 1, |r, c| if c == 0 { 1.0 } else { (near[r].t[c - 1] - s.t[c - 1]) / delta_t });
        let h: Vec<f64> = near.iter().map(|q| q.h).collect();
        let coef = lstsq_min_norm(&a, &h, 1e-12)?;
        let fit = &a * DVector::from_column_slice(&coef);
        let r = h.iter().zip(fit.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if r > worst.0 {
            worst = (r, s.t.clone());
        }
    }
    Ok(worst)
}

/// Decomposes each value as `base + h e_1 + sum t_j v_j` and checks that `h`
/// is single-valued in `t`.
pub fn extract_graph(
    values: &[Vec<f64>],
    base: &[f64],
    directions: &[Vec<i64>],
    delta_t: f64,
    tol: f64,
) -> Result<Graph> {
    let m = plane_matrix(base.len(), directions);
    let mut samples = values
        .iter()
        .map(|y| decompose(&m, base, y).map(|(h, t, _)| GraphSample { t, h }))
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by(|a, b| cmp_t(&a.t, &b.t).then(a.h.total_cmp(&b.h)));
    let residual = if directions.is_empty() {
        let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), s| (l.min(s.h), u.max(s.h)));
        ((hi - lo) / 2.0, Vec::new())
    } else {
        local_linear_residual(&samples, delta_t)?
    };
    if residual.0 > tol {
        return Err(Error::NotAGraph { spread: 2.0 * residual.0, at: residual.1 });
    }
    Ok(Graph { samples, residual: residual.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct NodalSurface {
    pub wtype: WilliamsonType,
    #[serde(rename = "P")]
    pub base: Vec<f64>,
    pub e1: Vec<f64>,
    pub v: Vec<Vec<i64>>,
    pub samples: Vec<GraphSample>,
    pub plane_residual: f64,
    pub graph_residual: f64,
    pub spanned_dim: usize,
    pub degenerate_fit: bool,
}

impl NodalSurface {
    /// Value-space point of a graph sample.
    pub fn point(&self, s: &GraphSample) -> Vec<f64> {
        let mut y = self.base.clone();
        y[0] += s.h;
        for (t, v) in s.t.iter().zip(&self.v) {
            y.iter_mut().zip(v).for_each(|(a, b)| *a += t * *b as f64);
        }
        y
    }

    /// Distance from `y` to the sampled surface, interpolating `h` with a
    /// local quadratic in `t` inside the sampled range widened by `reach`.
    pub fn distance(&self, y: &[f64], reach: f64) -> Result<f64> {
        let nearest = self.samples.iter().map(|s| dist(&self.point(s), y)).fold(f64::INFINITY, f64::min);
        let k = self.v.len();
        let (h, t, off) = decompose(&plane_matrix(self.base.len(), &self.v), &self.base, y)?;
        if k == 0 {
            let mean = self.samples.iter().map(|s| s.h).sum::<f64>() / self.samples.len().max(1) as f64;
            return Ok(nearest.min(off.hypot(h - mean)));
        }
        let inside = (0..k).all(|j| {
            let (lo, hi) = self.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), s| (l.min(s.t[j]), u.max(s.t[j])));
            t[j] >= lo - reach && t[j] <= hi + reach
        });
        if !inside {
            return Ok(nearest);
        }
        let features = 1 + k + k * (k + 1) / 2;
        let mut by_dist: Vec<&GraphSample> = self.samples.iter().collect();
        by_dist.sort_by(|a, b| dist(&a.t, &t).total_cmp(&dist(&b.t, &t)));
        let near = &by_dist[..by_dist.len().min(2 * features)];
        let scale = near.iter().map(|s| dist(&s.t, &t)).fold(1e-12, f64::max);
        let feat = |s: &[f64]| {
            let d: Vec<f64> = s.iter().zip(&t).map(|(a, b)| (a - b) / scale).collect();
            let mut f = vec![1.0];
            f.extend(&d);
            for i in 0..k {
                for j in i..k {
                    f.push(d[i] * d[j]);
                }
            }
            f
        };
        let a = Mat::from_fn(near.len(), features, |r, c| feat(&near[r].t)[c]);
        let hs: Vec<f64> = near.iter().map(|s| s.h).collect();
        let coef = lstsq_min_norm(&a, &hs, 1e-12)?;
        Ok(nearest.min(off.hypot(h - coef[0])))
    }
}

/// Plane fit, integer directions and graph of a cloud.
pub fn build_surface(cloud: &CriticalValueCloud, opts: &NodalOptions) -> Result<NodalSurface> {
    let k_x = cloud.wtype.k_x();
    let n = cloud.wtype.n();
    let fit = if cloud.values.len() == 1 && k_x == 0 {
        AffineFit { base: cloud.values[0].clone(), basis: vec![unit(n, 0)], residual: 0.0, spanned_dim: 0, degenerate: true }
    } else {
        fit_affine(&cloud.values, k_x)?
    };
    let v = rationalize_directions(&fit.basis, opts.qmax, opts.direction_tol)?;
    let graph = extract_graph(&cloud.values, &fit.base, &v, opts.delta_t, opts.graph_tol)?;
    Ok(NodalSurface {
        wtype: cloud.wtype,
        base: fit.base,
        e1: unit(n, 0),
        v,
        samples: graph.samples,
        plane_residual: fit.residual,
        graph_residual: graph.residual,
        spanned_dim: fit.spanned_dim,
        degenerate_fit: fit.degenerate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IsolationReport {
    pub isolated: bool,
    pub radius: f64,
    pub checked: usize,
    pub witnesses: Vec<Vec<f64>>,
}

/// Values within `radius` of the surface must lie on it, up to the plane
/// residual plus `tol`.
pub fn isolation_from_values(surface: &NodalSurface, values: &[Vec<f64>], radius: f64, tol: f64) -> Result<IsolationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0;
    for y in values {
        let d = surface.distance(y, radius)?;
        if d <= radius {
            checked += 1;
            if d > surface.plane_residual + tol {
                witnesses.push(y.clone());
            }
        }
    }
    Ok(IsolationReport { isolated: witnesses.is_empty(), radius, checked, witnesses })
}

/// Re-scans small phase boxes around up to `opts.isolation_boxes` preimages
/// and checks the values of the surface type found there.
pub fn isolation_check(
    sys: &MomentMapSystem,
    surface: &NodalSurface,
    preimages: &[CriticalPoint],
    opts: &NodalOptions,
    scan: &ScanOptions,
) -> Result<IsolationReport> {
    let r = opts.isolation_radius;
    let count = preimages.len().min(opts.isolation_boxes);
    let mut values = Vec::new();
    for k in 0..count {
        let p = &preimages[k * preimages.len() / count.max(1)];
        let region = ScanRegion {
            charts: vec![p.chart.clone()],
            min: p.coords.iter().map(|x| x - r).collect(),
            max: p.coords.iter().map(|x| x + r).collect(),
            step: vec![r / 2.0; p.coords.len()],
        };
        let found = find_critical(sys, &region, scan)?;
        values.extend(found.points.into_iter().filter(|q| q.wtype == Some(surface.wtype)).map(|q| q.value));
    }
    isolation_from_values(surface, &values, r, opts.isolation_tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceSample {
    pub chart: String,
    pub coords: Vec<f64>,
    pub value: Vec<f64>,
    /// Value of the transverse component.
    pub t: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
    pub truncated: bool,
    pub diagnostics: Vec<String>,
}

impl Trace {
    /// Strictly increasing in `t`, so the traced set is an arc and not a loop.
    pub fn is_single_valued(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].t > w[0].t)
    }
}

/// Rank residual of `critical::rank_residual` plus the row of `dF_k`, with
/// the point's values.
fn traced_system(sys: &MomentMapSystem, chart: &str, p: &[f64], r: usize, k: usize) -> Result<(Vec<f64>, Mat, Vec<f64>)> {
    let der = sys.derivatives(chart, p)?;
    let (mut res, jac) = rank_residual(&der, r)?;
    let rows = jac.nrows();
    let mut full = jac.insert_row(rows, 0.0);
    let last = full.nrows() - 1;
    for l in 0..p.len() {
        full[(last, l)] = der.jacobian[(k, l)];
    }
    res.push(0.0);
    Ok((res, full, der.values))
}

fn correct(sys: &MomentMapSystem, chart: &str, start: &[f64], r: usize, k: usize, target: f64) -> Result<Vec<f64>> {
    let mut p = start.to_vec();
    for _ in 0..40 {
        let (mut res, jac, values) = traced_system(sys, chart, &p, r, k)?;
        let last = res.len() - 1;
        res[last] = values[k] - target;
        if norm(&res) < 1e-14 {
            return Ok(p);
        }
        let rhs: Vec<f64> = res.iter().map(|x| -x).collect();
        let step = lstsq_min_norm(&jac, &rhs, 1e-12)?;
        p.iter_mut().zip(&step).for_each(|(a, b)| *a += b);
        if !sys.in_domain(chart, &p) {
            return Err(Error::Chart("corrector left the chart".into()));
        }
        if norm(&step[..p.len()]) < 1e-15 {
            break;
        }
    }
    let (mut res, _, values) = traced_system(sys, chart, &p, r, k)?;
    let last = res.len() - 1;
    res[last] = values[k] - target;
    if norm(&res) <= 1e-9 {
        Ok(p)
    } else {
        Err(Error::Numerical(format!("corrector residual {:.3e}", norm(&res))))
    }
}

/// Predictor–corrector continuation of the focus-focus-transverse set along
/// the last component, `max_steps` steps of size `step` in each direction.
pub fn trace_curve(
    sys: &MomentMapSystem,
    seed: &CriticalPoint,
    step: f64,
    max_steps: usize,
    scan: &ScanOptions,
) -> Result<Trace> {
    let Some(w) = seed.wtype.filter(|w| w.k_f() == 1 && w.k_x() == 1) else {
        return Err(Error::Precondition(format!("trace seed must be focus-focus-transverse, got {:?}", seed.wtype)));
    };
    if !(step > 0.0) {
        return Err(Error::Precondition("continuation step must be positive".into()));
    }
    let n = sys.n();
    let k = n - 1;
    let r = w.k_x();
    let t0 = seed.value[k];
    let mut samples = vec![TraceSample { chart: seed.chart.clone(), coords: seed.coords.clone(), value: seed.value.clone(), t: t0 }];
    let mut diagnostics = Vec::new();
    let mut truncated = false;
    for dir in [1.0, -1.0] {
        let (mut chart, mut p) = (seed.chart.clone(), seed.coords.clone());
        for s in 1..=max_steps {
            (chart, p) = sys.best_chart(&chart, &p)?;
            let target = t0 + dir * s as f64 * step;
            let (_, jac, values) = traced_system(sys, &chart, &p, r, k)?;
            let mut rhs = vec![0.0; jac.nrows()];
            let last = rhs.len() - 1;
            rhs[last] = target - values[k];
            let delta = lstsq_min_norm(&jac, &rhs, 1e-12)?;
            let guess: Vec<f64> = p.iter().zip(&delta).map(|(a, b)| a + b).collect(); // zip stops at 2n
            if !sys.in_search_domain(&chart, &guess) {
                diagnostics.push(format!("boundary reached at t = {target}"));
                break;
            }
            let q = match correct(sys, &chart, &guess, r, k, target) {
                Ok(q) => q,
                Err(e) => {
                    truncated = true;
                    diagnostics.push(format!("corrector stopped at t = {target}: {e}"));
                    break;
                }
            };
            let point = classify_point(sys, &chart, &q, scan)?;
            if point.wtype != Some(w) || numerical_rank(&sys.jacobian(&chart, &q)?, scan.rank_tol)? != r {
                diagnostics.push(format!("type changed to {:?} at t = {target}", point.wtype));
                break;
            }
            samples.push(TraceSample { chart: chart.clone(), coords: q.clone(), value: point.value, t: target });
            p = q;
        }
    }
    samples.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(Trace { samples, truncated, diagnostics })
}

/// Single-linkage clusters of `values` with linking distance `link`.
pub fn components(values: &[Vec<f64>], link: f64) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..values.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a][0].total_cmp(&values[b][0]));
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if values[j][0] > values[i][0] + link {
                break;
            }
            if dist(&values[i], &values[j]) <= link {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..values.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct NodalReport {
    pub system: String,
    pub wtype: WilliamsonType,
    pub cloud_size: usize,
    pub surface: NodalSurface,
    pub trace: Option<Trace>,
    pub isolation: IsolationReport,
    pub components: usize,
    /// Largest deviation of graph samples from the closed-form nodal value.
    pub known_error: Option<f64>,
    pub trace_known_error: Option<f64>,
    pub checks: Vec<Check>,
}

impl NodalReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Projection of the cloud onto `(f_axis, f_1)` with the traced curve.
    pub fn plot(&self, axis: usize) -> Plot {
        let points = self.surface.samples.iter().map(|s| self.surface.point(s)).map(|y| (y[axis], y[0])).collect();
        let curves = self.trace.iter().map(|t| t.samples.iter().map(|s| (s.value[axis], s.value[0])).collect()).collect();
        Plot {
            title: format!("{} critical values of {}", self.wtype, self.system),
            x_label: format!("f{}", axis + 1),
            y_label: "f1".into(),
            points,
            curves,
        }
    }
}

fn known_error(sys: &MomentMapSystem, values: impl Iterator<Item = Vec<f64>>, range: f64) -> Option<f64> {
    let n = sys.n();
    let mut worst: Option<f64> = None;
    for y in values {
        let t = y[n - 1];
        if t.abs() > range + 1e-12 {
            continue;
        }
        let known = sys.known_nodal_value(t)?;
        let e = y.iter().zip(&known).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = Some(worst.map_or(e, |w: f64| w.max(e)));
    }
    worst
}

/// Focus-focus type with the most points, preferring larger `k_x`.
pub fn nodal_type(strata: &StratumMap) -> Option<WilliamsonType> {
    strata
        .strata
        .iter()
        .filter(|(w, pts)| w.k_f() == 1 && !pts.is_empty())
        .max_by_key(|(w, pts)| (w.k_x(), pts.len()))
        .map(|(w, _)| *w)
}

/// Full pipeline on scanned strata; `None` when no focus-focus points exist.
pub fn analyze(
    sys: &MomentMapSystem,
    strata: &StratumMap,
    opts: &NodalOptions,
    scan: &ScanOptions,
) -> Result<Option<NodalReport>> {
    let Some(w) = nodal_type(strata) else { return Ok(None) };
    let cloud = collect_values(strata, &w, opts.merge_tol)?;
    let surface = build_surface(&cloud, opts)?;
    let points = strata.points(&w);
    let trace = if w.k_x() == 1 {
        let k = sys.n() - 1;
        let seed = points.iter().min_by(|a, b| a.value[k].abs().total_cmp(&b.value[k].abs())).expect("non-empty stratum");
        Some(trace_curve(sys, seed, opts.step, opts.max_steps, scan)?)
    } else {
        None
    };
    let mut preimages: Vec<CriticalPoint> = points.to_vec();
    let k = sys.n() - 1;
    preimages.sort_by(|a, b| a.value[k].total_cmp(&b.value[k]).then(cmp_t(&a.coords, &b.coords)));
    let isolation = isolation_check(sys, &surface, &preimages, opts, scan)?;
    let mut all_values = cloud.values.clone();
    if let Some(t) = &trace {
        all_values.extend(t.samples.iter().map(|s| s.value.clone()));
    }
    let n_components = components(&all_values, 3.0 * opts.step).len();
    let known = known_error(sys, surface.samples.iter().map(|s| surface.point(s)), opts.known_range);
    let trace_known = trace.as_ref().and_then(|t| known_error(sys, t.samples.iter().map(|s| s.value.clone()), opts.known_range));

    let mut checks = vec![
        Check::at_most("plane-residual", surface.plane_residual, opts.plane_tol),
        Check::at_most("graph-residual", surface.graph_residual, opts.graph_tol),
        Check::flag("integer-directions", surface.v.len() == w.k_x()),
        Check::flag("isolated", isolation.isolated),
        Check::flag("finitely-many-components", n_components >= 1),
    ];
    if let Some(e) = known {
        checks.push(Check::at_most("graph-matches-closed-form", e, opts.known_tol));
    }
    if let Some(t) = &trace {
        checks.push(Check::flag("trace-single-valued", t.is_single_valued()));
        if let Some(e) = trace_known {
            checks.push(Check::at_most("trace-matches-closed-form", e, opts.trace_tol));
        }
    }
    Ok(Some(NodalReport {
        system: sys.name().to_string(),
        wtype: w,
        cloud_size: cloud.values.len(),
        surface,
        trace,
        isolation,
        components: n_components,
        known_error: known,
        trace_known_error: trace_known,
        checks,
    }))
}
