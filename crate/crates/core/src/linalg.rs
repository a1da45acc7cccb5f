//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;

pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Mat {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = m.clone().try_svd(false, false, f64::EPSILON, 500).ok_or_else(|| {
        Error::Numerical("SVD did not converge".into())
    })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Full SVD with singular triplets sorted by decreasing singular value.
pub struct SortedSvd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v_t: Mat,
}

pub fn svd_sorted(m: &Mat) -> Result<SortedSvd> {
    let (r, c) = m.shape();
    // Thin SVD of a wide matrix only yields min(r, c) left vectors; pad square.
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 500)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = Mat::from_fn(r, k, |i, j| u[(i, order[j])]);
    let vt_sorted = Mat::from_fn(k, c, |i, j| v_t[(order[i], j)]);
    Ok(SortedSvd { u: u_sorted, s, v_t: vt_sorted })
}

/// Orthonormal basis (columns) of the left null space complement: returns the
/// full `r × r` orthogonal factor of `m` with columns sorted by singular value.
/// Columns beyond `min(r, c)` span the part of the left null space that a thin
/// SVD cannot see.
pub fn left_singular_basis(m: &Mat) -> Result<(Mat, Vec<f64>)> {
    let (r, c) = m.shape();
    if r <= c {
        let svd = svd_sorted(m)?;
        return Ok((svd.u, svd.s));
    }
    // Tall matrix: go through the square Gram matrix instead.
    let g = m * m.transpose();
    let eig = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let u = Mat::from_fn(r, r, |i, j| eig.eigenvectors[(i, order[j])]);
    let s = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    Ok((u, s))
}

/// Minimum-norm least-squares solution of `a x = b`, truncating singular values
/// below `rel * s_max`.
pub fn lstsq_min_norm(a: &Mat, b: &[f64], rel: f64) -> Result<Vec<f64>> {
    let svd = svd_sorted(a)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; a.ncols()];
    if smax == 0.0 {
        return Ok(x);
    }
    for (k, &sk) in svd.s.iter().enumerate() {
        if sk <= rel * smax {
            continue;
        }
        let mut coef = 0.0;
        for i in 0..a.nrows() {
            coef += svd.u[(i, k)] * b[i];
        }
        coef /= sk;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * svd.v_t[(k, j)];
        }
    }
    Ok(x)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Spectral condition number; infinite for singular input.
pub fn condition_number(m: &Mat) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        _ => Ok(f64::INFINITY),
    }
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &Mat) -> Mat {
    let norm = a.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    let squarings = norm.log2().ceil().max(0.0) as i32 + 1;
    let scaled = a / 2f64.powi(squarings);
    let n = a.nrows();
    let mut term = Mat::identity(n, n);
    let mut sum = Mat::identity(n, n);
    for k in 1..20 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
