//! Small dense linear algebra used by the graph and the oracles.
//!
//! Matrices are row-major `Vec<Vec<f64>>`; sizes here are the number of
//! clients, so dense O(N^3) routines are fine.

use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<f64>>;

pub fn zeros(n: usize, m: usize) -> Matrix {
    vec![vec![0.0; m]; n]
}

pub fn identity(n: usize) -> Matrix {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    a
}

pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_t_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    let m = a.first().map_or(0, Vec::len);
    let mut y = vec![0.0; m];
    for (row, xi) in a.iter().zip(x) {
        for (yj, aij) in y.iter_mut().zip(row) {
            *yj += aij * xi;
        }
    }
    y
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// All eigenvalues of a symmetric matrix, ascending.
///
/// Householder reduction to tridiagonal form followed by the implicit QL
/// algorithm with Wilkinson-style shifts.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let (mut d, mut e) = tridiagonalize(a.clone());
    tql(&mut d, &mut e);
    d.sort_by(|x, y| x.total_cmp(y));
    d
}

/// Returns the diagonal and sub-diagonal (`e[i]` couples `i-1` and `i`).
fn tridiagonalize(mut z: Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = z.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = z[i][..i].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = z[i][l];
            } else {
                for k in 0..i {
                    z[i][k] /= scale;
                    h += z[i][k] * z[i][k];
                }
                let f = z[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i][l] = f - g;
                let mut f = 0.0;
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[j][k] * z[i][k];
                    }
                    for k in (j + 1)..i {
                        g += z[k][j] * z[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * z[i][j];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    let f = z[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[j][k] -= f * e[k] + g * z[i][k];
                    }
                }
            }
        } else {
            e[i] = z[i][l];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = z[i][i];
    }
    (d, e)
}

fn tql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m as isize - 1;
            let mut deflated = false;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == 0.0 {
                    d[iu + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + 2.0 * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                i -= 1;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return if n == 0 { Ok(Vec::new()) } else { Err(Error::SingularSystem) };
    }
    let mut m: Matrix = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col].abs() <= 1e-13 * scale {
            return Err(Error::SingularSystem);
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let tail: f64 = ((col + 1)..n).map(|k| m[col][k] * x[k]).sum();
        x[col] = (x[col] - tail) / m[col][col];
    }
    Ok(x)
}

/// Largest singular value of a dense matrix by power iteration on `AᵀA`.
pub fn spectral_norm(a: &Matrix, tol: f64, max_iter: usize) -> f64 {
    let m = a.first().map_or(0, Vec::len);
    if m == 0 {
        return 0.0;
    }
    // deterministic start with no special alignment to sparse eigenvectors
    let mut v: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i * 7919 % 97) as f64)).collect();
    let n0 = norm_sq(&v).sqrt();
    v.iter_mut().for_each(|x| *x /= n0);
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let w = mat_t_vec(a, &mat_vec(a, &v));
        let nw = norm_sq(&w).sqrt();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - estimate).abs() <= tol * next.max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}
