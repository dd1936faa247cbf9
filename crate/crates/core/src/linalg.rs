//! Dense linear algebra for small matrices.
//!
//! Everything here targets the dimensions this crate actually sees
//! (feature and latent spaces up to a few hundred columns), so the
//! implementations favor simplicity and determinism over asymptotics:
//! cyclic Jacobi for symmetric eigendecompositions, one-sided Jacobi
//! (Hestenes) for the SVD, and Cholesky for SPD solves.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix: eigenvalues in descending
/// order, eigenvectors as the corresponding columns.
pub fn sym_eigen(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols(), "sym_eigen requires a square matrix");
    let mut m = a.clone();
    let mut vectors = Array2::<f64>::eye(n);
    if n <= 1 {
        return (m.diag().to_owned(), vectors);
    }

    let frob = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q of m.
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = vectors[[k, p]];
                    let vkq = vectors[[k, q]];
                    vectors[[k, p]] = c * vkp - s * vkq;
                    vectors[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut values: Vec<(f64, usize)> = m.diag().iter().cloned().zip(0..n).collect();
    values.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = Array1::from_iter(values.iter().map(|(v, _)| *v));
    let mut sorted_vectors = Array2::<f64>::zeros((n, n));
    for (new_col, (_, old_col)) in values.iter().enumerate() {
        sorted_vectors
            .column_mut(new_col)
            .assign(&vectors.column(*old_col));
    }
    (eigenvalues, sorted_vectors)
}

/// Thin singular value decomposition `a = u * diag(s) * v^T`.
pub struct Svd {
    /// Left singular vectors, `m x r` with `r = min(m, n)`.
    pub u: Array2<f64>,
    /// Singular values, descending.
    pub s: Array1<f64>,
    /// Right singular vectors, `n x r`.
    pub v: Array2<f64>,
}

/// One-sided Jacobi SVD. Columns of the work matrix are rotated until
/// pairwise orthogonal; singular values are the resulting column norms.
pub fn svd_thin(a: &Array2<f64>) -> Svd {
    let (m, n) = a.dim();
    if m < n {
        let t = svd_thin(&a.t().to_owned());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }

    let mut w = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * scale.max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 60;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for k in 0..m {
                    let wi = w[[k, i]];
                    let wj = w[[k, j]];
                    alpha += wi * wi;
                    beta += wj * wj;
                    gamma += wi * wj;
                }
                if gamma.abs() <= tol * tol || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let wi = w[[k, i]];
                    let wj = w[[k, j]];
                    w[[k, i]] = c * wi - s * wj;
                    w[[k, j]] = s * wi + c * wj;
                }
                for k in 0..n {
                    let vi = v[[k, i]];
                    let vj = v[[k, j]];
                    v[[k, i]] = c * vi - s * vj;
                    v[[k, j]] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<(f64, usize)> = (0..n)
        .map(|j| (w.column(j).dot(&w.column(j)).sqrt(), j))
        .collect();
    norms.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = Array2::<f64>::zeros((m, n));
    let mut s = Array1::<f64>::zeros(n);
    let mut v_sorted = Array2::<f64>::zeros((n, n));
    for (new_col, (norm, old_col)) in norms.iter().enumerate() {
        s[new_col] = *norm;
        v_sorted.column_mut(new_col).assign(&v.column(*old_col));
        if *norm > 0.0 {
            let col = w.column(*old_col).mapv(|x| x / norm);
            u.column_mut(new_col).assign(&col);
        }
    }
    Svd { u, s, v: v_sorted }
}

/// Lower-triangular Cholesky factor of an SPD matrix, or `None` if the
/// matrix is not (numerically) positive definite.
pub fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return None;
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` for each column of `b` given the Cholesky factor.
pub fn cholesky_solve(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let d = b.ncols();
    let mut x = b.clone();
    for col in 0..d {
        // Forward substitution: L y = b.
        for i in 0..n {
            let mut sum = x[[i, col]];
            for k in 0..i {
                sum -= l[[i, k]] * x[[k, col]];
            }
            x[[i, col]] = sum / l[[i, i]];
        }
        // Back substitution: L^T x = y.
        for i in (0..n).rev() {
            let mut sum = x[[i, col]];
            for k in (i + 1)..n {
                sum -= l[[k, i]] * x[[k, col]];
            }
            x[[i, col]] = sum / l[[i, i]];
        }
    }
    x
}

/// Symmetric inverse square root with an eigenvalue floor. Eigenvalues
/// below `floor` are clamped up to it before inversion, which leaves
/// well-conditioned directions untouched and only dampens degenerate ones.
pub fn inv_sqrt_clamped(a: &Array2<f64>, floor: f64) -> Array2<f64> {
    let (values, vectors) = sym_eigen(a);
    let n = a.nrows();
    let mut scaled = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let lambda = values[j].max(floor);
        let inv = 1.0 / lambda.sqrt();
        for i in 0..n {
            scaled[[i, j]] = vectors[[i, j]] * inv;
        }
    }
    scaled.dot(&vectors.t())
}

/// Column means.
pub fn col_means(a: &ArrayView2<f64>) -> Array1<f64> {
    a.mean_axis(Axis(0)).expect("non-empty matrix")
}

/// Column standard deviations with the `n - 1` denominator.
pub fn col_stds(a: &ArrayView2<f64>) -> Array1<f64> {
    let n = a.nrows();
    let means = col_means(a);
    let mut out = Array1::<f64>::zeros(a.ncols());
    if n < 2 {
        return out;
    }
    for j in 0..a.ncols() {
        let mut acc = 0.0;
        for i in 0..n {
            let d = a[[i, j]] - means[j];
            acc += d * d;
        }
        out[j] = (acc / (n as f64 - 1.0)).sqrt();
    }
    out
}

/// Subtract column means; returns the centered matrix and the means.
pub fn center_columns(a: &ArrayView2<f64>) -> (Array2<f64>, Array1<f64>) {
    let means = col_means(a);
    let mut centered = a.to_owned();
    for mut row in centered.rows_mut() {
        row -= &means;
    }
    (centered, means)
}

/// Pearson correlation of two equally long vectors; 0 when either side
/// has no variance.
pub fn pearson(a: &ArrayView1<f64>, b: &ArrayView1<f64>) -> f64 {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    if n < 2 {
        return 0.0;
    }
    let ma = a.mean().unwrap();
    let mb = b.mean().unwrap();
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..n {
        let da = a[i] - ma;
        let db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Horizontal concatenation of equally tall matrices.
pub fn hstack(parts: &[ArrayView2<f64>]) -> Array2<f64> {
    let rows = parts.first().map(|p| p.nrows()).unwrap_or(0);
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Array2::<f64>::zeros((rows, cols));
    let mut offset = 0;
    for part in parts {
        debug_assert_eq!(part.nrows(), rows);
        for j in 0..part.ncols() {
            out.column_mut(offset + j).assign(&part.column(j));
        }
        offset += part.ncols();
    }
    out
}

/// Reject matrices containing NaN or infinities.
pub fn ensure_finite(a: &ArrayView2<f64>, what: &'static str) -> Result<()> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what });
    }
    Ok(())
}
