//! Ordinary least squares and the coefficient of determination.
//!
//! `r_squared` is the workhorse of every evaluation in this crate: it fits a
//! linear probe on one half of the rows, scores it on the other half, averages
//! the per-output-dimension `1 - SSE/SST`, and clamps the result to `[0, 1]`.
//! Out-of-sample scoring is the default so that high-dimensional candidate
//! representations cannot inflate their scores by overfitting the probe;
//! `R2Mode::InSample` restores the naive behavior.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::seeding;

/// Fixed seed for the internal probe split; the split depends only on the
/// number of rows, so repeated scoring of aligned matrices is consistent.
const PROBE_SPLIT_SEED: u64 = 0x5253_5144;

/// Relative ridge added to the normal equations. Iterative refinement
/// removes its bias on well-conditioned problems, so it only matters when
/// the Gram matrix is (near-)singular.
const RIDGE_FACTOR: f64 = 1e-8;

/// A fitted multivariate linear model `y ≈ x · weights + intercept`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlsModel {
    /// Coefficients, `d_in x d_out`.
    #[serde(with = "crate::serde_util::mat2")]
    pub weights: Array2<f64>,
    /// Intercept, length `d_out`.
    #[serde(with = "crate::serde_util::vec1")]
    pub intercept: Array1<f64>,
    /// Number of rows the model was fitted on.
    pub fitted_on: usize,
}

impl OlsModel {
    pub fn predict(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.dot(&self.weights);
        for mut row in out.rows_mut() {
            row += &self.intercept;
        }
        out
    }
}

/// Least squares via normal equations with a tiny relative ridge, followed
/// by two steps of iterative refinement against the unregularized system.
pub fn fit_ols(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<OlsModel> {
    let n = x.nrows();
    let p = x.ncols();
    if y.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "fit_ols rows",
            expected: n,
            got: y.nrows(),
        });
    }
    if n < 2 {
        return Err(Error::SampleSize {
            what: "fit_ols",
            needed: 2,
            got: n,
        });
    }
    linalg::ensure_finite(x, "fit_ols inputs")?;
    linalg::ensure_finite(y, "fit_ols targets")?;

    let (xc, x_means) = linalg::center_columns(x);
    let (yc, y_means) = linalg::center_columns(y);

    let gram = xc.t().dot(&xc);
    let rhs = xc.t().dot(&yc);
    let trace: f64 = gram.diag().sum();
    let eps = if trace > 0.0 {
        RIDGE_FACTOR * trace / p as f64
    } else {
        // Centered x is identically zero; the ridge alone defines the
        // (all-zero) solution.
        1e-12
    };
    let mut regularized = gram.clone();
    for i in 0..p {
        regularized[[i, i]] += eps;
    }
    let l = linalg::cholesky(&regularized).ok_or(Error::RankDeficient { dims: p })?;

    let mut weights = linalg::cholesky_solve(&l, &rhs);
    for _ in 0..2 {
        let residual = &rhs - &gram.dot(&weights);
        weights += &linalg::cholesky_solve(&l, &residual);
    }

    let intercept = &y_means - &x_means.dot(&weights);
    Ok(OlsModel {
        weights,
        intercept,
        fitted_on: n,
    })
}

/// Whether the probe regression is scored on held-out rows (default) or on
/// the rows it was fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum R2Mode {
    OutOfSample,
    InSample,
}

#[derive(Debug, Clone, Copy)]
pub struct R2Options {
    pub mode: R2Mode,
    /// Seed for the probe split shuffle.
    pub split_seed: u64,
}

impl Default for R2Options {
    fn default() -> Self {
        Self {
            mode: R2Mode::OutOfSample,
            split_seed: PROBE_SPLIT_SEED,
        }
    }
}

/// Coefficient of determination of predicting `y` from `x`, averaged over
/// the columns of `y` and clamped to `[0, 1]`.
pub fn r_squared(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<f64> {
    r_squared_with(x, y, R2Options::default())
}

pub fn r_squared_with(x: &ArrayView2<f64>, y: &ArrayView2<f64>, opts: R2Options) -> Result<f64> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "r_squared rows",
            expected: n,
            got: y.nrows(),
        });
    }
    if y.ncols() == 0 {
        return Err(Error::Config("r_squared requires at least one y column".into()));
    }

    let (fit_rows, score_rows): (Vec<usize>, Vec<usize>) = match opts.mode {
        R2Mode::InSample => ((0..n).collect(), (0..n).collect()),
        R2Mode::OutOfSample => {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = seeding::derive_rng(opts.split_seed, &[seeding::domain::PROBE_SPLIT, n as u64]);
            order.shuffle(&mut rng);
            let half = n / 2;
            let mut fit: Vec<usize> = order[..half].to_vec();
            let mut score: Vec<usize> = order[half..].to_vec();
            fit.sort_unstable();
            score.sort_unstable();
            (fit, score)
        }
    };
    if fit_rows.len() < x.ncols() + 1 {
        return Err(Error::SampleSize {
            what: "r_squared probe fit",
            needed: x.ncols() + 1,
            got: fit_rows.len(),
        });
    }

    let gather = |m: &ArrayView2<f64>, rows: &[usize]| -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((rows.len(), m.ncols()));
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).assign(&m.row(r));
        }
        out
    };

    let x_fit = gather(x, &fit_rows);
    let y_fit = gather(y, &fit_rows);
    let x_score = gather(x, &score_rows);
    let y_score = gather(y, &score_rows);

    let model = fit_ols(&x_fit.view(), &y_fit.view())?;
    let predictions = model.predict(&x_score.view());

    let mut total = 0.0;
    let mut used = 0usize;
    for j in 0..y.ncols() {
        let col = y_score.column(j);
        let mean = col.mean().unwrap();
        let sst: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        if sst <= 0.0 {
            log::warn!("r_squared: y column {j} has zero variance on the scored rows; excluded");
            continue;
        }
        let sse: f64 = predictions
            .column(j)
            .iter()
            .zip(col.iter())
            .map(|(p, v)| (p - v) * (p - v))
            .sum();
        total += 1.0 - sse / sst;
        used += 1;
    }
    if used == 0 {
        return Err(Error::ZeroVariance {
            what: "every r_squared target column",
        });
    }
    Ok((total / used as f64).clamp(0.0, 1.0))
}

/// Convenience wrapper for a single response vector.
pub fn r_squared_vec(x: &ArrayView2<f64>, y: &ArrayView1<f64>) -> Result<f64> {
    let column = y
        .to_owned()
        .into_shape_with_order((y.len(), 1))
        .expect("vector reshape");
    r_squared(x, &column.view())
}
