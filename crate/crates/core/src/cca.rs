//! Classical linear canonical correlation analysis.
//!
//! Both views are centered and whitened through the symmetric inverse
//! square root of their covariance, the whitened cross-covariance is
//! decomposed by SVD, and the singular values become the canonical
//! correlations, sorted descending. Whitening clamps covariance
//! eigenvalues from below at `1e-6 * trace / dim`, which leaves
//! well-conditioned view directions exactly unchanged while keeping the
//! decomposition defined for degenerate (e.g. dead-feature) directions.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

const EIGENVALUE_FLOOR_FACTOR: f64 = 1e-6;
const SCHEMA: &str = "cca/1";

/// A fitted CCA model mapping raw inputs of both views to canonical
/// components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CcaModel {
    pub schema: String,
    /// Projection for the first view, `p x d`.
    #[serde(with = "crate::serde_util::mat2")]
    pub u: Array2<f64>,
    /// Projection for the second view, `q x d`.
    #[serde(with = "crate::serde_util::mat2")]
    pub v: Array2<f64>,
    /// Canonical correlations in `[0, 1]`, non-increasing, length `min(p, q)`.
    #[serde(with = "crate::serde_util::vec1")]
    pub correlations: Array1<f64>,
    /// Column means of the first view at fit time.
    #[serde(with = "crate::serde_util::vec1")]
    pub means_1: Array1<f64>,
    /// Column means of the second view at fit time.
    #[serde(with = "crate::serde_util::vec1")]
    pub means_2: Array1<f64>,
}

impl CcaModel {
    /// Project both views onto the canonical components.
    pub fn transform(
        &self,
        b1: &ArrayView2<f64>,
        b2: &ArrayView2<f64>,
    ) -> Result<(Array2<f64>, Array2<f64>)> {
        if b1.ncols() != self.u.nrows() {
            return Err(Error::DimensionMismatch {
                what: "cca transform view 1 columns",
                expected: self.u.nrows(),
                got: b1.ncols(),
            });
        }
        if b2.ncols() != self.v.nrows() {
            return Err(Error::DimensionMismatch {
                what: "cca transform view 2 columns",
                expected: self.v.nrows(),
                got: b2.ncols(),
            });
        }
        Ok((
            project(b1, &self.means_1, &self.u),
            project(b2, &self.means_2, &self.v),
        ))
    }

    /// Project only the first view (used by the one-sided surrogate analysis).
    pub fn transform_first(&self, b1: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if b1.ncols() != self.u.nrows() {
            return Err(Error::DimensionMismatch {
                what: "cca transform view 1 columns",
                expected: self.u.nrows(),
                got: b1.ncols(),
            });
        }
        Ok(project(b1, &self.means_1, &self.u))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: CcaModel = serde_json::from_str(text)?;
        if model.schema != SCHEMA {
            return Err(Error::Format(format!(
                "unsupported CCA schema {:?}, expected {SCHEMA:?}",
                model.schema
            )));
        }
        Ok(model)
    }
}

fn project(b: &ArrayView2<f64>, means: &Array1<f64>, w: &Array2<f64>) -> Array2<f64> {
    let mut centered = b.to_owned();
    for mut row in centered.rows_mut() {
        row -= means;
    }
    centered.dot(w)
}

/// Fit CCA between two views with equal row counts.
pub fn fit_cca(b1: &ArrayView2<f64>, b2: &ArrayView2<f64>) -> Result<CcaModel> {
    let n = b1.nrows();
    let p = b1.ncols();
    let q = b2.ncols();
    if b2.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "cca rows",
            expected: n,
            got: b2.nrows(),
        });
    }
    if p == 0 || q == 0 {
        return Err(Error::Config("cca views need at least one column".into()));
    }
    let needed = p.max(q) + 2;
    if n < needed {
        return Err(Error::SampleSize {
            what: "fit_cca",
            needed,
            got: n,
        });
    }
    linalg::ensure_finite(b1, "cca view 1")?;
    linalg::ensure_finite(b2, "cca view 2")?;

    let (x1, means_1) = linalg::center_columns(b1);
    let (x2, means_2) = linalg::center_columns(b2);
    let denom = (n - 1) as f64;
    let s11 = x1.t().dot(&x1) / denom;
    let s22 = x2.t().dot(&x2) / denom;
    let s12 = x1.t().dot(&x2) / denom;

    let w1 = linalg::inv_sqrt_clamped(&s11, eigen_floor(&s11));
    let w2 = linalg::inv_sqrt_clamped(&s22, eigen_floor(&s22));

    let k = w1.dot(&s12).dot(&w2);
    let svd = linalg::svd_thin(&k);
    let d = p.min(q);

    let mut u = w1.dot(&svd.u.slice(ndarray::s![.., ..d]));
    let mut v = w2.dot(&svd.v.slice(ndarray::s![.., ..d]));
    let correlations = svd.s.slice(ndarray::s![..d]).mapv(|s| s.clamp(0.0, 1.0));

    // Deterministic signs: the largest-magnitude entry of each u column is
    // made positive, flipping the paired v column with it.
    for j in 0..d {
        let col = u.column(j);
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for (i, value) in col.iter().enumerate() {
            if value.abs() > best_abs {
                best_abs = value.abs();
                best = i;
            }
        }
        if u[[best, j]] < 0.0 {
            u.column_mut(j).mapv_inplace(|x| -x);
            v.column_mut(j).mapv_inplace(|x| -x);
        }
    }

    Ok(CcaModel {
        schema: SCHEMA.to_string(),
        u,
        v,
        correlations,
        means_1,
        means_2,
    })
}

fn eigen_floor(cov: &Array2<f64>) -> f64 {
    let trace: f64 = cov.diag().sum();
    if trace > 0.0 {
        EIGENVALUE_FLOOR_FACTOR * trace / cov.nrows() as f64
    } else {
        1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, s, Axis};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn randn(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = seeding::derive_rng(seed, &[]);
        Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
    }

    #[test]
    fn identical_views_have_unit_correlations() {
        let b = randn(400, 3, 1);
        let model = fit_cca(&b.view(), &b.view()).unwrap();
        for c in model.correlations.iter() {
            assert_abs_diff_eq!(*c, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn univariate_reduces_to_absolute_pearson() {
        let a = randn(300, 1, 2);
        let b = a.mapv(|v| -0.6 * v) + randn(300, 1, 3).mapv(|v| 0.8 * v);
        let model = fit_cca(&a.view(), &b.view()).unwrap();
        let expected = linalg::pearson(&a.column(0), &b.column(0)).abs();
        assert_abs_diff_eq!(model.correlations[0], expected, epsilon = 1e-9);
    }

    #[test]
    fn independent_views_have_small_correlations() {
        let a = randn(10_000, 2, 4);
        let b = randn(10_000, 2, 5);
        let model = fit_cca(&a.view(), &b.view()).unwrap();
        for c in model.correlations.iter() {
            assert!(*c < 0.05, "null correlation too large: {c}");
        }
    }

    #[test]
    fn training_round_trip_reproduces_correlations() {
        let shared = randn(2_000, 2, 6);
        let a = linalg::hstack(&[shared.view(), randn(2_000, 1, 7).view()]);
        let b = linalg::hstack(&[shared.view(), randn(2_000, 1, 8).view()]);
        let model = fit_cca(&a.view(), &b.view()).unwrap();
        let (c1, c2) = model.transform(&a.view(), &b.view()).unwrap();
        for j in 0..model.correlations.len() {
            let r = linalg::pearson(&c1.column(j), &c2.column(j));
            assert_abs_diff_eq!(r, model.correlations[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn components_are_mutually_uncorrelated() {
        let shared = randn(3_000, 2, 9);
        let a = linalg::hstack(&[shared.view(), randn(3_000, 2, 10).view()]);
        let b = linalg::hstack(&[shared.view(), randn(3_000, 2, 11).view()]);
        let model = fit_cca(&a.view(), &b.view()).unwrap();
        let (c1, c2) = model.transform(&a.view(), &b.view()).unwrap();
        let d = model.correlations.len();
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    let cross = linalg::pearson(&c1.column(i), &c2.column(j));
                    assert_abs_diff_eq!(cross, 0.0, epsilon = 1e-6);
                    let within_1 = linalg::pearson(&c1.column(i), &c1.column(j));
                    assert_abs_diff_eq!(within_1, 0.0, epsilon = 1e-6);
                    let within_2 = linalg::pearson(&c2.column(i), &c2.column(j));
                    assert_abs_diff_eq!(within_2, 0.0, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn single_row_transform_is_fine() {
        let a = randn(100, 2, 12);
        let b = randn(100, 2, 13);
        let model = fit_cca(&a.view(), &b.view()).unwrap();
        let row_a = a.slice(s![0..1, ..]).to_owned();
        let row_b = b.slice(s![0..1, ..]).to_owned();
        let (c1, c2) = model.transform(&row_a.view(), &row_b.view()).unwrap();
        assert_eq!(c1.nrows(), 1);
        assert_eq!(c2.nrows(), 1);
    }

    #[test]
    fn fresh_sample_reproduces_correlations() {
        // Same joint distribution, new draw: empirical correlation of the
        // leading pair stays near the fitted value.
        let make = |seed: u64| {
            let shared = randn(10_000, 1, seed);
            let a = linalg::hstack(&[
                shared.view(),
                randn(10_000, 1, seed + 50).view(),
            ]);
            let b = linalg::hstack(&[
                shared.view(),
                randn(10_000, 1, seed + 60).view(),
            ]);
            (a, b)
        };
        let (a_fit, b_fit) = make(14);
        let model = fit_cca(&a_fit.view(), &b_fit.view()).unwrap();
        let (a_new, b_new) = make(15);
        let (c1, c2) = model.transform(&a_new.view(), &b_new.view()).unwrap();
        let r = linalg::pearson(&c1.column(0), &c2.column(0));
        assert!(
            (r - model.correlations[0]).abs() < 0.05,
            "fresh-sample correlation {r} vs fitted {}",
            model.correlations[0]
        );
    }

    #[test]
    fn affine_invariance_of_correlations() {
        let shared = randn(2_000, 2, 16);
        let a = linalg::hstack(&[shared.view(), randn(2_000, 1, 17).view()]);
        let b = linalg::hstack(&[shared.view(), randn(2_000, 1, 18).view()]);
        let transform = array![[2.0, 0.1, 0.0], [0.0, 0.5, 0.3], [1.0, 0.0, 1.0]];
        let shift = array![5.0, -3.0, 0.5];
        let mut a2 = a.dot(&transform);
        for mut row in a2.rows_mut() {
            row += &shift;
        }
        let base = fit_cca(&a.view(), &b.view()).unwrap();
        let moved = fit_cca(&a2.view(), &b.view()).unwrap();
        for (x, y) in base.correlations.iter().zip(moved.correlations.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-6);
        }
    }

    #[test]
    fn symmetry_in_view_order() {
        let a = randn(1_000, 3, 19);
        let b = randn(1_000, 2, 20) + &a.slice(s![.., 0..2]);
        let fwd = fit_cca(&a.view(), &b.view()).unwrap();
        let rev = fit_cca(&b.view(), &a.view()).unwrap();
        for (x, y) in fwd.correlations.iter().zip(rev.correlations.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    /// Brute-force 2x2 oracle: canonical correlations are the square roots
    /// of the eigenvalues of inv(S11) S12 inv(S22) S21, computed here with
    /// explicit 2x2 inverse and closed-form eigenvalues.
    fn oracle_correlations_2x2(a: &Array2<f64>, b: &Array2<f64>) -> Vec<f64> {
        let n = a.nrows() as f64;
        let ac = a - &a.mean_axis(Axis(0)).unwrap();
        let bc = b - &b.mean_axis(Axis(0)).unwrap();
        let s11 = ac.t().dot(&ac) / (n - 1.0);
        let s22 = bc.t().dot(&bc) / (n - 1.0);
        let s12 = ac.t().dot(&bc) / (n - 1.0);
        let inv2 = |m: &Array2<f64>| {
            let det = m[[0, 0]] * m[[1, 1]] - m[[0, 1]] * m[[1, 0]];
            array![
                [m[[1, 1]] / det, -m[[0, 1]] / det],
                [-m[[1, 0]] / det, m[[0, 0]] / det]
            ]
        };
        let m = inv2(&s11).dot(&s12).dot(&inv2(&s22)).dot(&s12.t());
        let tr = m[[0, 0]] + m[[1, 1]];
        let det = m[[0, 0]] * m[[1, 1]] - m[[0, 1]] * m[[1, 0]];
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        vec![l1.max(0.0).sqrt(), l2.max(0.0).sqrt()]
    }

    #[test]
    fn two_by_two_matches_eigen_definition() {
        for seed in 0..4u64 {
            let shared = randn(1_500, 1, 30 + seed);
            let a = linalg::hstack(&[
                shared.view(),
                randn(1_500, 1, 40 + seed).view(),
            ]);
            let b = linalg::hstack(&[
                (shared.mapv(|v| 0.8 * v) + randn(1_500, 1, 50 + seed).mapv(|v| 0.4 * v)).view(),
                randn(1_500, 1, 60 + seed).view(),
            ]);
            let model = fit_cca(&a.view(), &b.view()).unwrap();
            let oracle = oracle_correlations_2x2(&a, &b);
            for (got, want) in model.correlations.iter().zip(oracle.iter()) {
                assert_abs_diff_eq!(got, want, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn univariate_projection_is_pure_scaling() {
        // With scalar views the only recoverable component is the input
        // itself up to scale: u is a single entry acting as a scaling.
        let a = randn(500, 1, 70);
        let b = a.mapv(|v| 2.0 * v) + randn(500, 1, 71).mapv(|v| 0.1 * v);
        let model = fit_cca(&a.view(), &b.view()).unwrap();
        assert_eq!(model.u.dim(), (1, 1));
        let (c1, _) = model.transform(&a.view(), &b.view()).unwrap();
        let scale = model.u[[0, 0]];
        for i in 0..a.nrows() {
            let expect = (a[[i, 0]] - model.means_1[0]) * scale;
            assert_abs_diff_eq!(c1[[i, 0]], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_too_few_rows() {
        let a = randn(3, 3, 80);
        let b = randn(3, 3, 81);
        assert!(matches!(
            fit_cca(&a.view(), &b.view()),
            Err(Error::SampleSize { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = randn(50, 2, 82);
        a[[0, 0]] = f64::NAN;
        let b = randn(50, 2, 83);
        assert!(matches!(
            fit_cca(&a.view(), &b.view()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let a = randn(200, 2, 84);
        let b = randn(200, 2, 85);
        let model = fit_cca(&a.view(), &b.view()).unwrap();
        let text = model.to_json().unwrap();
        let restored = CcaModel::from_json(&text).unwrap();
        assert_eq!(model.u, restored.u);
        assert_eq!(model.v, restored.v);
        assert_eq!(model.correlations, restored.correlations);
    }
}
