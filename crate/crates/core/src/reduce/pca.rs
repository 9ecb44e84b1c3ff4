//! Principal component analysis via eigendecomposition of the centered
//! second-moment matrix.
//!
//! The decomposition runs on whichever of the covariance (features ×
//! features) or Gram (documents × documents) matrix is smaller, using a
//! cyclic Jacobi sweep, so no external linear-algebra backend is needed.
//! Intended for desk-scale widths, i.e. after feature selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FeatureMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal rows, one per component, strongest first. The sign is
    /// fixed so each row's largest-magnitude entry is positive.
    pub components: Vec<Vec<f64>>,
    /// Sample variance (denominator n-1) captured by each component.
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors), vectors indexed like the values.
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n <= 1 {
        return (a.iter().map(|r| r.first().copied().unwrap_or(0.0)).collect(), v);
    }

    let frobenius: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let tol = 1e-14 * frobenius.max(1e-300);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off < tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                if a[p][q].abs() <= tol / (n as f64) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

fn fix_sign(component: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in component.iter().enumerate() {
        if x.abs() > component[best].abs() {
            best = i;
        }
    }
    if component[best] < 0.0 {
        for x in component.iter_mut() {
            *x = -*x;
        }
    }
}

/// Fit a PCA model with `n_components` directions.
pub fn pca_fit(x: &FeatureMatrix, n_components: usize) -> Result<PcaModel> {
    let (n, d) = x.shape();
    if n_components == 0 {
        return Err(Error::config("n_components must be positive"));
    }
    let cap = n.saturating_sub(1).min(d);
    if n_components > cap {
        return Err(Error::config(format!(
            "n_components must not exceed min(n_docs - 1, n_features) = {cap}, got {n_components}"
        )));
    }

    let dense = x.densified();
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(dense.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = (0..n)
        .map(|i| dense.row(i).iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let denom = (n - 1) as f64;
    let total_variance: f64 = centered
        .iter()
        .flat_map(|r| r.iter())
        .map(|v| v * v)
        .sum::<f64>()
        / denom;
    if total_variance <= 1e-300 {
        return Err(Error::infeasible(
            "input has zero variance; principal directions are undefined",
        ));
    }

    let (eigenvalues, vectors) = if d <= n {
        // Covariance route: C = Xc' Xc / (n-1), D x D.
        let mut cov = vec![vec![0.0; d]; d];
        for row in &centered {
            for j in 0..d {
                if row[j] == 0.0 {
                    continue;
                }
                for k in j..d {
                    cov[j][k] += row[j] * row[k];
                }
            }
        }
        for j in 0..d {
            for k in j..d {
                cov[j][k] /= denom;
                cov[k][j] = cov[j][k];
            }
        }
        jacobi_eigen(cov)
    } else {
        // Gram route: G = Xc Xc' / (n-1); right directions recovered as
        // normalized Xc' u.
        let mut gram = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let dot: f64 = centered[i]
                    .iter()
                    .zip(&centered[j])
                    .map(|(a, b)| a * b)
                    .sum();
                gram[i][j] = dot / denom;
                gram[j][i] = gram[i][j];
            }
        }
        let (values, us) = jacobi_eigen(gram);
        let vectors: Vec<Vec<f64>> = us
            .iter()
            .map(|u| {
                let mut dir = vec![0.0; d];
                for (i, row) in centered.iter().enumerate() {
                    for (x, c) in dir.iter_mut().zip(row) {
                        *x += u[i] * c;
                    }
                }
                let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for x in &mut dir {
                        *x /= norm;
                    }
                }
                dir
            })
            .collect();
        (values, vectors)
    };

    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut components = Vec::with_capacity(n_components);
    let mut explained = Vec::with_capacity(n_components);
    for &idx in order.iter().take(n_components) {
        let value = eigenvalues[idx].max(0.0);
        if value <= 1e-12 * total_variance {
            return Err(Error::infeasible(format!(
                "component {} has no variance; the input rank is too low",
                components.len()
            )));
        }
        let mut component = vectors[idx].clone();
        fix_sign(&mut component);
        components.push(component);
        explained.push(value);
    }
    let ratio = explained.iter().map(|v| v / total_variance).collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
        explained_variance_ratio: ratio,
    })
}

/// Project rows onto the fitted directions: `(X - mean) * components'`.
pub fn pca_transform(x: &FeatureMatrix, model: &PcaModel) -> Result<FeatureMatrix> {
    x.ensure_width(model.mean.len())?;
    let (n, d) = x.shape();
    let k = model.components.len();
    let mut out = DenseMatrix::zeros(n, k);
    let mut buf = vec![0.0; d];
    for i in 0..n {
        x.copy_row_dense(i, &mut buf);
        for (j, m) in buf.iter_mut().zip(&model.mean) {
            *j -= m;
        }
        let row = out.row_mut(i);
        for (c, component) in model.components.iter().enumerate() {
            row[c] = component.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
    Ok(FeatureMatrix::Dense(out))
}

/// Map latent rows back to the input space: `Z * components + mean`.
pub fn pca_inverse_transform(z: &FeatureMatrix, model: &PcaModel) -> Result<FeatureMatrix> {
    z.ensure_width(model.components.len())?;
    let (n, k) = z.shape();
    let d = model.mean.len();
    let mut out = DenseMatrix::zeros(n, d);
    let mut buf = vec![0.0; k];
    for i in 0..n {
        z.copy_row_dense(i, &mut buf);
        let row = out.row_mut(i);
        row.copy_from_slice(&model.mean);
        for (c, component) in model.components.iter().enumerate() {
            for (r, x) in row.iter_mut().zip(component) {
                *r += buf[c] * x;
            }
        }
    }
    Ok(FeatureMatrix::Dense(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_have_one_dominant_direction() {
        let x = FeatureMatrix::dense(4, 2, vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let model = pca_fit(&x, 1).unwrap();
        let c = &model.components[0];
        let expected = 1.0 / 2.0f64.sqrt();
        assert!((c[0] - expected).abs() < 1e-10, "{c:?}");
        assert!((c[1] - expected).abs() < 1e-10);
        assert!((model.explained_variance_ratio[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn isotropic_gaussian_splits_variance_evenly() {
        let mut rng = crate::rng::seeded(12);
        let n = 4000;
        let values: Vec<f64> = (0..n * 2)
            .map(|_| crate::rng::standard_normal(&mut rng))
            .collect();
        let x = FeatureMatrix::dense(n, 2, values.clone());
        let model = pca_fit(&x, 2).unwrap();
        assert!((model.explained_variance_ratio[0] - 0.5).abs() < 0.05);
        assert!((model.explained_variance_ratio[1] - 0.5).abs() < 0.05);

        // Oracle: closed-form eigenvalues of the 2x2 sample covariance.
        let mean: [f64; 2] = {
            let mut m = [0.0; 2];
            for i in 0..n {
                m[0] += values[2 * i];
                m[1] += values[2 * i + 1];
            }
            [m[0] / n as f64, m[1] / n as f64]
        };
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let a = values[2 * i] - mean[0];
            let b = values[2 * i + 1] - mean[1];
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
        let denom = (n - 1) as f64;
        let (sxx, syy, sxy) = (sxx / denom, syy / denom, sxy / denom);
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let l1 = tr / 2.0 + disc;
        let l2 = tr / 2.0 - disc;
        assert!((model.explained_variance[0] - l1).abs() < 1e-8);
        assert!((model.explained_variance[1] - l2).abs() < 1e-8);
    }

    #[test]
    fn zero_components_is_a_config_error() {
        let x = FeatureMatrix::dense(3, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert!(matches!(pca_fit(&x, 0).unwrap_err(), Error::Config(_)));
    }

    #[test]
    fn all_equal_rows_are_a_zero_variance_error() {
        let x = FeatureMatrix::dense(3, 2, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(pca_fit(&x, 1).unwrap_err(), Error::Infeasible(_)));
    }

    #[test]
    fn transforming_the_mean_row_gives_zero() {
        let x = FeatureMatrix::dense(3, 2, vec![0.0, 0.0, 2.0, 0.0, 4.0, 6.0]);
        let model = pca_fit(&x, 2).unwrap();
        let mean_row = FeatureMatrix::dense(1, 2, model.mean.clone());
        let z = pca_transform(&mean_row, &model).unwrap();
        assert!(z.get(0, 0).abs() < 1e-12);
        assert!(z.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn full_rank_transform_round_trips() {
        let mut rng = crate::rng::seeded(5);
        let values: Vec<f64> = (0..8 * 3)
            .map(|_| crate::rng::standard_normal(&mut rng))
            .collect();
        let x = FeatureMatrix::dense(8, 3, values);
        let model = pca_fit(&x, 3).unwrap();
        let z = pca_transform(&x, &model).unwrap();
        let back = pca_inverse_transform(&z, &model).unwrap();
        for i in 0..8 {
            for j in 0..3 {
                assert!((back.get(i, j) - x.get(i, j)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn component_rows_are_orthonormal() {
        let mut rng = crate::rng::seeded(77);
        let values: Vec<f64> = (0..10 * 4)
            .map(|_| crate::rng::standard_normal(&mut rng))
            .collect();
        let x = FeatureMatrix::dense(10, 4, values);
        let model = pca_fit(&x, 3).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = model.components[a]
                    .iter()
                    .zip(&model.components[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8, "({a},{b}) -> {dot}");
            }
        }
        let mut ratios = model.explained_variance_ratio.clone();
        ratios.push(0.0);
        for w in ratios.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        assert!(model.explained_variance_ratio.iter().sum::<f64>() <= 1.0 + 1e-8);
    }

    #[test]
    fn gram_route_matches_covariance_route() {
        // 4 docs x 6 features forces the Gram route; compare against the
        // covariance route on the transposed problem structure.
        let mut rng = crate::rng::seeded(3);
        let values: Vec<f64> = (0..4 * 6)
            .map(|_| crate::rng::standard_normal(&mut rng))
            .collect();
        let x = FeatureMatrix::dense(4, 6, values);
        let model = pca_fit(&x, 2).unwrap();
        let z = pca_transform(&x, &model).unwrap();
        // Per-component variance of transformed fit data equals the
        // eigenvalue.
        for c in 0..2 {
            let mean: f64 = (0..4).map(|i| z.get(i, c)).sum::<f64>() / 4.0;
            let var: f64 = (0..4)
                .map(|i| (z.get(i, c) - mean).powi(2))
                .sum::<f64>()
                / 3.0;
            assert!(
                (var - model.explained_variance[c]).abs() < 1e-8,
                "component {c}: {var} vs {}",
                model.explained_variance[c]
            );
        }
    }
}
