//! Univariate K-best feature selection scored by the chi-square statistic
//! between class-conditional feature sums and their class-prior expectation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    ChiSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionModel {
    pub scores: Vec<f64>,
    /// The K highest-scoring feature indices, ascending. Ties favor the
    /// lower index.
    pub selected: Vec<usize>,
    pub scorer: Scorer,
}

/// Chi-square score per feature for a binary target on nonnegative features.
pub fn chi_square_scores(x: &FeatureMatrix, y: &[u8]) -> Result<Vec<f64>> {
    let (n_rows, n_cols) = x.shape();
    if y.len() != n_rows {
        return Err(Error::Mismatch {
            expected: n_rows,
            got: y.len(),
        });
    }
    let n_pos = y.iter().filter(|&&l| l == 1).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::config(
            "chi-square selection needs both classes present",
        ));
    }

    let mut observed = vec![[0.0f64; 2]; n_cols];
    for i in 0..n_rows {
        let class = y[i] as usize;
        for (j, v) in x.row_nonzeros(i) {
            if v < 0.0 {
                return Err(Error::config(format!(
                    "chi-square selection requires nonnegative features; found {v} at ({i}, {j})"
                )));
            }
            observed[j][class] += v;
        }
    }

    let prior = [
        (y.len() - n_pos) as f64 / y.len() as f64,
        n_pos as f64 / y.len() as f64,
    ];
    Ok(observed
        .iter()
        .map(|obs| {
            let total = obs[0] + obs[1];
            let mut score = 0.0;
            for c in 0..2 {
                let expected = total * prior[c];
                if expected > 0.0 {
                    let d = obs[c] - expected;
                    score += d * d / expected;
                }
            }
            score
        })
        .collect())
}

/// Keep the K highest-scoring features.
pub fn select_k_best_fit(x: &FeatureMatrix, y: &[u8], k: usize) -> Result<SelectionModel> {
    let n_cols = x.n_cols();
    if k == 0 || k > n_cols {
        return Err(Error::config(format!(
            "K must lie in 1..={n_cols}, got {k}"
        )));
    }
    let scores = chi_square_scores(x, y)?;
    let mut order: Vec<usize> = (0..n_cols).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut selected: Vec<usize> = order.into_iter().take(k).collect();
    selected.sort_unstable();
    Ok(SelectionModel {
        scores,
        selected,
        scorer: Scorer::ChiSquare,
    })
}

/// Restrict columns to the selected indices, preserving order and storage.
pub fn select_transform(x: &FeatureMatrix, model: &SelectionModel) -> Result<FeatureMatrix> {
    x.ensure_width(model.scores.len())?;
    let mut new_index = vec![usize::MAX; model.scores.len()];
    for (new, &old) in model.selected.iter().enumerate() {
        new_index[old] = new;
    }
    match x {
        FeatureMatrix::Sparse(_) => {
            let rows = (0..x.n_rows())
                .map(|i| {
                    x.row_nonzeros(i)
                        .filter_map(|(j, v)| {
                            (new_index[j] != usize::MAX).then(|| (new_index[j], v))
                        })
                        .collect()
                })
                .collect();
            Ok(FeatureMatrix::Sparse(CsrMatrix::from_row_entries(
                model.selected.len(),
                rows,
            )))
        }
        FeatureMatrix::Dense(m) => {
            let mut values = Vec::with_capacity(m.n_rows * model.selected.len());
            for i in 0..m.n_rows {
                let row = m.row(i);
                values.extend(model.selected.iter().map(|&j| row[j]));
            }
            Ok(FeatureMatrix::dense(m.n_rows, model.selected.len(), values))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Six documents, one feature mirroring the label, one constant-ish
    // distractor.
    fn toy() -> (FeatureMatrix, Vec<u8>) {
        let x = FeatureMatrix::dense(
            6,
            3,
            vec![
                1.0, 1.0, 0.0, //
                1.0, 0.0, 0.0, //
                1.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, //
            ],
        );
        let y = vec![1, 1, 1, 0, 0, 0];
        (x, y)
    }

    #[test]
    fn label_mirroring_feature_outranks_noise() {
        let (x, y) = toy();
        let scores = chi_square_scores(&x, &y).unwrap();
        // Feature 0: observed (0, 3), prior (0.5, 0.5), expected (1.5, 1.5)
        // -> chi2 = 1.5 + 1.5 = 3. Feature 1: observed (2, 2) -> 0.
        assert!((scores[0] - 3.0).abs() < 1e-12, "{scores:?}");
        assert!((scores[1] - 0.0).abs() < 1e-12);
        assert!(scores[0] > scores[1]);
    }

    #[test]
    fn constant_zero_feature_scores_zero() {
        let (x, y) = toy();
        let scores = chi_square_scores(&x, &y).unwrap();
        assert_eq!(scores[2], 0.0);
    }

    #[test]
    fn k_equal_width_is_identity_selection() {
        let (x, y) = toy();
        let model = select_k_best_fit(&x, &y, 3).unwrap();
        assert_eq!(model.selected, vec![0, 1, 2]);
        let out = select_transform(&x, &model).unwrap();
        assert_eq!(out.to_dense(), x.to_dense());
    }

    #[test]
    fn k_out_of_range_or_single_class_errors() {
        let (x, y) = toy();
        assert!(matches!(
            select_k_best_fit(&x, &y, 4).unwrap_err(),
            Error::Config(_)
        ));
        assert!(matches!(
            select_k_best_fit(&x, &y, 0).unwrap_err(),
            Error::Config(_)
        ));
        assert!(matches!(
            select_k_best_fit(&x, &[1, 1, 1, 1, 1, 1], 2).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn transform_projects_selected_columns() {
        let x = FeatureMatrix::sparse_from_rows(
            10,
            vec![vec![(1, 2.0), (4, 3.0), (9, 1.0)], vec![(7, 5.0)], vec![]],
        );
        let model = SelectionModel {
            scores: vec![0.0; 10],
            selected: vec![1, 4, 7],
            scorer: Scorer::ChiSquare,
        };
        let out = select_transform(&x, &model).unwrap();
        assert_eq!(out.shape(), (3, 3));
        assert_eq!(out.get(0, 0), 2.0);
        assert_eq!(out.get(0, 1), 3.0);
        assert_eq!(out.get(0, 2), 0.0);
        assert_eq!(out.get(1, 2), 5.0);
        assert!(out.is_sparse_storage());
        let zeros: Vec<_> = out.row_nonzeros(2).collect();
        assert!(zeros.is_empty());
    }

    #[test]
    fn width_mismatch_is_reported() {
        let x = FeatureMatrix::dense(1, 2, vec![1.0, 2.0]);
        let model = SelectionModel {
            scores: vec![0.0; 3],
            selected: vec![0],
            scorer: Scorer::ChiSquare,
        };
        assert!(matches!(
            select_transform(&x, &model).unwrap_err(),
            Error::Mismatch { .. }
        ));
    }

    #[test]
    fn composed_selection_equals_single_projection() {
        let (x, y) = toy();
        let first = select_k_best_fit(&x, &y, 2).unwrap();
        let mid = select_transform(&x, &first).unwrap();
        let second = SelectionModel {
            scores: vec![0.0; 2],
            selected: vec![0],
            scorer: Scorer::ChiSquare,
        };
        let twice = select_transform(&mid, &second).unwrap();
        let composed = SelectionModel {
            scores: vec![0.0; 3],
            selected: vec![first.selected[0]],
            scorer: Scorer::ChiSquare,
        };
        let once = select_transform(&x, &composed).unwrap();
        assert_eq!(twice.to_dense(), once.to_dense());
    }

    proptest! {
        // Fitted selection must agree with a naive score-then-sort oracle.
        #[test]
        fn selection_matches_brute_force_oracle(
            seed in any::<u64>(),
            rows in 4usize..12,
            k in 1usize..10,
        ) {
            use rand::Rng;
            let cols = 10usize;
            prop_assume!(k <= cols);
            let mut rng = crate::rng::seeded(seed);
            let values: Vec<f64> = (0..rows * cols)
                .map(|_| if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..4.0) })
                .collect();
            let mut y: Vec<u8> = (0..rows).map(|_| rng.gen_range(0..2u8)).collect();
            y[0] = 1;
            y[1] = 0;
            let x = FeatureMatrix::dense(rows, cols, values.clone());
            let model = select_k_best_fit(&x, &y, k).unwrap();

            // Oracle: direct two-cell contingency per feature.
            let n_pos = y.iter().filter(|&&l| l == 1).count() as f64;
            let n = rows as f64;
            let mut oracle_scores = vec![0.0f64; cols];
            for j in 0..cols {
                let mut obs = [0.0f64; 2];
                for i in 0..rows {
                    obs[y[i] as usize] += values[i * cols + j];
                }
                let total = obs[0] + obs[1];
                for (c, &o) in obs.iter().enumerate() {
                    let e = total * if c == 1 { n_pos / n } else { (n - n_pos) / n };
                    if e > 0.0 {
                        oracle_scores[j] += (o - e) * (o - e) / e;
                    }
                }
            }
            let mut order: Vec<usize> = (0..cols).collect();
            order.sort_by(|&a, &b| {
                oracle_scores[b].partial_cmp(&oracle_scores[a]).unwrap().then(a.cmp(&b))
            });
            let mut expected: Vec<usize> = order.into_iter().take(k).collect();
            expected.sort_unstable();
            prop_assert_eq!(&model.selected, &expected);
            for j in 0..cols {
                prop_assert!((model.scores[j] - oracle_scores[j]).abs() < 1e-10);
            }
        }

        // Projection keeps the exact zero pattern of the selected columns.
        #[test]
        fn projection_preserves_sparsity(seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = crate::rng::seeded(seed);
            let rows = 6usize;
            let cols = 8usize;
            let values: Vec<f64> = (0..rows * cols)
                .map(|_| if rng.gen_bool(0.7) { 0.0 } else { rng.gen_range(0.0..2.0) })
                .collect();
            let x = FeatureMatrix::dense(rows, cols, values).to_sparse();
            let model = SelectionModel {
                scores: vec![0.0; cols],
                selected: vec![0, 3, 5],
                scorer: Scorer::ChiSquare,
            };
            let out = select_transform(&x, &model).unwrap();
            for i in 0..rows {
                for (new, &old) in model.selected.iter().enumerate() {
                    prop_assert_eq!(out.get(i, new).to_bits(), x.get(i, old).to_bits());
                }
            }
        }
    }
}
