//! Rank aggregation across models: 1 = best, ties share the mean of the
//! tied ranks.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Ranks for one cell of a results table. `values[i]` belongs to model `i`.
pub fn rank_cell(values: &[f64], higher_is_better: bool) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("missing cells in rank input".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = values[a].partial_cmp(&values[b]).expect("no NaN");
        if higher_is_better {
            cmp.reverse()
        } else {
            cmp
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = mean_rank;
        }
        i = j;
    }
    Ok(ranks)
}

/// Per-model mean rank over a complete (model x cell) matrix.
pub fn mean_ranks(values: &Array2<f64>, higher_is_better: &[bool]) -> Result<Vec<f64>> {
    let (n_models, n_cells) = values.dim();
    if n_cells == 0 || n_models == 0 {
        return Err(Error::EmptyInput);
    }
    if higher_is_better.len() != n_cells {
        return Err(Error::InvalidInput(
            "one direction flag required per cell".into(),
        ));
    }
    let mut sums = vec![0.0; n_models];
    for (c, &dir) in higher_is_better.iter().enumerate() {
        let col: Vec<f64> = values.column(c).to_vec();
        for (m, r) in rank_cell(&col, dir)?.into_iter().enumerate() {
            sums[m] += r;
        }
    }
    Ok(sums.into_iter().map(|s| s / n_cells as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn ties_share_mean_rank() {
        let ranks = rank_cell(&[0.9, 0.8, 0.8], true).unwrap();
        assert_eq!(ranks, vec![1.0, 2.5, 2.5]);
    }

    #[test]
    fn lower_is_better_flips_order() {
        let ranks = rank_cell(&[1.2, 0.8, 2.0], false).unwrap();
        assert_eq!(ranks, vec![2.0, 1.0, 3.0]);
    }

    #[test]
    fn dominant_model_gets_rank_one_everywhere() {
        let values = array![[0.9, 0.8, 0.95], [0.5, 0.6, 0.7], [0.4, 0.5, 0.2]];
        let means = mean_ranks(&values, &[true, true, true]).unwrap();
        assert_eq!(means, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn cell_ranks_sum_to_triangular_number() {
        for values in [vec![0.1, 0.5, 0.5, 0.9], vec![1.0, 1.0, 1.0], vec![3.0, 2.0]] {
            let m = values.len() as f64;
            let sum: f64 = rank_cell(&values, true).unwrap().iter().sum();
            assert!((sum - m * (m + 1.0) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_cells_are_rejected() {
        assert!(rank_cell(&[0.4, f64::NAN], true).is_err());
    }
}
