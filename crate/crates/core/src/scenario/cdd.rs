//! Preparation of changing-data-distribution scenarios.

use crate::data::{sample::largest_remainder, stratified_subsample, Dataset};
use crate::error::{Error, Result};

use super::{derive_seed, CddScenario};

/// Cap the three splits at `cap` total rows with per-split quotas
/// proportional to the original split sizes, subsampling each split with
/// class-stratified quotas. Splits at or under the cap pass through
/// unchanged.
pub fn cdd_prepare(
    train: &Dataset,
    id_test: &Dataset,
    ood_test: &Dataset,
    cap: usize,
    seed: u64,
) -> Result<CddScenario> {
    for (name, part) in [("id_test", id_test), ("ood_test", ood_test)] {
        if !train.schema().same_features(part.schema()) {
            return Err(Error::Schema(format!(
                "{name} feature schema differs from train"
            )));
        }
    }
    let sizes = [train.n_rows(), id_test.n_rows(), ood_test.n_rows()];
    let total: usize = sizes.iter().sum();
    let provenance = format!(
        "cdd_prepare(cap={cap}, seed={seed}, splits={}/{}/{})",
        sizes[0], sizes[1], sizes[2]
    );
    if total <= cap {
        return Ok(CddScenario {
            train: train.clone(),
            id_test: id_test.clone(),
            ood_test: ood_test.clone(),
            provenance,
        });
    }
    let quotas = largest_remainder(&sizes, cap);
    let parts = [train, id_test, ood_test];
    let mut capped = Vec::with_capacity(3);
    for (i, (part, &quota)) in parts.iter().zip(&quotas).enumerate() {
        capped.push(stratified_subsample(part, quota, derive_seed(seed, i as u64))?);
    }
    let mut it = capped.into_iter();
    Ok(CddScenario {
        train: it.next().expect("three parts"),
        id_test: it.next().expect("three parts"),
        ood_test: it.next().expect("three parts"),
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Targets, Task};
    use ndarray::Array2;

    fn part(n: usize, seed_val: f64) -> Dataset {
        let features = Array2::from_shape_fn((n, 3), |(i, j)| seed_val + (i * 3 + j) as f64);
        let codes: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        Dataset::from_numeric(
            &["a", "b", "c"],
            features,
            Targets::Classes(codes),
            Task::Binary,
            vec!["no".into(), "yes".into()],
        )
        .unwrap()
    }

    #[test]
    fn proportional_quotas_across_splits() {
        let scenario = cdd_prepare(&part(4000, 0.0), &part(500, 1.0), &part(500, 2.0), 1000, 7)
            .unwrap();
        assert_eq!(scenario.train.n_rows(), 800);
        assert_eq!(scenario.id_test.n_rows(), 100);
        assert_eq!(scenario.ood_test.n_rows(), 100);
    }

    #[test]
    fn under_cap_passes_through_unchanged() {
        let tr = part(100, 0.0);
        let id = part(20, 1.0);
        let ood = part(20, 2.0);
        let scenario = cdd_prepare(&tr, &id, &ood, 1000, 7).unwrap();
        assert_eq!(scenario.train, tr);
        assert_eq!(scenario.id_test, id);
        assert_eq!(scenario.ood_test, ood);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let tr = part(10, 0.0);
        let other = Dataset::from_numeric(
            &["a", "b"],
            Array2::zeros((10, 2)),
            Targets::Classes(vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]),
            Task::Binary,
            vec!["no".into(), "yes".into()],
        )
        .unwrap();
        assert!(cdd_prepare(&tr, &other, &tr, 100, 0).is_err());
    }

    #[test]
    fn class_proportions_survive_the_cap() {
        let tr = part(3000, 0.0);
        let scenario = cdd_prepare(&tr, &part(600, 1.0), &part(600, 2.0), 700, 3).unwrap();
        let counts = scenario.train.class_counts().unwrap();
        let n = scenario.train.n_rows() as f64;
        for (_, c) in counts {
            assert!((c as f64 / n - 0.5).abs() <= 1.0 / n);
        }
    }
}
