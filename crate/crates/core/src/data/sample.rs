//! Seeded stratified subsampling and train/test splitting.
//!
//! Apportionment uses the largest-remainder rule so each stratum's share of
//! the capped output deviates from its original share by at most one sample.
//! Selected rows keep their original relative order.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::Dataset;

/// Largest-remainder quotas proportional to `counts`, summing to `total`.
/// Requires `total <= sum(counts)`; each quota never exceeds its count.
pub(crate) fn largest_remainder(counts: &[usize], total: usize) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    debug_assert!(total <= n);
    let mut base = Vec::with_capacity(counts.len());
    let mut remainders = Vec::with_capacity(counts.len());
    let mut assigned = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        let exact = total as f64 * c as f64 / n as f64;
        let b = exact.floor() as usize;
        base.push(b);
        remainders.push((exact - b as f64, i));
        assigned += b;
    }
    // Ties break on lower stratum index.
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(total - assigned) {
        base[i] += 1;
    }
    base
}

fn sample_without_replacement(rng: &mut ChaCha8Rng, pool: &[usize], amount: usize) -> Vec<usize> {
    let picked = rand::seq::index::sample(rng, pool.len(), amount);
    picked.into_iter().map(|i| pool[i]).collect()
}

/// Cap a dataset at `cap` rows while preserving stratum proportions.
///
/// Strata are (target class x split tag) for classification and (split tag)
/// for regression; see [`stratified_subsample_by`] for the class-only
/// variant. Returns the dataset unchanged when it already fits under the
/// cap. Deterministic for a fixed seed.
pub fn stratified_subsample(ds: &Dataset, cap: usize, seed: u64) -> Result<Dataset> {
    stratified_subsample_by(ds, cap, seed, false)
}

/// As [`stratified_subsample`], but `class_only = true` drops the split
/// component from the stratum key for classification tasks.
pub fn stratified_subsample_by(
    ds: &Dataset,
    cap: usize,
    seed: u64,
    class_only: bool,
) -> Result<Dataset> {
    let keys = ds.stratum_keys(class_only);
    let mut strata: BTreeMap<(u32, u8), Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.into_iter().enumerate() {
        strata.entry(k).or_default().push(i);
    }
    if cap < strata.len() {
        return Err(Error::InvalidInput(format!(
            "cap {} is smaller than the number of strata {}",
            cap,
            strata.len()
        )));
    }
    if ds.n_rows() <= cap {
        return Ok(ds.clone());
    }

    let counts: Vec<usize> = strata.values().map(|v| v.len()).collect();
    let quotas = largest_remainder(&counts, cap);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = Vec::with_capacity(cap);
    for (pool, &quota) in strata.values().zip(&quotas) {
        selected.extend(sample_without_replacement(&mut rng, pool, quota));
    }
    selected.sort_unstable();
    Ok(ds.select_rows(&selected))
}

/// Disjoint, exhaustive train/test partition. `test_fraction` must lie in
/// (0, 1); the test side gets `round(fraction * n)` rows clamped so both
/// parts stay non-empty. Stratifies by class when flagged (classification
/// tasks only; the flag is ignored for regression).
pub fn split_holdout(
    ds: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratify: bool,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "test fraction {test_fraction} outside (0,1)"
        )));
    }
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 rows to split into non-empty parts".into(),
        ));
    }
    let t = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx: Vec<usize> = if stratify && ds.schema().task.is_classification() {
        let mut strata: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, &c) in ds.targets().as_classes()?.iter().enumerate() {
            strata.entry(c).or_default().push(i);
        }
        let counts: Vec<usize> = strata.values().map(|v| v.len()).collect();
        let quotas = largest_remainder(&counts, t);
        let mut sel = Vec::with_capacity(t);
        for (pool, &quota) in strata.values().zip(&quotas) {
            sel.extend(sample_without_replacement(&mut rng, pool, quota));
        }
        sel
    } else {
        sample_without_replacement(&mut rng, &(0..n).collect::<Vec<_>>(), t)
    };
    test_idx.sort_unstable();

    let mut in_test = vec![false; n];
    for &i in &test_idx {
        in_test[i] = true;
    }
    let train_idx: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    Ok((ds.select_rows(&train_idx), ds.select_rows(&test_idx)))
}
