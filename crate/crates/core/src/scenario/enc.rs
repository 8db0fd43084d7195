//! Leave-one-class-out generation for the emerging-new-classes challenge.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};

use super::{derive_seed, EncRun};

/// Base fraction of the remaining classes held out to supply known
/// negatives. The fraction grows when the novel class outnumbers it so the
/// detection test can stay exactly balanced.
const KNOWN_HOLDOUT_FRACTION: f64 = 0.2;

/// One run per class: the class is excluded from training and treated as
/// novel. Known negatives are sampled uniformly without replacement from a
/// held-out portion of the remaining classes, never from rows used for
/// training, and every remaining class keeps at least one training row.
pub fn enc_generate(ds: &Dataset, seed: u64) -> Result<Vec<EncRun>> {
    if ds.schema().task != Task::Multiclass {
        return Err(Error::InvalidInput(
            "leave-one-class-out generation needs a multiclass dataset".into(),
        ));
    }
    let classes = ds.observed_classes()?;
    if classes.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 observed classes, found {}",
            classes.len()
        )));
    }

    let codes = ds.targets().as_classes()?;
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &c) in codes.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }

    let mut runs = Vec::with_capacity(classes.len());
    for &held_out in &classes {
        let run_seed = derive_seed(seed, held_out as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);

        let novel_idx = &by_class[&held_out];
        let n_novel = novel_idx.len();
        let remaining: Vec<(u32, &Vec<usize>)> = by_class
            .iter()
            .filter(|(c, _)| **c != held_out)
            .map(|(c, v)| (*c, v))
            .collect();
        let n_rem: usize = remaining.iter().map(|(_, v)| v.len()).sum();
        // Each remaining class must keep one training row.
        let pool_capacity: usize = remaining.iter().map(|(_, v)| v.len() - 1).sum();
        if n_novel > pool_capacity {
            return Err(Error::InvalidInput(format!(
                "class '{}' has {} samples but only {} known rows can serve detection without emptying a training class",
                ds.class_name(held_out),
                n_novel,
                pool_capacity
            )));
        }

        let target_pool = ((KNOWN_HOLDOUT_FRACTION * n_rem as f64).ceil() as usize)
            .max(n_novel)
            .min(pool_capacity);

        // Largest-remainder apportionment of the holdout across remaining
        // classes, capped so every class keeps a training row.
        let counts: Vec<usize> = remaining.iter().map(|(_, v)| v.len()).collect();
        let mut quotas = crate::data::sample::largest_remainder(&counts, target_pool);
        let mut deficit = 0usize;
        for (q, &c) in quotas.iter_mut().zip(&counts) {
            if *q > c - 1 {
                deficit += *q - (c - 1);
                *q = c - 1;
            }
        }
        while deficit > 0 {
            let mut moved = false;
            for (q, &c) in quotas.iter_mut().zip(&counts) {
                if deficit == 0 {
                    break;
                }
                if *q < c - 1 {
                    *q += 1;
                    deficit -= 1;
                    moved = true;
                }
            }
            debug_assert!(moved, "pool capacity checked above");
            if !moved {
                break;
            }
        }

        let mut pool = Vec::with_capacity(target_pool);
        for ((_, rows), &quota) in remaining.iter().zip(&quotas) {
            let picked = rand::seq::index::sample(&mut rng, rows.len(), quota);
            pool.extend(picked.into_iter().map(|i| rows[i]));
        }
        pool.sort_unstable();

        let known_pick = rand::seq::index::sample(&mut rng, pool.len(), n_novel);
        let mut known: Vec<usize> = known_pick.into_iter().map(|i| pool[i]).collect();
        known.sort_unstable();

        let in_pool: std::collections::HashSet<usize> = pool.iter().copied().collect();
        let mut train_idx: Vec<usize> = remaining
            .iter()
            .flat_map(|(_, rows)| rows.iter().copied())
            .filter(|i| !in_pool.contains(i))
            .collect();
        train_idx.sort_unstable();

        let mut detection_idx: Vec<usize> = novel_idx.iter().copied().chain(known).collect();
        detection_idx.sort_unstable();

        let detection_test = ds.select_rows(&detection_idx);
        let novelty = detection_test
            .targets()
            .as_classes()?
            .iter()
            .map(|&c| c == held_out)
            .collect();
        runs.push(EncRun {
            held_out_class: held_out,
            train: ds.select_rows(&train_idx),
            detection_test,
            novelty,
            seed: run_seed,
        });
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Targets;
    use ndarray::Array2;

    fn multiclass_ds(per_class: &[usize]) -> Dataset {
        let n: usize = per_class.iter().sum();
        let mut codes = Vec::with_capacity(n);
        for (c, &cnt) in per_class.iter().enumerate() {
            codes.extend(std::iter::repeat_n(c as u32, cnt));
        }
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i + j) as f64);
        let names = (0..per_class.len()).map(|c| format!("class{c}")).collect();
        Dataset::from_numeric(
            &["a", "b"],
            features,
            Targets::Classes(codes),
            Task::Multiclass,
            names,
        )
        .unwrap()
    }

    #[test]
    fn produces_one_run_per_class_covering_all_classes() {
        let ds = multiclass_ds(&[50, 50, 50]);
        let runs = enc_generate(&ds, 3).unwrap();
        assert_eq!(runs.len(), 3);
        let mut held: Vec<u32> = runs.iter().map(|r| r.held_out_class).collect();
        held.sort_unstable();
        assert_eq!(held, vec![0, 1, 2]);
    }

    #[test]
    fn train_never_contains_the_held_out_class() {
        let ds = multiclass_ds(&[30, 40, 50]);
        for run in enc_generate(&ds, 11).unwrap() {
            let train_codes = run.train.targets().as_classes().unwrap();
            assert!(train_codes.iter().all(|&c| c != run.held_out_class));
        }
    }

    #[test]
    fn detection_test_is_exactly_balanced() {
        let ds = multiclass_ds(&[20, 60, 60]);
        for run in enc_generate(&ds, 5).unwrap() {
            let novel = run.novelty.iter().filter(|&&b| b).count();
            let known = run.novelty.len() - novel;
            assert_eq!(novel, known);
            // all rows of the held-out class participate
            let class_count = ds
                .targets()
                .as_classes()
                .unwrap()
                .iter()
                .filter(|&&c| c == run.held_out_class)
                .count();
            assert_eq!(novel, class_count);
        }
    }

    #[test]
    fn train_and_detection_ids_never_overlap() {
        let ds = multiclass_ds(&[25, 35, 45, 15]);
        for run in enc_generate(&ds, 99).unwrap() {
            let train: std::collections::HashSet<&String> =
                run.train.sample_ids().iter().collect();
            assert!(run
                .detection_test
                .sample_ids()
                .iter()
                .all(|id| !train.contains(id)));
        }
    }

    #[test]
    fn novelty_flags_match_original_classes() {
        let ds = multiclass_ds(&[10, 10, 10]);
        for run in enc_generate(&ds, 1).unwrap() {
            let codes = run.detection_test.targets().as_classes().unwrap();
            for (flag, &c) in run.novelty.iter().zip(codes) {
                assert_eq!(*flag, c == run.held_out_class);
            }
        }
    }

    #[test]
    fn oversized_class_is_an_error_naming_it() {
        // class0 has 60 rows, the others only 10 together minus the
        // one-per-class training floor -> infeasible.
        let ds = multiclass_ds(&[60, 5, 5]);
        let err = enc_generate(&ds, 0).unwrap_err();
        assert!(err.to_string().contains("class0"), "got: {err}");
    }

    #[test]
    fn every_remaining_class_keeps_a_training_row() {
        let ds = multiclass_ds(&[8, 2, 9, 9]);
        for run in enc_generate(&ds, 13).unwrap() {
            let mut classes = run.train.observed_classes().unwrap();
            classes.sort_unstable();
            let mut expected: Vec<u32> =
                (0..4u32).filter(|&c| c != run.held_out_class).collect();
            expected.sort_unstable();
            assert_eq!(classes, expected);
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let ds = multiclass_ds(&[20, 20, 20]);
        let a = enc_generate(&ds, 7).unwrap();
        let b = enc_generate(&ds, 7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.train.sample_ids(), y.train.sample_ids());
            assert_eq!(x.detection_test.sample_ids(), y.detection_test.sample_ids());
        }
        let c = enc_generate(&ds, 8).unwrap();
        assert!(a
            .iter()
            .zip(&c)
            .any(|(x, y)| x.detection_test.sample_ids() != y.detection_test.sample_ids()));
    }
}
