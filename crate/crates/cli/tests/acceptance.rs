//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Expected values come from independent oracles computed here (brute-force
//! pair counting, threshold re-enumeration, permutation search, closed
//! forms, finite differences), never from the implementation under test.

use std::path::{Path, PathBuf};
use std::process::Command;

use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use openenv_core::data::{load_table, split_holdout, Dataset, SchemaHints, Targets, Task};
use openenv_core::metrics::{
    accuracy, aupr, enc_evaluate, evaluate, mean_ranks, novelty_score, performance_gap, rank_cell,
    roc_auc, GapMode, NoveltyConfig, Objective,
};
use openenv_core::models::{
    knn_fit, knn_predict_proba, logreg_fit, logreg_predict_proba, mlp_fit, mlp_loss_and_gradients,
    mlp_predict_proba, MlpConfig, MlpParams, MlpTargetBatch,
};
use openenv_core::report::Cell;
use openenv_core::scenario::{align_features, decremental_shift, enc_generate, incremental_shift};
use openenv_core::shift::{
    disde, gaussian_w2, sinkhorn, spd_sqrt, DisdeConfig, GaussianSummary, OtddConfig,
    MARGINAL_TOLERANCE,
};

fn iris_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/testdata/iris.csv")
}

fn iris() -> Dataset {
    load_table(&iris_path(), &SchemaHints::default()).expect("iris fixture")
}

// ---------------------------------------------------------------------------
// oracles
// ---------------------------------------------------------------------------

fn auc_pair_oracle(y: &[bool], s: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        if !yi {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj {
                continue;
            }
            den += 1.0;
            if s[i] > s[j] {
                num += 1.0;
            } else if s[i] == s[j] {
                num += 0.5;
            }
        }
    }
    num / den
}

fn aupr_threshold_oracle(y: &[bool], s: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = s.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let n_pos = y.iter().filter(|&&b| b).count();
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let tp = y.iter().zip(s).filter(|(&yi, &si)| yi && si >= t).count();
        let fp = y.iter().zip(s).filter(|(&yi, &si)| !yi && si >= t).count();
        let recall = tp as f64 / n_pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    area
}

/// Exact uniform-marginal OT for square instances by permutation search.
fn assignment_oracle(cost: &Array2<f64>) -> f64 {
    fn rec(perm: &mut Vec<usize>, k: usize, cost: &Array2<f64>, best: &mut f64) {
        if k == perm.len() {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[[i, j]]).sum();
            *best = best.min(total);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(perm, k + 1, cost, best);
            perm.swap(k, i);
        }
    }
    let n = cost.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    rec(&mut perm, 0, cost, &mut best);
    best / n as f64
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_metric_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..250 {
        let n = rng.gen_range(2..=50);
        let mut y: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if y.iter().all(|&b| b) {
            y[0] = false;
        }
        if y.iter().all(|&b| !b) {
            y[0] = true;
        }
        // half the trials use a coarse grid to force ties
        let s: Vec<f64> = if trial % 2 == 0 {
            (0..n).map(|_| rng.gen_range(0..6) as f64 / 5.0).collect()
        } else {
            (0..n).map(|_| rng.gen::<f64>()).collect()
        };
        let auc = roc_auc(&y, &s).unwrap();
        let auc_want = auc_pair_oracle(&y, &s);
        assert!((auc - auc_want).abs() <= 1e-12, "auc {auc} vs {auc_want}");
        let pr = aupr(&y, &s).unwrap();
        let pr_want = aupr_threshold_oracle(&y, &s);
        assert!((pr - pr_want).abs() <= 1e-12, "aupr {pr} vs {pr_want}");
    }
    println!("ACCEPTANCE 01 metric-oracle-equivalence: PASS");
}

#[test]
fn criterion_02_performance_gap_arithmetic() {
    let abs = performance_gap(0.838, 0.764, GapMode::Absolute).unwrap();
    assert_eq!(abs, 0.764 - 0.838);
    assert!((abs - (-0.074)).abs() <= 1e-12);
    assert_eq!(Cell::with_gap(0.764, abs).render(), "0.764(-0.074)");
    let rel = performance_gap(0.838, 0.764, GapMode::Relative).unwrap();
    assert!((rel - (-0.0883)).abs() <= 1e-4, "relative gap {rel}");
    println!("ACCEPTANCE 02 performance-gap-arithmetic: PASS");
}

#[test]
fn criterion_03_gaussian_w2_closed_form_and_sqrt_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..120 {
        let (m1, m2) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (s1, s2) = (rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
        let g1 = GaussianSummary { mean: array![m1], covariance: array![[s1 * s1]], n: 2 };
        let g2 = GaussianSummary { mean: array![m2], covariance: array![[s2 * s2]], n: 2 };
        let got = gaussian_w2(&g1, &g2).unwrap();
        let want = (m1 - m2).powi(2) + (s1 - s2).powi(2);
        assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
        assert!(gaussian_w2(&g1, &g1).unwrap() <= 1e-9);
    }
    for _ in 0..120 {
        let d = rng.gen_range(1..=20);
        let m = Array2::from_shape_fn((d, d), |_| rng.gen_range(-1.0..1.0));
        let spd = m.t().dot(&m);
        let root = spd_sqrt(spd.view()).unwrap();
        let resid = &root.dot(&root) - &spd;
        let rel = resid.iter().map(|v| v * v).sum::<f64>().sqrt()
            / spd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        assert!(rel <= 1e-8, "sqrt residual {rel}");
    }
    println!("ACCEPTANCE 03 gaussian-w2-and-spd-sqrt: PASS");
}

#[test]
fn criterion_04_sinkhorn_matches_exact_transport() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for n in 2..=8usize {
        for _ in 0..3 {
            let pts_a: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let pts_b: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let cost = Array2::from_shape_fn((n, n), |(i, j)| {
                (pts_a[i][0] - pts_b[j][0]).powi(2) + (pts_a[i][1] - pts_b[j][1]).powi(2)
            });
            let mut sorted: Vec<f64> = cost.iter().copied().collect();
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let median = sorted[sorted.len() / 2];
            let cfg = OtddConfig {
                entropic_epsilon: Some(0.01 * median),
                max_iterations: 500_000,
                ..Default::default()
            };
            let w = vec![1.0 / n as f64; n];
            let r = sinkhorn(cost.view(), &w, &w, &cfg).unwrap();
            assert!(r.marginal_residual <= MARGINAL_TOLERANCE);
            let exact = assignment_oracle(&cost);
            assert!(
                (r.transport_cost - exact).abs() <= 0.02 * exact,
                "n={n}: entropic {} vs exact {exact}",
                r.transport_cost
            );
        }
    }
    println!("ACCEPTANCE 04 sinkhorn-vs-exact-ot: PASS");
}

#[test]
fn criterion_05_disde_telescoping_and_concept_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..120 {
        let n_p = rng.gen_range(10..40);
        let n_q = rng.gen_range(10..40);
        let d = rng.gen_range(1..4);
        let x_p = Array2::from_shape_fn((n_p, d), |_| rng.gen_range(-2.0..2.0));
        let x_q = Array2::from_shape_fn((n_q, d), |_| rng.gen_range(-2.0..2.0));
        let lp: Vec<f64> = (0..n_p).map(|_| rng.gen_range(0.0..1.0)).collect();
        let lq: Vec<f64> = (0..n_q).map(|_| rng.gen_range(0.0..1.0)).collect();
        let cfg = DisdeConfig { eta: 0.05, k_neighbors: rng.gen_range(1..6) };
        let r = disde(&lp, x_p.view(), &lq, x_q.view(), &cfg).unwrap();
        let gap = lq.iter().sum::<f64>() / n_q as f64 - lp.iter().sum::<f64>() / n_p as f64;
        assert!(
            (r.term_1 + r.term_2 + r.term_3 - gap).abs() <= 1e-12,
            "telescoping violated"
        );
    }

    // pure concept shift: identical x marginals, labels flipped on half the
    // space; the fixed model's loss is 0 on P and 1 on the flipped half of Q
    let n = 80;
    let x = Array2::from_shape_fn((n, 2), |(i, j)| {
        let t = i as f64 / (n - 1) as f64 * 2.0 - 1.0;
        if j == 0 { t } else { (t * 9.7).sin() }
    });
    let losses_p = vec![0.0; n];
    let losses_q: Vec<f64> = (0..n).map(|i| f64::from(x[[i, 0]] > 0.0)).collect();
    let cfg = DisdeConfig { eta: 0.1, k_neighbors: 1 };
    let r = disde(&losses_p, x.view(), &losses_q, x.view(), &cfg).unwrap();
    assert!(
        r.term_2.abs() >= 5.0 * r.term_1.abs().max(r.term_3.abs()),
        "terms {} {} {}",
        r.term_1,
        r.term_2,
        r.term_3
    );
    println!("ACCEPTANCE 05 disde-telescoping-and-concept-shift: PASS");
}

#[test]
fn criterion_06_enc_protocol_shape_on_iris() {
    let ds = iris();
    let runs = enc_generate(&ds, 11).unwrap();
    assert_eq!(runs.len(), 3, "one run per class");
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for run in &runs {
        let train_ids: std::collections::HashSet<&String> =
            run.train.sample_ids().iter().collect();
        assert!(
            run.detection_test
                .sample_ids()
                .iter()
                .all(|id| !train_ids.contains(id)),
            "train/test overlap"
        );
        let novel = run.novelty.iter().filter(|&&b| b).count();
        assert_eq!(2 * novel, run.novelty.len(), "novelty labels balanced");

        // shuffled-score baseline: mean ROC-AUC over 100 shuffles near 0.5
        let model = knn_fit(&run.train, 5).unwrap();
        let preds = knn_predict_proba(&model, &run.detection_test).unwrap();
        let mut scores = novelty_score(&preds).unwrap();
        let mut sum = 0.0;
        for _ in 0..100 {
            // Fisher-Yates
            for i in (1..scores.len()).rev() {
                scores.swap(i, rng.gen_range(0..=i));
            }
            sum += roc_auc(&run.novelty, &scores).unwrap();
        }
        let mean = sum / 100.0;
        assert!((mean - 0.5).abs() <= 0.05, "shuffled mean {mean}");
    }
    // protocol scoring end to end: evaluation accepts the generated runs
    let model = knn_fit(&runs[0].train, 5).unwrap();
    let preds = knn_predict_proba(&model, &runs[0].detection_test).unwrap();
    let pairs = [(&runs[0], &preds)];
    enc_evaluate(&pairs, &NoveltyConfig::reported_intervals()).unwrap();
    println!("ACCEPTANCE 06 enc-protocol-shape: PASS");
}

#[test]
fn criterion_07_feature_shift_trend_on_iris() {
    let ds = iris();
    let levels = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut per_level_acc: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];
    for seed in 0..10u64 {
        let (train, test) = split_holdout(&ds, 0.2, seed, true).unwrap();
        let model = knn_fit(&train, 5).unwrap();
        for (li, &level) in levels.iter().enumerate() {
            let (shifted, _) = decremental_shift(&train, &test, level, seed).unwrap();
            let preds = knn_predict_proba(&model, &shifted).unwrap();
            let acc = accuracy(
                test.targets().as_classes().unwrap(),
                &preds.predicted_classes().unwrap(),
            )
            .unwrap();
            per_level_acc[li].push(acc);
        }
    }
    let median = |values: &[f64]| -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len();
        if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
    };
    let medians: Vec<f64> = per_level_acc.iter().map(|v| median(v)).collect();
    assert!(medians[0] >= 0.90, "level-0 median {}", medians[0]);
    for pair in medians.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "median accuracy increased across levels: {medians:?}"
        );
    }
    // stratified 3-class iris test split: majority-class rate is 1/3
    let majority_rate = 1.0 / 3.0;
    assert!(
        (medians[levels.len() - 1] - majority_rate).abs() <= 0.1,
        "level-1.0 median {} vs majority rate {majority_rate}",
        medians[levels.len() - 1]
    );
    println!("ACCEPTANCE 07 feature-shift-trend: PASS (medians {medians:?})");
}

#[test]
fn criterion_08_incremental_feature_guarantee() {
    // multiclass dataset with knn and mlp
    let ds = iris();
    let (train, test) = split_holdout(&ds, 0.2, 3, true).unwrap();
    for n_new in [1usize, 5, 17] {
        let (extended, _) = incremental_shift(&test, n_new, 9 + n_new as u64).unwrap();
        let aligned = align_features(train.schema(), &extended).unwrap();

        let knn = knn_fit(&train, 5).unwrap();
        let mlp = mlp_fit(&train, &MlpConfig { epochs: 40, ..Default::default() }).unwrap();
        for (base, after) in [
            (
                knn_predict_proba(&knn, &test).unwrap(),
                knn_predict_proba(&knn, &aligned).unwrap(),
            ),
            (
                mlp_predict_proba(&mlp, &test).unwrap(),
                mlp_predict_proba(&mlp, &aligned).unwrap(),
            ),
        ] {
            for objective in [Objective::Accuracy, Objective::BalancedAccuracy, Objective::F1] {
                let m0 = evaluate(objective, &base, &test).unwrap();
                let m1 = evaluate(objective, &after, &aligned).unwrap();
                assert!(m0 == m1, "{} changed: {m0} vs {m1}", objective.name());
            }
        }
    }

    // binary dataset with logreg
    let features = Array2::from_shape_fn((40, 3), |(i, j)| (i * 3 + j) as f64 * 0.1);
    let codes: Vec<u32> = (0..40).map(|i| u32::from(i % 2 == 0)).collect();
    let binary = Dataset::from_numeric(
        &["a", "b", "c"],
        features,
        Targets::Classes(codes),
        Task::Binary,
        vec!["n".into(), "p".into()],
    )
    .unwrap();
    let (train, test) = split_holdout(&binary, 0.25, 1, true).unwrap();
    let model = logreg_fit(&train, &Default::default()).unwrap();
    let (extended, _) = incremental_shift(&test, 4, 2).unwrap();
    let aligned = align_features(train.schema(), &extended).unwrap();
    let m0 = evaluate(
        Objective::RocAuc,
        &logreg_predict_proba(&model, &test).unwrap(),
        &test,
    )
    .unwrap();
    let m1 = evaluate(
        Objective::RocAuc,
        &logreg_predict_proba(&model, &aligned).unwrap(),
        &aligned,
    )
    .unwrap();
    assert!(m0 == m1, "roc_auc changed: {m0} vs {m1}");
    println!("ACCEPTANCE 08 incremental-feature-guarantee: PASS");
}

#[test]
fn criterion_09_rank_aggregation() {
    assert_eq!(rank_cell(&[0.9, 0.8, 0.8], true).unwrap(), vec![1.0, 2.5, 2.5]);

    // two-level averaging against hand computation:
    // task A cells (higher better): model values give ranks
    //   cell1 [0.9, 0.8, 0.8] -> [1, 2.5, 2.5]
    //   cell2 [0.2, 0.6, 0.4] -> [3, 1, 2]
    //   task A means: [2.0, 1.75, 2.25]
    // task B single rmse cell (lower better): [1.0, 3.0, 2.0] -> [1, 3, 2]
    // overall: [(2.0+1)/2, (1.75+3)/2, (2.25+2)/2] = [1.5, 2.375, 2.125]
    let task_a = ndarray::array![[0.9, 0.2], [0.8, 0.6], [0.8, 0.4]];
    let a_means = mean_ranks(&task_a, &[true, true]).unwrap();
    assert_eq!(a_means, vec![2.0, 1.75, 2.25]);
    let task_b = ndarray::array![[1.0], [3.0], [2.0]];
    let b_means = mean_ranks(&task_b, &[false]).unwrap();
    assert_eq!(b_means, vec![1.0, 3.0, 2.0]);
    let overall: Vec<f64> = a_means
        .iter()
        .zip(&b_means)
        .map(|(a, b)| (a + b) / 2.0)
        .collect();
    assert_eq!(overall, vec![1.5, 2.375, 2.125]);
    println!("ACCEPTANCE 09 rank-aggregation: PASS");
}

#[test]
fn criterion_10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("run_a");
    let out_b = dir.path().join("run_b");
    for out in [&out_a, &out_b] {
        let status = Command::new(env!("CARGO_BIN_EXE_openenv"))
            .args([
                "--dataset",
                iris_path().to_str().unwrap(),
                "--task",
                "enc,df,inf,vlo",
                "--model",
                "knn",
                "--seed",
                "42",
                "--export-dataset",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        assert!(status.success());
    }
    for file in ["report.txt", "report.json", "results.json", "run_manifest.json"] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    // exported scenario files as well
    for entry in walk(&out_a.join("export")) {
        let rel = entry.strip_prefix(&out_a).unwrap();
        let a = std::fs::read(&entry).unwrap();
        let b = std::fs::read(out_b.join(rel)).unwrap();
        assert_eq!(a, b, "{} differs", rel.display());
    }
    println!("ACCEPTANCE 10 cli-determinism: PASS");
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        entries.sort();
        for e in entries {
            if e.is_dir() {
                stack.push(e);
            } else {
                files.push(e);
            }
        }
    }
    files
}

#[test]
fn criterion_11_mlp_gradient_check_and_xor() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for trial in 0..12 {
        let d = rng.gen_range(1..=5);
        let h = rng.gen_range(1..=4);
        let out = if trial % 2 == 0 { rng.gen_range(2..=3) } else { 1 };
        let n = rng.gen_range(2..=6);
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.5..1.5));
        let mut params = MlpParams {
            w1: Array2::from_shape_fn((d, h), |_| rng.gen_range(-0.9..0.9)),
            b1: Array1::from_shape_fn(h, |_| rng.gen_range(-0.4..0.4)),
            w2: Array2::from_shape_fn((h, out), |_| rng.gen_range(-0.9..0.9)),
            b2: Array1::from_shape_fn(out, |_| rng.gen_range(-0.4..0.4)),
        };
        let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..out.max(2))).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let target = if out > 1 {
            MlpTargetBatch::Classes { indices: &indices, n_classes: out }
        } else {
            MlpTargetBatch::Values(&values)
        };
        let (_, analytic) = mlp_loss_and_gradients(&params, x.view(), &target);

        let eps = 1e-5;
        macro_rules! check_tensor {
            ($field:ident) => {
                for idx in 0..params.$field.len() {
                    let orig = params.$field.as_slice().unwrap()[idx];
                    params.$field.as_slice_mut().unwrap()[idx] = orig + eps;
                    let (lp, _) = mlp_loss_and_gradients(&params, x.view(), &target);
                    params.$field.as_slice_mut().unwrap()[idx] = orig - eps;
                    let (lm, _) = mlp_loss_and_gradients(&params, x.view(), &target);
                    params.$field.as_slice_mut().unwrap()[idx] = orig;
                    let numeric = (lp - lm) / (2.0 * eps);
                    let a = analytic.$field.as_slice().unwrap()[idx];
                    let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                    assert!(rel <= 1e-4, "gradient mismatch {rel} in {}", stringify!($field));
                }
            };
        }
        check_tensor!(w1);
        check_tensor!(b1);
        check_tensor!(w2);
        check_tensor!(b2);
    }

    // XOR separability
    let xor = Dataset::from_numeric(
        &["a", "b"],
        array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]],
        Targets::Classes(vec![0, 1, 1, 0]),
        Task::Binary,
        vec!["even".into(), "odd".into()],
    )
    .unwrap();
    let cfg = MlpConfig {
        hidden_dim: 8,
        learning_rate: 0.5,
        epochs: 2000,
        batch_size: 4,
        seed: 0,
    };
    let model = mlp_fit(&xor, &cfg).unwrap();
    let preds = mlp_predict_proba(&model, &xor).unwrap();
    assert_eq!(
        preds.predicted_classes().unwrap(),
        xor.targets().as_classes().unwrap()
    );
    println!("ACCEPTANCE 11 mlp-gradient-check-and-xor: PASS");
}
