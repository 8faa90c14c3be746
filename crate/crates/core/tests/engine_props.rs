mod common;

use linkpred::engine::{score_all, score_all_multi, Bucket, Counts, EdgeSet, EngineConfig, ThresholdHistogram};
use linkpred::eval::build_curves;
use linkpred::graph::VertexId;
use linkpred::oracle::{oracle_score_all, score_pair};
use linkpred::scores::{ScoreKind, ScoreSpec};
use proptest::prelude::*;

fn histograms_identical(a: &ThresholdHistogram, b: &ThresholdHistogram) -> bool {
    a.zero == b.zero
        && a.positives_total == b.positives_total
        && a.negatives_total == b.negatives_total
        && a.buckets.len() == b.buckets.len()
        && a.buckets
            .iter()
            .zip(&b.buckets)
            .all(|(x, y)| common::same_bits(x.score, y.score) && x.counts == y.counts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_matches_oracle(seed in any::<u64>(), threads in 1usize..4, chunk in 1usize..20) {
        let (g, test) = common::random_instance(seed);
        let config = EngineConfig::default().with_threads(threads).with_chunk_size(chunk);
        for kind in ScoreKind::ALL {
            let spec = ScoreSpec::new(kind);
            let fast = score_all(&g, &spec, &test, &config).unwrap();
            let slow = oracle_score_all(&g, &spec, &test).unwrap();
            prop_assert!(histograms_identical(&fast, &slow.histogram), "{kind}\n{fast:?}\n{:?}", slow.histogram);
        }
    }

    #[test]
    fn multi_spec_run_reproduces_single_runs(seed in any::<u64>()) {
        let (g, test) = common::random_instance(seed);
        let mut specs: Vec<ScoreSpec> = ScoreKind::ALL.iter().map(|&k| ScoreSpec::new(k)).collect();
        specs.push(ScoreSpec::new(ScoreKind::InfLogKd).with_k(1.0).unwrap());
        let config = EngineConfig::default().with_threads(2).with_chunk_size(3);
        let multi = score_all_multi(&g, &specs, &test, &config).unwrap();
        for (spec, h) in specs.iter().zip(&multi.histograms) {
            let single = score_all(&g, spec, &test, &config).unwrap();
            prop_assert!(histograms_identical(h, &single), "{spec}");
        }
    }

    #[test]
    fn nonzero_iff_a_two_hop_path_exists(seed in any::<u64>()) {
        let (g, _) = common::random_instance(seed);
        let n = g.vertex_count() as VertexId;
        for x in 0..n {
            for y in 0..n {
                if x == y || g.has_edge(x, y) { continue; }
                let undirected = g.undirected_neighbors(x).iter().any(|&z| g.undirected_neighbors(z).contains(&y));
                let ded = g.out_neighbors(x).iter().any(|&z| g.out_neighbors(z).contains(&y));
                let ind = g.in_neighbors(x).iter().any(|&z| g.out_neighbors(z).contains(&y));
                let score = |k| score_pair(&g, x, y, &ScoreSpec::new(k)).unwrap();
                prop_assert_eq!(score(ScoreKind::Cn) > 0.0, undirected);
                prop_assert_eq!(score(ScoreKind::Ded) > 0.0, ded);
                prop_assert_eq!(score(ScoreKind::Ind) > 0.0, ind);
                prop_assert_eq!(score(ScoreKind::Inf) > 0.0, ded || ind);
            }
        }
    }

    #[test]
    fn curves_match_oracle_and_hold_invariants(seed in any::<u64>()) {
        let (g, test) = common::random_instance(seed);
        for kind in ScoreKind::ALL {
            let spec = ScoreSpec::new(kind);
            let h = score_all(&g, &spec, &test, &EngineConfig::default().with_threads(1)).unwrap();
            let oracle = oracle_score_all(&g, &spec, &test).unwrap();
            match (build_curves(&h), oracle.curves) {
                (Ok(r), Some(c)) => {
                    prop_assert_eq!(r.pr_points(), c.pr_points);
                    prop_assert_eq!(r.roc_points(), c.roc_points);
                    prop_assert!(common::same_bits(r.aupr, c.aupr));
                    prop_assert!(common::same_bits(r.auroc, c.auroc));
                    prop_assert!(r.points.windows(2).all(|w| w[0].recall <= w[1].recall && w[0].fpr <= w[1].fpr));
                    let last = r.points.last().unwrap();
                    prop_assert_eq!((last.recall, last.fpr), (1.0, 1.0));
                    // recall increments sum to 1, so the step integral lies
                    // between the extreme precisions
                    let lo = r.points.iter().map(|p| p.precision).fold(f64::INFINITY, f64::min);
                    let hi = r.points.iter().map(|p| p.precision).fold(0.0, f64::max);
                    prop_assert!(r.aupr >= lo - 1e-12 && r.aupr <= hi + 1e-12 && hi <= 1.0, "{}", r.aupr);
                    prop_assert!((0.0..=1.0).contains(&r.auroc));
                }
                (Err(_), None) => {}
                (fast, slow) => prop_assert!(false, "{kind}: {:?} vs {:?}", fast.map(|r| r.aupr), slow.map(|c| c.aupr)),
            }
        }
    }

    #[test]
    fn prefix_sum_curves_equal_quadratic_aggregation(
        raw in prop::collection::vec((1u32..5000, 0u64..5, 0u64..20), 1..400),
        zero_tp in 0u64..5,
        zero_fp in 0u64..50,
    ) {
        let mut raw = raw;
        raw.sort_by_key(|r| r.0);
        raw.dedup_by_key(|r| r.0);
        let buckets: Vec<Bucket> = raw
            .iter()
            .filter(|r| r.1 + r.2 > 0)
            .map(|&(s, tp, fp)| Bucket { score: s as f64 / 7.0, counts: Counts { tp, fp } })
            .collect();
        let pos = buckets.iter().map(|b| b.counts.tp).sum::<u64>() + zero_tp;
        let neg = buckets.iter().map(|b| b.counts.fp).sum::<u64>() + zero_fp;
        prop_assume!(pos > 0 && neg > 0);
        let h = ThresholdHistogram::from_nonzero(buckets.clone(), pos, neg).unwrap();
        let report = build_curves(&h).unwrap();

        let mut values: Vec<(f64, u64, u64)> = buckets.iter().map(|b| (b.score, b.counts.tp, b.counts.fp)).collect();
        if zero_tp + zero_fp > 0 {
            values.push((0.0, zero_tp, zero_fp));
        }
        let mut expected = Vec::new();
        for &(t, _, _) in &values {
            let (mut tp, mut fp) = (0, 0);
            for &(s, a, b) in &values {
                if s >= t { tp += a; fp += b; }
            }
            expected.push((t, tp, fp));
        }
        expected.sort_by(|a, b| b.0.total_cmp(&a.0));
        let got: Vec<_> = report.points.iter().map(|p| (p.threshold, p.tp, p.fp)).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn dominating_classifier_has_larger_aupr(
        fps in prop::collection::vec(0u64..30, 2..60),
        extra in prop::collection::vec(0u64..5, 2..60),
    ) {
        // Same positive placement; B has at least as many false positives above
        // every threshold.
        let len = fps.len().min(extra.len());
        let tp_per = 1u64;
        let make = |fp: &dyn Fn(usize) -> u64| {
            let buckets: Vec<Bucket> = (0..len)
                .map(|i| Bucket { score: (len - i) as f64, counts: Counts { tp: tp_per, fp: fp(i) } })
                .collect();
            let neg_a: u64 = (0..len).map(|i| fps[i] + extra[i]).sum::<u64>() + 10;
            ThresholdHistogram::from_nonzero(buckets, len as u64, neg_a).unwrap()
        };
        let a = make(&|i| fps[i]);
        let b = make(&|i| fps[i] + extra[i]);
        let ra = build_curves(&a).unwrap();
        let rb = build_curves(&b).unwrap();
        prop_assert!(ra.aupr >= rb.aupr - 1e-12, "{} < {}", ra.aupr, rb.aupr);
    }
}

#[test]
fn engine_is_independent_of_workers_and_chunks() {
    let g = common::preferential_attachment(2_000, 4, 0.3, 11);
    let split = linkpred::split_edges(&g, 0.1, 3).unwrap();
    let test = split.test_set();
    let specs: Vec<ScoreSpec> = ScoreKind::ALL.iter().map(|&k| ScoreSpec::new(k)).collect();
    let base = score_all_multi(&split.train, &specs, &test, &EngineConfig::default().with_threads(1)).unwrap();
    for threads in [2, 3, 8] {
        for chunk in [1, 7, 100, 5000] {
            let cfg = EngineConfig::default().with_threads(threads).with_chunk_size(chunk);
            let run = score_all_multi(&split.train, &specs, &test, &cfg).unwrap();
            for (a, b) in base.histograms.iter().zip(&run.histograms) {
                assert!(histograms_identical(a, b), "threads={threads} chunk={chunk}");
            }
            assert_eq!(run.stats.explicit_candidates, base.stats.explicit_candidates);
        }
    }
}

#[test]
fn aupr_can_fall_below_the_class_ratio() {
    // ten negatives above one positive, the other positive at zero
    let h = ThresholdHistogram::from_nonzero(
        vec![Bucket { score: 2.0, counts: Counts { tp: 0, fp: 10 } }, Bucket { score: 1.0, counts: Counts { tp: 1, fp: 0 } }],
        2,
        10,
    )
    .unwrap();
    let r = build_curves(&h).unwrap();
    let by_hand = 0.5 * (1.0 / 11.0) + 0.5 * (2.0 / 12.0);
    assert!((r.aupr - by_hand).abs() < 1e-15);
    assert!(r.aupr < 2.0 / 12.0);
}

#[test]
fn empty_test_set_yields_no_positives() {
    let g = common::erdos_renyi(30, 0.1, 1);
    let h = score_all(&g, &ScoreSpec::new(ScoreKind::Ra), &EdgeSet::empty(30), &EngineConfig::default()).unwrap();
    assert_eq!(h.positives_total, 0);
    assert!(h.buckets.iter().all(|b| b.counts.tp == 0));
    assert!(build_curves(&h).is_err());
}
