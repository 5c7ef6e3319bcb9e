use std::collections::BTreeMap;

use longicausal::geo::synthetic::{synthetic_corpus, IN_SCOPE_EVENTS, WELLS};
use longicausal::geo::{agglomerative_cluster, run_pipeline, Linkage, PipelineConfig, StudyWindow};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn sse(points: &[[f64; 2]], labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for k in 0..2 {
        let members: Vec<&[f64; 2]> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == k)
            .map(|(p, _)| p)
            .collect();
        let n = members.len() as f64;
        let cx = members.iter().map(|p| p[0]).sum::<f64>() / n;
        let cy = members.iter().map(|p| p[1]).sum::<f64>() / n;
        total += members
            .iter()
            .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
            .sum::<f64>();
    }
    total
}

#[test]
fn ward_two_blobs_match_exhaustive_partition() {
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for _ in 0..30 {
        let n = rng.random_range(4..=10usize);
        let points: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let cx = if i % 2 == 0 { 0.0 } else { 100.0 };
                [
                    cx + rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]
            })
            .collect();
        let mut best: Option<(f64, Vec<usize>)> = None;
        for mask in 1u32..(1 << (n - 1)) {
            let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            let cost = sse(&points, &labels);
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, labels));
            }
        }
        let (_, oracle) = best.unwrap();
        let got = agglomerative_cluster(&points, 2, Linkage::Ward).unwrap();
        let same = (0..n).all(|i| (got[i] == got[0]) == (oracle[i] == oracle[0]));
        assert!(same, "{got:?} vs {oracle:?}");
    }
}

#[test]
fn volumes_and_quakes_are_conserved() {
    let corpus = synthetic_corpus(5);
    let config = PipelineConfig::default();
    let out = run_pipeline(&corpus.wells, &corpus.catalog, &config).unwrap();

    let reported: f64 = corpus
        .wells
        .iter()
        .filter(|w| config.bbox.contains(w.location))
        .flat_map(|w| w.monthly_volumes.iter())
        .filter(|(ym, _)| config.window.contains(**ym))
        .map(|(_, v)| v)
        .sum();
    let panel: f64 = out.dataset.iter().flat_map(|p| p.treatments().iter()).sum();
    assert!(
        (panel - reported).abs() <= 1e-6 * reported,
        "{panel} vs {reported}"
    );

    let a = &out.attribution;
    let post_cut = out.quakes_in_scope as u64 - a.below_cut;
    assert_eq!(a.assigned_total() + a.unassigned, post_cut);
    assert_eq!(post_cut, IN_SCOPE_EVENTS as u64);
    let y: u64 = out.dataset.iter().map(|p| p.outcome()).sum();
    assert_eq!(y, a.assigned_total());
    assert_eq!(corpus.wells.len(), WELLS);
    assert_eq!((out.dataset.len(), out.dataset.horizon()), (30, 7));
}

#[test]
fn catalog_order_does_not_matter() {
    let corpus = synthetic_corpus(9);
    let config = PipelineConfig::default();
    let a = run_pipeline(&corpus.wells, &corpus.catalog, &config).unwrap();
    let mut shuffled = corpus.catalog.clone();
    shuffled.shuffle(&mut ChaCha20Rng::seed_from_u64(1));
    let b = run_pipeline(&corpus.wells, &shuffled, &config).unwrap();
    assert_eq!(a.attribution, b.attribution);
    assert_eq!(a.dataset, b.dataset);
}

#[test]
fn quarterly_periods_need_a_divisible_window() {
    let corpus = synthetic_corpus(2);
    let mut config = PipelineConfig {
        period_months: 3,
        ..Default::default()
    };
    assert!(run_pipeline(&corpus.wells, &corpus.catalog, &config).is_err());
    config.window =
        StudyWindow::new("2014-01".parse().unwrap(), "2015-12".parse().unwrap()).unwrap();
    let out = run_pipeline(&corpus.wells, &corpus.catalog, &config).unwrap();
    assert_eq!(out.dataset.horizon(), 8);
}

#[test]
fn cluster_count_sets_unit_count() {
    let corpus = synthetic_corpus(3);
    let by_clusters: BTreeMap<usize, usize> = [10usize, 30, 50]
        .into_iter()
        .map(|k| {
            let config = PipelineConfig {
                n_clusters: k,
                ..Default::default()
            };
            (
                k,
                run_pipeline(&corpus.wells, &corpus.catalog, &config)
                    .unwrap()
                    .dataset
                    .len(),
            )
        })
        .collect();
    assert_eq!(
        by_clusters.into_iter().collect::<Vec<_>>(),
        vec![(10, 10), (30, 30), (50, 50)]
    );
}
