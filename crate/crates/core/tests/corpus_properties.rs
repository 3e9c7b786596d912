//! Properties of the default synthetic corpus after it has gone through the
//! real ingest and social pipeline.

use std::sync::OnceLock;

use newslife::features::snapshot_features;
use newslife::ingest::{ArticleSeries, SeriesStore};
use newslife::simgen::{corpus_stats, generate_corpus, CorpusSpec, SyntheticCorpus};
use newslife::EngineConfig;

fn corpus() -> &'static (SyntheticCorpus, Vec<ArticleSeries>) {
    static CELL: OnceLock<(SyntheticCorpus, Vec<ArticleSeries>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let corpus = generate_corpus(&CorpusSpec::default());
        let store = SeriesStore::new(&EngineConfig::default()).unwrap();
        for e in corpus.events() {
            store.ingest(&e).unwrap();
        }
        (corpus, store.into_series())
    })
}

/// Ranks starting at 1, ties get their average rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let m = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - m) * (b - m)).sum();
    let vx: f64 = rx.iter().map(|a| (a - m).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - m).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn ranks_average_ties() {
    assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
}

#[test]
fn early_entropy_tracks_weekly_visits() {
    let (_, series) = corpus();
    let tok = EngineConfig::default().social.tokenizer;
    let entropy: Vec<f64> = series.iter().map(|s| snapshot_features(s, 20, tok).unwrap().ent).collect();
    let totals: Vec<f64> = series.iter().map(|s| s.visits_before(7 * 1440) as f64).collect();
    let rho = spearman(&entropy, &totals);
    assert!(series.len() >= 600);
    assert!(rho > 0.3, "spearman {rho}");
}

#[test]
fn unique_fraction_survives_the_pipeline() {
    let (corpus, series) = corpus();
    let measured = corpus_stats(series.iter(), EngineConfig::default().social.tokenizer).unique_fraction;
    let with_tweets: Vec<f64> = series
        .iter()
        .filter(|s| !s.tweets().is_empty())
        .map(|s| corpus.blueprint(&s.article_id).unwrap().unique_fraction)
        .collect();
    let planned = with_tweets.iter().sum::<f64>() / with_tweets.len() as f64;
    assert!((measured - planned).abs() <= 0.03, "measured {measured} planned {planned}");
}
