//! Generates the default synthetic corpus and prints the statistics it was
//! calibrated against: dataset summary, News profile mix, shelf-life by
//! section and the r² curves of the two model families.

use std::collections::BTreeMap;
use std::time::Instant;

use newslife::ingest::SeriesStore;
use newslife::lifecycle::{classify_profile, shelf_life, ProfileGroup};
use newslife::regress::{r_squared_curve, CurveOptions, ModelSpec};
use newslife::simgen::{corpus_stats, generate_corpus, CorpusSpec};
use newslife::{EngineConfig, Section};

fn main() -> anyhow::Result<()> {
    let t0 = Instant::now();
    let spec = CorpusSpec::default();
    let corpus = generate_corpus(&spec);
    let config = EngineConfig::default();
    let store = SeriesStore::new(&config)?;
    for event in corpus.events() {
        store.ingest(&event)?;
    }
    println!("generated {} events in {:.1?}; {:?}", corpus.event_count(), t0.elapsed(), store.diagnostics());
    let series = store.into_series();
    let tok = config.social.tokenizer;
    for section in [Section::News, Section::InDepth, Section::Other] {
        let s = corpus_stats(series.iter().filter(|s| s.section_label() == section), tok);
        println!("{section}: {s:?}");
    }
    let all = corpus_stats(series.iter(), tok);
    println!("all: {all:?}");

    let profile = corpus.profile.clone();
    let mut groups: BTreeMap<String, usize> = BTreeMap::new();
    let mut confusion: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut news = 0;
    for s in series.iter().filter(|s| s.section_label() == Section::News) {
        news += 1;
        let truth = corpus.blueprint(&s.article_id).unwrap().class;
        let label = match classify_profile(s, &profile, &config.lifecycle.classifier) {
            Ok(c) => {
                let g = match c.class.group() {
                    ProfileGroup::Decreasing => "decreasing",
                    ProfileGroup::NonDecreasing => "steady/increasing",
                    ProfileGroup::Rebounding => "rebounding",
                };
                *groups.entry(g.into()).or_default() += 1;
                c.class.as_str().to_string()
            }
            Err(_) => "insufficient".into(),
        };
        *confusion.entry((truth.as_str().to_string(), label)).or_default() += 1;
    }
    println!("news {news}: {groups:?}");
    println!("confusion: {confusion:?}");

    let mut by_section: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let (mut taus, mut totals) = (Vec::new(), Vec::new());
    for s in &series {
        if let Ok(sl) = shelf_life(s, 0.9, 7 * 1440) {
            let e = by_section.entry(s.section_label().to_string()).or_default();
            e.0 += sl.tau_hours();
            e.1 += 1;
            taus.push(sl.tau_hours());
            totals.push(sl.total_visits_at_horizon as f64);
        }
    }
    for (k, (sum, n)) in &by_section {
        println!("tau90 {k}: {:.2} h over {n}", sum / *n as f64);
    }
    println!("pearson(tau90, visits) = {:.3}", pearson(&taus, &totals));

    let opts = CurveOptions::default();
    let cutoffs = [10, 20, 40, 60, 120, 180, 240, 360];
    for (name, group) in [("news", vec![Section::News]), ("all", vec![Section::News, Section::InDepth, Section::Other])] {
        let sub: Vec<_> = series.iter().filter(|s| group.contains(&s.section_label())).cloned().collect();
        let v = r_squared_curve(&sub, &cutoffs, ModelSpec::VisitsOnly, &opts)?;
        let f = r_squared_curve(&sub, &cutoffs, ModelSpec::Full, &opts)?;
        for ((c, a), (_, b)) in v.iter().zip(&f) {
            println!("{name} cutoff {c:>4}: visits-only {a:.3} full {b:.3}");
        }
    }
    println!("total {:.1?}", t0.elapsed());
    Ok(())
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}
