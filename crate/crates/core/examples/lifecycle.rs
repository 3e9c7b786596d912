//! Shelf-life and visit-profile classes for a synthetic corpus.

use std::collections::BTreeMap;

use newslife::ingest::SeriesStore;
use newslife::lifecycle::{classify_profile, shelf_life, SeasonalityProfile};
use newslife::simgen::{generate_corpus, CorpusSpec};
use newslife::{EngineConfig, Section};

fn main() -> anyhow::Result<()> {
    let mut spec = CorpusSpec::default();
    for s in &mut spec.sections {
        s.count /= 3;
    }
    let corpus = generate_corpus(&spec);
    let config = EngineConfig::default();
    let store = SeriesStore::new(&config)?;
    for e in corpus.events() {
        store.ingest(&e)?;
    }
    let series = store.into_series();

    let profile = SeasonalityProfile::from_series(&series)?;
    let w = profile.weights();
    println!("hour-of-week weights: min {:.2}, max {:.2}", w.iter().copied().fold(f64::MAX, f64::min), w.iter().copied().fold(0.0, f64::max));

    let l = &config.lifecycle;
    let mut tau: BTreeMap<Section, Vec<f64>> = BTreeMap::new();
    let mut classes: BTreeMap<(Section, String), usize> = BTreeMap::new();
    for s in &series {
        if let Ok(sl) = shelf_life(s, l.ell, l.horizon_days * 1440) {
            tau.entry(s.section_label()).or_default().push(sl.tau_hours());
        }
        if let Ok(c) = classify_profile(s, &profile, &l.classifier) {
            *classes.entry((s.section_label(), c.class.to_string())).or_default() += 1;
        }
    }
    for (section, t) in &tau {
        let mut sorted = t.clone();
        sorted.sort_by(f64::total_cmp);
        println!(
            "{section:<8} {:>3} articles, mean shelf-life {:5.1} h, median {:5.1} h",
            t.len(),
            t.iter().sum::<f64>() / t.len() as f64,
            sorted[sorted.len() / 2]
        );
    }
    for ((section, class), n) in classes {
        println!("{section:<8} {class:<18} {n}");
    }
    Ok(())
}
