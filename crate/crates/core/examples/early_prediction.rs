//! Fits visits-only and full stepwise models at several cutoffs, then saves
//! one model to the flat text format and predicts with the reloaded copy.

use newslife::features::snapshot_features;
use newslife::ingest::SeriesStore;
use newslife::regress::{examples_at, fit_examples, r_squared_curve, CurveOptions, LinearModel, ModelSpec, TargetKind};
use newslife::simgen::{generate_corpus, CorpusSpec};
use newslife::EngineConfig;

fn main() -> anyhow::Result<()> {
    let mut spec = CorpusSpec::default();
    for s in &mut spec.sections {
        s.count /= 2;
    }
    let corpus = generate_corpus(&spec);
    let store = SeriesStore::new(&EngineConfig::default())?;
    for e in corpus.events() {
        store.ingest(&e)?;
    }
    let series = store.into_series();

    let opts = CurveOptions::default();
    let cutoffs = [10, 20, 60, 180, 360];
    let visits = r_squared_curve(&series, &cutoffs, ModelSpec::VisitsOnly, &opts)?;
    let full = r_squared_curve(&series, &cutoffs, ModelSpec::Full, &opts)?;
    println!("cutoff  visits-only  full");
    for ((c, a), (_, b)) in visits.iter().zip(&full) {
        println!("{c:>5}m  {a:>11.3}  {b:.3}");
    }

    let examples = examples_at(&series, 20, &opts)?;
    let model = fit_examples(&examples, ModelSpec::Full, opts.selection, TargetKind::LogVisits)?;
    println!("20-minute model keeps {} of {} terms:", model.k(), model.terms.len() - 1);
    for (term, coef) in model.retained_terms().take(8) {
        println!("  {:<12} {coef:+.4}", term.label());
    }

    let path = std::env::temp_dir().join("newslife-20m.model");
    model.save(&path)?;
    let reloaded = LinearModel::load(&path)?;
    let s = &series[0];
    let fv = snapshot_features(s, 20, opts.tokenizer)?;
    println!(
        "{}: predicted {:.0} visits at 7 days, actual {}",
        s.article_id,
        reloaded.predict(&fv),
        s.visits_before(opts.target_minutes as i64)
    );
    Ok(())
}
