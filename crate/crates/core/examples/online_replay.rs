//! Replays a week of synthetic traffic through the prediction engine with a
//! persistent data directory, then reopens the directory.

use chrono::TimeDelta;
use newslife::predict::{replay, Engine, RunPlan};
use newslife::simgen::{generate_corpus, CorpusSpec};
use newslife::{EngineConfig, Section};

fn main() -> anyhow::Result<()> {
    let mut spec = CorpusSpec::default();
    spec.publication_days = 10.0;
    spec.mean_visits = 500.0;
    for s in &mut spec.sections {
        s.count = if s.section == Section::News { 120 } else { 50 };
    }
    let events: Vec<_> = generate_corpus(&spec).events().collect();
    let plan = RunPlan { clock_start: spec.start + TimeDelta::days(7) };
    let end = plan.clock_start + TimeDelta::days(7);

    let dir = tempfile::tempdir()?;
    let engine = Engine::open(EngineConfig::default(), plan, dir.path())?;
    let stats = replay(&engine, events, end, None)?;
    println!("{stats:?}");
    for r in engine.retrain_log() {
        println!("retrain at {}: version {}, corpus {} (+{})", r.at, r.version, r.corpus_size, r.added);
    }
    for p in engine.take_predictions().iter().take(5) {
        println!(
            "{} at {} min ({}-min model v{}): predicted {:.0}, observed {}",
            p.article_id, p.age_minutes, p.horizon_minutes, p.model_version, p.predicted, p.observed
        );
    }
    drop(engine);

    let reopened = Engine::open_existing(EngineConfig::default(), dir.path())?;
    println!(
        "reopened: {} articles, registry v{}, clock {:?}",
        reopened.store().len(),
        reopened.registry().current().version,
        reopened.clock()
    );
    Ok(())
}
