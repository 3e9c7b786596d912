use std::fs;
use std::sync::Arc;

use chrono::{DateTime, TimeDelta, Utc};
use newslife::event::Event;
use newslife::predict::{replay, Engine, RunPlan};
use newslife::simgen::{generate_corpus, CorpusSpec};
use newslife::{EngineConfig, Section};

fn small_spec() -> CorpusSpec {
    let mut spec = CorpusSpec::default();
    spec.publication_days = 10.0;
    spec.mean_visits = 500.0;
    spec.min_visits = 30;
    for s in &mut spec.sections {
        s.count = match s.section {
            Section::News => 120,
            _ => 50,
        };
    }
    spec
}

fn setup() -> (Vec<Event>, EngineConfig, RunPlan, DateTime<Utc>) {
    let spec = small_spec();
    let events: Vec<Event> = generate_corpus(&spec).events().collect();
    let mut config = EngineConfig::default();
    config.predict.snapshot_every_ticks = 100;
    let clock_start = spec.start + TimeDelta::days(7);
    (events, config, RunPlan { clock_start }, clock_start + TimeDelta::days(7))
}

#[test]
fn week_long_replay_retrains_daily_and_never_underpredicts() {
    let (events, config, plan, end) = setup();
    let engine = Engine::in_memory(config, plan).unwrap();
    let stats = replay(&engine, events, end, None).unwrap();
    assert_eq!(stats.retrains, 6);
    assert_eq!(stats.ticks, 7 * 24 * 12 - 1);
    assert_eq!(stats.mixed_registry_reads, 0);
    assert!(stats.predictions > 100);
    let predictions = engine.take_predictions();
    assert!(predictions.iter().all(|p| p.predicted >= p.observed as f64));
    assert!(predictions.windows(2).all(|w| w[0].model_version <= w[1].model_version));
    // One bootstrap training plus six daily retrains.
    assert_eq!(engine.registry().current().version, 7);
    let log = engine.retrain_log();
    assert!(log.windows(2).all(|w| w[1].corpus_size >= w[0].corpus_size));
}

#[test]
fn restart_reproduces_prediction_log() {
    let (events, config, plan, end) = setup();
    let full = tempfile::tempdir().unwrap();
    {
        let engine = Engine::open(config.clone(), plan, full.path()).unwrap();
        replay(&engine, events.iter().cloned(), end, None).unwrap();
        assert!(engine.stats().snapshots >= 3);
    }
    let crashed = tempfile::tempdir().unwrap();
    let cut = events.iter().position(|e| e.timestamp() >= plan.clock_start + TimeDelta::hours(80)).unwrap();
    {
        let engine = Engine::open(config.clone(), plan, crashed.path()).unwrap();
        for e in &events[..cut] {
            engine.submit(e).unwrap();
        }
        // Simulated crash: buffered log writes are lost, nothing is flushed.
        std::mem::forget(engine);
    }
    {
        let engine = Engine::open_existing(config.clone(), crashed.path()).unwrap();
        assert!(engine.stats().events_applied as usize <= cut);
        replay(&engine, events.iter().cloned(), end, None).unwrap();
    }
    let a = fs::read(full.path().join("predictions.log")).unwrap();
    let b = fs::read(crashed.path().join("predictions.log")).unwrap();
    assert!(!a.is_empty());
    assert!(a == b, "prediction logs differ ({} vs {} bytes)", a.len(), b.len());
}

#[test]
fn concurrent_readers_never_see_a_mixed_registry() {
    let (events, config, plan, end) = setup();
    let engine = Arc::new(Engine::in_memory(config, plan).unwrap());
    let stop = Arc::new(std::sync::atomic::AtomicBool::new(false));
    let readers: Vec<_> = (0..4)
        .map(|_| {
            let (engine, stop) = (engine.clone(), stop.clone());
            std::thread::spawn(move || {
                let mut seen = 0u64;
                while !stop.load(std::sync::atomic::Ordering::Relaxed) {
                    let reg = engine.registry().current();
                    assert!(reg.is_consistent(), "mixed registry at version {}", reg.version);
                    seen = seen.max(reg.version);
                    std::thread::yield_now();
                }
                seen
            })
        })
        .collect();
    replay(&engine, events, end, None).unwrap();
    stop.store(true, std::sync::atomic::Ordering::Relaxed);
    for r in readers {
        assert!(r.join().unwrap() >= 1);
    }
}
