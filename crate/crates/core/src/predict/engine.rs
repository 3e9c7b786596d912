use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeDelta, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::registry::{ModelRegistry, RegistryHandle, SectionGroup, VERSION_KEY};
use super::train::{predict_article, Prediction, RetrainOutcome, Trainer};
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::event::Event;
use crate::ingest::{SeriesStore, StoreState};

const META_FILE: &str = "meta.json";
const EVENTS_FILE: &str = "events.log";
const PREDICTIONS_FILE: &str = "predictions.log";
const SNAPSHOT_FILE: &str = "snapshot.json";

/// Fixed parameters of a run, written once into the data directory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    /// Events before this instant only build up state. At this instant the
    /// initial models are trained and the tick clock starts.
    pub clock_start: DateTime<Utc>,
}

/// Counters describing what the engine has done so far.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineStats {
    pub events_applied: u64,
    pub ticks: u64,
    pub retrains: u64,
    pub predictions: u64,
    pub prediction_errors: u64,
    /// Predictions whose model stamp disagreed with the registry version.
    pub mixed_registry_reads: u64,
    pub snapshots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Snapshot {
    plan: RunPlan,
    stats: EngineStats,
    next_tick: Option<DateTime<Utc>>,
    clock: Option<DateTime<Utc>>,
    trainer: Trainer,
    registry: ModelRegistry,
    store: StoreState,
}

struct State {
    stats: EngineStats,
    /// The next tick instant, once the clock has started.
    next_tick: Option<DateTime<Utc>>,
    /// Latest event or tick time seen.
    clock: Option<DateTime<Utc>>,
    trainer: Trainer,
    retrain_log: Vec<RetrainOutcome>,
    event_log: Option<BufWriter<File>>,
    prediction_log: Option<BufWriter<File>>,
    recent_predictions: Vec<Prediction>,
}

/// Ingestion, periodic retraining and horizon predictions driven by event
/// time. With a data directory every accepted event is appended to a log
/// and the state is snapshotted periodically, so a restarted engine
/// continues exactly where the crashed one would have.
pub struct Engine {
    config: EngineConfig,
    plan: RunPlan,
    store: SeriesStore,
    registry: RegistryHandle,
    state: Mutex<State>,
    dir: Option<PathBuf>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

fn append(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?))
}

/// Truncates `path` after its first `keep` complete lines. Returns the
/// number of complete lines the file had.
fn truncate_lines(path: &Path, keep: Option<u64>) -> Result<u64> {
    let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(path)?;
    let mut reader = BufReader::new(&mut file);
    let (mut lines, mut offset, mut cut) = (0u64, 0u64, None);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 || buf.last() != Some(&b'\n') {
            break;
        }
        lines += 1;
        offset += n as u64;
        if keep == Some(lines) {
            cut = Some(offset);
        }
    }
    let end = match keep {
        Some(0) => 0,
        Some(_) => cut.unwrap_or(offset),
        None => offset,
    };
    drop(reader);
    file.set_len(end)?;
    file.seek(SeekFrom::End(0))?;
    Ok(lines)
}

impl Engine {
    /// An engine without persistence.
    pub fn in_memory(config: EngineConfig, plan: RunPlan) -> Result<Self> {
        config.validate()?;
        Ok(Engine {
            store: SeriesStore::new(&config)?,
            registry: RegistryHandle::new(ModelRegistry::empty(config.predict.target_minutes)),
            state: Mutex::new(State {
                stats: EngineStats::default(),
                next_tick: None,
                clock: None,
                trainer: Trainer::default(),
                retrain_log: Vec::new(),
                event_log: None,
                prediction_log: None,
                recent_predictions: Vec::new(),
            }),
            config,
            plan,
            dir: None,
        })
    }

    /// Opens (or creates) a persistent engine in `dir`. An existing directory
    /// is recovered: the latest snapshot is loaded, the prediction log is cut
    /// back to that snapshot and the event log tail is replayed.
    pub fn open(config: EngineConfig, plan: RunPlan, dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let meta = dir.join(META_FILE);
        let plan = if meta.exists() {
            let stored: RunPlan = serde_json::from_str(&fs::read_to_string(&meta)?)?;
            if stored != plan {
                return Err(Error::Config(format!("data directory was created with {stored:?}, not {plan:?}")));
            }
            stored
        } else {
            write_atomic(&meta, serde_json::to_string_pretty(&plan)?.as_bytes())?;
            plan
        };
        let mut engine = Engine::in_memory(config, plan)?;
        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let mut skip = 0;
        if snapshot_path.exists() {
            let snap: Snapshot = serde_json::from_reader(BufReader::new(File::open(&snapshot_path)?))?;
            engine.store = SeriesStore::restore(&engine.config, snap.store)?;
            engine.registry.publish(snap.registry);
            let st = engine.state.get_mut();
            st.stats = snap.stats;
            st.next_tick = snap.next_tick;
            st.clock = snap.clock;
            st.trainer = snap.trainer;
            skip = st.stats.events_applied;
        }
        let predictions = dir.join(PREDICTIONS_FILE);
        truncate_lines(&predictions, Some(engine.state.get_mut().stats.predictions))?;
        let events = dir.join(EVENTS_FILE);
        truncate_lines(&events, None)?;
        engine.state.get_mut().prediction_log = Some(append(&predictions)?);
        engine.dir = Some(dir);
        for (i, line) in BufReader::new(File::open(&events)?).lines().enumerate() {
            if (i as u64) < skip {
                continue;
            }
            let event = Event::from_line(&line?)?;
            engine.apply(&event, false)?;
        }
        engine.state.get_mut().event_log = Some(append(&events)?);
        Ok(engine)
    }

    /// Reopens a data directory using the run plan stored in it.
    pub fn open_existing(config: EngineConfig, dir: impl AsRef<Path>) -> Result<Self> {
        let meta = dir.as_ref().join(META_FILE);
        let plan: RunPlan = serde_json::from_str(&fs::read_to_string(&meta)?)?;
        Self::open(config, plan, dir)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn plan(&self) -> RunPlan {
        self.plan
    }

    pub fn store(&self) -> &SeriesStore {
        &self.store
    }

    pub fn registry(&self) -> &RegistryHandle {
        &self.registry
    }

    pub fn stats(&self) -> EngineStats {
        self.state.lock().stats.clone()
    }

    pub fn clock(&self) -> Option<DateTime<Utc>> {
        self.state.lock().clock
    }

    pub fn retrain_log(&self) -> Vec<RetrainOutcome> {
        self.state.lock().retrain_log.clone()
    }

    /// Predictions made since the last call.
    pub fn take_predictions(&self) -> Vec<Prediction> {
        std::mem::take(&mut self.state.lock().recent_predictions)
    }

    /// Accepts one event: fires every tick due at or before its timestamp,
    /// then ingests it.
    pub fn submit(&self, event: &Event) -> Result<()> {
        event.validate(&self.config.epoch)?;
        self.apply(event, true)
    }

    pub fn submit_all<'a>(&self, events: impl IntoIterator<Item = &'a Event>) -> Result<usize> {
        let mut n = 0;
        for e in events {
            self.submit(e)?;
            n += 1;
        }
        Ok(n)
    }

    fn apply(&self, event: &Event, log: bool) -> Result<()> {
        let mut st = self.state.lock();
        if log {
            if let Some(w) = st.event_log.as_mut() {
                writeln!(w, "{}", event.to_line())?;
            }
        }
        self.run_ticks(&mut st, event.timestamp(), true)?;
        st.stats.events_applied += 1;
        st.clock = st.clock.max(Some(event.timestamp()));
        // Invalid events were filtered before logging; anything failing here is counted by the store.
        let _ = self.store.ingest(event);
        Ok(())
    }

    /// Fires every tick strictly before `end`, for finishing a replay.
    pub fn finish(&self, end: DateTime<Utc>) -> Result<()> {
        let mut st = self.state.lock();
        self.run_ticks(&mut st, end, false)?;
        self.flush_locked(&mut st)
    }

    pub fn flush(&self) -> Result<()> {
        let mut st = self.state.lock();
        self.flush_locked(&mut st)
    }

    fn flush_locked(&self, st: &mut State) -> Result<()> {
        if let Some(w) = st.event_log.as_mut() {
            w.flush()?;
        }
        if let Some(w) = st.prediction_log.as_mut() {
            w.flush()?;
        }
        Ok(())
    }

    fn run_ticks(&self, st: &mut State, until: DateTime<Utc>, inclusive: bool) -> Result<()> {
        let due = |t: DateTime<Utc>| if inclusive { t <= until } else { t < until };
        if st.next_tick.is_none() {
            if !due(self.plan.clock_start) {
                return Ok(());
            }
            let outcome = st.trainer.retrain(&self.store, &self.registry, self.plan.clock_start, &self.config);
            st.retrain_log.push(outcome);
            st.clock = st.clock.max(Some(self.plan.clock_start));
            st.next_tick = Some(self.plan.clock_start + self.tick());
        }
        while let Some(t) = st.next_tick.filter(|&t| due(t)) {
            self.tick_at(st, t)?;
            st.next_tick = Some(t + self.tick());
        }
        Ok(())
    }

    fn tick(&self) -> TimeDelta {
        TimeDelta::minutes(self.config.predict.tick_minutes as i64)
    }

    fn tick_at(&self, st: &mut State, t: DateTime<Utc>) -> Result<()> {
        st.stats.ticks += 1;
        st.clock = st.clock.max(Some(t));
        if let Some(outcome) = st.trainer.retrain_tick(&self.store, &self.registry, t, &self.config) {
            st.stats.retrains += 1;
            st.retrain_log.push(outcome);
        }
        let registry = self.registry.current();
        let tick = self.config.predict.tick_minutes as i64;
        let horizons = &self.config.predict.horizons_minutes;
        let mut due = Vec::new();
        self.store.for_each(|s| {
            if let Some(age) = s.age_minutes(t) {
                if horizons.iter().any(|&h| age >= h as i64 && age - tick < h as i64) {
                    due.push(s.article_id.clone());
                }
            }
        });
        for id in due {
            let result = self.store.with_series(&id, |s| predict_article(&registry, s, t, &self.config));
            match result {
                Some(Ok(p)) => {
                    let stamp = registry.model(p.group, p.horizon_minutes).and_then(|m| m.meta.get(VERSION_KEY));
                    if stamp != Some(&registry.version.to_string()) {
                        st.stats.mixed_registry_reads += 1;
                    }
                    if let Some(w) = st.prediction_log.as_mut() {
                        writeln!(w, "{}", serde_json::to_string(&p)?)?;
                    }
                    st.stats.predictions += 1;
                    st.recent_predictions.push(p);
                }
                _ => st.stats.prediction_errors += 1,
            }
        }
        let every = self.config.predict.snapshot_every_ticks as u64;
        if every > 0 && st.stats.ticks % every == 0 {
            self.write_snapshot(st)?;
        }
        Ok(())
    }

    fn write_snapshot(&self, st: &mut State) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        self.flush_locked(st)?;
        if let Some(w) = st.event_log.as_mut() {
            w.get_ref().sync_data()?;
        }
        if let Some(w) = st.prediction_log.as_mut() {
            w.get_ref().sync_data()?;
        }
        st.stats.snapshots += 1;
        let snap = Snapshot {
            plan: self.plan,
            stats: st.stats.clone(),
            next_tick: st.next_tick.map(|t| t + self.tick()),
            clock: st.clock,
            trainer: st.trainer.clone(),
            registry: (*self.registry.current()).clone(),
            store: self.store.state(),
        };
        write_atomic(&dir.join(SNAPSHOT_FILE), &serde_json::to_vec(&snap)?)
    }

    /// Predicts an article at the engine clock with the current registry.
    pub fn predict(&self, article_id: &str) -> Result<Prediction> {
        let now = self.clock().ok_or_else(|| Error::InsufficientData("no events yet".into()))?;
        let registry = self.registry.current();
        self.store
            .with_series(article_id, |s| predict_article(&registry, s, now, &self.config))
            .unwrap_or_else(|| Err(Error::UnknownArticle(article_id.into())))
    }

    /// Group of an article, if known.
    pub fn group_of(&self, article_id: &str) -> Option<SectionGroup> {
        self.store
            .with_series(article_id, |s| SectionGroup::of(s.section_label(), &self.config.predict))
    }
}

/// Feeds `events` (in time order) to the engine, skipping the ones it has
/// already applied, then fires the remaining ticks before `end`.
///
/// With `speed` set, event time advances at `speed` times wall-clock time.
pub fn replay(engine: &Engine, events: impl IntoIterator<Item = Event>, end: DateTime<Utc>, speed: Option<f64>) -> Result<EngineStats> {
    let skip = engine.stats().events_applied as usize;
    let mut pace: Option<(std::time::Instant, DateTime<Utc>)> = None;
    for event in events.into_iter().skip(skip) {
        if event.timestamp() >= end {
            break;
        }
        if let Some(speed) = speed.filter(|s| *s > 0.0) {
            let (wall0, ev0) = *pace.get_or_insert((std::time::Instant::now(), event.timestamp()));
            let due = (event.timestamp() - ev0).num_milliseconds() as f64 / speed / 1000.0;
            let elapsed = wall0.elapsed().as_secs_f64();
            if due > elapsed {
                std::thread::sleep(std::time::Duration::from_secs_f64(due - elapsed));
            }
        }
        engine.submit(&event)?;
    }
    engine.finish(end)?;
    Ok(engine.stats())
}
