use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use super::referral::ReferralClassifier;
use super::series::ArticleSeries;
use crate::config::{EngineConfig, LateVisitPolicy};
use crate::error::Result;
use crate::event::{CollectionEpoch, Event, Reaction};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreDiagnostics {
    pub events_ingested: u64,
    pub events_rejected: u64,
    pub unparseable_referrals: u64,
    pub late_visits: u64,
    pub late_reactions: u64,
}

#[derive(Default)]
struct Counters {
    ingested: AtomicU64,
    rejected: AtomicU64,
    unparseable: AtomicU64,
    late_visits: AtomicU64,
    late_reactions: AtomicU64,
}

/// Per-article series keyed by article id.
///
/// Updates to one article are serialized by that article's lock; different
/// articles can be ingested concurrently. Readers get cloned snapshots.
pub struct SeriesStore {
    classifier: ReferralClassifier,
    policy: LateVisitPolicy,
    epoch: CollectionEpoch,
    corporate_handles: Vec<String>,
    unique_threshold: usize,
    articles: RwLock<BTreeMap<String, Arc<Mutex<ArticleSeries>>>>,
    counters: Counters,
}

/// Serializable contents of a store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreState {
    pub series: Vec<ArticleSeries>,
    pub diagnostics: StoreDiagnostics,
}

impl SeriesStore {
    pub fn new(config: &EngineConfig) -> Result<Self> {
        Ok(SeriesStore {
            classifier: ReferralClassifier::new(&config.ingest.site_hosts, &config.ingest.search_hosts)?,
            policy: config.ingest.late_visit_policy,
            epoch: config.epoch,
            corporate_handles: config.social.corporate_handles.clone(),
            unique_threshold: config.social.unique_threshold,
            articles: RwLock::new(BTreeMap::new()),
            counters: Counters::default(),
        })
    }

    fn entry(&self, article_id: &str) -> Arc<Mutex<ArticleSeries>> {
        if let Some(s) = self.articles.read().get(article_id) {
            return Arc::clone(s);
        }
        let mut map = self.articles.write();
        Arc::clone(
            map.entry(article_id.to_string())
                .or_insert_with(|| Arc::new(Mutex::new(ArticleSeries::new(article_id)))),
        )
    }

    /// Validates and folds one event into its article's series. Invalid events
    /// are counted and returned as errors; nothing is stored for them.
    pub fn ingest(&self, event: &Event) -> Result<()> {
        if let Err(e) = event.validate(&self.epoch) {
            self.counters.rejected.fetch_add(1, Ordering::Relaxed);
            return Err(e);
        }
        let series = self.entry(event.article_id());
        let mut series = series.lock();
        let outcome = match event {
            Event::Visit(v) => {
                let classified = self.classifier.classify(&v.referral_url);
                if classified.unparseable {
                    self.counters.unparseable.fetch_add(1, Ordering::Relaxed);
                }
                if let Some(section) = v.section {
                    series.record_section(section);
                }
                series.add_visit(v.timestamp, classified.class, self.policy)
            }
            Event::Reaction(r) => match &r.reaction {
                Reaction::Tweet(t) => series.add_tweet(r.timestamp, t, &self.corporate_handles, self.unique_threshold),
                Reaction::FacebookSnapshot { share_count } => series.add_share_snapshot(r.timestamp, *share_count),
            },
        };
        if outcome.late_visit {
            self.counters.late_visits.fetch_add(1, Ordering::Relaxed);
        }
        if outcome.late_reaction {
            self.counters.late_reactions.fetch_add(1, Ordering::Relaxed);
        }
        self.counters.ingested.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    /// Ingests everything, returning the number of rejected events.
    pub fn ingest_all<'a>(&self, events: impl IntoIterator<Item = &'a Event>) -> usize {
        events.into_iter().filter(|e| self.ingest(e).is_err()).count()
    }

    /// Ingests a JSON-lines event file. Malformed lines abort with their line
    /// number; invalid events are counted and skipped.
    pub fn ingest_file(&self, path: impl AsRef<std::path::Path>) -> Result<usize> {
        let file = std::fs::File::open(path)?;
        let mut n = 0;
        for event in crate::event::read_events(std::io::BufReader::new(file)) {
            let _ = self.ingest(&event?);
            n += 1;
        }
        Ok(n)
    }

    pub fn diagnostics(&self) -> StoreDiagnostics {
        StoreDiagnostics {
            events_ingested: self.counters.ingested.load(Ordering::Relaxed),
            events_rejected: self.counters.rejected.load(Ordering::Relaxed),
            unparseable_referrals: self.counters.unparseable.load(Ordering::Relaxed),
            late_visits: self.counters.late_visits.load(Ordering::Relaxed),
            late_reactions: self.counters.late_reactions.load(Ordering::Relaxed),
        }
    }

    pub fn len(&self) -> usize {
        self.articles.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn article_ids(&self) -> Vec<String> {
        self.articles.read().keys().cloned().collect()
    }

    pub fn snapshot(&self, article_id: &str) -> Option<ArticleSeries> {
        let s = self.articles.read().get(article_id).cloned()?;
        let guard = s.lock();
        Some(guard.clone())
    }

    /// Runs `f` against a locked article without cloning it.
    pub fn with_series<R>(&self, article_id: &str, f: impl FnOnce(&ArticleSeries) -> R) -> Option<R> {
        let s = self.articles.read().get(article_id).cloned()?;
        let guard = s.lock();
        Some(f(&guard))
    }

    /// Calls `f` for every article in id order.
    pub fn for_each(&self, mut f: impl FnMut(&ArticleSeries)) {
        let entries: Vec<_> = self.articles.read().values().cloned().collect();
        for s in entries {
            f(&s.lock());
        }
    }

    pub fn snapshots(&self) -> Vec<ArticleSeries> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(|s| out.push(s.clone()));
        out
    }

    /// Consumes the store, handing back its series without copying.
    pub fn into_series(self) -> Vec<ArticleSeries> {
        self.articles
            .into_inner()
            .into_values()
            .map(|s| match Arc::try_unwrap(s) {
                Ok(m) => m.into_inner(),
                Err(shared) => shared.lock().clone(),
            })
            .collect()
    }

    pub fn state(&self) -> StoreState {
        StoreState {
            series: self.snapshots(),
            diagnostics: self.diagnostics(),
        }
    }

    pub fn restore(config: &EngineConfig, state: StoreState) -> Result<Self> {
        let store = SeriesStore::new(config)?;
        {
            let mut map = store.articles.write();
            for s in state.series {
                map.insert(s.article_id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        let d = state.diagnostics;
        store.counters.ingested.store(d.events_ingested, Ordering::Relaxed);
        store.counters.rejected.store(d.events_rejected, Ordering::Relaxed);
        store.counters.unparseable.store(d.unparseable_referrals, Ordering::Relaxed);
        store.counters.late_visits.store(d.late_visits, Ordering::Relaxed);
        store.counters.late_reactions.store(d.late_reactions, Ordering::Relaxed);
        Ok(store)
    }
}
