use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use super::registry::{GroupModels, ModelRegistry, RegistryHandle, SectionGroup, TrainingSet};
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::features::snapshot_features;
use crate::ingest::{ArticleSeries, SeriesStore};
use crate::regress::{fit_examples, r_squared, ModelSpec, Selection, TargetKind, TrainingExample};

/// Per-group outcome of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub trained: Vec<SectionGroup>,
    /// Groups that kept their previous models, with the reason.
    pub skipped: Vec<(SectionGroup, String)>,
}

fn examples(series: &[&ArticleSeries], horizon: u32, cfg: &EngineConfig) -> Result<Vec<TrainingExample>> {
    let target = cfg.predict.target_minutes as i64;
    series
        .iter()
        .map(|s| {
            Ok(TrainingExample {
                features: snapshot_features(s, horizon as i64, cfg.social.tokenizer)?,
                target: (s.visits_before(target) as f64).ln_1p(),
            })
        })
        .collect()
}

fn train_group(series: &[&ArticleSeries], cfg: &EngineConfig, now: DateTime<Utc>) -> Result<GroupModels> {
    let mut horizons = BTreeMap::new();
    for &h in &cfg.predict.horizons_minutes {
        let ex = examples(series, h, cfg)?;
        let mut model = fit_examples(&ex, ModelSpec::Full, Selection::Stepwise, TargetKind::LogVisits)?;
        model.meta.insert("horizon_minutes".into(), h.to_string());
        model.meta.insert("target_minutes".into(), cfg.predict.target_minutes.to_string());
        horizons.insert(h, model);
    }
    Ok(GroupModels {
        horizons,
        training: TrainingSet::describe(series.iter().map(|s| s.article_id.as_str()), now),
    })
}

/// Fits one stepwise model per (group, horizon) on features at the horizon
/// against log(visits at the target age + 1).
///
/// Groups with fewer than `min_training_articles` articles keep their models
/// from `previous`. When no group could be trained the result is `previous`
/// unchanged; otherwise it is the next registry generation.
pub fn train_horizon_models(corpus: &[ArticleSeries], previous: &ModelRegistry, cfg: &EngineConfig, now: DateTime<Utc>) -> (ModelRegistry, TrainReport) {
    let mut by_group: BTreeMap<SectionGroup, Vec<&ArticleSeries>> = BTreeMap::new();
    for s in corpus {
        by_group.entry(SectionGroup::of(s.section_label(), &cfg.predict)).or_default().push(s);
    }
    let mut report = TrainReport {
        trained: Vec::new(),
        skipped: Vec::new(),
    };
    let mut groups = previous.groups.clone();
    for g in SectionGroup::ALL {
        let members = by_group.remove(&g).unwrap_or_default();
        if members.len() < cfg.predict.min_training_articles {
            let why = format!("{} training articles, need {}", members.len(), cfg.predict.min_training_articles);
            tracing::warn!(group = %g, "{why}; keeping previous models");
            report.skipped.push((g, why));
            continue;
        }
        match train_group(&members, cfg, now) {
            Ok(models) => {
                groups.insert(g, models);
                report.trained.push(g);
            }
            Err(e) => {
                tracing::warn!(group = %g, error = %e, "training failed; keeping previous models");
                report.skipped.push((g, e.to_string()));
            }
        }
    }
    if report.trained.is_empty() {
        return (previous.clone(), report);
    }
    (previous.successor(groups, now), report)
}

/// An online prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub article_id: String,
    pub group: SectionGroup,
    pub horizon_minutes: u32,
    pub age_minutes: i64,
    /// Predicted visits at the target age.
    pub predicted: f64,
    pub observed: u64,
    pub target_minutes: u32,
    pub model_version: u64,
    pub generated_at: DateTime<Utc>,
}

/// The largest configured horizon not exceeding `age_minutes`.
pub fn select_horizon(horizons: &[u32], age_minutes: i64) -> Option<u32> {
    horizons.iter().copied().filter(|&h| h as i64 <= age_minutes).max()
}

/// Predicts with the model of the largest horizon not exceeding the
/// article's age, never below the visits observed so far.
pub fn predict_article(registry: &ModelRegistry, series: &ArticleSeries, now: DateTime<Utc>, cfg: &EngineConfig) -> Result<Prediction> {
    let age = series
        .age_minutes(now)
        .ok_or_else(|| Error::InsufficientData(format!("{} has no visits", series.article_id)))?;
    let horizons = &cfg.predict.horizons_minutes;
    let horizon = select_horizon(horizons, age).ok_or_else(|| Error::TooEarly {
        article_id: series.article_id.clone(),
        age_minutes: age,
        smallest_horizon: horizons.iter().copied().min().unwrap_or(0),
    })?;
    let group = SectionGroup::of(series.section_label(), &cfg.predict);
    let model = registry.model(group, horizon).ok_or_else(|| Error::NoModel {
        group: group.to_string(),
        horizon,
    })?;
    let fv = snapshot_features(series, horizon as i64, cfg.social.tokenizer)?;
    let observed = series.visits_before(age.saturating_add(1));
    Ok(Prediction {
        article_id: series.article_id.clone(),
        group,
        horizon_minutes: horizon,
        age_minutes: age,
        predicted: model.predict_with_floor(&fv.values(), observed as f64),
        observed,
        target_minutes: registry.target_minutes,
        model_version: registry.version,
        generated_at: now,
    })
}

/// Held-out r² per horizon, on log(visits at target + 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonScore {
    pub horizon_minutes: u32,
    pub articles: usize,
    pub r_squared: f64,
}

/// Scores the registry on matured articles it was not trained on. Each
/// article is predicted as it would have been when it reached the horizon.
pub fn evaluate_held_out(registry: &ModelRegistry, articles: &[ArticleSeries], cfg: &EngineConfig) -> Result<Vec<HorizonScore>> {
    if articles.len() < 2 {
        return Err(Error::InsufficientData("held-out evaluation needs at least 2 articles".into()));
    }
    let target = cfg.predict.target_minutes as i64;
    let mut out = Vec::new();
    for &h in &cfg.predict.horizons_minutes {
        let (mut actual, mut predicted) = (Vec::new(), Vec::new());
        for s in articles {
            let group = SectionGroup::of(s.section_label(), &cfg.predict);
            let Some(model) = registry.model(group, h) else { continue };
            let fv = snapshot_features(s, h as i64, cfg.social.tokenizer)?;
            predicted.push(model.predict(&fv).ln_1p());
            actual.push((s.visits_before(target) as f64).ln_1p());
        }
        out.push(HorizonScore {
            horizon_minutes: h,
            articles: actual.len(),
            r_squared: if actual.len() < 2 { f64::NAN } else { r_squared(&actual, &predicted) },
        });
    }
    Ok(out)
}

/// The growing training corpus and the retraining clock.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trainer {
    /// Articles that have passed the target age, in the order they matured.
    pub corpus: BTreeSet<String>,
    pub last_retrain: Option<DateTime<Utc>>,
    pub retrains: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainOutcome {
    pub at: DateTime<Utc>,
    pub added: usize,
    pub corpus_size: usize,
    pub version: u64,
    pub report: TrainReport,
}

impl Trainer {
    /// Ids of stored articles whose first visit is at least the target age before `now`.
    fn matured(store: &SeriesStore, now: DateTime<Utc>, cfg: &EngineConfig) -> Vec<String> {
        let target = TimeDelta::minutes(cfg.predict.target_minutes as i64);
        let mut out = Vec::new();
        store.for_each(|s| {
            if s.first_visit().is_some_and(|fv| fv + target <= now) {
                out.push(s.article_id.clone());
            }
        });
        out
    }

    /// Trains unconditionally on every matured article and publishes the result.
    pub fn retrain(&mut self, store: &SeriesStore, registry: &RegistryHandle, now: DateTime<Utc>, cfg: &EngineConfig) -> RetrainOutcome {
        let before = self.corpus.len();
        self.corpus.extend(Self::matured(store, now, cfg));
        let series: Vec<ArticleSeries> = self.corpus.iter().filter_map(|id| store.snapshot(id)).collect();
        let current = registry.current();
        let (next, report) = train_horizon_models(&series, &current, cfg, now);
        if next.version != current.version {
            registry.publish(next.clone());
        }
        self.last_retrain = Some(now);
        self.retrains += 1;
        tracing::info!(version = next.version, corpus = self.corpus.len(), "retrained");
        RetrainOutcome {
            at: now,
            added: self.corpus.len() - before,
            corpus_size: self.corpus.len(),
            version: next.version,
            report,
        }
    }

    /// Retrains when the retrain interval has elapsed since the last retrain
    /// (or none has happened yet); otherwise does nothing.
    pub fn retrain_tick(&mut self, store: &SeriesStore, registry: &RegistryHandle, now: DateTime<Utc>, cfg: &EngineConfig) -> Option<RetrainOutcome> {
        let interval = TimeDelta::minutes(cfg.predict.retrain_interval_minutes as i64);
        match self.last_retrain {
            Some(last) if now - last < interval => None,
            _ => Some(self.retrain(store, registry, now, cfg)),
        }
    }
}
