//! Engine configuration, loadable from TOML. Every field has a default, so an
//! empty file is a valid configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{CollectionEpoch, Section};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub epoch: CollectionEpoch,
    pub ingest: IngestConfig,
    pub social: SocialConfig,
    pub lifecycle: LifecycleConfig,
    pub predict: PredictConfig,
}

impl EngineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: EngineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let l = &self.lifecycle;
        if !(l.ell > 0.0 && l.ell < 1.0) {
            return Err(Error::Config(format!("lifecycle.ell must be in (0,1), got {}", l.ell)));
        }
        let p = &self.predict;
        if p.horizons_minutes.is_empty() {
            return Err(Error::Config("predict.horizons_minutes is empty".into()));
        }
        if p.horizons_minutes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("predict.horizons_minutes must be strictly increasing".into()));
        }
        if p.tick_minutes == 0 || p.retrain_interval_minutes == 0 {
            return Err(Error::Config("predict tick and retrain intervals must be positive".into()));
        }
        crate::ingest::ReferralClassifier::new(&self.ingest.site_hosts, &self.ingest.search_hosts)?;
        Ok(())
    }
}

/// What to do with a visit timestamped before the article's current first minute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LateVisitPolicy {
    /// Move the first-visit minute back; ingestion stays order-independent.
    #[default]
    Rebase,
    /// Keep the first-visit minute and count the visit in minute 0.
    FoldIntoFirstMinute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub site_hosts: Vec<String>,
    pub search_hosts: Vec<String>,
    pub monitor_min_visits: u64,
    pub monitor_window_minutes: u32,
    pub poll_top_k: usize,
    pub poll_window_minutes: u32,
    pub sample_min_visits: u64,
    pub sample_window_days: u32,
    pub late_visit_policy: LateVisitPolicy,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            site_hosts: vec!["example-news.com".into()],
            search_hosts: vec!["google.com".into(), "bing.com".into(), "search.yahoo.com".into(), "duckduckgo.com".into()],
            monitor_min_visits: 5,
            monitor_window_minutes: 600,
            poll_top_k: 30,
            poll_window_minutes: 5,
            sample_min_visits: 100,
            sample_window_days: 7,
            late_visit_policy: LateVisitPolicy::Rebase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialConfig {
    pub corporate_handles: Vec<String>,
    pub unique_threshold: usize,
    pub tokenizer: TokenizerConfig,
}

impl Default for SocialConfig {
    fn default() -> Self {
        SocialConfig {
            corporate_handles: vec!["AJEnglish".into(), "AJELive".into()],
            unique_threshold: crate::social::DEFAULT_UNIQUE_THRESHOLD,
            tokenizer: TokenizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    /// Tokens shorter than this many characters are dropped.
    pub min_token_chars: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            min_token_chars: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifecycleConfig {
    pub ell: f64,
    pub horizon_days: u32,
    pub classifier: ClassifierConfig,
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        LifecycleConfig {
            ell: 0.90,
            horizon_days: 7,
            classifier: ClassifierConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub window_hours_equiv: f64,
    pub smoothing_minutes: usize,
    pub plateau_minutes: usize,
    pub plateau_band: f64,
    /// A plateau must be at most this steep relative to the decline after it.
    pub plateau_slope_ratio: f64,
    pub steady_slope_fraction: f64,
    pub rebound_recovery_fraction: f64,
    /// Dips and recoveries must also exceed this many standard deviations of
    /// count noise in the smoothed curve.
    pub rebound_noise_z: f64,
    pub min_nonempty_minutes: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            window_hours_equiv: 12.0,
            smoothing_minutes: 30,
            plateau_minutes: 60,
            plateau_band: 0.20,
            plateau_slope_ratio: 0.5,
            steady_slope_fraction: 0.10,
            rebound_recovery_fraction: 0.30,
            rebound_noise_z: 4.0,
            min_nonempty_minutes: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub horizons_minutes: Vec<u32>,
    pub target_minutes: u32,
    pub retrain_interval_minutes: u32,
    pub min_training_articles: usize,
    /// Sections predicted with the news model set; all others use the other set.
    pub news_sections: Vec<Section>,
    pub tick_minutes: u32,
    /// Persist a full snapshot every this many ticks (0 disables snapshots).
    pub snapshot_every_ticks: u32,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            horizons_minutes: vec![60, 360, 720, 1440],
            target_minutes: 3 * 24 * 60,
            retrain_interval_minutes: 24 * 60,
            min_training_articles: 30,
            news_sections: vec![Section::News],
            tick_minutes: 5,
            snapshot_every_ticks: 144,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = EngineConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, EngineConfig::default());
        assert_eq!(cfg.predict.horizons_minutes, [60, 360, 720, 1440]);
        assert_eq!(cfg.predict.target_minutes, 4320);
        assert_eq!(cfg.ingest.poll_top_k, 30);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = EngineConfig::default();
        cfg.predict.target_minutes = 7 * 24 * 60;
        cfg.social.corporate_handles.push("Other".into());
        let back = EngineConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(EngineConfig::from_toml_str("[lifecycle]\nell = 1.5\n").is_err());
        assert!(EngineConfig::from_toml_str("[predict]\nhorizons_minutes = [60, 30]\n").is_err());
        assert!(EngineConfig::from_toml_str("[ingest]\nsite_hosts = [\"a.com\"]\nsearch_hosts = [\"a.com\"]\n").is_err());
        assert!(EngineConfig::from_toml_str("[nonsense]\nx = 1\n").is_err());
    }
}
