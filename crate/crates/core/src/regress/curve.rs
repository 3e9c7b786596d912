use serde::{Deserialize, Serialize};

use super::design::{terms_for, DesignMatrix};
use super::model::{fit_ols, LinearModel, TargetKind};
use super::stepwise::stepwise_select;
use crate::config::TokenizerConfig;
use crate::error::{Error, Result};
use crate::features::{snapshot_features, FeatureVector, NUM_FEATURES};
use crate::ingest::ArticleSeries;

/// A feature vector paired with its response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub features: FeatureVector,
    pub target: f64,
}

/// Which predictors a model may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    /// Visits only.
    VisitsOnly,
    /// All ten features and their pairwise interactions.
    Full,
}

impl ModelSpec {
    pub fn features(self) -> Vec<usize> {
        match self {
            ModelSpec::VisitsOnly => vec![0],
            ModelSpec::Full => (0..NUM_FEATURES).collect(),
        }
    }
}

/// How coefficients are chosen once the term scope is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Ols,
    Stepwise,
}

/// Fits a model to examples using the given predictors.
pub fn fit_examples(examples: &[TrainingExample], spec: ModelSpec, selection: Selection, target: TargetKind) -> Result<LinearModel> {
    if examples.is_empty() {
        return Err(Error::EmptyCorpus("no training examples".into()));
    }
    let rows: Vec<[f64; NUM_FEATURES]> = examples.iter().map(|e| e.features.values()).collect();
    let y: Vec<f64> = examples.iter().map(|e| e.target).collect();
    let design = DesignMatrix::from_raw(&rows, &terms_for(&spec.features(), true));
    Ok(match selection {
        Selection::Ols => fit_ols(&design, &y, target),
        Selection::Stepwise => stepwise_select(&design, &y, target),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveOptions {
    /// Age at which the response (total visits) is measured.
    pub target_minutes: u32,
    pub tokenizer: TokenizerConfig,
    pub selection: Selection,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            target_minutes: 7 * 24 * 60,
            tokenizer: TokenizerConfig::default(),
            selection: Selection::Stepwise,
        }
    }
}

/// Examples with features at `cutoff` and log(visits + 1) at the target age.
pub fn examples_at(corpus: &[ArticleSeries], cutoff: u32, opts: &CurveOptions) -> Result<Vec<TrainingExample>> {
    corpus
        .iter()
        .map(|s| {
            Ok(TrainingExample {
                features: snapshot_features(s, cutoff as i64, opts.tokenizer)?,
                target: (s.visits_before(opts.target_minutes as i64) as f64).ln_1p(),
            })
        })
        .collect()
}

/// In-sample r² of a freshly fitted model at each cutoff.
pub fn r_squared_curve(corpus: &[ArticleSeries], cutoffs: &[u32], spec: ModelSpec, opts: &CurveOptions) -> Result<Vec<(u32, f64)>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("r² curve needs at least one article".into()));
    }
    cutoffs
        .iter()
        .map(|&c| {
            let ex = examples_at(corpus, c, opts)?;
            Ok((c, fit_examples(&ex, spec, opts.selection, TargetKind::LogVisits)?.r_squared))
        })
        .collect()
}
