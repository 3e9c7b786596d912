use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ArticleSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShelfLife {
    pub article_id: String,
    pub ell: f64,
    pub tau_minutes: u32,
    pub total_visits_at_horizon: u64,
    pub horizon_minutes: u32,
}

impl ShelfLife {
    pub fn tau_hours(&self) -> f64 {
        self.tau_minutes as f64 / 60.0
    }
}

/// Whether `cum` reaches fraction `ell` of `total`. Comparing the quotient
/// keeps the answer unchanged when both counts are scaled by the same factor.
#[inline]
pub fn reaches_fraction(cum: u64, total: u64, ell: f64) -> bool {
    cum as f64 / total as f64 >= ell
}

/// Smallest minute index at which the cumulative count reaches `ell` of the
/// total over the first `horizon` minutes. `None` if that total is zero.
pub fn shelf_life_minutes(per_minute: &[u64], ell: f64, horizon: usize) -> Option<usize> {
    let counts = &per_minute[..horizon.min(per_minute.len())];
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let mut cum = 0;
    for (m, &c) in counts.iter().enumerate() {
        cum += c;
        if reaches_fraction(cum, total, ell) {
            return Some(m);
        }
    }
    Some(counts.len() - 1)
}

/// Effective shelf-life of an article: minutes from first visit until it has
/// received `ell` of the visits it gets within `horizon_minutes`. Missing
/// minutes at the tail count as zero, so the caller is responsible for only
/// passing series that cover the horizon (see [`shelf_life_checked`]).
pub fn shelf_life(series: &ArticleSeries, ell: f64, horizon_minutes: u32) -> Result<ShelfLife> {
    let visits = series.visits_total();
    let tau = shelf_life_minutes(&visits, ell, horizon_minutes as usize)
        .ok_or_else(|| Error::ShelfLifeUndefined(series.article_id.clone()))?;
    Ok(ShelfLife {
        article_id: series.article_id.clone(),
        ell,
        tau_minutes: tau as u32,
        total_visits_at_horizon: series.visits_before(horizon_minutes as i64),
        horizon_minutes,
    })
}

/// Like [`shelf_life`], but refuses series observed for less than the horizon.
pub fn shelf_life_checked(series: &ArticleSeries, ell: f64, horizon_minutes: u32, observed_until: DateTime<Utc>) -> Result<ShelfLife> {
    let age = series.age_minutes(observed_until).unwrap_or(0);
    if age < horizon_minutes as i64 {
        return Err(Error::InsufficientCoverage {
            article_id: series.article_id.clone(),
            covered_minutes: age,
            required_minutes: horizon_minutes as i64,
        });
    }
    shelf_life(series, ell, horizon_minutes)
}
