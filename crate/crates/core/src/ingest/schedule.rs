use chrono::{DateTime, TimeDelta, Utc};

use super::series::{ArticleSeries, MINUTES_PER_DAY};
use super::store::SeriesStore;
use crate::error::{Error, Result};

/// True iff some window of `window_minutes` consecutive minutes, among the
/// minutes observed before `now`, holds at least `min_visits` visits.
pub fn monitoring_filter(series: &ArticleSeries, now: DateTime<Utc>, min_visits: u64, window_minutes: usize) -> bool {
    let Some(age) = series.age_minutes(now) else { return false };
    let observed = age.clamp(0, series.len_minutes() as i64) as usize;
    let totals = &series.visits_total()[..observed];
    let window = window_minutes.max(1);
    let mut sum = 0u64;
    for (i, &v) in totals.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= totals[i - window];
        }
        if sum >= min_visits {
            return true;
        }
    }
    min_visits == 0
}

/// Articles to poll for reactions: the `top_k` most visited in
/// `[window_end - window, window_end)`, ties broken by earlier first visit and
/// then by article id. Articles without visits in the window are skipped.
pub fn polling_schedule(store: &SeriesStore, window_end: DateTime<Utc>, window_minutes: u32, top_k: usize) -> Vec<String> {
    let window_start = window_end - TimeDelta::minutes(window_minutes as i64);
    let mut ranked: Vec<(u64, DateTime<Utc>, String)> = Vec::new();
    store.for_each(|s| {
        let (Some(fv), Some(start), Some(end)) = (s.first_visit(), s.minute_of(window_start), s.minute_of(window_end)) else {
            return;
        };
        let count = s.visits_between(start.max(0), end.max(0));
        if count > 0 {
            ranked.push((count, fv, s.article_id.clone()));
        }
    });
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    ranked.into_iter().take(top_k).map(|(_, _, id)| id).collect()
}

/// How to treat a series that has not yet been observed for the full window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    /// Error out if the window is not complete.
    Require,
    /// Judge on whatever has been observed.
    Truncate,
}

/// True iff cumulative visits in the first `days` days reach `min_visits`.
pub fn sample_filter(series: &ArticleSeries, observed_until: DateTime<Utc>, min_visits: u64, days: u32, coverage: Coverage) -> Result<bool> {
    let required = days as i64 * MINUTES_PER_DAY;
    let age = series.age_minutes(observed_until).unwrap_or(0);
    if coverage == Coverage::Require && age < required {
        return Err(Error::InsufficientCoverage {
            article_id: series.article_id.clone(),
            covered_minutes: age,
            required_minutes: required,
        });
    }
    Ok(series.visits_before(required) >= min_visits)
}
