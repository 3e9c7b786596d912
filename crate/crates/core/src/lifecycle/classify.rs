use std::io::Write;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::seasonality::SeasonalityProfile;
use crate::config::ClassifierConfig;
use crate::error::{Error, Result};
use crate::ingest::ArticleSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileClass {
    Decreasing,
    DelayedDecreasing,
    Steady,
    Increasing,
    Rebounding,
}

/// Coarse grouping of the five classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileGroup {
    Decreasing,
    NonDecreasing,
    Rebounding,
}

impl ProfileClass {
    pub const ALL: [ProfileClass; 5] = [
        ProfileClass::Decreasing,
        ProfileClass::DelayedDecreasing,
        ProfileClass::Steady,
        ProfileClass::Increasing,
        ProfileClass::Rebounding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProfileClass::Decreasing => "decreasing",
            ProfileClass::DelayedDecreasing => "delayed_decreasing",
            ProfileClass::Steady => "steady",
            ProfileClass::Increasing => "increasing",
            ProfileClass::Rebounding => "rebounding",
        }
    }

    pub fn group(self) -> ProfileGroup {
        match self {
            ProfileClass::Decreasing | ProfileClass::DelayedDecreasing => ProfileGroup::Decreasing,
            ProfileClass::Steady | ProfileClass::Increasing => ProfileGroup::NonDecreasing,
            ProfileClass::Rebounding => ProfileGroup::Rebounding,
        }
    }
}

impl std::fmt::Display for ProfileClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quantities the decision was based on. Rates are visits per
/// equivalent minute of the smoothed curve; positions are equivalent minutes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileDiagnostics {
    pub nonempty_minutes: usize,
    pub peak_rate: f64,
    pub peak_minute: usize,
    /// Robust slope times window length.
    pub trend_per_window: f64,
    pub dip_minute: usize,
    pub dip_depth: f64,
    pub recovery: f64,
    pub plateau_start: usize,
    pub plateau_minutes: usize,
    pub early_slope: f64,
    pub later_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileClassification {
    pub article_id: String,
    pub class: ProfileClass,
    pub diagnostics: ProfileDiagnostics,
}

/// Centered moving average of width `w`, averaging what is available at the edges.
pub fn moving_average(x: &[f64], w: usize) -> Vec<f64> {
    let w = w.max(1);
    let before = w / 2;
    let after = w - before - 1;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Theil–Sen estimator: median of the slopes between all point pairs.
pub fn theil_sen_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let mut slopes = Vec::with_capacity(xs.len() * xs.len().saturating_sub(1) / 2);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let dx = xs[j] - xs[i];
            if dx != 0.0 {
                slopes.push((ys[j] - ys[i]) / dx);
            }
        }
    }
    median(&mut slopes)
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let n = v.len();
    let (_, &mut hi, _) = v.select_nth_unstable_by(n / 2, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

fn slope_of(ys: &[f64], offset: usize, step: usize) -> f64 {
    let idx: Vec<usize> = (0..ys.len()).step_by(step.max(1)).collect();
    let xs: Vec<f64> = idx.iter().map(|&i| (offset + i) as f64).collect();
    let vs: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    theil_sen_slope(&xs, &vs)
}

/// Resamples per-minute clock visits onto a grid of `len` equivalent minutes
/// after `start`. Visits are spread evenly within their clock minute, so the
/// grid conserves the visits inside the window. Also returns the number of
/// non-empty clock minutes inside the window.
pub fn equivalent_minute_curve(per_minute: &[u64], start: DateTime<Utc>, profile: &SeasonalityProfile, len: usize) -> (Vec<f64>, usize) {
    let mut prefix = Vec::with_capacity(per_minute.len() + 1);
    prefix.push(0.0);
    for &v in per_minute {
        prefix.push(prefix.last().unwrap() + v as f64);
    }
    let cumulative = |c: f64| -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        let m = c.floor() as usize;
        if m >= per_minute.len() {
            return *prefix.last().unwrap();
        }
        prefix[m] + per_minute[m] as f64 * (c - m as f64)
    };
    let bounds: Vec<f64> = (0..=len).map(|j| profile.clock_minutes(start, j as f64 / 60.0)).collect();
    let curve = bounds.windows(2).map(|w| cumulative(w[1]) - cumulative(w[0])).collect();
    let end = (bounds[len].ceil() as usize).min(per_minute.len());
    let nonempty = per_minute[..end].iter().filter(|&&v| v > 0).count();
    (curve, nonempty)
}

/// Labels a per-equivalent-minute visit curve covering the classification window.
pub fn classify_curve(rate: &[f64], cfg: &ClassifierConfig) -> (ProfileClass, ProfileDiagnostics) {
    let mut d = ProfileDiagnostics::default();
    let n = rate.len();
    if n == 0 {
        return (ProfileClass::Steady, d);
    }
    let s = moving_average(rate, cfg.smoothing_minutes);
    let (peak_minute, peak) = s
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    d.peak_rate = peak;
    d.peak_minute = peak_minute;
    if peak <= 0.0 {
        return (ProfileClass::Steady, d);
    }

    let mut suffix_max = s.clone();
    for i in (0..n.saturating_sub(1)).rev() {
        suffix_max[i] = suffix_max[i].max(suffix_max[i + 1]);
    }
    // Dips and recoveries must clear both the fractional floor and the
    // Poisson noise of a moving average over `smoothing_minutes` counts.
    let rebound_floor = cfg.rebound_recovery_fraction * peak;
    let w = cfg.smoothing_minutes.max(1) as f64;
    let needed = |a: f64, b: f64| rebound_floor.max(cfg.rebound_noise_z * ((a + b).max(0.0) / w).sqrt());
    let mut prefix_max = f64::NEG_INFINITY;
    let mut best_dip = (0, f64::NEG_INFINITY, 0.0, 0.0);
    for (i, &v) in s.iter().enumerate() {
        prefix_max = prefix_max.max(v);
        let (depth, recovery) = (prefix_max - v, suffix_max[i] - v);
        let margin = (depth - needed(prefix_max, v)).min(recovery - needed(suffix_max[i], v));
        if margin > best_dip.1 {
            best_dip = (i, margin, depth, recovery);
        }
    }
    (d.dip_minute, d.dip_depth, d.recovery) = (best_dip.0, best_dip.2, best_dip.3);
    if best_dip.1 >= 0.0 {
        return (ProfileClass::Rebounding, d);
    }

    let trend = slope_of(&s, 0, 5) * n as f64;
    d.trend_per_window = trend;
    let steady_band = cfg.steady_slope_fraction * peak;
    if trend > steady_band {
        return (ProfileClass::Increasing, d);
    }
    if trend.abs() < steady_band {
        return (ProfileClass::Steady, d);
    }

    let floor = (1.0 - cfg.plateau_band) * peak;
    let mut start = peak_minute;
    while start > 0 && s[start - 1] >= floor {
        start -= 1;
    }
    let mut end = peak_minute;
    while end + 1 < n && s[end + 1] >= floor {
        end += 1;
    }
    d.plateau_start = start;
    d.plateau_minutes = end - start + 1;
    let split = start + cfg.plateau_minutes;
    if d.plateau_minutes >= cfg.plateau_minutes && split + cfg.plateau_minutes <= n {
        d.early_slope = slope_of(&s[start..split], start, 1);
        d.later_slope = slope_of(&s[split..], split, 5);
        if d.later_slope < 0.0 && d.early_slope.abs() <= cfg.plateau_slope_ratio * d.later_slope.abs() {
            return (ProfileClass::DelayedDecreasing, d);
        }
    }
    (ProfileClass::Decreasing, d)
}

/// Classifies the first `window_hours_equiv` hours-equivalent of an article.
/// Minutes beyond the end of the series count as having no visits.
pub fn classify_profile(series: &ArticleSeries, profile: &SeasonalityProfile, cfg: &ClassifierConfig) -> Result<ProfileClassification> {
    let start = series
        .first_visit()
        .ok_or_else(|| Error::InsufficientData(format!("{} has no visits", series.article_id)))?;
    let len = (cfg.window_hours_equiv * 60.0).round() as usize;
    let (curve, nonempty) = equivalent_minute_curve(&series.visits_total(), start, profile, len);
    if nonempty < cfg.min_nonempty_minutes {
        return Err(Error::InsufficientData(format!(
            "{} has {nonempty} non-empty minutes in the classification window, need {}",
            series.article_id, cfg.min_nonempty_minutes
        )));
    }
    let (class, mut diagnostics) = classify_curve(&curve, cfg);
    diagnostics.nonempty_minutes = nonempty;
    Ok(ProfileClassification {
        article_id: series.article_id.clone(),
        class,
        diagnostics,
    })
}

/// Writes one CSV row per classified article.
pub fn write_diagnostics_csv<W: Write>(writer: W, rows: &[ProfileClassification]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "article_id",
        "class",
        "nonempty_minutes",
        "peak_rate",
        "peak_minute",
        "trend_per_window",
        "dip_minute",
        "dip_depth",
        "recovery",
        "plateau_start",
        "plateau_minutes",
        "early_slope",
        "later_slope",
    ])?;
    for r in rows {
        let d = &r.diagnostics;
        w.write_record([
            r.article_id.clone(),
            r.class.as_str().to_string(),
            d.nonempty_minutes.to_string(),
            d.peak_rate.to_string(),
            d.peak_minute.to_string(),
            d.trend_per_window.to_string(),
            d.dip_minute.to_string(),
            d.dip_depth.to_string(),
            d.recovery.to_string(),
            d.plateau_start.to_string(),
            d.plateau_minutes.to_string(),
            d.early_slope.to_string(),
            d.later_slope.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
