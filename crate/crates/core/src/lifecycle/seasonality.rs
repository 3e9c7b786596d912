use chrono::{DateTime, Datelike, DurationRound, TimeDelta, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ArticleSeries;

pub const HOURS_PER_WEEK: usize = 168;
const SECONDS_PER_WEEK: i64 = 7 * 86_400;

/// Monday 1970-01-05 00:00 UTC, the origin of the hour-of-week grid.
fn week_origin() -> DateTime<Utc> {
    DateTime::from_timestamp(4 * 86_400, 0).expect("valid origin")
}

/// Hour of week in UTC, 0 = Monday 00:00.
pub fn hour_of_week(t: DateTime<Utc>) -> usize {
    t.weekday().num_days_from_monday() as usize * 24 + t.hour() as usize
}

/// Hour-of-week traffic weights with mean exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalityProfile {
    weights: Vec<f64>,
    /// Hours of week that had no traffic and were imputed with weight 1.
    pub imputed_hours: Vec<usize>,
    pub window_start: Option<DateTime<Utc>>,
    pub window_hours: usize,
    /// prefix[h] = sum of weights[..h]; prefix[168] is the weekly total.
    #[serde(skip)]
    prefix: Vec<f64>,
}

impl Default for SeasonalityProfile {
    fn default() -> Self {
        Self::flat()
    }
}

impl SeasonalityProfile {
    pub fn flat() -> Self {
        Self::from_weights_unchecked(vec![1.0; HOURS_PER_WEEK], Vec::new(), None, 0)
    }

    /// Builds a profile from explicit positive weights, renormalizing to mean 1.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.len() != HOURS_PER_WEEK || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InsufficientData("need 168 positive finite weights".into()));
        }
        Ok(Self::from_weights_unchecked(weights.to_vec(), Vec::new(), None, 0))
    }

    fn from_weights_unchecked(mut weights: Vec<f64>, imputed: Vec<usize>, start: Option<DateTime<Utc>>, hours: usize) -> Self {
        let mean = weights.iter().sum::<f64>() / HOURS_PER_WEEK as f64;
        for w in &mut weights {
            *w /= mean;
        }
        let mut p = SeasonalityProfile {
            weights,
            imputed_hours: imputed,
            window_start: start,
            window_hours: hours,
            prefix: Vec::new(),
        };
        p.rebuild_prefix();
        p
    }

    fn rebuild_prefix(&mut self) {
        let mut prefix = Vec::with_capacity(HOURS_PER_WEEK + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for w in &self.weights {
            acc += w;
            prefix.push(acc);
        }
        self.prefix = prefix;
    }

    /// Must be called after deserializing.
    pub fn ensure_ready(&mut self) {
        if self.prefix.len() != HOURS_PER_WEEK + 1 {
            self.rebuild_prefix();
        }
    }

    /// Estimates weights from consecutive site-wide hourly totals starting at
    /// `start` (truncated to the hour). Needs at least two weeks of hours.
    pub fn build(start: DateTime<Utc>, hourly_totals: &[f64]) -> Result<Self> {
        if hourly_totals.len() < 2 * HOURS_PER_WEEK {
            return Err(Error::InsufficientData(format!(
                "seasonality needs {} hourly observations, got {}",
                2 * HOURS_PER_WEEK,
                hourly_totals.len()
            )));
        }
        let start = start.duration_trunc(TimeDelta::hours(1)).expect("hour truncation");
        let first = hour_of_week(start);
        let mut sums = [0.0; HOURS_PER_WEEK];
        let mut counts = [0usize; HOURS_PER_WEEK];
        for (i, &v) in hourly_totals.iter().enumerate() {
            let h = (first + i) % HOURS_PER_WEEK;
            sums[h] += v;
            counts[h] += 1;
        }
        let grand = hourly_totals.iter().sum::<f64>() / hourly_totals.len() as f64;
        let mut imputed = Vec::new();
        let weights = (0..HOURS_PER_WEEK)
            .map(|h| {
                let mean = sums[h] / counts[h] as f64;
                if grand > 0.0 && mean > 0.0 {
                    mean / grand
                } else {
                    imputed.push(h);
                    1.0
                }
            })
            .collect();
        Ok(Self::from_weights_unchecked(weights, imputed, Some(start), hourly_totals.len()))
    }

    /// Estimates weights from the visits of every article in `series`.
    pub fn from_series<'a>(series: impl IntoIterator<Item = &'a ArticleSeries>) -> Result<Self> {
        let (start, totals) = sitewide_hourly_visits(series);
        let start = start.ok_or_else(|| Error::InsufficientData("no visits".into()))?;
        Self::build(start, &totals)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_at(&self, t: DateTime<Utc>) -> f64 {
        self.weights[hour_of_week(t)]
    }

    /// Hours-equivalent elapsed from the week origin to `t`.
    fn cumulative(&self, t: DateTime<Utc>) -> f64 {
        let d = t - week_origin();
        let secs = d.num_seconds() as f64 + d.subsec_nanos() as f64 * 1e-9;
        let week = (secs / SECONDS_PER_WEEK as f64).floor();
        let rem_hours = (secs - week * SECONDS_PER_WEEK as f64) / 3600.0;
        let h = (rem_hours.floor() as usize).min(HOURS_PER_WEEK - 1);
        week * self.prefix[HOURS_PER_WEEK] + self.prefix[h] + self.weights[h] * (rem_hours - h as f64)
    }

    /// Hours-equivalent between `start` and `start + clock_minutes`.
    pub fn hours_equivalent(&self, start: DateTime<Utc>, clock_minutes: f64) -> f64 {
        let end = start + TimeDelta::nanoseconds((clock_minutes * 60e9).round() as i64);
        self.cumulative(end) - self.cumulative(start)
    }

    /// Inverse of [`hours_equivalent`](Self::hours_equivalent): clock minutes
    /// after `start` at which `hours_equiv` hours-equivalent have elapsed.
    pub fn clock_minutes(&self, start: DateTime<Utc>, hours_equiv: f64) -> f64 {
        let total = self.prefix[HOURS_PER_WEEK];
        let target = self.cumulative(start) + hours_equiv;
        let week = (target / total).floor();
        let rem = target - week * total;
        let h = self.prefix[1..].partition_point(|&p| p <= rem).min(HOURS_PER_WEEK - 1);
        let hour_pos = h as f64 + ((rem - self.prefix[h]) / self.weights[h]).clamp(0.0, 1.0);
        let clock_hours = week * HOURS_PER_WEEK as f64 + hour_pos;
        let start_hours = (start - week_origin()).num_milliseconds() as f64 / 3.6e6;
        (clock_hours - start_hours) * 60.0
    }
}

/// Site-wide visits per clock hour, starting at the earliest visited hour.
pub fn sitewide_hourly_visits<'a>(series: impl IntoIterator<Item = &'a ArticleSeries>) -> (Option<DateTime<Utc>>, Vec<f64>) {
    let mut by_hour: std::collections::BTreeMap<i64, f64> = Default::default();
    for s in series {
        let Some(fv) = s.first_visit() else { continue };
        let base = fv.timestamp().div_euclid(60);
        for (m, b) in s.visit_buckets().iter().enumerate() {
            let n: u32 = b.iter().sum();
            if n > 0 {
                *by_hour.entry((base + m as i64).div_euclid(60)).or_default() += n as f64;
            }
        }
    }
    let (Some((&lo, _)), Some((&hi, _))) = (by_hour.first_key_value(), by_hour.last_key_value()) else {
        return (None, Vec::new());
    };
    let mut totals = vec![0.0; (hi - lo + 1) as usize];
    for (h, v) in by_hour {
        totals[(h - lo) as usize] = v;
    }
    (DateTime::from_timestamp(lo * 3600, 0), totals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn monday() -> DateTime<Utc> {
        "2012-10-08T00:00:00Z".parse().unwrap()
    }

    #[test]
    fn flat_traffic_gives_unit_weights() {
        let p = SeasonalityProfile::build(monday(), &[7.0; 400]).unwrap();
        assert!(p.weights().iter().all(|w| (w - 1.0).abs() < 1e-12));
        assert!(p.imputed_hours.is_empty());
    }

    #[test]
    fn busy_hours_weigh_more() {
        let totals: Vec<f64> = (0..336)
            .map(|i| {
                let h = i % 168;
                if h / 24 < 5 && (9..17).contains(&(h % 24)) { 20.0 } else { 10.0 }
            })
            .collect();
        let p = SeasonalityProfile::build(monday(), &totals).unwrap();
        assert!(p.weights()[9] > 1.0 && p.weights()[3] < 1.0);
        let mean = p.weights().iter().sum::<f64>() / 168.0;
        assert!((mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_short_history_rejected() {
        assert!(SeasonalityProfile::build(monday(), &[1.0; 335]).is_err());
    }

    #[test]
    fn silent_hours_are_imputed() {
        let mut totals = vec![5.0; 336];
        totals[3] = 0.0;
        totals[171] = 0.0;
        let p = SeasonalityProfile::build(monday(), &totals).unwrap();
        assert_eq!(p.imputed_hours, vec![3]);
        assert!(p.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn flat_profile_is_identity() {
        let p = SeasonalityProfile::flat();
        let t = "2012-10-10T13:17:00Z".parse().unwrap();
        assert!((p.hours_equivalent(t, 300.0) - 5.0).abs() < 1e-9);
        assert!((p.clock_minutes(t, 5.0) - 300.0).abs() < 1e-6);
    }

    #[test]
    fn double_weight_hours_count_twice() {
        let mut w = vec![1.0; 168];
        // Monday 10:00-12:00 at twice the weight of the rest, before renormalization.
        w[10] = 2.0;
        w[11] = 2.0;
        let p = SeasonalityProfile::from_weights(&w).unwrap();
        let scale = p.weights()[10];
        let t = monday() + TimeDelta::hours(10);
        assert!((p.hours_equivalent(t, 120.0) - 2.0 * scale).abs() < 1e-9);
    }

    #[test]
    fn group_by_hour_oracle() {
        let start = monday() + TimeDelta::hours(5);
        let totals: Vec<f64> = (0..500).map(|i| ((i * 7919) % 101) as f64 + 1.0).collect();
        let p = SeasonalityProfile::build(start, &totals).unwrap();
        let mut groups: Vec<Vec<f64>> = vec![Vec::new(); 168];
        for (i, v) in totals.iter().enumerate() {
            let t = start + TimeDelta::hours(i as i64);
            groups[hour_of_week(t)].push(*v);
        }
        let grand = totals.iter().sum::<f64>() / totals.len() as f64;
        let raw: Vec<f64> = groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64 / grand).collect();
        let m = raw.iter().sum::<f64>() / 168.0;
        for h in 0..168 {
            assert!((p.weights()[h] - raw[h] / m).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn integral_matches_minute_riemann_sum(
            seed in prop::collection::vec(0.1f64..5.0, 168),
            offset_min in 0i64..20_000,
            dur in 0u32..3000,
        ) {
            let p = SeasonalityProfile::from_weights(&seed).unwrap();
            let start = monday() + TimeDelta::minutes(offset_min);
            let direct: f64 = (0..dur).map(|m| p.weight_at(start + TimeDelta::minutes(m as i64)) / 60.0).sum();
            prop_assert!((p.hours_equivalent(start, dur as f64) - direct).abs() < 1e-6);
        }

        #[test]
        fn additive_increasing_and_invertible(
            seed in prop::collection::vec(0.1f64..5.0, 168),
            offset_min in -50_000i64..50_000,
            a in 0.0f64..5000.0,
            b in 0.001f64..5000.0,
        ) {
            let p = SeasonalityProfile::from_weights(&seed).unwrap();
            let start = monday() + TimeDelta::minutes(offset_min);
            let whole = p.hours_equivalent(start, a + b);
            let mid = start + TimeDelta::nanoseconds((a * 60e9).round() as i64);
            let parts = p.hours_equivalent(start, a) + p.hours_equivalent(mid, b);
            prop_assert!((whole - parts).abs() < 1e-6);
            prop_assert!(whole > p.hours_equivalent(start, a));
            prop_assert!((p.clock_minutes(start, whole) - (a + b)).abs() < 1e-4);
        }
    }
}
