//! The ten per-article predictors, as observed a fixed number of minutes
//! after the first visit.

use serde::{Deserialize, Serialize};

use crate::config::TokenizerConfig;
use crate::error::{Error, Result};
use crate::event::Section;
use crate::ingest::{ArticleSeries, ReferralClass};

pub const NUM_FEATURES: usize = 10;

/// Feature names in model-formula order.
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = ["v", "vr", "vd", "f", "t", "foll", "ent", "uni", "unip", "cp"];

/// Which features enter models as log(x + 1).
pub const LOG_TRANSFORMED: [bool; NUM_FEATURES] = [true, true, true, true, true, true, false, true, false, false];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub article_id: String,
    pub section: Section,
    pub cutoff_minutes: u32,
    /// Visits.
    pub v: f64,
    /// Visits arriving through links (internal or external referrers).
    pub vr: f64,
    /// Visits without a referrer.
    pub vd: f64,
    /// Facebook shares.
    pub f: f64,
    /// Tweets.
    pub t: f64,
    /// Mean follower count over tweets.
    pub foll: f64,
    /// Entropy of the tweet vocabulary, bits.
    pub ent: f64,
    /// Unique tweets.
    pub uni: f64,
    /// Fraction of tweets that are unique.
    pub unip: f64,
    /// Fraction of tweets that are corporate retweets.
    pub cp: f64,
}

impl FeatureVector {
    /// A vector with the given values in formula order, mostly for tests.
    pub fn from_values(article_id: impl Into<String>, values: [f64; NUM_FEATURES]) -> Self {
        let [v, vr, vd, f, t, foll, ent, uni, unip, cp] = values;
        FeatureVector {
            article_id: article_id.into(),
            section: Section::Other,
            cutoff_minutes: 0,
            v,
            vr,
            vd,
            f,
            t,
            foll,
            ent,
            uni,
            unip,
            cp,
        }
    }

    pub fn values(&self) -> [f64; NUM_FEATURES] {
        [self.v, self.vr, self.vd, self.f, self.t, self.foll, self.ent, self.uni, self.unip, self.cp]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.values()[i])
    }

    pub fn validate(&self) -> Result<()> {
        let vals = self.values();
        if vals.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InsufficientData(format!("{}: features must be finite and non-negative", self.article_id)));
        }
        if self.unip > 1.0 || self.cp > 1.0 || self.uni > self.t {
            return Err(Error::InsufficientData(format!("{}: inconsistent tweet fractions", self.article_id)));
        }
        Ok(())
    }
}

/// Applies log(x + 1) to the count-like features.
pub fn transform_features(values: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
    let mut out = *values;
    for (x, log) in out.iter_mut().zip(LOG_TRANSFORMED) {
        if log {
            *x = x.ln_1p();
        }
    }
    out
}

/// Features from everything observed in minutes `[0, cutoff)` after the first
/// visit. Fractions are 0 when there are no tweets.
pub fn snapshot_features(series: &ArticleSeries, cutoff_minutes: i64, tokenizer: TokenizerConfig) -> Result<FeatureVector> {
    if cutoff_minutes < 0 || series.first_visit().is_none() {
        return Err(Error::CutoffBeforeFirstVisit(series.article_id.clone()));
    }
    let end = cutoff_minutes;
    let vr = series.class_visits_before(ReferralClass::Internal, end) + series.class_visits_before(ReferralClass::External, end);
    let mut t = 0u64;
    let mut uni = 0u64;
    let mut corp = 0u64;
    for tw in series.tweets_before(end) {
        t += 1;
        uni += tw.unique as u64;
        corp += tw.corporate as u64;
    }
    let frac = |k: u64| if t == 0 { 0.0 } else { k as f64 / t as f64 };
    Ok(FeatureVector {
        article_id: series.article_id.clone(),
        section: series.section_label(),
        cutoff_minutes: cutoff_minutes.min(u32::MAX as i64) as u32,
        v: series.visits_before(end) as f64,
        vr: vr as f64,
        vd: series.class_visits_before(ReferralClass::Direct, end) as f64,
        f: series.shares_observed_before(end) as f64,
        t: t as f64,
        foll: series.followers_before(end).stats().mean_followers,
        ent: series.term_histogram_before(end, tokenizer).entropy_bits(),
        uni: uni as f64,
        unip: frac(uni),
        cp: frac(corp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EngineConfig;
    use crate::event::Event;
    use crate::ingest::SeriesStore;
    use chrono::{DateTime, TimeDelta, Utc};

    fn t0() -> DateTime<Utc> {
        "2012-10-08T10:00:00Z".parse().unwrap()
    }

    fn events() -> Vec<Event> {
        let m = |k: i64| t0() + TimeDelta::minutes(k);
        vec![
            Event::visit("a", m(0), "http://example-news.com/"),
            Event::visit("a", m(1), "https://t.co/x"),
            Event::visit("a", m(2), ""),
            Event::visit("a", m(3), "https://www.google.com/search?q=x"),
            Event::tweet("a", m(4), "RT @AJEnglish: Big story http://x.co/1", 100, 1, 1),
            Event::tweet("a", m(5), "Big story", 300, 1, 1),
            Event::shares("a", m(5), 4),
            Event::visit("a", m(30), ""),
            Event::tweet("a", m(30), "a completely different comment on this", 1, 1, 1),
            Event::shares("a", m(30), 9),
        ]
    }

    fn series() -> ArticleSeries {
        let store = SeriesStore::new(&EngineConfig::default()).unwrap();
        for e in events() {
            store.ingest(&e).unwrap();
        }
        store.snapshot("a").unwrap()
    }

    #[test]
    fn counts_before_cutoff() {
        let fv = snapshot_features(&series(), 20, TokenizerConfig::default()).unwrap();
        assert_eq!((fv.v, fv.vr, fv.vd), (4.0, 2.0, 1.0));
        assert_eq!((fv.t, fv.uni, fv.f), (2.0, 1.0, 4.0));
        assert_eq!(fv.foll, 200.0);
        assert_eq!((fv.unip, fv.cp), (0.5, 0.5));
        // Both tweets normalize to "Big story".
        assert!((fv.ent - 1.0).abs() < 1e-12);
        fv.validate().unwrap();
    }

    #[test]
    fn no_tweets_gives_zero_fractions() {
        let fv = snapshot_features(&series(), 3, TokenizerConfig::default()).unwrap();
        assert_eq!((fv.t, fv.uni, fv.ent, fv.unip, fv.cp, fv.foll), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn cutoff_past_end_is_end_state() {
        let s = series();
        let a = snapshot_features(&s, 10_000, TokenizerConfig::default()).unwrap();
        let b = snapshot_features(&s, 1_000_000, TokenizerConfig::default()).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(a.f, 9.0);
    }

    #[test]
    fn matches_truncated_replay() {
        let full = series();
        for cutoff in [1, 5, 6, 20, 31] {
            let store = SeriesStore::new(&EngineConfig::default()).unwrap();
            for e in events().iter().filter(|e| e.timestamp() < t0() + TimeDelta::minutes(cutoff)) {
                store.ingest(e).unwrap();
            }
            let truncated = store.snapshot("a").unwrap();
            let a = snapshot_features(&full, cutoff, TokenizerConfig::default()).unwrap();
            let b = snapshot_features(&truncated, cutoff, TokenizerConfig::default()).unwrap();
            assert_eq!(a, b, "cutoff {cutoff}");
        }
    }

    #[test]
    fn negative_cutoff_rejected() {
        assert!(snapshot_features(&series(), -1, TokenizerConfig::default()).is_err());
        assert!(snapshot_features(&ArticleSeries::new("x"), 5, TokenizerConfig::default()).is_err());
    }

    #[test]
    fn transform_examples() {
        assert_eq!(transform_features(&[0.0; 10]), [0.0; 10]);
        let mut x = [0.0; 10];
        x[0] = std::f64::consts::E - 1.0;
        x[6] = 3.5;
        let y = transform_features(&x);
        assert!((y[0] - 1.0).abs() < 1e-15);
        assert_eq!(y[6], 3.5);
    }
}
