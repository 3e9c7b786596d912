use std::collections::{BTreeMap, HashSet};

use chrono::{DateTime, DurationRound, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use super::referral::ReferralClass;
use crate::config::{LateVisitPolicy, TokenizerConfig};
use crate::event::{Section, TweetPayload};
use crate::social::{
    interpolate_shares, is_corporate_retweet, levenshtein_within, normalize_tweet, FollowerAccumulator, ShareSample,
    TermHistogram,
};

pub const MINUTES_PER_DAY: i64 = 24 * 60;

/// Per-minute visit counts split by referral class, indexed by [`ReferralClass::index`].
pub type VisitBucket = [u32; 4];

/// One tweet about an article, with its derived flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub normalized: String,
    pub author_followers: u64,
    pub author_friends: u64,
    pub author_statuses: u64,
    pub corporate: bool,
    pub unique: bool,
}

impl TweetRecord {
    fn sort_key(&self) -> (DateTime<Utc>, &str, u64, u64, u64) {
        (self.timestamp, &self.text, self.author_followers, self.author_friends, self.author_statuses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShareRecord {
    pub timestamp: DateTime<Utc>,
    pub share_count: u64,
}

/// Everything observed about one article.
///
/// Visits are bucketed per minute since the first visit (truncated to the
/// minute). Tweets and share snapshots are stored with absolute timestamps in
/// time order, so every per-minute social view is derived and independent of
/// arrival order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleSeries {
    pub article_id: String,
    pub section: Option<Section>,
    first_visit: Option<DateTime<Utc>>,
    visits: Vec<VisitBucket>,
    tweets: Vec<TweetRecord>,
    shares: Vec<ShareRecord>,
    #[serde(skip)]
    uniq_index: CachedIndex,
}

/// Distinct normalized texts seen so far, grouped by character length so that
/// only texts within `threshold` characters of length are ever compared.
#[derive(Debug, Clone, Default)]
struct UniquenessIndex {
    covered: usize,
    threshold: usize,
    seen: HashSet<String>,
    by_len: BTreeMap<usize, Vec<Vec<char>>>,
}

impl UniquenessIndex {
    fn check_and_insert(&mut self, normalized: &str) -> bool {
        if self.seen.contains(normalized) {
            return false;
        }
        let chars: Vec<char> = normalized.chars().collect();
        let lo = chars.len().saturating_sub(self.threshold);
        let hi = chars.len() + self.threshold;
        let unique = !self
            .by_len
            .range(lo..=hi)
            .flat_map(|(_, v)| v.iter())
            .any(|p| levenshtein_within(&chars, p, self.threshold).is_some());
        self.seen.insert(normalized.to_string());
        self.by_len.entry(chars.len()).or_default().push(chars);
        unique
    }
}

/// Derived cache; never part of equality or serialization.
#[derive(Debug, Clone, Default)]
struct CachedIndex(UniquenessIndex);

impl PartialEq for CachedIndex {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for CachedIndex {}

/// What a single ingest did, for store-level diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestOutcome {
    pub late_visit: bool,
    pub late_reaction: bool,
}

impl ArticleSeries {
    pub fn new(article_id: impl Into<String>) -> Self {
        ArticleSeries {
            article_id: article_id.into(),
            section: None,
            first_visit: None,
            visits: Vec::new(),
            tweets: Vec::new(),
            shares: Vec::new(),
            uniq_index: CachedIndex::default(),
        }
    }

    pub fn section_label(&self) -> Section {
        self.section.unwrap_or_default()
    }

    /// First-visit instant truncated to the minute; `None` before any visit.
    pub fn first_visit(&self) -> Option<DateTime<Utc>> {
        self.first_visit
    }

    /// Number of minute buckets held (last visit minute + 1).
    pub fn len_minutes(&self) -> usize {
        self.visits.len()
    }

    pub fn minute_of(&self, ts: DateTime<Utc>) -> Option<i64> {
        self.first_visit.map(|fv| (ts - fv).num_seconds().div_euclid(60))
    }

    pub fn visit_buckets(&self) -> &[VisitBucket] {
        &self.visits
    }

    pub fn tweets(&self) -> &[TweetRecord] {
        &self.tweets
    }

    pub fn share_records(&self) -> &[ShareRecord] {
        &self.shares
    }

    pub(crate) fn record_section(&mut self, section: Section) {
        self.section = Some(match self.section {
            Some(existing) => existing.min(section),
            None => section,
        });
    }

    pub(crate) fn add_visit(&mut self, ts: DateTime<Utc>, class: ReferralClass, policy: LateVisitPolicy) -> IngestOutcome {
        let minute_start = ts.duration_trunc(TimeDelta::minutes(1)).expect("minute truncation is in range");
        let mut outcome = IngestOutcome::default();
        let minute = match self.first_visit {
            None => {
                self.first_visit = Some(minute_start);
                0
            }
            Some(fv) if minute_start < fv => {
                outcome.late_visit = true;
                match policy {
                    LateVisitPolicy::Rebase => {
                        let shift = (fv - minute_start).num_minutes() as usize;
                        self.visits.splice(0..0, std::iter::repeat_n([0; 4], shift));
                        self.first_visit = Some(minute_start);
                        0
                    }
                    LateVisitPolicy::FoldIntoFirstMinute => 0,
                }
            }
            Some(fv) => (minute_start - fv).num_minutes() as usize,
        };
        if self.visits.len() <= minute {
            self.visits.resize(minute + 1, [0; 4]);
        }
        self.visits[minute][class.index()] += 1;
        outcome
    }

    pub(crate) fn add_tweet(&mut self, ts: DateTime<Utc>, tweet: &TweetPayload, handles: &[String], unique_threshold: usize) -> IngestOutcome {
        let record = TweetRecord {
            timestamp: ts,
            normalized: normalize_tweet(&tweet.text),
            corporate: is_corporate_retweet(&tweet.text, handles),
            text: tweet.text.clone(),
            author_followers: tweet.author_followers,
            author_friends: tweet.author_friends,
            author_statuses: tweet.author_statuses,
            unique: false,
        };
        let pos = self.tweets.partition_point(|t| t.sort_key() <= record.sort_key());
        let late = pos < self.tweets.len();
        self.tweets.insert(pos, record);
        self.refresh_uniqueness(pos, unique_threshold);
        IngestOutcome {
            late_visit: false,
            late_reaction: late,
        }
    }

    pub(crate) fn add_share_snapshot(&mut self, ts: DateTime<Utc>, share_count: u64) -> IngestOutcome {
        let rec = ShareRecord { timestamp: ts, share_count };
        let pos = self.shares.partition_point(|s| *s <= rec);
        let late = pos < self.shares.len();
        self.shares.insert(pos, rec);
        IngestOutcome {
            late_visit: false,
            late_reaction: late,
        }
    }

    /// Recomputes uniqueness flags from `from` onwards, comparing each tweet
    /// against all earlier tweets in time order.
    fn refresh_uniqueness(&mut self, from: usize, threshold: usize) {
        let index = &mut self.uniq_index.0;
        if index.covered != from || index.threshold != threshold {
            *index = UniquenessIndex {
                threshold,
                ..UniquenessIndex::default()
            };
        }
        for t in &mut self.tweets[index.covered..] {
            t.unique = index.check_and_insert(&t.normalized);
        }
        index.covered = self.tweets.len();
    }

    /// Minute index of a reaction, clamped to minute 0 when it precedes the first visit.
    fn reaction_minute(&self, ts: DateTime<Utc>) -> Option<usize> {
        self.minute_of(ts).map(|m| m.max(0) as usize)
    }

    pub fn visits_total(&self) -> Vec<u64> {
        self.visits.iter().map(|b| b.iter().map(|&v| v as u64).sum()).collect()
    }

    pub fn visits_by_class(&self, class: ReferralClass) -> Vec<u64> {
        self.visits.iter().map(|b| b[class.index()] as u64).collect()
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.iter().flat_map(|b| b.iter()).map(|&v| v as u64).sum()
    }

    /// Visits in minutes `[0, end_minute)`.
    pub fn visits_before(&self, end_minute: i64) -> u64 {
        let end = end_minute.clamp(0, self.visits.len() as i64) as usize;
        self.visits[..end].iter().flat_map(|b| b.iter()).map(|&v| v as u64).sum()
    }

    pub fn class_visits_before(&self, class: ReferralClass, end_minute: i64) -> u64 {
        let end = end_minute.clamp(0, self.visits.len() as i64) as usize;
        self.visits[..end].iter().map(|b| b[class.index()] as u64).sum()
    }

    /// Visits in minutes `[start, end)`, both relative to the first visit.
    pub fn visits_between(&self, start_minute: i64, end_minute: i64) -> u64 {
        self.visits_before(end_minute) - self.visits_before(start_minute.min(end_minute))
    }

    fn tweet_minutes(&self, len: usize, pick: impl Fn(&TweetRecord) -> bool) -> Vec<u32> {
        let mut out = vec![0u32; len];
        for t in self.tweets.iter().filter(|t| pick(t)) {
            if let Some(m) = self.reaction_minute(t.timestamp) {
                if m < len {
                    out[m] += 1;
                }
            }
        }
        out
    }

    pub fn tweets_per_minute(&self, len: usize) -> Vec<u32> {
        self.tweet_minutes(len, |_| true)
    }

    pub fn unique_tweets_per_minute(&self, len: usize) -> Vec<u32> {
        self.tweet_minutes(len, |t| t.unique)
    }

    pub fn corporate_retweets_per_minute(&self, len: usize) -> Vec<u32> {
        self.tweet_minutes(len, |t| t.corporate)
    }

    /// Tweets whose clamped minute index is below `end_minute`, in time order.
    pub fn tweets_before(&self, end_minute: i64) -> impl Iterator<Item = &TweetRecord> {
        self.tweets
            .iter()
            .take_while(move |t| self.reaction_minute(t.timestamp).is_some_and(|m| (m as i64) < end_minute))
    }

    /// Share snapshots in time order with regressions clamped to the running maximum.
    pub fn share_samples(&self) -> Vec<ShareSample> {
        let Some(fv) = self.first_visit else { return Vec::new() };
        let mut running = 0u64;
        self.shares
            .iter()
            .map(|s| {
                running = running.max(s.share_count);
                ShareSample {
                    minute: (s.timestamp - fv).num_milliseconds() as f64 / 60_000.0,
                    cumulative: running as f64,
                }
            })
            .collect()
    }

    /// Snapshots whose count fell below an earlier snapshot's count.
    pub fn share_regressions(&self) -> usize {
        let mut running = 0u64;
        self.shares
            .iter()
            .filter(|s| {
                let regressed = s.share_count < running;
                running = running.max(s.share_count);
                regressed
            })
            .count()
    }

    pub fn facebook_shares_per_minute(&self, len: usize) -> Vec<f64> {
        interpolate_shares(&self.share_samples(), len)
    }

    /// Interpolated share increase over minutes `[0, end_minute)`.
    pub fn shares_before(&self, end_minute: i64) -> f64 {
        if end_minute <= 0 {
            return 0.0;
        }
        self.facebook_shares_per_minute(end_minute as usize).iter().sum()
    }

    /// Highest share count among snapshots taken before minute `end_minute`.
    /// Later snapshots are never looked at, so this is safe as a feature.
    pub fn shares_observed_before(&self, end_minute: i64) -> u64 {
        let Some(fv) = self.first_visit else { return 0 };
        let end = fv + TimeDelta::minutes(end_minute.clamp(0, 1 << 30));
        self.shares.iter().take_while(|s| s.timestamp < end).map(|s| s.share_count).max().unwrap_or(0)
    }

    pub fn term_histogram_before(&self, end_minute: i64, tokenizer: TokenizerConfig) -> TermHistogram {
        let mut h = TermHistogram::new();
        for t in self.tweets_before(end_minute) {
            h.update_with(&t.normalized, tokenizer);
        }
        h
    }

    pub fn term_histogram(&self, tokenizer: TokenizerConfig) -> TermHistogram {
        self.term_histogram_before(i64::MAX, tokenizer)
    }

    pub fn followers_before(&self, end_minute: i64) -> FollowerAccumulator {
        let mut acc = FollowerAccumulator::default();
        for t in self.tweets_before(end_minute) {
            acc.push(t.author_followers, t.author_friends, t.author_statuses);
        }
        acc
    }

    /// Minutes observed as of `now`, measured from the first visit.
    pub fn age_minutes(&self, now: DateTime<Utc>) -> Option<i64> {
        self.first_visit.map(|fv| (now - fv).num_minutes())
    }
}
