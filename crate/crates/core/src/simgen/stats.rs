use serde::{Deserialize, Serialize};

use crate::config::TokenizerConfig;
use crate::ingest::{ArticleSeries, MINUTES_PER_DAY};

/// Dataset summary: visit totals and means at 1 hour, 1 day and 7 days
/// after the first visit, and social activity within 7 days.
///
/// Entropy, unique and corporate fractions are per-article means over the
/// articles with at least one tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub articles: usize,
    pub visits_1h: u64,
    pub visits_1d: u64,
    pub visits_7d: u64,
    pub mean_visits_1h: f64,
    pub mean_visits_1d: f64,
    pub mean_visits_7d: f64,
    pub facebook_shares: u64,
    pub mean_facebook_shares: f64,
    pub tweets: u64,
    pub mean_tweets: f64,
    pub facebook_tweet_ratio: f64,
    pub articles_with_tweets: usize,
    pub mean_entropy: f64,
    pub unique_fraction: f64,
    pub corporate_fraction: f64,
}

impl CorpusStats {
    /// Row label and value pairs in display order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("articles", self.articles as f64),
            ("visits_1h_total", self.visits_1h as f64),
            ("visits_1h_mean", self.mean_visits_1h),
            ("visits_1d_total", self.visits_1d as f64),
            ("visits_1d_mean", self.mean_visits_1d),
            ("visits_7d_total", self.visits_7d as f64),
            ("visits_7d_mean", self.mean_visits_7d),
            ("facebook_shares_total", self.facebook_shares as f64),
            ("facebook_shares_mean", self.mean_facebook_shares),
            ("tweets_total", self.tweets as f64),
            ("tweets_mean", self.mean_tweets),
            ("facebook_tweet_ratio", self.facebook_tweet_ratio),
            ("mean_entropy_bits", self.mean_entropy),
            ("unique_fraction", self.unique_fraction),
            ("corporate_fraction", self.corporate_fraction),
        ]
    }
}

fn mean(sum: f64, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

pub fn corpus_stats<'a>(series: impl IntoIterator<Item = &'a ArticleSeries>, tokenizer: TokenizerConfig) -> CorpusStats {
    let week = 7 * MINUTES_PER_DAY;
    let (mut n, mut v1h, mut v1d, mut v7d, mut fb, mut tw) = (0usize, 0u64, 0u64, 0u64, 0u64, 0u64);
    let (mut with_tweets, mut ent, mut uni, mut corp) = (0usize, 0.0, 0.0, 0.0);
    for s in series {
        n += 1;
        v1h += s.visits_before(60);
        v1d += s.visits_before(MINUTES_PER_DAY);
        v7d += s.visits_before(week);
        fb += s.shares_observed_before(week);
        let tweets: Vec<_> = s.tweets_before(week).collect();
        tw += tweets.len() as u64;
        if !tweets.is_empty() {
            with_tweets += 1;
            let k = tweets.len() as f64;
            ent += s.term_histogram_before(week, tokenizer).entropy_bits();
            uni += tweets.iter().filter(|t| t.unique).count() as f64 / k;
            corp += tweets.iter().filter(|t| t.corporate).count() as f64 / k;
        }
    }
    CorpusStats {
        articles: n,
        visits_1h: v1h,
        visits_1d: v1d,
        visits_7d: v7d,
        mean_visits_1h: mean(v1h as f64, n),
        mean_visits_1d: mean(v1d as f64, n),
        mean_visits_7d: mean(v7d as f64, n),
        facebook_shares: fb,
        mean_facebook_shares: mean(fb as f64, n),
        tweets: tw,
        mean_tweets: mean(tw as f64, n),
        facebook_tweet_ratio: if tw == 0 { f64::NAN } else { fb as f64 / tw as f64 },
        articles_with_tweets: with_tweets,
        mean_entropy: mean(ent, with_tweets),
        unique_fraction: mean(uni, with_tweets),
        corporate_fraction: mean(corp, with_tweets),
    }
}
