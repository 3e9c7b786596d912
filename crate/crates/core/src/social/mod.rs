//! Social-media feature extraction: tweet normalization, uniqueness by edit
//! distance, corporate retweets, vocabulary entropy, interpolated share
//! counts and author statistics.

mod edit_distance;
mod entropy;
mod shares;
mod text;

pub use edit_distance::{levenshtein, levenshtein_chars, levenshtein_within};
pub use entropy::{vocabulary_entropy, TermHistogram};
pub use shares::{interpolate_shares, ShareSample};
pub use text::{is_corporate_retweet, normalize_tweet, tokenize, tokenize_with};

use serde::{Deserialize, Serialize};

/// Default edit-distance threshold, in characters, above which a tweet is unique.
pub const DEFAULT_UNIQUE_THRESHOLD: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedTweet {
    pub original_text: String,
    pub normalized_text: String,
    pub is_unique: bool,
    pub is_corporate_rt: bool,
    pub author_followers: u64,
    pub author_friends: u64,
    pub author_statuses: u64,
}

/// A tweet is unique when its distance to every prior normalized tweet of the
/// same article exceeds `threshold`. Vacuously true without priors.
pub fn is_unique_tweet<S: AsRef<str>>(candidate_normalized: &str, prior_normalized: &[S], threshold: usize) -> bool {
    let cand: Vec<char> = candidate_normalized.chars().collect();
    prior_normalized.iter().all(|p| {
        let p: Vec<char> = p.as_ref().chars().collect();
        levenshtein_within(&cand, &p, threshold).is_none()
    })
}

/// Running per-tweet means of author followers, friends and statuses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FollowerAccumulator {
    pub tweets: u64,
    pub followers_sum: f64,
    pub friends_sum: f64,
    pub statuses_sum: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FollowerStats {
    pub mean_followers: f64,
    pub mean_friends: f64,
    pub mean_statuses: f64,
}

impl FollowerAccumulator {
    pub fn push(&mut self, followers: u64, friends: u64, statuses: u64) {
        self.tweets += 1;
        self.followers_sum += followers as f64;
        self.friends_sum += friends as f64;
        self.statuses_sum += statuses as f64;
    }

    pub fn stats(&self) -> FollowerStats {
        if self.tweets == 0 {
            return FollowerStats::default();
        }
        let n = self.tweets as f64;
        FollowerStats {
            mean_followers: self.followers_sum / n,
            mean_friends: self.friends_sum / n,
            mean_statuses: self.statuses_sum / n,
        }
    }
}
