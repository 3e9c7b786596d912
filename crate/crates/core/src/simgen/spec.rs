use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Section;
use crate::lifecycle::{ProfileClass, SeasonalityProfile, HOURS_PER_WEEK};

/// Probabilities of the five profile classes, in [`ProfileClass::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassMix {
    pub decreasing: f64,
    pub delayed_decreasing: f64,
    pub steady: f64,
    pub increasing: f64,
    pub rebounding: f64,
}

impl Default for ClassMix {
    fn default() -> Self {
        ClassMix::only(ProfileClass::Decreasing)
    }
}

impl ClassMix {
    pub fn only(class: ProfileClass) -> Self {
        let mut w = [0.0; 5];
        w[ProfileClass::ALL.iter().position(|c| *c == class).unwrap()] = 1.0;
        Self::from_weights(w)
    }

    pub fn from_weights(w: [f64; 5]) -> Self {
        ClassMix {
            decreasing: w[0],
            delayed_decreasing: w[1],
            steady: w[2],
            increasing: w[3],
            rebounding: w[4],
        }
    }

    pub fn weights(&self) -> [f64; 5] {
        [self.decreasing, self.delayed_decreasing, self.steady, self.increasing, self.rebounding]
    }
}

/// How tweets and shares relate to an article's visits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialCoupling {
    /// Facebook shares per tweet.
    pub facebook_ratio: f64,
    pub unique_fraction: f64,
    pub corporate_fraction: f64,
    /// Expected tweets per 7-day visit.
    pub tweets_per_visit: f64,
    /// Log-scale spread of the per-article tweet rate.
    pub tweet_rate_sigma: f64,
    /// Log-scale spread of the per-article share ratio.
    pub facebook_ratio_sigma: f64,
}

impl Default for SocialCoupling {
    fn default() -> Self {
        SocialCoupling {
            facebook_ratio: 1.9,
            unique_fraction: 0.199,
            corporate_fraction: 0.368,
            tweets_per_visit: 0.0223,
            tweet_rate_sigma: 0.3,
            facebook_ratio_sigma: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionSpec {
    pub section: Section,
    pub count: usize,
    pub class_mix: ClassMix,
    /// Median half-life of the decay, in hours-equivalent.
    pub half_life_hours: f64,
    pub half_life_sigma: f64,
    pub social: SocialCoupling,
}

impl Default for SectionSpec {
    fn default() -> Self {
        SectionSpec {
            section: Section::Other,
            count: 0,
            class_mix: ClassMix::default(),
            half_life_hours: 8.0,
            half_life_sigma: 0.6,
            social: SocialCoupling::default(),
        }
    }
}

/// Site-wide hour-of-week traffic pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeasonalitySpec {
    /// Relative amplitude of the daily cycle.
    pub daily_amplitude: f64,
    /// UTC hour of peak traffic.
    pub peak_hour: f64,
    /// Traffic multiplier on Saturday and Sunday.
    pub weekend_factor: f64,
}

impl Default for SeasonalitySpec {
    fn default() -> Self {
        SeasonalitySpec {
            daily_amplitude: 0.5,
            peak_hour: 14.0,
            weekend_factor: 0.8,
        }
    }
}

impl SeasonalitySpec {
    pub fn profile(&self) -> SeasonalityProfile {
        let weights: Vec<f64> = (0..HOURS_PER_WEEK)
            .map(|h| {
                let hour = (h % 24) as f64 + 0.5;
                let day = 1.0 + self.daily_amplitude * (std::f64::consts::TAU * (hour - self.peak_hour) / 24.0).cos();
                if h / 24 >= 5 { day * self.weekend_factor } else { day }
            })
            .collect();
        SeasonalityProfile::from_weights(&weights).expect("generated weights are positive")
    }
}

/// Shape parameters shared by all sections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSpec {
    /// Median delay before an article is promoted, in minutes.
    pub onset_median_minutes: f64,
    pub onset_sigma: f64,
    pub onset_max_minutes: f64,
    /// Visit rate before promotion, relative to the promoted rate.
    pub pre_onset_level: f64,
    /// Extra early tweeting: tweet rate is boosted by
    /// `1 + early_tweet_boost * exp(-u / early_tweet_hours)`.
    pub early_tweet_boost: f64,
    pub early_tweet_hours: f64,
    /// Author follower median at the mean visit volume, and its elasticity
    /// with respect to the article's visit volume.
    pub follower_median: f64,
    pub follower_elasticity: f64,
    pub follower_sigma: f64,
    /// Comment vocabulary size at the mean visit volume, and its elasticity.
    pub vocabulary_size: f64,
    pub vocabulary_elasticity: f64,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        DynamicsSpec {
            onset_median_minutes: 10.0,
            onset_sigma: 0.9,
            onset_max_minutes: 120.0,
            pre_onset_level: 0.05,
            early_tweet_boost: 6.0,
            early_tweet_hours: 0.5,
            follower_median: 400.0,
            follower_elasticity: 1.0,
            follower_sigma: 1.0,
            vocabulary_size: 300.0,
            vocabulary_elasticity: 0.5,
        }
    }
}

/// Everything needed to generate a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub start: DateTime<Utc>,
    /// Articles are published uniformly over this many days.
    pub publication_days: f64,
    /// Events are generated for this long after publication.
    pub observation_days: u32,
    pub mean_visits: f64,
    pub visits_sigma: f64,
    pub min_visits: u64,
    /// Referral mix: internal, external, direct, search.
    pub referral_mix: [f64; 4],
    pub site_host: String,
    pub corporate_handles: Vec<String>,
    pub sections: Vec<SectionSpec>,
    pub seasonality: SeasonalitySpec,
    pub dynamics: DynamicsSpec,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        let social = |facebook_ratio, unique_fraction, corporate_fraction| SocialCoupling {
            facebook_ratio,
            unique_fraction,
            corporate_fraction,
            ..SocialCoupling::default()
        };
        CorpusSpec {
            seed: 20121001,
            start: "2012-10-01T00:00:00Z".parse().unwrap(),
            publication_days: 28.0,
            observation_days: 7,
            mean_visits: 5971.0,
            visits_sigma: 1.0,
            min_visits: 100,
            referral_mix: [0.70, 0.14, 0.11, 0.05],
            site_host: "example-news.com".into(),
            corporate_handles: vec!["AJEnglish".into(), "AJELive".into()],
            sections: vec![
                SectionSpec {
                    section: Section::News,
                    count: 322,
                    class_mix: ClassMix::from_weights([244.0 / 322.0, 7.0 / 322.0, 28.0 / 322.0, 10.0 / 322.0, 33.0 / 322.0]),
                    half_life_hours: 8.0,
                    half_life_sigma: 0.6,
                    social: social(1.6, 0.17, 0.27),
                },
                SectionSpec {
                    section: Section::InDepth,
                    count: 139,
                    class_mix: ClassMix::from_weights([0.55, 0.05, 0.20, 0.05, 0.15]),
                    half_life_hours: 20.0,
                    half_life_sigma: 0.6,
                    social: social(2.7, 0.25, 0.44),
                },
                SectionSpec {
                    section: Section::Other,
                    count: 145,
                    class_mix: ClassMix::from_weights([0.70, 0.03, 0.12, 0.05, 0.10]),
                    half_life_hours: 14.0,
                    half_life_sigma: 0.6,
                    social: social(1.8, 0.215, 0.517),
                },
            ],
            seasonality: SeasonalitySpec::default(),
            dynamics: DynamicsSpec::default(),
        }
    }
}

impl CorpusSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: CorpusSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("spec always serializes")
    }

    pub fn article_count(&self) -> usize {
        self.sections.iter().map(|s| s.count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let sums_to_one = |w: &[f64]| w.iter().all(|x| *x >= 0.0 && x.is_finite()) && (w.iter().sum::<f64>() - 1.0).abs() < 1e-6;
        if !sums_to_one(&self.referral_mix) {
            return bad("referral_mix must be non-negative and sum to 1".into());
        }
        if self.sections.is_empty() {
            return bad("at least one section is required".into());
        }
        for s in &self.sections {
            if !sums_to_one(&s.class_mix.weights()) {
                return bad(format!("class mix of {} must sum to 1", s.section));
            }
            let c = &s.social;
            if ![c.unique_fraction, c.corporate_fraction].iter().all(|f| (0.0..=1.0).contains(f)) {
                return bad(format!("social fractions of {} must be in [0,1]", s.section));
            }
            if c.facebook_ratio < 0.0 || c.tweets_per_visit < 0.0 || s.half_life_hours <= 0.0 {
                return bad(format!("rates of {} must be non-negative", s.section));
            }
        }
        if self.mean_visits <= 0.0 || self.visits_sigma < 0.0 || self.observation_days == 0 {
            return bad("visit distribution parameters out of range".into());
        }
        Ok(())
    }
}
