use std::cmp::Reverse;
use std::collections::BinaryHeap;

use chrono::{DateTime, TimeDelta, Utc};
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::spec::{CorpusSpec, SectionSpec};
use super::text::{headline, short_url, Vocabulary};
use crate::event::{Event, Reaction, ReactionEvent, Section, TweetPayload, VisitEvent};
use crate::ingest::ReferralClass;
use crate::lifecycle::{ProfileClass, SeasonalityProfile};

/// Everything drawn for one article before any event is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleBlueprint {
    pub article_id: String,
    pub section: Section,
    pub class: ProfileClass,
    pub kernel: Kernel,
    pub published: DateTime<Utc>,
    pub total_visits: u64,
    /// Minutes after publication before the article is promoted.
    pub onset_minutes: f64,
    pub total_tweets: u64,
    pub unique_fraction: f64,
    pub corporate_fraction: f64,
    pub facebook_ratio: f64,
    pub follower_median: f64,
    pub vocabulary_size: usize,
}

fn lognormal_mean_one<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    LogNormal::new(-sigma * sigma / 2.0, sigma).expect("valid sigma").sample(rng)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

fn stochastic_round<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    let base = x.floor();
    base as u64 + (rng.random::<f64>() < x - base) as u64
}

fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Draws a blueprint for one article of the given section.
pub fn sample_article_in<R: Rng + ?Sized>(spec: &CorpusSpec, section: &SectionSpec, article_id: String, rng: &mut R) -> ArticleBlueprint {
    let class = ProfileClass::ALL[pick_weighted(&section.class_mix.weights(), rng)];
    let half_life = section.half_life_hours * lognormal_median_one(section.half_life_sigma, rng);
    let kernel = Kernel::sample(class, half_life, rng);
    let sigma = spec.visits_sigma;
    let mu = spec.mean_visits.ln() - sigma * sigma / 2.0;
    let dist = LogNormal::new(mu, sigma.max(1e-12)).expect("valid visit distribution");
    let total_visits = loop {
        let v = dist.sample(rng).round() as u64;
        if v >= spec.min_visits {
            break v;
        }
    };
    let minutes = (spec.publication_days * 1440.0).max(1.0) as i64;
    let published = spec.start + TimeDelta::minutes(rng.random_range(0..minutes));
    let d = &spec.dynamics;
    let onset_minutes = (d.onset_median_minutes * lognormal_median_one(d.onset_sigma, rng)).min(d.onset_max_minutes);
    let c = &section.social;
    let tweet_mean = c.tweets_per_visit * total_visits as f64 * lognormal_mean_one(c.tweet_rate_sigma, rng);
    let scale = total_visits as f64 / spec.mean_visits;
    ArticleBlueprint {
        article_id,
        section: section.section,
        class,
        kernel,
        published,
        total_visits,
        onset_minutes,
        total_tweets: poisson(tweet_mean, rng),
        unique_fraction: c.unique_fraction,
        corporate_fraction: c.corporate_fraction,
        facebook_ratio: c.facebook_ratio * lognormal_mean_one(c.facebook_ratio_sigma, rng),
        follower_median: d.follower_median * scale.powf(d.follower_elasticity),
        vocabulary_size: (d.vocabulary_size * scale.powf(d.vocabulary_elasticity)).round().max(40.0) as usize,
    }
}

fn lognormal_median_one<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    (sigma * Normal::new(0.0, 1.0).unwrap().sample(rng)).exp()
}

/// Draws a blueprint with the section chosen in proportion to section counts.
pub fn sample_article<R: Rng + ?Sized>(spec: &CorpusSpec, article_id: String, rng: &mut R) -> ArticleBlueprint {
    let weights: Vec<f64> = spec.sections.iter().map(|s| s.count as f64).collect();
    let section = &spec.sections[pick_weighted(&weights, rng)];
    sample_article_in(spec, section, article_id, rng)
}

/// Events of one article in compact form, each list sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleEvents {
    pub article_id: String,
    pub section: Section,
    /// Milliseconds since the Unix epoch and referral class.
    pub visits: Vec<(i64, ReferralClass)>,
    pub tweets: Vec<(i64, TweetPayload)>,
    pub shares: Vec<(i64, u64)>,
    site_host: String,
}

/// Per-minute weights after publication: main component (with the promotion
/// onset), second pulse, and social activity.
struct MinuteWeights {
    base: Vec<f64>,
    pulse: Vec<f64>,
    social: Vec<f64>,
}

fn minute_weights(bp: &ArticleBlueprint, spec: &CorpusSpec, profile: &SeasonalityProfile) -> MinuteWeights {
    let horizon = spec.observation_days as usize * 1440;
    let d = &spec.dynamics;
    let mut w = MinuteWeights {
        base: Vec::with_capacity(horizon),
        pulse: Vec::with_capacity(horizon),
        social: Vec::with_capacity(horizon),
    };
    let mut u = 0.0;
    for m in 0..horizon {
        let du = profile.weight_at(bp.published + TimeDelta::minutes(m as i64)) / 60.0;
        let mid = u + du / 2.0;
        let ramp = ((m as f64 + 0.5 - bp.onset_minutes) / 5.0).clamp(0.0, 1.0);
        let onset = d.pre_onset_level + (1.0 - d.pre_onset_level) * ramp;
        let base = bp.kernel.base(mid) * du;
        let pulse = bp.kernel.pulse(mid) * du;
        w.base.push(base * onset);
        w.pulse.push(pulse);
        w.social.push((base + pulse) * (1.0 + d.early_tweet_boost * (-mid / d.early_tweet_hours).exp()));
        u += du;
    }
    w
}

/// Places `n` events on minutes in proportion to `weights`, returning
/// sorted millisecond offsets from `start`.
fn place<R: Rng + ?Sized>(n: u64, weights: &[f64], start: DateTime<Utc>, rng: &mut R) -> Vec<i64> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cumulative.push(acc);
    }
    if n == 0 || acc <= 0.0 {
        return Vec::new();
    }
    let origin = start.timestamp_millis();
    let mut out: Vec<i64> = (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * acc;
            let m = cumulative.partition_point(|&c| c <= x).min(weights.len() - 1);
            origin + m as i64 * 60_000 + rng.random_range(0..60_000)
        })
        .collect();
    out.sort_unstable();
    out
}

fn referral_url<R: Rng + ?Sized>(class: ReferralClass, host: &str, rng: &mut R) -> String {
    const EXTERNAL: [&str; 5] = [
        "https://t.co/",
        "https://www.facebook.com/",
        "https://www.reddit.com/r/worldnews/",
        "https://news.ycombinator.com/",
        "https://m.facebook.com/",
    ];
    match class {
        ReferralClass::Internal => {
            if rng.random::<f64>() < 0.6 {
                format!("https://{host}/")
            } else {
                format!("https://{host}/news/{}", rng.random_range(1000..9999))
            }
        }
        ReferralClass::External => EXTERNAL[rng.random_range(0..EXTERNAL.len())].to_string(),
        ReferralClass::Direct => String::new(),
        ReferralClass::Search => format!("https://www.google.com/search?q=q{}", rng.random_range(0..1000)),
    }
}

/// Generates the visit, tweet and share streams of one article.
pub fn emit_events<R: Rng + ?Sized>(bp: &ArticleBlueprint, spec: &CorpusSpec, profile: &SeasonalityProfile, rng: &mut R) -> ArticleEvents {
    let mut out = ArticleEvents {
        article_id: bp.article_id.clone(),
        section: bp.section,
        visits: Vec::new(),
        tweets: Vec::new(),
        shares: Vec::new(),
        site_host: spec.site_host.clone(),
    };
    if bp.total_visits == 0 {
        return out;
    }
    let w = minute_weights(bp, spec, profile);
    let base_total: f64 = w.base.iter().sum();
    let pulse_total: f64 = w.pulse.iter().sum();
    let pulse_visits = (bp.total_visits as f64 * pulse_total / (base_total + pulse_total)).round() as u64;
    let base_times = place(bp.total_visits - pulse_visits, &w.base, bp.published, rng);
    let mut visits: Vec<(i64, ReferralClass)> = base_times
        .into_iter()
        .map(|t| (t, ReferralClass::ALL[pick_weighted(&spec.referral_mix, rng)]))
        .collect();
    visits.extend(place(pulse_visits, &w.pulse, bp.published, rng).into_iter().map(|t| (t, ReferralClass::External)));
    visits.sort_unstable_by_key(|v| (v.0, v.1.index()));
    let first_visit = visits[0].0;
    let end = bp.published.timestamp_millis() + spec.observation_days as i64 * 86_400_000;
    out.visits = visits;

    let tweet_times: Vec<i64> = place(bp.total_tweets, &w.social, bp.published, rng)
        .into_iter()
        .map(|t| t.max(first_visit))
        .collect();
    out.tweets = tweets_for(bp, spec, &tweet_times, rng);
    out.tweets.sort_by(|a, b| {
        (a.0, &a.1.text, a.1.author_followers, a.1.author_friends, a.1.author_statuses).cmp(&(
            b.0,
            &b.1.text,
            b.1.author_followers,
            b.1.author_friends,
            b.1.author_statuses,
        ))
    });

    let shares = poisson(bp.facebook_ratio * bp.total_tweets as f64, rng);
    let share_times = place(shares, &w.social, bp.published, rng);
    let mut count = 0;
    for t in share_times {
        count += 1;
        let boundary = (t.div_euclid(300_000) + 1) * 300_000;
        let ts = boundary.clamp(first_visit, end - 1000);
        match out.shares.last_mut() {
            Some(last) if last.0 == ts => last.1 = count,
            _ => out.shares.push((ts, count)),
        }
    }
    out
}

fn tweets_for<R: Rng + ?Sized>(bp: &ArticleBlueprint, spec: &CorpusSpec, times: &[i64], rng: &mut R) -> Vec<(i64, TweetPayload)> {
    let n = times.len();
    if n == 0 {
        return Vec::new();
    }
    let title = headline(rng);
    let vocab = Vocabulary::sample(bp.vocabulary_size, rng);
    let mut unique = vec![false; n];
    let mut corporate = vec![false; n];
    unique[0] = true;
    let extra_unique = (stochastic_round(bp.unique_fraction * n as f64, rng).max(1) - 1).min(n as u64 - 1) as usize;
    let corp = (stochastic_round(bp.corporate_fraction * n as f64, rng)).min(n as u64 - 1) as usize;
    for i in sample_indices(rng, n - 1, extra_unique) {
        unique[i + 1] = true;
    }
    for i in sample_indices(rng, n - 1, corp) {
        corporate[i + 1] = true;
    }
    let d = &spec.dynamics;
    let followers = LogNormal::new(bp.follower_median.max(1.0).ln(), d.follower_sigma.max(1e-12)).unwrap();
    let friends = LogNormal::new(300f64.ln(), 1.0).unwrap();
    let statuses = LogNormal::new(5000f64.ln(), 1.2).unwrap();
    (0..n)
        .map(|i| {
            let handle = &spec.corporate_handles[rng.random_range(0..spec.corporate_handles.len().max(1))];
            let url = short_url(rng);
            let text = match (corporate[i], unique[i] && i > 0) {
                (true, true) => format!("RT @{handle}: {} {title} {url}", vocab.comment(rng, 12)),
                (true, false) => format!("RT @{handle}: {title} {url}"),
                (false, true) => format!("{} {title} {url}", vocab.comment(rng, 12)),
                (false, false) => {
                    if rng.random::<f64>() < 0.5 {
                        format!("{title} {url}")
                    } else {
                        title.clone()
                    }
                }
            };
            let payload = TweetPayload {
                text,
                author_followers: followers.sample(rng).round() as u64,
                author_friends: friends.sample(rng).round() as u64,
                author_statuses: statuses.sample(rng).round() as u64,
            };
            (times[i], payload)
        })
        .collect()
}

fn at(ms: i64) -> DateTime<Utc> {
    DateTime::from_timestamp_millis(ms).expect("timestamp in range")
}

impl ArticleEvents {
    pub fn len(&self) -> usize {
        self.visits.len() + self.tweets.len() + self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn visit_event(&self, i: usize, rng: &mut ChaCha8Rng) -> Event {
        let (t, class) = self.visits[i];
        Event::Visit(VisitEvent {
            article_id: self.article_id.clone(),
            timestamp: at(t),
            referral_url: referral_url(class, &self.site_host, rng),
            section: (i == 0).then_some(self.section),
        })
    }

    fn reaction_event(&self, kind: usize, i: usize) -> Event {
        let (ts, reaction) = if kind == 1 {
            (self.tweets[i].0, Reaction::Tweet(self.tweets[i].1.clone()))
        } else {
            (self.shares[i].0, Reaction::FacebookSnapshot { share_count: self.shares[i].1 })
        };
        Event::Reaction(ReactionEvent {
            article_id: self.article_id.clone(),
            timestamp: at(ts),
            reaction,
        })
    }

    fn next_key(&self, cursor: &[usize; 3]) -> Option<(i64, usize)> {
        let candidates = [
            self.visits.get(cursor[0]).map(|v| v.0),
            self.tweets.get(cursor[1]).map(|t| t.0),
            self.shares.get(cursor[2]).map(|s| s.0),
        ];
        candidates
            .iter()
            .enumerate()
            .filter_map(|(k, t)| t.map(|t| (t, k)))
            .min()
    }
}

/// Merges many articles' streams into one stream in timestamp order. At
/// equal timestamps visits come before tweets before share snapshots, and
/// lower article indices first.
pub struct EventMerge<'a> {
    articles: &'a [ArticleEvents],
    cursors: Vec<[usize; 3]>,
    heap: BinaryHeap<Reverse<(i64, usize, usize)>>,
    rng: ChaCha8Rng,
}

impl<'a> EventMerge<'a> {
    pub fn new(articles: &'a [ArticleEvents], seed: u64) -> Self {
        let cursors = vec![[0; 3]; articles.len()];
        let heap = articles
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.next_key(&[0; 3]).map(|(t, k)| Reverse((t, k, i))))
            .collect();
        EventMerge {
            articles,
            cursors,
            heap,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe),
        }
    }
}

impl Iterator for EventMerge<'_> {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        let Reverse((_, kind, a)) = self.heap.pop()?;
        let art = &self.articles[a];
        let idx = self.cursors[a][kind];
        let event = if kind == 0 {
            art.visit_event(idx, &mut self.rng)
        } else {
            art.reaction_event(kind, idx)
        };
        self.cursors[a][kind] += 1;
        if let Some((t, k)) = art.next_key(&self.cursors[a]) {
            self.heap.push(Reverse((t, k, a)));
        }
        Some(event)
    }
}

/// A generated corpus: blueprints plus compact event streams.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub spec: CorpusSpec,
    pub profile: SeasonalityProfile,
    pub blueprints: Vec<ArticleBlueprint>,
    pub articles: Vec<ArticleEvents>,
}

impl SyntheticCorpus {
    /// All events in timestamp order.
    pub fn events(&self) -> EventMerge<'_> {
        EventMerge::new(&self.articles, self.spec.seed)
    }

    pub fn event_count(&self) -> usize {
        self.articles.iter().map(|a| a.len()).sum()
    }

    pub fn blueprint(&self, article_id: &str) -> Option<&ArticleBlueprint> {
        self.blueprints.iter().find(|b| b.article_id == article_id)
    }
}

/// Generates the corpus described by `spec`: exact section counts in random
/// order, one independent random stream per article.
pub fn generate_corpus(spec: &CorpusSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sections: Vec<usize> = spec.sections.iter().enumerate().flat_map(|(i, s)| std::iter::repeat_n(i, s.count)).collect();
    rand::seq::SliceRandom::shuffle(sections.as_mut_slice(), &mut rng);
    let profile = spec.seasonality.profile();
    let article_rng = |i: usize| {
        let mut r = ChaCha8Rng::seed_from_u64(spec.seed);
        r.set_stream(i as u64 + 1);
        r
    };
    let build = |i: usize| {
        let mut r = article_rng(i);
        let bp = sample_article_in(spec, &spec.sections[sections[i]], format!("art-{:04}", i + 1), &mut r);
        let ev = emit_events(&bp, spec, &profile, &mut r);
        (bp, ev)
    };
    let n = sections.len();
    let threads = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n.max(1));
    let chunk = n.div_ceil(threads.max(1)).max(1);
    let mut results: Vec<(ArticleBlueprint, ArticleEvents)> = Vec::with_capacity(n);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|lo| {
                let build = &build;
                s.spawn(move || (lo..(lo + chunk).min(n)).map(build).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            results.extend(h.join().expect("generator thread panicked"));
        }
    });
    let (blueprints, articles) = results.into_iter().unzip();
    SyntheticCorpus {
        spec: spec.clone(),
        profile,
        blueprints,
        articles,
    }
}
