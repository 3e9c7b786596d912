//! Referral classification and the tweet-level signals: normalization,
//! uniqueness by edit distance, corporate retweets and vocabulary entropy.

use newslife::ingest::ReferralClassifier;
use newslife::social::{is_corporate_retweet, is_unique_tweet, levenshtein, normalize_tweet, TermHistogram, DEFAULT_UNIQUE_THRESHOLD};
use newslife::EngineConfig;

fn main() -> anyhow::Result<()> {
    let config = EngineConfig::default();
    let referrals = ReferralClassifier::new(&config.ingest.site_hosts, &config.ingest.search_hosts)?;
    for url in [
        "https://www.example-news.com/news/middle-east",
        "https://www.google.com/search?q=election",
        "https://t.co/abc123",
        "",
        "not a url",
    ] {
        let c = referrals.classify(url);
        println!("{url:<48} -> {}{}", c.class, if c.unparseable { " (unparseable)" } else { "" });
    }

    let tweets = [
        "RT @AJEnglish: Talks resume in Cairo http://aje.me/x1",
        "Talks resume in Cairo http://aje.me/x1",
        "Talks resume in Cairo!! http://aje.me/x2",
        "Finally some good news, talks resume in Cairo http://aje.me/x1",
    ];
    let mut seen: Vec<String> = Vec::new();
    let mut hist = TermHistogram::new();
    for t in tweets {
        let norm = normalize_tweet(t);
        let unique = is_unique_tweet(&norm, &seen, DEFAULT_UNIQUE_THRESHOLD);
        let corporate = is_corporate_retweet(t, &config.social.corporate_handles);
        println!("{norm:<50} unique={unique:<5} corporate_rt={corporate}");
        hist.update(&norm);
        seen.push(norm);
    }
    println!("edit distance between the first and third: {}", levenshtein(&seen[0], &seen[2]));
    println!("{} terms, {} distinct, entropy {:.3} bits", hist.total_terms(), hist.distinct_terms(), hist.entropy_bits());
    Ok(())
}
