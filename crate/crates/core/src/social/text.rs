use std::sync::LazyLock;

use regex::Regex;

use crate::config::TokenizerConfig;

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap());
static RT_PREFIX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^RT\s+@[A-Za-z0-9_]+:?").unwrap());
static WS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());

/// Strips one leading `RT @handle[:]` marker and every URL-shaped substring,
/// then collapses whitespace runs and trims.
///
/// Nested markers (`RT @a: RT @b: ...`) lose only the outer one.
pub fn normalize_tweet(text: &str) -> String {
    let trimmed = text.trim_start();
    let without_rt = RT_PREFIX.replace(trimmed, "");
    let without_urls = URL.replace_all(&without_rt, " ");
    WS.replace_all(without_urls.trim(), " ").into_owned()
}

/// True when `text` contains `RT @handle` for a configured handle. The handle
/// comparison ignores case and must end at a handle boundary.
pub fn is_corporate_retweet<S: AsRef<str>>(text: &str, corporate_handles: &[S]) -> bool {
    let mut rest = text;
    while let Some(pos) = rest.find("RT @") {
        let after = &rest[pos + 4..];
        let handle_len = after
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map_or(after.len(), |(i, _)| i);
        let handle = &after[..handle_len];
        if corporate_handles
            .iter()
            .any(|h| h.as_ref().trim_start_matches('@').eq_ignore_ascii_case(handle))
        {
            return true;
        }
        rest = after;
    }
    false
}

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    tokenize_with(text, TokenizerConfig::default())
}

pub fn tokenize_with(text: &str, cfg: TokenizerConfig) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(move |t| !t.is_empty() && t.chars().count() >= cfg.min_token_chars)
        .map(move |t| if cfg.lowercase { t.to_lowercase() } else { t.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_prefix_and_url() {
        assert_eq!(normalize_tweet("RT @AJEnglish: Story title http://sho.rt/x"), "Story title");
        assert_eq!(normalize_tweet("Story title"), "Story title");
        assert_eq!(normalize_tweet("RT @bob Story"), "Story");
        assert_eq!(normalize_tweet("  a   b\t\nc  "), "a b c");
        assert_eq!(normalize_tweet("see www.example.com/x now"), "see now");
    }

    #[test]
    fn only_one_marker_is_removed() {
        assert_eq!(normalize_tweet("RT @a: RT @b: hello"), "RT @b: hello");
    }

    #[test]
    fn mid_text_marker_is_kept() {
        assert_eq!(normalize_tweet("wow RT @a: hello"), "wow RT @a: hello");
    }

    #[test]
    fn corporate_detection() {
        let handles = ["AJEnglish", "AJELive"];
        assert!(is_corporate_retweet("RT @AJEnglish: headline", &handles));
        assert!(is_corporate_retweet("RT @ajelive headline", &handles));
        assert!(is_corporate_retweet("my take RT @AJEnglish: headline", &handles));
        assert!(!is_corporate_retweet("headline via @AJEnglish", &handles));
        assert!(!is_corporate_retweet("RT @AJEnglishFan: headline", &handles));
        assert!(!is_corporate_retweet("RT @someone: headline", &handles));
    }

    #[test]
    fn edited_corporate_retweet_can_also_be_unique() {
        use crate::social::is_unique_tweet;
        let handles = ["AJEnglish"];
        let prior = vec![normalize_tweet("RT @AJEnglish: Pirates abduct ship crew off Nigerian coast")];
        let edited = "RT @AJEnglish: Pirates abduct ship crew off Nigerian coast. Shocking, where is the navy?";
        assert!(is_corporate_retweet(edited, &handles));
        assert!(is_unique_tweet(&normalize_tweet(edited), &prior, 10));
    }

    #[test]
    fn tokenizer_rules() {
        let toks: Vec<String> = tokenize("Big big NEWS! #Syria's").collect();
        assert_eq!(toks, ["big", "big", "news", "syria", "s"]);
        assert_eq!(tokenize("").count(), 0);
    }

    proptest! {
        #[test]
        fn output_never_contains_urls(
            words in proptest::collection::vec("[a-zA-Z:/.h]{0,8}", 0..10),
            urls in proptest::collection::vec("(http|https|HTTP)://[a-z./]{0,10}", 0..4),
            positions in proptest::collection::vec(0usize..12, 0..4),
            glue in proptest::bool::ANY,
        ) {
            let mut parts = words.clone();
            for (u, p) in urls.iter().zip(positions.iter()) {
                let p = (*p).min(parts.len());
                parts.insert(p, u.clone());
            }
            let sep = if glue { "" } else { " " };
            let text = parts.join(sep);
            let out = normalize_tweet(&text).to_lowercase();
            prop_assert!(!out.contains("http://"), "{} -> {}", text, out);
            prop_assert!(!out.contains("https://"), "{} -> {}", text, out);
        }
    }
}
