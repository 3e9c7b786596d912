use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::text::tokenize_with;
use crate::config::TokenizerConfig;

/// Cumulative term counts over all tweets seen for an article.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermHistogram {
    counts: BTreeMap<String, u64>,
    total_terms: u64,
}

impl TermHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the tokens of an already-normalized tweet.
    pub fn update(&mut self, normalized_text: &str) {
        self.update_with(normalized_text, TokenizerConfig::default());
    }

    pub fn update_with(&mut self, normalized_text: &str, tokenizer: TokenizerConfig) {
        for token in tokenize_with(normalized_text, tokenizer) {
            *self.counts.entry(token).or_insert(0) += 1;
            self.total_terms += 1;
        }
    }

    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut hist = Self::new();
        for t in texts {
            hist.update(t);
        }
        hist
    }

    pub fn add_count(&mut self, term: impl Into<String>, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(term.into()).or_insert(0) += count;
        self.total_terms += count;
    }

    pub fn total_terms(&self) -> u64 {
        self.total_terms
    }

    pub fn distinct_terms(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, term: &str) -> u64 {
        self.counts.get(term).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Shannon entropy of the term distribution in bits; 0 when empty.
    pub fn entropy_bits(&self) -> f64 {
        vocabulary_entropy(self)
    }
}

pub fn vocabulary_entropy(hist: &TermHistogram) -> f64 {
    if hist.total_terms == 0 {
        return 0.0;
    }
    let total = hist.total_terms as f64;
    let h = hist
        .counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    h.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_and_uniform() {
        let mut one = TermHistogram::new();
        one.add_count("x", 50);
        assert_eq!(one.entropy_bits(), 0.0);

        let mut uniform = TermHistogram::new();
        for i in 0..64 {
            uniform.add_count(format!("t{i}"), 1);
        }
        assert!((uniform.entropy_bits() - 6.0).abs() < 1e-12);

        assert_eq!(TermHistogram::new().entropy_bits(), 0.0);
    }

    #[test]
    fn hand_built_histogram() {
        let mut h = TermHistogram::new();
        h.add_count("a", 2);
        h.add_count("b", 1);
        h.add_count("c", 1);
        // -(1/2 log2 1/2 + 2 * 1/4 log2 1/4) = 0.5 + 1.0
        assert!((h.entropy_bits() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn update_counts_tokens() {
        let mut h = TermHistogram::new();
        h.update("");
        assert_eq!(h, TermHistogram::new());
        h.update("big big news");
        assert_eq!(h.count("big"), 2);
        assert_eq!(h.count("news"), 1);
        assert_eq!(h.total_terms(), 3);
    }

    proptest! {
        #[test]
        fn streaming_equals_concatenation(texts in proptest::collection::vec("[a-c ]{0,12}", 0..20)) {
            let mut stream = TermHistogram::new();
            for t in &texts {
                stream.update(t);
            }
            let batch = TermHistogram::from_texts([texts.join(" ").as_str()]);
            prop_assert_eq!(stream, batch);
        }

        #[test]
        fn entropy_bounded_by_log_k(counts in proptest::collection::vec(1u64..50, 1..30)) {
            let mut h = TermHistogram::new();
            for (i, c) in counts.iter().enumerate() {
                h.add_count(format!("t{i}"), *c);
            }
            let e = h.entropy_bits();
            prop_assert!(e >= 0.0);
            prop_assert!(e <= (counts.len() as f64).log2() + 1e-12);
        }

        #[test]
        fn entropy_invariant_under_relabeling(counts in proptest::collection::vec(1u64..50, 1..30)) {
            let mut a = TermHistogram::new();
            let mut b = TermHistogram::new();
            for (i, c) in counts.iter().enumerate() {
                a.add_count(format!("t{i}"), *c);
                b.add_count(format!("z{}", counts.len() - i), *c);
            }
            prop_assert!((a.entropy_bits() - b.entropy_bits()).abs() < 1e-12);
        }
    }
}
