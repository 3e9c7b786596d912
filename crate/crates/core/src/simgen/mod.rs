//! Synthetic event corpora whose summary statistics, visit profiles and
//! social coupling are set by a [`CorpusSpec`].

mod generate;
mod kernel;
mod spec;
mod stats;
mod text;

pub use generate::{
    emit_events, generate_corpus, sample_article, sample_article_in, ArticleBlueprint, ArticleEvents, EventMerge,
    SyntheticCorpus,
};
pub use kernel::Kernel;
pub use spec::{ClassMix, CorpusSpec, DynamicsSpec, SeasonalitySpec, SectionSpec, SocialCoupling};
pub use stats::{corpus_stats, CorpusStats};
