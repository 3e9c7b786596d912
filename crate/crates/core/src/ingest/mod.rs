//! Event ingestion: referral classification, per-minute aggregation per
//! article, and the monitoring, polling and sampling filters.

mod referral;
mod schedule;
mod series;
mod store;

pub use referral::{classify_referral, Classified, ReferralClass, ReferralClassifier};
pub use schedule::{monitoring_filter, polling_schedule, sample_filter, Coverage};
pub use series::{ArticleSeries, IngestOutcome, ShareRecord, TweetRecord, VisitBucket, MINUTES_PER_DAY};
pub use store::{SeriesStore, StoreDiagnostics, StoreState};
