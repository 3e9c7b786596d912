//! Streaming life-cycle analytics for news articles.

pub mod cli;
pub mod config;
pub mod error;
pub mod event;
pub mod features;
pub mod ingest;
pub mod lifecycle;
pub mod predict;
pub mod regress;
pub mod report;
pub mod server;
pub mod simgen;
pub mod social;

pub use config::EngineConfig;
pub use error::{Error, Result};
pub use event::{Event, Section};
