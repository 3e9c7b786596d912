//! Raw input events and their line-delimited JSON encoding.
//!
//! One event per line. Visits:
//!
//! ```text
//! {"event":"visit","article_id":"a1","timestamp":"2012-10-08T10:00:07Z","referral_url":"https://t.co/x","section":"news"}
//! ```
//!
//! Reactions carry a `kind` of `tweet` or `facebook_snapshot`:
//!
//! ```text
//! {"event":"reaction","kind":"tweet","article_id":"a1","timestamp":"2012-10-08T10:01:00Z","tweet_text":"RT @AJEnglish: ...","author_followers":120,"author_friends":80,"author_statuses":3100}
//! {"event":"reaction","kind":"facebook_snapshot","article_id":"a1","timestamp":"2012-10-08T10:05:00Z","share_count":42}
//! ```
//!
//! `section` is optional on visits (`news`, `indepth`, anything else maps to
//! `other`). Tweet fields must be present iff `kind` is `tweet`, and
//! `share_count` iff `kind` is `facebook_snapshot`.

use std::fmt;
use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Editorial section an article belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    News,
    #[serde(rename = "indepth")]
    InDepth,
    #[default]
    Other,
}

impl Section {
    pub fn parse(label: &str) -> Section {
        match label.trim().to_ascii_lowercase().as_str() {
            "news" => Section::News,
            "indepth" | "in-depth" | "in_depth" => Section::InDepth,
            _ => Section::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Section::News => "news",
            Section::InDepth => "indepth",
            Section::Other => "other",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VisitEvent {
    pub article_id: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub referral_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<Section>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TweetPayload {
    pub text: String,
    pub author_followers: u64,
    pub author_friends: u64,
    pub author_statuses: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reaction {
    Tweet(TweetPayload),
    FacebookSnapshot { share_count: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReactionEvent {
    pub article_id: String,
    pub timestamp: DateTime<Utc>,
    pub reaction: Reaction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Event {
    Visit(VisitEvent),
    Reaction(ReactionEvent),
}

impl Event {
    pub fn article_id(&self) -> &str {
        match self {
            Event::Visit(v) => &v.article_id,
            Event::Reaction(r) => &r.article_id,
        }
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        match self {
            Event::Visit(v) => v.timestamp,
            Event::Reaction(r) => r.timestamp,
        }
    }

    pub fn tweet(
        article_id: impl Into<String>,
        timestamp: DateTime<Utc>,
        text: impl Into<String>,
        followers: u64,
        friends: u64,
        statuses: u64,
    ) -> Event {
        Event::Reaction(ReactionEvent {
            article_id: article_id.into(),
            timestamp,
            reaction: Reaction::Tweet(TweetPayload {
                text: text.into(),
                author_followers: followers,
                author_friends: friends,
                author_statuses: statuses,
            }),
        })
    }

    pub fn visit(article_id: impl Into<String>, timestamp: DateTime<Utc>, referral_url: impl Into<String>) -> Event {
        Event::Visit(VisitEvent {
            article_id: article_id.into(),
            timestamp,
            referral_url: referral_url.into(),
            section: None,
        })
    }

    pub fn shares(article_id: impl Into<String>, timestamp: DateTime<Utc>, share_count: u64) -> Event {
        Event::Reaction(ReactionEvent {
            article_id: article_id.into(),
            timestamp,
            reaction: Reaction::FacebookSnapshot { share_count },
        })
    }

    /// Checks the per-event invariants that do not depend on article state.
    pub fn validate(&self, epoch: &CollectionEpoch) -> Result<()> {
        if self.article_id().is_empty() {
            return Err(Error::InvalidEvent("empty article_id".into()));
        }
        let ts = self.timestamp();
        if ts < epoch.start || ts >= epoch.end {
            return Err(Error::InvalidEvent(format!(
                "timestamp {ts} outside collection epoch [{}, {})",
                epoch.start, epoch.end
            )));
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(&WireEvent::from(self)).expect("wire events always serialize")
    }

    pub fn from_line(line: &str) -> Result<Event> {
        let wire: WireEvent = serde_json::from_str(line)?;
        wire.into_event()
    }
}

/// Instants outside this range are rejected at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionEpoch {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Default for CollectionEpoch {
    fn default() -> Self {
        CollectionEpoch {
            start: "2000-01-01T00:00:00Z".parse().unwrap(),
            end: "2100-01-01T00:00:00Z".parse().unwrap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WireKind {
    Visit,
    Reaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WireReactionKind {
    Tweet,
    FacebookSnapshot,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEvent {
    event: WireKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<WireReactionKind>,
    article_id: String,
    timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    referral_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    section: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tweet_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    author_followers: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    author_friends: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    author_statuses: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    share_count: Option<u64>,
}

impl From<&Event> for WireEvent {
    fn from(event: &Event) -> Self {
        let mut wire = WireEvent {
            event: WireKind::Visit,
            kind: None,
            article_id: event.article_id().to_string(),
            timestamp: event.timestamp(),
            referral_url: None,
            section: None,
            tweet_text: None,
            author_followers: None,
            author_friends: None,
            author_statuses: None,
            share_count: None,
        };
        match event {
            Event::Visit(v) => {
                wire.referral_url = Some(v.referral_url.clone());
                wire.section = v.section.map(|s| s.as_str().to_string());
            }
            Event::Reaction(r) => {
                wire.event = WireKind::Reaction;
                match &r.reaction {
                    Reaction::Tweet(t) => {
                        wire.kind = Some(WireReactionKind::Tweet);
                        wire.tweet_text = Some(t.text.clone());
                        wire.author_followers = Some(t.author_followers);
                        wire.author_friends = Some(t.author_friends);
                        wire.author_statuses = Some(t.author_statuses);
                    }
                    Reaction::FacebookSnapshot { share_count } => {
                        wire.kind = Some(WireReactionKind::FacebookSnapshot);
                        wire.share_count = Some(*share_count);
                    }
                }
            }
        }
        wire
    }
}

impl WireEvent {
    fn into_event(self) -> Result<Event> {
        let tweet_fields = [
            self.tweet_text.is_some(),
            self.author_followers.is_some(),
            self.author_friends.is_some(),
            self.author_statuses.is_some(),
        ];
        match self.event {
            WireKind::Visit => {
                if self.kind.is_some() || tweet_fields.iter().any(|&b| b) || self.share_count.is_some() {
                    return Err(Error::InvalidEvent("visit carries reaction fields".into()));
                }
                Ok(Event::Visit(VisitEvent {
                    article_id: self.article_id,
                    timestamp: self.timestamp,
                    referral_url: self.referral_url.unwrap_or_default(),
                    section: self.section.as_deref().map(Section::parse),
                }))
            }
            WireKind::Reaction => {
                if self.referral_url.is_some() || self.section.is_some() {
                    return Err(Error::InvalidEvent("reaction carries visit fields".into()));
                }
                let reaction = match self.kind {
                    Some(WireReactionKind::Tweet) => {
                        if self.share_count.is_some() {
                            return Err(Error::InvalidEvent("tweet carries share_count".into()));
                        }
                        match (self.tweet_text, self.author_followers, self.author_friends, self.author_statuses) {
                            (Some(text), Some(author_followers), Some(author_friends), Some(author_statuses)) => {
                                Reaction::Tweet(TweetPayload {
                                    text,
                                    author_followers,
                                    author_friends,
                                    author_statuses,
                                })
                            }
                            _ => return Err(Error::InvalidEvent("tweet is missing author or text fields".into())),
                        }
                    }
                    Some(WireReactionKind::FacebookSnapshot) => {
                        if tweet_fields.iter().any(|&b| b) {
                            return Err(Error::InvalidEvent("facebook snapshot carries tweet fields".into()));
                        }
                        match self.share_count {
                            Some(share_count) => Reaction::FacebookSnapshot { share_count },
                            None => return Err(Error::InvalidEvent("facebook snapshot without share_count".into())),
                        }
                    }
                    None => return Err(Error::InvalidEvent("reaction without kind".into())),
                };
                Ok(Event::Reaction(ReactionEvent {
                    article_id: self.article_id,
                    timestamp: self.timestamp,
                    reaction,
                }))
            }
        }
    }
}

/// Reads an event file, skipping blank lines. Line numbers in errors are 1-based.
pub fn read_events<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Event>> {
    reader.lines().enumerate().filter_map(|(idx, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(line) if line.trim().is_empty() => None,
        Ok(line) => Some(Event::from_line(&line).map_err(|e| Error::MalformedLine {
            line: idx + 1,
            message: e.to_string(),
        })),
    })
}

pub fn write_events<'a, W: Write>(mut writer: W, events: impl IntoIterator<Item = &'a Event>) -> Result<usize> {
    let mut n = 0;
    for event in events {
        writeln!(writer, "{}", event.to_line())?;
        n += 1;
    }
    writer.flush()?;
    Ok(n)
}
