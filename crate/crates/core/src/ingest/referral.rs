use std::fmt;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferralClass {
    Internal,
    External,
    Direct,
    Search,
}

impl ReferralClass {
    pub const ALL: [ReferralClass; 4] = [
        ReferralClass::Internal,
        ReferralClass::External,
        ReferralClass::Direct,
        ReferralClass::Search,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReferralClass::Internal => "internal",
            ReferralClass::External => "external",
            ReferralClass::Direct => "direct",
            ReferralClass::Search => "search",
        }
    }
}

impl fmt::Display for ReferralClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of classifying one referral string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classified {
    pub class: ReferralClass,
    /// The referral was non-empty but had no parseable host.
    pub unparseable: bool,
}

/// Host pattern matcher. A pattern `example.com` (or `*.example.com`) matches
/// that host and all of its subdomains, case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferralClassifier {
    site: Vec<String>,
    search: Vec<String>,
}

fn normalize_pattern(p: &str) -> String {
    p.trim().trim_start_matches("*.").trim_end_matches('.').to_ascii_lowercase()
}

fn host_matches(host: &str, pattern: &str) -> bool {
    host == pattern || (host.len() > pattern.len() && host.ends_with(pattern) && host.as_bytes()[host.len() - pattern.len() - 1] == b'.')
}

impl ReferralClassifier {
    pub fn new<S: AsRef<str>>(site_hosts: &[S], search_hosts: &[S]) -> Result<Self> {
        let site: Vec<String> = site_hosts.iter().map(|s| normalize_pattern(s.as_ref())).filter(|s| !s.is_empty()).collect();
        let search: Vec<String> = search_hosts.iter().map(|s| normalize_pattern(s.as_ref())).filter(|s| !s.is_empty()).collect();
        if let Some(dup) = site.iter().find(|s| search.contains(s)) {
            return Err(Error::Config(format!("host pattern {dup} is both a site and a search host")));
        }
        Ok(ReferralClassifier { site, search })
    }

    pub fn classify(&self, referral_url: &str) -> Classified {
        let raw = referral_url.trim();
        if raw.is_empty() {
            return Classified {
                class: ReferralClass::Direct,
                unparseable: false,
            };
        }
        let parsed = Url::parse(raw).or_else(|_| {
            if raw.contains("://") {
                Err(())
            } else {
                Url::parse(&format!("http://{raw}")).map_err(|_| ())
            }
        });
        let host = parsed.ok().and_then(|u| u.host_str().map(|h| h.trim_end_matches('.').to_ascii_lowercase()));
        let Some(host) = host.filter(|h| !h.is_empty()) else {
            return Classified {
                class: ReferralClass::External,
                unparseable: true,
            };
        };
        let class = if self.site.iter().any(|p| host_matches(&host, p)) {
            ReferralClass::Internal
        } else if self.search.iter().any(|p| host_matches(&host, p)) {
            ReferralClass::Search
        } else {
            ReferralClass::External
        };
        Classified { class, unparseable: false }
    }
}

/// Classifies a single referral against ad-hoc host sets.
pub fn classify_referral<S: AsRef<str>>(referral_url: &str, site_hosts: &[S], search_hosts: &[S]) -> Result<ReferralClass> {
    Ok(ReferralClassifier::new(site_hosts, search_hosts)?.classify(referral_url).class)
}
