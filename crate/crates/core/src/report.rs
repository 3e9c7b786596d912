//! Plot-ready CSV reports over a corpus of completed article series.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::TokenizerConfig;
use crate::error::{Error, Result};
use crate::event::Section;
use crate::ingest::ArticleSeries;
use crate::lifecycle::shelf_life;
use crate::regress::{r_squared_curve, CurveOptions, ModelSpec};
use crate::simgen::{corpus_stats, CorpusStats};

/// Article subset a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportGroup {
    News,
    InDepth,
    All,
}

impl ReportGroup {
    pub fn contains(self, section: Section) -> bool {
        match self {
            ReportGroup::News => section == Section::News,
            ReportGroup::InDepth => section == Section::InDepth,
            ReportGroup::All => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReportGroup::News => "news",
            ReportGroup::InDepth => "indepth",
            ReportGroup::All => "all",
        }
    }

    pub fn select(self, corpus: &[ArticleSeries]) -> Vec<ArticleSeries> {
        corpus.iter().filter(|s| self.contains(s.section_label())).cloned().collect()
    }
}

impl fmt::Display for ReportGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "news" => Ok(ReportGroup::News),
            "indepth" | "in-depth" => Ok(ReportGroup::InDepth),
            "all" => Ok(ReportGroup::All),
            other => Err(Error::Config(format!("unknown group {other:?}; use news, indepth or all"))),
        }
    }
}

fn nonempty(corpus: &[ArticleSeries], group: ReportGroup) -> Result<Vec<ArticleSeries>> {
    let sel = group.select(corpus);
    if sel.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no articles in group {group}; ingest or simulate events first (e.g. `newslife simulate --out events.jsonl`)"
        )));
    }
    Ok(sel)
}

/// Cutoffs (minutes) used for r² curves unless others are given.
pub const DEFAULT_CUTOFFS: [u32; 18] = [10, 20, 30, 40, 50, 60, 90, 120, 180, 240, 360, 480, 720, 1080, 1440, 2880, 4320, 10080];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub cutoff_minutes: u32,
    pub r2_visits_only: f64,
    pub r2_full: f64,
}

/// In-sample r² of visits-only and full models as a function of cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig6Report {
    pub group: ReportGroup,
    pub articles: usize,
    pub points: Vec<CurvePoint>,
}

impl Fig6Report {
    pub fn build(corpus: &[ArticleSeries], group: ReportGroup, cutoffs: &[u32], opts: &CurveOptions) -> Result<Self> {
        let sel = nonempty(corpus, group)?;
        let vo = r_squared_curve(&sel, cutoffs, ModelSpec::VisitsOnly, opts)?;
        let full = r_squared_curve(&sel, cutoffs, ModelSpec::Full, opts)?;
        let points = vo
            .into_iter()
            .zip(full)
            .map(|((c, a), (_, b))| CurvePoint {
                cutoff_minutes: c,
                r2_visits_only: a,
                r2_full: b,
            })
            .collect();
        Ok(Fig6Report {
            group,
            articles: sel.len(),
            points,
        })
    }

    pub fn point(&self, cutoff: u32) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.cutoff_minutes == cutoff)
    }

    /// Full minus visits-only r² at `cutoff`.
    pub fn gap_at(&self, cutoff: u32) -> Option<f64> {
        self.point(cutoff).map(|p| p.r2_full - p.r2_visits_only)
    }

    /// Smallest cutoff at which the visits-only model reaches the full
    /// model's r² at `reference`.
    pub fn crossover(&self, reference: u32) -> Option<u32> {
        let goal = self.point(reference)?.r2_full;
        self.points.iter().find(|p| p.r2_visits_only >= goal).map(|p| p.cutoff_minutes)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["group", "cutoff_minutes", "r2_visits_only", "r2_full", "gap"])?;
        for p in &self.points {
            out.write_record([
                self.group.as_str().to_string(),
                p.cutoff_minutes.to_string(),
                p.r2_visits_only.to_string(),
                p.r2_full.to_string(),
                (p.r2_full - p.r2_visits_only).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Pearson correlation; NaN when either side has no variance or fewer than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}

/// Distribution of effective shelf-life and its correlation with traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShelfLifeReport {
    pub group: ReportGroup,
    pub ell: f64,
    pub horizon_minutes: u32,
    pub bin_hours: f64,
    /// Articles per bin; bin `i` covers `[i, i + 1) * bin_hours`.
    pub bins: Vec<usize>,
    pub articles: usize,
    /// Articles without any visit inside the horizon.
    pub undefined: usize,
    pub mean_tau_hours: f64,
    /// Pearson correlation between τ and visits at the horizon (NaN if undefined).
    pub pearson_r: f64,
}

impl ShelfLifeReport {
    pub fn build(corpus: &[ArticleSeries], group: ReportGroup, ell: f64, horizon_minutes: u32, bin_hours: f64) -> Result<Self> {
        let sel = nonempty(corpus, group)?;
        let (mut taus, mut totals, mut undefined) = (Vec::new(), Vec::new(), 0);
        for s in &sel {
            match shelf_life(s, ell, horizon_minutes) {
                Ok(sl) => {
                    taus.push(sl.tau_hours());
                    totals.push(sl.total_visits_at_horizon as f64);
                }
                Err(Error::ShelfLifeUndefined(_)) => undefined += 1,
                Err(e) => return Err(e),
            }
        }
        let nbins = (horizon_minutes as f64 / 60.0 / bin_hours).ceil().max(1.0) as usize;
        let mut bins = vec![0; nbins];
        for t in &taus {
            bins[((t / bin_hours).floor() as usize).min(nbins - 1)] += 1;
        }
        let mean_tau_hours = if taus.is_empty() { f64::NAN } else { taus.iter().sum::<f64>() / taus.len() as f64 };
        Ok(ShelfLifeReport {
            group,
            ell,
            horizon_minutes,
            bin_hours,
            bins,
            articles: taus.len(),
            undefined,
            mean_tau_hours,
            pearson_r: pearson(&taus, &totals),
        })
    }

    /// Long format: one `bin` row per histogram bin, then summary rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["group", "kind", "bin_start_hours", "bin_end_hours", "value"])?;
        let g = self.group.as_str();
        for (i, c) in self.bins.iter().enumerate() {
            let lo = i as f64 * self.bin_hours;
            out.write_record([g, "bin", &lo.to_string(), &(lo + self.bin_hours).to_string(), &c.to_string()])?;
        }
        for (kind, v) in [
            ("articles", self.articles as f64),
            ("undefined", self.undefined as f64),
            ("mean_tau_hours", self.mean_tau_hours),
            ("pearson_r", self.pearson_r),
        ] {
            out.write_record([g, kind, "", "", &v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Dataset summary for one or more groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Report {
    pub columns: Vec<(ReportGroup, CorpusStats)>,
}

impl Table2Report {
    pub fn build(corpus: &[ArticleSeries], groups: &[ReportGroup], tokenizer: TokenizerConfig) -> Result<Self> {
        let columns = groups
            .iter()
            .map(|&g| Ok((g, corpus_stats(nonempty(corpus, g)?.iter(), tokenizer))))
            .collect::<Result<_>>()?;
        Ok(Table2Report { columns })
    }

    pub fn stats(&self, group: ReportGroup) -> Option<&CorpusStats> {
        self.columns.iter().find(|(g, _)| *g == group).map(|(_, s)| s)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["statistic".to_string()];
        header.extend(self.columns.iter().map(|(g, _)| g.to_string()));
        out.write_record(&header)?;
        let rows: Vec<Vec<(&str, f64)>> = self.columns.iter().map(|(_, s)| s.rows()).collect();
        for (i, (label, _)) in rows.first().map(|r| r.as_slice()).unwrap_or(&[]).iter().enumerate() {
            let mut rec = vec![label.to_string()];
            rec.extend(rows.iter().map(|r| r[i].1.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EngineConfig;
    use crate::event::{Event, VisitEvent};
    use crate::ingest::SeriesStore;
    use crate::simgen::{generate_corpus, CorpusSpec};
    use chrono::{DateTime, TimeDelta, Utc};
    use proptest::prelude::*;

    fn t0() -> DateTime<Utc> {
        "2012-10-01T00:00:00Z".parse().unwrap()
    }

    fn corpus_from(events: impl IntoIterator<Item = Event>) -> Vec<ArticleSeries> {
        let store = SeriesStore::new(&EngineConfig::default()).unwrap();
        for e in events {
            store.ingest(&e).unwrap();
        }
        store.into_series()
    }

    fn visit(id: &str, at: DateTime<Utc>, section: Option<Section>) -> Event {
        Event::Visit(VisitEvent {
            article_id: id.into(),
            timestamp: at,
            referral_url: String::new(),
            section,
        })
    }

    #[test]
    fn all_traffic_in_first_minute_gives_perfect_visits_only_fit() {
        let mut events = Vec::new();
        for i in 0..40u64 {
            let id = format!("a{i}");
            for j in 0..(5 + i * i) {
                events.push(visit(&id, t0() + TimeDelta::seconds((j % 50) as i64), Some(Section::News).filter(|_| j == 0)));
            }
        }
        let corpus = corpus_from(events);
        let r = Fig6Report::build(&corpus, ReportGroup::News, &[10, 20, 60], &CurveOptions::default()).unwrap();
        for p in &r.points {
            assert!((p.r2_visits_only - 1.0).abs() < 1e-9, "{p:?}");
        }
    }

    #[test]
    fn full_model_never_explains_less_in_sample() {
        let mut spec = CorpusSpec::default();
        for s in &mut spec.sections {
            s.count /= 5;
        }
        let events: Vec<Event> = generate_corpus(&spec).events().collect();
        let corpus = corpus_from(events);
        let r = Fig6Report::build(&corpus, ReportGroup::All, &[10, 20, 60, 240, 1440], &CurveOptions::default()).unwrap();
        for p in &r.points {
            assert!(p.r2_full >= p.r2_visits_only - 1e-12, "{p:?}");
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        r.write_csv(&mut a).unwrap();
        Fig6Report::build(&corpus, ReportGroup::All, &[10, 20, 60, 240, 1440], &CurveOptions::default())
            .unwrap()
            .write_csv(&mut b)
            .unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a).unwrap().starts_with("group,cutoff_minutes,r2_visits_only,r2_full,gap\nall,10,"));
    }

    #[test]
    fn empty_group_is_an_error_with_hint() {
        let corpus = corpus_from([visit("x", t0(), Some(Section::News))]);
        let err = Fig6Report::build(&corpus, ReportGroup::InDepth, &[10], &CurveOptions::default()).unwrap_err();
        assert!(err.to_string().contains("simulate"));
        assert!(Fig6Report::build(&[], ReportGroup::All, &[10], &CurveOptions::default()).is_err());
    }

    #[test]
    fn identical_articles_share_one_bin_and_no_correlation() {
        let mut events = Vec::new();
        for i in 0..5 {
            for m in [0, 30, 400] {
                events.push(visit(&format!("a{i}"), t0() + TimeDelta::minutes(m), None));
            }
        }
        let r = ShelfLifeReport::build(&corpus_from(events), ReportGroup::All, 0.9, 7 * 1440, 6.0).unwrap();
        assert_eq!(r.bins.iter().filter(|&&c| c > 0).count(), 1);
        assert_eq!(r.bins[1], 5);
        assert_eq!(r.bins.len(), 28);
        assert!(r.pearson_r.is_nan());
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("all,pearson_r,,,NaN"));
    }

    #[test]
    fn table2_columns_follow_groups() {
        let events = vec![
            visit("n", t0(), Some(Section::News)),
            visit("d", t0(), Some(Section::InDepth)),
            visit("d", t0() + TimeDelta::minutes(5), None),
        ];
        let r = Table2Report::build(&corpus_from(events), &[ReportGroup::News, ReportGroup::InDepth, ReportGroup::All], TokenizerConfig::default()).unwrap();
        assert_eq!(r.stats(ReportGroup::All).unwrap().visits_7d, 3);
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("statistic,news,indepth,all\narticles,1,1,2\n"), "{text}");
    }

    proptest! {
        #[test]
        fn pearson_matches_textbook_formula(pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..60)) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let n = x.len() as f64;
            let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let sxx: f64 = x.iter().map(|a| a * a).sum();
            let syy: f64 = y.iter().map(|b| b * b).sum();
            let den = ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
            prop_assume!(den > 1e-3);
            let expect = (n * sxy - sx * sy) / den;
            prop_assert!((pearson(&x, &y) - expect).abs() < 1e-8);
        }
    }
}
