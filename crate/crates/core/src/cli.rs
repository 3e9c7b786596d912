//! Command-line front end. The binary only parses arguments and calls [`run`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::{DateTime, TimeDelta, Utc};
use clap::{Parser, Subcommand, ValueEnum};

use crate::event::{read_events, write_events, Event};
use crate::ingest::{ArticleSeries, ReferralClass, SeriesStore};
use crate::lifecycle::{classify_profile, write_diagnostics_csv, SeasonalityProfile};
use crate::predict::{evaluate_held_out, predict_article, replay, train_horizon_models, Engine, ModelRegistry, RunPlan};
use crate::regress::CurveOptions;
use crate::report::{Fig6Report, ReportGroup, ShelfLifeReport, Table2Report, DEFAULT_CUTOFFS};
use crate::simgen::{generate_corpus, CorpusSpec};
use crate::EngineConfig;

#[derive(Debug, Parser)]
#[command(name = "newslife", version, about = "News article traffic life-cycle analytics")]
pub struct Cli {
    /// Engine configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Fig6,
    Shelflife,
    Table2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    News,
    Indepth,
    All,
}

impl From<GroupArg> for ReportGroup {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::News => ReportGroup::News,
            GroupArg::Indepth => ReportGroup::InDepth,
            GroupArg::All => ReportGroup::All,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate an event file and write the per-article series.
    Ingest {
        #[arg(long)]
        events: PathBuf,
        /// Store snapshot (JSON).
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Per-minute series export (CSV).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Visit-profile classification export (CSV).
        #[arg(long)]
        profiles: Option<PathBuf>,
    },
    /// Train horizon models on articles that reached the target age.
    Train {
        #[arg(long)]
        events: PathBuf,
        /// Output model directory.
        #[arg(long)]
        out: PathBuf,
        /// Training time; events at or after it are ignored. Defaults to just after the last event.
        #[arg(long)]
        at: Option<DateTime<Utc>>,
    },
    /// Predict target-age visits for articles as of a point in time.
    Predict {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        at: DateTime<Utc>,
        #[arg(long)]
        article: Option<String>,
        /// JSON-lines output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Held-out r² per horizon.
    Evaluate {
        #[arg(long)]
        events: PathBuf,
        /// Evaluate these models on every matured article. Without it, the
        /// earliest articles train and the rest are held out.
        #[arg(long)]
        models: Option<PathBuf>,
        /// Share of articles (by first visit) used for training when no models are given.
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic event corpus.
    Simulate {
        /// Corpus specification (TOML); the default corpus when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the drawn per-article parameters (CSV).
        #[arg(long)]
        blueprints: Option<PathBuf>,
    },
    /// Emit a plot-ready CSV report.
    Report {
        #[arg(long, value_enum)]
        kind: ReportKind,
        #[arg(long, value_enum, default_value = "all")]
        group: GroupArg,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cutoffs in minutes for fig6.
        #[arg(long, value_delimiter = ',')]
        cutoffs: Option<Vec<u32>>,
        /// Target age in days for fig6.
        #[arg(long, default_value_t = 7)]
        target_days: u32,
    },
    /// Run the prediction service with its HTTP API, optionally replaying an event file.
    Serve {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
        /// Start of the tick clock; required for a new data directory.
        #[arg(long)]
        clock_start: Option<DateTime<Utc>>,
        /// Event file to replay into the service.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Replay end; ticks stop before it.
        #[arg(long)]
        end: Option<DateTime<Utc>>,
        /// Event-time seconds per wall-clock second during replay (unpaced when omitted).
        #[arg(long)]
        speed: Option<f64>,
        /// Exit after the replay instead of continuing to serve.
        #[arg(long)]
        exit_after_replay: bool,
    },
}

fn load_config(path: Option<&Path>) -> anyhow::Result<EngineConfig> {
    Ok(match path {
        Some(p) => EngineConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => EngineConfig::default(),
    })
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn read_all(path: &Path) -> anyhow::Result<Vec<Event>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_events(std::io::BufReader::new(file)).collect::<crate::Result<_>>()?)
}

/// Builds series from the events of `path` strictly before `until`.
fn load_corpus(config: &EngineConfig, path: &Path, until: Option<DateTime<Utc>>) -> anyhow::Result<Vec<ArticleSeries>> {
    let store = SeriesStore::new(config)?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    for event in read_events(std::io::BufReader::new(file)) {
        let event = event?;
        if until.is_none_or(|u| event.timestamp() < u) {
            let _ = store.ingest(&event);
        }
    }
    let d = store.diagnostics();
    if d.events_rejected > 0 {
        tracing::warn!(rejected = d.events_rejected, "some events were rejected");
    }
    Ok(store.into_series())
}

fn last_event_time(path: &Path) -> anyhow::Result<DateTime<Utc>> {
    let file = File::open(path)?;
    let mut last = None;
    for e in read_events(std::io::BufReader::new(file)) {
        last = last.max(Some(e?.timestamp()));
    }
    last.context("event file is empty")
}

fn matured(corpus: Vec<ArticleSeries>, at: DateTime<Utc>, target_minutes: u32) -> Vec<ArticleSeries> {
    let target = TimeDelta::minutes(target_minutes as i64);
    corpus.into_iter().filter(|s| s.first_visit().is_some_and(|fv| fv + target <= at)).collect()
}

fn write_series_csv<W: Write>(w: W, corpus: &[ArticleSeries]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["article_id", "section", "minute", "internal", "external", "direct", "search", "tweets", "unique_tweets", "corporate_retweets", "facebook_shares"])?;
    for s in corpus {
        let len = s.len_minutes();
        let tweets = s.tweets_per_minute(len);
        let uni = s.unique_tweets_per_minute(len);
        let corp = s.corporate_retweets_per_minute(len);
        let shares = s.facebook_shares_per_minute(len);
        let classes: Vec<Vec<u64>> = ReferralClass::ALL.iter().map(|&c| s.visits_by_class(c)).collect();
        for m in 0..len {
            let row = [classes[0][m], classes[1][m], classes[2][m], classes[3][m]];
            if row.iter().sum::<u64>() == 0 && tweets[m] == 0 && shares[m] == 0.0 {
                continue;
            }
            out.write_record([
                s.article_id.clone(),
                s.section_label().to_string(),
                m.to_string(),
                row[0].to_string(),
                row[1].to_string(),
                row[2].to_string(),
                row[3].to_string(),
                tweets[m].to_string(),
                uni[m].to_string(),
                corp[m].to_string(),
                shares[m].to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run(Cli::try_parse_from(args)?)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { events, snapshot, csv, profiles } => {
            let store = SeriesStore::new(&config)?;
            let n = store.ingest_file(&events)?;
            let diagnostics = store.diagnostics();
            let corpus = store.into_series();
            if let Some(p) = snapshot {
                serde_json::to_writer(BufWriter::new(File::create(p)?), &corpus)?;
            }
            if let Some(p) = csv {
                write_series_csv(BufWriter::new(File::create(p)?), &corpus)?;
            }
            if let Some(p) = profiles {
                let profile = SeasonalityProfile::from_series(&corpus).unwrap_or_else(|e| {
                    tracing::warn!("seasonality unavailable ({e}); using a flat profile");
                    SeasonalityProfile::flat()
                });
                let rows: Vec<_> = corpus
                    .iter()
                    .filter_map(|s| classify_profile(s, &profile, &config.lifecycle.classifier).ok())
                    .collect();
                write_diagnostics_csv(BufWriter::new(File::create(p)?), &rows)?;
            }
            println!(
                "{}",
                serde_json::json!({ "lines": n, "articles": corpus.len(), "diagnostics": diagnostics })
            );
        }
        Command::Train { events, out, at } => {
            let at = match at {
                Some(t) => t,
                None => last_event_time(&events)? + TimeDelta::seconds(1),
            };
            let corpus = matured(load_corpus(&config, &events, Some(at))?, at, config.predict.target_minutes);
            let (registry, report) = train_horizon_models(&corpus, &ModelRegistry::empty(config.predict.target_minutes), &config, at);
            if registry.is_empty() {
                bail!("no group had enough matured articles: {:?}", report.skipped);
            }
            registry.save_dir(&out)?;
            println!("{}", serde_json::json!({ "matured_articles": corpus.len(), "report": report }));
        }
        Command::Predict { events, models, at, article, out } => {
            let registry = ModelRegistry::load_dir(&models)?;
            let corpus = load_corpus(&config, &events, Some(at))?;
            let mut w = output(out.as_deref())?;
            for s in corpus.iter().filter(|s| article.as_ref().is_none_or(|a| *a == s.article_id)) {
                match predict_article(&registry, s, at, &config) {
                    Ok(p) => writeln!(w, "{}", serde_json::to_string(&p)?)?,
                    Err(e) if article.is_some() => return Err(e.into()),
                    Err(e) => tracing::debug!(article = %s.article_id, "skipped: {e}"),
                }
            }
            w.flush()?;
        }
        Command::Evaluate { events, models, train_fraction, out } => {
            let at = last_event_time(&events)? + TimeDelta::seconds(1);
            let mut corpus = matured(load_corpus(&config, &events, None)?, at, config.predict.target_minutes);
            let (registry, held_out) = match models {
                Some(dir) => (ModelRegistry::load_dir(dir)?, corpus),
                None => {
                    corpus.sort_by_key(|s| (s.first_visit(), s.article_id.clone()));
                    let split = ((corpus.len() as f64 * train_fraction).round() as usize).min(corpus.len());
                    let test = corpus.split_off(split);
                    let (reg, _) = train_horizon_models(&corpus, &ModelRegistry::empty(config.predict.target_minutes), &config, at);
                    (reg, test)
                }
            };
            let scores = evaluate_held_out(&registry, &held_out, &config)?;
            let mut w = csv::Writer::from_writer(output(out.as_deref())?);
            w.write_record(["horizon_minutes", "articles", "r_squared"])?;
            for s in scores {
                w.write_record([s.horizon_minutes.to_string(), s.articles.to_string(), s.r_squared.to_string()])?;
            }
            w.flush()?;
        }
        Command::Simulate { spec, seed, out, blueprints } => {
            let mut spec = match spec {
                Some(p) => CorpusSpec::load(&p).with_context(|| format!("reading {}", p.display()))?,
                None => CorpusSpec::default(),
            };
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            spec.validate()?;
            let corpus = generate_corpus(&spec);
            let file = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            let events: Vec<Event> = corpus.events().collect();
            let n = write_events(file, &events)?;
            if let Some(p) = blueprints {
                let mut w = csv::Writer::from_writer(BufWriter::new(File::create(p)?));
                w.write_record(["article_id", "section", "class", "published", "total_visits", "total_tweets", "onset_minutes", "facebook_ratio", "follower_median", "vocabulary_size"])?;
                for b in &corpus.blueprints {
                    w.write_record([
                        b.article_id.clone(),
                        b.section.to_string(),
                        b.class.to_string(),
                        b.published.to_rfc3339(),
                        b.total_visits.to_string(),
                        b.total_tweets.to_string(),
                        b.onset_minutes.to_string(),
                        b.facebook_ratio.to_string(),
                        b.follower_median.to_string(),
                        b.vocabulary_size.to_string(),
                    ])?;
                }
                w.flush()?;
            }
            println!("{}", serde_json::json!({ "articles": corpus.blueprints.len(), "events": n }));
        }
        Command::Report { kind, group, events, out, cutoffs, target_days } => {
            let corpus = load_corpus(&config, &events, None)?;
            let group = ReportGroup::from(group);
            let w = output(out.as_deref())?;
            match kind {
                ReportKind::Fig6 => {
                    let opts = CurveOptions {
                        target_minutes: target_days * 1440,
                        tokenizer: config.social.tokenizer,
                        ..CurveOptions::default()
                    };
                    let cutoffs = cutoffs.unwrap_or_else(|| DEFAULT_CUTOFFS.to_vec());
                    Fig6Report::build(&corpus, group, &cutoffs, &opts)?.write_csv(w)?;
                }
                ReportKind::Shelflife => {
                    let l = &config.lifecycle;
                    ShelfLifeReport::build(&corpus, group, l.ell, l.horizon_days * 1440, 6.0)?.write_csv(w)?;
                }
                ReportKind::Table2 => {
                    Table2Report::build(&corpus, &[group], config.social.tokenizer)?.write_csv(w)?;
                }
            }
        }
        Command::Serve { data_dir, addr, clock_start, replay: replay_file, end, speed, exit_after_replay } => {
            let engine = if data_dir.join("meta.json").exists() {
                Engine::open_existing(config, &data_dir)?
            } else {
                let Some(clock_start) = clock_start else {
                    bail!("--clock-start is required for a new data directory");
                };
                Engine::open(config, RunPlan { clock_start }, &data_dir)?
            };
            let engine = std::sync::Arc::new(engine);
            let feeder = replay_file.map(|path| {
                let engine = engine.clone();
                std::thread::spawn(move || -> anyhow::Result<()> {
                    let events = read_all(&path)?;
                    let end = match end {
                        Some(e) => e,
                        None => events.last().map(|e| e.timestamp() + TimeDelta::seconds(1)).context("empty replay file")?,
                    };
                    let stats = replay(&engine, events, end, speed)?;
                    println!("{}", serde_json::to_string(&stats)?);
                    Ok(())
                })
            });
            if exit_after_replay {
                if let Some(f) = feeder {
                    f.join().map_err(|_| anyhow::anyhow!("replay thread panicked"))??;
                }
                engine.flush()?;
                return Ok(());
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::server::serve(engine, addr))?;
        }
    }
    Ok(())
}
