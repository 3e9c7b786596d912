//! Acceptance suite. Runs every criterion in order and prints one PASS/FAIL
//! line per criterion; exits non-zero if any fails.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, TimeDelta, Utc};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use newslife::event::Event;
use newslife::ingest::{monitoring_filter, polling_schedule, ArticleSeries, SeriesStore};
use newslife::lifecycle::{classify_curve, classify_profile, shelf_life_minutes, ProfileClass, ProfileGroup, SeasonalityProfile};
use newslife::predict::{replay, Engine, RunPlan};
use newslife::regress::{fit_ols, stepwise_select, CurveOptions, DesignMatrix, TargetKind, Term};
use newslife::report::{Fig6Report, ReportGroup, ShelfLifeReport, DEFAULT_CUTOFFS};
use newslife::simgen::{generate_corpus, CorpusSpec, Kernel};
use newslife::social::{levenshtein, TermHistogram};
use newslife::{EngineConfig, Section};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("oracle suites", oracle_suites),
        ("ingestion invariants", ingestion_invariants),
        ("table 2 reproduction", table2_reproduction),
        ("fig 6 shape", fig6_shape),
        ("shelf-life direction", shelf_life_direction),
        ("classifier accuracy and news mix", classifier),
        ("service end-to-end", service_end_to_end),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name} ({secs:.1} s): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {d}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- oracles

fn oracle_suites() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut notes = Vec::new();

    // Shelf-life: integer prefix-sum scan with ell = k/100.
    for i in 0..1000 {
        let len = rng.random_range(1..2000);
        let sparse = rng.random_bool(0.5);
        let counts: Vec<u64> = (0..len)
            .map(|_| if sparse && rng.random_bool(0.8) { 0 } else { rng.random_range(0..50) })
            .collect();
        let k: u64 = rng.random_range(1..=100);
        let horizon = rng.random_range(1..=len + 100);
        let mut prefix = vec![0u64];
        for &c in counts.iter().take(horizon) {
            prefix.push(prefix.last().unwrap() + c);
        }
        let total = *prefix.last().unwrap();
        let expected = (total > 0).then(|| (1..prefix.len()).find(|&m| prefix[m] * 100 >= k * total).unwrap() - 1);
        let got = shelf_life_minutes(&counts, k as f64 / 100.0, horizon);
        if got != expected {
            return Err(format!("shelf-life series {i}: got {got:?}, expected {expected:?}"));
        }
    }
    notes.push("shelf-life 1000/1000".to_string());

    // OLS against normal equations.
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(30..300);
        let p = rng.random_range(2..9);
        let mut columns = vec![vec![1.0; n]];
        for _ in 1..p {
            columns.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        }
        let y: Vec<f64> = (0..n).map(|i| columns.iter().map(|c| c[i] * 0.7).sum::<f64>() + rng.random_range(-0.5..0.5)).collect();
        let terms: Vec<Term> = std::iter::once(Term::Intercept).chain((0..p - 1).map(Term::Main)).collect();
        let design = DesignMatrix { terms, columns: columns.clone(), rows: n };
        let model = fit_ols(&design, &y, TargetKind::Raw);
        let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
        let yv = DVector::from_vec(y);
        let beta = (x.transpose() * &x).cholesky().ok_or("singular oracle system")?.solve(&(x.transpose() * yv));
        let diff = (DVector::from_vec(model.coefficients.clone()) - &beta).norm() / beta.norm();
        worst = worst.max(diff);
    }
    if worst > 1e-8 {
        return Err(format!("OLS relative error {worst:e}"));
    }
    notes.push(format!("OLS max rel err {worst:.1e}"));

    // Stepwise on orthonormal designs against exhaustive best subset.
    for case in 0..200 {
        let n = rng.random_range(20..120);
        let p = rng.random_range(2..=5);
        let raw = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.0..1.0) });
        let q = raw.qr().q();
        let columns: Vec<Vec<f64>> = (0..p).map(|j| q.column(j).iter().copied().collect()).collect();
        let strength: Vec<f64> = (0..p).map(|_| if rng.random_bool(0.5) { rng.random_range(0.0..0.3) } else { rng.random_range(1.0..4.0) }).collect();
        let y: Vec<f64> = (0..n).map(|i| (0..p).map(|j| columns[j][i] * strength[j]).sum::<f64>() + rng.random_range(-0.4..0.4)).collect();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let proj: Vec<f64> = columns.iter().map(|c| c.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>().powi(2)).collect();
        let mut best = (f64::INFINITY, 0u32);
        for mask in 0..(1u32 << (p - 1)) {
            let chosen = (0..p - 1).filter(|j| mask & (1 << j) != 0);
            let rss = yy - proj[0] - chosen.clone().map(|j| proj[j + 1]).sum::<f64>();
            let aic = n as f64 * (rss / n as f64).ln() + 2.0 * (mask.count_ones() + 1) as f64;
            if aic < best.0 {
                best = (aic, mask);
            }
        }
        let terms: Vec<Term> = std::iter::once(Term::Intercept).chain((0..p - 1).map(Term::Main)).collect();
        let model = stepwise_select(&DesignMatrix { terms, columns, rows: n }, &y, TargetKind::Raw);
        let mask = (1..p).filter(|&j| model.retained[j]).fold(0u32, |m, j| m | 1 << (j - 1));
        if mask != best.1 {
            return Err(format!("stepwise case {case}: selected {mask:b}, best subset {:b}", best.1));
        }
    }
    notes.push("stepwise 200/200".to_string());

    // Levenshtein against the full-matrix recurrence.
    let alphabet: Vec<char> = "abcde fgé√😀".chars().collect();
    for i in 0..10_000 {
        let word = |rng: &mut ChaCha8Rng| -> String {
            let len = rng.random_range(0..25);
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
        };
        let (a, b) = (word(&mut rng), word(&mut rng));
        let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let mut d = vec![vec![0usize; bc.len() + 1]; ac.len() + 1];
        for (r, row) in d.iter_mut().enumerate() {
            row[0] = r;
        }
        for c in 0..=bc.len() {
            d[0][c] = c;
        }
        for r in 1..=ac.len() {
            for c in 1..=bc.len() {
                let sub = d[r - 1][c - 1] + usize::from(ac[r - 1] != bc[c - 1]);
                d[r][c] = sub.min(d[r - 1][c] + 1).min(d[r][c - 1] + 1);
            }
        }
        if levenshtein(&a, &b) != d[ac.len()][bc.len()] {
            return Err(format!("levenshtein pair {i}: {a:?} / {b:?}"));
        }
    }
    notes.push("levenshtein 10000/10000".to_string());

    // Entropy against the direct formula.
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(1..200);
        let counts: Vec<u64> = (0..k).map(|_| rng.random_range(1..1000)).collect();
        let mut h = TermHistogram::new();
        for (i, &c) in counts.iter().enumerate() {
            h.add_count(format!("t{i}"), c);
        }
        let total: u64 = counts.iter().sum();
        let direct: f64 = -counts.iter().map(|&c| c as f64 / total as f64).map(|p| p * p.log2()).sum::<f64>();
        worst = worst.max((h.entropy_bits() - direct).abs());
    }
    if worst > 1e-12 {
        return Err(format!("entropy error {worst:e}"));
    }
    notes.push(format!("entropy max err {worst:.1e}"));

    let elapsed = t0.elapsed();
    check(elapsed < Duration::from_secs(60), format!("{} in {elapsed:.1?} (< 60 s)", notes.join(", ")))
}

// ---------------------------------------------------------------- ingestion

fn ingest(config: &EngineConfig, events: &[Event]) -> Vec<ArticleSeries> {
    let store = SeriesStore::new(config).unwrap();
    for e in events {
        store.ingest(e).unwrap();
    }
    store.into_series()
}

fn ingestion_invariants() -> Outcome {
    let config = EngineConfig::default();
    let mut spec = CorpusSpec::default();
    spec.publication_days = 2.0;
    spec.mean_visits = 300.0;
    spec.min_visits = 20;
    for s in &mut spec.sections {
        s.count = if s.section == Section::News { 12 } else { 4 };
    }
    let events: Vec<Event> = generate_corpus(&spec).events().collect();
    let reference = ingest(&config, &events);

    let visit_events = events.iter().filter(|e| matches!(e, Event::Visit(_))).count() as u64;
    let stored: u64 = reference.iter().map(|s| s.total_visits()).sum();
    if stored != visit_events {
        return Err(format!("conservation: {stored} stored vs {visit_events} visit events"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut shuffled = events.clone();
    for round in 0..100 {
        shuffled.shuffle(&mut rng);
        if ingest(&config, &shuffled) != reference {
            return Err(format!("shuffled replay {round} produced different series"));
        }
    }

    // Random stores on a whole-minute grid, checked against raw event counts.
    let origin: DateTime<Utc> = "2013-03-04T00:00:00Z".parse().unwrap();
    let mut filter_checks = 0;
    for store_no in 0..50 {
        let store = SeriesStore::new(&config).unwrap();
        let mut raw: BTreeMap<String, Vec<DateTime<Utc>>> = BTreeMap::new();
        let articles = rng.random_range(20..60);
        for a in 0..articles {
            let id = format!("a{a:02}");
            let start = rng.random_range(0..600);
            let burst = rng.random_range(1..40);
            let n = rng.random_range(0..150);
            for _ in 0..n {
                let offset = if rng.random_bool(0.6) { rng.random_range(0..burst) } else { rng.random_range(0..900) };
                let t = origin + TimeDelta::minutes(start + offset);
                store.ingest(&Event::visit(&id, t, "https://www.google.com/search?q=x")).unwrap();
                raw.entry(id.clone()).or_default().push(t);
            }
        }
        for _ in 0..20 {
            let now = origin + TimeDelta::minutes(rng.random_range(0..1600));
            let min_visits = rng.random_range(0..60);
            let window = rng.random_range(1..240usize);
            for (id, times) in &raw {
                let seen: Vec<_> = times.iter().filter(|&&t| t < now).collect();
                let expected = min_visits == 0
                    || seen.iter().any(|&&end| {
                        let lo = end - TimeDelta::minutes(window as i64);
                        seen.iter().filter(|&&&t| t > lo && t <= end).count() as u64 >= min_visits
                    });
                let got = store.with_series(id, |s| monitoring_filter(s, now, min_visits, window)).unwrap();
                if got != expected {
                    return Err(format!("monitoring filter store {store_no} {id} now {now} min {min_visits} window {window}: {got}"));
                }
                filter_checks += 1;
            }

            let window_minutes = rng.random_range(1..180u32);
            let lo = now - TimeDelta::minutes(window_minutes as i64);
            let mut ranked: Vec<(usize, DateTime<Utc>, &String)> = raw
                .iter()
                .map(|(id, times)| (times.iter().filter(|&&t| t >= lo && t < now).count(), *times.iter().min().unwrap(), id))
                .filter(|r| r.0 > 0)
                .collect();
            ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2)));
            let expected: Vec<String> = ranked.into_iter().take(30).map(|r| r.2.clone()).collect();
            let got = polling_schedule(&store, now, window_minutes, 30);
            if got != expected {
                return Err(format!("top-30 store {store_no} at {now}: {got:?} vs {expected:?}"));
            }
        }
    }
    Ok(format!(
        "{} series identical over 100 shuffles, {stored} visits conserved, {filter_checks} filter and 1000 schedule checks",
        reference.len()
    ))
}

// ---------------------------------------------------------------- default corpus

struct Default606 {
    series: Vec<ArticleSeries>,
}

fn default_corpus() -> &'static Default606 {
    static CELL: std::sync::OnceLock<Default606> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let corpus = generate_corpus(&CorpusSpec::default());
        let store = SeriesStore::new(&EngineConfig::default()).unwrap();
        for e in corpus.events() {
            store.ingest(&e).unwrap();
        }
        Default606 { series: store.into_series() }
    })
}

fn table2_reproduction() -> Outcome {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.jsonl");
    let out = dir.path().join("table2.csv");
    let arg = |p: &std::path::Path| p.to_str().unwrap().to_string();
    newslife::cli::run_from(["newslife", "simulate", "--out", &arg(&events)]).map_err(|e| e.to_string())?;
    newslife::cli::run_from(["newslife", "report", "--kind", "table2", "--group", "all", "--events", &arg(&events), "--out", &arg(&out)])
        .map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let mut rows = HashMap::new();
    for rec in csv::Reader::from_path(&out).unwrap().records() {
        let rec = rec.unwrap();
        rows.insert(rec[0].to_string(), rec[1].parse::<f64>().unwrap());
    }
    let visits = rows["visits_7d_mean"];
    let ratio = rows["facebook_tweet_ratio"];
    let unique = rows["unique_fraction"] * 100.0;
    let corporate = rows["corporate_fraction"] * 100.0;
    let ok = (visits / 5971.0 - 1.0).abs() <= 0.15
        && (ratio / 1.9 - 1.0).abs() <= 0.10
        && (unique - 19.9).abs() <= 3.0
        && (corporate - 36.8).abs() <= 4.0
        && elapsed < Duration::from_secs(300);
    check(
        ok,
        format!(
            "7-day visits {visits:.0} (5971 ±15%), FB:tweet {ratio:.2} (1.9 ±10%), unique {unique:.1}% (19.9 ±3), corporate {corporate:.1}% (36.8 ±4), {elapsed:.1?} (< 5 min)"
        ),
    )
}

fn fig6_shape() -> Outcome {
    let d = default_corpus();
    let opts = CurveOptions::default();
    let report = Fig6Report::build(&d.series, ReportGroup::All, &DEFAULT_CUTOFFS, &opts).map_err(|e| e.to_string())?;
    let p20 = report.point(20).unwrap();
    let gap = p20.r2_full - p20.r2_visits_only;
    let crossover = report.crossover(20);
    let crossover_ok = crossover.is_none_or(|c| c >= 120);
    let shown = crossover.map_or("never within 7 days".to_string(), |c| format!("{c} min"));
    check(
        gap >= 0.2 && crossover_ok,
        format!(
            "r² at 20 min: full {:.3}, visits-only {:.3}, gap {gap:.3} (≥ 0.2); visits-only reaches {:.3} at {shown} (≥ 120 min)",
            p20.r2_full, p20.r2_visits_only, p20.r2_full
        ),
    )
}

fn shelf_life_direction() -> Outcome {
    let d = default_corpus();
    let l = EngineConfig::default().lifecycle;
    let horizon = l.horizon_days * 1440;
    let build = |g| ShelfLifeReport::build(&d.series, g, l.ell, horizon, 6.0).map_err(|e| e.to_string());
    let (news, indepth, all) = (build(ReportGroup::News)?, build(ReportGroup::InDepth)?, build(ReportGroup::All)?);
    check(
        indepth.mean_tau_hours > news.mean_tau_hours && all.pearson_r.abs() < 0.15,
        format!(
            "mean τ{:.0}: In-Depth {:.1} h > News {:.1} h; Pearson(τ, 7-day visits) = {:.3} (|r| < 0.15)",
            l.ell * 100.0,
            indepth.mean_tau_hours,
            news.mean_tau_hours,
            all.pearson_r
        ),
    )
}

fn classifier() -> Outcome {
    let cfg = EngineConfig::default().lifecycle.classifier;
    let minutes = (cfg.window_hours_equiv * 60.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut correct, mut total) = (0, 0);
    let mut misses: BTreeMap<(ProfileClass, ProfileClass), usize> = BTreeMap::new();
    for class in ProfileClass::ALL {
        for _ in 0..100 {
            let half_life = rng.random_range(2.0..12.0);
            let kernel = Kernel::sample(class, half_life, &mut rng);
            let (got, _) = classify_curve(&kernel.curve(minutes, 40.0), &cfg);
            total += 1;
            if got == class {
                correct += 1;
            } else {
                *misses.entry((class, got)).or_default() += 1;
            }
        }
    }
    let accuracy = correct as f64 / total as f64;

    let d = default_corpus();
    let profile = SeasonalityProfile::from_series(&d.series).map_err(|e| e.to_string())?;
    let mut groups: BTreeMap<ProfileGroup, usize> = BTreeMap::new();
    let mut news = 0;
    for s in d.series.iter().filter(|s| s.section_label() == Section::News) {
        news += 1;
        if let Ok(c) = classify_profile(s, &profile, &cfg) {
            *groups.entry(c.class.group()).or_default() += 1;
        }
    }
    let pct = |g| 100.0 * *groups.get(&g).unwrap_or(&0) as f64 / news as f64;
    let mix = [pct(ProfileGroup::Decreasing), pct(ProfileGroup::NonDecreasing), pct(ProfileGroup::Rebounding)];
    let mix_ok = mix.iter().zip([80.0, 10.0, 10.0]).all(|(m, t)| (m - t).abs() <= 5.0);
    check(
        accuracy >= 0.95 && mix_ok,
        format!(
            "fixtures {correct}/{total} ({:.1}% ≥ 95%){}; News mix {:.1}:{:.1}:{:.1} over {news} articles (80:10:10 ±5)",
            accuracy * 100.0,
            if misses.is_empty() { String::new() } else { format!(" misses {misses:?}") },
            mix[0],
            mix[1],
            mix[2]
        ),
    )
}

// ---------------------------------------------------------------- service

fn service_end_to_end() -> Outcome {
    let mut spec = CorpusSpec::default();
    spec.publication_days = 10.0;
    spec.mean_visits = 500.0;
    spec.min_visits = 30;
    for s in &mut spec.sections {
        s.count = if s.section == Section::News { 120 } else { 50 };
    }
    let events: Vec<Event> = generate_corpus(&spec).events().collect();
    let mut config = EngineConfig::default();
    config.predict.snapshot_every_ticks = 100;
    let plan = RunPlan { clock_start: spec.start + TimeDelta::days(7) };
    let end = plan.clock_start + TimeDelta::days(7);
    // Seven days of event time in about five seconds.
    let speed = Some(7.0 * 86400.0 / 5.0);

    let full = tempfile::tempdir().unwrap();
    let engine = Arc::new(Engine::open(config.clone(), plan, full.path()).map_err(|e| e.to_string())?);
    let stats = replay(&engine, events.iter().cloned(), end, speed).map_err(|e| e.to_string())?;
    let predictions = engine.take_predictions();
    let underpredicted = predictions.iter().filter(|p| p.predicted < p.observed as f64).count();
    drop(engine);

    let crashed = tempfile::tempdir().unwrap();
    let cut = events.iter().position(|e| e.timestamp() >= plan.clock_start + TimeDelta::hours(80)).unwrap();
    {
        let engine = Engine::open(config.clone(), plan, crashed.path()).map_err(|e| e.to_string())?;
        for e in &events[..cut] {
            engine.submit(e).map_err(|e| e.to_string())?;
        }
        std::mem::forget(engine);
    }
    {
        let engine = Engine::open_existing(config, crashed.path()).map_err(|e| e.to_string())?;
        replay(&engine, events.iter().cloned(), end, None).map_err(|e| e.to_string())?;
    }
    let a = fs::read(full.path().join("predictions.log")).unwrap();
    let b = fs::read(crashed.path().join("predictions.log")).unwrap();
    let identical = !a.is_empty() && a == b;
    check(
        stats.retrains == 6 && stats.mixed_registry_reads == 0 && underpredicted == 0 && stats.predictions > 0 && identical,
        format!(
            "{} retrains (6), {} mixed-registry reads (0), {} of {} predictions below observed (0), restart log {} ({} bytes)",
            stats.retrains,
            stats.mixed_registry_reads,
            underpredicted,
            stats.predictions,
            if identical { "identical" } else { "DIFFERS" },
            a.len()
        ),
    )
}
