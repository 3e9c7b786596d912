//! Builds the three plot-ready reports for a reduced corpus and prints them.

use newslife::ingest::SeriesStore;
use newslife::regress::CurveOptions;
use newslife::report::{Fig6Report, ReportGroup, ShelfLifeReport, Table2Report};
use newslife::simgen::{generate_corpus, CorpusSpec};
use newslife::EngineConfig;

fn main() -> anyhow::Result<()> {
    let mut spec = CorpusSpec::default();
    for s in &mut spec.sections {
        s.count /= 2;
    }
    let corpus = generate_corpus(&spec);
    let config = EngineConfig::default();
    let store = SeriesStore::new(&config)?;
    for e in corpus.events() {
        store.ingest(&e)?;
    }
    let series = store.into_series();
    let out = std::io::stdout();

    let table = Table2Report::build(&series, &[ReportGroup::News, ReportGroup::InDepth, ReportGroup::All], config.social.tokenizer)?;
    table.write_csv(out.lock())?;
    println!();

    let fig6 = Fig6Report::build(&series, ReportGroup::News, &[10, 20, 60, 180, 720], &CurveOptions::default())?;
    fig6.write_csv(out.lock())?;
    println!("visits-only reaches the 20-minute full-model r² at {:?} min", fig6.crossover(20));
    println!();

    let shelf = ShelfLifeReport::build(&series, ReportGroup::All, config.lifecycle.ell, config.lifecycle.horizon_days * 1440, 12.0)?;
    println!("mean shelf-life {:.1} h, r = {:.3}, {} undefined", shelf.mean_tau_hours, shelf.pearson_r, shelf.undefined);
    shelf.write_csv(out.lock())?;
    Ok(())
}
