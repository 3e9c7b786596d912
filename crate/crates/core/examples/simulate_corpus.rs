//! Draws a small synthetic corpus, writes it as JSON lines and reads it back.

use newslife::event::{read_events, write_events, Event};
use newslife::simgen::{generate_corpus, CorpusSpec};
use newslife::Section;

fn main() -> anyhow::Result<()> {
    let mut spec = CorpusSpec::default();
    spec.publication_days = 3.0;
    for s in &mut spec.sections {
        s.count = if s.section == Section::News { 30 } else { 10 };
    }
    let corpus = generate_corpus(&spec);
    for b in corpus.blueprints.iter().take(5) {
        println!(
            "{} {:<8} {:<18} {:>6} visits {:>4} tweets, published {}",
            b.article_id, b.section, b.class, b.total_visits, b.total_tweets, b.published
        );
    }

    let events: Vec<Event> = corpus.events().collect();
    let path = std::env::temp_dir().join("newslife-sample.jsonl");
    write_events(std::io::BufWriter::new(std::fs::File::create(&path)?), &events)?;
    let back = read_events(std::io::BufReader::new(std::fs::File::open(&path)?)).count();
    println!("{} events for {} articles written to {} ({back} read back)", events.len(), corpus.blueprints.len(), path.display());
    println!("first line: {}", events[0].to_line());
    Ok(())
}
