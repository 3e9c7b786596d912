//! Serves the HTTP API on a local port, posts a few events and queries them.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use chrono::TimeDelta;
use newslife::event::Event;
use newslife::predict::{Engine, RunPlan};
use newslife::EngineConfig;

fn request(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(addr)?;
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )?;
    let mut response = String::new();
    stream.read_to_string(&mut response)?;
    Ok(response.split("\r\n\r\n").nth(1).unwrap_or_default().to_string())
}

fn main() -> anyhow::Result<()> {
    let plan = RunPlan { clock_start: "2012-10-01T00:00:00Z".parse()? };
    let engine = Arc::new(Engine::in_memory(EngineConfig::default(), plan)?);
    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    rt.spawn(async move { axum::serve(listener, newslife::server::router(engine)).await });

    let t0: chrono::DateTime<chrono::Utc> = "2012-10-01T08:00:05Z".parse()?;
    let body = [
        Event::visit("a1", t0, "https://www.google.com/"),
        Event::visit("a1", t0 + TimeDelta::seconds(35), ""),
        Event::visit("a1", t0 + TimeDelta::seconds(125), "https://t.co/x"),
        Event::shares("a1", t0 + TimeDelta::seconds(295), 4),
    ]
    .iter()
    .map(Event::to_line)
    .collect::<Vec<_>>()
    .join("\n");
    println!("POST /events -> {}", request(addr, "POST", "/events", &body)?);
    for path in ["/healthz", "/articles", "/articles/a1/series?granularity=minute", "/articles/a1/prediction", "/models"] {
        println!("GET {path} -> {}", request(addr, "GET", path, "")?);
    }
    Ok(())
}
