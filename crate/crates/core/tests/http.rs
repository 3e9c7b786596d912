use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::TimeDelta;
use http_body_util::BodyExt;
use newslife::event::Event;
use newslife::predict::{Engine, RunPlan};
use newslife::server::router;
use newslife::simgen::{generate_corpus, CorpusSpec};
use newslife::{EngineConfig, Section};
use serde_json::Value;
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: String) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

#[tokio::test]
async fn api_round_trip() {
    let mut spec = CorpusSpec::default();
    spec.publication_days = 5.0;
    spec.mean_visits = 400.0;
    spec.min_visits = 30;
    for s in &mut spec.sections {
        s.count = if s.section == Section::News { 100 } else { 50 };
    }
    let events: Vec<Event> = generate_corpus(&spec).events().collect();
    let plan = RunPlan {
        clock_start: spec.start + TimeDelta::days(5),
    };
    let engine = Arc::new(Engine::in_memory(EngineConfig::default(), plan).unwrap());
    let app = router(engine.clone());

    let (status, body) = call(&app, "GET", "/healthz", String::new()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    let (_, body) = call(&app, "GET", "/articles", String::new()).await;
    assert_eq!(body["articles"].as_array().unwrap().len(), 0);

    let split = events.iter().position(|e| e.timestamp() >= plan.clock_start + TimeDelta::hours(3)).unwrap();
    for chunk in events[..split].chunks(5000) {
        let lines: String = chunk.iter().map(|e| e.to_line() + "\n").collect();
        let (status, body) = call(&app, "POST", "/events", lines).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        assert_eq!(body["accepted"].as_u64().unwrap() as usize, chunk.len());
    }
    let (status, _) = call(&app, "POST", "/events", "{not json}\n".into()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, models) = call(&app, "GET", "/models", String::new()).await;
    assert_eq!(models["version"], 1);
    assert_eq!(models["consistent"], true);
    assert!(models["groups"]["news"]["horizons"]["60"]["terms"].as_array().is_some_and(|t| !t.is_empty()), "{models}");

    let (_, listed) = call(&app, "GET", "/articles", String::new()).await;
    let articles = listed["articles"].as_array().unwrap();
    assert!(!articles.is_empty());
    let old = articles.iter().find(|a| a["age_minutes"].as_i64().unwrap() >= 60).unwrap();
    let id = old["article_id"].as_str().unwrap();

    let (status, p) = call(&app, "GET", &format!("/articles/{id}/prediction"), String::new()).await;
    assert_eq!(status, StatusCode::OK, "{p}");
    assert!(p["predicted"].as_f64().unwrap() >= p["observed"].as_f64().unwrap());
    assert_eq!(p["model_version"], 1);

    let (status, s) = call(&app, "GET", &format!("/articles/{id}/series?granularity=minute"), String::new()).await;
    assert_eq!(status, StatusCode::OK);
    let visits: u64 = s["visits"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(visits, engine.store().snapshot(id).unwrap().total_visits());
    let (_, hourly) = call(&app, "GET", &format!("/articles/{id}/series?granularity=hour"), String::new()).await;
    let hv: u64 = hourly["visits"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(hv, visits);
    let (status, _) = call(&app, "GET", &format!("/articles/{id}/series?granularity=week"), String::new()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(&app, "GET", "/articles/nope/prediction", String::new()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
