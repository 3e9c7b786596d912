//! HTTP interface to a running [`Engine`].

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::event::Event;
use crate::ingest::{monitoring_filter, polling_schedule, ReferralClass};
use crate::predict::Engine;
use crate::regress::Term;

type Shared = Arc<Engine>;

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownArticle(_) => StatusCode::NOT_FOUND,
            Error::TooEarly { .. } | Error::NoModel { .. } | Error::InsufficientData(_) => StatusCode::CONFLICT,
            Error::InvalidEvent(_) | Error::MalformedLine { .. } | Error::Json(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

pub fn router(engine: Shared) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/events", post(post_events))
        .route("/articles", get(list_articles))
        .route("/articles/{id}/prediction", get(prediction))
        .route("/articles/{id}/series", get(series))
        .route("/models", get(models))
        .with_state(engine)
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(engine: Shared, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(engine)).await
}

async fn healthz(State(engine): State<Shared>) -> Json<Value> {
    let stats = engine.stats();
    Json(json!({
        "status": "ok",
        "registry_version": engine.registry().current().version,
        "events_applied": stats.events_applied,
        "clock": engine.clock(),
    }))
}

/// Body: event lines in the same JSON-lines format as event files.
async fn post_events(State(engine): State<Shared>, body: String) -> Result<Json<Value>, ApiError> {
    let mut events = Vec::new();
    for (i, line) in body.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let event = Event::from_line(line).map_err(|e| Error::MalformedLine {
            line: i + 1,
            message: e.to_string(),
        })?;
        events.push(event);
    }
    let (mut accepted, mut rejected) = (0, Vec::new());
    for (i, e) in events.iter().enumerate() {
        match engine.submit(e) {
            Ok(()) => accepted += 1,
            Err(err) => rejected.push(json!({ "index": i, "error": err.to_string() })),
        }
    }
    engine.flush()?;
    Ok(Json(json!({ "accepted": accepted, "rejected": rejected })))
}

#[derive(Serialize)]
struct ArticleSummary {
    article_id: String,
    section: String,
    first_visit: Option<DateTime<Utc>>,
    age_minutes: Option<i64>,
    visits: u64,
    recent_visits: u64,
    tweets: usize,
    facebook_shares: u64,
    polled: bool,
}

async fn list_articles(State(engine): State<Shared>) -> Json<Value> {
    let Some(now) = engine.clock() else {
        return Json(json!({ "clock": null, "articles": [] }));
    };
    let ing = &engine.config().ingest;
    let polled = polling_schedule(engine.store(), now, ing.poll_window_minutes, ing.poll_top_k);
    let window = ing.monitor_window_minutes as i64;
    let mut out = Vec::new();
    engine.store().for_each(|s| {
        if !monitoring_filter(s, now, ing.monitor_min_visits, window as usize) {
            return;
        }
        let age = s.age_minutes(now);
        let observed = age.unwrap_or(0).saturating_add(1);
        out.push(ArticleSummary {
            article_id: s.article_id.clone(),
            section: s.section_label().to_string(),
            first_visit: s.first_visit(),
            age_minutes: age,
            visits: s.visits_before(observed),
            recent_visits: s.visits_between(observed - window, observed),
            tweets: s.tweets_before(observed).count(),
            facebook_shares: s.shares_observed_before(observed),
            polled: polled.contains(&s.article_id),
        });
    });
    Json(json!({ "clock": now, "articles": out }))
}

async fn prediction(State(engine): State<Shared>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    Ok(Json(serde_json::to_value(engine.predict(&id)?).map_err(Error::from)?))
}

#[derive(Deserialize)]
struct SeriesQuery {
    granularity: Option<String>,
}

async fn series(State(engine): State<Shared>, Path(id): Path<String>, Query(q): Query<SeriesQuery>) -> Result<Json<Value>, ApiError> {
    let step = match q.granularity.as_deref().unwrap_or("minute") {
        "minute" => 1,
        "hour" => 60,
        other => return Err(ApiError(StatusCode::BAD_REQUEST, format!("unknown granularity {other:?}; use minute or hour"))),
    };
    let bucket = |v: Vec<u64>| -> Vec<u64> { v.chunks(step).map(|c| c.iter().sum()).collect() };
    engine
        .store()
        .with_series(&id, |s| {
            let len = s.len_minutes();
            let by_class: BTreeMap<&str, Vec<u64>> = ReferralClass::ALL
                .iter()
                .map(|&c| (c.as_str(), bucket(s.visits_by_class(c))))
                .collect();
            let tweets = bucket(s.tweets_per_minute(len).into_iter().map(u64::from).collect());
            Json(json!({
                "article_id": s.article_id,
                "section": s.section_label().as_str(),
                "first_visit": s.first_visit(),
                "granularity": if step == 1 { "minute" } else { "hour" },
                "visits": bucket(s.visits_total()),
                "visits_by_referral": by_class,
                "tweets": tweets,
                "facebook_snapshots": s.share_records(),
            }))
        })
        .ok_or_else(|| Error::UnknownArticle(id).into())
}

async fn models(State(engine): State<Shared>) -> Json<Value> {
    let reg = engine.registry().current();
    let groups: BTreeMap<String, Value> = reg
        .groups
        .iter()
        .map(|(g, gm)| {
            let horizons: BTreeMap<String, Value> = gm
                .horizons
                .iter()
                .map(|(h, m)| {
                    let terms: Vec<String> = m.retained_terms().map(|(t, _): (Term, f64)| t.label()).collect();
                    (
                        h.to_string(),
                        json!({ "n": m.n, "r_squared": m.r_squared, "aic": m.aic, "terms": terms }),
                    )
                })
                .collect();
            (g.to_string(), json!({ "training": gm.training, "horizons": horizons }))
        })
        .collect();
    Json(json!({
        "version": reg.version,
        "last_retrain": reg.last_retrain,
        "target_minutes": reg.target_minutes,
        "consistent": reg.is_consistent(),
        "groups": groups,
        "engine": engine.stats(),
        "ingest": engine.store().diagnostics(),
    }))
}
