//! JSON request endpoint over a shared, read-only engine.

use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::post;
use axum::{Json, Router};
use serde::Serialize;

use privgov_core::audit::Report;
use privgov_core::engine::Engine;
use privgov_core::model::AccessRequest;

#[derive(Serialize)]
pub struct Evaluated {
    pub report: Report,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

#[derive(Serialize)]
pub struct Failure {
    pub stage: String,
    pub error: String,
}

type Reply = Result<Json<Evaluated>, (StatusCode, Json<Failure>)>;

async fn evaluate(State(engine): State<Arc<Engine>>, Json(request): Json<AccessRequest>) -> Reply {
    let outcome = tokio::task::spawn_blocking(move || engine.evaluate(&request)).await;
    match outcome {
        Ok(Ok(ev)) => Ok(Json(Evaluated {
            columns: ev.result.slice.columns.clone(),
            rows: ev
                .result
                .slice
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.render().map(String::from)).collect())
                .collect(),
            report: ev.report,
        })),
        Ok(Err(e)) => Err((
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(Failure {
                stage: e.stage.to_string(),
                error: e.source.to_string(),
            }),
        )),
        Err(e) => Err((
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(Failure {
                stage: "internal".into(),
                error: e.to_string(),
            }),
        )),
    }
}

pub fn router(engine: Engine) -> Router {
    Router::new()
        .route("/evaluate", post(evaluate))
        .with_state(Arc::new(engine))
}

pub fn serve(engine: Engine, addr: &str) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        println!("listening on {}", listener.local_addr()?);
        use std::io::Write;
        std::io::stdout().flush()?;
        axum::serve(listener, router(engine)).await?;
        Ok(())
    })
}
