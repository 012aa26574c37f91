//! A local chat-completions server that answers from the prompt alone.
//! Prompts must use [`STUB_TEMPLATE`] so the window can be recovered.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

pub const STUB_TEMPLATE: &str = "{question}\n@@\n{table}";

#[derive(Debug, Clone, Copy)]
pub enum Mode {
    /// Selects every cell of the window's first column.
    FirstColumn,
    /// Replies with text that is not a coordinate grid.
    Garbage,
    /// Like `FirstColumn`, but the first request stalls for the delay.
    SlowFirst(Duration),
    /// Always answers 503.
    Down,
}

struct Shared {
    mode: Mode,
    requests: AtomicUsize,
}

pub struct Stub {
    pub addr: SocketAddr,
    shared: Arc<Shared>,
}

impl Stub {
    pub fn endpoint(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    pub fn requests(&self) -> usize {
        self.shared.requests.load(Ordering::SeqCst)
    }
}

fn first_column_grid(prompt: &str) -> String {
    let table = prompt.split_once("\n@@\n").map(|(_, t)| t).unwrap_or("");
    let mut lines = table.lines();
    let width = lines.next().map(|h| h.split(" | ").count()).unwrap_or(0);
    lines
        .enumerate()
        .map(|(r, _)| {
            (0..width)
                .map(|c| if c == 0 { format!("<{r},0>") } else { "<empty,empty>".to_string() })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

async fn complete(State(shared): State<Arc<Shared>>, Json(body): Json<Value>) -> Result<Json<Value>, axum::http::StatusCode> {
    let n = shared.requests.fetch_add(1, Ordering::SeqCst);
    let prompt = body["messages"][0]["content"].as_str().unwrap_or_default();
    let content = match shared.mode {
        Mode::FirstColumn => first_column_grid(prompt),
        Mode::Garbage => "I think the answer is in the second row, probably.".to_string(),
        Mode::SlowFirst(delay) => {
            if n == 0 {
                tokio::time::sleep(delay).await;
            }
            first_column_grid(prompt)
        }
        Mode::Down => return Err(axum::http::StatusCode::SERVICE_UNAVAILABLE),
    };
    Ok(Json(json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]
    })))
}

/// Starts a stub on an ephemeral port; it lives until the process exits.
pub fn spawn(mode: Mode) -> Stub {
    let shared = Arc::new(Shared {
        mode,
        requests: AtomicUsize::new(0),
    });
    let app = Router::new()
        .route("/v1/chat/completions", post(complete))
        .with_state(shared.clone());
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    Stub {
        addr: rx.recv().unwrap(),
        shared,
    }
}
