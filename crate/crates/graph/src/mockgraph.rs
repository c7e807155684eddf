//! In-memory stand-in for the graph API, served over HTTP with axum.
//!
//! Endpoints:
//!
//! | method | path | body / query | response |
//! |---|---|---|---|
//! | GET | `/api/resources`, `/api/predicates` | `?q=label` | `[{"id","label"}]`, case-insensitive exact match |
//! | POST | `/api/resources`, `/api/predicates` | `{"label"}` | `201 {"id"}` |
//! | POST | `/api/papers` | paper document | `201 {"id"}` |
//! | PUT | `/api/papers/{id}` | paper document | `{"id"}` |
//! | GET | `/api/papers` | `?title=t` | `[{"id","title"}]` |
//! | GET | `/api/papers/{id}` | | the stored paper document |
//!
//! Resources and papers share the `R<n>` id sequence, predicates use
//! `P<n>`. Malformed JSON yields 400, unknown routes 404.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::kg::{Entity, EntityKind, PaperDocument, PaperSummary};

#[derive(Debug, Error)]
pub enum MockError {
    #[error("cannot bind {address}: {source}")]
    BindFailure {
        address: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
    #[error("snapshot file {path}: {source}")]
    SnapshotIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// All graph state. Serializes to the snapshot format.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStore {
    #[serde(default)]
    resources: BTreeMap<String, String>,
    #[serde(default)]
    predicates: BTreeMap<String, String>,
    #[serde(default)]
    papers: BTreeMap<String, PaperDocument>,
    #[serde(default)]
    next_resource: u64,
    #[serde(default)]
    next_predicate: u64,
}

fn number(id: &str, prefix: char) -> Option<u64> {
    id.strip_prefix(prefix)?.parse().ok().filter(|n| *n > 0)
}

impl GraphStore {
    pub fn new() -> Self {
        GraphStore {
            next_resource: 1,
            next_predicate: 1,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, MockError> {
        let mut store: GraphStore =
            serde_json::from_str(text).map_err(|e| MockError::Snapshot(e.to_string()))?;
        let mut max_r = 0;
        for id in store.resources.keys().chain(store.papers.keys()) {
            let n = number(id, 'R').ok_or_else(|| MockError::Snapshot(format!("bad resource id {id:?}")))?;
            max_r = max_r.max(n);
        }
        let mut max_p = 0;
        for id in store.predicates.keys() {
            let n = number(id, 'P').ok_or_else(|| MockError::Snapshot(format!("bad predicate id {id:?}")))?;
            max_p = max_p.max(n);
        }
        if let Some(id) = store.papers.keys().find(|id| store.resources.contains_key(*id)) {
            return Err(MockError::Snapshot(format!("{id} is both a resource and a paper")));
        }
        store.next_resource = store.next_resource.max(max_r + 1);
        store.next_predicate = store.next_predicate.max(max_p + 1);
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self, MockError> {
        let text = std::fs::read_to_string(path).map_err(|source| MockError::SnapshotIo {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("store serializes")
    }

    fn labels(&self, kind: EntityKind) -> &BTreeMap<String, String> {
        match kind {
            EntityKind::Predicate => &self.predicates,
            EntityKind::Resource => &self.resources,
        }
    }

    /// Entities labelled `label` ignoring case, by ascending id number.
    pub fn lookup(&self, kind: EntityKind, label: &str) -> Vec<Entity> {
        let wanted = label.to_lowercase();
        let mut found: Vec<Entity> = self
            .labels(kind)
            .iter()
            .filter(|(_, l)| l.to_lowercase() == wanted)
            .map(|(id, l)| Entity {
                id: id.clone(),
                label: l.clone(),
            })
            .collect();
        found.sort_by_key(|e| e.id[1..].parse::<u64>().unwrap_or(u64::MAX));
        found
    }

    fn next_id(&mut self, kind: EntityKind) -> String {
        match kind {
            EntityKind::Predicate => {
                self.next_predicate = self.next_predicate.max(1);
                self.next_predicate += 1;
                format!("P{}", self.next_predicate - 1)
            }
            EntityKind::Resource => {
                self.next_resource = self.next_resource.max(1);
                self.next_resource += 1;
                format!("R{}", self.next_resource - 1)
            }
        }
    }

    pub fn create(&mut self, kind: EntityKind, label: &str) -> String {
        let id = self.next_id(kind);
        match kind {
            EntityKind::Predicate => self.predicates.insert(id.clone(), label.to_string()),
            EntityKind::Resource => self.resources.insert(id.clone(), label.to_string()),
        };
        id
    }

    pub fn create_paper(&mut self, paper: PaperDocument) -> String {
        let id = self.next_id(EntityKind::Resource);
        self.papers.insert(id.clone(), paper);
        id
    }

    /// False when no paper has this id.
    pub fn replace_paper(&mut self, id: &str, paper: PaperDocument) -> bool {
        match self.papers.get_mut(id) {
            Some(stored) => {
                *stored = paper;
                true
            }
            None => false,
        }
    }

    pub fn paper(&self, id: &str) -> Option<&PaperDocument> {
        self.papers.get(id)
    }

    pub fn find_papers(&self, title: &str) -> Vec<PaperSummary> {
        let wanted = title.to_lowercase();
        self.papers
            .iter()
            .filter(|(_, p)| p.title.as_deref().is_some_and(|t| t.to_lowercase() == wanted))
            .map(|(id, p)| PaperSummary {
                id: id.clone(),
                title: p.title.clone(),
            })
            .collect()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    pub fn predicate_label(&self, id: &str) -> Option<&str> {
        self.predicates.get(id).map(String::as_str)
    }

    pub fn resource_label(&self, id: &str) -> Option<&str> {
        self.resources.get(id).map(String::as_str)
    }
}

type Shared = Arc<RwLock<GraphStore>>;

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

#[allow(clippy::result_large_err)]
fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("malformed JSON: {e}")))
}

#[derive(Deserialize)]
struct NewEntity {
    label: String,
}

fn lookup(state: &Shared, kind: EntityKind, query: &BTreeMap<String, String>) -> Response {
    match query.get("q") {
        Some(label) => Json(state.read().unwrap().lookup(kind, label)).into_response(),
        None => error(StatusCode::BAD_REQUEST, "missing query parameter q"),
    }
}

fn create(state: &Shared, kind: EntityKind, body: &Bytes) -> Response {
    let entity: NewEntity = match parse_body(body) {
        Ok(e) => e,
        Err(r) => return r,
    };
    if entity.label.is_empty() {
        return error(StatusCode::BAD_REQUEST, "label must not be empty");
    }
    let id = state.write().unwrap().create(kind, &entity.label);
    (StatusCode::CREATED, Json(json!({ "id": id }))).into_response()
}

fn router(state: Shared) -> Router {
    Router::new()
        .route(
            "/api/resources",
            get(|State(s): State<Shared>, Query(q): Query<BTreeMap<String, String>>| async move {
                lookup(&s, EntityKind::Resource, &q)
            })
            .post(|State(s): State<Shared>, body: Bytes| async move { create(&s, EntityKind::Resource, &body) }),
        )
        .route(
            "/api/predicates",
            get(|State(s): State<Shared>, Query(q): Query<BTreeMap<String, String>>| async move {
                lookup(&s, EntityKind::Predicate, &q)
            })
            .post(|State(s): State<Shared>, body: Bytes| async move { create(&s, EntityKind::Predicate, &body) }),
        )
        .route(
            "/api/papers",
            get(|State(s): State<Shared>, Query(q): Query<BTreeMap<String, String>>| async move {
                match q.get("title") {
                    Some(title) => Json(s.read().unwrap().find_papers(title)).into_response(),
                    None => error(StatusCode::BAD_REQUEST, "missing query parameter title"),
                }
            })
            .post(|State(s): State<Shared>, body: Bytes| async move {
                match parse_body::<PaperDocument>(&body) {
                    Ok(paper) => {
                        let id = s.write().unwrap().create_paper(paper);
                        (StatusCode::CREATED, Json(json!({ "id": id }))).into_response()
                    }
                    Err(r) => r,
                }
            }),
        )
        .route(
            "/api/papers/{id}",
            get(|State(s): State<Shared>, UrlPath(id): UrlPath<String>| async move {
                match s.read().unwrap().paper(&id) {
                    Some(paper) => Json(paper).into_response(),
                    None => error(StatusCode::NOT_FOUND, format!("no paper {id}")),
                }
            })
            .put(|State(s): State<Shared>, UrlPath(id): UrlPath<String>, body: Bytes| async move {
                let paper = match parse_body::<PaperDocument>(&body) {
                    Ok(paper) => paper,
                    Err(r) => return r,
                };
                if s.write().unwrap().replace_paper(&id, paper) {
                    Json(json!({ "id": id })).into_response()
                } else {
                    error(StatusCode::NOT_FOUND, format!("no paper {id}"))
                }
            }),
        )
        .fallback(|| async { error(StatusCode::NOT_FOUND, "no such route") })
        .with_state(state)
}

/// A running mock service.
#[derive(Debug)]
pub struct MockGraph {
    addr: SocketAddr,
    store: Shared,
    shutdown: oneshot::Sender<()>,
    task: JoinHandle<()>,
}

impl MockGraph {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn snapshot(&self) -> GraphStore {
        self.store.read().unwrap().clone()
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(self) -> GraphStore {
        let _ = self.shutdown.send(());
        let _ = self.task.await;
        self.store.read().unwrap().clone()
    }
}

/// Binds `address` (e.g. `127.0.0.1:0`) and serves in a background task of
/// the current tokio runtime.
pub async fn serve(address: &str, seed: Option<GraphStore>) -> Result<MockGraph, MockError> {
    let bind_failure = |source| MockError::BindFailure {
        address: address.to_string(),
        source,
    };
    let listener = TcpListener::bind(address).await.map_err(bind_failure)?;
    let addr = listener.local_addr().map_err(bind_failure)?;
    #[allow(clippy::unwrap_or_default)]
    let store: Shared = Arc::new(RwLock::new(seed.unwrap_or_else(GraphStore::new)));
    let (tx, rx) = oneshot::channel();
    let app = router(store.clone());
    let task = tokio::spawn(async move {
        let result = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await;
        if let Err(e) = result {
            log::error!("mock graph service stopped: {e}");
        }
    });
    Ok(MockGraph {
        addr,
        store,
        shutdown: tx,
        task,
    })
}
