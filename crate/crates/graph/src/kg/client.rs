use std::sync::atomic::{AtomicUsize, Ordering};

use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{KgError, PaperDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Predicate,
    Resource,
}

impl EntityKind {
    fn path(self) -> &'static str {
        match self {
            EntityKind::Predicate => "predicates",
            EntityKind::Resource => "resources",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperSummary {
    pub id: String,
    pub title: Option<String>,
}

#[derive(Deserialize)]
struct Created {
    id: String,
}

#[derive(Serialize)]
struct NewEntity<'a> {
    label: &'a str,
}

/// HTTP client for the graph API. Shareable across concurrent lookups.
#[derive(Debug)]
pub struct GraphClient {
    http: reqwest::Client,
    base: String,
    requests: AtomicUsize,
}

impl GraphClient {
    pub fn new(base_url: &str) -> Self {
        GraphClient {
            http: reqwest::Client::new(),
            base: base_url.trim_end_matches('/').to_string(),
            requests: AtomicUsize::new(0),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    /// Number of HTTP requests issued so far.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    async fn send<T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        query: &[(&str, &str)],
        body: Option<&(impl Serialize + ?Sized)>,
    ) -> Result<T, KgError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let url = format!("{}{path}", self.base);
        let mut request = self.http.request(method, &url).query(query);
        if let Some(body) = body {
            request = request.json(body);
        }
        let response = request
            .send()
            .await
            .map_err(|e| KgError::ServiceUnreachable(format!("{url}: {e}")))?;
        let status = response.status();
        let text = response
            .text()
            .await
            .map_err(|e| KgError::ServiceUnreachable(format!("{url}: {e}")))?;
        if !status.is_success() {
            return Err(KgError::ServiceError {
                status: status.as_u16(),
                body: text,
            });
        }
        serde_json::from_str(&text).map_err(|e| KgError::ServiceError {
            status: StatusCode::OK.as_u16(),
            body: format!("unexpected response body ({e}): {text}"),
        })
    }

    /// Entities whose label equals `label`, ignoring case.
    pub async fn lookup(&self, kind: EntityKind, label: &str) -> Result<Vec<Entity>, KgError> {
        let path = format!("/api/{}", kind.path());
        self.send(Method::GET, &path, &[("q", label)], None::<&()>).await
    }

    pub async fn create(&self, kind: EntityKind, label: &str) -> Result<String, KgError> {
        let path = format!("/api/{}", kind.path());
        let created: Created = self
            .send(Method::POST, &path, &[], Some(&NewEntity { label }))
            .await?;
        Ok(created.id)
    }

    pub async fn create_paper(&self, paper: &PaperDocument) -> Result<String, KgError> {
        let created: Created = self.send(Method::POST, "/api/papers", &[], Some(paper)).await?;
        Ok(created.id)
    }

    pub async fn replace_paper(&self, id: &str, paper: &PaperDocument) -> Result<(), KgError> {
        let _: serde_json::Value = self
            .send(Method::PUT, &format!("/api/papers/{id}"), &[], Some(paper))
            .await?;
        Ok(())
    }

    pub async fn find_papers(&self, title: &str) -> Result<Vec<PaperSummary>, KgError> {
        self.send(Method::GET, "/api/papers", &[("title", title)], None::<&()>)
            .await
    }

    pub async fn get_paper(&self, id: &str) -> Result<PaperDocument, KgError> {
        self.send(Method::GET, &format!("/api/papers/{id}"), &[], None::<&()>)
            .await
    }
}
