//! Mapping annotations to a paper record, resolving labels to graph ids and
//! uploading the result.

mod client;
mod resolve;
mod upload;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use scikg_core::xmp::DEFAULT_TOOLKIT_NAMESPACE;
use scikg_core::{group_contributions, AnnotationDocument, PdfError, XmpError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::{Entity, EntityKind, GraphClient, PaperSummary};
pub use resolve::resolve_ids;
pub use upload::{ingest, upload, StepTimer, StepTiming, UploadMode, UploadReport};

#[derive(Debug, Error)]
pub enum KgError {
    #[error("document has no annotations and no bibliographic data")]
    EmptyRecord,
    #[error("graph service unreachable: {0}")]
    ServiceUnreachable(String),
    #[error("graph service returned {status}: {body}")]
    ServiceError { status: u16, body: String },
    #[error("no paper titled {title:?} in the graph")]
    PaperNotFound { title: String },
    #[error("{} papers titled {title:?}: {}", ids.len(), ids.join(", "))]
    AmbiguousPaper { title: String, ids: Vec<String> },
    #[error("update mode needs a title to locate the paper")]
    MissingTitle,
    #[error("PDF carries no toolkit metadata")]
    NoMetadata,
    #[error(transparent)]
    Pdf(#[from] PdfError),
    #[error(transparent)]
    Xmp(#[from] XmpError),
}

/// Fields unknown at annotation time, supplied by hand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub doi: Option<String>,
    pub publication_date: Option<NaiveDate>,
    pub published_in: Option<String>,
}

/// One property of a contribution, as it leaves the annotation model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub property: String,
    pub namespace: String,
    pub value: String,
    /// URI of the linked entity.
    pub resource: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub doi: Option<String>,
    pub title: Option<String>,
    pub authors: Vec<String>,
    pub publication_date: Option<NaiveDate>,
    pub published_in: Option<String>,
    pub research_field: Option<String>,
    pub contributions: BTreeMap<String, Vec<Statement>>,
}

/// A statement after resolution: the property is a predicate id, a linked
/// entity a resource id. Labels and URIs are kept alongside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedStatement {
    pub predicate: String,
    pub property: String,
    pub namespace: String,
    pub value: String,
    pub resource: Option<String>,
    pub resource_uri: Option<String>,
}

/// The JSON document posted to `/api/papers` and returned by
/// `GET /api/papers/{id}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperDocument {
    pub doi: Option<String>,
    pub title: Option<String>,
    pub authors: Vec<String>,
    pub publication_date: Option<NaiveDate>,
    pub published_in: Option<String>,
    pub research_field: Option<String>,
    pub contributions: BTreeMap<String, Vec<ResolvedStatement>>,
}

impl PaperDocument {
    /// The record this document was resolved from, identifiers dropped.
    pub fn to_record(&self) -> PaperRecord {
        PaperRecord {
            doi: self.doi.clone(),
            title: self.title.clone(),
            authors: self.authors.clone(),
            publication_date: self.publication_date,
            published_in: self.published_in.clone(),
            research_field: self.research_field.clone(),
            contributions: self
                .contributions
                .iter()
                .map(|(id, statements)| {
                    let statements = statements
                        .iter()
                        .map(|s| Statement {
                            property: s.property.clone(),
                            namespace: s.namespace.clone(),
                            value: s.value.clone(),
                            resource: s.resource_uri.clone(),
                        })
                        .collect();
                    (id.clone(), statements)
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreatedEntity {
    pub kind: EntityKind,
    pub label: String,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedRecord {
    pub paper: PaperDocument,
    pub unresolved_created: Vec<CreatedEntity>,
}

pub fn map_to_paper(doc: &AnnotationDocument, overrides: &Overrides) -> Result<PaperRecord, KgError> {
    map_to_paper_with(doc, overrides, DEFAULT_TOOLKIT_NAMESPACE)
}

/// Mandatory kinds map to their label ("research problem"), custom kinds to
/// their local name, each paired with the namespace it serializes under.
pub fn map_to_paper_with(
    doc: &AnnotationDocument,
    overrides: &Overrides,
    toolkit_namespace: &str,
) -> Result<PaperRecord, KgError> {
    if doc.is_empty() {
        return Err(KgError::EmptyRecord);
    }
    let contributions = group_contributions(doc)
        .into_iter()
        .map(|(id, entries)| {
            let statements = entries
                .into_iter()
                .map(|e| {
                    let namespace = doc
                        .resolve_namespace(&e.kind)
                        .ok()
                        .flatten()
                        .unwrap_or(toolkit_namespace)
                        .to_string();
                    let property = match e.kind.as_mandatory() {
                        Some(kind) => kind.label().to_string(),
                        None => e.kind.local_name().to_string(),
                    };
                    Statement {
                        property,
                        namespace,
                        value: e.value,
                        resource: e.link.map(|l| l.uri().to_string()),
                    }
                })
                .collect();
            (id, statements)
        })
        .collect();
    Ok(PaperRecord {
        doi: overrides.doi.clone(),
        title: doc.biblio.title.clone(),
        authors: doc.biblio.authors.clone(),
        publication_date: overrides.publication_date,
        published_in: overrides.published_in.clone(),
        research_field: doc.biblio.research_field.clone(),
        contributions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use scikg_core::{parse_source, MandatoryKind, PropertyAnnotation, PropertyKind, SourceDocument};

    fn parse(text: &str) -> AnnotationDocument {
        parse_source(&SourceDocument::new(text, "<test>")).unwrap()
    }

    #[test]
    fn empty_document_is_rejected() {
        assert!(matches!(
            map_to_paper(&AnnotationDocument::default(), &Overrides::default()),
            Err(KgError::EmptyRecord)
        ));
    }

    #[test]
    fn single_result_mirrors_grouping() {
        let doc = AnnotationDocument {
            annotations: vec![PropertyAnnotation::new(PropertyKind::mandatory(MandatoryKind::Result), "faster")],
            ..Default::default()
        };
        let record = map_to_paper(&doc, &Overrides::default()).unwrap();
        let groups = group_contributions(&doc);
        assert_eq!(record.contributions.keys().collect::<Vec<_>>(), groups.keys().collect::<Vec<_>>());
        assert_eq!(
            record.contributions["1"],
            [Statement {
                property: "result".into(),
                namespace: DEFAULT_TOOLKIT_NAMESPACE.into(),
                value: "faster".into(),
                resource: None,
            }]
        );
        assert_eq!((record.title, record.doi, record.research_field), (None, None, None));
        assert!(record.authors.is_empty());
    }

    #[test]
    fn overrides_pass_through() {
        let doc = parse(r"\result{x}");
        let overrides = Overrides {
            doi: Some("10.1234/x".into()),
            publication_date: NaiveDate::from_ymd_opt(2023, 5, 1),
            published_in: Some("JCDL".into()),
        };
        let record = map_to_paper(&doc, &overrides).unwrap();
        assert_eq!(record.doi.as_deref(), Some("10.1234/x"));
        assert_eq!(record.publication_date, NaiveDate::from_ymd_opt(2023, 5, 1));
        assert_eq!(record.published_in.as_deref(), Some("JCDL"));
    }

    #[test]
    fn custom_namespaces_are_carried() {
        let doc = parse(scikg_testkit::corpus::CUSTOM_PROPERTIES);
        let record = map_to_paper_with(&doc, &Overrides::default(), "https://example.org/p/").unwrap();
        let namespaces: Vec<&str> = record.contributions["1"].iter().map(|s| s.namespace.as_str()).collect();
        assert_eq!(namespaces, ["http://purl.org/spar/amo#", "https://other.type/of/ontology"]);

        let doc = parse(r"\contribution{p-value}{0.05}");
        let record = map_to_paper_with(&doc, &Overrides::default(), "https://example.org/p/").unwrap();
        assert_eq!(record.contributions["1"][0].namespace, "https://example.org/p/");
    }

    #[test]
    fn biblio_only_document_maps() {
        let record = map_to_paper(&parse(scikg_testkit::corpus::BIBLIOGRAPHIC), &Overrides::default()).unwrap();
        assert_eq!(record.authors, ["Ellen R. Wald", "David Nash", "Jens Eickhoff"]);
        assert_eq!(record.research_field.as_deref(), Some("pharmacology"));
        assert!(record.doi.is_none());
        assert!(record.contributions.is_empty());
    }
}
