//! Resolution and upload against a live mock service.

use std::collections::BTreeMap;

use scikg_core::{embed_metadata, parse_source, serialize_xmp, EmbedMode, SourceDocument, XmpOptions};
use scikg_graph::kg::{EntityKind, Statement};
use scikg_graph::{
    ingest, map_to_paper, resolve_ids, serve, upload, GraphClient, KgError, Overrides, PaperRecord,
    UploadMode,
};
use scikg_testkit::{corpus, fixtures};

fn record(source: &str) -> PaperRecord {
    let doc = parse_source(&SourceDocument::new(source, "<test>")).unwrap();
    map_to_paper(&doc, &Overrides::default()).unwrap()
}

#[tokio::test]
async fn unknown_property_is_created_and_reported() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let client = GraphClient::new(&mock.url());
    let resolved = resolve_ids(&record(r"\contribution{p-value}{0.05}"), &client).await.unwrap();
    assert_eq!(resolved.unresolved_created.len(), 1);
    let created = &resolved.unresolved_created[0];
    assert_eq!((created.kind, created.label.as_str(), created.id.as_str()), (EntityKind::Predicate, "p-value", "P1"));
    assert_eq!(resolved.paper.contributions["1"][0].predicate, "P1");

    let again = resolve_ids(&record(r"\contribution{P-Value}{0.07}"), &client).await.unwrap();
    assert!(again.unresolved_created.is_empty());
    assert_eq!(again.paper.contributions["1"][0].predicate, "P1");
    mock.shutdown().await;
}

#[tokio::test]
async fn graph_resource_links_skip_lookup() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let client = GraphClient::new(&mock.url());
    let resolved = resolve_ids(&record(corpus::ENTITY_LINKING), &client).await.unwrap();
    let statement = &resolved.paper.contributions["1"][0];
    assert_eq!(statement.resource.as_deref(), Some("R12259"));
    // One predicate lookup and its creation; nothing for the entity.
    assert_eq!(client.request_count(), 2);
    let store = mock.shutdown().await;
    assert_eq!(store.resource_count(), 0);
}

#[tokio::test]
async fn other_links_resolve_by_label() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let client = GraphClient::new(&mock.url());
    let source = r"\method{\uri{https://example.org/e/1}{Transformer}} \result[2]{\uri{https://example.org/e/2}{transformer}} \objective{\uri{https://example.org/e/3}}";
    let resolved = resolve_ids(&record(source), &client).await.unwrap();
    let first = &resolved.paper.contributions["1"];
    let second = &resolved.paper.contributions["2"];
    assert_eq!(first[0].resource, second[0].resource, "labels match case-insensitively");
    assert_eq!(first[1].value, "https://example.org/e/3");
    let store = mock.snapshot();
    assert_eq!(store.resource_label(first[1].resource.as_deref().unwrap()), Some("https://example.org/e/3"));
    assert_eq!(store.resource_count(), 2);
    mock.shutdown().await;
}

#[tokio::test]
async fn lowest_id_wins_on_ambiguous_labels() {
    let mut seed = scikg_graph::GraphStore::new();
    for _ in 0..9 {
        seed.create(EntityKind::Predicate, "filler");
    }
    seed.create(EntityKind::Predicate, "Method");
    seed.create(EntityKind::Predicate, "method");
    let mock = serve("127.0.0.1:0", Some(seed)).await.unwrap();
    let client = GraphClient::new(&mock.url());
    let resolved = resolve_ids(&record(r"\method{x}"), &client).await.unwrap();
    assert_eq!(resolved.paper.contributions["1"][0].predicate, "P10");
    assert!(resolved.unresolved_created.is_empty());
    mock.shutdown().await;
}

#[tokio::test]
async fn empty_record_makes_no_requests() {
    let client = GraphClient::new("http://127.0.0.1:9");
    let empty = PaperRecord {
        doi: None,
        title: None,
        authors: vec![],
        publication_date: None,
        published_in: None,
        research_field: None,
        contributions: BTreeMap::new(),
    };
    let resolved = resolve_ids(&empty, &client).await.unwrap();
    assert!(resolved.paper.contributions.is_empty());
    assert!(resolved.unresolved_created.is_empty());
    assert_eq!(client.request_count(), 0);
}

#[tokio::test]
async fn unreachable_service() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let url = mock.url();
    mock.shutdown().await;
    let client = GraphClient::new(&url);
    let err = resolve_ids(&record(r"\method{x}"), &client).await.unwrap_err();
    assert!(matches!(err, KgError::ServiceUnreachable(_)), "{err}");
}

#[tokio::test]
async fn add_then_get_returns_the_record() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let client = GraphClient::new(&mock.url());
    let record = record(corpus::SAMPLE_ABSTRACT);
    let resolved = resolve_ids(&record, &client).await.unwrap();
    let report = upload(&resolved, UploadMode::Add, &client, Default::default()).await.unwrap();
    let fetched = client.get_paper(&report.paper_id).await.unwrap();
    assert_eq!(fetched, resolved.paper);
    assert_eq!(fetched.to_record(), record);

    let store = mock.shutdown().await;
    for (statement, original) in fetched.contributions["1"].iter().zip(&record.contributions["1"]) {
        assert_eq!(store.predicate_label(&statement.predicate), Some(original.property.as_str()));
    }
}

#[tokio::test]
async fn update_replaces_in_place() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let client = GraphClient::new(&mock.url());

    let original = record(corpus::SAMPLE_ABSTRACT);
    let resolved = resolve_ids(&original, &client).await.unwrap();
    let added = upload(&resolved, UploadMode::Add, &client, Default::default()).await.unwrap();
    let papers = mock.snapshot().paper_count();

    let mut revised = original.clone();
    revised.title = revised.title.map(|t| t.to_uppercase());
    revised.contributions.get_mut("1").unwrap().push(Statement {
        property: "sample size".into(),
        namespace: "https://orkg.org/property/".into(),
        value: "96".into(),
        resource: None,
    });
    let resolved = resolve_ids(&revised, &client).await.unwrap();
    let updated = upload(&resolved, UploadMode::Update, &client, Default::default()).await.unwrap();
    assert_eq!(updated.mode, UploadMode::Update);
    assert_eq!(updated.paper_id, added.paper_id);
    assert_eq!(mock.snapshot().paper_count(), papers);
    assert_eq!(client.get_paper(&added.paper_id).await.unwrap().to_record(), revised);
    mock.shutdown().await;
}

#[tokio::test]
async fn update_errors() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let client = GraphClient::new(&mock.url());
    let resolved = resolve_ids(&record(corpus::SAMPLE_ABSTRACT), &client).await.unwrap();
    let err = upload(&resolved, UploadMode::Update, &client, Default::default()).await.unwrap_err();
    assert!(matches!(err, KgError::PaperNotFound { .. }));

    for _ in 0..2 {
        upload(&resolved, UploadMode::Add, &client, Default::default()).await.unwrap();
    }
    let err = upload(&resolved, UploadMode::Update, &client, Default::default()).await.unwrap_err();
    assert!(matches!(&err, KgError::AmbiguousPaper { ids, .. } if ids.len() == 2), "{err}");

    let untitled = resolve_ids(&record(r"\method{x}"), &client).await.unwrap();
    let err = upload(&untitled, UploadMode::Update, &client, Default::default()).await.unwrap_err();
    assert!(matches!(err, KgError::MissingTitle));
    mock.shutdown().await;
}

#[tokio::test]
async fn ingest_runs_the_whole_dataflow() {
    let mock = serve("127.0.0.1:0", None).await.unwrap();
    let client = GraphClient::new(&mock.url());
    let doc = parse_source(&SourceDocument::new(corpus::SAMPLE_ABSTRACT, "abstract.tex")).unwrap();
    let pdf = embed_metadata(fixtures::MINIMAL, &serialize_xmp(&doc).unwrap(), EmbedMode::PdfACompat).unwrap();

    let overrides = Overrides {
        doi: Some("10.1234/x".into()),
        ..Default::default()
    };
    let (report, resolved) = ingest(&pdf, &overrides, UploadMode::Add, &client, &XmpOptions::default())
        .await
        .unwrap();
    let steps: Vec<&str> = report.step_timings.iter().map(|t| t.step.as_str()).collect();
    assert_eq!(steps, ["extract", "resolve", "upload"]);
    let sum: f64 = report.step_timings.iter().map(|t| t.seconds).sum();
    assert!((report.total_seconds - sum).abs() < 1e-6);

    let fetched = client.get_paper(&report.paper_id).await.unwrap();
    assert_eq!(fetched, resolved.paper);
    assert_eq!(fetched.doi.as_deref(), Some("10.1234/x"));
    let mut expected = map_to_paper(&doc, &overrides).unwrap();
    expected.doi = Some("10.1234/x".into());
    assert_eq!(fetched.to_record(), expected);

    let err = ingest(fixtures::MINIMAL, &overrides, UploadMode::Add, &client, &XmpOptions::default())
        .await
        .unwrap_err();
    assert!(matches!(err, KgError::NoMetadata));
    mock.shutdown().await;
}
