//! wasm-bindgen exports behind `www/index.html`. Each export returns a JSON
//! string so the page needs no extra glue; the plain-Rust versions are what
//! the tests exercise.

use scikg_core::xmp::{serialize_xmp_with, XmpOptions};
use scikg_core::{
    group_contributions, parse_source, strip_annotations, validate, AnnotationDocument, ParseError,
    SourceDocument,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const ORIGIN: &str = "<editor>";

fn parse_error(src: &SourceDocument, e: &ParseError) -> Value {
    let position = match e {
        ParseError::UnbalancedBraces { position }
        | ParseError::MalformedCommand { position, .. }
        | ParseError::DuplicateBibliographic { position, .. } => Some(*position),
        _ => None,
    };
    let (line, column) = position.map(|p| src.line_col(p)).unzip();
    json!({ "ok": false, "error": e.to_string(), "line": line, "column": column })
}

fn parse(source: &str) -> Result<(SourceDocument, AnnotationDocument), Value> {
    let src = SourceDocument::new(source, ORIGIN);
    match parse_source(&src) {
        Ok(doc) => Ok((src, doc)),
        Err(e) => Err(parse_error(&src, &e)),
    }
}

/// Annotations, contribution groups, bibliographic data and warnings.
pub fn analyze_json(source: &str) -> Value {
    let (src, doc) = match parse(source) {
        Ok(parsed) => parsed,
        Err(e) => return e,
    };
    let annotations: Vec<Value> = doc
        .annotations
        .iter()
        .map(|a| {
            let line = a.span.map(|s| src.line_col(s.start).0);
            json!({
                "kind": a.kind.to_string(),
                "value": a.value,
                "contributions": a.contributions,
                "visible": a.visible,
                "link": a.link.as_ref().map(|l| json!({ "uri": l.uri(), "label": l.label() })),
                "line": line,
            })
        })
        .collect();
    let groups: serde_json::Map<String, Value> = group_contributions(&doc)
        .into_iter()
        .map(|(id, entries)| {
            let entries: Vec<Value> = entries
                .iter()
                .map(|e| json!({ "kind": e.kind.to_string(), "value": e.value }))
                .collect();
            (id, Value::Array(entries))
        })
        .collect();
    let warnings: Vec<String> = validate(&doc).into_iter().map(|w| w.message).collect();
    json!({
        "ok": true,
        "annotations": annotations,
        "contributions": groups,
        "biblio": {
            "title": doc.biblio.title,
            "authors": doc.biblio.authors,
            "research_field": doc.biblio.research_field,
        },
        "namespaces": doc.namespaces.iter().map(|n| json!({
            "abbreviation": n.abbreviation, "uri": n.uri, "property": n.property,
        })).collect::<Vec<_>>(),
        "warnings": warnings,
    })
}

pub fn strip_json(source: &str) -> Value {
    let (src, doc) = match parse(source) {
        Ok(parsed) => parsed,
        Err(e) => return e,
    };
    match strip_annotations(&src, &doc) {
        Ok(text) => json!({ "ok": true, "text": text }),
        Err(e) => json!({ "ok": false, "error": e.to_string() }),
    }
}

/// `namespace` overrides the toolkit namespace when non-empty.
pub fn xmp_json(source: &str, namespace: &str) -> Value {
    let (_, doc) = match parse(source) {
        Ok(parsed) => parsed,
        Err(e) => return e,
    };
    let mut options = XmpOptions::default();
    if !namespace.trim().is_empty() {
        options.toolkit_namespace = namespace.trim().to_string();
    }
    match serialize_xmp_with(&doc, &options) {
        Ok(packet) => json!({ "ok": true, "packet": packet.as_str() }),
        Err(e) => json!({ "ok": false, "error": e.to_string() }),
    }
}

#[wasm_bindgen]
pub fn analyze(source: &str) -> String {
    analyze_json(source).to_string()
}

#[wasm_bindgen]
pub fn strip(source: &str) -> String {
    strip_json(source).to_string()
}

#[wasm_bindgen]
pub fn to_xmp(source: &str, namespace: &str) -> String {
    xmp_json(source, namespace).to_string()
}
