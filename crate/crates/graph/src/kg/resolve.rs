use std::collections::BTreeMap;

use futures::future::try_join_all;
use reqwest::Url;

use super::{
    CreatedEntity, Entity, EntityKind, GraphClient, KgError, PaperDocument, PaperRecord,
    ResolvedRecord, ResolvedStatement,
};

/// `R<n>` when `uri` names a resource in an ORKG instance or in the service
/// behind `base`, e.g. `https://www.orkg.org/orkg/resource/R12259`.
pub(crate) fn graph_resource_id(uri: &str, base: &str) -> Option<String> {
    let url = Url::parse(uri).ok()?;
    let host = url.host_str()?;
    let base_host = Url::parse(base).ok().and_then(|b| b.host_str().map(str::to_string));
    let known = host == "orkg.org" || host.ends_with(".orkg.org") || base_host.as_deref() == Some(host);
    if !known {
        return None;
    }
    let mut segments: Vec<&str> = url.path_segments()?.collect();
    if segments.last() == Some(&"") {
        segments.pop();
    }
    match segments.as_slice() {
        [.., "resource", id]
            if id.len() > 1 && id.starts_with('R') && id[1..].bytes().all(|b| b.is_ascii_digit()) =>
        {
            Some(id.to_string())
        }
        _ => None,
    }
}

fn id_order(id: &str) -> (u64, &str) {
    (id.get(1..).and_then(|n| n.parse().ok()).unwrap_or(u64::MAX), id)
}

fn pick(kind: EntityKind, label: &str, matches: &[Entity]) -> Option<String> {
    let best = matches.iter().min_by(|a, b| id_order(&a.id).cmp(&id_order(&b.id)))?;
    if matches.len() > 1 {
        log::warn!(
            "{} {kind:?}s labelled {label:?}; using {}",
            matches.len(),
            best.id
        );
    }
    Some(best.id.clone())
}

/// Replaces property names and linked labels by graph ids. Lookups run
/// concurrently; creations for labels with no match run one at a time.
pub async fn resolve_ids(record: &PaperRecord, client: &GraphClient) -> Result<ResolvedRecord, KgError> {
    // Labels to resolve, keyed case-insensitively; the first spelling wins.
    let mut needed: BTreeMap<(EntityKind, String), String> = BTreeMap::new();
    let mut order: Vec<(EntityKind, String)> = Vec::new();
    let mut need = |kind: EntityKind, label: &str| {
        let key = (kind, label.to_lowercase());
        if !needed.contains_key(&key) {
            needed.insert(key.clone(), label.to_string());
            order.push(key);
        }
    };
    for statement in record.contributions.values().flatten() {
        need(EntityKind::Predicate, &statement.property);
        if let Some(uri) = &statement.resource {
            if graph_resource_id(uri, client.base_url()).is_none() {
                need(EntityKind::Resource, &statement.value);
            }
        }
    }

    let found = try_join_all(order.iter().map(|key| client.lookup(key.0, &needed[key]))).await?;

    let mut ids: BTreeMap<(EntityKind, String), String> = BTreeMap::new();
    let mut created = Vec::new();
    for (key, matches) in order.iter().zip(found) {
        let label = &needed[key];
        let id = match pick(key.0, label, &matches) {
            Some(id) => id,
            None => {
                let id = client.create(key.0, label).await?;
                created.push(CreatedEntity {
                    kind: key.0,
                    label: label.clone(),
                    id: id.clone(),
                });
                id
            }
        };
        ids.insert(key.clone(), id);
    }

    let contributions = record
        .contributions
        .iter()
        .map(|(contribution, statements)| {
            let resolved = statements
                .iter()
                .map(|s| {
                    let predicate = ids[&(EntityKind::Predicate, s.property.to_lowercase())].clone();
                    let resource = s.resource.as_ref().map(|uri| {
                        graph_resource_id(uri, client.base_url()).unwrap_or_else(|| {
                            ids[&(EntityKind::Resource, s.value.to_lowercase())].clone()
                        })
                    });
                    ResolvedStatement {
                        predicate,
                        property: s.property.clone(),
                        namespace: s.namespace.clone(),
                        value: s.value.clone(),
                        resource,
                        resource_uri: s.resource.clone(),
                    }
                })
                .collect();
            (contribution.clone(), resolved)
        })
        .collect();

    Ok(ResolvedRecord {
        paper: PaperDocument {
            doi: record.doi.clone(),
            title: record.title.clone(),
            authors: record.authors.clone(),
            publication_date: record.publication_date,
            published_in: record.published_in.clone(),
            research_field: record.research_field.clone(),
            contributions,
        },
        unresolved_created: created,
    })
}
