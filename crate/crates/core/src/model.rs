//! Domain types shared by the parser, the XMP codec and the graph uploader,
//! plus the completeness validator and contribution grouping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Contribution used when an annotation carries no explicit `[ids]` argument.
pub const DEFAULT_CONTRIBUTION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid property name {0:?}: must be non-empty without whitespace or braces")]
    InvalidPropertyName(String),
    #[error("invalid namespace abbreviation {0:?}")]
    InvalidAbbreviation(String),
    #[error("not an absolute URI: {0:?}")]
    NotAbsoluteUri(String),
    #[error("entity link label must not be empty")]
    EmptyLabel,
    #[error("an annotation needs at least one contribution")]
    NoContributions,
    #[error("contribution identifier must be non-empty")]
    EmptyContributionId,
}

/// The five predefined properties whose presence is checked for every document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MandatoryKind {
    ResearchProblem,
    Objective,
    Method,
    Result,
    Conclusion,
}

impl MandatoryKind {
    /// Fixed reporting order.
    pub const ALL: [MandatoryKind; 5] = [
        MandatoryKind::ResearchProblem,
        MandatoryKind::Objective,
        MandatoryKind::Method,
        MandatoryKind::Result,
        MandatoryKind::Conclusion,
    ];

    /// LaTeX command name, also used as the XMP element local name.
    pub fn command(self) -> &'static str {
        match self {
            MandatoryKind::ResearchProblem => "researchproblem",
            MandatoryKind::Objective => "objective",
            MandatoryKind::Method => "method",
            MandatoryKind::Result => "result",
            MandatoryKind::Conclusion => "conclusion",
        }
    }

    /// Human-readable property label as used by the knowledge graph.
    pub fn label(self) -> &'static str {
        match self {
            MandatoryKind::ResearchProblem => "research problem",
            MandatoryKind::Objective => "objective",
            MandatoryKind::Method => "method",
            MandatoryKind::Result => "result",
            MandatoryKind::Conclusion => "conclusion",
        }
    }

    pub fn from_command(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.command() == name)
    }
}

impl fmt::Display for MandatoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PropertyKind {
    Mandatory { kind: MandatoryKind },
    Custom { prefix: Option<String>, name: String },
}

impl PropertyKind {
    pub fn mandatory(kind: MandatoryKind) -> Self {
        PropertyKind::Mandatory { kind }
    }

    /// Builds a custom kind. An unprefixed name that equals one of the five
    /// mandatory command names yields the mandatory kind instead, so that
    /// `\contribution{method}{..}` and `\method{..}` mean the same thing.
    pub fn custom(prefix: Option<&str>, name: &str) -> Result<Self, ModelError> {
        if !is_valid_property_name(name) {
            return Err(ModelError::InvalidPropertyName(name.to_string()));
        }
        if let Some(p) = prefix {
            if !is_valid_property_name(p) || p.contains(':') {
                return Err(ModelError::InvalidAbbreviation(p.to_string()));
            }
        } else if let Some(kind) = MandatoryKind::from_command(name) {
            return Ok(PropertyKind::Mandatory { kind });
        }
        Ok(PropertyKind::Custom {
            prefix: prefix.map(str::to_string),
            name: name.to_string(),
        })
    }

    pub fn as_mandatory(&self) -> Option<MandatoryKind> {
        match self {
            PropertyKind::Mandatory { kind } => Some(*kind),
            PropertyKind::Custom { .. } => None,
        }
    }

    /// Name without prefix: the command name for mandatory kinds.
    pub fn local_name(&self) -> &str {
        match self {
            PropertyKind::Mandatory { kind } => kind.command(),
            PropertyKind::Custom { name, .. } => name,
        }
    }

    pub fn prefix(&self) -> Option<&str> {
        match self {
            PropertyKind::Custom { prefix, .. } => prefix.as_deref(),
            PropertyKind::Mandatory { .. } => None,
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyKind::Mandatory { kind } => write!(f, "{kind}"),
            PropertyKind::Custom { prefix: Some(p), name } => write!(f, "{p}:{name}"),
            PropertyKind::Custom { prefix: None, name } => f.write_str(name),
        }
    }
}

pub(crate) fn is_valid_property_name(name: &str) -> bool {
    !name.is_empty() && !name.chars().any(|c| c.is_whitespace() || c == '{' || c == '}')
}

/// True when `uri` starts with an RFC 3986 scheme followed by a non-empty remainder.
pub fn is_absolute_uri(uri: &str) -> bool {
    let Some((scheme, rest)) = uri.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    let first_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    first_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && !rest.is_empty()
        && !uri.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityLink {
    uri: String,
    label: Option<String>,
}

impl EntityLink {
    pub fn new(uri: impl Into<String>, label: Option<String>) -> Result<Self, ModelError> {
        let uri = uri.into();
        if !is_absolute_uri(&uri) {
            return Err(ModelError::NotAbsoluteUri(uri));
        }
        if label.as_deref() == Some("") {
            return Err(ModelError::EmptyLabel);
        }
        Ok(EntityLink { uri, label })
    }

    pub fn uri(&self) -> &str {
        &self.uri
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Text shown for the entity: the label, or the URI itself.
    pub fn display_text(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.uri)
    }
}

/// Half-open byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end);
        Span { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PropertyAnnotation {
    pub kind: PropertyKind,
    pub value: String,
    /// Sorted, duplicate-free set of contribution identifiers; never empty.
    pub contributions: BTreeSet<String>,
    pub visible: bool,
    pub link: Option<EntityLink>,
    /// Location in the source; absent for documents read back from XMP.
    pub span: Option<Span>,
}

impl PropertyAnnotation {
    /// A visible, unlinked annotation for the default contribution.
    pub fn new(kind: PropertyKind, value: impl Into<String>) -> Self {
        PropertyAnnotation {
            kind,
            value: value.into(),
            contributions: BTreeSet::from([DEFAULT_CONTRIBUTION.to_string()]),
            visible: true,
            link: None,
            span: None,
        }
    }

    pub fn with_contributions<I, S>(mut self, ids: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: BTreeSet<String> = ids.into_iter().map(Into::into).collect();
        if ids.is_empty() {
            return Err(ModelError::NoContributions);
        }
        if ids.iter().any(String::is_empty) {
            return Err(ModelError::EmptyContributionId);
        }
        self.contributions = ids;
        Ok(self)
    }

    pub fn with_link(mut self, link: EntityLink) -> Self {
        self.link = Some(link);
        self
    }

    pub fn hidden(mut self) -> Self {
        self.visible = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NamespaceDecl {
    pub abbreviation: Option<String>,
    pub uri: String,
    pub property: String,
}

impl NamespaceDecl {
    pub fn new(
        abbreviation: Option<&str>,
        uri: &str,
        property: &str,
    ) -> Result<Self, ModelError> {
        if let Some(a) = abbreviation {
            if !is_valid_property_name(a) || a.contains(':') {
                return Err(ModelError::InvalidAbbreviation(a.to_string()));
            }
        }
        if !is_absolute_uri(uri) {
            return Err(ModelError::NotAbsoluteUri(uri.to_string()));
        }
        if !is_valid_property_name(property) {
            return Err(ModelError::InvalidPropertyName(property.to_string()));
        }
        Ok(NamespaceDecl {
            abbreviation: abbreviation.map(str::to_string),
            uri: uri.to_string(),
            property: property.to_string(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bibliographic {
    pub title: Option<String>,
    pub authors: Vec<String>,
    pub research_field: Option<String>,
}

impl Bibliographic {
    pub fn is_empty(&self) -> bool {
        self.title.is_none() && self.authors.is_empty() && self.research_field.is_none()
    }
}

/// Hex-encoded SHA-256 of a source text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceDigest(String);

impl SourceDigest {
    pub fn of(text: &str) -> Self {
        SourceDigest(hex::encode(Sha256::digest(text.as_bytes())))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotationDocument {
    pub annotations: Vec<PropertyAnnotation>,
    pub namespaces: Vec<NamespaceDecl>,
    pub biblio: Bibliographic,
    pub source_digest: Option<SourceDigest>,
}

impl AnnotationDocument {
    /// Copy with spans, visibility and the source digest dropped: the parts of
    /// a document that do not survive serialization to XMP.
    pub fn without_source_info(&self) -> AnnotationDocument {
        AnnotationDocument {
            annotations: self
                .annotations
                .iter()
                .map(|a| PropertyAnnotation {
                    span: None,
                    visible: true,
                    ..a.clone()
                })
                .collect(),
            namespaces: self.namespaces.clone(),
            biblio: self.biblio.clone(),
            source_digest: None,
        }
    }

    /// Copy with spans and the source digest dropped; visibility is kept.
    pub fn without_spans(&self) -> AnnotationDocument {
        AnnotationDocument {
            annotations: self
                .annotations
                .iter()
                .map(|a| PropertyAnnotation {
                    span: None,
                    ..a.clone()
                })
                .collect(),
            namespaces: self.namespaces.clone(),
            biblio: self.biblio.clone(),
            source_digest: None,
        }
    }

    /// Structural equality ignoring spans, visibility and the digest.
    pub fn same_content(&self, other: &AnnotationDocument) -> bool {
        self.without_source_info() == other.without_source_info()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty() && self.biblio.is_empty()
    }

    /// Namespace URI registered for `abbreviation`, if any.
    pub fn namespace_for(&self, abbreviation: &str) -> Option<&str> {
        self.namespaces
            .iter()
            .find(|d| d.abbreviation.as_deref() == Some(abbreviation))
            .map(|d| d.uri.as_str())
    }

    /// Namespace URI a custom kind serializes under, or `None` for the
    /// toolkit namespace. Unprefixed names use a declaration registered
    /// without abbreviation for that property name, when one exists.
    pub fn resolve_namespace(&self, kind: &PropertyKind) -> Result<Option<&str>, String> {
        match kind {
            PropertyKind::Mandatory { .. } => Ok(None),
            PropertyKind::Custom {
                prefix: Some(p), ..
            } => self.namespace_for(p).map(Some).ok_or_else(|| p.clone()),
            PropertyKind::Custom { prefix: None, name } => Ok(self
                .namespaces
                .iter()
                .find(|d| d.abbreviation.is_none() && d.property == *name)
                .map(|d| d.uri.as_str())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum WarningCode {
    MissingMandatory { kind: MandatoryKind },
    UnknownPrefix { prefix: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Completeness check. Never fails; reports one warning per missing
/// mandatory property in the fixed order, then one per distinct unregistered
/// custom prefix in source order.
pub fn validate(doc: &AnnotationDocument) -> Vec<Warning> {
    let present: BTreeSet<MandatoryKind> = doc
        .annotations
        .iter()
        .filter_map(|a| a.kind.as_mandatory())
        .collect();

    let mut warnings: Vec<Warning> = MandatoryKind::ALL
        .into_iter()
        .filter(|k| !present.contains(k))
        .map(|kind| Warning {
            code: WarningCode::MissingMandatory { kind },
            message: format!(
                "SciKG warning: no \\{} annotation found; the contribution has no {}",
                kind.command(),
                kind.label()
            ),
        })
        .collect();

    let mut seen = BTreeSet::new();
    for annotation in &doc.annotations {
        if let Some(prefix) = annotation.kind.prefix() {
            if doc.namespace_for(prefix).is_none() && seen.insert(prefix.to_string()) {
                warnings.push(Warning {
                    code: WarningCode::UnknownPrefix {
                        prefix: prefix.to_string(),
                    },
                    message: format!(
                        "SciKG warning: property {} uses prefix {prefix:?} which was never registered with \\addmetaproperty",
                        annotation.kind
                    ),
                });
            }
        }
    }
    warnings
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupEntry {
    pub kind: PropertyKind,
    pub value: String,
    pub link: Option<EntityLink>,
}

/// Statements per contribution id, keys sorted, entries in source order.
pub fn group_contributions(doc: &AnnotationDocument) -> BTreeMap<String, Vec<GroupEntry>> {
    let mut groups: BTreeMap<String, Vec<GroupEntry>> = BTreeMap::new();
    for annotation in &doc.annotations {
        for id in &annotation.contributions {
            groups.entry(id.clone()).or_default().push(GroupEntry {
                kind: annotation.kind.clone(),
                value: annotation.value.clone(),
                link: annotation.link.clone(),
            });
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mandatory(kind: MandatoryKind, value: &str) -> PropertyAnnotation {
        PropertyAnnotation::new(PropertyKind::mandatory(kind), value)
    }

    fn missing_count(warnings: &[Warning]) -> usize {
        warnings
            .iter()
            .filter(|w| matches!(w.code, WarningCode::MissingMandatory { .. }))
            .count()
    }

    #[test]
    fn empty_document_misses_all_five_in_fixed_order() {
        let warnings = validate(&AnnotationDocument::default());
        let kinds: Vec<_> = warnings
            .iter()
            .map(|w| match &w.code {
                WarningCode::MissingMandatory { kind } => *kind,
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        assert_eq!(kinds, MandatoryKind::ALL);
    }

    #[test]
    fn complete_document_has_no_warnings() {
        let doc = AnnotationDocument {
            annotations: MandatoryKind::ALL
                .into_iter()
                .map(|k| mandatory(k, "x"))
                .collect(),
            ..Default::default()
        };
        assert!(validate(&doc).is_empty());
    }

    #[test]
    fn only_result_leaves_four_missing() {
        let doc = AnnotationDocument {
            annotations: vec![mandatory(MandatoryKind::Result, "r")],
            ..Default::default()
        };
        let warnings = validate(&doc);
        assert_eq!(warnings.len(), 4);
        assert!(!warnings.iter().any(|w| w.code
            == WarningCode::MissingMandatory {
                kind: MandatoryKind::Result
            }));
    }

    #[test]
    fn every_presence_subset_counts_correctly() {
        for mask in 0u32..32 {
            let annotations = MandatoryKind::ALL
                .into_iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, k)| mandatory(k, "v"))
                .collect();
            let doc = AnnotationDocument {
                annotations,
                ..Default::default()
            };
            assert_eq!(
                missing_count(&validate(&doc)),
                5 - mask.count_ones() as usize
            );
        }
    }

    #[test]
    fn presence_counts_across_contributions() {
        let rp = mandatory(MandatoryKind::ResearchProblem, "a")
            .with_contributions(["2"])
            .unwrap();
        let doc = AnnotationDocument {
            annotations: vec![rp],
            ..Default::default()
        };
        assert_eq!(missing_count(&validate(&doc)), 4);
    }

    #[test]
    fn unknown_prefix_reported_once_after_mandatory() {
        let kind = PropertyKind::custom(Some("foo"), "bar").unwrap();
        let doc = AnnotationDocument {
            annotations: vec![
                PropertyAnnotation::new(kind.clone(), "1"),
                PropertyAnnotation::new(kind, "2"),
            ],
            ..Default::default()
        };
        let warnings = validate(&doc);
        assert_eq!(warnings.len(), 6);
        assert_eq!(
            warnings[5].code,
            WarningCode::UnknownPrefix {
                prefix: "foo".into()
            }
        );
    }

    #[test]
    fn shared_method_lands_in_both_groups() {
        let m = mandatory(MandatoryKind::Method, "X")
            .with_contributions(["1", "2"])
            .unwrap();
        let doc = AnnotationDocument {
            annotations: vec![m],
            ..Default::default()
        };
        let groups = group_contributions(&doc);
        assert_eq!(groups.keys().collect::<Vec<_>>(), ["1", "2"]);
        for entries in groups.values() {
            assert_eq!(entries.len(), 1);
            assert_eq!(entries[0].value, "X");
            assert_eq!(entries[0].kind.as_mandatory(), Some(MandatoryKind::Method));
        }
    }

    #[test]
    fn separate_research_problems_stay_separate() {
        let a = mandatory(MandatoryKind::ResearchProblem, "A");
        let b = mandatory(MandatoryKind::ResearchProblem, "B")
            .with_contributions(["2"])
            .unwrap();
        let doc = AnnotationDocument {
            annotations: vec![a, b],
            ..Default::default()
        };
        let groups = group_contributions(&doc);
        assert_eq!(groups["1"].len(), 1);
        assert_eq!(groups["1"][0].value, "A");
        assert_eq!(groups["2"][0].value, "B");
        assert!(group_contributions(&AnnotationDocument::default()).is_empty());
    }

    #[test]
    fn custom_kind_rules() {
        assert!(PropertyKind::custom(None, "").is_err());
        assert!(PropertyKind::custom(None, "p value").is_err());
        assert!(PropertyKind::custom(None, "a{b").is_err());
        assert_eq!(
            PropertyKind::custom(None, "method").unwrap(),
            PropertyKind::mandatory(MandatoryKind::Method)
        );
        assert!(matches!(
            PropertyKind::custom(Some("amo"), "method").unwrap(),
            PropertyKind::Custom { .. }
        ));
    }

    #[test]
    fn uri_checks() {
        assert!(is_absolute_uri("https://www.orkg.org/orkg/resource/R12259"));
        assert!(is_absolute_uri("urn:isbn:123"));
        assert!(!is_absolute_uri("www.orkg.org"));
        assert!(!is_absolute_uri("1http://x"));
        assert!(!is_absolute_uri("http:"));
        assert!(EntityLink::new("x", None).is_err());
        assert!(EntityLink::new("http://x", Some(String::new())).is_err());
    }

    #[test]
    fn contributions_are_deduplicated_and_non_empty() {
        let a = mandatory(MandatoryKind::Method, "m");
        assert!(a.clone().with_contributions(Vec::<String>::new()).is_err());
        assert!(a.clone().with_contributions([""]).is_err());
        let a = a.with_contributions(["2", "1", "2"]).unwrap();
        assert_eq!(a.contributions.iter().collect::<Vec<_>>(), ["1", "2"]);
    }
}
