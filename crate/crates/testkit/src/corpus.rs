//! The annotated listings and a sample abstract, with the documents they are
//! expected to parse to.

use scikg_core::{
    AnnotationDocument, Bibliographic, EntityLink, MandatoryKind, NamespaceDecl,
    PropertyAnnotation, PropertyKind,
};

pub const ENTITY_LINKING: &str = r"The role of \researchproblem{\uri{https://www.orkg.org/orkg/resource/R12259}{antibiotic therapy}} in managing acute bacterial sinusitis (ABS) in children is controversial...
";

pub const BIBLIOGRAPHIC: &str = r"\title{\metatitle{Effectiveness of Amoxicillin/Clavulanate Potassium in the Treatment of Acute Bacterial Sinusitis in Children.}}
\author{\metaauthor{Ellen R. Wald} \and \metaauthor{David Nash} \and \metaauthor{Jens Eickhoff}}
\researchfield{pharmacology}
";

pub const CUSTOM_PROPERTIES: &str = r"\addmetaproperty[amo, http://purl.org/spar/amo#]{claim}
\addmetaproperty[patent, https://other.type/of/ontology]{claim}
...\contribution{amo:claim}{The earth is round}.
Our patent has the following claim:
\contribution{patent:claim}{An apparatus to achieve something new.}...
";

pub const INVISIBLE_MARKUP: &str = r"...the p-value was 0.01\% higher \contribution*{p-value}{0.06} than in the earlier experiment...
";

/// A short annotated abstract covering every mandatory property, the
/// bibliographic commands, an entity link and a custom property.
pub const SAMPLE_ABSTRACT: &str = r"\documentclass{article}
\usepackage{scikgtex}
\title{\metatitle{Amoxicillin for Acute Sinusitis in Children}}
\author{\metaauthor{Ellen R. Wald} \and \metaauthor{David Nash}}
\researchfield{pharmacology}
\begin{document}
\maketitle
\begin{abstract}
The role of \researchproblem{\uri{https://www.orkg.org/orkg/resource/R12259}{antibiotic therapy}}
in managing acute bacterial sinusitis in children is controversial.
The purpose of this study was to \objective{determine the efficacy of high-dose amoxicillin}.
We conducted a \method{randomized, double-blind, placebo-controlled trial}
in which \result{children receiving the antibiotic were more likely to be cured}
at a significance level of \contribution*{p-value}{0.06}.
We conclude that \conclusion{antibiotic therapy is effective for sinusitis}.
\end{abstract}
\end{document}
";

pub struct Listing {
    pub name: &'static str,
    pub source: &'static str,
    pub expected: fn() -> AnnotationDocument,
}

pub const LISTINGS: [Listing; 5] = [
    Listing { name: "entity linking", source: ENTITY_LINKING, expected: entity_linking },
    Listing { name: "bibliographic metadata", source: BIBLIOGRAPHIC, expected: bibliographic },
    Listing { name: "custom properties", source: CUSTOM_PROPERTIES, expected: custom_properties },
    Listing { name: "invisible markup", source: INVISIBLE_MARKUP, expected: invisible_markup },
    Listing { name: "sample abstract", source: SAMPLE_ABSTRACT, expected: sample_abstract },
];

fn mandatory(kind: MandatoryKind, value: &str) -> PropertyAnnotation {
    PropertyAnnotation::new(PropertyKind::mandatory(kind), value)
}

fn custom(prefix: Option<&str>, name: &str, value: &str) -> PropertyAnnotation {
    PropertyAnnotation::new(PropertyKind::custom(prefix, name).unwrap(), value)
}

fn r12259() -> EntityLink {
    EntityLink::new(
        "https://www.orkg.org/orkg/resource/R12259",
        Some("antibiotic therapy".into()),
    )
    .unwrap()
}

pub fn entity_linking() -> AnnotationDocument {
    AnnotationDocument {
        annotations: vec![mandatory(MandatoryKind::ResearchProblem, "antibiotic therapy").with_link(r12259())],
        ..Default::default()
    }
}

pub fn bibliographic() -> AnnotationDocument {
    AnnotationDocument {
        biblio: Bibliographic {
            title: Some(
                "Effectiveness of Amoxicillin/Clavulanate Potassium in the Treatment of Acute Bacterial Sinusitis in Children."
                    .into(),
            ),
            authors: vec!["Ellen R. Wald".into(), "David Nash".into(), "Jens Eickhoff".into()],
            research_field: Some("pharmacology".into()),
        },
        ..Default::default()
    }
}

pub fn custom_properties() -> AnnotationDocument {
    AnnotationDocument {
        annotations: vec![
            custom(Some("amo"), "claim", "The earth is round"),
            custom(Some("patent"), "claim", "An apparatus to achieve something new."),
        ],
        namespaces: vec![
            NamespaceDecl::new(Some("amo"), "http://purl.org/spar/amo#", "claim").unwrap(),
            NamespaceDecl::new(Some("patent"), "https://other.type/of/ontology", "claim").unwrap(),
        ],
        ..Default::default()
    }
}

pub fn invisible_markup() -> AnnotationDocument {
    AnnotationDocument {
        annotations: vec![custom(None, "p-value", "0.06").hidden()],
        ..Default::default()
    }
}

pub fn sample_abstract() -> AnnotationDocument {
    AnnotationDocument {
        annotations: vec![
            mandatory(MandatoryKind::ResearchProblem, "antibiotic therapy").with_link(r12259()),
            mandatory(MandatoryKind::Objective, "determine the efficacy of high-dose amoxicillin"),
            mandatory(MandatoryKind::Method, "randomized, double-blind, placebo-controlled trial"),
            mandatory(MandatoryKind::Result, "children receiving the antibiotic were more likely to be cured"),
            custom(None, "p-value", "0.06").hidden(),
            mandatory(MandatoryKind::Conclusion, "antibiotic therapy is effective for sinusitis"),
        ],
        biblio: Bibliographic {
            title: Some("Amoxicillin for Acute Sinusitis in Children".into()),
            authors: vec!["Ellen R. Wald".into(), "David Nash".into()],
            research_field: Some("pharmacology".into()),
        },
        ..Default::default()
    }
}

/// Source containing exactly the mandatory kinds in `present`, one
/// annotation each, in the fixed order.
pub fn mandatory_subset_source(present: &[MandatoryKind]) -> String {
    MandatoryKind::ALL
        .iter()
        .filter(|k| present.contains(k))
        .map(|k| format!("Some text \\{}{{{} value}}.\n", k.command(), k.label()))
        .collect()
}
