//! Seeded random documents rendered to annotated source.
//!
//! Every [`Generated`] pairs the source text with the document it must parse
//! to. Values carry a serial token so no value is a substring of another,
//! which lets stripped-output checks look for values verbatim.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scikg_core::{
    AnnotationDocument, Bibliographic, EntityLink, MandatoryKind, NamespaceDecl,
    PropertyAnnotation, PropertyKind,
};

#[derive(Debug, Clone)]
pub struct Generated {
    pub seed: u64,
    pub source: String,
    pub expected: AnnotationDocument,
}

const WORDS: &[&str] = &[
    "graph", "neural", "sampling", "cohort", "entropy", "Zürich", "naïve", "μ-law", "a<b", "R&D",
    "\"quoted\"", "it's", "50/50", "x>y", "corpus", "baseline", "2.5", "sinusitis", "protein",
];
const PROSE: &[&str] = &[
    "We", "study", "the", "problem", "and", "show", "that", "it", "holds", "in", "practice,",
    "which", "was", "unexpected.", "Prior", "work",
];
const ABBREVIATIONS: &[&str] = &["amo", "patent", "stat", "deo", "ex"];
const NS_PROPERTIES: &[&str] = &["claim", "evidence", "dataset", "sample-size"];
const TOOLKIT_NAMES: &[&str] = &["p-value", "accuracy", "f1", "dataset", "runtime"];
const IDS: &[&str] = &["1", "2", "3", "c4", "alpha"];

struct Gen {
    rng: ChaCha8Rng,
    serial: u32,
}

impl Gen {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn token(&mut self) -> String {
        self.serial += 1;
        format!("t{}q", self.serial)
    }

    /// Returns (source rendering, expected value text).
    fn value(&mut self) -> (String, String) {
        let n = self.rng.random_range(0..4);
        let mut words: Vec<String> = (0..n)
            .map(|_| WORDS.choose(&mut self.rng).unwrap().to_string())
            .collect();
        let at = self.rng.random_range(0..=words.len());
        let token = self.token();
        words.insert(at, token);
        if self.chance(0.15) {
            words.push(r"12\%".to_string());
        }

        let mut source = String::new();
        for (i, w) in words.iter().enumerate() {
            if i > 0 {
                source.push_str(match self.rng.random_range(0..10) {
                    0 => "~",
                    1 => "\n    ",
                    2 => "  ",
                    _ => " ",
                });
            }
            match self.rng.random_range(0..12) {
                0 => source.push_str(&format!(r"\emph{{{w}}}")),
                1 => source.push_str(&format!("{{{w}}}")),
                _ => source.push_str(w),
            }
        }
        (source, words.join(" "))
    }

    fn label(&mut self) -> String {
        let (_, text) = self.value();
        text
    }

    fn contributions(&mut self) -> (String, Vec<String>) {
        if self.chance(0.5) {
            return (String::new(), vec!["1".into()]);
        }
        let mut ids: Vec<&str> = IDS.to_vec();
        ids.shuffle(&mut self.rng);
        ids.truncate(self.rng.random_range(1..=3));
        let sep = if self.chance(0.5) { "," } else { ", " };
        let rendered = format!("[{}]", ids.join(sep));
        (rendered, ids.into_iter().map(String::from).collect())
    }

    fn prose(&mut self) -> String {
        let n = self.rng.random_range(0..6);
        let mut out: Vec<String> = (0..n)
            .map(|_| PROSE.choose(&mut self.rng).unwrap().to_string())
            .collect();
        match self.rng.random_range(0..14) {
            0 => out.push("% \\method{commented out}\n".into()),
            1 => out.push("\n\\begin{verbatim}\n\\result{not parsed}\n\\end{verbatim}\n".into()),
            2 => out.push("\\verb|\\objective{x}|".into()),
            3 => out.push("$x^2$".into()),
            _ => {}
        }
        out.join(" ")
    }
}

pub fn generate(seed: u64) -> Generated {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        serial: 0,
    };
    let mut source = String::new();
    let mut doc = AnnotationDocument::default();

    let mut abbrevs: Vec<&str> = ABBREVIATIONS.to_vec();
    abbrevs.shuffle(&mut g.rng);
    let mut bare_properties: Vec<&str> = NS_PROPERTIES.to_vec();
    bare_properties.shuffle(&mut g.rng);
    for i in 0..g.rng.random_range(0..4) {
        let uri = format!("https://ns{i}.example.org/onto/{seed}#");
        let property = *NS_PROPERTIES.choose(&mut g.rng).unwrap();
        if g.chance(0.3) {
            let Some(property) = bare_properties.pop() else { continue };
            source.push_str(&format!("\\addmetaproperty[{uri}]{{{property}}}\n"));
            doc.namespaces.push(NamespaceDecl::new(None, &uri, property).unwrap());
        } else {
            let abbrev = abbrevs.pop().unwrap();
            source.push_str(&format!("\\addmetaproperty[{abbrev}, {uri}]{{{property}}}\n"));
            doc.namespaces.push(NamespaceDecl::new(Some(abbrev), &uri, property).unwrap());
        }
    }

    let mut biblio = Bibliographic::default();
    if g.chance(0.5) {
        let (rendered, title) = g.value();
        source.push_str(&format!("\\title{{\\metatitle{{{rendered}}}}}\n"));
        biblio.title = Some(title);
    }
    let authors = g.rng.random_range(0..4);
    for i in 0..authors {
        let name = format!("Author {} {}", i + 1, g.token());
        source.push_str(&format!("\\metaauthor{{{name}}}\n"));
        biblio.authors.push(name);
    }
    if g.chance(0.5) {
        let field = format!("field {}", g.token());
        source.push_str(&format!("\\researchfield{{{field}}}\n"));
        biblio.research_field = Some(field);
    }
    doc.biblio = biblio;

    for _ in 0..g.rng.random_range(0..9) {
        source.push_str(&g.prose());
        source.push(' ');

        let star = g.chance(0.25);
        let star_mark = if star { "*" } else { "" };
        let (ids_rendered, ids) = g.contributions();

        let (body, value, link) = if g.chance(0.2) {
            let uri = if g.chance(0.5) {
                format!("https://www.orkg.org/orkg/resource/R{}", g.rng.random_range(1..100_000))
            } else {
                format!("https://example.org/entity/{}", g.token())
            };
            if g.chance(0.7) {
                let label = g.label();
                let link = EntityLink::new(&uri, Some(label.clone())).unwrap();
                (format!("\\uri{{{uri}}}{{{label}}}"), label, Some(link))
            } else {
                let link = EntityLink::new(&uri, None).unwrap();
                (format!("\\uri{{{uri}}}"), uri, Some(link))
            }
        } else {
            let (rendered, value) = g.value();
            (rendered, value, None)
        };

        let roll = g.rng.random_range(0..10);
        let kind = if roll < 6 {
            let kind = *MandatoryKind::ALL.choose(&mut g.rng).unwrap();
            source.push_str(&format!("\\{}{star_mark}{ids_rendered}{{{body}}}", kind.command()));
            PropertyKind::mandatory(kind)
        } else {
            let prefixed: Vec<&NamespaceDecl> =
                doc.namespaces.iter().filter(|d| d.abbreviation.is_some()).collect();
            let (prefix, name) = match prefixed.choose(&mut g.rng) {
                Some(decl) if roll < 8 => (decl.abbreviation.clone(), decl.property.clone()),
                _ => (None, TOOLKIT_NAMES.choose(&mut g.rng).unwrap().to_string()),
            };
            let qualified = match &prefix {
                Some(p) => format!("{p}:{name}"),
                None => name.clone(),
            };
            source.push_str(&format!("\\contribution{star_mark}{ids_rendered}{{{qualified}}}{{{body}}}"));
            PropertyKind::custom(prefix.as_deref(), &name).unwrap()
        };
        source.push(' ');
        source.push_str(&g.prose());
        source.push('\n');

        let mut annotation = PropertyAnnotation::new(kind, value)
            .with_contributions(ids)
            .unwrap();
        if let Some(link) = link {
            annotation = annotation.with_link(link);
        }
        if star {
            annotation = annotation.hidden();
        }
        doc.annotations.push(annotation);
    }

    Generated {
        seed,
        source,
        expected: doc,
    }
}

/// `count` documents from consecutive seeds starting at `first_seed`.
pub fn generate_many(first_seed: u64, count: usize) -> Vec<Generated> {
    (first_seed..first_seed + count as u64).map(generate).collect()
}
