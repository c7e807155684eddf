//! XMP packet codec for annotation documents.
//!
//! Packet layout (all toolkit elements use the configurable toolkit
//! namespace, `orkgp` by default):
//!
//! ```text
//! rdf:Description rdf:about=""
//!   dc:title/rdf:Alt/rdf:li          title
//!   dc:creator/rdf:Seq/rdf:li*       authors, in order
//!   orkgp:researchfield              research field
//!   orkgp:customproperties/rdf:Seq   one rdf:li per \addmetaproperty
//!   orkgp:contributions/rdf:Seq      one rdf:Description per contribution id
//!     <prefix:name orkgp:annotation="i" [rdf:resource="uri"]>value</prefix:name>
//! ```
//!
//! `orkgp:annotation` is the index of the annotation in the source document;
//! it lets an annotation shared by several contributions be read back as one.
//! A linked annotation without label is written as an empty element.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::Event;
use quick_xml::name::{Namespace, ResolveResult};
use quick_xml::NsReader;
use thiserror::Error;

use crate::model::{
    AnnotationDocument, Bibliographic, EntityLink, MandatoryKind, NamespaceDecl,
    PropertyAnnotation, PropertyKind, DEFAULT_CONTRIBUTION,
};

pub const DEFAULT_TOOLKIT_NAMESPACE: &str = "https://orkg.org/property/";
pub const TOOLKIT_PREFIX: &str = "orkgp";

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const DC_NS: &str = "http://purl.org/dc/elements/1.1/";
pub const X_NS: &str = "adobe:ns:meta/";
const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";

const PACKET_HEADER: &str = "<?xpacket begin=\"\u{feff}\" id=\"W5M0MpCehiHzreSzNTczkc9d\"?>";
const PACKET_TRAILER: &str = "<?xpacket end=\"w\"?>";

const RESERVED_PREFIXES: [&str; 5] = ["x", "rdf", "dc", "xml", TOOLKIT_PREFIX];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XmpError {
    #[error("malformed XMP packet: {0}")]
    MalformedPacket(String),
    #[error("packet carries no annotation metadata")]
    NotSciKG,
    #[error("prefix {0:?} is not registered with \\addmetaproperty")]
    UnresolvedPrefix(String),
    #[error("property name {0:?} cannot be used as an XML element name")]
    InvalidElementName(String),
    #[error("{0:?} contains a character that XML 1.0 cannot represent")]
    UnrepresentableCharacter(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmpOptions {
    pub toolkit_namespace: String,
}

impl Default for XmpOptions {
    fn default() -> Self {
        XmpOptions {
            toolkit_namespace: DEFAULT_TOOLKIT_NAMESPACE.to_string(),
        }
    }
}

/// Serialized packet bytes and the prefix table declared in them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmpPacket {
    bytes: Vec<u8>,
    namespaces: BTreeMap<String, String>,
}

impl XmpPacket {
    /// Wraps existing packet bytes, reading their namespace declarations.
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, XmpError> {
        let dom = Dom::parse(&bytes)?;
        Ok(XmpPacket {
            bytes,
            namespaces: dom.declarations,
        })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Packet text; packets are always UTF-8.
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bytes).unwrap_or_default()
    }

    pub fn namespaces(&self) -> &BTreeMap<String, String> {
        &self.namespaces
    }
}

pub fn serialize_xmp(doc: &AnnotationDocument) -> Result<XmpPacket, XmpError> {
    serialize_xmp_with(doc, &XmpOptions::default())
}

pub fn parse_xmp(packet: &XmpPacket) -> Result<AnnotationDocument, XmpError> {
    parse_xmp_with(packet, &XmpOptions::default())
}

pub(crate) fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '-' | '.' | '_' | '\u{b7}'))
}

fn is_xml_char(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r') || (c >= ' ' && c != '\u{fffe}' && c != '\u{ffff}')
}

fn check_chars(s: &str) -> Result<(), XmpError> {
    if s.chars().all(is_xml_char) {
        Ok(())
    } else {
        Err(XmpError::UnrepresentableCharacter(s.to_string()))
    }
}

fn escape_text(s: &str) -> Result<String, XmpError> {
    check_chars(s)?;
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    Ok(out)
}

fn escape_attr(s: &str) -> Result<String, XmpError> {
    check_chars(s)?;
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    Ok(out)
}

/// Prefix allocation for the element namespaces of one packet.
struct Prefixes {
    by_prefix: BTreeMap<String, String>,
    /// (namespace URI, requested abbreviation) -> prefix
    bindings: BTreeMap<(String, Option<String>), String>,
}

impl Prefixes {
    fn new(toolkit: &str) -> Self {
        let mut by_prefix = BTreeMap::new();
        by_prefix.insert(TOOLKIT_PREFIX.to_string(), toolkit.to_string());
        Prefixes {
            by_prefix,
            bindings: BTreeMap::new(),
        }
    }

    fn fixed(uri: &str) -> Option<&'static str> {
        match uri {
            RDF_NS => Some("rdf"),
            DC_NS => Some("dc"),
            X_NS => Some("x"),
            _ => None,
        }
    }

    fn bind(&mut self, uri: &str, abbreviation: Option<&str>) -> String {
        let key = (uri.to_string(), abbreviation.map(str::to_string));
        if let Some(p) = self.bindings.get(&key) {
            return p.clone();
        }
        let prefix = if let Some(p) = Self::fixed(uri) {
            p.to_string()
        } else {
            let requested = abbreviation.filter(|a| {
                is_ncname(a)
                    && !RESERVED_PREFIXES.contains(a)
                    && !a.to_ascii_lowercase().starts_with("xml")
                    && self.by_prefix.get(*a).is_none_or(|u| u == uri)
            });
            match requested {
                Some(a) => a.to_string(),
                None if abbreviation.is_none() => self
                    .by_prefix
                    .iter()
                    .find(|(_, u)| *u == uri)
                    .map(|(p, _)| p.clone())
                    .unwrap_or_else(|| self.fresh()),
                None => self.fresh(),
            }
        };
        if Self::fixed(uri).is_none() {
            self.by_prefix.insert(prefix.clone(), uri.to_string());
        }
        self.bindings.insert(key, prefix.clone());
        prefix
    }

    fn fresh(&self) -> String {
        (1..)
            .map(|n| format!("ns{n}"))
            .find(|p| !self.by_prefix.contains_key(p))
            .expect("unbounded")
    }
}

struct Writer {
    out: String,
}

impl Writer {
    fn line(&mut self, depth: usize, s: &str) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }
}

/// Writes the canonical packet: fixed element and attribute order, two-space
/// indentation and namespace declarations sorted by prefix.
pub fn serialize_xmp_with(
    doc: &AnnotationDocument,
    options: &XmpOptions,
) -> Result<XmpPacket, XmpError> {
    let toolkit = options.toolkit_namespace.as_str();
    let mut prefixes = Prefixes::new(toolkit);

    // Element name of every annotation, in document order.
    let mut names = Vec::with_capacity(doc.annotations.len());
    for annotation in &doc.annotations {
        let local = annotation.kind.local_name();
        if !is_ncname(local) {
            return Err(XmpError::InvalidElementName(local.to_string()));
        }
        let ns = doc
            .resolve_namespace(&annotation.kind)
            .map_err(XmpError::UnresolvedPrefix)?;
        let prefix = match ns {
            None => TOOLKIT_PREFIX.to_string(),
            Some(uri) => prefixes.bind(uri, annotation.kind.prefix()),
        };
        names.push(format!("{prefix}:{local}"));
    }

    let biblio = &doc.biblio;
    let uses_dc = biblio.title.is_some() || !biblio.authors.is_empty();
    let mut declared: BTreeMap<String, String> = prefixes.by_prefix.clone();
    if uses_dc {
        declared.insert("dc".into(), DC_NS.into());
    }
    for (uri, _) in prefixes.bindings.keys() {
        if let Some(p) = Prefixes::fixed(uri) {
            declared.insert(p.into(), uri.clone());
        }
    }
    // rdf is declared on rdf:RDF, x on x:xmpmeta.
    declared.remove("rdf");
    declared.remove("x");

    let mut w = Writer { out: String::new() };
    w.line(0, PACKET_HEADER);
    w.line(0, &format!("<x:xmpmeta xmlns:x=\"{X_NS}\">"));
    w.line(1, &format!("<rdf:RDF xmlns:rdf=\"{RDF_NS}\">"));

    let mut open = String::from("<rdf:Description rdf:about=\"\"");
    for (prefix, uri) in &declared {
        write!(open, " xmlns:{prefix}=\"{}\"", escape_attr(uri)?).unwrap();
    }
    let has_body = uses_dc
        || biblio.research_field.is_some()
        || !doc.namespaces.is_empty()
        || !doc.annotations.is_empty();
    if !has_body {
        open.push_str("/>");
        w.line(2, &open);
    } else {
        open.push('>');
        w.line(2, &open);
        write_biblio(&mut w, biblio)?;
        write_declarations(&mut w, &doc.namespaces)?;
        write_contributions(&mut w, doc, &names)?;
        w.line(2, "</rdf:Description>");
    }
    w.line(1, "</rdf:RDF>");
    w.line(0, "</x:xmpmeta>");
    w.out.push_str(PACKET_TRAILER);

    let mut namespaces = declared;
    namespaces.insert("rdf".into(), RDF_NS.into());
    namespaces.insert("x".into(), X_NS.into());
    Ok(XmpPacket {
        bytes: w.out.into_bytes(),
        namespaces,
    })
}

fn write_biblio(w: &mut Writer, biblio: &Bibliographic) -> Result<(), XmpError> {
    if let Some(title) = &biblio.title {
        w.line(3, "<dc:title>");
        w.line(4, "<rdf:Alt>");
        w.line(
            5,
            &format!("<rdf:li xml:lang=\"x-default\">{}</rdf:li>", escape_text(title)?),
        );
        w.line(4, "</rdf:Alt>");
        w.line(3, "</dc:title>");
    }
    if !biblio.authors.is_empty() {
        w.line(3, "<dc:creator>");
        w.line(4, "<rdf:Seq>");
        for author in &biblio.authors {
            w.line(5, &format!("<rdf:li>{}</rdf:li>", escape_text(author)?));
        }
        w.line(4, "</rdf:Seq>");
        w.line(3, "</dc:creator>");
    }
    if let Some(field) = &biblio.research_field {
        w.line(
            3,
            &format!("<{TOOLKIT_PREFIX}:researchfield>{}</{TOOLKIT_PREFIX}:researchfield>", escape_text(field)?),
        );
    }
    Ok(())
}

fn write_declarations(w: &mut Writer, decls: &[NamespaceDecl]) -> Result<(), XmpError> {
    if decls.is_empty() {
        return Ok(());
    }
    let t = TOOLKIT_PREFIX;
    w.line(3, &format!("<{t}:customproperties>"));
    w.line(4, "<rdf:Seq>");
    for decl in decls {
        w.line(5, "<rdf:li rdf:parseType=\"Resource\">");
        if let Some(a) = &decl.abbreviation {
            w.line(6, &format!("<{t}:abbreviation>{}</{t}:abbreviation>", escape_text(a)?));
        }
        w.line(6, &format!("<{t}:namespace>{}</{t}:namespace>", escape_text(&decl.uri)?));
        w.line(6, &format!("<{t}:property>{}</{t}:property>", escape_text(&decl.property)?));
        w.line(5, "</rdf:li>");
    }
    w.line(4, "</rdf:Seq>");
    w.line(3, &format!("</{t}:customproperties>"));
    Ok(())
}

fn write_contributions(
    w: &mut Writer,
    doc: &AnnotationDocument,
    names: &[String],
) -> Result<(), XmpError> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (index, annotation) in doc.annotations.iter().enumerate() {
        for id in &annotation.contributions {
            groups.entry(id.as_str()).or_default().push(index);
        }
    }
    if groups.is_empty() {
        return Ok(());
    }
    let t = TOOLKIT_PREFIX;
    w.line(3, &format!("<{t}:contributions>"));
    w.line(4, "<rdf:Seq>");
    for (id, members) in groups {
        w.line(5, "<rdf:li>");
        w.line(6, &format!("<rdf:Description {t}:contribution=\"{}\">", escape_attr(id)?));
        for index in members {
            let annotation = &doc.annotations[index];
            let name = &names[index];
            let mut element = format!("<{name} {t}:annotation=\"{index}\"");
            match &annotation.link {
                Some(link) => {
                    write!(element, " rdf:resource=\"{}\"", escape_attr(link.uri())?).unwrap();
                    match link.label() {
                        Some(label) => write!(element, ">{}</{name}>", escape_text(label)?).unwrap(),
                        None => element.push_str("/>"),
                    }
                }
                None => {
                    write!(element, ">{}</{name}>", escape_text(&annotation.value)?).unwrap()
                }
            }
            w.line(7, &element);
        }
        w.line(6, "</rdf:Description>");
        w.line(5, "</rdf:li>");
    }
    w.line(4, "</rdf:Seq>");
    w.line(3, &format!("</{t}:contributions>"));
    Ok(())
}

// ---------------------------------------------------------------------------
// Reading

#[derive(Debug, Clone)]
struct Attr {
    ns: Option<String>,
    local: String,
    value: String,
}

#[derive(Debug, Clone)]
enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone)]
struct Element {
    ns: Option<String>,
    prefix: Option<String>,
    local: String,
    attrs: Vec<Attr>,
    children: Vec<Node>,
}

impl Element {
    fn is(&self, ns: &str, local: &str) -> bool {
        self.ns.as_deref() == Some(ns) && self.local == local
    }

    fn attr(&self, ns: &str, local: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|a| a.ns.as_deref() == Some(ns) && a.local == local)
            .map(|a| a.value.as_str())
    }

    fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    fn child(&self, ns: &str, local: &str) -> Option<&Element> {
        self.elements().find(|e| e.is(ns, local))
    }

    fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }

    fn push_text(&mut self, text: &str) {
        if let Some(Node::Text(last)) = self.children.last_mut() {
            last.push_str(text);
        } else {
            self.children.push(Node::Text(text.to_string()));
        }
    }

    fn uses_namespace(&self, ns: &str) -> bool {
        self.ns.as_deref() == Some(ns)
            || self.attrs.iter().any(|a| a.ns.as_deref() == Some(ns))
            || self.elements().any(|e| e.uses_namespace(ns))
    }
}

struct Dom {
    root: Element,
    declarations: BTreeMap<String, String>,
}

fn malformed(detail: impl std::fmt::Display) -> XmpError {
    XmpError::MalformedPacket(detail.to_string())
}

fn resolved_ns(res: ResolveResult<'_>) -> Result<Option<String>, XmpError> {
    match res {
        ResolveResult::Bound(Namespace(ns)) => Ok(Some(String::from_utf8_lossy(ns).into_owned())),
        ResolveResult::Unbound => Ok(None),
        ResolveResult::Unknown(p) => Err(malformed(format!(
            "undeclared prefix {:?}",
            String::from_utf8_lossy(&p)
        ))),
    }
}

impl Dom {
    fn parse(bytes: &[u8]) -> Result<Dom, XmpError> {
        let text = std::str::from_utf8(bytes).map_err(|_| malformed("packet is not UTF-8"))?;
        let mut reader = NsReader::from_str(text);
        let mut declarations = BTreeMap::new();
        let mut stack: Vec<Element> = Vec::new();
        let mut roots: Vec<Element> = Vec::new();

        loop {
            let (res, event) = reader.read_resolved_event().map_err(malformed)?;
            let ns = match &event {
                Event::Start(_) | Event::Empty(_) => resolved_ns(res)?,
                _ => None,
            };
            match event {
                Event::Start(ref e) | Event::Empty(ref e) => {
                    let mut attrs = Vec::new();
                    for attr in e.attributes() {
                        let attr = attr.map_err(malformed)?;
                        let key = attr.key;
                        let value = attr
                            .decode_and_unescape_value(reader.decoder())
                            .map_err(malformed)?
                            .into_owned();
                        if let Some(prefix) = key.as_namespace_binding() {
                            if let quick_xml::name::PrefixDeclaration::Named(p) = prefix {
                                declarations
                                    .entry(String::from_utf8_lossy(p).into_owned())
                                    .or_insert(value);
                            }
                            continue;
                        }
                        let (attr_res, local) = reader.resolve_attribute(key);
                        let attr_ns = if key.prefix().is_some_and(|p| p.as_ref() == b"xml") {
                            Some(XML_NS.to_string())
                        } else {
                            resolved_ns(attr_res)?
                        };
                        attrs.push(Attr {
                            ns: attr_ns,
                            local: String::from_utf8_lossy(local.as_ref()).into_owned(),
                            value,
                        });
                    }
                    let name = e.name();
                    let element = Element {
                        ns,
                        prefix: name
                            .prefix()
                            .map(|p| String::from_utf8_lossy(p.as_ref()).into_owned()),
                        local: String::from_utf8_lossy(name.local_name().as_ref()).into_owned(),
                        attrs,
                        children: Vec::new(),
                    };
                    if matches!(event, Event::Start(_)) {
                        stack.push(element);
                    } else {
                        attach(&mut stack, &mut roots, element);
                    }
                }
                Event::End(_) => {
                    let element = stack.pop().ok_or_else(|| malformed("unexpected end tag"))?;
                    attach(&mut stack, &mut roots, element);
                }
                Event::Text(t) => {
                    let content = t.xml_content().map_err(malformed)?;
                    push_text(&mut stack, &content)?;
                }
                Event::CData(t) => {
                    let content = t.xml_content().map_err(malformed)?;
                    push_text(&mut stack, &content)?;
                }
                Event::GeneralRef(r) => {
                    let resolved = match r.resolve_char_ref().map_err(malformed)? {
                        Some(c) => c.to_string(),
                        None => {
                            let name = r.decode().map_err(malformed)?;
                            resolve_predefined_entity(&name)
                                .ok_or_else(|| malformed(format!("unknown entity &{name};")))?
                                .to_string()
                        }
                    };
                    push_text(&mut stack, &resolved)?;
                }
                Event::Eof => break,
                Event::Decl(_) | Event::PI(_) | Event::Comment(_) | Event::DocType(_) => {}
            }
        }
        if !stack.is_empty() {
            return Err(malformed("unclosed element"));
        }
        if roots.len() != 1 {
            return Err(malformed(format!(
                "expected a single root element, found {}",
                roots.len()
            )));
        }
        Ok(Dom {
            root: roots.pop().unwrap(),
            declarations,
        })
    }
}

fn attach(stack: &mut [Element], roots: &mut Vec<Element>, element: Element) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(Node::Element(element)),
        None => roots.push(element),
    }
}

fn push_text(stack: &mut [Element], text: &str) -> Result<(), XmpError> {
    match stack.last_mut() {
        Some(parent) => {
            parent.push_text(text);
            Ok(())
        }
        None if text.trim().is_empty() => Ok(()),
        None => Err(malformed("text outside the root element")),
    }
}

/// Items of an `rdf:Seq`/`rdf:Bag`/`rdf:Alt` container directly under `e`.
fn container_items(e: &Element) -> Vec<&Element> {
    e.elements()
        .filter(|c| c.is(RDF_NS, "Seq") || c.is(RDF_NS, "Bag") || c.is(RDF_NS, "Alt"))
        .flat_map(|c| c.elements().filter(|li| li.is(RDF_NS, "li")))
        .collect()
}

fn title_text(e: &Element) -> String {
    let items = container_items(e);
    if items.is_empty() {
        return e.text();
    }
    items
        .iter()
        .find(|li| li.attr(XML_NS, "lang") == Some("x-default"))
        .or(items.first())
        .map(|li| li.text())
        .unwrap_or_default()
}

struct Entry {
    index: Option<usize>,
    contribution: String,
    kind: PropertyKind,
    value: String,
    link: Option<EntityLink>,
}

/// Reads an annotation document back from a packet. Elements in foreign
/// namespaces are ignored; a packet that never mentions the toolkit
/// namespace is rejected with [`XmpError::NotSciKG`].
pub fn parse_xmp_with(
    packet: &XmpPacket,
    options: &XmpOptions,
) -> Result<AnnotationDocument, XmpError> {
    let toolkit = options.toolkit_namespace.as_str();
    let dom = Dom::parse(packet.as_bytes())?;
    let root = &dom.root;
    let rdf = if root.is(RDF_NS, "RDF") {
        root
    } else if root.is(X_NS, "xmpmeta") {
        root.child(RDF_NS, "RDF")
            .ok_or_else(|| malformed("x:xmpmeta has no rdf:RDF child"))?
    } else {
        return Err(malformed("missing rdf:RDF root"));
    };

    let declared = dom.declarations.values().any(|u| u == toolkit);
    if !declared && !rdf.uses_namespace(toolkit) {
        return Err(XmpError::NotSciKG);
    }

    let mut biblio = Bibliographic::default();
    let mut namespaces: Vec<NamespaceDecl> = Vec::new();
    let mut property_elements: Vec<(&Element, String)> = Vec::new();

    for description in rdf.elements().filter(|e| e.is(RDF_NS, "Description")) {
        for prop in description.elements() {
            if prop.is(DC_NS, "title") {
                biblio.title.get_or_insert_with(|| title_text(prop));
            } else if prop.is(DC_NS, "creator") {
                if biblio.authors.is_empty() {
                    let items = container_items(prop);
                    biblio.authors = if items.is_empty() {
                        vec![prop.text()]
                    } else {
                        items.iter().map(|li| li.text()).collect()
                    };
                }
            } else if prop.is(toolkit, "researchfield") {
                biblio.research_field.get_or_insert_with(|| prop.text());
            } else if prop.is(toolkit, "customproperties") {
                for li in container_items(prop) {
                    let field = |name: &str| li.child(toolkit, name).map(Element::text);
                    let uri = field("namespace").ok_or_else(|| malformed("declaration without namespace"))?;
                    let property = field("property").ok_or_else(|| malformed("declaration without property"))?;
                    let decl = NamespaceDecl::new(field("abbreviation").as_deref(), &uri, &property)
                        .map_err(malformed)?;
                    namespaces.push(decl);
                }
            } else if prop.is(toolkit, "contributions") {
                for li in container_items(prop) {
                    let nodes: Vec<&Element> = if li.attr(RDF_NS, "parseType") == Some("Resource") {
                        vec![li]
                    } else {
                        li.elements().filter(|e| e.is(RDF_NS, "Description")).collect()
                    };
                    for node in nodes {
                        let id = node
                            .attr(toolkit, "contribution")
                            .unwrap_or(DEFAULT_CONTRIBUTION)
                            .to_string();
                        for element in node.elements() {
                            property_elements.push((element, id.clone()));
                        }
                    }
                }
            }
        }
    }

    let mut entries = Vec::new();
    for (element, contribution) in property_elements {
        let Some(kind) = classify(element, toolkit, &namespaces)? else {
            continue;
        };
        let index = element
            .attr(toolkit, "annotation")
            .map(|v| v.parse::<usize>().map_err(|_| malformed(format!("bad annotation index {v:?}"))))
            .transpose()?;
        let text = element.text();
        let (value, link) = match element.attr(RDF_NS, "resource") {
            Some(uri) => {
                let label = (!text.is_empty()).then(|| text.clone());
                let link = EntityLink::new(uri, label).map_err(malformed)?;
                (link.display_text().to_string(), Some(link))
            }
            None => (text, None),
        };
        entries.push(Entry {
            index,
            contribution,
            kind,
            value,
            link,
        });
    }

    Ok(AnnotationDocument {
        annotations: assemble(entries)?,
        namespaces,
        biblio,
        source_digest: None,
    })
}

/// Maps a property element inside a contribution node to its kind, or
/// `None` for elements in foreign namespaces.
fn classify(
    element: &Element,
    toolkit: &str,
    decls: &[NamespaceDecl],
) -> Result<Option<PropertyKind>, XmpError> {
    let Some(ns) = element.ns.as_deref() else {
        return Ok(None);
    };
    let local = element.local.as_str();
    let custom = |prefix: Option<&str>| PropertyKind::custom(prefix, local).map_err(malformed);

    if let Some(prefix) = element.prefix.as_deref() {
        if decls
            .iter()
            .any(|d| d.abbreviation.as_deref() == Some(prefix) && d.uri == ns)
        {
            return custom(Some(prefix)).map(Some);
        }
    }
    if decls
        .iter()
        .any(|d| d.abbreviation.is_none() && d.uri == ns && d.property == local)
    {
        return custom(None).map(Some);
    }
    if ns == toolkit {
        return Ok(Some(match MandatoryKind::from_command(local) {
            Some(kind) => PropertyKind::mandatory(kind),
            None => custom(None)?,
        }));
    }
    let abbreviated = decls
        .iter()
        .filter(|d| d.uri == ns && d.abbreviation.is_some())
        .min_by_key(|d| d.property != local);
    match abbreviated {
        Some(d) => custom(d.abbreviation.as_deref()).map(Some),
        None => Ok(None),
    }
}

fn assemble(entries: Vec<Entry>) -> Result<Vec<PropertyAnnotation>, XmpError> {
    let mut indexed: BTreeMap<usize, PropertyAnnotation> = BTreeMap::new();
    let mut loose = Vec::new();
    for entry in entries {
        let mut annotation = PropertyAnnotation::new(entry.kind, entry.value);
        annotation.link = entry.link;
        annotation.contributions = BTreeSet::from([entry.contribution.clone()]);
        match entry.index {
            None => loose.push(annotation),
            Some(i) => match indexed.get_mut(&i) {
                None => {
                    indexed.insert(i, annotation);
                }
                Some(existing) => {
                    if existing.kind != annotation.kind
                        || existing.value != annotation.value
                        || existing.link != annotation.link
                    {
                        return Err(malformed(format!("annotation {i} differs between contributions")));
                    }
                    existing.contributions.insert(entry.contribution);
                }
            },
        }
    }
    Ok(indexed.into_values().chain(loose).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_source, SourceDocument};

    fn parse(text: &str) -> AnnotationDocument {
        parse_source(&SourceDocument::from_stdin_text(text)).unwrap()
    }

    #[test]
    fn empty_document_gives_minimal_packet() {
        let packet = serialize_xmp(&AnnotationDocument::default()).unwrap();
        let text = packet.as_str();
        assert!(text.starts_with("<?xpacket begin="));
        assert!(text.ends_with(PACKET_TRAILER));
        assert_eq!(text.matches("<rdf:Description").count(), 1);
        assert!(text.contains("<rdf:Description rdf:about=\"\" xmlns:orkgp=\"https://orkg.org/property/\"/>"));
        let back = parse_xmp(&packet).unwrap();
        assert_eq!(back, AnnotationDocument::default());
    }

    #[test]
    fn single_method_round_trip() {
        let doc = parse(r"\method{X}");
        let back = parse_xmp(&serialize_xmp(&doc).unwrap()).unwrap();
        assert_eq!(back.annotations.len(), 1);
        assert_eq!(back.annotations[0].value, "X");
        assert_eq!(
            back.annotations[0].kind.as_mandatory(),
            Some(MandatoryKind::Method)
        );
        assert!(doc.same_content(&back));
    }

    #[test]
    fn shared_annotation_is_read_back_once() {
        let doc = parse(r"\method[1,2]{X} \result[2]{Y} \contribution*[a]{k}{v}");
        let packet = serialize_xmp(&doc).unwrap();
        assert_eq!(packet.as_str().matches(">X<").count(), 2);
        let back = parse_xmp(&packet).unwrap();
        assert!(doc.same_content(&back));
    }

    #[test]
    fn escaping_survives() {
        let doc = parse(r"\method{a < b & c > d} \contribution[x&y]{k}{q}");
        let packet = serialize_xmp(&doc).unwrap();
        assert!(packet.as_str().contains("a &lt; b &amp; c &gt; d"));
        assert!(doc.same_content(&parse_xmp(&packet).unwrap()));
    }

    #[test]
    fn links_with_and_without_label() {
        let doc = parse(r"\method{\uri{http://e.org/a?x=1&y=2}{A}} \result{\uri{http://e.org/b}}");
        let packet = serialize_xmp(&doc).unwrap();
        assert!(packet
            .as_str()
            .contains("rdf:resource=\"http://e.org/a?x=1&amp;y=2\">A</orkgp:method>"));
        assert!(packet
            .as_str()
            .contains("<orkgp:result orkgp:annotation=\"1\" rdf:resource=\"http://e.org/b\"/>"));
        assert!(doc.same_content(&parse_xmp(&packet).unwrap()));
    }

    #[test]
    fn unresolved_prefix_is_an_error() {
        let doc = parse(r"\contribution{foo:bar}{x}");
        assert_eq!(
            serialize_xmp(&doc),
            Err(XmpError::UnresolvedPrefix("foo".into()))
        );
    }

    #[test]
    fn non_ncname_property_is_rejected() {
        let doc = parse(r"\contribution{3d}{x}");
        assert_eq!(
            serialize_xmp(&doc),
            Err(XmpError::InvalidElementName("3d".into()))
        );
    }

    #[test]
    fn control_characters_are_rejected() {
        let doc = parse("\\method{a\u{1}b}");
        assert!(matches!(
            serialize_xmp(&doc),
            Err(XmpError::UnrepresentableCharacter(_))
        ));
    }

    #[test]
    fn reserved_and_clashing_abbreviations_get_fresh_prefixes() {
        let text = "\\addmetaproperty[dc, http://a.org/]{p}\\addmetaproperty[orkgp, http://b.org/]{q}\\addmetaproperty[http://c.org/]{r}\\contribution{dc:p}{1}\\contribution{orkgp:q}{2}\\contribution{r}{3}";
        let doc = parse(text);
        let packet = serialize_xmp(&doc).unwrap();
        let ns = packet.namespaces();
        assert_eq!(ns["ns1"], "http://a.org/");
        assert_eq!(ns["ns2"], "http://b.org/");
        assert_eq!(ns["ns3"], "http://c.org/");
        assert!(doc.same_content(&parse_xmp(&packet).unwrap()));
    }

    #[test]
    fn two_abbreviations_for_one_uri() {
        let text = "\\addmetaproperty[a, http://x.org/]{p}\\addmetaproperty[b, http://x.org/]{p}\\contribution{a:p}{1}\\contribution{b:p}{2}";
        let doc = parse(text);
        let back = parse_xmp(&serialize_xmp(&doc).unwrap()).unwrap();
        assert!(doc.same_content(&back));
    }

    #[test]
    fn foreign_packet_is_not_scikg() {
        let foreign = r#"<x:xmpmeta xmlns:x="adobe:ns:meta/"><rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"><rdf:Description rdf:about="" xmlns:xmp="http://ns.adobe.com/xap/1.0/"><xmp:CreatorTool>Writer</xmp:CreatorTool></rdf:Description></rdf:RDF></x:xmpmeta>"#;
        let packet = XmpPacket::from_bytes(foreign.as_bytes().to_vec()).unwrap();
        assert_eq!(parse_xmp(&packet), Err(XmpError::NotSciKG));
    }

    #[test]
    fn garbage_is_malformed() {
        for bytes in [&b"\x00\xff\xfe garbage"[..], b"hello", b"<a><b></a>", b"<a/><b/>"] {
            assert!(matches!(
                XmpPacket::from_bytes(bytes.to_vec()),
                Err(XmpError::MalformedPacket(_))
            ));
        }
        let no_rdf = XmpPacket::from_bytes(b"<a xmlns:orkgp=\"https://orkg.org/property/\"/>".to_vec()).unwrap();
        assert!(matches!(parse_xmp(&no_rdf), Err(XmpError::MalformedPacket(_))));
    }

    #[test]
    fn foreign_elements_inside_contribution_are_ignored() {
        let packet = r#"<x:xmpmeta xmlns:x="adobe:ns:meta/"><rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"><rdf:Description rdf:about="" xmlns:orkgp="https://orkg.org/property/" xmlns:z="http://z/"><z:thing>t</z:thing><orkgp:contributions><rdf:Seq><rdf:li><rdf:Description orkgp:contribution="7"><z:other>o</z:other><orkgp:result>r</orkgp:result><orkgp:accuracy>0.9</orkgp:accuracy></rdf:Description></rdf:li></rdf:Seq></orkgp:contributions></rdf:Description></rdf:RDF></x:xmpmeta>"#;
        let doc = parse_xmp(&XmpPacket::from_bytes(packet.as_bytes().to_vec()).unwrap()).unwrap();
        assert_eq!(doc.annotations.len(), 2);
        assert_eq!(doc.annotations[0].contributions.first().unwrap(), "7");
        assert_eq!(doc.annotations[1].kind, PropertyKind::custom(None, "accuracy").unwrap());
    }

    #[test]
    fn custom_toolkit_namespace() {
        let opts = XmpOptions {
            toolkit_namespace: "http://example.org/kg#".into(),
        };
        let doc = parse(r"\method{m} \researchfield{f}");
        let packet = serialize_xmp_with(&doc, &opts).unwrap();
        assert_eq!(packet.namespaces()["orkgp"], "http://example.org/kg#");
        assert_eq!(parse_xmp(&packet), Err(XmpError::NotSciKG));
        assert!(doc.same_content(&parse_xmp_with(&packet, &opts).unwrap()));
    }

    #[test]
    fn serialization_is_deterministic() {
        let doc = parse("\\addmetaproperty[amo, http://purl.org/spar/amo#]{claim}\\metatitle{T}\\metaauthor{A}\\contribution{amo:claim}{c}\\method[2]{m}");
        let a = serialize_xmp(&doc).unwrap();
        let b = serialize_xmp(&doc.clone()).unwrap();
        assert_eq!(a.as_bytes(), b.as_bytes());
    }
}
