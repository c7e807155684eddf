//! Scanner for SciKGTeX-style annotation commands in LaTeX-like source.
//!
//! The scanner is a single left-to-right pass over the bytes of the source.
//! It understands just enough TeX to find the annotation commands reliably:
//! comments, control sequences, brace groups, `\verb` and verbatim-like
//! environments. Everything else is treated as opaque text.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::model::{
    AnnotationDocument, Bibliographic, EntityLink, MandatoryKind, NamespaceDecl,
    PropertyAnnotation, PropertyKind, SourceDigest, Span, DEFAULT_CONTRIBUTION,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unbalanced braces at byte {position}")]
    UnbalancedBraces { position: usize },
    #[error("malformed \\{command} at byte {position}: {reason}")]
    MalformedCommand {
        position: usize,
        command: String,
        reason: String,
    },
    #[error("namespace abbreviation {abbreviation:?} registered with two different URIs")]
    DuplicateNamespaceConflict { abbreviation: String },
    #[error("\\{command} given twice (second occurrence at byte {position})")]
    DuplicateBibliographic { command: String, position: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StripError {
    #[error("annotation document was not parsed from this source (digest mismatch)")]
    SpanMismatch,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Source text plus where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub text: String,
    pub origin: String,
}

impl SourceDocument {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceDocument {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn from_stdin_text(text: impl Into<String>) -> Self {
        Self::new(text, "<stdin>")
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(text, path.display().to_string()))
    }

    /// 1-based line and column (in characters) of a byte offset.
    pub fn line_col(&self, position: usize) -> (usize, usize) {
        let position = position.min(self.text.len());
        let before = &self.text[..floor_char_boundary(&self.text, position)];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

/// Environments whose body is never scanned for commands.
const VERBATIM_ENVS: [&str; 6] = [
    "verbatim",
    "verbatim*",
    "Verbatim",
    "lstlisting",
    "minted",
    "comment",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    Property(MandatoryKind),
    Contribution,
    Uri,
    MetaTitle,
    MetaAuthor,
    ResearchField,
    AddMetaProperty,
}

impl Command {
    fn lookup(name: &str) -> Option<Self> {
        if let Some(kind) = MandatoryKind::from_command(name) {
            return Some(Command::Property(kind));
        }
        Some(match name {
            "contribution" => Command::Contribution,
            "uri" => Command::Uri,
            "metatitle" => Command::MetaTitle,
            "metaauthor" => Command::MetaAuthor,
            "researchfield" => Command::ResearchField,
            "addmetaproperty" => Command::AddMetaProperty,
            _ => return None,
        })
    }
}

/// How one command is rewritten in the stripped output.
#[derive(Debug, Clone)]
enum Edit {
    Replace(Span, String),
    /// Drop the span, collapsing the whitespace on both sides to one space.
    Remove(Span),
    /// Drop the span, and its whole line when nothing else is on it.
    RemoveLine(Span),
}

impl Edit {
    fn span(&self) -> Span {
        match self {
            Edit::Replace(s, _) | Edit::Remove(s) | Edit::RemoveLine(s) => *s,
        }
    }
}

#[derive(Debug, Default)]
struct Scan {
    annotations: Vec<PropertyAnnotation>,
    namespaces: Vec<NamespaceDecl>,
    biblio: Bibliographic,
    edits: Vec<Edit>,
}

/// Result of resolving a braced argument to plain text.
struct Resolved {
    value: String,
    rendered: String,
    link: Option<EntityLink>,
}

struct Scanner<'a> {
    text: &'a str,
    bytes: &'a [u8],
}

fn is_letter(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'@'
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            text,
            bytes: text.as_bytes(),
        }
    }

    fn malformed(position: usize, command: &str, reason: impl Into<String>) -> ParseError {
        ParseError::MalformedCommand {
            position,
            command: command.to_string(),
            reason: reason.into(),
        }
    }

    /// Position after the end of the line containing `i` (the newline stays).
    fn line_end(&self, i: usize) -> usize {
        self.bytes[i..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(self.bytes.len(), |p| i + p)
    }

    /// Reads the control sequence starting at the backslash at `i`.
    /// Returns the name and the position just past it.
    fn control_sequence(&self, i: usize) -> (&'a str, usize) {
        let start = i + 1;
        if start >= self.bytes.len() {
            return ("", start);
        }
        if is_letter(self.bytes[start]) {
            let len = self.bytes[start..]
                .iter()
                .take_while(|&&b| is_letter(b))
                .count();
            (&self.text[start..start + len], start + len)
        } else {
            let ch = self.text[start..].chars().next().unwrap_or('\\');
            let end = start + ch.len_utf8();
            (&self.text[start..end], end)
        }
    }

    /// Skips blanks between a command and its arguments; at most one newline,
    /// since an empty line ends argument scanning in TeX.
    fn skip_blanks(&self, mut i: usize) -> usize {
        let mut newline_seen = false;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b' ' | b'\t' | b'\r' => i += 1,
                b'\n' if !newline_seen => {
                    newline_seen = true;
                    i += 1;
                }
                _ => break,
            }
        }
        i
    }

    /// Given an opening brace at `open`, returns the index of its matching
    /// closing brace.
    fn match_brace(&self, open: usize) -> Result<usize, ParseError> {
        debug_assert_eq!(self.bytes[open], b'{');
        let mut depth = 0usize;
        let mut i = open;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b'\\' => {
                    i = self.control_sequence(i).1;
                    continue;
                }
                b'%' => {
                    i = self.line_end(i);
                    continue;
                }
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(i);
                    }
                }
                _ => {}
            }
            i += 1;
        }
        Err(ParseError::UnbalancedBraces { position: open })
    }

    /// Reads `[...]` at `open`, honoring braces inside. Returns the inner
    /// range and the position after `]`.
    fn bracket_arg(&self, open: usize, command: &str) -> Result<(Span, usize), ParseError> {
        let mut i = open + 1;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b'\\' => {
                    i = self.control_sequence(i).1;
                    continue;
                }
                b'{' => {
                    i = self.match_brace(i)? + 1;
                    continue;
                }
                b']' => return Ok((Span { start: open + 1, end: i }, i + 1)),
                _ => i += 1,
            }
        }
        Err(Self::malformed(open, command, "unterminated optional argument"))
    }

    /// Reads a mandatory `{...}` argument after optional blanks. Returns the
    /// inner range and the position after `}`.
    fn brace_arg(&self, i: usize, command: &str, at: usize) -> Result<(Span, usize), ParseError> {
        let i = self.skip_blanks(i);
        if self.bytes.get(i) != Some(&b'{') {
            return Err(Self::malformed(at, command, "missing braced argument"));
        }
        let close = self.match_brace(i)?;
        Ok((Span { start: i + 1, end: close }, close + 1))
    }

    fn optional_arg(&self, i: usize, command: &str) -> Result<(Option<Span>, usize), ParseError> {
        let j = self.skip_blanks(i);
        if self.bytes.get(j) == Some(&b'[') {
            let (span, next) = self.bracket_arg(j, command)?;
            Ok((Some(span), next))
        } else {
            Ok((None, i))
        }
    }

    fn star(&self, i: usize) -> (bool, usize) {
        let j = self.skip_blanks(i);
        if self.bytes.get(j) == Some(&b'*') {
            (true, j + 1)
        } else {
            (false, i)
        }
    }

    fn slice(&self, span: Span) -> &'a str {
        &self.text[span.start..span.end]
    }

    /// If an environment in [`VERBATIM_ENVS`] begins right after `\begin`
    /// (ending at `i`), returns the position after its `\end{..}`.
    fn skip_verbatim_env(&self, begin_at: usize, i: usize) -> Result<Option<usize>, ParseError> {
        let rest = &self.text[i..];
        for env in VERBATIM_ENVS {
            let opener = format!("{{{env}}}");
            if rest.starts_with(&opener) {
                let closer = format!("\\end{{{env}}}");
                let body = i + opener.len();
                return match self.text[body..].find(&closer) {
                    Some(p) => Ok(Some(body + p + closer.len())),
                    None => Err(Self::malformed(
                        begin_at,
                        "begin",
                        format!("unterminated {env} environment"),
                    )),
                };
            }
        }
        Ok(None)
    }

    /// `\verb|...|` starting at the backslash `at`; `i` is past the name.
    fn skip_verb(&self, at: usize, mut i: usize) -> Result<usize, ParseError> {
        if self.bytes.get(i) == Some(&b'*') {
            i += 1;
        }
        let Some(delim) = self.text[i..].chars().next() else {
            return Err(Self::malformed(at, "verb", "missing delimiter"));
        };
        let body = i + delim.len_utf8();
        let line = &self.text[body..self.line_end(body)];
        match line.find(delim) {
            Some(p) => Ok(body + p + delim.len_utf8()),
            None => Err(Self::malformed(at, "verb", "unterminated \\verb")),
        }
    }

    fn scan(&self) -> Result<Scan, ParseError> {
        let mut out = Scan::default();
        let mut open_braces: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < self.bytes.len() {
            match self.bytes[i] {
                b'%' => i = self.line_end(i),
                b'{' => {
                    open_braces.push(i);
                    i += 1;
                }
                b'}' => {
                    if open_braces.pop().is_none() {
                        return Err(ParseError::UnbalancedBraces { position: i });
                    }
                    i += 1;
                }
                b'\\' => {
                    let (name, next) = self.control_sequence(i);
                    i = match name {
                        "begin" => self.skip_verbatim_env(i, next)?.unwrap_or(next),
                        "verb" => self.skip_verb(i, next)?,
                        _ => match Command::lookup(name) {
                            Some(cmd) => self.command(cmd, name, i, next, &mut out)?,
                            None => next,
                        },
                    };
                }
                _ => i += 1,
            }
        }
        if let Some(&position) = open_braces.last() {
            return Err(ParseError::UnbalancedBraces { position });
        }
        Ok(out)
    }

    /// Handles one recognized command at top level. Returns the position
    /// after its last argument.
    fn command(
        &self,
        cmd: Command,
        name: &str,
        at: usize,
        after_name: usize,
        out: &mut Scan,
    ) -> Result<usize, ParseError> {
        match cmd {
            Command::Property(kind) => {
                let (starred, i) = self.star(after_name);
                let (ids, i) = self.optional_arg(i, name)?;
                let (value_span, end) = self.brace_arg(i, name, at)?;
                let contributions = self.contribution_ids(ids, name, at)?;
                let resolved = self.resolve(value_span, name, true)?;
                self.push_annotation(
                    out,
                    PropertyKind::mandatory(kind),
                    contributions,
                    starred,
                    resolved,
                    Span::new(at, end),
                );
                Ok(end)
            }
            Command::Contribution => {
                let (starred, i) = self.star(after_name);
                let (ids, i) = self.optional_arg(i, name)?;
                let (name_span, i) = self.brace_arg(i, name, at)?;
                let (value_span, end) = self.brace_arg(i, name, at)?;
                let contributions = self.contribution_ids(ids, name, at)?;
                let kind = self.property_name(name_span, at)?;
                let resolved = self.resolve(value_span, name, true)?;
                self.push_annotation(out, kind, contributions, starred, resolved, Span::new(at, end));
                Ok(end)
            }
            Command::MetaTitle | Command::MetaAuthor | Command::ResearchField => {
                let (arg, end) = self.brace_arg(after_name, name, at)?;
                let text = self.resolve(arg, name, false)?.value;
                let duplicate = || ParseError::DuplicateBibliographic {
                    command: name.to_string(),
                    position: at,
                };
                match cmd {
                    Command::MetaTitle if out.biblio.title.is_some() => return Err(duplicate()),
                    Command::MetaTitle => out.biblio.title = Some(text),
                    Command::ResearchField if out.biblio.research_field.is_some() => {
                        return Err(duplicate())
                    }
                    Command::ResearchField => out.biblio.research_field = Some(text),
                    _ => out.biblio.authors.push(text),
                }
                out.edits
                    .push(Edit::Replace(Span::new(at, end), self.slice(arg).to_string()));
                Ok(end)
            }
            Command::AddMetaProperty => {
                let (opt, i) = self.optional_arg(after_name, name)?;
                let opt = opt.ok_or_else(|| {
                    Self::malformed(at, name, "expected [abbreviation, uri] or [uri]")
                })?;
                let (prop_span, end) = self.brace_arg(i, name, at)?;
                let raw = self.slice(opt);
                let (abbrev, uri) = match raw.split_once(',') {
                    Some((a, u)) => (Some(a.trim()), u.trim()),
                    None => (None, raw.trim()),
                };
                let decl = NamespaceDecl::new(abbrev, uri, self.slice(prop_span).trim())
                    .map_err(|e| Self::malformed(at, name, e.to_string()))?;
                if let Some(a) = &decl.abbreviation {
                    let clash = out
                        .namespaces
                        .iter()
                        .any(|d| d.abbreviation.as_ref() == Some(a) && d.uri != decl.uri);
                    if clash {
                        return Err(ParseError::DuplicateNamespaceConflict {
                            abbreviation: a.clone(),
                        });
                    }
                }
                if !out.namespaces.contains(&decl) {
                    out.namespaces.push(decl);
                }
                out.edits.push(Edit::RemoveLine(Span::new(at, end)));
                Ok(end)
            }
            Command::Uri => Err(Self::malformed(
                at,
                name,
                "\\uri is only allowed inside an annotation",
            )),
        }
    }

    fn push_annotation(
        &self,
        out: &mut Scan,
        kind: PropertyKind,
        contributions: BTreeSet<String>,
        starred: bool,
        resolved: Resolved,
        span: Span,
    ) {
        out.edits.push(if starred {
            Edit::Remove(span)
        } else {
            Edit::Replace(span, resolved.rendered)
        });
        out.annotations.push(PropertyAnnotation {
            kind,
            value: resolved.value,
            contributions,
            visible: !starred,
            link: resolved.link,
            span: Some(span),
        });
    }

    fn contribution_ids(
        &self,
        arg: Option<Span>,
        command: &str,
        at: usize,
    ) -> Result<BTreeSet<String>, ParseError> {
        let Some(arg) = arg else {
            return Ok(BTreeSet::from([DEFAULT_CONTRIBUTION.to_string()]));
        };
        let ids: Vec<&str> = self.slice(arg).split(',').map(str::trim).collect();
        if ids.iter().any(|id| id.is_empty()) {
            return Err(Self::malformed(at, command, "empty contribution identifier"));
        }
        Ok(ids.into_iter().map(str::to_string).collect())
    }

    fn property_name(&self, span: Span, at: usize) -> Result<PropertyKind, ParseError> {
        let raw = self.slice(span).trim();
        let (prefix, name) = match raw.split_once(':') {
            Some((p, n)) => (Some(p), n),
            None => (None, raw),
        };
        if name.contains(':') {
            return Err(Self::malformed(at, "contribution", "property name has two prefixes"));
        }
        PropertyKind::custom(prefix, name)
            .map_err(|e| Self::malformed(at, "contribution", e.to_string()))
    }

    /// Resolves the content of a braced argument to plain text. `allow_uri`
    /// permits one nested `\uri`; every other annotation command is rejected.
    fn resolve(&self, span: Span, command: &str, allow_uri: bool) -> Result<Resolved, ParseError> {
        let mut value = String::new();
        let mut rendered = String::new();
        let mut link: Option<EntityLink> = None;
        let mut i = span.start;
        while i < span.end {
            match self.bytes[i] {
                b'%' => {
                    // A comment also swallows the line break and the next
                    // line's indentation.
                    i = self.line_end(i).min(span.end);
                    while i < span.end && matches!(self.bytes[i], b'\n' | b' ' | b'\t' | b'\r') {
                        i += 1;
                    }
                }
                b'{' | b'}' => i += 1,
                b'~' => {
                    value.push(' ');
                    rendered.push(' ');
                    i += 1;
                }
                b'\\' => {
                    let (name, next) = self.control_sequence(i);
                    let starts_word = name.bytes().next().is_some_and(is_letter);
                    if !starts_word {
                        let piece = match name {
                            "%" | "{" | "}" | "&" | "_" | "#" | "$" => &self.text[i..next],
                            "-" | "/" | "" => "",
                            _ => " ",
                        };
                        value.push_str(piece);
                        rendered.push_str(piece);
                        i = next;
                        continue;
                    }
                    match Command::lookup(name) {
                        Some(Command::Uri) if allow_uri => {
                            if link.is_some() {
                                return Err(Self::malformed(
                                    i,
                                    "uri",
                                    "only one \\uri per annotation",
                                ));
                            }
                            let (l, end) = self.uri(i, next)?;
                            let shown = l.display_text().to_string();
                            value.push_str(&shown);
                            match l.label() {
                                Some(label) => rendered.push_str(&format!("\\href{{{}}}{{{label}}}", l.uri())),
                                None => rendered.push_str(&format!("\\url{{{}}}", l.uri())),
                            }
                            link = Some(l);
                            i = end;
                        }
                        Some(_) => {
                            return Err(Self::malformed(
                                i,
                                name,
                                format!("cannot be nested inside \\{command}"),
                            ))
                        }
                        None if name == "verb" => {
                            return Err(Self::malformed(i, "verb", "\\verb inside an argument"))
                        }
                        None => i = next,
                    }
                }
                _ => {
                    let run = self.bytes[i..span.end]
                        .iter()
                        .position(|b| matches!(b, b'%' | b'{' | b'}' | b'~' | b'\\'))
                        .map_or(span.end, |p| i + p);
                    value.push_str(&self.text[i..run]);
                    rendered.push_str(&self.text[i..run]);
                    i = run;
                }
            }
        }
        let rendered = collapse_whitespace(&rendered);
        let value = match &link {
            Some(l) => l.display_text().to_string(),
            None => collapse_whitespace(&value),
        };
        Ok(Resolved {
            value,
            rendered,
            link,
        })
    }

    /// `\uri{URI}` or `\uri{URI}{label}`; the label group must follow
    /// immediately. Returns the link and the position after it.
    fn uri(&self, at: usize, after_name: usize) -> Result<(EntityLink, usize), ParseError> {
        let (uri_span, mut end) = self.brace_arg(after_name, "uri", at)?;
        let uri = self.slice(uri_span).trim();
        let mut label = None;
        if self.bytes.get(end) == Some(&b'{') {
            let close = self.match_brace(end)?;
            let text = self
                .resolve(Span { start: end + 1, end: close }, "uri", false)?
                .value;
            if !text.is_empty() {
                label = Some(text);
            }
            end = close + 1;
        }
        let link = EntityLink::new(uri, label).map_err(|e| Self::malformed(at, "uri", e.to_string()))?;
        Ok((link, end))
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses every annotation, namespace registration and bibliographic command.
pub fn parse_source(src: &SourceDocument) -> Result<AnnotationDocument, ParseError> {
    let scan = Scanner::new(&src.text).scan()?;
    Ok(AnnotationDocument {
        annotations: scan.annotations,
        namespaces: scan.namespaces,
        biblio: scan.biblio,
        source_digest: Some(SourceDigest::of(&src.text)),
    })
}

/// Renders the source with annotations resolved: visible annotations become
/// their value text (entity links as `\href`), starred ones disappear,
/// bibliographic commands unwrap and `\addmetaproperty` lines are dropped.
pub fn strip_annotations(src: &SourceDocument, doc: &AnnotationDocument) -> Result<String, StripError> {
    if doc.source_digest.as_ref() != Some(&SourceDigest::of(&src.text)) {
        return Err(StripError::SpanMismatch);
    }
    let mut edits = Scanner::new(&src.text).scan()?.edits;
    edits.sort_by_key(|e| e.span().start);

    let text = src.text.as_str();
    let bytes = text.as_bytes();
    let is_blank = |b: &u8| matches!(b, b' ' | b'\t');
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for edit in edits {
        let span = edit.span();
        match edit {
            Edit::Replace(_, replacement) => {
                out.push_str(&text[cursor..span.start]);
                out.push_str(&replacement);
                cursor = span.end;
            }
            Edit::Remove(_) => {
                out.push_str(&text[cursor..span.start]);
                cursor = span.end;
                if out.ends_with([' ', '\t']) {
                    while cursor < bytes.len() && is_blank(&bytes[cursor]) {
                        cursor += 1;
                    }
                }
            }
            Edit::RemoveLine(_) => {
                let line_start = text[..span.start].rfind('\n').map_or(0, |p| p + 1);
                let line_end = text[span.end..].find('\n').map_or(text.len(), |p| span.end + p);
                let alone = bytes[line_start..span.start].iter().all(is_blank)
                    && bytes[span.end..line_end].iter().all(|b| is_blank(b) || *b == b'\r');
                if alone && line_start >= cursor {
                    out.push_str(&text[cursor..line_start]);
                    cursor = (line_end + 1).min(text.len());
                } else {
                    out.push_str(&text[cursor..span.start]);
                    cursor = span.end;
                }
            }
        }
    }
    out.push_str(&text[cursor..]);
    Ok(out)
}
