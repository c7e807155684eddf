//! Minimal PDF reader and incremental-update writer.
//!
//! The reader resolves classic cross-reference tables, cross-reference
//! streams, hybrid files and object streams, following `/Prev` chains so the
//! newest revision of every object wins. The writer only ever appends: the
//! metadata stream, a revised catalog and a classic xref section.

mod filter;
mod lexer;
mod object;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write as _;

use thiserror::Error;

pub use object::{write_object, Dictionary, Object, ObjectId, Stream};

use crate::xmp::{parse_xmp_with, XmpError, XmpOptions, XmpPacket};
use lexer::{find, rfind, LengthResolver, Lexer};

/// Catalog key used in PDF/A compatibility mode.
pub const CUSTOM_METADATA_KEY: &str = "SciKGMetadata";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdfError {
    #[error("not a PDF file (missing %PDF header)")]
    NotAPdf,
    #[error("corrupt cross-reference data near byte {offset}: {detail}")]
    CorruptXref { offset: usize, detail: String },
    #[error("trailer /Root does not resolve to a catalog dictionary")]
    MissingCatalog,
    #[error("encrypted PDFs are not supported")]
    Encrypted,
    #[error("metadata stream: {0}")]
    Metadata(#[from] XmpError),
}

fn corrupt(offset: usize, detail: impl Into<String>) -> PdfError {
    PdfError::CorruptXref {
        offset,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedMode {
    /// Catalog `/Metadata` points at the packet.
    Standard,
    /// The packet hangs off [`CUSTOM_METADATA_KEY`]; `/Metadata` is untouched.
    PdfACompat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetadataLocation {
    None,
    StandardStream(ObjectId),
    CustomCatalogEntry(ObjectId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum XrefEntry {
    Free,
    InUse { offset: usize, generation: u16 },
    Compressed { stream: u32, index: usize },
}

#[derive(Debug, Clone)]
pub struct PdfDocument {
    objects: BTreeMap<ObjectId, Object>,
    trailer: Dictionary,
    catalog_ref: ObjectId,
    metadata_location: MetadataLocation,
    /// Offset of the newest cross-reference section.
    startxref: usize,
    /// One past the highest object number in use.
    size: u32,
}

impl PdfDocument {
    pub fn objects(&self) -> &BTreeMap<ObjectId, Object> {
        &self.objects
    }

    pub fn get(&self, id: ObjectId) -> Option<&Object> {
        self.objects.get(&id)
    }

    pub fn trailer(&self) -> &Dictionary {
        &self.trailer
    }

    pub fn catalog_ref(&self) -> ObjectId {
        self.catalog_ref
    }

    pub fn catalog(&self) -> &Dictionary {
        self.objects[&self.catalog_ref]
            .as_dict()
            .expect("checked at load")
    }

    pub fn metadata_location(&self) -> MetadataLocation {
        self.metadata_location
    }

    pub fn startxref(&self) -> usize {
        self.startxref
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Decoded bytes of the stream referenced by catalog key `key`.
    fn catalog_stream(&self, key: &str) -> Result<Option<Vec<u8>>, PdfError> {
        let Some(id) = self.catalog().get(key).and_then(Object::as_reference) else {
            return Ok(None);
        };
        match self.objects.get(&id) {
            Some(Object::Stream(stream)) => filter::decode(stream)
                .map(Some)
                .map_err(|e| XmpError::MalformedPacket(format!("undecodable metadata stream: {e:?}")).into()),
            _ => Ok(None),
        }
    }
}

struct Xref<'a> {
    data: &'a [u8],
    entries: HashMap<u32, XrefEntry>,
}

impl LengthResolver for Xref<'_> {
    fn resolve_length(&self, id: ObjectId) -> Option<i64> {
        match self.entries.get(&id.number)? {
            XrefEntry::InUse { offset, .. } => {
                let (_, obj) = Lexer::new(self.data, *offset)
                    .indirect_object(&lexer::NoResolver)
                    .ok()?;
                obj.as_integer()
            }
            _ => None,
        }
    }
}

fn find_startxref(data: &[u8]) -> Result<usize, PdfError> {
    let tail_start = data.len().saturating_sub(2048);
    let pos = rfind(&data[tail_start..], b"startxref")
        .map(|p| tail_start + p)
        .ok_or_else(|| corrupt(data.len(), "no startxref"))?;
    let mut lx = Lexer::new(data, pos + b"startxref".len());
    let offset = lx
        .unsigned()
        .map_err(|e| corrupt(e.offset, "bad startxref value"))? as usize;
    if offset >= data.len() {
        return Err(corrupt(offset, "startxref points past end of file"));
    }
    Ok(offset)
}

/// Reads one classic xref table at `offset`; entries are added only where the
/// newer sections have not already defined the object.
fn read_xref_table(
    data: &[u8],
    offset: usize,
    entries: &mut HashMap<u32, XrefEntry>,
) -> Result<Dictionary, PdfError> {
    let mut lx = Lexer::new(data, offset);
    lx.expect_keyword(b"xref")
        .map_err(|e| corrupt(e.offset, e.message))?;
    loop {
        if lx.at_keyword(b"trailer") {
            lx.expect_keyword(b"trailer").unwrap();
            break;
        }
        let bad = |e: lexer::SyntaxError| corrupt(e.offset, e.message);
        let first = lx.unsigned().map_err(bad)?;
        let count = lx.unsigned().map_err(bad)?;
        for n in first..first + count {
            let field = lx.unsigned().map_err(bad)?;
            let generation = lx.unsigned().map_err(bad)?;
            lx.skip_ws();
            let kind = lx.data.get(lx.pos).copied();
            lx.pos += 1;
            let entry = match kind {
                Some(b'n') => XrefEntry::InUse {
                    offset: field as usize,
                    generation: u16::try_from(generation).map_err(|_| corrupt(lx.pos, "generation out of range"))?,
                },
                Some(b'f') => XrefEntry::Free,
                _ => return Err(corrupt(lx.pos, "xref entry type must be n or f")),
            };
            let number = u32::try_from(n).map_err(|_| corrupt(lx.pos, "object number out of range"))?;
            entries.entry(number).or_insert(entry);
        }
    }
    match lx.object().map_err(|e| corrupt(e.offset, e.message))? {
        Object::Dictionary(d) => Ok(d),
        _ => Err(corrupt(lx.pos, "trailer is not a dictionary")),
    }
}

/// Reads an xref stream object at `offset`, returning its dictionary.
fn read_xref_stream(
    data: &[u8],
    offset: usize,
    entries: &mut HashMap<u32, XrefEntry>,
) -> Result<Dictionary, PdfError> {
    let (_, obj) = Lexer::new(data, offset)
        .indirect_object(&lexer::NoResolver)
        .map_err(|e| corrupt(e.offset, e.message))?;
    let Object::Stream(stream) = obj else {
        return Err(corrupt(offset, "xref section is neither a table nor a stream"));
    };
    if !stream.dict.is_type("XRef") {
        return Err(corrupt(offset, "stream at startxref is not /Type /XRef"));
    }
    let decoded = filter::decode(&stream).map_err(|e| corrupt(offset, format!("{e:?}")))?;
    let widths: Vec<usize> = stream
        .dict
        .get("W")
        .and_then(Object::as_array)
        .map(|w| w.iter().filter_map(Object::as_integer).map(|i| i.max(0) as usize).collect())
        .unwrap_or_default();
    if widths.len() != 3 || widths.iter().any(|&w| w > 8) {
        return Err(corrupt(offset, "bad /W array"));
    }
    let size = stream.dict.get("Size").and_then(Object::as_integer).unwrap_or(0);
    let index: Vec<i64> = match stream.dict.get("Index").and_then(Object::as_array) {
        Some(items) => items.iter().filter_map(Object::as_integer).collect(),
        None => vec![0, size],
    };
    let row = widths.iter().sum::<usize>();
    if row == 0 {
        return Err(corrupt(offset, "zero-width xref rows"));
    }
    let field = |bytes: &[u8]| bytes.iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b));
    let mut rows = decoded.chunks_exact(row);
    for pair in index.chunks(2) {
        let [first, count] = pair else {
            return Err(corrupt(offset, "odd /Index array"));
        };
        for n in *first..first + count {
            let Some(r) = rows.next() else {
                return Err(corrupt(offset, "xref stream shorter than /Index"));
            };
            let (a, rest) = r.split_at(widths[0]);
            let (b, c) = rest.split_at(widths[1]);
            let kind = if widths[0] == 0 { 1 } else { field(a) };
            let entry = match kind {
                0 => XrefEntry::Free,
                1 => XrefEntry::InUse {
                    offset: field(b) as usize,
                    generation: field(c) as u16,
                },
                2 => XrefEntry::Compressed {
                    stream: field(b) as u32,
                    index: field(c) as usize,
                },
                // Unknown types are to be ignored.
                _ => continue,
            };
            if let Ok(number) = u32::try_from(n) {
                entries.entry(number).or_insert(entry);
            }
        }
    }
    Ok(stream.dict)
}

fn merge_trailer(into: &mut Dictionary, older: &Dictionary) {
    for (k, v) in older.iter() {
        let key = String::from_utf8_lossy(k);
        if matches!(key.as_ref(), "Prev" | "XRefStm" | "Type" | "W" | "Index" | "Filter" | "DecodeParms" | "Length") {
            continue;
        }
        if !into.contains_key(&key) {
            into.set(&key, v.clone());
        }
    }
}

/// Parses a PDF: header, xref chain (newest first), every live object and the
/// catalog. Detects where toolkit metadata currently lives.
pub fn load_pdf(bytes: &[u8]) -> Result<PdfDocument, PdfError> {
    let header_window = &bytes[..bytes.len().min(1024)];
    if find(header_window, b"%PDF-").is_none() {
        return Err(PdfError::NotAPdf);
    }

    let startxref = find_startxref(bytes)?;
    let mut entries = HashMap::new();
    let mut trailer: Option<Dictionary> = None;
    let mut visited = HashSet::new();
    let mut next = Some(startxref);

    while let Some(offset) = next {
        if !visited.insert(offset) {
            return Err(corrupt(offset, "/Prev chain loops"));
        }
        if offset >= bytes.len() {
            return Err(corrupt(offset, "xref offset past end of file"));
        }
        let mut probe = Lexer::new(bytes, offset);
        let section = if probe.at_keyword(b"xref") {
            let dict = read_xref_table(bytes, offset, &mut entries)?;
            if let Some(stm) = dict.get("XRefStm").and_then(Object::as_integer) {
                read_xref_stream(bytes, stm as usize, &mut entries)?;
            }
            dict
        } else {
            read_xref_stream(bytes, offset, &mut entries)?
        };
        next = section
            .get("Prev")
            .and_then(Object::as_integer)
            .map(|p| p as usize);
        match &mut trailer {
            None => {
                let mut t = Dictionary::new();
                merge_trailer(&mut t, &section);
                trailer = Some(t);
            }
            Some(t) => merge_trailer(t, &section),
        }
    }
    let trailer = trailer.ok_or_else(|| corrupt(startxref, "no trailer"))?;
    if trailer.contains_key("Encrypt") {
        return Err(PdfError::Encrypted);
    }

    let xref = Xref {
        data: bytes,
        entries,
    };
    let objects = load_objects(&xref)?;

    let catalog_ref = trailer
        .get("Root")
        .and_then(Object::as_reference)
        .ok_or(PdfError::MissingCatalog)?;
    let catalog = objects
        .get(&catalog_ref)
        .and_then(|o| match o {
            Object::Dictionary(d) => Some(d),
            _ => None,
        })
        .ok_or(PdfError::MissingCatalog)?;
    if !catalog.is_type("Catalog") {
        return Err(PdfError::MissingCatalog);
    }
    let metadata_location = match (
        catalog.get(CUSTOM_METADATA_KEY).and_then(Object::as_reference),
        catalog.get("Metadata").and_then(Object::as_reference),
    ) {
        (Some(id), _) => MetadataLocation::CustomCatalogEntry(id),
        (None, Some(id)) => MetadataLocation::StandardStream(id),
        (None, None) => MetadataLocation::None,
    };

    let max_number = xref.entries.keys().copied().max().unwrap_or(0);
    let declared = trailer.get("Size").and_then(Object::as_integer).unwrap_or(0);
    let size = (max_number + 1).max(u32::try_from(declared).unwrap_or(0));

    Ok(PdfDocument {
        objects,
        trailer,
        catalog_ref,
        metadata_location,
        startxref,
        size,
    })
}

fn load_objects(xref: &Xref<'_>) -> Result<BTreeMap<ObjectId, Object>, PdfError> {
    let data = xref.data;
    let mut objects = BTreeMap::new();
    let mut compressed: BTreeMap<u32, Vec<(u32, usize)>> = BTreeMap::new();

    let mut numbers: Vec<u32> = xref.entries.keys().copied().collect();
    numbers.sort_unstable();
    for number in numbers {
        match xref.entries[&number] {
            XrefEntry::Free => {}
            XrefEntry::InUse { offset, generation } => {
                if number == 0 {
                    continue;
                }
                if offset >= data.len() {
                    return Err(corrupt(offset, format!("object {number} points past end of file")));
                }
                let (id, object) = Lexer::new(data, offset)
                    .indirect_object(xref)
                    .map_err(|e| corrupt(offset, format!("object {number}: {}", e.message)))?;
                if id.number != number || id.generation != generation {
                    return Err(corrupt(offset, format!("xref says object {number} but found {}", id.number)));
                }
                objects.insert(id, object);
            }
            XrefEntry::Compressed { stream, index } => {
                compressed.entry(stream).or_default().push((number, index));
            }
        }
    }

    for (stream_number, members) in compressed {
        let stream = match objects.get(&ObjectId::new(stream_number, 0)) {
            Some(Object::Stream(s)) if s.dict.is_type("ObjStm") => s.clone(),
            _ => return Err(corrupt(0, format!("object stream {stream_number} missing"))),
        };
        let decoded = filter::decode(&stream)
            .map_err(|e| corrupt(0, format!("object stream {stream_number}: {e:?}")))?;
        let count = stream.dict.get("N").and_then(Object::as_integer).unwrap_or(0).max(0) as usize;
        let first = stream.dict.get("First").and_then(Object::as_integer).unwrap_or(0).max(0) as usize;
        let mut header = Lexer::new(&decoded, 0);
        let mut table = Vec::with_capacity(count);
        for _ in 0..count {
            let bad = |e: lexer::SyntaxError| corrupt(e.offset, format!("object stream {stream_number} header"));
            let n = header.unsigned().map_err(bad)?;
            let off = header.unsigned().map_err(bad)?;
            table.push((n as u32, first + off as usize));
        }
        for (number, index) in members {
            let Some(&(n, off)) = table.get(index) else {
                return Err(corrupt(0, format!("object {number} not in object stream {stream_number}")));
            };
            if n != number || off > decoded.len() {
                return Err(corrupt(0, format!("object stream {stream_number} index mismatch")));
            }
            let object = Lexer::new(&decoded, off)
                .object()
                .map_err(|e| corrupt(e.offset, e.message))?;
            objects.insert(ObjectId::new(number, 0), object);
        }
    }
    Ok(objects)
}

/// Appends an incremental update that stores `packet` as a metadata stream
/// and points the catalog at it. The input bytes are an exact prefix of the
/// result.
pub fn embed_metadata(pdf: &[u8], packet: &XmpPacket, mode: EmbedMode) -> Result<Vec<u8>, PdfError> {
    let doc = load_pdf(pdf)?;
    let stream_id = ObjectId::new(doc.size, 0);

    let mut catalog = doc.catalog().clone();
    match mode {
        EmbedMode::Standard => {
            catalog.set("Metadata", Object::Reference(stream_id));
            catalog.remove(CUSTOM_METADATA_KEY);
        }
        EmbedMode::PdfACompat => catalog.set(CUSTOM_METADATA_KEY, Object::Reference(stream_id)),
    }

    let mut out = Vec::with_capacity(pdf.len() + packet.as_bytes().len() + 512);
    out.extend_from_slice(pdf);
    if !out.ends_with(b"\n") && !out.ends_with(b"\r") {
        out.push(b'\n');
    }

    let mut offsets: BTreeMap<u32, (usize, u16)> = BTreeMap::new();

    offsets.insert(stream_id.number, (out.len(), 0));
    let mut dict = Dictionary::new();
    dict.set("Type", Object::name("Metadata"));
    dict.set("Subtype", Object::name("XML"));
    dict.set("Length", Object::Integer(packet.as_bytes().len() as i64));
    writeln!(out, "{} 0 obj", stream_id.number).unwrap();
    write_object(
        &mut out,
        &Object::Stream(Stream {
            dict,
            data: packet.as_bytes().to_vec(),
        }),
    );
    out.extend_from_slice(b"\nendobj\n");

    let catalog_id = doc.catalog_ref;
    offsets.insert(catalog_id.number, (out.len(), catalog_id.generation));
    writeln!(out, "{} {} obj", catalog_id.number, catalog_id.generation).unwrap();
    write_object(&mut out, &Object::Dictionary(catalog));
    out.extend_from_slice(b"\nendobj\n");

    let xref_offset = out.len();
    out.extend_from_slice(b"xref\n");
    let numbers: Vec<u32> = offsets.keys().copied().collect();
    let mut i = 0;
    while i < numbers.len() {
        let mut j = i + 1;
        while j < numbers.len() && numbers[j] == numbers[j - 1] + 1 {
            j += 1;
        }
        writeln!(out, "{} {}", numbers[i], j - i).unwrap();
        for n in &numbers[i..j] {
            let (offset, generation) = offsets[n];
            writeln!(out, "{offset:010} {generation:05} n ").unwrap();
        }
        i = j;
    }

    let mut trailer = Dictionary::new();
    trailer.set("Size", Object::Integer(i64::from(doc.size.max(stream_id.number + 1))));
    trailer.set("Root", Object::Reference(catalog_id));
    for key in ["Info", "ID"] {
        if let Some(v) = doc.trailer.get(key) {
            trailer.set(key, v.clone());
        }
    }
    trailer.set("Prev", Object::Integer(doc.startxref as i64));
    out.extend_from_slice(b"trailer\n");
    write_object(&mut out, &Object::Dictionary(trailer));
    write!(out, "\nstartxref\n{xref_offset}\n%%EOF\n").unwrap();
    Ok(out)
}

pub fn extract_metadata(pdf: &[u8]) -> Result<Option<XmpPacket>, PdfError> {
    extract_metadata_with(pdf, &XmpOptions::default())
}

/// Returns the newest toolkit packet: the custom catalog entry is preferred
/// over `/Metadata`. Streams without toolkit metadata count as absent.
pub fn extract_metadata_with(pdf: &[u8], options: &XmpOptions) -> Result<Option<XmpPacket>, PdfError> {
    let doc = load_pdf(pdf)?;
    for key in [CUSTOM_METADATA_KEY, "Metadata"] {
        let Some(bytes) = doc.catalog_stream(key)? else {
            continue;
        };
        let packet = XmpPacket::from_bytes(bytes)?;
        match parse_xmp_with(&packet, options) {
            Ok(_) => return Ok(Some(packet)),
            Err(XmpError::NotSciKG) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnnotationDocument, MandatoryKind, PropertyAnnotation, PropertyKind};
    use crate::xmp::serialize_xmp;
    use scikg_testkit::fixtures;

    fn packet(value: &str) -> XmpPacket {
        let doc = AnnotationDocument {
            annotations: vec![PropertyAnnotation::new(
                PropertyKind::mandatory(MandatoryKind::Method),
                value,
            )],
            ..Default::default()
        };
        serialize_xmp(&doc).unwrap()
    }

    /// Replaces the last occurrence; trailer edits do not move any object.
    fn replace_bytes(data: &[u8], from: &[u8], to: &[u8]) -> Vec<u8> {
        let pos = rfind(data, from).unwrap();
        [&data[..pos], to, &data[pos + from.len()..]].concat()
    }

    #[test]
    fn loads_minimal_fixture() {
        let doc = load_pdf(fixtures::MINIMAL).unwrap();
        assert_eq!(doc.metadata_location(), MetadataLocation::None);
        assert_eq!(doc.catalog_ref(), ObjectId::new(1, 0));
        assert_eq!(doc.objects().len(), 6);
        assert_eq!(doc.size(), 7);
        let contents = doc.get(ObjectId::new(4, 0)).unwrap();
        match contents {
            Object::Stream(s) => assert!(s.data.starts_with(b"BT /F1 24 Tf")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn loads_xref_stream_fixture() {
        let doc = load_pdf(fixtures::XREF_STREAM).unwrap();
        assert!(doc.catalog().is_type("Catalog"));
        assert!(doc.get(ObjectId::new(3, 0)).unwrap().as_dict().unwrap().is_type("Page"));
        assert_eq!(doc.size(), 8);
    }

    #[test]
    fn follows_prev_chain_newest_first() {
        let doc = load_pdf(fixtures::UPDATED).unwrap();
        let info = doc.get(ObjectId::new(6, 0)).unwrap().as_dict().unwrap();
        assert_eq!(info.get("Title"), Some(&Object::String(b"Updated fixture".to_vec())));
    }

    #[test]
    fn rejects_non_pdf() {
        assert_eq!(load_pdf(b"hello").unwrap_err(), PdfError::NotAPdf);
        assert!(matches!(
            load_pdf(b"%PDF-1.4\nno xref here"),
            Err(PdfError::CorruptXref { .. })
        ));
    }

    #[test]
    fn rejects_xref_past_eof() {
        let mut bytes = fixtures::MINIMAL.to_vec();
        let pos = rfind(&bytes, b"startxref").unwrap();
        bytes.truncate(pos);
        bytes.extend_from_slice(b"startxref\n999999\n%%EOF\n");
        assert!(matches!(load_pdf(&bytes), Err(PdfError::CorruptXref { offset: 999999, .. })));
    }

    #[test]
    fn rejects_encrypted() {
        let bytes = replace_bytes(fixtures::MINIMAL, b"/Size 7", b"/Encrypt << /Filter /Standard >> /Size 7");
        assert_eq!(load_pdf(&bytes).unwrap_err(), PdfError::Encrypted);
    }

    #[test]
    fn missing_catalog() {
        let bytes = replace_bytes(fixtures::MINIMAL, b"/Root 1 0 R", b"/Root 2 0 R");
        assert_eq!(load_pdf(&bytes).unwrap_err(), PdfError::MissingCatalog);
    }

    #[test]
    fn standard_embed_round_trip() {
        let p = packet("X");
        let out = embed_metadata(fixtures::MINIMAL, &p, EmbedMode::Standard).unwrap();
        assert!(out.starts_with(fixtures::MINIMAL));
        let doc = load_pdf(&out).unwrap();
        assert_eq!(doc.metadata_location(), MetadataLocation::StandardStream(ObjectId::new(7, 0)));
        assert_eq!(extract_metadata(&out).unwrap(), Some(p));
    }

    #[test]
    fn pdfa_mode_leaves_metadata_alone() {
        let p = packet("X");
        let out = embed_metadata(fixtures::FOREIGN_METADATA, &p, EmbedMode::PdfACompat).unwrap();
        let doc = load_pdf(&out).unwrap();
        assert_eq!(doc.catalog().get("Metadata"), Some(&Object::Reference(ObjectId::new(7, 0))));
        assert!(matches!(doc.metadata_location(), MetadataLocation::CustomCatalogEntry(_)));
        assert_eq!(extract_metadata(&out).unwrap(), Some(p));

        let out = embed_metadata(fixtures::MINIMAL, &packet("Y"), EmbedMode::PdfACompat).unwrap();
        assert!(!load_pdf(&out).unwrap().catalog().contains_key("Metadata"));
    }

    #[test]
    fn newest_packet_wins_across_modes() {
        for (first, second) in [
            (EmbedMode::Standard, EmbedMode::Standard),
            (EmbedMode::Standard, EmbedMode::PdfACompat),
            (EmbedMode::PdfACompat, EmbedMode::Standard),
            (EmbedMode::PdfACompat, EmbedMode::PdfACompat),
        ] {
            let once = embed_metadata(fixtures::MINIMAL, &packet("one"), first).unwrap();
            let twice = embed_metadata(&once, &packet("two"), second).unwrap();
            assert!(twice.starts_with(&once));
            assert_eq!(extract_metadata(&twice).unwrap(), Some(packet("two")), "{first:?} then {second:?}");
        }
    }

    #[test]
    fn embeds_into_xref_stream_file() {
        let p = packet("Z");
        let out = embed_metadata(fixtures::XREF_STREAM, &p, EmbedMode::Standard).unwrap();
        let doc = load_pdf(&out).unwrap();
        assert!(doc.get(ObjectId::new(3, 0)).is_some());
        assert_eq!(extract_metadata(&out).unwrap(), Some(p));
    }

    #[test]
    fn foreign_metadata_reads_as_absent() {
        assert_eq!(extract_metadata(fixtures::FOREIGN_METADATA).unwrap(), None);
        assert_eq!(extract_metadata(fixtures::MINIMAL).unwrap(), None);
    }

    #[test]
    fn invalid_xmp_in_located_stream_is_an_error() {
        let bogus = XmpPacket::from_bytes(b"<a xmlns:orkgp=\"https://orkg.org/property/\"/>".to_vec()).unwrap();
        let out = embed_metadata(fixtures::MINIMAL, &bogus, EmbedMode::Standard).unwrap();
        assert!(matches!(
            extract_metadata(&out),
            Err(PdfError::Metadata(XmpError::MalformedPacket(_)))
        ));
    }
}
