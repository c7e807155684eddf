//! PDF files produced by `fixtures/make_fixtures.py`, independently of the
//! Rust writer.

/// One page, classic xref table, `/Info` and `/ID` in the trailer.
pub const MINIMAL: &[u8] = include_bytes!("../fixtures/minimal.pdf");
/// Like [`MINIMAL`] but the catalog already carries a compressed, generic XMP
/// packet under `/Metadata`.
pub const FOREIGN_METADATA: &[u8] = include_bytes!("../fixtures/foreign_metadata.pdf");
/// [`MINIMAL`] plus one incremental update that replaces the Info object.
pub const UPDATED: &[u8] = include_bytes!("../fixtures/updated.pdf");
/// PDF 1.5 layout with an object stream and a predictor-encoded xref stream.
pub const XREF_STREAM: &[u8] = include_bytes!("../fixtures/xref_stream.pdf");

pub const ALL: [(&str, &[u8]); 4] = [
    ("minimal", MINIMAL),
    ("foreign_metadata", FOREIGN_METADATA),
    ("updated", UPDATED),
    ("xref_stream", XREF_STREAM),
];
