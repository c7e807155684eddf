//! Contribution annotations for LaTeX sources.
//!
//! The crate covers the offline half of the workflow: [`parser`] turns
//! annotated source into an [`AnnotationDocument`], [`xmp`] serializes it to
//! an XMP packet and back, and [`pdf`] embeds that packet into an existing
//! PDF by incremental update or extracts it again.

pub mod model;
pub mod parser;
pub mod pdf;
pub mod xmp;

pub use model::{
    group_contributions, validate, AnnotationDocument, Bibliographic, EntityLink, GroupEntry,
    MandatoryKind, NamespaceDecl, PropertyAnnotation, PropertyKind, SourceDigest, Span, Warning,
    WarningCode,
};
pub use pdf::{embed_metadata, extract_metadata, load_pdf, EmbedMode, MetadataLocation, PdfDocument, PdfError};
pub use parser::{parse_source, strip_annotations, ParseError, SourceDocument, StripError};
pub use xmp::{parse_xmp, serialize_xmp, XmpError, XmpOptions, XmpPacket};
