//! Knowledge-graph side of the workflow: [`kg`] maps annotation documents to
//! paper records and uploads them, [`mockgraph`] serves an in-memory graph
//! API for hermetic runs.

pub mod kg;
pub mod mockgraph;

pub use kg::{
    ingest, map_to_paper, resolve_ids, upload, GraphClient, KgError, Overrides, PaperDocument,
    PaperRecord, ResolvedRecord, UploadMode, UploadReport,
};
pub use mockgraph::{serve, GraphStore, MockError, MockGraph};
