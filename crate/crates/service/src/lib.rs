//! Persistence, HTTP API and command line for table appraisal.

pub mod api;
pub mod bundle;
pub mod cli;
pub mod engine;
pub mod render;
pub mod store;

pub use bundle::{import_bundle, ImportError, ImportOutcome};
pub use engine::{Engine, EngineError, External, TableSummary, TimelineView};
pub use store::{Store, StoreError};
