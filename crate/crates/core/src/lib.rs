//! Domain model and analysis for appraising curated knowledge tables.

pub mod appraisal;
pub mod enrich;
pub mod html;
pub mod model;
pub mod session;

pub use model::*;
