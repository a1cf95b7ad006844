//! corpusdb populates embedded relational databases with horizontal and
//! vertical slices of large compressed bibliographic-metadata datasets,
//! runs SQL directly over the un-populated sources, links records across
//! datasets (affiliations to organizations, subjects to fields, journals
//! to ISSNs), and computes bibliometric measures such as the disruption
//! index, journal impact factor, and h-index family.
//!
//! The library is organized around the dataset shapes: [`sources`] reads
//! the physical formats in bounded memory, [`schema`] models the
//! relational layout and resolves slice requests, [`populate`] fills a
//! database file container by container, [`query`] evaluates SQL without
//! populating anything, [`link`] connects records across datasets, and
//! [`metrics`] computes measures over populated databases.

pub mod error;
pub mod link;
pub mod metrics;
pub mod populate;
pub mod query;
pub mod rows;
pub mod schema;
pub mod sources;
pub mod vtab;

pub use error::{Error, Result};

/// Crate version, reported by the CLI and the C interface.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
