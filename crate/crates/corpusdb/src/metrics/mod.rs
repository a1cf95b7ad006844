//! Bibliometric measures: citation-graph construction, disruption index,
//! journal impact factor, h-index family, deterministic ranking, author
//! estimation, page counting, field-pair statistics, title
//! classification, and clustering samples.

mod authors;
mod cd;
mod fields;
mod graph;
mod hindex;
mod jif;
mod pages;
mod rank;
mod synthesis;

pub use authors::{estimate_author_count, AuthorCountEstimate};
pub use cd::{cd_fraction, cd_index, cd_index_all, horizon_days, CdResult};
pub use fields::{field_pair_stats, FieldPairStat};
pub use graph::{build_graph, clustering_sample, days_since_epoch, CitationGraph};
pub use hindex::{h5_by_journal, h5_by_person, h_index};
pub use jif::{impact_factor, JifReport, JifRow};
pub use pages::{is_citable, page_count, PageCount, PageReject};
pub use rank::pseudo_random_rank;
pub use synthesis::{classify_title, TitleCategory};
