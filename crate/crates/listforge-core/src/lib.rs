//! listforge-core: a mailing-list content warehouse.
//!
//! Raw archives are ingested into a schema-validated XML warehouse of
//! actors, institutions, dated functions, and recursive message threads.
//! Queries, entity resolution, external joins, and exports all run over an
//! immutable warehouse snapshot.

pub mod error;
pub mod model;
pub mod store;
pub mod validate;
pub mod xml;

pub mod chart;
pub mod config;
pub mod export;
pub mod identity;
pub mod ingest;
pub mod institutions;
pub mod integrate;
pub mod queries;
pub mod report;

pub use model::Warehouse;
pub use validate::{validate, ValidationReport};
