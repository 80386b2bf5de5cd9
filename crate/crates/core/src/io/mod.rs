//! Serialization, configuration and the end-to-end pipeline.

pub mod config;
pub mod pajek;
pub mod pipeline;
pub mod table;

pub use config::RunConfig;
pub use pajek::export_pajek;
pub use pipeline::{load_corpora, run_child, run_pipeline, ChildSummary};
pub use table::{format_number, Table};
