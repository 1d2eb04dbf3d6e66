//! Seeded benchmark campaigns over the codec and the channel simulator, with
//! JSON and CSV report emission.

pub mod campaign;
pub mod report;

pub use campaign::{
    find_cliff, make_input, parity_override, run_cell, Campaign, CampaignKind, Cell, CellResult,
    CliffResult,
};
pub use report::{csv_string, emit_reports, load_reports, run_campaign, write_csv, CampaignReport};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Codec(#[from] oligo_codec::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: std::path::PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, BenchError>;
