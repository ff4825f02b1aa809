//! File formats, the experiment harness and the command-line front end for
//! `im-meta`.

pub mod checkpoint;
pub mod harness;
pub mod io;
pub mod records;

pub use harness::{run_suite, DatasetSpec, SuiteConfig, SuiteOutcome};
pub use records::{read_records, write_records, ExperimentRecord};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] im_meta::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Format(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
