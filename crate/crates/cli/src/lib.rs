//! Batch runs of the squeezeprep library: configuration, command drivers and
//! run manifests.

pub mod config;
pub mod manifest;
pub mod run;

use serde_json::json;

pub use config::RunConfig;
pub use run::{execute, RunReport, Verb};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for unusable configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a tripped numerical guard.
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numerical guard: {message}")]
    Guard {
        message: String,
        details: serde_json::Value,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Guard { .. } => EXIT_GUARD,
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
        }
    }
}

impl From<squeezeprep::Error> for CliError {
    fn from(e: squeezeprep::Error) -> Self {
        use squeezeprep::Error as E;
        let message = e.to_string();
        match e {
            E::Leakage {
                t,
                u,
                population,
                threshold,
            } => CliError::Guard {
                message,
                details: json!({
                    "guard": "leakage",
                    "t": t,
                    "u": u,
                    "population": population,
                    "threshold": threshold,
                }),
            },
            E::GridTooNarrow { boundary } => CliError::Guard {
                message,
                details: json!({ "guard": "grid_too_narrow", "boundary_max": boundary }),
            },
            E::TruncationTooSmall { tail } => CliError::Guard {
                message,
                details: json!({ "guard": "truncation", "tail": tail }),
            },
            E::NoSolution(_) | E::Degenerate(_) | E::Consistency(_) | E::NotHermitian { .. } => {
                CliError::Guard {
                    message,
                    details: json!({ "guard": "numerical" }),
                }
            }
            E::Io(source) => CliError::Io {
                path: String::new(),
                source,
            },
            _ => CliError::Config(message),
        }
    }
}
