//! File formats, instance generators, reports and the benchmark behind the
//! `vbal` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;

pub mod bench;
pub mod formats;
pub mod generate;
pub mod report;

/// Errors of the command-line layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] vbal_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Format(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 2 for exhausted restart or sampling budgets, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_budget_exhaustion() => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use vbal_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Contract(_) => "contract",
                E::Precondition(_) => "precondition",
                E::Singular { .. } => "singular",
                E::DegenerateFace => "degenerate_face",
                E::NotPsd(_) => "not_psd",
                E::Numerical(_) => "numerical",
                E::Invariant(_) => "invariant",
                E::OriginNotInterior => "origin_not_interior",
                E::RejectionExhausted { .. } => "rejection_exhausted",
                E::RestartBudget(_) => "restart_budget",
                E::PipelineExhausted { .. } => "pipeline_exhausted",
            },
            CliError::Io { .. } => "io",
            CliError::Format(_) => "format",
        }
    }
}
