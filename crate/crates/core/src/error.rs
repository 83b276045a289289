use std::fmt;
use std::path::PathBuf;

/// Stage of the estimation pipeline, used to tag propagated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Covariance,
    SubspaceSplit,
    SelectSubspaces,
    Tls,
    Matching,
    Doa,
    Spreads,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Covariance => "sample_covariance",
            Stage::SubspaceSplit => "subspace_split",
            Stage::SelectSubspaces => "select_subspaces",
            Stage::Tls => "tls_transform",
            Stage::Matching => "match_eigenvalues",
            Stage::Doa => "recover_doas",
            Stage::Spreads => "recover_spreads",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("singular TLS partition: cond(E22) = {cond:e}")]
    SingularPartition { cond: f64 },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("rank-deficient response matrix: sources {0} and {1} are not separable")]
    RankDeficient(usize, usize),
    #[error("rank-deficient response matrix")]
    RankDeficientMatrix,
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    #[error("near-unidentifiable configuration: {0}")]
    Unidentifiable(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io { path: path.into(), source }
    }

    /// Stage tag if the error came out of the estimation pipeline.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The innermost error, with stage tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
