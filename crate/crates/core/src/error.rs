//! Error types shared across the crate.

use std::fmt;
use std::path::PathBuf;

/// Errors produced by fitting, scoring, search and I/O.
#[derive(Debug)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    Domain(String),
    /// An iterative evaluation failed to converge within its iteration cap.
    NoConvergence { what: &'static str, residual: f64 },
    /// The selected design columns are numerically rank deficient.
    RankDeficient { subset: Vec<usize> },
    /// A fit needed by a criterion is degenerate (zero residual variance).
    DegenerateFit(String),
    /// Invalid configuration or usage.
    Config(String),
    /// Filesystem failure, carrying the offending path.
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed input file.
    Parse { path: PathBuf, line: usize, msg: String },
    /// A failure inside one Monte Carlo replication, with its coordinates.
    Replication { n: usize, rep: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for numerical failures (rank, convergence, degeneracy, domain),
    /// false for configuration and I/O problems.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Domain(_)
            | Error::NoConvergence { .. }
            | Error::RankDeficient { .. }
            | Error::DegenerateFit(_) => true,
            Error::Replication { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NoConvergence { what, residual } => {
                write!(f, "{what} did not converge (residual {residual:e})")
            }
            Error::RankDeficient { subset } => {
                write!(f, "rank-deficient design for subset {{")?;
                for (i, ix) in subset.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{ix}")?;
                }
                write!(f, "}}")
            }
            Error::DegenerateFit(msg) => write!(f, "degenerate fit: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
            Error::Parse { path, line, msg } => {
                write!(f, "parse error in {} at line {line}: {msg}", path.display())
            }
            Error::Replication { n, rep, source } => {
                write!(f, "replication (n={n}, rep={rep}) failed: {source}")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            Error::Replication { source, .. } => Some(source),
            _ => None,
        }
    }
}
