use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("unknown process `{0}`")]
    UnknownProcess(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("invalid input at {path}: {message}")]
    Input { path: String, message: String },
    #[error("automaton is not I-diamond: state `{state}`, letters `{a}`/`{b}`")]
    NotDiamond { state: String, a: String, b: String },
    #[error("diam undefined: {0}")]
    DiamUndefined(String),
    #[error("diam target undefined: {0}")]
    TargetUndefined(String),
    #[error("dependence graph is not triangulated")]
    NotTriangulated,
    #[error("dependence graph is not connected; use forest_decompose first")]
    NotConnected,
    #[error("process `{0}` is not a leaf")]
    NotLeaf(String),
    #[error("automaton is not short for leaf `{0}`: local cycle through {1:?}")]
    NotShort(String, Vec<String>),
    #[error("trace class too large (more than {0} words)")]
    ClassTooLarge(usize),
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("integrity error: {0}")]
    Integrity(String),
}

impl Error {
    pub fn input(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
