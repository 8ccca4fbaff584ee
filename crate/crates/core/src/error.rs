use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An identity assertion connects a class with an individual.
    #[error("owl:sameAs between class <{class}> and individual <{individual}>")]
    VocabularyMixing { class: String, individual: String },

    #[error("unknown individual <{0}>")]
    UnknownIndividual(String),

    #[error("unknown class <{0}>")]
    UnknownClass(String),

    #[error("unknown predicate <{0}>")]
    UnknownPredicate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("similarity is undefined when both aggregated arguments are empty")]
    UndefinedRatio,

    #[error("invalid configuration document: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::VocabularyMixing { .. } => 1,
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}
