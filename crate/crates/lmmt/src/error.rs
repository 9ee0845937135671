//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid utf-8 in {path}")]
    Decode { path: String },
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("vocabulary error: {0}")]
    Vocab(String),
    #[error("cipher error: {0}")]
    Cipher(String),
    #[error("language model error: {0}")]
    Lm(String),
    #[error("embedding error: {0}")]
    Embed(String),
    #[error("mapping error: {0}")]
    Mapping(String),
    #[error("phrase table error: {0}")]
    Phrase(String),
    #[error("decoder error: {0}")]
    Decoder(String),
    #[error("training error: {0}")]
    Train(String),
    #[error("weighting error: {0}")]
    Weighting(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("config error: key '{key}': {message}")]
    Config { key: String, message: String },
    #[error("file format error in {path}: {message}")]
    Format { path: String, message: String },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
