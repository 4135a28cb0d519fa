//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is inconsistent or out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An array did not have the shape an operation requires.
    #[error("shape error in {context}: expected {expected}, got {got}")]
    Shape {
        context: String,
        expected: String,
        got: String,
    },

    /// The thin-plate-spline system could not be solved.
    #[error("singular TPS system (condition estimate {condition:.3e}); control points may be collinear")]
    TpsSingular { condition: f64 },

    /// A transcript contains characters outside the recognizer's charset.
    #[error("cannot encode {offenders:?}: not in the {charset_size}-character set")]
    UnknownCharacters {
        offenders: Vec<char>,
        charset_size: usize,
    },

    /// A token index that no symbol maps to.
    #[error("token index {0} is not a printable character")]
    InvalidToken(u32),

    /// A dataset manifest line that does not parse.
    #[error("{path}:{line}: {message}")]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A manifest entry whose image file does not exist.
    #[error("{path}:{line}: image file not found: {image}")]
    MissingImage {
        path: PathBuf,
        line: usize,
        image: PathBuf,
    },

    /// The dataset has no records.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// A named font style the synthesizer does not provide.
    #[error("missing font resource: {0:?}")]
    MissingFont(String),

    /// A character the built-in font cannot draw.
    #[error("no glyph for {0:?} in the built-in font")]
    MissingGlyph(char),

    /// Loss over a target with no non-pad positions.
    #[error("loss over an all-pad target")]
    EmptyTarget,

    /// Training loss became non-finite.
    #[error("training diverged at step {step}: loss = {loss}")]
    Diverged { step: usize, loss: f64 },

    /// A checkpoint file that cannot be read back.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// The checkpoint was written for a different charset.
    #[error("charset mismatch: checkpoint has {found} symbols, vocabulary has {expected}")]
    CharsetMismatch { expected: usize, found: usize },

    /// An image file that cannot be decoded.
    #[error("cannot decode image {path}: {source}")]
    ImageDecode {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn shape(context: impl Into<String>, expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::Shape {
            context: context.into(),
            expected: expected.into(),
            got: got.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
