use veilkit::classify::ClassifyError;
use veilkit::eval::EvalError;
use veilkit::pca::PcaError;
use veilkit::Error;

pub const CONFIG: u8 = 1;
pub const DATA: u8 = 2;
pub const RUNTIME: u8 = 3;

/// A message and the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: CONFIG, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure { code: DATA, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Failure { code: RUNTIME, message: message.into() }
    }
}

/// Bad options are configuration errors, unreadable or inconsistent
/// inputs are data errors, and anything that fails while folds run is a
/// runtime error.
fn code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Classify(ClassifyError::InvalidSpec(_))
        | Error::Pca(PcaError::InvalidRetention(_))
        | Error::Eval(EvalError::InvalidFoldCount(_) | EvalError::TooFewSamples { .. }) => CONFIG,
        Error::Load(_) | Error::Dataset(_) | Error::Fusion(_) => DATA,
        _ => RUNTIME,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: code_for(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}
