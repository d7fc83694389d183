use crate::classify::ClassifyError;
use crate::dataset::{DatasetError, LoadError};
use crate::eval::EvalError;
use crate::fusion::FusionError;
use crate::pca::PcaError;

/// Any failure along the load → merge → reduce → classify → evaluate path.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Strips fold context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Fold { source, .. } => source.root(),
            other => other,
        }
    }
}
