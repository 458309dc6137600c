//! Error types shared by all modules.

use thiserror::Error;

/// Errors raised by the dense linear-algebra kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("matrix is not symmetric (max asymmetry {max_asym:.3e} exceeds tolerance)")]
    NotSymmetric { max_asym: f64 },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NotConverged { sweeps: usize },
    #[error("matrix of size {n} exceeds the solver cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("orthonormalization dropped every column")]
    EmptyResult,
    #[error("matrix entries must be finite")]
    NonFiniteEntry,
    #[error("matrix dimensions must be at least 1x1")]
    EmptyMatrix,
}

/// Errors raised while clustering or assigning subclasses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("cannot form {k} clusters from {n} points")]
    DegenerateInput { n: usize, k: usize },
    #[error("class {class} has {have} samples but {needed} subclasses were requested")]
    ClassTooSmall {
        class: usize,
        have: usize,
        needed: usize,
    },
}

/// Errors raised while building target vectors or Laplacians.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TargetError {
    #[error("label layout invalid: {0}")]
    LayoutInvalid(String),
    #[error("target construction stayed rank deficient after {retries} redraws")]
    RankDeficient { retries: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Errors raised by kernel computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel length-scale must be positive, got {0}")]
    NonpositiveSigma(f64),
    #[error("need at least two samples to estimate a length-scale")]
    TooFewSamples,
    #[error("{r} prototypes requested but only {n} training samples exist")]
    RTooLarge { r: usize, n: usize },
    #[error("feature-space prototype mode requires prototypes drawn from training samples")]
    PrototypesNotTrainSamples,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Errors raised while fitting or applying projection models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("projection is rank deficient after normalization")]
    RankDeficientProjection,
    #[error("orthogonal normalization of a kernel model needs the training kernel")]
    MissingKernel,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Errors raised by dataset and model I/O.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("row {line} has {got} fields, expected {expected}")]
    RaggedRows {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("file {0} contains no data rows")]
    EmptyFile(String),
    #[error("view '{view}' has {got} samples, expected {expected}")]
    ViewShapeMismatch {
        view: String,
        expected: usize,
        got: usize,
    },
    #[error("manifest declares no labels file")]
    MissingLabels,
    #[error("unsupported model file header: {0}")]
    VersionMismatch(String),
    #[error("corrupt block in model file: {0}")]
    CorruptBlock(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised by the evaluation harness.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("class {class} has {have} samples, fewer than {folds} folds")]
    ClassTooSmall {
        class: usize,
        have: usize,
        folds: usize,
    },
    #[error("k={k} neighbors requested but only {n} training samples exist")]
    KTooLarge { k: usize, n: usize },
    #[error("data has no variance left to reduce")]
    DegenerateData,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Target(#[from] TargetError),
}
