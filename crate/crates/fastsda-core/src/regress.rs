//! Regression of target vectors to projection directions, model
//! normalization, and out-of-sample transformation — the second half of the
//! spectral-regression solver.

use crate::error::ModelError;
use crate::kernel::{center_test_columns, rbf_kernel, CenteringStats, KernelConfig};
use crate::linalg::{cholesky_solve, gram_schmidt, gram_schmidt_tol};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    L2,
    Orthogonal,
}

/// Which Gram matrix the linear fit solves against. `Auto` picks the smaller
/// one; the explicit variants exist so the push-through equivalence of the
/// two routes can be exercised directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramSide {
    Auto,
    Features,
    Samples,
}

/// Kernel regression solver: the direct `(K + aI)^-1 T^T` shortcut or the
/// verbatim full-Gram `(K K^T + aI)^-1 K T^T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSolver {
    Direct,
    FullGram,
}

/// Extra state the feature-space approximate mode needs at transform time.
#[derive(Debug, Clone)]
pub struct FeatureSpaceSupport {
    pub train_x: Matrix,
    pub centering: CenteringStats,
    pub prototype_indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum ModelVariant {
    Linear {
        /// D x d projection directions.
        weights: Matrix,
        /// Training feature means, subtracted before projecting.
        mean: Vec<f64>,
    },
    Kernel {
        /// N x d coefficients over the training samples.
        coefficients: Matrix,
        /// Mean-centered training data, D x N.
        train_x: Matrix,
        kernel: KernelConfig,
        centering: CenteringStats,
        train_mean: Vec<f64>,
    },
    ApproxKernel {
        /// r x d coefficients over the prototypes.
        coefficients: Matrix,
        /// D x r prototype columns (centered coordinates).
        prototypes: Matrix,
        kernel: KernelConfig,
        train_mean: Vec<f64>,
        /// Present only in feature-space centering mode.
        feature_space: Option<FeatureSpaceSupport>,
    },
}

#[derive(Debug, Clone)]
pub struct ProjectionModel {
    pub variant: ModelVariant,
    pub normalization: Normalization,
}

impl ProjectionModel {
    /// Output dimensionality of the projection.
    pub fn dims(&self) -> usize {
        match &self.variant {
            ModelVariant::Linear { weights, .. } => weights.cols(),
            ModelVariant::Kernel { coefficients, .. } => coefficients.cols(),
            ModelVariant::ApproxKernel { coefficients, .. } => coefficients.cols(),
        }
    }

    /// Feature dimensionality the model expects from incoming data.
    pub fn input_dims(&self) -> usize {
        match &self.variant {
            ModelVariant::Linear { weights, .. } => weights.rows(),
            ModelVariant::Kernel { train_x, .. } => train_x.rows(),
            ModelVariant::ApproxKernel { prototypes, .. } => prototypes.rows(),
        }
    }
}

fn center_columns(x: &Matrix, mean: &[f64]) -> Matrix {
    x.center_rows(mean)
}

/// Raw (un-normalized) linear regression weights and the training mean.
///
/// Solves `(X X^T + aI) W = X T^T` on the feature side or the equivalent
/// `W = X (X^T X + aI)^-1 T^T` on the sample side; `Auto` picks whichever
/// Gram matrix is smaller, and the two agree by the push-through identity.
pub fn linear_weights(
    x: &Matrix,
    target_rows: &Matrix,
    alpha: f64,
    side: GramSide,
) -> Result<(Matrix, Vec<f64>), ModelError> {
    assert_eq!(
        x.cols(),
        target_rows.cols(),
        "targets must cover every training sample"
    );
    let mean = x.row_means();
    let xc = center_columns(x, &mean);
    let (d, n) = (x.rows(), x.cols());
    let use_features = match side {
        GramSide::Auto => n > d,
        GramSide::Features => true,
        GramSide::Samples => false,
    };
    let t_t = target_rows.transpose();
    let weights = if use_features {
        let mut gram = xc.times_own_transpose();
        gram.add_diagonal(alpha);
        cholesky_solve(&gram, &xc.matmul(&t_t))?
    } else {
        let mut gram = xc.transpose().times_own_transpose();
        gram.add_diagonal(alpha);
        xc.matmul(&cholesky_solve(&gram, &t_t)?)
    };
    Ok((weights, mean))
}

/// Fits the linear projection model: center, regress, normalize.
pub fn fit_linear(
    x: &Matrix,
    target_rows: &Matrix,
    alpha: f64,
    normalization: Normalization,
) -> Result<ProjectionModel, ModelError> {
    let (weights, mean) = linear_weights(x, target_rows, alpha, GramSide::Auto)?;
    let model = ProjectionModel {
        variant: ModelVariant::Linear { weights, mean },
        normalization,
    };
    normalize_projection(model, normalization, None)
}

/// Kernel regression coefficients for a double-centered training kernel.
///
/// `Direct` solves `(K + aI) A = T^T`; `FullGram` solves the verbatim
/// `(K K^T + aI) A = K T^T`. Centered kernels are singular, so `alpha` must
/// be positive.
pub fn fit_kernel(
    k_centered: &Matrix,
    target_rows: &Matrix,
    alpha: f64,
    solver: KernelSolver,
) -> Result<Matrix, ModelError> {
    assert!(alpha > 0.0, "centered kernels are singular; need alpha > 0");
    let t_t = target_rows.transpose();
    let a = match solver {
        KernelSolver::Direct => {
            let mut lhs = k_centered.clone();
            lhs.add_diagonal(alpha);
            cholesky_solve(&lhs, &t_t)?
        }
        KernelSolver::FullGram => {
            let mut lhs = k_centered.times_own_transpose();
            lhs.add_diagonal(alpha);
            cholesky_solve(&lhs, &k_centered.matmul(&t_t))?
        }
    };
    Ok(a)
}

/// Approximate kernel regression: `(K_hat K_hat^T + aI)^-1 K_hat T^T` on the
/// r x r system.
pub fn fit_kernel_approx(
    k_hat: &Matrix,
    target_rows: &Matrix,
    alpha: f64,
) -> Result<Matrix, ModelError> {
    assert!(alpha > 0.0, "approximate kernel regression needs alpha > 0");
    let mut lhs = k_hat.times_own_transpose();
    lhs.add_diagonal(alpha);
    let rhs = k_hat.matmul(&target_rows.transpose());
    Ok(cholesky_solve(&lhs, &rhs)?)
}

/// Projects new samples (columns of `x_new`) into the learned space.
pub fn transform(model: &ProjectionModel, x_new: &Matrix) -> Result<Matrix, ModelError> {
    if x_new.rows() != model.input_dims() {
        return Err(ModelError::Linalg(
            crate::error::LinalgError::ShapeMismatch {
                expected: format!("{} features", model.input_dims()),
                got: format!("{}", x_new.rows()),
            },
        ));
    }
    match &model.variant {
        ModelVariant::Linear { weights, mean } => {
            let xc = center_columns(x_new, mean);
            Ok(weights.transpose().matmul(&xc))
        }
        ModelVariant::Kernel {
            coefficients,
            train_x,
            kernel,
            centering,
            train_mean,
        } => {
            let xc = center_columns(x_new, train_mean);
            let k_test = rbf_kernel(train_x, &xc, kernel.sigma)?;
            let k_test = center_test_columns(&k_test, centering)?;
            Ok(coefficients.transpose().matmul(&k_test))
        }
        ModelVariant::ApproxKernel {
            coefficients,
            prototypes,
            kernel,
            train_mean,
            feature_space,
        } => {
            let xc = center_columns(x_new, train_mean);
            let k_hat = match feature_space {
                None => rbf_kernel(prototypes, &xc, kernel.sigma)?,
                Some(support) => {
                    let k_test = rbf_kernel(&support.train_x, &xc, kernel.sigma)?;
                    let centered = center_test_columns(&k_test, &support.centering)?;
                    centered.select_rows(&support.prototype_indices)
                }
            };
            Ok(coefficients.transpose().matmul(&k_hat))
        }
    }
}

fn l2_normalize_columns(m: &Matrix) -> Result<Matrix, ModelError> {
    let mut out = m.clone();
    for c in 0..m.cols() {
        let norm: f64 = (0..m.rows()).map(|r| m.get(r, c).powi(2)).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(ModelError::RankDeficientProjection);
        }
        for r in 0..m.rows() {
            out.set(r, c, m.get(r, c) / norm);
        }
    }
    Ok(out)
}

// Modified Gram-Schmidt in the inner product <u, v> = u^T M v.
fn weighted_orthonormalize(m: &Matrix, metric: &Matrix) -> Result<Matrix, ModelError> {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(m.cols());
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        let mb = metric.matmul(&Matrix::column_vector(b));
        a.iter().zip(mb.col(0)).map(|(x, y)| x * y).sum()
    };
    for c in 0..m.cols() {
        let mut v = m.col(c);
        for _pass in 0..2 {
            for q in &kept {
                let proj = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q.iter()) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = dot(&v, &v).max(0.0).sqrt();
        if norm < gram_schmidt_tol(m.rows()) {
            return Err(ModelError::RankDeficientProjection);
        }
        for vi in &mut v {
            *vi /= norm;
        }
        kept.push(v);
    }
    let mut out = Matrix::zeros(m.rows(), kept.len());
    for (c, q) in kept.iter().enumerate() {
        out.set_col(c, q);
    }
    Ok(out)
}

/// Re-normalizes a fitted model. `Orthogonal` mode for kernel models needs
/// the training kernel (the inner product is K-weighted); approximate models
/// use the prototype Gram matrix.
pub fn normalize_projection(
    model: ProjectionModel,
    mode: Normalization,
    training_kernel: Option<&Matrix>,
) -> Result<ProjectionModel, ModelError> {
    let ProjectionModel { variant, .. } = model;
    let variant = match variant {
        ModelVariant::Linear { weights, mean } => {
            let weights = match mode {
                Normalization::L2 => l2_normalize_columns(&weights)?,
                Normalization::Orthogonal => {
                    let q = gram_schmidt(&weights, gram_schmidt_tol(weights.rows()))
                        .map_err(|_| ModelError::RankDeficientProjection)?;
                    if q.cols() != weights.cols() {
                        return Err(ModelError::RankDeficientProjection);
                    }
                    q
                }
            };
            ModelVariant::Linear { weights, mean }
        }
        ModelVariant::Kernel {
            coefficients,
            train_x,
            kernel,
            centering,
            train_mean,
        } => {
            let coefficients = match mode {
                Normalization::L2 => l2_normalize_columns(&coefficients)?,
                Normalization::Orthogonal => {
                    let k = training_kernel.ok_or(ModelError::MissingKernel)?;
                    weighted_orthonormalize(&coefficients, k)?
                }
            };
            ModelVariant::Kernel {
                coefficients,
                train_x,
                kernel,
                centering,
                train_mean,
            }
        }
        ModelVariant::ApproxKernel {
            coefficients,
            prototypes,
            kernel,
            train_mean,
            feature_space,
        } => {
            let coefficients = match mode {
                Normalization::L2 => l2_normalize_columns(&coefficients)?,
                Normalization::Orthogonal => {
                    let gram = match training_kernel {
                        Some(k) => k.clone(),
                        None => rbf_kernel(&prototypes, &prototypes, kernel.sigma)?,
                    };
                    weighted_orthonormalize(&coefficients, &gram)?
                }
            };
            ModelVariant::ApproxKernel {
                coefficients,
                prototypes,
                kernel,
                train_mean,
                feature_space,
            }
        }
    };
    Ok(ProjectionModel {
        variant,
        normalization: mode,
    })
}
