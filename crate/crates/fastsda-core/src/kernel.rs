//! RBF kernel computation, double-centering, out-of-sample centering, the
//! mean-distance length-scale heuristic, and prototype selection for the
//! approximate kernel path.

use crate::cluster::{kmeans, KMEANS_MAX_ITERS};
use crate::error::KernelError;
use crate::matrix::{euclidean_distance, squared_distance, Matrix};
use crate::rng::SeedRng;
use rand::seq::SliceRandom;

/// How the approximate path treats centering.
///
/// `InputSpace` (default): the data matrix is mean-centered and the r x N
/// kernel is used as-is, never double-centered. `FeatureSpace`: prototypes
/// are training samples and the approximate kernel is the corresponding
/// rows of the double-centered training kernel, which makes
/// prototypes-equal-training exactly reproduce the full kernel solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxCentering {
    InputSpace,
    FeatureSpace,
}

/// Prototype selection strategy for the approximate kernel.
///
/// The literature also mentions per-subclass clustering and resampled
/// synthetic prototypes; only the two strategies used experimentally are
/// implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrototypeStrategy {
    /// `r` distinct training columns, drawn without replacement.
    RandomTrain,
    /// `r` k-means centers of all training data, classes ignored.
    KmeansAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Exact,
    Approximate,
}

/// RBF kernel configuration.
#[derive(Debug, Clone)]
pub struct KernelConfig {
    pub sigma: f64,
    pub mode: KernelMode,
    pub prototype_count: usize,
    pub prototype_strategy: PrototypeStrategy,
    pub approx_centering: ApproxCentering,
}

impl KernelConfig {
    pub fn exact(sigma: f64) -> Self {
        Self {
            sigma,
            mode: KernelMode::Exact,
            prototype_count: 0,
            prototype_strategy: PrototypeStrategy::RandomTrain,
            approx_centering: ApproxCentering::InputSpace,
        }
    }

    pub fn approximate(sigma: f64, r: usize, strategy: PrototypeStrategy) -> Self {
        Self {
            sigma,
            mode: KernelMode::Approximate,
            prototype_count: r,
            prototype_strategy: strategy,
            approx_centering: ApproxCentering::InputSpace,
        }
    }
}

/// Row means and grand mean of the training kernel, kept for centering
/// out-of-sample columns consistently.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringStats {
    pub row_means: Vec<f64>,
    pub grand_mean: f64,
}

/// `exp(-|a_i - b_j|^2 / (2 sigma^2))` for every column pair of `a` and `b`.
pub fn rbf_kernel(a: &Matrix, b: &Matrix, sigma: f64) -> Result<Matrix, KernelError> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(KernelError::NonpositiveSigma(sigma));
    }
    assert_eq!(a.rows(), b.rows(), "feature dimensions must agree");
    let denom = 2.0 * sigma * sigma;
    let a_cols: Vec<Vec<f64>> = (0..a.cols()).map(|c| a.col(c)).collect();
    let b_cols: Vec<Vec<f64>> = (0..b.cols()).map(|c| b.col(c)).collect();
    let mut k = Matrix::zeros(a.cols(), b.cols());
    for (i, ai) in a_cols.iter().enumerate() {
        for (j, bj) in b_cols.iter().enumerate() {
            k.set(i, j, (-squared_distance(ai, bj) / denom).exp());
        }
    }
    Ok(k)
}

/// Mean Euclidean distance over all unordered column pairs of `x`; the
/// paper's length-scale heuristic. Exact O(n^2) enumeration.
pub fn mean_distance_sigma(x: &Matrix) -> Result<f64, KernelError> {
    let n = x.cols();
    if n < 2 {
        return Err(KernelError::TooFewSamples);
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|c| x.col(c)).collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += euclidean_distance(&cols[i], &cols[j]);
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

/// Double-centers a symmetric kernel: `(I - E) K (I - E)` with `E = 11^T/N`.
/// Also returns the stats needed to center out-of-sample columns.
pub fn center_kernel(k: &Matrix) -> Result<(Matrix, CenteringStats), KernelError> {
    let n = k.rows();
    if k.cols() != n {
        return Err(KernelError::Linalg(
            crate::error::LinalgError::ShapeMismatch {
                expected: "square kernel".into(),
                got: format!("{}x{}", k.rows(), k.cols()),
            },
        ));
    }
    let asym = k.max_asymmetry();
    if asym > 1e-10 * k.max_abs().max(1e-300) {
        return Err(KernelError::Linalg(
            crate::error::LinalgError::NotSymmetric { max_asym: asym },
        ));
    }
    let row_means = k.row_means();
    let grand_mean = row_means.iter().sum::<f64>() / n as f64;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, k.get(i, j) - row_means[i] - row_means[j] + grand_mean);
        }
    }
    Ok((
        out,
        CenteringStats {
            row_means,
            grand_mean,
        },
    ))
}

/// Centers out-of-sample kernel columns `k_test` (train-by-test) consistently
/// with the training centering: column j becomes
/// `k_j - row_means - mean(k_j) 1 + grand_mean 1`.
pub fn center_test_columns(k_test: &Matrix, stats: &CenteringStats) -> Result<Matrix, KernelError> {
    let n = stats.row_means.len();
    if k_test.rows() != n {
        return Err(KernelError::Linalg(
            crate::error::LinalgError::ShapeMismatch {
                expected: format!("{n} rows indexed by training samples"),
                got: format!("{}", k_test.rows()),
            },
        ));
    }
    let mut out = Matrix::zeros(n, k_test.cols());
    for j in 0..k_test.cols() {
        let col_mean: f64 = (0..n).map(|i| k_test.get(i, j)).sum::<f64>() / n as f64;
        for i in 0..n {
            out.set(
                i,
                j,
                k_test.get(i, j) - stats.row_means[i] - col_mean + stats.grand_mean,
            );
        }
    }
    Ok(out)
}

/// Selected prototypes: the matrix of prototype columns plus, for the
/// random-train strategy, the training indices they came from.
#[derive(Debug, Clone)]
pub struct Prototypes {
    pub matrix: Matrix,
    pub train_indices: Option<Vec<usize>>,
}

/// Picks `r` prototype vectors from the training matrix per the configured
/// strategy.
pub fn select_prototypes(
    x: &Matrix,
    cfg: &KernelConfig,
    rng: &mut SeedRng,
) -> Result<Prototypes, KernelError> {
    let n = x.cols();
    let r = cfg.prototype_count;
    if r == 0 || r > n {
        return Err(KernelError::RTooLarge { r, n });
    }
    match cfg.prototype_strategy {
        PrototypeStrategy::RandomTrain => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            idx.truncate(r);
            Ok(Prototypes {
                matrix: x.select_columns(&idx),
                train_indices: Some(idx),
            })
        }
        PrototypeStrategy::KmeansAll => {
            let result = kmeans(x, r, rng, KMEANS_MAX_ITERS)
                .map_err(|_| KernelError::RTooLarge { r, n })?;
            Ok(Prototypes {
                matrix: result.centers,
                train_indices: None,
            })
        }
    }
}
