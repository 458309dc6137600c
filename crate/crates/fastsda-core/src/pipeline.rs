//! End-to-end fit paths: subclass labels in, fitted projection model out.
//! Shared by the evaluation harness and the command-line front end.
//!
//! Clustering is deliberately not performed here — callers decide whether
//! its cost belongs to the measured fit (it does for multi-view timing,
//! not for single-view) and whether labels are shared across methods.

use crate::cluster::{assign_subclasses, SubclassAssignment};
use crate::error::ModelError;
use crate::kernel::{
    center_kernel, mean_distance_sigma, rbf_kernel, select_prototypes, ApproxCentering,
    KernelConfig, KernelMode,
};
use crate::layout::LabelLayout;
use crate::matrix::Matrix;
use crate::regress::{
    fit_kernel, fit_kernel_approx, fit_linear, normalize_projection, transform,
    FeatureSpaceSupport, KernelSolver, ModelVariant, Normalization, ProjectionModel,
};
use crate::rng::{RngStream, SeedRng};
use crate::targets::{
    make_targets_multiview, make_targets_single, target_cap_multiview, target_cap_single,
};

/// Seed-stream tags; every stochastic stage hashes its own tag so streams
/// never collide.
pub mod stream {
    pub const CLUSTER: u64 = 1;
    pub const TARGETS: u64 = 2;
    pub const PROTOTYPES: u64 = 3;
    pub const FOLDS: u64 = 4;
    pub const SYNTH: u64 = 5;
}

/// Clusters one view into subclasses with the canonical per-class protocol.
pub fn cluster_subclasses(
    x: &Matrix,
    class_labels: &[usize],
    z: usize,
    seed: u64,
    view: usize,
) -> Result<SubclassAssignment, crate::error::ClusterError> {
    let rng = SeedRng::from_parts(seed, &[stream::CLUSTER, view as u64, z as u64]);
    assign_subclasses(x, class_labels, z, &rng, view)
}

/// Fits the linear fast path: structured targets then ridge regression.
pub fn fit_fast_linear(
    x: &Matrix,
    class_labels: &[usize],
    subclass_labels: &[usize],
    z: usize,
    alpha: f64,
    normalization: Normalization,
    seed: u64,
) -> Result<ProjectionModel, ModelError> {
    let layout = LabelLayout::single_view(class_labels, subclass_labels, z)?;
    let cap = target_cap_single(&layout, x.rows());
    let mut rng = SeedRng::from_parts(seed, &[stream::TARGETS, z as u64]);
    let targets = make_targets_single(&layout, cap, &mut rng)?;
    fit_linear(
        x,
        &targets.in_original_order(&layout),
        alpha,
        normalization,
    )
}

/// Fits the exact-kernel fast path. `sigma` falls back to the mean pairwise
/// training distance when not given.
#[allow(clippy::too_many_arguments)]
pub fn fit_fast_kernel(
    x: &Matrix,
    class_labels: &[usize],
    subclass_labels: &[usize],
    z: usize,
    alpha: f64,
    sigma: Option<f64>,
    solver: KernelSolver,
    normalization: Normalization,
    seed: u64,
) -> Result<ProjectionModel, ModelError> {
    let layout = LabelLayout::single_view(class_labels, subclass_labels, z)?;
    let n = x.cols();
    let cap = target_cap_single(&layout, n);
    let mut rng = SeedRng::from_parts(seed, &[stream::TARGETS, z as u64]);
    let targets = make_targets_single(&layout, cap, &mut rng)?;
    let t_rows = targets.in_original_order(&layout);

    let train_mean = x.row_means();
    let xc = x.center_rows(&train_mean);
    let sigma = match sigma {
        Some(s) => s,
        None => mean_distance_sigma(&xc)?,
    };
    let k = rbf_kernel(&xc, &xc, sigma)?;
    let (k_centered, stats) = center_kernel(&k)?;
    let coefficients = fit_kernel(&k_centered, &t_rows, alpha, solver)?;
    let model = ProjectionModel {
        variant: ModelVariant::Kernel {
            coefficients,
            train_x: xc,
            kernel: KernelConfig::exact(sigma),
            centering: stats,
            train_mean,
        },
        normalization,
    };
    match normalization {
        Normalization::L2 => normalize_projection(model, normalization, None),
        Normalization::Orthogonal => {
            normalize_projection(model, normalization, Some(&k_centered))
        }
    }
}

/// Fits the approximate-kernel fast path with `r` prototypes.
#[allow(clippy::too_many_arguments)]
pub fn fit_fast_approx(
    x: &Matrix,
    class_labels: &[usize],
    subclass_labels: &[usize],
    z: usize,
    alpha: f64,
    sigma: Option<f64>,
    kernel_cfg: &KernelConfig,
    normalization: Normalization,
    seed: u64,
) -> Result<ProjectionModel, ModelError> {
    assert_eq!(kernel_cfg.mode, KernelMode::Approximate);
    let layout = LabelLayout::single_view(class_labels, subclass_labels, z)?;
    let cap = target_cap_single(&layout, x.cols().min(kernel_cfg.prototype_count));
    let mut rng = SeedRng::from_parts(seed, &[stream::TARGETS, z as u64]);
    let targets = make_targets_single(&layout, cap, &mut rng)?;
    let t_rows = targets.in_original_order(&layout);

    let train_mean = x.row_means();
    let xc = x.center_rows(&train_mean);
    let sigma = match sigma {
        Some(s) => s,
        None => mean_distance_sigma(&xc)?,
    };
    let mut cfg = kernel_cfg.clone();
    cfg.sigma = sigma;
    let mut proto_rng = SeedRng::from_parts(seed, &[stream::PROTOTYPES, z as u64]);
    let prototypes = select_prototypes(&xc, &cfg, &mut proto_rng)?;
    let (coefficients, feature_space) = match cfg.approx_centering {
        ApproxCentering::InputSpace => {
            let k_hat = rbf_kernel(&prototypes.matrix, &xc, sigma)?;
            (fit_kernel_approx(&k_hat, &t_rows, alpha)?, None)
        }
        ApproxCentering::FeatureSpace => {
            let indices = prototypes
                .train_indices
                .clone()
                .ok_or(crate::error::KernelError::PrototypesNotTrainSamples)?;
            let k = rbf_kernel(&xc, &xc, sigma)?;
            let (k_centered, stats) = center_kernel(&k)?;
            let k_hat = k_centered.select_rows(&indices);
            (
                fit_kernel_approx(&k_hat, &t_rows, alpha)?,
                Some(FeatureSpaceSupport {
                    train_x: xc.clone(),
                    centering: stats,
                    prototype_indices: indices,
                }),
            )
        }
    };
    let model = ProjectionModel {
        variant: ModelVariant::ApproxKernel {
            coefficients,
            prototypes: prototypes.matrix,
            kernel: cfg,
            train_mean,
            feature_space,
        },
        normalization,
    };
    normalize_projection(model, normalization, None)
}

/// Joint projection of several views into one latent space: one model per
/// view, embeddings concatenated at classification time.
#[derive(Debug, Clone)]
pub struct MultiViewModel {
    pub views: Vec<ProjectionModel>,
}

impl MultiViewModel {
    pub fn dims(&self) -> usize {
        self.views.first().map_or(0, |m| m.dims())
    }

    /// Concatenated per-view embeddings, `(V * d) x m`.
    pub fn transform(&self, views: &[Matrix]) -> Result<Matrix, ModelError> {
        assert_eq!(views.len(), self.views.len());
        let mut out: Option<Matrix> = None;
        for (model, x) in self.views.iter().zip(views.iter()) {
            let y = transform(model, x)?;
            out = Some(match out {
                None => y,
                Some(acc) => acc.vstack(&y),
            });
        }
        Ok(out.expect("at least one view"))
    }
}

// Jointly l2-normalizes the stacked projection columns across views.
fn l2_normalize_stacked(mut per_view: Vec<Matrix>) -> Result<Vec<Matrix>, ModelError> {
    let dims = per_view[0].cols();
    for c in 0..dims {
        let norm: f64 = per_view
            .iter()
            .map(|w| (0..w.rows()).map(|r| w.get(r, c).powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        if norm < 1e-300 {
            return Err(ModelError::RankDeficientProjection);
        }
        for w in &mut per_view {
            for r in 0..w.rows() {
                let v = w.get(r, c) / norm;
                w.set(r, c, v);
            }
        }
    }
    Ok(per_view)
}

/// Fits multi-view linear fastSDA. The stacked Gram matrix is block
/// diagonal, so the joint regression splits into one solve per view against
/// that view's slice of the target matrix.
pub fn fit_multiview_linear(
    views: &[Matrix],
    class_labels: &[usize],
    subclass_labels: &[Vec<usize>],
    z: usize,
    alpha: f64,
    seed: u64,
) -> Result<MultiViewModel, ModelError> {
    let layout = LabelLayout::multi_view(class_labels, subclass_labels, z)?;
    let dims: Vec<usize> = views.iter().map(|v| v.rows()).collect();
    let cap = target_cap_multiview(&layout, &dims);
    let mut rng = SeedRng::from_parts(seed, &[stream::TARGETS, z as u64]);
    let targets = make_targets_multiview(&layout, cap, &mut rng)?;
    let mut raw = Vec::with_capacity(views.len());
    let mut means = Vec::with_capacity(views.len());
    for (v, x) in views.iter().enumerate() {
        let t_v = targets.view_block(&layout, v);
        let (w, mean) =
            crate::regress::linear_weights(x, &t_v, alpha, crate::regress::GramSide::Auto)?;
        raw.push(w);
        means.push(mean);
    }
    let normalized = l2_normalize_stacked(raw)?;
    let models = normalized
        .into_iter()
        .zip(means)
        .map(|(weights, mean)| ProjectionModel {
            variant: ModelVariant::Linear { weights, mean },
            normalization: Normalization::L2,
        })
        .collect();
    Ok(MultiViewModel { views: models })
}

/// Fits multi-view kernel fastSDA: per-view RBF kernels on the block
/// diagonal, one direct regularized solve per view.
pub fn fit_multiview_kernel(
    views: &[Matrix],
    class_labels: &[usize],
    subclass_labels: &[Vec<usize>],
    z: usize,
    alpha: f64,
    sigmas: Option<&[f64]>,
    seed: u64,
) -> Result<MultiViewModel, ModelError> {
    let layout = LabelLayout::multi_view(class_labels, subclass_labels, z)?;
    let n = layout.samples();
    let dims: Vec<usize> = views.iter().map(|_| n).collect();
    let cap = target_cap_multiview(&layout, &dims);
    let mut rng = SeedRng::from_parts(seed, &[stream::TARGETS, z as u64]);
    let targets = make_targets_multiview(&layout, cap, &mut rng)?;
    let mut raw = Vec::with_capacity(views.len());
    let mut parts = Vec::with_capacity(views.len());
    for (v, x) in views.iter().enumerate() {
        let t_v = targets.view_block(&layout, v);
        let train_mean = x.row_means();
        let xc = x.center_rows(&train_mean);
        let sigma = match sigmas {
            Some(s) => s[v],
            None => mean_distance_sigma(&xc)?,
        };
        let k = rbf_kernel(&xc, &xc, sigma)?;
        let (k_centered, stats) = center_kernel(&k)?;
        let a = fit_kernel(&k_centered, &t_v, alpha, KernelSolver::Direct)?;
        raw.push(a);
        parts.push((xc, sigma, stats, train_mean));
    }
    let normalized = l2_normalize_stacked(raw)?;
    let models = normalized
        .into_iter()
        .zip(parts)
        .map(
            |(coefficients, (train_x, sigma, centering, train_mean))| ProjectionModel {
                variant: ModelVariant::Kernel {
                    coefficients,
                    train_x,
                    kernel: KernelConfig::exact(sigma),
                    centering,
                    train_mean,
                },
                normalization: Normalization::L2,
            },
        )
        .collect();
    Ok(MultiViewModel { views: models })
}
