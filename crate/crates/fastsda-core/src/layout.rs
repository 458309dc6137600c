//! Class/subclass label bookkeeping shared by the target generator and the
//! Laplacian oracle.
//!
//! A [`LabelLayout`] owns per-sample class and subclass labels for one or
//! more views and a canonical sample order per view: samples sorted by
//! (class, subclass, original index), views laid out view-major. All block
//! structure downstream (target vectors, between-class Laplacians) is
//! expressed in that canonical order.

use crate::error::TargetError;

#[derive(Debug, Clone)]
pub struct LabelLayout {
    views: usize,
    samples: usize,
    classes: usize,
    subclasses: usize,
    /// Class label per sample, shared by all views (original order).
    class_labels: Vec<usize>,
    /// Subclass label per sample, one vector per view (original order).
    subclass_labels: Vec<Vec<usize>>,
    /// `canonical[v][p]` = original index of the sample at canonical
    /// position `p` within view `v`.
    canonical: Vec<Vec<usize>>,
    /// Samples per class (identical across views).
    class_sizes: Vec<usize>,
    /// `subclass_sizes[v][c][z]` = samples in subclass `z` of class `c`
    /// within view `v`.
    subclass_sizes: Vec<Vec<Vec<usize>>>,
}

impl LabelLayout {
    pub fn single_view(
        class_labels: &[usize],
        subclass_labels: &[usize],
        subclasses: usize,
    ) -> Result<Self, TargetError> {
        Self::multi_view(class_labels, &[subclass_labels.to_vec()], subclasses)
    }

    pub fn multi_view(
        class_labels: &[usize],
        subclass_labels_per_view: &[Vec<usize>],
        subclasses: usize,
    ) -> Result<Self, TargetError> {
        let n = class_labels.len();
        let v = subclass_labels_per_view.len();
        if n == 0 {
            return Err(TargetError::LayoutInvalid("no samples".into()));
        }
        if v == 0 {
            return Err(TargetError::LayoutInvalid("no views".into()));
        }
        if subclasses == 0 {
            return Err(TargetError::LayoutInvalid("z must be at least 1".into()));
        }
        let classes = class_labels.iter().max().unwrap() + 1;
        let mut class_sizes = vec![0usize; classes];
        for &c in class_labels {
            class_sizes[c] += 1;
        }
        if class_sizes.iter().any(|&s| s == 0) {
            return Err(TargetError::LayoutInvalid(
                "class labels are not dense".into(),
            ));
        }
        let mut subclass_sizes = vec![vec![vec![0usize; subclasses]; classes]; v];
        for (view, labels) in subclass_labels_per_view.iter().enumerate() {
            if labels.len() != n {
                return Err(TargetError::LayoutInvalid(format!(
                    "view {view} has {} subclass labels for {n} samples",
                    labels.len()
                )));
            }
            for (i, &z) in labels.iter().enumerate() {
                if z >= subclasses {
                    return Err(TargetError::LayoutInvalid(format!(
                        "subclass label {z} out of range 0..{subclasses}"
                    )));
                }
                subclass_sizes[view][class_labels[i]][z] += 1;
            }
        }
        for (view, per_class) in subclass_sizes.iter().enumerate() {
            for (c, sizes) in per_class.iter().enumerate() {
                if sizes.iter().any(|&s| s == 0) {
                    return Err(TargetError::LayoutInvalid(format!(
                        "class {c} in view {view} has an empty subclass"
                    )));
                }
            }
        }
        let canonical = subclass_labels_per_view
            .iter()
            .map(|labels| {
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by_key(|&i| (class_labels[i], labels[i], i));
                idx
            })
            .collect();
        Ok(Self {
            views: v,
            samples: n,
            classes,
            subclasses,
            class_labels: class_labels.to_vec(),
            subclass_labels: subclass_labels_per_view.to_vec(),
            canonical,
            class_sizes,
            subclass_sizes,
        })
    }

    #[inline]
    pub fn views(&self) -> usize {
        self.views
    }

    #[inline]
    pub fn samples(&self) -> usize {
        self.samples
    }

    #[inline]
    pub fn classes(&self) -> usize {
        self.classes
    }

    #[inline]
    pub fn subclasses(&self) -> usize {
        self.subclasses
    }

    /// Total column count of canonical matrices: `V * N`.
    #[inline]
    pub fn total_columns(&self) -> usize {
        self.views * self.samples
    }

    #[inline]
    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    #[inline]
    pub fn subclass_size(&self, view: usize, class: usize, subclass: usize) -> usize {
        self.subclass_sizes[view][class][subclass]
    }

    pub fn class_labels(&self) -> &[usize] {
        &self.class_labels
    }

    pub fn subclass_labels(&self, view: usize) -> &[usize] {
        &self.subclass_labels[view]
    }

    /// Original sample index at canonical position `p` of view `view`.
    #[inline]
    pub fn original_index(&self, view: usize, p: usize) -> usize {
        self.canonical[view][p]
    }

    /// (class, subclass) of the canonical position `p` in view `view`.
    #[inline]
    pub fn canonical_labels(&self, view: usize, p: usize) -> (usize, usize) {
        let i = self.canonical[view][p];
        (self.class_labels[i], self.subclass_labels[view][i])
    }

    /// (view, class, subclass) for a flat canonical column index.
    #[inline]
    pub fn canonical_block(&self, col: usize) -> (usize, usize, usize) {
        let view = col / self.samples;
        let (c, z) = self.canonical_labels(view, col % self.samples);
        (view, c, z)
    }

    /// Classes grouped by equal size, groups in ascending size order, class
    /// indices ascending inside each group.
    pub fn classes_by_size_ascending(&self) -> Vec<(usize, Vec<usize>)> {
        let mut sizes: Vec<usize> = self.class_sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
            .into_iter()
            .map(|s| {
                let members = (0..self.classes)
                    .filter(|&c| self.class_sizes[c] == s)
                    .collect();
                (s, members)
            })
            .collect()
    }

    /// Permutation sending canonical column order back to original sample
    /// order, view-major: `out[v*N + original] = v*N + canonical position`.
    pub fn canonical_to_original(&self) -> Vec<usize> {
        let n = self.samples;
        let mut perm = vec![0usize; self.total_columns()];
        for v in 0..self.views {
            for (p, &orig) in self.canonical[v].iter().enumerate() {
                perm[v * n + orig] = v * n + p;
            }
        }
        perm
    }
}
