//! Structured target-vector construction.
//!
//! Instead of eigendecomposing the between-class Laplacian, the target
//! matrix is built directly from its known block structure: class-level
//! columns carry one random value per (class, view); subclass-level columns
//! carry one random value per (subclass, view) of a group of equally-sized
//! classes and zeros elsewhere. Prepending the ones vector, orthonormalizing
//! with modified Gram-Schmidt and dropping the ones direction yields
//! orthonormal, zero-sum rows spanning exactly the Laplacian's column space.

use crate::error::TargetError;
use crate::layout::LabelLayout;
use crate::linalg::{gram_schmidt, gram_schmidt_tol};
use crate::matrix::Matrix;
use crate::rng::SeedRng;
use rand::Rng;

/// Orthonormal, zero-sum target vectors as rows, columns in the layout's
/// canonical sample order (view-major).
#[derive(Debug, Clone)]
pub struct TargetMatrix {
    t: Matrix,
    views: usize,
    samples: usize,
}

impl TargetMatrix {
    /// Number of target vectors (projection dimensionality `d`).
    pub fn dims(&self) -> usize {
        self.t.rows()
    }

    /// Target vectors as rows, canonical column order.
    pub fn canonical(&self) -> &Matrix {
        &self.t
    }

    /// Target vectors as rows with columns permuted back to the original
    /// sample order of `layout` (view-major).
    pub fn in_original_order(&self, layout: &LabelLayout) -> Matrix {
        assert_eq!(layout.views(), self.views);
        assert_eq!(layout.samples(), self.samples);
        let perm = layout.canonical_to_original();
        let mut out = Matrix::zeros(self.t.rows(), self.t.cols());
        for (orig, &canon) in perm.iter().enumerate() {
            for r in 0..self.t.rows() {
                out.set(r, orig, self.t.get(r, canon));
            }
        }
        out
    }

    /// Columns of the original-order target matrix restricted to one view.
    pub fn view_block(&self, layout: &LabelLayout, view: usize) -> Matrix {
        let full = self.in_original_order(layout);
        let n = self.samples;
        let idx: Vec<usize> = (view * n..(view + 1) * n).collect();
        full.select_columns(&idx)
    }
}

/// Cap for the single-view target count: `min(C*Z - 1, D, N)`.
pub fn target_cap_single(layout: &LabelLayout, feature_dim: usize) -> usize {
    let cz = layout.classes() * layout.subclasses();
    (cz - 1).min(feature_dim).min(layout.samples())
}

/// Cap for the multi-view target count: `min(V*C*Z - 1, min_v D_v, N)`.
pub fn target_cap_multiview(layout: &LabelLayout, feature_dims: &[usize]) -> usize {
    let vcz = layout.views() * layout.classes() * layout.subclasses();
    let min_d = feature_dims.iter().copied().min().unwrap_or(usize::MAX);
    (vcz - 1).min(min_d).min(layout.samples())
}

const REDRAW_CAP: usize = 5;

fn draw(rng: &mut SeedRng) -> f64 {
    // Uniform, shifted away from zero so block values are always nonzero.
    0.5 + rng.gen::<f64>()
}

// One class-level column: a fresh random value per (view, class), repeated
// across the class's samples within each view.
fn class_level_column(layout: &LabelLayout, rng: &mut SeedRng) -> Vec<f64> {
    let (v, c) = (layout.views(), layout.classes());
    let mut values = vec![0.0; v * c];
    for view in 0..v {
        for class in 0..c {
            values[view * c + class] = draw(rng);
        }
    }
    let mut col = vec![0.0; layout.total_columns()];
    for (j, slot) in col.iter_mut().enumerate() {
        let (view, class, _) = layout.canonical_block(j);
        *slot = values[view * c + class];
    }
    col
}

// One subclass-level column for a group of equally-sized classes: a fresh
// random value per (view, class-in-group, subclass), zeros at all other
// classes.
fn subclass_level_column(layout: &LabelLayout, group: &[usize], rng: &mut SeedRng) -> Vec<f64> {
    let (v, c, z) = (layout.views(), layout.classes(), layout.subclasses());
    let mut values = vec![0.0; v * c * z];
    for view in 0..v {
        for &class in group {
            for sub in 0..z {
                values[(view * c + class) * z + sub] = draw(rng);
            }
        }
    }
    let mut col = vec![0.0; layout.total_columns()];
    for (j, slot) in col.iter_mut().enumerate() {
        let (view, class, sub) = layout.canonical_block(j);
        if group.contains(&class) {
            *slot = values[(view * c + class) * z + sub];
        }
    }
    col
}

fn structured_columns(layout: &LabelLayout, d_cap: usize, rng: &mut SeedRng) -> Vec<Vec<f64>> {
    let c = layout.classes();
    let per_group_block = layout.views() * layout.subclasses() - 1;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d_cap);
    for _ in 0..d_cap.min(c.saturating_sub(1)) {
        cols.push(class_level_column(layout, rng));
    }
    if per_group_block == 0 {
        return cols;
    }
    for (_size, group) in layout.classes_by_size_ascending() {
        let mut copies = group.len();
        if cols.len() + copies * per_group_block > d_cap {
            // Fractional budget: floor; leftover columns are not emitted.
            copies = (d_cap - cols.len()) / per_group_block;
        }
        for _ in 0..copies * per_group_block {
            cols.push(subclass_level_column(layout, &group, rng));
        }
        if cols.len() == d_cap {
            break;
        }
    }
    cols
}

fn orthonormalize(
    layout: &LabelLayout,
    cols: &[Vec<f64>],
) -> Result<Option<Matrix>, TargetError> {
    let total = layout.total_columns();
    let mut stacked = Matrix::zeros(total, cols.len() + 1);
    stacked.set_col(0, &vec![1.0; total]);
    for (i, col) in cols.iter().enumerate() {
        stacked.set_col(i + 1, col);
    }
    let q = gram_schmidt(&stacked, gram_schmidt_tol(total))?;
    if q.cols() != cols.len() + 1 {
        return Ok(None); // a structured column collapsed; caller redraws
    }
    let keep: Vec<usize> = (1..q.cols()).collect();
    Ok(Some(q.select_columns(&keep).transpose()))
}

/// Builds the target matrix for any view count; the public single-view and
/// multi-view entry points below are thin wrappers.
fn make_targets(
    layout: &LabelLayout,
    d_cap: usize,
    rng: &mut SeedRng,
) -> Result<TargetMatrix, TargetError> {
    if d_cap == 0 {
        return Err(TargetError::LayoutInvalid(
            "no target directions exist (C*Z*V - 1 = 0 or zero cap)".into(),
        ));
    }
    for _attempt in 0..=REDRAW_CAP {
        let cols = structured_columns(layout, d_cap, rng);
        if cols.is_empty() {
            return Err(TargetError::LayoutInvalid(
                "construction produced no columns".into(),
            ));
        }
        if let Some(t) = orthonormalize(layout, &cols)? {
            return Ok(TargetMatrix {
                t,
                views: layout.views(),
                samples: layout.samples(),
            });
        }
    }
    Err(TargetError::RankDeficient {
        retries: REDRAW_CAP,
    })
}

/// Single-view target vectors; `d_cap` is `min(C*Z - 1, D, N)`.
pub fn make_targets_single(
    layout: &LabelLayout,
    d_cap: usize,
    rng: &mut SeedRng,
) -> Result<TargetMatrix, TargetError> {
    if layout.views() != 1 {
        return Err(TargetError::LayoutInvalid(
            "single-view targets need a single-view layout".into(),
        ));
    }
    make_targets(layout, d_cap, rng)
}

/// Multi-view target vectors; `d_cap` is `min(V*C*Z - 1, min_v D_v, N)`.
pub fn make_targets_multiview(
    layout: &LabelLayout,
    d_cap: usize,
    rng: &mut SeedRng,
) -> Result<TargetMatrix, TargetError> {
    make_targets(layout, d_cap, rng)
}

/// Largest deviation of any row of `t` from block-constancy over the
/// layout's (view, class, subclass) blocks. Zero for exact targets.
pub fn max_block_deviation(t: &Matrix, layout: &LabelLayout) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..t.rows() {
        let mut block_value: Vec<Option<f64>> =
            vec![None; layout.views() * layout.classes() * layout.subclasses()];
        for j in 0..t.cols() {
            let (view, c, z) = layout.canonical_block(j);
            let key = (view * layout.classes() + c) * layout.subclasses() + z;
            match block_value[key] {
                None => block_value[key] = Some(t.get(r, j)),
                Some(v) => worst = worst.max((t.get(r, j) - v).abs()),
            }
        }
    }
    worst
}
