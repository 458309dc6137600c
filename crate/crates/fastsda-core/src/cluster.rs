//! Seeded k-means and the per-class subclass assignment protocol.

use crate::error::ClusterError;
use crate::matrix::{squared_distance, Matrix};
use crate::rng::{split_for_class, SeedRng};
use rand::Rng;

/// Subclass index per sample for one view, `z` subclasses per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubclassAssignment {
    pub labels: Vec<usize>,
    pub z: usize,
    pub view: usize,
}

/// Result of one k-means run on a point set.
#[derive(Debug, Clone)]
pub struct KmeansResult {
    pub labels: Vec<usize>,
    pub centers: Matrix,
    pub inertia: f64,
}

pub const KMEANS_MAX_ITERS: usize = 300;

fn nearest_center(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(point, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut SeedRng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.gen_range(0..n);
    centers.push(points[first].clone());
    let mut dist2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let chosen = if total <= 0.0 {
            // All remaining points coincide with a center; take the first
            // index not yet chosen to keep the draw deterministic.
            (0..n)
                .find(|&i| dist2[i] > 0.0)
                .unwrap_or_else(|| rng.gen_range(0..n))
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        };
        centers.push(points[chosen].clone());
        let last = centers.len() - 1;
        for (i, p) in points.iter().enumerate() {
            let d = squared_distance(p, &centers[last]);
            if d < dist2[i] {
                dist2[i] = d;
            }
        }
    }
    centers
}

/// Lloyd iterations from k-means++ seeding until the assignment reaches a
/// fixpoint or `max_iters` passes. Deterministic given the generator state;
/// never returns an empty cluster (the point farthest from its center is
/// reassigned to repair one).
pub fn kmeans(
    points: &Matrix,
    k: usize,
    rng: &mut SeedRng,
    max_iters: usize,
) -> Result<KmeansResult, ClusterError> {
    let n = points.cols();
    if n < k || k == 0 {
        return Err(ClusterError::DegenerateInput { n, k });
    }
    let pts: Vec<Vec<f64>> = (0..n).map(|c| points.col(c)).collect();
    let dim = points.rows();
    let mut centers = kmeans_plus_plus(&pts, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut last_inertia = f64::INFINITY;
    for _iter in 0..max_iters {
        // Assignment step.
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, p) in pts.iter().enumerate() {
            let (c, d) = nearest_center(p, &centers);
            inertia += d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        repair_empty_clusters(&pts, &mut labels, &centers, k);
        debug_assert!(
            inertia <= last_inertia + 1e-9 * last_inertia.abs().max(1.0),
            "k-means inertia increased: {last_inertia} -> {inertia}"
        );
        last_inertia = inertia;
        if !changed {
            break;
        }
        // Update step.
        let mut sums = vec![vec![0.0f64; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in pts.iter().zip(labels.iter()) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for c in 0..k {
            debug_assert!(counts[c] > 0);
            for s in &mut sums[c] {
                *s /= counts[c] as f64;
            }
            centers[c] = std::mem::take(&mut sums[c]);
        }
    }
    let mut inertia = 0.0;
    for (i, p) in pts.iter().enumerate() {
        inertia += squared_distance(p, &centers[labels[i]]);
    }
    let mut center_matrix = Matrix::zeros(dim, k);
    for (c, center) in centers.iter().enumerate() {
        center_matrix.set_col(c, center);
    }
    Ok(KmeansResult {
        labels,
        centers: center_matrix,
        inertia,
    })
}

// If a cluster lost all members, hand it the point farthest from its current
// center (skipping points that are their own cluster's only member).
fn repair_empty_clusters(
    pts: &[Vec<f64>],
    labels: &mut [usize],
    centers: &[Vec<f64>],
    k: usize,
) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = (0..k).find(|&c| counts[c] == 0) else {
            return;
        };
        let mut worst: Option<(usize, f64)> = None;
        for (i, p) in pts.iter().enumerate() {
            if counts[labels[i]] <= 1 {
                continue;
            }
            let d = squared_distance(p, &centers[labels[i]]);
            if worst.map_or(true, |(_, wd)| d > wd) {
                worst = Some((i, d));
            }
        }
        let (idx, _) = worst.expect("n >= k guarantees a donatable point");
        labels[idx] = empty;
    }
}

/// Runs k-means with `k = z` independently on every class of `points` and
/// renumbers each class's clusters canonically: ascending cluster size, ties
/// by the smallest original sample index in the cluster.
///
/// The per-class generator streams are split off `rng` with the jump
/// function, so class results do not depend on one another.
pub fn assign_subclasses(
    points: &Matrix,
    class_labels: &[usize],
    z: usize,
    rng: &SeedRng,
    view: usize,
) -> Result<SubclassAssignment, ClusterError> {
    assert_eq!(points.cols(), class_labels.len());
    let classes = class_labels.iter().max().map_or(0, |&c| c + 1);
    let mut labels = vec![0usize; points.cols()];
    for class in 0..classes {
        let members: Vec<usize> = (0..points.cols())
            .filter(|&i| class_labels[i] == class)
            .collect();
        if members.len() < z {
            return Err(ClusterError::ClassTooSmall {
                class,
                have: members.len(),
                needed: z,
            });
        }
        if z == 1 {
            continue;
        }
        let class_points = points.select_columns(&members);
        let mut class_rng = split_for_class(rng, class);
        let result = kmeans(&class_points, z, &mut class_rng, KMEANS_MAX_ITERS)?;
        // Canonical renumbering: ascending size, then first member index.
        let mut order: Vec<usize> = (0..z).collect();
        let sizes: Vec<usize> = (0..z)
            .map(|c| result.labels.iter().filter(|&&l| l == c).count())
            .collect();
        let first_member: Vec<usize> = (0..z)
            .map(|c| {
                result
                    .labels
                    .iter()
                    .position(|&l| l == c)
                    .map(|pos| members[pos])
                    .unwrap_or(usize::MAX)
            })
            .collect();
        order.sort_by_key(|&c| (sizes[c], first_member[c]));
        let mut renumber = vec![0usize; z];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        for (pos, &sample) in members.iter().enumerate() {
            labels[sample] = renumber[result.labels[pos]];
        }
    }
    Ok(SubclassAssignment { labels, z, view })
}
