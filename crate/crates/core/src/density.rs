//! Fixed-radius neighbor counting over public annular regions.
//!
//! The density of a point is the number of points (itself included) within
//! radius `R`, where `R` is five times the mean nearest-neighbor distance.
//! Instead of comparing every pair, points are binned into rings of width `R`
//! around a virtual origin `θ` (the component-wise minimum). A neighbor of a
//! point in ring `i` can only sit in rings `i-1..=i+1`, and its coordinate sum
//! differs by at most `√d·R`, so each ring only scans a narrow band of
//! candidates sorted by coordinate sum.

use rayon::prelude::*;

use crate::spatial::{euclidean, nn_distances, PointSet};
use crate::Result;

/// Multiplier applied to the mean nearest-neighbor distance.
pub const RADIUS_FACTOR: f64 = 5.0;

/// Relative slack added to the ring and band filters. The filters only
/// discard candidates, so widening them cannot change a count; it keeps
/// pairs at distance exactly `R` from being lost to rounding.
const FILTER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    pub value: f64,
    /// Set when every point coincides and `R` fell back to 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub radius: f64,
    pub degenerate: bool,
    pub theta: Vec<f64>,
    pub region_count: usize,
    pub densities: Vec<usize>,
    /// Exact distance evaluations performed; divide by `N` for the mean
    /// number of candidates that passed the coordinate-sum filter.
    pub distance_checks: u64,
}

impl DensityProfile {
    pub fn mean_density(&self) -> f64 {
        self.densities.iter().sum::<usize>() as f64 / self.densities.len() as f64
    }
}

pub fn compute_radius(points: &PointSet) -> Result<Radius> {
    let nn = nn_distances(points)?;
    let mean = nn.iter().sum::<f64>() / nn.len() as f64;
    if mean > 0.0 {
        return Ok(Radius {
            value: RADIUS_FACTOR * mean,
            degenerate: false,
        });
    }
    // Every point has an exact duplicate. Measure to the nearest distinct
    // point instead, unless there is none.
    let (unique, owner) = dedup(points);
    if unique.len() < 2 {
        return Ok(Radius {
            value: 1.0,
            degenerate: true,
        });
    }
    let unique_nn = nn_distances(&unique)?;
    let mean = owner.iter().map(|&u| unique_nn[u]).sum::<f64>() / owner.len() as f64;
    Ok(Radius {
        value: RADIUS_FACTOR * mean,
        degenerate: false,
    })
}

/// Distinct points plus, for every input point, the index of its copy.
fn dedup(points: &PointSet) -> (PointSet, Vec<usize>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    let lex = |a: &usize, b: &usize| {
        points
            .point(*a)
            .iter()
            .zip(points.point(*b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    order.sort_by(lex);
    let mut owner = vec![0; points.len()];
    let mut coords = Vec::new();
    let mut count = 0;
    for (k, &i) in order.iter().enumerate() {
        if k == 0 || lex(&order[k - 1], &i).is_ne() {
            coords.extend_from_slice(points.point(i));
            count += 1;
        }
        owner[i] = count - 1;
    }
    (PointSet::new(points.dim(), coords), owner)
}

/// Component-wise minimum, used as the virtual origin.
pub fn virtual_origin(points: &PointSet) -> Vec<f64> {
    let mut theta = vec![f64::INFINITY; points.dim()];
    for p in points.iter() {
        for (t, &c) in theta.iter_mut().zip(p) {
            *t = t.min(c);
        }
    }
    theta
}

/// Ring index (1-based) for a point at distance `r` from the origin. Ring
/// `i` holds `(i-1)R < r <= iR`; the origin itself goes to ring 1.
pub fn region_index(r: f64, radius: f64) -> usize {
    ((r / radius).ceil() as usize).max(1)
}

pub fn dimension_sum(p: &[f64]) -> f64 {
    p.iter().sum()
}

pub fn batch_density(points: &PointSet) -> Result<DensityProfile> {
    let radius = compute_radius(points)?;
    let mut profile = batch_density_with_radius(points, radius.value);
    profile.degenerate = radius.degenerate;
    Ok(profile)
}

/// Ring-and-band neighbor counting for an explicit radius.
pub fn batch_density_with_radius(points: &PointSet, radius: f64) -> DensityProfile {
    assert!(radius > 0.0, "radius must be positive");
    let n = points.len();
    let theta = virtual_origin(points);
    let dist_to_origin: Vec<f64> = points.iter().map(|p| euclidean(p, &theta)).collect();
    let sums: Vec<f64> = points.iter().map(dimension_sum).collect();

    let mut by_ring: Vec<usize> = (0..n).collect();
    by_ring.sort_by(|&a, &b| dist_to_origin[a].total_cmp(&dist_to_origin[b]).then(a.cmp(&b)));
    let ring_of: Vec<usize> = by_ring
        .iter()
        .map(|&i| region_index(dist_to_origin[i], radius))
        .collect();
    let region_count = ring_of.last().copied().unwrap_or(1);

    // Contiguous runs of `by_ring` sharing a ring index.
    let mut rings: Vec<(usize, usize, usize)> = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || ring_of[k] != ring_of[start] {
            rings.push((ring_of[start], start, k));
            start = k;
        }
    }

    let band = (points.dim() as f64).sqrt() * radius;
    let per_ring: Vec<(Vec<(usize, usize)>, u64)> = rings
        .par_iter()
        .map(|&(ring, start, end)| {
            let slack = FILTER_SLACK * (ring as f64 + 1.0) * radius;
            let inner = (ring as f64 - 2.0) * radius - slack;
            let outer = (ring as f64 + 1.0) * radius + slack;
            let lo = by_ring.partition_point(|&i| dist_to_origin[i] < inner);
            let hi = by_ring.partition_point(|&i| dist_to_origin[i] <= outer);

            let mut candidates: Vec<usize> = by_ring[lo..hi].to_vec();
            candidates.sort_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b)));
            let cand_sums: Vec<f64> = candidates.iter().map(|&i| sums[i]).collect();

            let mut checks = 0u64;
            let counts = by_ring[start..end]
                .iter()
                .map(|&i| {
                    let s = sums[i];
                    let tol = band + FILTER_SLACK * (s.abs() + band);
                    let a = cand_sums.partition_point(|&v| v < s - tol);
                    let b = cand_sums.partition_point(|&v| v <= s + tol);
                    checks += (b - a) as u64;
                    let p = points.point(i);
                    let count = candidates[a..b]
                        .iter()
                        .filter(|&&j| euclidean(p, points.point(j)) <= radius)
                        .count();
                    (i, count)
                })
                .collect();
            (counts, checks)
        })
        .collect();

    let mut densities = vec![0; n];
    let mut distance_checks = 0;
    for (counts, checks) in per_ring {
        distance_checks += checks;
        for (i, c) in counts {
            densities[i] = c;
        }
    }

    DensityProfile {
        radius,
        degenerate: false,
        theta,
        region_count,
        densities,
        distance_checks,
    }
}

/// Quadratic reference count of points within `radius`, self included.
pub fn brute_force_density(points: &PointSet, radius: f64) -> Vec<usize> {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let p = points.point(i);
            points
                .iter()
                .filter(|q| euclidean(p, q) <= radius)
                .count()
        })
        .collect()
}
