//! Boundary contraction by gravity.
//!
//! Cluster boundaries are usually sparser than cluster cores. Each fully
//! observed object whose density is below the mean is pulled by its five
//! nearest neighbors and moved once, which widens the gaps that the
//! single-dimensional views later have to find.

use rayon::prelude::*;
use tracing::warn;

use crate::dataset::FullyObservedSet;
use crate::density::{batch_density, DensityProfile};
use crate::spatial::{euclidean, nn_distances, KdTree, PointSet};
use crate::Result;

/// Number of nearest neighbors that attract a low-density object.
pub const NEIGHBOR_COUNT: usize = 5;
/// Virtual mass, duration and initial velocity of the motion model.
pub const MASS: f64 = 1.0;
pub const DURATION: f64 = 1.0;
pub const INITIAL_VELOCITY: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityConfig {
    /// Force scale: the mean nearest-neighbor distance over the set.
    pub g: f64,
}

impl GravityConfig {
    pub fn from_points(points: &PointSet) -> Result<Self> {
        let nn = nn_distances(points)?;
        Ok(Self {
            g: nn.iter().sum::<f64>() / nn.len() as f64,
        })
    }
}

/// `true` for objects strictly below the mean density.
pub fn low_density_mask(densities: &[usize]) -> Vec<bool> {
    if densities.is_empty() {
        return Vec::new();
    }
    let total: usize = densities.iter().sum();
    let n = densities.len();
    // rho < total / n, compared without rounding.
    densities.iter().map(|&rho| rho * n < total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Force {
    pub vector: Vec<f64>,
    /// Neighbors sitting exactly on the object; their terms are skipped.
    pub coincident_terms: usize,
}

/// Net pull on `point` from `neighbors` (nearest first). Only the first
/// [`NEIGHBOR_COUNT`] neighbors contribute. Each term is
/// `G·|n₁ − nⱼ|·(nⱼ − p) / |p − nⱼ|²`, so the nearest neighbor's own term
/// vanishes.
pub fn gravitational_force(point: &[f64], neighbors: &[&[f64]], g: f64) -> Force {
    let mut vector = vec![0.0; point.len()];
    let mut coincident_terms = 0;
    let Some(&nearest) = neighbors.first() else {
        return Force {
            vector,
            coincident_terms,
        };
    };
    for &nb in neighbors.iter().take(NEIGHBOR_COUNT) {
        let dist = euclidean(point, nb);
        if dist == 0.0 {
            coincident_terms += 1;
            continue;
        }
        let scale = g * euclidean(nearest, nb) / (dist * dist);
        for (f, (&p, &q)) in vector.iter_mut().zip(point.iter().zip(nb)) {
            *f += scale * (q - p);
        }
    }
    Force {
        vector,
        coincident_terms,
    }
}

/// Displacement under a constant force from rest: `½·(F/m)·t² + v₀·t`.
pub fn displacement(force: &[f64]) -> Vec<f64> {
    force
        .iter()
        .map(|f| 0.5 * (f / MASS) * DURATION * DURATION + INITIAL_VELOCITY * DURATION)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enhancement {
    pub set: FullyObservedSet,
    /// Positions (within the set) of objects that were moved.
    pub moved: Vec<usize>,
    pub coincident_terms: usize,
    /// `true` when there was nothing to move from (fewer than two objects or
    /// a degenerate density profile).
    pub skipped: bool,
}

/// Moves every low-density object once. Forces are computed from the
/// original positions before anything moves, so the result does not depend
/// on object order.
pub fn apply_enhancement(fo: &FullyObservedSet, profile: &DensityProfile) -> Result<Enhancement> {
    let untouched = |reason: &str| {
        warn!(objects = fo.len(), "{reason}; skipping enhancement");
        Enhancement {
            set: fo.clone(),
            moved: Vec::new(),
            coincident_terms: 0,
            skipped: true,
        }
    };
    if fo.len() < 2 {
        return Ok(untouched("fewer than two fully observed objects"));
    }
    if profile.degenerate {
        return Ok(untouched("degenerate density profile"));
    }
    debug_assert_eq!(profile.densities.len(), fo.len());

    let gravity = GravityConfig::from_points(&fo.points)?;
    let mask = low_density_mask(&profile.densities);
    let tree = KdTree::build(&fo.points);

    let moves: Vec<(usize, Vec<f64>, usize)> = mask
        .par_iter()
        .enumerate()
        .filter(|(_, &low)| low)
        .map(|(k, _)| {
            let nl = tree.k_nearest(k, NEIGHBOR_COUNT).expect("index in range");
            let neighbors: Vec<&[f64]> =
                nl.neighbors.iter().map(|n| fo.points.point(n.index)).collect();
            let force = gravitational_force(fo.points.point(k), &neighbors, gravity.g);
            (k, displacement(&force.vector), force.coincident_terms)
        })
        .collect();

    let mut set = fo.clone();
    let mut coincident_terms = 0;
    let mut moved = Vec::with_capacity(moves.len());
    for (k, step, coincident) in moves {
        for (c, s) in set.points.point_mut(k).iter_mut().zip(step) {
            *c += s;
        }
        coincident_terms += coincident;
        moved.push(k);
    }
    if coincident_terms > 0 {
        warn!(coincident_terms, "skipped gravity terms from coincident neighbors");
    }
    Ok(Enhancement {
        set,
        moved,
        coincident_terms,
        skipped: false,
    })
}

/// Computes densities over the set and applies [`apply_enhancement`].
pub fn enhance(fo: &FullyObservedSet) -> Result<Enhancement> {
    if fo.len() < 2 {
        return Ok(Enhancement {
            set: fo.clone(),
            moved: Vec::new(),
            coincident_terms: 0,
            skipped: true,
        });
    }
    let profile = batch_density(&fo.points)?;
    apply_enhancement(fo, &profile)
}
