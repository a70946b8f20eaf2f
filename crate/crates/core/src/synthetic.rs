//! Seeded synthetic data: labeled Gaussian blobs and raw point clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::MissingDataset;
use crate::spatial::PointSet;

/// Isotropic Gaussian blobs, `per_blob` points each, labeled by blob index.
pub fn gaussian_blobs(centers: &[Vec<f64>], sigma: f64, per_blob: usize, seed: u64) -> MissingDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    let mut rows = Vec::with_capacity(centers.len() * per_blob);
    let mut labels = Vec::with_capacity(centers.len() * per_blob);
    for (k, c) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            rows.push(c.iter().map(|&m| m + normal.sample(&mut rng)).collect());
            labels.push(k.to_string());
        }
    }
    MissingDataset::from_complete_rows(&rows)
        .and_then(|ds| ds.with_truth_labels(labels))
        .expect("blobs are complete and labeled")
}

/// Two round clusters whose 1-D projections overlap into a single hump on
/// both axes: centres on the anti-diagonal, `separation` apart.
pub fn overlapping_pair(per_blob: usize, separation: f64, seed: u64) -> MissingDataset {
    let h = separation / (2.0 * std::f64::consts::SQRT_2);
    gaussian_blobs(&[vec![-h, h], vec![h, -h]], 1.0, per_blob, seed)
}

/// `side × side` blobs on a unit-spaced grid in 2-D.
pub fn grid_blobs(side: usize, per_blob: usize, sigma: f64, seed: u64) -> MissingDataset {
    let centers: Vec<Vec<f64>> = (0..side)
        .flat_map(|i| (0..side).map(move |j| vec![i as f64, j as f64]))
        .collect();
    gaussian_blobs(&centers, sigma, per_blob, seed)
}

pub fn uniform_points(n: usize, dim: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::new(dim, (0..n * dim).map(|_| rng.random::<f64>()).collect())
}

/// Points drawn around `clusters` uniformly placed centres with spread
/// `sigma`.
pub fn clustered_points(n: usize, dim: usize, clusters: usize, sigma: f64, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    let centers: Vec<Vec<f64>> = (0..clusters.max(1))
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut coords = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let c = &centers[rng.random_range(0..centers.len())];
        coords.extend(c.iter().map(|&m| m + normal.sample(&mut rng)));
    }
    PointSet::new(dim, coords)
}
