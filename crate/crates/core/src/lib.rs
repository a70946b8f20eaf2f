//! Parameter-free clustering for datasets with missing values.
//!
//! The pipeline never imputes. Each dimension is clustered on its own from a
//! one-dimensional density decision graph, and the per-dimension partitions
//! are fused by partition intersection. Objects missing a dimension are merged
//! into the fusion cluster that holds most of their neighbors from the other
//! partition. Before splitting, low-density fully observed objects are pulled
//! toward their nearest neighbors to sharpen the valleys between clusters.
//!
//! Module map:
//!
//! - [`dataset`]: missing-value tables, CSV IO, normalization, MAR injection.
//! - [`spatial`]: exact nearest-neighbor queries over a kd-tree.
//! - [`density`]: fixed-radius neighbor counts via public annular regions.
//! - [`enhance`]: gravity-based contraction of low-density objects.
//! - [`partition`]: decision graphs, mountain detection, fusion and the full run.
//! - [`metrics`]: purity, ARI and NMI against ground truth.
//! - [`synthetic`]: labeled generators used by tests, benchmarks and bindings.

pub mod dataset;
pub mod density;
pub mod enhance;
mod error;
pub mod metrics;
pub mod partition;
pub mod spatial;
pub mod synthetic;

pub use dataset::{
    fully_observed, inject_mar, load_csv, normalize_min_max, read_csv, split_dimension,
    CsvOptions, DimensionView, FullyObservedSet, MissingDataset,
};
pub use density::{batch_density, brute_force_density, compute_radius, DensityProfile, Radius};
pub use enhance::{apply_enhancement, gravitational_force, low_density_mask, GravityConfig};
pub use error::{Result, SdcError};
pub use metrics::{ari, nmi, purity, ContingencyTable};
pub use partition::{
    build_decision_graph, detect_mountains_auto, interval_consistent, merge_missing_objects,
    partition_by_thresholds, refines,
    partition_intersection, run_sdc, AutoThresholds, ClusterPartition, DecisionGraph, GraphPoint,
    ScriptedThresholds, SdcOptions, SdcResult, SdcRun, StepRecord, StepSummary, ThresholdProvider,
    Thresholds,
};
pub use spatial::{k_nearest, nn_distances, KdTree, Neighbor, NeighborList, PointSet};

/// Index of an object (row) in a [`MissingDataset`].
pub type ObjectId = usize;
/// Dense cluster index inside a [`ClusterPartition`].
pub type ClusterId = usize;
