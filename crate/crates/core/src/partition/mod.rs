//! Single-dimensional clustering and partition fusion.
//!
//! Each dimension is clustered from its decision graph (value against
//! density); the per-dimension partitions are then fused left to right by
//! partition intersection, with one-sided objects merged into the fusion
//! cluster that holds most of their anchor cluster.

mod fusion;
mod graph;
mod mountains;
mod pipeline;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::DimensionView;
use crate::{ClusterId, ObjectId, Result, SdcError};

pub use fusion::{merge_missing_objects, partition_intersection};
pub use graph::{build_decision_graph, DecisionGraph, GraphPoint};
pub use mountains::{detect_mountains_auto, fallback_window, window_ladder, PERSISTENCE_FRACTION};
pub use pipeline::{
    run_sdc, AutoThresholds, ScriptedThresholds, SdcOptions, SdcResult, SdcRun, StepRecord,
    StepSummary, ThresholdProvider,
};

/// Cut points separating density mountains along one dimension.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    boundaries: Vec<f64>,
}

impl Thresholds {
    /// Fails unless the boundaries are finite and strictly increasing.
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if let Some(b) = boundaries.iter().find(|b| !b.is_finite()) {
            return Err(SdcError::InvalidThresholds(format!("non-finite boundary {b}")));
        }
        if let Some(w) = boundaries.windows(2).find(|w| w[0] >= w[1]) {
            return Err(SdcError::InvalidThresholds(format!(
                "boundaries not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        Ok(Self { boundaries })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    /// Interval index for a value; a value equal to a boundary belongs to
    /// the interval on its right.
    pub fn interval_of(&self, value: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= value)
    }
}

/// A disjoint assignment of objects to dense cluster ids `0..S`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterPartition {
    labels: BTreeMap<ObjectId, ClusterId>,
    sizes: Vec<usize>,
}

impl ClusterPartition {
    /// Cluster `k` of the result is the `k`-th non-empty input cluster.
    pub fn from_clusters<I, C>(clusters: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = ObjectId>,
    {
        let mut labels = BTreeMap::new();
        let mut sizes = Vec::new();
        for members in clusters {
            let id = sizes.len();
            let mut size = 0;
            for object in members {
                if labels.insert(object, id).is_some() {
                    return Err(SdcError::InvalidPartition(format!(
                        "object {object} assigned twice"
                    )));
                }
                size += 1;
            }
            if size > 0 {
                sizes.push(size);
            }
        }
        Ok(Self { labels, sizes })
    }

    /// One cluster holding every given object.
    pub fn single<I: IntoIterator<Item = ObjectId>>(objects: I) -> Self {
        Self::from_clusters([objects]).expect("object ids are distinct")
    }

    /// Builds a partition from arbitrary labels; ids follow ascending label
    /// order.
    pub fn from_labels<L: Ord>(labels: impl IntoIterator<Item = (ObjectId, L)>) -> Result<Self> {
        let mut groups: BTreeMap<L, Vec<ObjectId>> = BTreeMap::new();
        for (object, label) in labels {
            groups.entry(label).or_default().push(object);
        }
        Self::from_clusters(groups.into_values())
    }

    pub fn cluster_of(&self, object: ObjectId) -> Option<ClusterId> {
        self.labels.get(&object).copied()
    }

    pub fn contains(&self, object: ObjectId) -> bool {
        self.labels.contains_key(&object)
    }

    /// Number of assigned objects.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `(object, cluster)` pairs in ascending object order.
    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, ClusterId)> + '_ {
        self.labels.iter().map(|(&o, &c)| (o, c))
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.labels.keys().copied()
    }

    /// Members of each cluster, indexed by cluster id, ascending.
    pub fn clusters(&self) -> Vec<Vec<ObjectId>> {
        let mut out: Vec<Vec<ObjectId>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (o, c) in self.iter() {
            out[c].push(o);
        }
        out
    }

    /// Clusters as sorted member lists in sorted order, independent of ids.
    pub fn canonical(&self) -> Vec<Vec<ObjectId>> {
        let mut c = self.clusters();
        c.sort();
        c
    }

    /// Dense label vector for objects `0..n`; `None` for unassigned ones.
    pub fn label_vec(&self, n: usize) -> Vec<Option<ClusterId>> {
        (0..n).map(|o| self.cluster_of(o)).collect()
    }

    /// Labels for exactly the objects `0..n`, failing if any is unassigned
    /// or an extra object is present.
    pub fn dense_labels(&self, n: usize) -> Result<Vec<ClusterId>> {
        if self.len() != n {
            return Err(SdcError::LabelMismatch(format!(
                "partition covers {} objects, expected {n}",
                self.len()
            )));
        }
        (0..n)
            .map(|o| {
                self.cluster_of(o)
                    .ok_or_else(|| SdcError::LabelMismatch(format!("object {o} unassigned")))
            })
            .collect()
    }
}

/// Buckets a view's objects into the intervals between boundaries. Cluster
/// ids run left to right; empty intervals are dropped.
pub fn partition_by_thresholds(view: &DimensionView, thresholds: &Thresholds) -> ClusterPartition {
    let mut buckets = vec![Vec::new(); thresholds.len() + 1];
    for &(object, value) in &view.entries {
        buckets[thresholds.interval_of(value)].push(object);
    }
    ClusterPartition::from_clusters(buckets).expect("view holds each object once")
}

/// `true` when the clusters of `partition` occupy disjoint value intervals
/// of `view`: sorted by value, every cluster is one contiguous run and no
/// value is shared by two clusters.
pub fn interval_consistent(view: &DimensionView, partition: &ClusterPartition) -> bool {
    let mut entries: Vec<(f64, ClusterId)> = view
        .entries
        .iter()
        .filter_map(|&(o, v)| partition.cluster_of(o).map(|c| (v, c)))
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut closed = vec![false; partition.cluster_count()];
    for w in entries.windows(2) {
        let ((v0, c0), (v1, c1)) = (w[0], w[1]);
        if c0 != c1 {
            if v0 == v1 || closed[c1] {
                return false;
            }
            closed[c0] = true;
        }
    }
    true
}

/// `true` when every two objects that share a cluster in `fine` also share
/// one in `coarse`. Objects missing from `coarse` are ignored.
pub fn refines(fine: &ClusterPartition, coarse: &ClusterPartition) -> bool {
    let mut image: Vec<Option<ClusterId>> = vec![None; fine.cluster_count()];
    fine.iter().all(|(object, f)| match coarse.cluster_of(object) {
        None => true,
        Some(c) => *image[f].get_or_insert(c) == c,
    })
}
