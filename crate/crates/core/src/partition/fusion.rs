use std::collections::{BTreeMap, HashMap};

use super::ClusterPartition;
use crate::{ClusterId, ObjectId};

/// Non-empty pairwise intersections of `a`'s and `b`'s clusters over the
/// objects both partitions contain. Fusion cluster ids follow the
/// lexicographic order of `(a cluster, b cluster)`.
pub fn partition_intersection(a: &ClusterPartition, b: &ClusterPartition) -> ClusterPartition {
    let mut cells: BTreeMap<(ClusterId, ClusterId), Vec<ObjectId>> = BTreeMap::new();
    for (object, ca) in a.iter() {
        if let Some(cb) = b.cluster_of(object) {
            cells.entry((ca, cb)).or_default().push(object);
        }
    }
    ClusterPartition::from_clusters(cells.into_values()).expect("cells are disjoint")
}

/// Places objects that only one of `a`, `b` contains.
///
/// An object's anchor is its cluster `C` in the partition that has it. It
/// joins the fusion cluster holding the most members of `C` (lowest id on a
/// tie). When no member of `C` was fused, the one-sided members of `C` become
/// a new fusion cluster; new clusters are appended, `a`'s before `b`'s.
pub fn merge_missing_objects(
    fused: &ClusterPartition,
    a: &ClusterPartition,
    b: &ClusterPartition,
) -> ClusterPartition {
    // votes[side][anchor cluster][fusion cluster] = overlap count
    let mut votes: [HashMap<ClusterId, BTreeMap<ClusterId, usize>>; 2] = Default::default();
    for (object, f) in fused.iter() {
        for (side, p) in [a, b].into_iter().enumerate() {
            if let Some(c) = p.cluster_of(object) {
                *votes[side].entry(c).or_default().entry(f).or_default() += 1;
            }
        }
    }

    let mut clusters = fused.clusters();
    let mut orphans: [BTreeMap<ClusterId, Vec<ObjectId>>; 2] = Default::default();

    for (side, (own, other)) in [(a, b), (b, a)].into_iter().enumerate() {
        for (object, c) in own.iter() {
            if other.contains(object) {
                continue;
            }
            let winner = votes[side].get(&c).and_then(|tally| {
                // Largest overlap; the lower fusion id compares greater on ties.
                tally
                    .iter()
                    .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
                    .map(|(&f, _)| f)
            });
            match winner {
                Some(f) => clusters[f].push(object),
                None => orphans[side].entry(c).or_default().push(object),
            }
        }
    }
    for side in orphans {
        clusters.extend(side.into_values());
    }
    ClusterPartition::from_clusters(clusters).expect("one-sided objects are disjoint")
}
