use std::collections::VecDeque;

use rayon::prelude::*;
use tracing::{debug, info};

use super::{
    build_decision_graph, detect_mountains_auto, merge_missing_objects, partition_by_thresholds,
    partition_intersection, ClusterPartition, DecisionGraph, Thresholds,
};
use crate::dataset::{
    fully_observed, normalize_min_max, split_dimension, DimensionView, FullyObservedSet,
    MissingDataset,
};
use crate::enhance::enhance;
use crate::{Result, SdcError};

/// Supplies the cut points for each dimension's decision graph, in
/// dimension order.
pub trait ThresholdProvider {
    fn thresholds(&mut self, graph: &DecisionGraph) -> Result<Thresholds>;
}

impl<F> ThresholdProvider for F
where
    F: FnMut(&DecisionGraph) -> Result<Thresholds>,
{
    fn thresholds(&mut self, graph: &DecisionGraph) -> Result<Thresholds> {
        self(graph)
    }
}

/// Persistence-based valley cuts ([`detect_mountains_auto`]).
#[derive(Debug, Clone, Copy, Default)]
pub struct AutoThresholds;

impl ThresholdProvider for AutoThresholds {
    fn thresholds(&mut self, graph: &DecisionGraph) -> Result<Thresholds> {
        Ok(detect_mountains_auto(graph))
    }
}

/// Replays a fixed sequence of thresholds; aborts when it runs out.
#[derive(Debug, Clone, Default)]
pub struct ScriptedThresholds {
    queue: VecDeque<Thresholds>,
}

impl ScriptedThresholds {
    pub fn new(seq: impl IntoIterator<Item = Thresholds>) -> Self {
        Self {
            queue: seq.into_iter().collect(),
        }
    }
}

impl ThresholdProvider for ScriptedThresholds {
    fn thresholds(&mut self, graph: &DecisionGraph) -> Result<Thresholds> {
        self.queue.pop_front().ok_or_else(|| {
            SdcError::Aborted(format!("no thresholds scripted for dimension {}", graph.dim))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SdcOptions {
    /// Min-max scale every dimension before anything else.
    pub normalize: bool,
    /// Run gravity contraction on the fully observed objects.
    pub enhance: bool,
}

impl Default for SdcOptions {
    fn default() -> Self {
        Self {
            normalize: true,
            enhance: true,
        }
    }
}

/// Everything one fusion step saw and produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub dim: usize,
    pub thresholds: Thresholds,
    /// The dimension's own partition, before fusion.
    pub division: ClusterPartition,
    /// Intersection with the previous fused partition (absent for the first
    /// dimension).
    pub intersection: Option<ClusterPartition>,
    /// Fused partition after merging one-sided objects.
    pub fused: ClusterPartition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSummary {
    pub dim: usize,
    pub fusion_cluster_sizes: Vec<usize>,
    /// Objects not yet observed in any processed dimension.
    pub deferred: usize,
    pub finished: bool,
}

/// Incremental clustering run: prepares the data and decision graphs up
/// front, then consumes one set of thresholds per dimension.
#[derive(Debug, Clone)]
pub struct SdcRun {
    dataset: MissingDataset,
    enhanced: FullyObservedSet,
    moved: usize,
    views: Vec<DimensionView>,
    graphs: Vec<DecisionGraph>,
    next_dim: usize,
    fused: Option<ClusterPartition>,
    steps: Vec<StepRecord>,
}

impl SdcRun {
    pub fn new(dataset: &MissingDataset, options: SdcOptions) -> Result<Self> {
        let dataset = if options.normalize {
            normalize_min_max(dataset)
        } else {
            dataset.clone()
        };
        let observed = fully_observed(&dataset);
        let (enhanced, moved) = if options.enhance {
            let e = enhance(&observed)?;
            info!(
                fully_observed = observed.len(),
                moved = e.moved.len(),
                "boundary contraction"
            );
            let moved = e.moved.len();
            (e.set, moved)
        } else {
            (observed, 0)
        };

        let views = (0..dataset.dim_count())
            .map(|dim| split_dimension(&dataset, Some(&enhanced), dim))
            .collect::<Result<Vec<_>>>()?;
        let graphs = views
            .par_iter()
            .map(build_decision_graph)
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            dataset,
            enhanced,
            moved,
            views,
            graphs,
            next_dim: 0,
            fused: None,
            steps: Vec::new(),
        })
    }

    /// The dataset after optional normalization.
    pub fn dataset(&self) -> &MissingDataset {
        &self.dataset
    }

    pub fn dim_count(&self) -> usize {
        self.graphs.len()
    }

    pub fn enhanced(&self) -> &FullyObservedSet {
        &self.enhanced
    }

    pub fn moved_count(&self) -> usize {
        self.moved
    }

    pub fn graphs(&self) -> &[DecisionGraph] {
        &self.graphs
    }

    pub fn views(&self) -> &[DimensionView] {
        &self.views
    }

    /// Zero-based dimension waiting for thresholds, if any.
    pub fn pending_dim(&self) -> Option<usize> {
        (self.next_dim < self.dim_count()).then_some(self.next_dim)
    }

    pub fn current_graph(&self) -> Option<&DecisionGraph> {
        self.pending_dim().map(|d| &self.graphs[d])
    }

    pub fn is_finished(&self) -> bool {
        self.pending_dim().is_none()
    }

    pub fn fused(&self) -> Option<&ClusterPartition> {
        self.fused.as_ref()
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    /// Final partition once every dimension has been processed.
    pub fn result(&self) -> Option<&ClusterPartition> {
        if self.is_finished() {
            self.fused.as_ref()
        } else {
            None
        }
    }

    /// Partitions the pending dimension and fuses it into the running result.
    pub fn submit(&mut self, thresholds: Thresholds) -> Result<StepSummary> {
        let dim = self.pending_dim().ok_or(SdcError::RunFinished)?;
        let graph = &self.graphs[dim];
        let view = &self.views[dim];
        let division = if graph.shortcut {
            ClusterPartition::single(view.entries.iter().map(|&(o, _)| o))
        } else {
            partition_by_thresholds(view, &thresholds)
        };

        let (intersection, fused) = match self.fused.take() {
            None => (None, division.clone()),
            Some(previous) => {
                let inter = partition_intersection(&previous, &division);
                let merged = merge_missing_objects(&inter, &previous, &division);
                (Some(inter), merged)
            }
        };
        debug!(
            dim,
            clusters = division.cluster_count(),
            fused = fused.cluster_count(),
            "fusion step"
        );

        self.next_dim += 1;
        let finished = self.is_finished();
        if finished && fused.len() != self.dataset.object_count() {
            return Err(SdcError::InvalidPartition(format!(
                "final partition covers {} of {} objects",
                fused.len(),
                self.dataset.object_count()
            )));
        }
        let summary = StepSummary {
            dim,
            fusion_cluster_sizes: fused.sizes().to_vec(),
            deferred: self.dataset.object_count() - fused.len(),
            finished,
        };
        self.steps.push(StepRecord {
            dim,
            thresholds,
            division,
            intersection,
            fused: fused.clone(),
        });
        self.fused = Some(fused);
        Ok(summary)
    }

    /// Drives the remaining dimensions with `provider`.
    pub fn run_to_end(&mut self, provider: &mut dyn ThresholdProvider) -> Result<()> {
        while let Some(graph) = self.current_graph() {
            let th = provider.thresholds(graph)?;
            self.submit(th)?;
        }
        Ok(())
    }

    pub fn into_result(self) -> Result<SdcResult> {
        if !self.is_finished() {
            return Err(SdcError::InvalidPartition("run not finished".into()));
        }
        Ok(SdcResult {
            partition: self.fused.expect("finished runs have a partition"),
            graphs: self.graphs,
            views: self.views,
            steps: self.steps,
            moved: self.moved,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SdcResult {
    pub partition: ClusterPartition,
    pub graphs: Vec<DecisionGraph>,
    pub views: Vec<DimensionView>,
    pub steps: Vec<StepRecord>,
    /// Fully observed objects moved by boundary contraction.
    pub moved: usize,
}

/// Runs the full pipeline: normalize, contract boundaries, then cluster and
/// fuse one dimension at a time using `provider` for the cuts.
pub fn run_sdc(
    dataset: &MissingDataset,
    provider: &mut dyn ThresholdProvider,
    options: SdcOptions,
) -> Result<SdcResult> {
    let mut run = SdcRun::new(dataset, options)?;
    run.run_to_end(provider)?;
    run.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_plateaus() -> MissingDataset {
        MissingDataset::from_complete_rows(&[
            vec![0.0],
            vec![0.1],
            vec![0.2],
            vec![10.0],
            vec![10.1],
            vec![10.2],
        ])
        .unwrap()
    }

    #[test]
    fn one_dimension_is_plain_partition() {
        let ds = two_plateaus();
        let opts = SdcOptions {
            normalize: false,
            enhance: false,
        };
        let mut script = ScriptedThresholds::new([Thresholds::new(vec![5.0]).unwrap()]);
        let out = run_sdc(&ds, &mut script, opts).unwrap();
        assert_eq!(out.partition.clusters(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(out.steps.len(), 1);
        assert!(out.steps[0].intersection.is_none());
    }

    #[test]
    fn submit_after_finish_fails() {
        let mut run = SdcRun::new(&two_plateaus(), SdcOptions::default()).unwrap();
        let s = run.submit(Thresholds::none()).unwrap();
        assert!(s.finished);
        assert_eq!(s.fusion_cluster_sizes, vec![6]);
        assert!(matches!(run.submit(Thresholds::none()), Err(SdcError::RunFinished)));
    }

    #[test]
    fn exhausted_script_aborts() {
        let ds = MissingDataset::from_complete_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let mut script = ScriptedThresholds::new([Thresholds::none()]);
        assert!(matches!(
            run_sdc(&ds, &mut script, SdcOptions::default()),
            Err(SdcError::Aborted(_))
        ));
    }

    #[test]
    fn deferred_objects_merge_when_first_observed() {
        // Object 4 is only observed in dimension 2 (index 2).
        let ds = MissingDataset::from_rows(vec![
            vec![Some(0.0), Some(0.0), Some(0.0)],
            vec![Some(0.1), Some(0.1), Some(0.1)],
            vec![Some(5.0), Some(5.0), Some(5.0)],
            vec![Some(5.1), Some(5.1), Some(5.1)],
            vec![None, None, Some(5.05)],
        ])
        .unwrap();
        let opts = SdcOptions {
            normalize: false,
            enhance: false,
        };
        let cut = || Thresholds::new(vec![2.5]).unwrap();
        let mut run = SdcRun::new(&ds, opts).unwrap();
        assert_eq!(run.submit(cut()).unwrap().deferred, 1);
        assert_eq!(run.submit(cut()).unwrap().deferred, 1);
        let last = run.submit(cut()).unwrap();
        assert!(last.finished);
        assert_eq!(last.deferred, 0);
        assert_eq!(
            run.result().unwrap().canonical(),
            vec![vec![0, 1], vec![2, 3, 4]]
        );
    }

    #[test]
    fn closure_provider() {
        let ds = two_plateaus();
        let mut calls = 0;
        let mut provider = |_: &DecisionGraph| {
            calls += 1;
            Ok(Thresholds::none())
        };
        run_sdc(&ds, &mut provider, SdcOptions::default()).unwrap();
        assert_eq!(calls, 1);
    }
}
