use serde::{Deserialize, Serialize};
use tracing::debug;

use crate::dataset::DimensionView;
use crate::density::batch_density;
use crate::spatial::PointSet;
use crate::{ObjectId, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphPoint {
    pub object_id: ObjectId,
    pub value: f64,
    pub density: usize,
}

/// Feature value against density for one dimension, sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionGraph {
    pub dim: usize,
    pub points: Vec<GraphPoint>,
    /// Neighbor radius used for the densities (0 for shortcut graphs).
    pub radius: f64,
    /// Fewer than two observed values: no densities were computed and the
    /// whole view is one cluster.
    pub shortcut: bool,
}

impl DecisionGraph {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn densities(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.density).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// JSON array of `{objectId, value, density}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.points).expect("graph points serialize")
    }
}

pub fn build_decision_graph(view: &DimensionView) -> Result<DecisionGraph> {
    if view.len() < 2 {
        debug!(dim = view.dim, "fewer than two values; single-cluster shortcut");
        return Ok(DecisionGraph {
            dim: view.dim,
            points: view
                .entries
                .iter()
                .map(|&(object_id, value)| GraphPoint {
                    object_id,
                    value,
                    density: 1,
                })
                .collect(),
            radius: 0.0,
            shortcut: true,
        });
    }
    // Views are already sorted by (value, object id).
    debug_assert!(view
        .entries
        .windows(2)
        .all(|w| w[0].1 < w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0)));
    let values: Vec<f64> = view.values().collect();
    let profile = batch_density(&PointSet::from_values(&values))?;
    let points = view
        .entries
        .iter()
        .zip(&profile.densities)
        .map(|(&(object_id, value), &density)| GraphPoint {
            object_id,
            value,
            density,
        })
        .collect();
    Ok(DecisionGraph {
        dim: view.dim,
        points,
        radius: profile.radius,
        shortcut: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(values: &[f64]) -> DimensionView {
        let mut entries: Vec<(ObjectId, f64)> = values.iter().copied().enumerate().collect();
        entries.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        DimensionView { dim: 0, entries }
    }

    #[test]
    fn two_plateaus() {
        let g = build_decision_graph(&view(&[10.2, 0.0, 10.0, 0.1, 10.1, 0.2])).unwrap();
        assert!(!g.shortcut);
        assert_eq!(g.densities(), vec![3; 6]);
        assert_eq!(g.values(), vec![0.0, 0.1, 0.2, 10.0, 10.1, 10.2]);
        assert_eq!(g.points[0].object_id, 1);
    }

    #[test]
    fn tiny_view_shortcut() {
        let g = build_decision_graph(&view(&[4.0])).unwrap();
        assert!(g.shortcut);
        assert_eq!(g.len(), 1);
        let g = build_decision_graph(&view(&[])).unwrap();
        assert!(g.shortcut && g.is_empty());
    }

    #[test]
    fn json_shape() {
        let g = build_decision_graph(&view(&[0.0, 0.5])).unwrap();
        let v: serde_json::Value = serde_json::from_str(&g.to_json()).unwrap();
        assert_eq!(v[1]["objectId"], 1);
        assert_eq!(v[1]["value"], 0.5);
        assert_eq!(v[1]["density"], 2);
    }
}
