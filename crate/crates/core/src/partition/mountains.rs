//! Unattended mountain detection on a decision graph.
//!
//! The density sequence (in value order) is smoothed with a centered moving
//! average, then maxima are ranked by topographic persistence: the height a
//! peak rises above the saddle where it merges into a taller one. Peaks whose
//! persistence reaches a fixed fraction of the tallest smoothed density are
//! kept. Between each adjacent pair of kept peaks, the cut goes in the widest
//! value gap on the valley floor: the run of samples around the lowest
//! smoothed density that stays within half the persistence bar of it.
//!
//! The window is picked per graph. Starting at `n / 100` samples and
//! doubling, the first window whose cut count survives two more doublings
//! wins. Count noise produces cuts that vanish as the window grows, while
//! real valleys persist until the window spans a whole mountain.

use super::{DecisionGraph, Thresholds};

/// Minimum persistence of a kept peak, relative to the tallest smoothed
/// density.
pub const PERSISTENCE_FRACTION: f64 = 0.2;

/// Extra doublings over which the cut count must hold.
const STABLE_STEPS: usize = 2;

fn odd_window(w: f64) -> usize {
    let w = (w.round() as usize).max(3);
    if w.is_multiple_of(2) {
        w + 1
    } else {
        w
    }
}

/// `max(3, round(n / 10))`, made odd. Used when the graph is too short for
/// the window ladder to show a stable count.
pub fn fallback_window(n: usize) -> usize {
    odd_window(n as f64 / 10.0)
}

/// Candidate windows: `max(3, n / 100)` doubling while at most `n / 2`,
/// each rounded up to an odd size.
pub fn window_ladder(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut w = (n as f64 / 100.0).max(3.0);
    while w <= n as f64 / 2.0 {
        out.push(odd_window(w));
        w *= 2.0;
    }
    out
}

/// Centered moving average; windows are truncated at the ends.
fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    let half = window / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Peak index and persistence of every local maximum of `heights`. The
/// global maximum gets infinite persistence. Plateaus count as one peak at
/// their leftmost index.
fn persistent_peaks(heights: &[f64]) -> Vec<(usize, f64)> {
    let n = heights.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| heights[b].total_cmp(&heights[a]).then(a.cmp(&b)));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    // Union-find over processed indices; each root remembers its peak.
    let mut parent: Vec<usize> = (0..n).collect();
    let mut peak: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; n];
    let mut peaks = Vec::new();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for &i in &order {
        seen[i] = true;
        let neighbors = [i.checked_sub(1), (i + 1 < n).then_some(i + 1)];
        let mut roots: Vec<usize> = neighbors
            .into_iter()
            .flatten()
            .filter(|&j| seen[j])
            .map(|j| find(&mut parent, j))
            .collect();
        roots.dedup();
        match roots.as_slice() {
            [] => {}
            [r] => parent[i] = *r,
            [a, b] => {
                // The younger peak (processed later) dies at this saddle.
                let (old, young) = if rank[peak[*a]] < rank[peak[*b]] {
                    (*a, *b)
                } else {
                    (*b, *a)
                };
                peaks.push((peak[young], heights[peak[young]] - heights[i]));
                parent[young] = old;
                parent[i] = old;
            }
            _ => unreachable!(),
        }
        let root = find(&mut parent, i);
        if root == i {
            peak[i] = i;
        }
    }
    if let Some(&top) = order.first() {
        peaks.push((top, f64::INFINITY));
    }
    peaks.sort_by_key(|&(i, _)| i);
    peaks
}

/// Picks the gap `(g, g+1)` to cut in within `[p, q]`. The valley floor is
/// the run of samples around the lowest height that stays within `slack` of
/// it; the cut goes in the floor's widest value gap. When the floor holds
/// only zero-width gaps, the nearest gap of positive width is used instead.
fn valley_gap(values: &[f64], heights: &[f64], p: usize, q: usize, slack: f64) -> Option<usize> {
    let c = (p..=q).min_by(|&a, &b| heights[a].total_cmp(&heights[b]).then(a.cmp(&b)))?;
    let ceiling = heights[c] + slack;
    let (mut lo, mut hi) = (c, c);
    while lo > p && heights[lo - 1] <= ceiling {
        lo -= 1;
    }
    while hi < q && heights[hi + 1] <= ceiling {
        hi += 1;
    }
    // Gaps touching the floor: inside it, plus one on each side.
    let first = if lo > p { lo - 1 } else { lo };
    let last = hi.min(q - 1);
    let width = |g: usize| values[g + 1] - values[g];

    let widest = (first..=last)
        .filter(|&g| g < q)
        .max_by(|&a, &b| width(a).total_cmp(&width(b)).then(b.cmp(&a)));
    match widest {
        Some(g) if width(g) > 0.0 => Some(g),
        _ => {
            let reach = |g: usize| {
                if g < first {
                    first - g
                } else {
                    g.saturating_sub(last)
                }
            };
            (p..q)
                .filter(|&g| width(g) > 0.0)
                .min_by(|&a, &b| {
                    reach(a)
                        .cmp(&reach(b))
                        .then(width(b).total_cmp(&width(a)))
                        .then(a.cmp(&b))
                })
        }
    }
}

fn cuts_with_window(values: &[f64], raw: &[f64], window: usize) -> Vec<f64> {
    let heights = smooth(raw, window);
    let tallest = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = PERSISTENCE_FRACTION * tallest;

    let kept: Vec<usize> = persistent_peaks(&heights)
        .into_iter()
        .filter(|&(_, pers)| pers >= floor)
        .map(|(i, _)| i)
        .collect();

    let mut boundaries: Vec<f64> = Vec::new();
    for pair in kept.windows(2) {
        let Some(g) = valley_gap(values, &heights, pair[0], pair[1], 0.5 * floor) else {
            continue;
        };
        let cut = 0.5 * (values[g] + values[g + 1]);
        if boundaries.last().is_none_or(|&b| cut > b) {
            boundaries.push(cut);
        }
    }
    boundaries
}

pub fn detect_mountains_auto(graph: &DecisionGraph) -> Thresholds {
    if graph.shortcut || graph.len() < 3 {
        return Thresholds::none();
    }
    let values = graph.values();
    let raw: Vec<f64> = graph.points.iter().map(|p| p.density as f64).collect();

    let ladder: Vec<Vec<f64>> = window_ladder(raw.len())
        .into_iter()
        .map(|w| cuts_with_window(&values, &raw, w))
        .collect();
    let stable = (0..ladder.len().saturating_sub(STABLE_STEPS))
        .find(|&i| (1..=STABLE_STEPS).all(|k| ladder[i + k].len() == ladder[i].len()));
    let boundaries = match stable {
        Some(i) => ladder.into_iter().nth(i).unwrap(),
        None => cuts_with_window(&values, &raw, fallback_window(raw.len())),
    };
    Thresholds::new(boundaries).expect("cuts are increasing and finite")
}
