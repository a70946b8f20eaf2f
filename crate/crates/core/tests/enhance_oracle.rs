use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdc_core::enhance::enhance;
use sdc_core::{gravitational_force, FullyObservedSet, PointSet};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn random_set(rng: &mut ChaCha8Rng) -> FullyObservedSet {
    let n = rng.random_range(8..120);
    let d = rng.random_range(1..5);
    // A dense core plus sparse stragglers so that both density classes exist.
    let coords: Vec<f64> = (0..n * d)
        .map(|k| {
            let spread = if (k / d) % 4 == 0 { 10.0 } else { 1.0 };
            spread * (rng.random::<f64>() - 0.5)
        })
        .collect();
    FullyObservedSet {
        ids: (0..n).map(|i| i * 3 + 1).collect(),
        points: PointSet::new(d, coords),
    }
}

/// Indices of the five nearest other points, ties by index.
fn five_nearest(points: &PointSet, i: usize) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = (0..points.len())
        .filter(|&j| j != i)
        .map(|j| (dist(points.point(i), points.point(j)), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().take(5).map(|(_, j)| j).collect()
}

fn densities(points: &PointSet, radius: f64) -> Vec<usize> {
    (0..points.len())
        .map(|i| (0..points.len()).filter(|&j| dist(points.point(i), points.point(j)) <= radius).count())
        .collect()
}

/// Expected position of every object after one contraction step, evaluated
/// term by term: x + ½·Σⱼ G·|n₁ − nⱼ|·(nⱼ − x)/|x − nⱼ|².
fn oracle_positions(points: &PointSet) -> (Vec<Vec<f64>>, Vec<bool>) {
    let n = points.len();
    let nn: Vec<f64> = (0..n)
        .map(|i| dist(points.point(i), points.point(five_nearest(points, i)[0])))
        .collect();
    let g = nn.iter().sum::<f64>() / n as f64;
    let rho = densities(points, 5.0 * g);
    let mean = rho.iter().sum::<usize>() as f64 / n as f64;
    let low: Vec<bool> = rho.iter().map(|&r| (r as f64) < mean).collect();

    let moved = (0..n)
        .map(|i| {
            let x = points.point(i);
            if !low[i] {
                return x.to_vec();
            }
            let nb = five_nearest(points, i);
            let first = points.point(nb[0]);
            let mut out = x.to_vec();
            for &j in &nb {
                let y = points.point(j);
                let r = dist(x, y);
                if r == 0.0 {
                    continue;
                }
                let w = g * dist(first, y) / (r * r);
                for (o, (&xc, &yc)) in out.iter_mut().zip(x.iter().zip(y)) {
                    *o += 0.5 * w * (yc - xc);
                }
            }
            out
        })
        .collect();
    (moved, low)
}

#[test]
fn displacement_matches_term_by_term_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut moved_total = 0;
    for case in 0..100 {
        let fo = random_set(&mut rng);
        let out = enhance(&fo).unwrap();
        let (want, low) = oracle_positions(&fo.points);
        let moved: Vec<usize> = (0..fo.len()).filter(|&i| low[i]).collect();
        assert_eq!(out.moved, moved, "case {case}");
        moved_total += moved.len();
        for i in 0..fo.len() {
            let got = out.set.coords(i);
            let orig = fo.coords(i);
            if !low[i] {
                assert_eq!(got, orig, "case {case}: unmoved object changed");
                continue;
            }
            let step_got: Vec<f64> = got.iter().zip(orig).map(|(a, b)| a - b).collect();
            let step_want: Vec<f64> = want[i].iter().zip(orig).map(|(a, b)| a - b).collect();
            let scale = step_want.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
            for (a, b) in step_got.iter().zip(&step_want) {
                assert!((a - b).abs() <= 1e-10 * scale, "case {case} object {i}: {a} vs {b}");
            }
        }
        assert_eq!(out.set.ids, fo.ids);
    }
    assert!(moved_total > 100);
}

#[test]
fn nearest_neighbor_term_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let d = rng.random_range(1..6);
        let p: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let n1: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let f = gravitational_force(&p, &[&n1], rng.random::<f64>() * 10.0);
        assert!(f.vector.iter().all(|&v| v == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn result_does_not_depend_on_object_order(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fo = random_set(&mut rng);
        let n = fo.len();
        // Reverse the order of the objects.
        let d = fo.points.dim();
        let mut coords = Vec::with_capacity(n * d);
        for i in (0..n).rev() {
            coords.extend_from_slice(fo.coords(i));
        }
        let reversed = FullyObservedSet {
            ids: fo.ids.iter().rev().copied().collect(),
            points: PointSet::new(d, coords),
        };
        let a = enhance(&fo).unwrap();
        let b = enhance(&reversed).unwrap();
        for i in 0..n {
            let (pa, pb) = (a.set.coords(i), b.set.coords(n - 1 - i));
            for (x, y) in pa.iter().zip(pb) {
                // Neighbor ties can reorder the summation, nothing more.
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}
