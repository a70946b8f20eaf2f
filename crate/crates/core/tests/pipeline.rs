use sdc_core::synthetic::{gaussian_blobs, grid_blobs, overlapping_pair};
use sdc_core::{
    inject_mar, interval_consistent, partition_by_thresholds, partition_intersection, refines,
    run_sdc, AutoThresholds, MissingDataset, ScriptedThresholds, SdcOptions, SdcResult, SdcRun,
    Thresholds,
};

/// Interval consistency of every division and refinement of every fusion.
fn check_surrogates(out: &SdcResult) {
    for step in &out.steps {
        let view = &out.views[step.dim];
        assert!(interval_consistent(view, &step.division), "dim {}", step.dim);
        if let Some(inter) = &step.intersection {
            assert!(refines(inter, &step.division), "dim {}", step.dim);
            assert!(refines(inter, &step.fused));
        }
    }
    for pair in out.steps.windows(2) {
        let inter = pair[1].intersection.as_ref().unwrap();
        assert!(refines(inter, &pair[0].fused));
    }
}

fn assert_total(out: &SdcResult, n: usize) {
    assert_eq!(out.partition.len(), n);
    assert!(out.partition.dense_labels(n).is_ok());
}

#[test]
fn two_blobs_with_missing_values() {
    let mut bad = Vec::new();
    for seed in 0..10 {
        let ds = gaussian_blobs(&[vec![0.0, 0.0], vec![10.0, 10.0]], 1.0, 200, seed);
        let ds = inject_mar(&ds, 0.2, seed).unwrap();
        let out = run_sdc(&ds, &mut AutoThresholds, SdcOptions::default()).unwrap();
        check_surrogates(&out);
        assert_total(&out, 400);
        let labels = out.partition.dense_labels(400).unwrap();
        let purity = sdc_core::purity(&labels, ds.truth_labels().unwrap()).unwrap();
        if out.partition.cluster_count() != 2 || purity < 0.95 {
            bad.push((seed, out.partition.sizes().to_vec(), purity));
        }
    }
    assert!(bad.is_empty(), "seeds off target (seed, sizes, purity): {bad:?}");
}

#[test]
fn two_gaussians_in_one_dimension() {
    for seed in 0..20 {
        let ds = gaussian_blobs(&[vec![0.0], vec![10.0]], 0.5, 500, seed);
        let opts = SdcOptions {
            normalize: false,
            enhance: false,
        };
        let out = run_sdc(&ds, &mut AutoThresholds, opts).unwrap();
        let cuts = out.steps[0].thresholds.boundaries();
        assert_eq!(cuts.len(), 1, "seed {seed}: {cuts:?}");
        assert!(cuts[0] > 2.0 && cuts[0] < 8.0, "seed {seed}: {cuts:?}");
    }
}

#[test]
fn one_dimension_is_its_own_partition() {
    let ds = gaussian_blobs(&[vec![0.0], vec![5.0], vec![12.0]], 1.0, 60, 3);
    let ds = inject_mar(&ds, 0.0, 0).unwrap();
    for th in [vec![], vec![2.5], vec![2.5, 8.0]] {
        let opts = SdcOptions {
            normalize: false,
            enhance: false,
        };
        let t = Thresholds::new(th).unwrap();
        let out = run_sdc(&ds, &mut ScriptedThresholds::new([t.clone()]), opts).unwrap();
        assert_eq!(out.partition, partition_by_thresholds(&out.views[0], &t));
    }
}

#[test]
fn complete_data_never_merges() {
    let ds = grid_blobs(3, 40, 0.08, 11);
    let out = run_sdc(&ds, &mut AutoThresholds, SdcOptions::default()).unwrap();
    check_surrogates(&out);
    for step in &out.steps[1..] {
        assert_eq!(step.intersection.as_ref(), Some(&step.fused));
    }
    // With nothing missing, the result is the plain intersection of every
    // division.
    let divisions: Vec<_> = out.steps.iter().map(|s| s.division.clone()).collect();
    let all = divisions[1..]
        .iter()
        .fold(divisions[0].clone(), |acc, d| partition_intersection(&acc, d));
    assert_eq!(all.canonical(), out.partition.canonical());
}

#[test]
fn runs_are_deterministic() {
    let ds = inject_mar(&overlapping_pair(150, 3.0, 4), 0.3, 4).unwrap();
    let a = run_sdc(&ds, &mut AutoThresholds, SdcOptions::default()).unwrap();
    let b = run_sdc(&ds, &mut AutoThresholds, SdcOptions::default()).unwrap();
    assert_eq!(a.partition, b.partition);
    let replay: Vec<Thresholds> = a.steps.iter().map(|s| s.thresholds.clone()).collect();
    let c = run_sdc(&ds, &mut ScriptedThresholds::new(replay), SdcOptions::default()).unwrap();
    assert_eq!(a.partition, c.partition);
}

#[test]
fn surrogates_hold_across_many_runs() {
    for seed in 0..12 {
        let ds = grid_blobs(2 + (seed as usize % 3), 30, 0.1, seed);
        let rate = 0.1 * (seed % 5) as f64;
        let ds = inject_mar(&ds, rate, seed).unwrap();
        let out = run_sdc(&ds, &mut AutoThresholds, SdcOptions::default()).unwrap();
        check_surrogates(&out);
        assert_total(&out, ds.object_count());
    }
}

#[test]
fn objects_seen_late_are_placed() {
    // Object 3 has only the last dimension; object 4 only the middle one.
    let ds = MissingDataset::from_rows(vec![
        vec![Some(0.0), Some(0.0), Some(0.0)],
        vec![Some(0.2), Some(0.1), Some(0.1)],
        vec![Some(9.0), Some(9.0), Some(9.0)],
        vec![None, None, Some(9.1)],
        vec![None, Some(0.05), None],
        vec![Some(9.2), Some(9.1), Some(8.9)],
    ])
    .unwrap();
    let opts = SdcOptions {
        normalize: false,
        enhance: false,
    };
    let cut = || Thresholds::new(vec![4.5]).unwrap();
    let mut run = SdcRun::new(&ds, opts).unwrap();
    assert_eq!(run.submit(cut()).unwrap().deferred, 2);
    assert_eq!(run.submit(cut()).unwrap().deferred, 1);
    assert!(run.submit(cut()).unwrap().finished);
    assert_eq!(
        run.result().unwrap().canonical(),
        vec![vec![0, 1, 4], vec![2, 3, 5]]
    );
}

#[test]
fn every_dimension_missing_somewhere() {
    // A dataset with no fully observed object still clusters.
    let ds = MissingDataset::from_rows(vec![
        vec![Some(0.0), None],
        vec![None, Some(0.0)],
        vec![Some(0.1), None],
        vec![None, Some(5.0)],
    ])
    .unwrap();
    let out = run_sdc(&ds, &mut AutoThresholds, SdcOptions::default()).unwrap();
    assert_total(&out, 4);
    assert_eq!(out.moved, 0);
}

#[test]
fn many_blobs_per_axis() {
    for seed in 0..3 {
        let ds = grid_blobs(8, 150, 0.08, seed);
        let out = run_sdc(&ds, &mut AutoThresholds, SdcOptions::default()).unwrap();
        check_surrogates(&out);
        let labels = out.partition.dense_labels(ds.object_count()).unwrap();
        let a = sdc_core::ari(&labels, ds.truth_labels().unwrap()).unwrap();
        assert_eq!(out.partition.cluster_count(), 64, "seed {seed}");
        assert!(a > 0.99, "seed {seed}: ari {a}");
    }
}
