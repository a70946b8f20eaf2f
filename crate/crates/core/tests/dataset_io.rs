use std::fs;

use proptest::prelude::*;
use sdc_core::dataset::write_csv;
use sdc_core::synthetic::gaussian_blobs;
use sdc_core::{inject_mar, load_csv, normalize_min_max, CsvOptions, MissingDataset};

fn sparse_rows() -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    (1usize..5, 1usize..40).prop_flat_map(|(d, n)| {
        prop::collection::vec(
            prop::collection::vec(prop::option::weighted(0.8, -1e6f64..1e6), d)
                .prop_filter("row needs a value", |r| r.iter().any(Option::is_some)),
            n,
        )
    })
}

#[test]
fn mar_rate_within_three_sigma() {
    let ds = gaussian_blobs(&[vec![0.0; 4]], 1.0, 2500, 1);
    let rows = ds.object_count() as f64;
    let cells = rows * ds.dim_count() as f64;
    for (seed, rate) in [(1, 0.1), (2, 0.2), (3, 0.4), (4, 0.6)] {
        let out = inject_mar(&ds, rate, seed).unwrap();
        let removed = out.missing_cell_count() as f64;
        // Each row emptied by chance (probability rate^4) gets one cell back.
        let expected = cells * rate - rows * rate.powi(4);
        let sigma = (cells * rate * (1.0 - rate)).sqrt();
        assert!(
            (removed - expected).abs() <= 3.0 * sigma,
            "rate {rate}: removed {removed}, expected {expected}"
        );
        assert!((0..out.object_count()).all(|o| out.row(o).iter().any(Option::is_some)));
    }
}

#[test]
fn mar_is_seeded() {
    let ds = gaussian_blobs(&[vec![0.0; 3]], 1.0, 100, 1);
    assert_eq!(inject_mar(&ds, 0.3, 9).unwrap(), inject_mar(&ds, 0.3, 9).unwrap());
    assert_ne!(inject_mar(&ds, 0.3, 9).unwrap(), inject_mar(&ds, 0.3, 10).unwrap());
    assert_eq!(inject_mar(&ds, 0.0, 9).unwrap(), ds);
    assert!(inject_mar(&ds, 1.0, 9).is_err());
}

#[test]
fn file_round_trip_with_labels() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    fs::write(&path, "a,class,b\n1.5,x,NA\nNA,y,2\n3,x,4e-3\n").unwrap();
    let opts = CsvOptions {
        missing_marker: "NA".into(),
        has_header: true,
        label_column: Some("class".into()),
    };
    let ds = load_csv(&path, &opts).unwrap();
    assert_eq!(ds.dim_count(), 2);
    assert_eq!(ds.truth_labels().unwrap(), ["x", "y", "x"]);
    assert_eq!(ds.row(0), [Some(1.5), None]);
    assert_eq!(ds.row(2), [Some(3.0), Some(0.004)]);

    let mut buf = Vec::new();
    write_csv(&ds, &mut buf, &opts).unwrap();
    assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().next(), Some("a,class,b"));
    let again = sdc_core::read_csv(buf.as_slice(), &opts).unwrap();
    assert_eq!(again, ds);
}

proptest! {
    #[test]
    fn normalizing_twice_changes_nothing(rows in sparse_rows()) {
        let ds = MissingDataset::from_rows(rows).unwrap();
        let once = normalize_min_max(&ds);
        let twice = normalize_min_max(&once);
        for o in 0..ds.object_count() {
            for (a, b) in once.row(o).iter().zip(twice.row(o)) {
                match (a, b) {
                    (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12),
                    (None, None) => {}
                    _ => prop_assert!(false, "missing pattern changed"),
                }
            }
            for v in once.row(o).iter().flatten() {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }
    }

    #[test]
    fn csv_round_trip(rows in sparse_rows()) {
        let ds = MissingDataset::from_rows(rows).unwrap();
        let opts = CsvOptions::default();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf, &opts).unwrap();
        prop_assert_eq!(sdc_core::read_csv(buf.as_slice(), &opts).unwrap(), ds);
    }
}
