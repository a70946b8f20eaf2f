use proptest::prelude::*;
use sdc_core::metrics::score;
use sdc_core::{ari, nmi, purity};

/// All set partitions of `0..n` as restricted growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// ARI from the four pair classes.
fn pair_ari(pred: &[usize], truth: &[usize]) -> f64 {
    let (mut both, mut pred_only, mut truth_only, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..pred.len() {
        for j in i + 1..pred.len() {
            match (pred[i] == pred[j], truth[i] == truth[j]) {
                (true, true) => both += 1.0,
                (true, false) => pred_only += 1.0,
                (false, true) => truth_only += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let denom = (both + pred_only) * (pred_only + neither) + (both + truth_only) * (truth_only + neither);
    if denom == 0.0 {
        return if pred_only == 0.0 && truth_only == 0.0 { 1.0 } else { 0.0 };
    }
    2.0 * (both * neither - pred_only * truth_only) / denom
}

#[test]
fn bell_numbers() {
    let counts: Vec<usize> = (1..=8).map(|n| set_partitions(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 5, 15, 52, 203, 877, 4140]);
}

#[test]
fn ari_matches_pair_counting_exhaustively() {
    for n in 2..=6 {
        let all = set_partitions(n);
        for p in &all {
            for t in &all {
                let got = ari(p, t).unwrap();
                let want = pair_ari(p, t);
                assert!((got - want).abs() < 1e-12, "{p:?} vs {t:?}: {got} != {want}");
            }
        }
    }
    // Every partition of 7 and 8 objects against a spread of references.
    for n in 7..=8 {
        let all = set_partitions(n);
        let refs: Vec<&Vec<usize>> = all.iter().step_by(all.len() / 12).collect();
        for p in &all {
            for t in &refs {
                let got = ari(p, t).unwrap();
                assert!((got - pair_ari(p, t)).abs() < 1e-12);
            }
        }
    }
}

struct Fixture {
    pred: &'static [usize],
    truth: &'static [usize],
    purity: f64,
    nmi: f64,
    ari: f64,
}

// Values worked out from the contingency tables; the two non-trivial NMI
// derivations are spelled out next to their rows.
const FIXTURES: &[Fixture] = &[
    Fixture { pred: &[0, 0, 1, 1], truth: &[0, 0, 1, 1], purity: 1.0, nmi: 1.0, ari: 1.0 },
    Fixture { pred: &[0, 0, 0, 0], truth: &[0, 0, 1, 1], purity: 0.5, nmi: 0.0, ari: 0.0 },
    // I = ½ln2, H(pred) = ln4 − ¾ln3, H(truth) = ln2.
    Fixture { pred: &[0, 0, 0, 1], truth: &[0, 0, 1, 1], purity: 0.75, nmi: 0.3437110184854508, ari: 0.0 },
    // I = ln2, H(pred) = ln4, H(truth) = ln2 → 2/3.
    Fixture { pred: &[0, 1, 2, 3], truth: &[0, 0, 1, 1], purity: 1.0, nmi: 2.0 / 3.0, ari: 0.0 },
    Fixture { pred: &[0, 0, 1, 1, 2, 2], truth: &[0, 0, 0, 1, 1, 1], purity: 5.0 / 6.0, nmi: 0.5158037429793889, ari: 8.0 / 33.0 },
    Fixture { pred: &[0, 0, 0, 1, 1, 1, 2, 2, 2], truth: &[0, 0, 1, 1, 1, 2, 2, 2, 0], purity: 2.0 / 3.0, nmi: 0.42061983571430506, ari: 1.0 / 9.0 },
    Fixture { pred: &[0, 1, 1, 2, 2, 2], truth: &[1, 1, 0, 0, 0, 0], purity: 5.0 / 6.0, nmi: 0.4920936619047235, ari: 34.0 / 109.0 },
    Fixture { pred: &[0, 0, 0, 0, 0, 1], truth: &[0, 0, 0, 1, 1, 1], purity: 2.0 / 3.0, nmi: 0.2313598919830773, ari: 0.0 },
    Fixture { pred: &[2, 2, 1, 1, 0, 0, 0, 0], truth: &[0, 0, 0, 0, 1, 1, 2, 2], purity: 0.75, nmi: 2.0 / 3.0, ari: 0.3 },
    Fixture { pred: &[0, 0, 1, 1, 1, 1, 1, 2, 2, 2], truth: &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1], purity: 0.6, nmi: 0.03141125771788253, ari: -11.0 / 97.0 },
    Fixture { pred: &[0, 0, 0, 1, 1, 2], truth: &[0, 0, 0, 0, 0, 0], purity: 1.0, nmi: 0.0, ari: 0.0 },
];

#[test]
fn contingency_fixtures() {
    for (k, f) in FIXTURES.iter().enumerate() {
        let s = score(f.pred, f.truth).unwrap();
        assert!((s.purity - f.purity).abs() < 1e-12, "fixture {k} purity {}", s.purity);
        assert!((s.nmi - f.nmi).abs() < 1e-12, "fixture {k} nmi {}", s.nmi);
        assert!((s.ari - f.ari).abs() < 1e-12, "fixture {k} ari {}", s.ari);
    }
}

fn labelings() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(0usize..6, n),
            prop::collection::vec(0usize..4, n),
        )
    })
}

proptest! {
    #[test]
    fn scores_ignore_label_names((pred, truth) in labelings(), shift in 1usize..100) {
        let renamed_pred: Vec<String> = pred.iter().map(|&l| format!("c{}", (l * 7 + shift) % 101)).collect();
        let renamed_truth: Vec<usize> = truth.iter().map(|&l| 1000 - l * shift).collect();
        let a = score(&pred, &truth).unwrap();
        let b = score(&renamed_pred, &renamed_truth).unwrap();
        prop_assert!((a.purity - b.purity).abs() < 1e-12);
        prop_assert!((a.nmi - b.nmi).abs() < 1e-12);
        prop_assert!((a.ari - b.ari).abs() < 1e-12);
    }

    #[test]
    fn ranges_and_symmetry((pred, truth) in labelings()) {
        let s = score(&pred, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.purity));
        prop_assert!((0.0..=1.0).contains(&s.nmi));
        prop_assert!(s.ari <= 1.0 + 1e-12);
        prop_assert!((ari(&pred, &truth).unwrap() - ari(&truth, &pred).unwrap()).abs() < 1e-12);
        prop_assert!((nmi(&pred, &truth).unwrap() - nmi(&truth, &pred).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn refining_never_lowers_purity((pred, truth) in labelings(), split in 0usize..6) {
        // Split one predicted cluster by object parity.
        let finer: Vec<usize> = pred
            .iter()
            .enumerate()
            .map(|(i, &l)| if l == split && i % 2 == 1 { 100 } else { l })
            .collect();
        prop_assert!(purity(&finer, &truth).unwrap() >= purity(&pred, &truth).unwrap() - 1e-12);
    }

    #[test]
    fn self_agreement_is_perfect(pred in prop::collection::vec(0usize..5, 2..40)) {
        prop_assert_eq!(purity(&pred, &pred).unwrap(), 1.0);
        prop_assert!((ari(&pred, &pred).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((nmi(&pred, &pred).unwrap() - 1.0).abs() < 1e-12);
    }
}
