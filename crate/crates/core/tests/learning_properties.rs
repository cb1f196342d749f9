use proptest::prelude::*;

use pwlnn::affine::linspace;
use pwlnn::catalog;
use pwlnn::learning::{fit_ahh, fit_hh, fit_sbf, Dataset, FitConfig, FitTrace, TraceAction};
use pwlnn::repr::{PwlFunction, SbfBasis};
use pwlnn::BoxDomain;

fn grid(per_dim: usize, f: impl Fn(&[f64]) -> f64) -> Dataset {
    Dataset::from_fn(BoxDomain::cube(2, 0.0, 1.0).grid(per_dim), f).unwrap()
}

fn assert_monotone(trace: &FitTrace) {
    let kept: Vec<f64> = trace.records.iter().filter(|r| r.action.accepted()).map(|r| r.train_sse).collect();
    for w in kept.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "accepted step raised SSE: {w:?}\n{}", trace.to_csv());
    }
}

#[test]
fn exactly_representable_targets_are_refit() {
    let c = catalog::three_piece_cplr();
    let line = Dataset::from_fn(linspace(-3.0, 3.0, 121).into_iter().map(|x| vec![x]).collect(), |x| {
        c.eval(x).unwrap()
    })
    .unwrap();
    let (hh, _) = fit_hh(&line, &FitConfig { max_terms: 2, ..Default::default() }).unwrap();
    let rmse = line.rmse(|x| hh.eval(x).unwrap());
    assert!(rmse <= 1e-6, "hh rmse {rmse}");

    // Knots on quantile candidates of the 21-point grid.
    let d = grid(21, |x| 2.0 * (x[1] - 0.3).max(0.0) - (0.6 - x[0]).max(0.0));
    let ahh = fit_ahh(&d, &FitConfig { max_terms: 4, ..Default::default() }).unwrap();
    let rmse = d.rmse(|x| ahh.model.eval(x).unwrap());
    assert!(rmse <= 1e-6, "ahh rmse {rmse}\n{}", ahh.tree);

    // Center on a grid point, slopes on the coordinate-descent grid.
    let b = SbfBasis { w: 1.5, gamma: vec![2.0, 4.0], zeta: vec![0.5, 0.25] };
    let d = grid(21, |x| b.w * b.value(x));
    let (sbf, _) = fit_sbf(&d, &FitConfig { max_terms: 1, ..Default::default() }).unwrap();
    let rmse = d.rmse(|x| sbf.eval(x).unwrap());
    assert!(rmse <= 1e-6, "sbf rmse {rmse}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fitters_are_monotone_and_deterministic(seed in 0u64..1000, split in prop::sample::select(vec![0.0, 0.25])) {
        let d = grid(15, |x| catalog::ridge_value(x) / 10.0 + (x[0] - 0.4).abs());
        let cfg = FitConfig { max_terms: 5, seed, validation_split: split, ..Default::default() };

        let (m1, t1) = fit_hh(&d, &cfg).unwrap();
        let (m2, t2) = fit_hh(&d, &cfg).unwrap();
        prop_assert_eq!(m1.to_text(), m2.to_text());
        prop_assert_eq!(t1.to_csv(), t2.to_csv());
        assert_monotone(&t1);

        let a1 = fit_ahh(&d, &cfg).unwrap();
        let a2 = fit_ahh(&d, &cfg).unwrap();
        prop_assert_eq!(a1.model.to_text(), a2.model.to_text());
        prop_assert_eq!(a1.trace.to_csv(), a2.trace.to_csv());
        assert_monotone(&a1.trace);
        // Pruning only ever lowers the score it is judged on.
        let score = |r: &pwlnn::learning::TraceRecord| r.valid_sse.unwrap_or(r.train_sse);
        let mut last = None;
        for r in a1.trace.records.iter().skip_while(|r| r.action != TraceAction::Prune) {
            if r.action == TraceAction::Prune {
                if let Some(prev) = last {
                    prop_assert!(score(r) <= prev);
                }
                last = Some(score(r));
            }
        }

        let (s1, u1) = fit_sbf(&d, &cfg).unwrap();
        let (s2, u2) = fit_sbf(&d, &cfg).unwrap();
        prop_assert_eq!(s1.to_text(), s2.to_text());
        prop_assert_eq!(u1.to_csv(), u2.to_csv());
        assert_monotone(&u1);
    }
}
