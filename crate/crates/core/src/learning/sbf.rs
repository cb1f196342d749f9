use crate::error::Result;
use crate::learning::data::{exact_floor, no_progress, Dataset, FitConfig, FitTrace, TraceAction};
use crate::learning::lsq::{predict, refit, sse};
use crate::repr::{SbfBasis, SbfModel};

/// Per-coordinate shape grid `{2⁻³, …, 2³}`.
pub const GAMMA_GRID: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Coordinate-descent sweeps over the shape grid.
const SWEEPS: usize = 2;

fn tent(gamma: &[f64], zeta: &[f64], x: &[Vec<f64>]) -> Vec<f64> {
    let b = SbfBasis { w: 1.0, gamma: gamma.to_vec(), zeta: zeta.to_vec() };
    x.iter().map(|p| b.value(p)).collect()
}

/// Simplex basis functions by structured decision.
///
/// Each round centers a new basis on the sample with the largest absolute
/// residual (lowest index on ties), picks its shape by coordinate descent
/// over [`GAMMA_GRID`] starting from all ones, and refits every weight. There
/// is no intercept; a zero residual ends the fit.
pub fn fit_sbf(data: &Dataset, cfg: &FitConfig) -> Result<(SbfModel, FitTrace)> {
    cfg.validate()?;
    let (train, valid) = data.split(cfg.validation_split, cfg.seed)?;
    let n = train.dim();
    let x = train.inputs();
    let y = train.targets();
    let floor = exact_floor(y);

    let mut bases: Vec<SbfBasis> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut theta: Vec<f64> = Vec::new();
    let mut cur: f64 = y.iter().map(|v| v * v).sum();
    let valid_sse = |bases: &[SbfBasis], theta: &[f64]| {
        valid.as_ref().map(|v| {
            let vc: Vec<Vec<f64>> = bases.iter().map(|b| tent(&b.gamma, &b.zeta, v.inputs())).collect();
            sse(&vc, theta, v.targets())
        })
    };
    let mut trace = FitTrace::default();
    trace.push(0, cur, valid_sse(&bases, &theta), TraceAction::Init);

    while bases.len() < cfg.max_terms {
        let pred = predict(&cols, &theta, y.len());
        let resid: Vec<f64> = y.iter().zip(&pred).map(|(t, p)| (t - p).abs()).collect();
        let peak = resid
            .iter()
            .enumerate()
            .fold(0, |best, (i, r)| if *r > resid[best] { i } else { best });
        if resid[peak] == 0.0 || cur <= floor {
            trace.push(bases.len(), cur, valid_sse(&bases, &theta), TraceAction::Stop);
            break;
        }
        let zeta = x[peak].clone();
        let mut gamma = vec![1.0; n];
        let mut trial = cols.clone();
        trial.push(tent(&gamma, &zeta, x));
        let (mut th, mut s) = refit(&trial, y, cfg.ridge)?;
        for _ in 0..SWEEPS {
            for i in 0..n {
                for g in GAMMA_GRID {
                    if g == gamma[i] {
                        continue;
                    }
                    let mut cand = gamma.clone();
                    cand[i] = g;
                    *trial.last_mut().expect("trial has the new column") = tent(&cand, &zeta, x);
                    let (t2, s2) = refit(&trial, y, cfg.ridge)?;
                    if s2 < s {
                        (th, s, gamma) = (t2, s2, cand);
                    }
                }
            }
        }
        if s > cur || no_progress(cur, s, cfg.tolerance, floor) {
            trace.push(bases.len() + 1, s, None, TraceAction::Reject);
            trace.push(bases.len(), cur, valid_sse(&bases, &theta), TraceAction::Stop);
            break;
        }
        cols.push(tent(&gamma, &zeta, x));
        bases.push(SbfBasis { w: 0.0, gamma, zeta });
        theta = th;
        cur = s;
        trace.push(bases.len(), cur, valid_sse(&bases, &theta), TraceAction::Grow);
    }
    for (b, w) in bases.iter_mut().zip(&theta) {
        b.w = *w;
    }
    Ok((SbfModel::new(n, bases)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{linspace, BoxDomain};
    use crate::catalog;
    use crate::repr::PwlFunction;

    #[test]
    fn planted_basis_recovered() {
        let truth = SbfBasis { w: 3.0, gamma: vec![2.0, 2.0], zeta: vec![0.5, 0.5] };
        let d = Dataset::from_fn(BoxDomain::cube(2, 0.0, 1.0).grid(41), |x| truth.w * truth.value(x)).unwrap();
        let (m, _) = fit_sbf(&d, &FitConfig { max_terms: 3, ..Default::default() }).unwrap();
        let first = &m.bases[0];
        assert!(first.zeta.iter().all(|z| (z - 0.5).abs() <= 0.025));
        assert!(d.rmse(|x| m.eval(x).unwrap()) <= 0.05);
    }

    #[test]
    fn zero_target_gives_empty_model() {
        let d = Dataset::from_fn(BoxDomain::cube(2, 0.0, 1.0).grid(5), |_| 0.0).unwrap();
        let (m, trace) = fit_sbf(&d, &FitConfig::default()).unwrap();
        assert!(m.bases.is_empty());
        assert_eq!(trace.records.len(), 2);
    }

    #[test]
    fn univariate_two_kink_target() {
        let c = catalog::three_piece_cplr();
        let d = Dataset::from_fn(linspace(-3.0, 3.0, 601).into_iter().map(|x| vec![x]).collect(), |x| {
            c.eval(x).unwrap()
        })
        .unwrap();
        let (m, trace) = fit_sbf(&d, &FitConfig { max_terms: 6, ..Default::default() }).unwrap();
        let kept: Vec<f64> = trace.records.iter().filter(|r| r.action.accepted()).map(|r| r.train_sse).collect();
        assert!(kept.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let rmse = d.rmse(|x| m.eval(x).unwrap());
        assert!(rmse <= 0.05, "rmse {rmse}");
    }
}
