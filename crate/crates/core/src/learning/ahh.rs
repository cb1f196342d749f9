use std::fmt;

use crate::error::Result;
use crate::learning::data::{exact_floor, no_progress, Dataset, FitConfig, FitTrace, TraceAction};
use crate::learning::lsq::{refit, sse};
use crate::repr::{AhhBasis, AhhFactor, AhhModel};

/// Knot candidates are the `k/20` quantiles for `k = 1..=19`.
const QUANTILE_STEPS: usize = 20;

/// One grown basis: `min{B_parent, max{0, δ(x_var − knot)}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AhhNode {
    /// 1-based growth index.
    pub basis: usize,
    /// Growth index of the parent, 0 for the constant basis.
    pub parent: usize,
    pub var: usize,
    pub knot: f64,
    pub delta: f64,
    pub depth: usize,
    pub pruned: bool,
}

/// Generic tree of grown bases, children listed after their parents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AhhTree {
    pub nodes: Vec<AhhNode>,
}

impl fmt::Display for AhhTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "B0 = 1")?;
        for n in &self.nodes {
            let sign = if n.delta > 0.0 { "+" } else { "-" };
            let hinge = format!("max{{0, {sign}(x{} - {})}}", n.var + 1, n.knot);
            let body = if n.parent == 0 { hinge } else { format!("min{{B{}, {hinge}}}", n.parent) };
            let indent = "  ".repeat(n.depth);
            let note = if n.pruned { "  [pruned]" } else { "" };
            writeln!(f, "{indent}B{} = {body}{note}", n.basis)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AhhFit {
    pub model: AhhModel,
    pub trace: FitTrace,
    pub tree: AhhTree,
}

fn basis_column(factors: &[AhhFactor], x: &[Vec<f64>]) -> Vec<f64> {
    if factors.is_empty() {
        return vec![1.0; x.len()];
    }
    x.iter()
        .map(|p| factors.iter().map(|f| f.eval(p)).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Distinct `k/20` empirical quantiles (linear interpolation) of `values`.
fn knot_candidates(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let last = values.len() - 1;
    let mut knots: Vec<f64> = Vec::new();
    for k in 1..QUANTILE_STEPS {
        let h = last * k;
        let (lo, rem) = (h / QUANTILE_STEPS, h % QUANTILE_STEPS);
        let q = if rem == 0 {
            values[lo]
        } else {
            values[lo] + (rem as f64 / QUANTILE_STEPS as f64) * (values[lo + 1] - values[lo])
        };
        if knots.last() != Some(&q) {
            knots.push(q);
        }
    }
    knots
}

struct Candidate {
    sse: f64,
    children: Vec<(Vec<AhhFactor>, Vec<f64>, AhhNode)>,
}

/// Adaptive hinging hyperplanes by tree search.
///
/// The forward pass starts from the constant basis and repeatedly adds the
/// pair `min{B_m, max{0, ±(x_v − β)}}` (plain hinges when the parent is the
/// constant) that minimizes the refit SSE. The backward pass then deletes
/// bases one at a time while the deletion strictly lowers the validation
/// SSE, or the training SSE when there is no validation split.
pub fn fit_ahh(data: &Dataset, cfg: &FitConfig) -> Result<AhhFit> {
    cfg.validate()?;
    let (train, valid) = data.split(cfg.validation_split, cfg.seed)?;
    let n = train.dim();
    let x = train.inputs();
    let y = train.targets();
    let floor = exact_floor(y);

    let mut factors: Vec<Vec<AhhFactor>> = vec![Vec::new()];
    let mut depth = vec![0usize];
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; y.len()]];
    let mut tree = AhhTree::default();
    let (mut theta, mut cur) = refit(&cols, y, cfg.ridge)?;
    let valid_sse = |factors: &[Vec<AhhFactor>], theta: &[f64]| {
        valid.as_ref().map(|v| {
            let vc: Vec<Vec<f64>> = factors.iter().map(|f| basis_column(f, v.inputs())).collect();
            sse(&vc, theta, v.targets())
        })
    };
    let mut trace = FitTrace::default();
    trace.push(0, cur, valid_sse(&factors, &theta), TraceAction::Init);

    while cols.len() - 1 < cfg.max_terms {
        if cur <= floor {
            trace.push(cols.len() - 1, cur, valid_sse(&factors, &theta), TraceAction::Stop);
            break;
        }
        let slots = cfg.max_terms - (cols.len() - 1);
        let mut best: Option<(Candidate, Vec<f64>)> = None;
        for parent in 0..cols.len() {
            let support: Vec<usize> = (0..y.len()).filter(|&i| cols[parent][i] > 0.0).collect();
            if support.is_empty() {
                continue;
            }
            for var in 0..n {
                let values: Vec<f64> = support.iter().map(|&i| x[i][var]).collect();
                if values.iter().all(|v| *v == values[0]) {
                    continue;
                }
                for knot in knot_candidates(values) {
                    let mut children = Vec::new();
                    for delta in [1.0, -1.0] {
                        let mut fs = factors[parent].clone();
                        fs.push(AhhFactor { delta, var, knot });
                        let col = basis_column(&fs, x);
                        if col.iter().all(|v| *v == 0.0) {
                            continue;
                        }
                        let node = AhhNode {
                            basis: 0,
                            parent,
                            var,
                            knot,
                            delta,
                            depth: depth[parent] + 1,
                            pruned: false,
                        };
                        children.push((fs, col, node));
                    }
                    let options: Vec<Vec<usize>> = if slots >= 2 && children.len() == 2 {
                        vec![vec![0, 1]]
                    } else {
                        (0..children.len()).map(|c| vec![c]).collect()
                    };
                    for opt in options {
                        let mut trial = cols.clone();
                        trial.extend(opt.iter().map(|&c| children[c].1.clone()));
                        let (th, s) = refit(&trial, y, cfg.ridge)?;
                        if best.as_ref().is_none_or(|(b, _)| s < b.sse) {
                            let picked = opt.iter().map(|&c| children[c].clone()).collect();
                            best = Some((Candidate { sse: s, children: picked }, th));
                        }
                    }
                }
            }
        }
        let Some((cand, th)) = best else {
            trace.push(cols.len() - 1, cur, valid_sse(&factors, &theta), TraceAction::Stop);
            break;
        };
        if cand.sse > cur || no_progress(cur, cand.sse, cfg.tolerance, floor) {
            trace.push(cols.len() - 1 + cand.children.len(), cand.sse, None, TraceAction::Reject);
            trace.push(cols.len() - 1, cur, valid_sse(&factors, &theta), TraceAction::Stop);
            break;
        }
        for (fs, col, mut node) in cand.children {
            node.basis = cols.len();
            depth.push(node.depth);
            tree.nodes.push(node);
            factors.push(fs);
            cols.push(col);
        }
        theta = th;
        cur = cand.sse;
        trace.push(cols.len() - 1, cur, valid_sse(&factors, &theta), TraceAction::Grow);
    }

    // Backward pass over the non-constant bases.
    let mut active: Vec<usize> = (1..cols.len()).collect();
    let score = |set: &[usize]| -> Result<(Vec<f64>, f64, f64)> {
        let mut sub = vec![cols[0].clone()];
        sub.extend(set.iter().map(|&b| cols[b].clone()));
        let (th, s) = refit(&sub, y, cfg.ridge)?;
        let fs: Vec<Vec<AhhFactor>> = std::iter::once(0).chain(set.iter().copied()).map(|b| factors[b].clone()).collect();
        Ok((th.clone(), s, valid_sse(&fs, &th).unwrap_or(s)))
    };
    let (mut theta, _, mut score_now) = score(&active)?;
    while !active.is_empty() {
        let mut best: Option<(usize, Vec<f64>, f64, f64)> = None;
        for k in 0..active.len() {
            let mut set = active.clone();
            set.remove(k);
            let (th, s, v) = score(&set)?;
            if best.as_ref().is_none_or(|b| v < b.3) {
                best = Some((k, th, s, v));
            }
        }
        let (k, th, s, v) = best.expect("active set is non-empty");
        if v >= score_now {
            break;
        }
        tree.nodes[active[k] - 1].pruned = true;
        active.remove(k);
        theta = th;
        score_now = v;
        trace.push(active.len(), s, valid.as_ref().map(|_| v), TraceAction::Prune);
    }

    let bases = active
        .iter()
        .zip(&theta[1..])
        .map(|(&b, w)| AhhBasis { w: *w, factors: factors[b].clone() })
        .collect();
    let model = AhhModel::new(n, theta[0], bases)?;
    Ok(AhhFit { model, trace, tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::BoxDomain;
    use crate::repr::PwlFunction;

    fn grid_data(f: impl Fn(&[f64]) -> f64) -> Dataset {
        Dataset::from_fn(BoxDomain::cube(2, 0.0, 1.0).grid(41), f).unwrap()
    }

    #[test]
    fn quantile_knots_hit_grid_points() {
        let v: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
        let knots = knot_candidates(v);
        assert_eq!(knots.len(), 19);
        assert!(knots.contains(&0.3) && knots.contains(&0.6));
        let tied = knot_candidates(vec![1.0, 1.0, 1.0, 2.0]);
        let want = [1.0, 1.1, 1.25, 1.4, 1.55, 1.7, 1.85];
        assert_eq!(tied.len(), want.len());
        assert!(tied.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-12));
    }

    #[test]
    fn additive_hinges_recovered() {
        let d = grid_data(|x| (x[1] - 0.3).max(0.0) + (0.6 - x[0]).max(0.0));
        let fit = fit_ahh(&d, &FitConfig { max_terms: 4, ..Default::default() }).unwrap();
        assert!(d.rmse(|x| fit.model.eval(x).unwrap()) <= 1e-3);
        let knots: Vec<(usize, f64)> = fit.tree.nodes.iter().map(|n| (n.var, n.knot)).collect();
        assert!(knots.iter().any(|&(v, k)| v == 1 && (k - 0.3).abs() <= 0.05));
        assert!(knots.iter().any(|&(v, k)| v == 0 && (k - 0.6).abs() <= 0.05));
    }

    #[test]
    fn constant_target_does_not_grow() {
        let d = grid_data(|_| 5.0);
        let fit = fit_ahh(&d, &FitConfig::default()).unwrap();
        assert!(fit.model.bases.is_empty());
        assert!((fit.model.intercept - 5.0).abs() <= 1e-9);
    }

    #[test]
    fn interaction_needs_two_factors() {
        let d = grid_data(|x| (x[1] - 0.3).max(0.0).min((0.6 - x[0]).max(0.0)));
        let fit = fit_ahh(&d, &FitConfig { max_terms: 6, ..Default::default() }).unwrap();
        assert!(fit.model.bases.iter().any(|b| b.factors.len() == 2), "{}\n{}", fit.tree, fit.trace.to_csv());
        assert!(fit.tree.nodes.iter().any(|n| n.depth == 2));
    }

    #[test]
    fn hinges_plus_interaction_recovered() {
        let b1 = |x: &[f64]| (x[1] - 0.3).max(0.0);
        let b3 = |x: &[f64]| (0.6 - x[0]).max(0.0);
        let d = grid_data(|x| b1(x) + b3(x) + b1(x).min(b3(x)));
        let fit = fit_ahh(&d, &FitConfig { max_terms: 8, ..Default::default() }).unwrap();
        let rmse = d.rmse(|x| fit.model.eval(x).unwrap());
        assert!(rmse <= 1e-3, "rmse {rmse}\n{}", fit.tree);
    }

    #[test]
    fn pruning_never_raises_validation_sse() {
        let d = grid_data(|x| (x[1] - 0.3).max(0.0) + 0.05 * (31.0 * x[0]).sin());
        let cfg = FitConfig { max_terms: 8, validation_split: 0.3, seed: 2, ..Default::default() };
        let fit = fit_ahh(&d, &cfg).unwrap();
        let mut last = None;
        for r in fit.trace.records.iter().filter(|r| r.action == TraceAction::Prune) {
            let v = r.valid_sse.unwrap();
            if let Some(prev) = last {
                assert!(v < prev);
            }
            last = Some(v);
        }
        assert!(format!("{}", fit.tree).starts_with("B0 = 1"));
    }
}
