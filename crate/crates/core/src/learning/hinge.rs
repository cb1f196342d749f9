use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::affine::{dot, norm};
use crate::error::{PwlError, Result};
use crate::learning::data::{exact_floor, no_progress, Dataset, FitConfig, FitTrace, TraceAction};
use crate::learning::lsq::{least_squares, predict, refit};
use crate::repr::{Hinge, HingeModel};

/// Random re-initializations tried after the residual-sign warm start.
pub const HINGE_RESTARTS: usize = 10;

/// Cap on backfitting sweeps after each accepted hinge.
const MAX_SWEEPS: usize = 20;

/// Augmented plane `p = (J, b)` evaluated at `x`.
fn plane(p: &[f64], x: &[f64]) -> f64 {
    dot(&p[..x.len()], x) + p[x.len()]
}

/// Two planes joined as `max{plus, minus}` (or `min` when `concave`), each
/// stored as `(J, b)` with the bias last.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeFit {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub concave: bool,
    /// `x̃·(plus − minus) > 0` for every sample.
    pub membership: Vec<bool>,
    pub iterations: usize,
    pub converged: bool,
    /// Index of the initialization that produced this fit (0 = warm start).
    pub restart: usize,
    pub sse: f64,
}

impl HingeFit {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let (a, b) = (plane(&self.plus, x), plane(&self.minus, x));
        if self.concave {
            a.min(b)
        } else {
            a.max(b)
        }
    }
}

/// Starting planes for [`find_hinge`].
#[derive(Debug, Clone, PartialEq)]
pub struct HingeInit {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub concave: bool,
}

struct Attempt {
    a: Vec<f64>,
    b: Vec<f64>,
    iterations: usize,
    converged: bool,
    sse: f64,
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    ridge: f64,
    max_iters: usize,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.x[0].len()
    }

    fn fit(&self, idx: &[usize], t: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let m = DMatrix::from_fn(idx.len(), n + 1, |i, j| if j < n { self.x[idx[i]][j] } else { 1.0 });
        let y: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
        least_squares(&m, &y, self.ridge)
    }

    fn sides(&self, a: &[f64], b: &[f64]) -> Vec<bool> {
        self.x.iter().map(|x| plane(a, x) - plane(b, x) > 0.0).collect()
    }

    /// Fits both planes to a split; `None` when a side is too small.
    fn fit_split(&self, side: &[bool], t: &[f64]) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        let plus: Vec<usize> = (0..side.len()).filter(|&i| side[i]).collect();
        let minus: Vec<usize> = (0..side.len()).filter(|&i| !side[i]).collect();
        if plus.len() <= self.dim() || minus.len() <= self.dim() {
            return Ok(None);
        }
        Ok(Some((self.fit(&plus, t)?, self.fit(&minus, t)?)))
    }

    fn sse(&self, a: &[f64], b: &[f64], t: &[f64]) -> f64 {
        self.x
            .iter()
            .zip(t)
            .map(|(x, y)| (plane(a, x).max(plane(b, x)) - y).powi(2))
            .sum()
    }

    /// Maps an attempt on `±y` back to planes for `y`.
    fn finish(&self, att: Attempt, concave: bool, restart: usize) -> HingeFit {
        let (plus, minus) = if concave {
            (att.a.iter().map(|v| -v).collect(), att.b.iter().map(|v| -v).collect())
        } else {
            (att.a, att.b)
        };
        let membership = self.sides(&plus, &minus);
        HingeFit {
            plus,
            minus,
            concave,
            membership,
            iterations: att.iterations,
            converged: att.converged,
            restart,
            sse: att.sse,
        }
    }

    /// Alternates membership and per-side least squares for `max{a, b} ≈ t`.
    fn alternate(&self, t: &[f64], mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Attempt> {
        let mut fitted_on: Option<Vec<bool>> = None;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iters {
            let gap: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
            if norm(&gap) <= 1e-12 * (1.0 + norm(&a) + norm(&b)) {
                converged = true;
                break;
            }
            let side = self.sides(&a, &b);
            if fitted_on.as_ref() == Some(&side) {
                converged = true;
                break;
            }
            match self.fit_split(&side, t)? {
                Some((na, nb)) => (a, b) = (na, nb),
                None => break,
            }
            fitted_on = Some(side);
            iterations += 1;
        }
        let sse = self.sse(&a, &b, t);
        Ok(Attempt { a, b, iterations, converged, sse })
    }
}

/// Hinge-finding: fits `max` or `min` of two planes by alternating the
/// membership split `x̃·(α₊ − α₋) > 0` with least squares on each side.
///
/// Without `init`, both orientations are tried from the residual-sign warm
/// start and [`HINGE_RESTARTS`] seeded random splits; the lowest SSE wins.
pub fn find_hinge(data: &Dataset, init: Option<&HingeInit>, cfg: &FitConfig) -> Result<HingeFit> {
    cfg.validate()?;
    let n = data.dim();
    if data.len() < 2 * (n + 1) {
        return Err(PwlError::InvalidData(format!(
            "hinge finding needs at least {} samples, got {}",
            2 * (n + 1),
            data.len()
        )));
    }
    let problem = Problem {
        x: data.inputs(),
        ridge: cfg.ridge,
        max_iters: cfg.max_iters,
    };
    let y = data.targets();
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();

    if let Some(h) = init {
        if h.plus.len() != n + 1 || h.minus.len() != n + 1 {
            return Err(PwlError::DimensionMismatch { expected: n + 1, found: h.plus.len() });
        }
        let (t, a, b): (&[f64], Vec<f64>, Vec<f64>) = if h.concave {
            (&neg, h.plus.iter().map(|v| -v).collect(), h.minus.iter().map(|v| -v).collect())
        } else {
            (y, h.plus.clone(), h.minus.clone())
        };
        let att = problem.alternate(t, a, b)?;
        return Ok(problem.finish(att, h.concave, 0));
    }

    let mut best: Option<HingeFit> = None;
    for fit in attempts(&problem, data, &neg, cfg.seed)? {
        if best.as_ref().is_none_or(|h| fit.sse < h.sse) {
            best = Some(fit);
        }
    }
    best.ok_or(PwlError::DegenerateSplit { restarts: HINGE_RESTARTS })
}

/// Converged attempts from the warm start and the seeded random splits, in
/// both orientations.
fn attempts(problem: &Problem<'_>, data: &Dataset, neg: &[f64], seed: u64) -> Result<Vec<HingeFit>> {
    let n = data.dim();
    let y = data.targets();
    let all: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for concave in [false, true] {
        let t: &[f64] = if concave { neg } else { y };
        let global = problem.fit(&all, t)?;
        for restart in 0..=HINGE_RESTARTS {
            let side: Vec<bool> = if restart == 0 {
                data.inputs()
                    .iter()
                    .zip(t)
                    .map(|(x, v)| v - plane(&global, x) > 0.0)
                    .collect()
            } else {
                let d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let c = &data.inputs()[rng.random_range(0..data.len())];
                data.inputs()
                    .iter()
                    .map(|x| x.iter().zip(c).zip(&d).map(|((xi, ci), di)| (xi - ci) * di).sum::<f64>() > 0.0)
                    .collect()
            };
            let Some((a, b)) = problem.fit_split(&side, t)? else {
                continue;
            };
            let att = problem.alternate(t, a, b)?;
            out.push(problem.finish(att, concave, restart));
        }
    }
    Ok(out)
}

/// `max{α·x + β, 0}` with `‖α‖ = 1` from the fitted planes, or `None` when
/// the planes share their slope.
fn unit_hinge(h: &HingeFit, n: usize) -> Option<(Vec<f64>, f64)> {
    let u: Vec<f64> = h.plus.iter().zip(&h.minus).map(|(p, q)| p - q).collect();
    unit_plane(&u, n)
}

/// Unit-slope normalization of the augmented plane `u`.
fn unit_plane(u: &[f64], n: usize) -> Option<(Vec<f64>, f64)> {
    let s = norm(&u[..n]);
    (s > 1e-12 * norm(u)).then(|| (u[..n].iter().map(|v| v / s).collect(), u[n] / s))
}

/// Basis candidates from one fitted hinge: its kink `max{α₊ − α₋, 0}` and
/// the zero crossings `max{α₊, 0}`, `max{α₋, 0}` of each plane.
fn hinge_candidates(h: &HingeFit, n: usize) -> Vec<(Vec<f64>, f64)> {
    let kink: Vec<f64> = h.plus.iter().zip(&h.minus).map(|(p, q)| p - q).collect();
    [kink.as_slice(), &h.plus, &h.minus]
        .into_iter()
        .filter_map(|u| unit_plane(u, n))
        .collect()
}

struct HhState {
    n: usize,
    hinges: Vec<(Vec<f64>, f64)>,
    cols: Vec<Vec<f64>>,
    theta: Vec<f64>,
    sse: f64,
}

impl HhState {
    fn column(x: &[Vec<f64>], alpha: &[f64], beta: f64) -> Vec<f64> {
        x.iter().map(|p| (dot(alpha, p) + beta).max(0.0)).collect()
    }

    fn model(&self) -> HingeModel {
        let n = self.n;
        let hinges = self
            .hinges
            .iter()
            .zip(&self.theta[n + 1..])
            .map(|((alpha, beta), w)| Hinge { w: *w, alpha: alpha.clone(), beta: *beta })
            .collect();
        HingeModel::new(self.theta[..n].to_vec(), self.theta[n], hinges).expect("hinge dimensions match")
    }

    /// Partial residual keeping only the affine part and hinge `k`.
    fn partial(&self, y: &[f64], k: usize) -> Vec<f64> {
        let n = self.n;
        let mut r = y.to_vec();
        for (j, col) in self.cols[n + 1..].iter().enumerate() {
            if j != k {
                let w = self.theta[n + 1 + j];
                r.iter_mut().zip(col).for_each(|(ri, c)| *ri -= w * c);
            }
        }
        r
    }
}

/// Incremental hinging-hyperplane fit.
///
/// Starts from the affine least-squares fit; each round runs hinge finding
/// on the residual, appends the hinge and refits every output weight. After
/// each accepted hinge, backfitting sweeps re-run hinge finding on each
/// hinge's partial residual and keep changes that lower the SSE.
pub fn fit_hh(data: &Dataset, cfg: &FitConfig) -> Result<(HingeModel, FitTrace)> {
    cfg.validate()?;
    let (train, valid) = data.split(cfg.validation_split, cfg.seed)?;
    let n = train.dim();
    let x = train.inputs();
    let y = train.targets();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|v| train.column(v)).collect();
    cols.push(vec![1.0; y.len()]);
    let (theta, sse) = refit(&cols, y, cfg.ridge)?;
    let mut st = HhState { n, hinges: Vec::new(), cols, theta, sse };
    let valid_sse = |st: &HhState| {
        valid.as_ref().map(|v| {
            let m = st.model();
            v.inputs()
                .iter()
                .zip(v.targets())
                .map(|(p, t)| (crate::repr::PwlFunction::eval(&m, p).expect("dimension checked") - t).powi(2))
                .sum::<f64>()
        })
    };
    let mut trace = FitTrace::default();
    trace.push(0, st.sse, valid_sse(&st), TraceAction::Init);
    let floor = exact_floor(y);

    for round in 0..cfg.max_terms {
        if st.sse <= floor {
            trace.push(st.hinges.len(), st.sse, valid_sse(&st), TraceAction::Stop);
            break;
        }
        let pred = predict(&st.cols, &st.theta, y.len());
        let resid: Vec<f64> = y.iter().zip(&pred).map(|(t, p)| t - p).collect();
        let sub = Dataset::new(x.to_vec(), resid)?;
        let neg: Vec<f64> = sub.targets().iter().map(|v| -v).collect();
        let problem = Problem { x, ridge: cfg.ridge, max_iters: cfg.max_iters };
        let seed = cfg.seed.wrapping_add(round as u64);
        // Every hinge-finding attempt is scored by the joint refit SSE.
        let mut best: Option<((Vec<f64>, f64), Vec<Vec<f64>>, Vec<f64>, f64)> = None;
        let found = attempts(&problem, &sub, &neg, seed)?;
        for (alpha, beta) in found.iter().flat_map(|h| hinge_candidates(h, n)) {
            let mut cols = st.cols.clone();
            cols.push(HhState::column(x, &alpha, beta));
            let (theta, sse) = refit(&cols, y, cfg.ridge)?;
            if best.as_ref().is_none_or(|b| sse < b.3) {
                best = Some(((alpha, beta), cols, theta, sse));
            }
        }
        let Some(((alpha, beta), cols, theta, sse)) = best else {
            trace.push(st.hinges.len(), st.sse, valid_sse(&st), TraceAction::Skip);
            continue;
        };
        if sse > st.sse {
            trace.push(st.hinges.len() + 1, sse, None, TraceAction::Reject);
            trace.push(st.hinges.len(), st.sse, valid_sse(&st), TraceAction::Stop);
            break;
        }
        let stalled = no_progress(st.sse, sse, cfg.tolerance, floor);
        st.hinges.push((alpha, beta));
        st.cols = cols;
        st.theta = theta;
        st.sse = sse;
        trace.push(st.hinges.len(), st.sse, valid_sse(&st), TraceAction::Grow);
        backfit(&mut st, &train, cfg, &mut trace, &valid_sse)?;
        if stalled {
            trace.push(st.hinges.len(), st.sse, valid_sse(&st), TraceAction::Stop);
            break;
        }
    }
    Ok((st.model(), trace))
}

fn backfit(
    st: &mut HhState,
    train: &Dataset,
    cfg: &FitConfig,
    trace: &mut FitTrace,
    valid_sse: &dyn Fn(&HhState) -> Option<f64>,
) -> Result<()> {
    let n = st.n;
    let x = train.inputs();
    let y = train.targets();
    for _ in 0..MAX_SWEEPS.min(cfg.max_iters) {
        let mut improved = false;
        for k in 0..st.hinges.len() {
            let w = st.theta[n + 1 + k];
            if w == 0.0 {
                continue;
            }
            let base: Vec<f64> = st.theta[..=n].to_vec();
            let (alpha, beta) = &st.hinges[k];
            let mut kinked = base.clone();
            kinked.iter_mut().zip(alpha.iter().chain([beta])).for_each(|(p, u)| *p += w * u);
            let init = if w > 0.0 {
                HingeInit { plus: kinked, minus: base, concave: false }
            } else {
                HingeInit { plus: base, minus: kinked, concave: true }
            };
            let sub = Dataset::new(x.to_vec(), st.partial(y, k))?;
            let Some((na, nb)) = find_hinge(&sub, Some(&init), cfg).ok().and_then(|h| unit_hinge(&h, n)) else {
                continue;
            };
            let mut cols = st.cols.clone();
            cols[n + 1 + k] = HhState::column(x, &na, nb);
            let (theta, sse) = refit(&cols, y, cfg.ridge)?;
            if sse < st.sse && !no_progress(st.sse, sse, cfg.tolerance, 0.0) {
                st.hinges[k] = (na, nb);
                st.cols = cols;
                st.theta = theta;
                st.sse = sse;
                trace.push(st.hinges.len(), st.sse, valid_sse(st), TraceAction::Refit);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(())
}
