use crate::affine::AffineFunction;
use crate::conventional::ConventionalPwl;
use crate::error::{PwlError, Result};
use crate::repr::{AbsTerm, CplrModel, Hinge, HingeModel, PwlFunction};

/// CPLR form of a conventional model with the consistent-variation property.
///
/// Each boundary hyperplane `n·x + o = 0` with jump coefficient `c` becomes
/// the term `(c/2)|n·x + o|`; the affine part is whatever remains, averaged
/// over the region centers.
pub fn cplr_from_consistent(m: &ConventionalPwl) -> Result<CplrModel> {
    let verdict = m.check_consistent_variation()?;
    if !verdict.representable {
        return Err(PwlError::NotCplrRepresentable {
            certificate: verdict.certificate.unwrap_or_default(),
        });
    }
    let dim = m.dim();
    let kinks: Vec<(AffineFunction, f64)> = verdict
        .boundaries
        .iter()
        .filter_map(|b| {
            let c = b.coefficient?;
            (c != 0.0).then(|| (b.hyperplane.as_affine(), 0.5 * c))
        })
        .collect();

    let mut alpha0 = vec![0.0; dim];
    let mut beta0 = 0.0;
    let d = m.pieces().len() as f64;
    for (i, piece) in m.pieces().iter().enumerate() {
        let (center, _) = m
            .region_center(i)?
            .ok_or_else(|| PwlError::InvalidModel(format!("region {} is empty", m.regions()[i].label)))?;
        let mut residual = piece.clone();
        for (h, w) in &kinks {
            let side = if h.eval_unchecked(&center) >= 0.0 { 1.0 } else { -1.0 };
            residual = residual.sub(&h.scale(w * side));
        }
        alpha0.iter_mut().zip(&residual.jacobian).for_each(|(a, r)| *a += r / d);
        beta0 += residual.bias / d;
    }

    let terms = kinks
        .into_iter()
        .map(|(h, w)| AbsTerm {
            eta: w.signum(),
            alpha: h.jacobian.iter().map(|v| v * w.abs()).collect(),
            beta: h.bias * w.abs(),
        })
        .collect();
    let model = CplrModel::new(alpha0, beta0, terms)?;

    for i in 0..m.pieces().len() {
        if let Some((center, _)) = m.region_center(i)? {
            let want = m.pieces()[i].eval_unchecked(&center);
            let got = model.eval(&center)?;
            if (got - want).abs() > 1e-9 * 1f64.max(want.abs()) {
                return Err(PwlError::Verification(format!(
                    "reconstructed CPLR gives {got}, region {} gives {want}",
                    m.regions()[i].label
                )));
            }
        }
    }
    Ok(model)
}

/// Rewrites `η|u|` as `2η·max{u, 0} − η·u`.
pub fn hh_from_cplr(m: &CplrModel) -> HingeModel {
    let mut alpha0 = m.alpha0.clone();
    let mut beta0 = m.beta0;
    let mut hinges = Vec::with_capacity(m.terms.len());
    for t in &m.terms {
        alpha0.iter_mut().zip(&t.alpha).for_each(|(a, v)| *a -= t.eta * v);
        beta0 -= t.eta * t.beta;
        hinges.push(Hinge {
            w: 2.0 * t.eta,
            alpha: t.alpha.clone(),
            beta: t.beta,
        });
    }
    HingeModel::new(alpha0, beta0, hinges).expect("dimensions carried over from a valid CPLR model")
}

/// Rewrites `w·max{u, 0}` as `(w/2)·u + (|w|/2)·sign(w)|u|`.
pub fn cplr_from_hh(m: &HingeModel) -> CplrModel {
    let mut alpha0 = m.alpha0.clone();
    let mut beta0 = m.beta0;
    let mut terms = Vec::with_capacity(m.hinges.len());
    for h in m.hinges.iter().filter(|h| h.w != 0.0) {
        let half = 0.5 * h.w;
        alpha0.iter_mut().zip(&h.alpha).for_each(|(a, v)| *a += half * v);
        beta0 += half * h.beta;
        terms.push(AbsTerm {
            eta: h.w.signum(),
            alpha: h.alpha.iter().map(|v| v * half.abs()).collect(),
            beta: h.beta * half.abs(),
        });
    }
    CplrModel::new(alpha0, beta0, terms).expect("dimensions carried over from a valid hinge model")
}
