use std::collections::HashSet;

use crate::affine::{norm, AffineFunction};
use crate::error::{check_dim, PwlError, Result};
use crate::repr::{GhhModel, GhhTerm, PwlFunction};
use crate::text::{expect_dim, fmt_real, fmt_reals, header, Reader};

/// Largest affine set either side of a DC form may hold.
pub const DC_CAP: usize = 4096;

/// `max_{p ∈ plus} p(x) − max_{q ∈ minus} q(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcForm {
    dim: usize,
    plus: Vec<AffineFunction>,
    minus: Vec<AffineFunction>,
}

fn max_of(set: &[AffineFunction], x: &[f64]) -> f64 {
    set.iter()
        .map(|a| a.eval_unchecked(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Pairwise sums `{a + b}`, exact duplicates dropped.
fn minkowski(a: &[AffineFunction], b: &[AffineFunction]) -> Result<Vec<AffineFunction>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in a {
        for q in b {
            let s = p.add(q);
            if seen.insert(s.bits()) {
                if out.len() == DC_CAP {
                    return Err(PwlError::CapacityExceeded {
                        size: a.len() * b.len(),
                        cap: DC_CAP,
                    });
                }
                out.push(s);
            }
        }
    }
    Ok(out)
}

fn union(a: Vec<AffineFunction>, b: Vec<AffineFunction>) -> Result<Vec<AffineFunction>> {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let total = a.len() + b.len();
    let out: Vec<_> = a.into_iter().chain(b).filter(|f| seen.insert(f.bits())).collect();
    if out.len() > DC_CAP {
        return Err(PwlError::CapacityExceeded { size: total, cap: DC_CAP });
    }
    Ok(out)
}

impl DcForm {
    pub fn new(plus: Vec<AffineFunction>, minus: Vec<AffineFunction>) -> Result<Self> {
        let dim = plus
            .first()
            .map(AffineFunction::dim)
            .ok_or_else(|| PwlError::InvalidModel("DC form needs a non-empty plus set".into()))?;
        if minus.is_empty() {
            return Err(PwlError::InvalidModel("DC form needs a non-empty minus set".into()));
        }
        for a in plus.iter().chain(&minus) {
            check_dim(dim, a.dim())?;
        }
        if let Some(size) = [plus.len(), minus.len()].into_iter().find(|s| *s > DC_CAP) {
            return Err(PwlError::CapacityExceeded { size, cap: DC_CAP });
        }
        Ok(Self { dim, plus, minus })
    }

    pub fn plus(&self) -> &[AffineFunction] {
        &self.plus
    }

    pub fn minus(&self) -> &[AffineFunction] {
        &self.minus
    }

    /// `f − max{0}`.
    pub fn from_affine(f: AffineFunction) -> Self {
        let dim = f.dim();
        Self {
            dim,
            plus: vec![f],
            minus: vec![AffineFunction::zero(dim)],
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::from_affine(AffineFunction::constant(dim, value))
    }

    /// Convex part only: `max_k a_k − 0`.
    pub fn max_of_affines(affines: Vec<AffineFunction>) -> Result<Self> {
        let dim = affines.first().map(AffineFunction::dim).unwrap_or(0);
        Self::new(affines, vec![AffineFunction::zero(dim)])
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            plus: minkowski(&self.plus, &other.plus)?,
            minus: minkowski(&self.minus, &other.minus)?,
        })
    }

    pub fn negate(&self) -> Self {
        Self {
            dim: self.dim,
            plus: self.minus.clone(),
            minus: self.plus.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let scaled = |set: &[AffineFunction]| set.iter().map(|a| a.scale(c.abs())).collect();
        if c >= 0.0 {
            Self {
                dim: self.dim,
                plus: scaled(&self.plus),
                minus: scaled(&self.minus),
            }
        } else {
            Self {
                dim: self.dim,
                plus: scaled(&self.minus),
                minus: scaled(&self.plus),
            }
        }
    }

    /// `max(f, g) = max(P_f ⊕ Q_g, P_g ⊕ Q_f) − (Q_f ⊕ Q_g)`.
    pub fn max(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let plus = union(
            minkowski(&self.plus, &other.minus)?,
            minkowski(&other.plus, &self.minus)?,
        )?;
        Ok(Self {
            dim: self.dim,
            plus,
            minus: minkowski(&self.minus, &other.minus)?,
        })
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        Ok(self.negate().max(&other.negate())?.negate())
    }

    pub fn abs(&self) -> Result<Self> {
        self.max(&self.negate())
    }

    /// Left fold of `max` over a non-empty list.
    pub fn max_all(items: &[Self]) -> Result<Self> {
        let (first, rest) = items
            .split_first()
            .ok_or_else(|| PwlError::InvalidModel("max over an empty list".into()))?;
        rest.iter().try_fold(first.clone(), |acc, f| acc.max(f))
    }

    pub fn min_all(items: &[Self]) -> Result<Self> {
        let (first, rest) = items
            .split_first()
            .ok_or_else(|| PwlError::InvalidModel("min over an empty list".into()))?;
        rest.iter().try_fold(first.clone(), |acc, f| acc.min(f))
    }

    /// Two-term GHH with weights `+1` and `−1`.
    pub fn to_ghh(&self) -> GhhModel {
        GhhModel::new(
            self.dim,
            vec![
                GhhTerm { w: 1.0, affines: self.plus.clone() },
                GhhTerm { w: -1.0, affines: self.minus.clone() },
            ],
        )
        .expect("DC sets are non-empty and dimension-checked")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "pwl-dc v1 dim={} plus={} minus={}\n",
            self.dim,
            self.plus.len(),
            self.minus.len()
        );
        for (tag, set) in [("plus", &self.plus), ("minus", &self.minus)] {
            for a in set {
                out.push_str(&format!("{tag} J={} b={}\n", fmt_reals(&a.jacobian), fmt_real(a.bias)));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "dc")?;
        let dim = h.count("dim")?;
        let mut sets = [Vec::new(), Vec::new()];
        for (k, tag) in ["plus", "minus"].into_iter().enumerate() {
            for _ in 0..h.count(tag)? {
                let line = r.next_line(&format!("`{tag} J=... b=...` line"))?;
                let f = line.fields();
                if f.word(0) != Some(tag) {
                    return Err(line.error(1, format!("expected `{tag} J=... b=...`")));
                }
                let jac = f.reals("J")?;
                expect_dim(&line, "J", jac.len(), dim)?;
                sets[k].push(AffineFunction::new(jac, f.real("b")?));
            }
        }
        r.finish()?;
        let [plus, minus] = sets;
        Self::new(plus, minus).map_err(|e| head.error(1, e.to_string()))
    }
}

/// Value-preserving GHH export of a DC form.
pub fn ghh_from_dc(f: &DcForm) -> GhhModel {
    f.to_ghh()
}

impl PwlFunction for DcForm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(max_of(&self.plus, x) - max_of(&self.minus, x))
    }

    fn lipschitz_bound(&self) -> f64 {
        let side = |s: &[AffineFunction]| s.iter().map(|a| norm(&a.jacobian)).fold(0.0, f64::max);
        side(&self.plus) + side(&self.minus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> DcForm {
        DcForm::from_affine(AffineFunction::new(vec![1.0], 0.0))
    }

    #[test]
    fn min_with_zero_is_x_minus_relu() {
        let f = x().min(&DcForm::constant(1, 0.0)).unwrap();
        assert_eq!(f.eval(&[-1.0]).unwrap(), -1.0);
        assert_eq!(f.eval(&[2.0]).unwrap(), 0.0);
        assert_eq!(f.plus().len(), 1);
        assert_eq!(f.minus().len(), 2);
    }

    #[test]
    fn relu_exports_to_two_term_ghh() {
        let f = x().max(&DcForm::constant(1, 0.0)).unwrap();
        let g = ghh_from_dc(&f);
        assert_eq!(g.terms.len(), 2);
        assert_eq!(g.terms[0].affines.len(), 2);
        assert_eq!(g.terms[1].affines.len(), 1);
        assert_eq!(g.eval(&[2.0]).unwrap(), 2.0);
        assert_eq!(g.eval(&[-2.0]).unwrap(), 0.0);
    }

    #[test]
    fn negative_scale_swaps_sides() {
        let f = x().max(&DcForm::constant(1, 0.0)).unwrap().scale(-3.0);
        assert_eq!(f.eval(&[2.0]).unwrap(), -6.0);
        assert_eq!(f.eval(&[-2.0]).unwrap(), 0.0);
    }

    #[test]
    fn capacity_is_enforced() {
        let mut f = x();
        let mut err = None;
        for k in 0..20 {
            let hinge = DcForm::from_affine(AffineFunction::new(vec![1.0], -(2f64.powi(k))))
                .abs()
                .unwrap();
            match f.sum(&hinge) {
                Ok(g) => f = g,
                Err(e) => {
                    err = Some(e);
                    break;
                }
            }
        }
        assert!(matches!(err, Some(PwlError::CapacityExceeded { cap: DC_CAP, .. })));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = DcForm::from_affine(AffineFunction::zero(2));
        assert!(matches!(x().sum(&g), Err(PwlError::DimensionMismatch { .. })));
    }

    #[test]
    fn text_round_trip() {
        let f = x().abs().unwrap();
        assert_eq!(DcForm::from_text(&f.to_text()).unwrap(), f);
    }
}
