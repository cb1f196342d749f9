use crate::affine::{norm, AffineFunction};
use crate::error::{check_dim, PwlError, Result};
use crate::repr::PwlFunction;
use crate::text::{expect_dim, fmt_real, fmt_reals, header, Reader};

/// `w · max_k (J_k·x + b_k)` over `k_m + 1` affine functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GhhTerm {
    pub w: f64,
    pub affines: Vec<AffineFunction>,
}

impl GhhTerm {
    pub fn max_value(&self, x: &[f64]) -> f64 {
        self.affines
            .iter()
            .map(|a| a.eval_unchecked(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Generalized hinging hyperplanes: a weighted sum of max-of-affine terms.
#[derive(Debug, Clone, PartialEq)]
pub struct GhhModel {
    dim: usize,
    pub terms: Vec<GhhTerm>,
}

impl GhhModel {
    pub fn new(dim: usize, terms: Vec<GhhTerm>) -> Result<Self> {
        for (m, t) in terms.iter().enumerate() {
            if t.affines.is_empty() {
                return Err(PwlError::InvalidModel(format!("GHH term {} has no affine functions", m + 1)));
            }
            for a in &t.affines {
                check_dim(dim, a.dim())?;
            }
        }
        Ok(Self { dim, terms })
    }

    /// Largest `k_m` over all terms; the model is an n-HH when this is ≤ n.
    pub fn order(&self) -> usize {
        self.terms.iter().map(|t| t.affines.len() - 1).max().unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-ghh v1 dim={} terms={}\n", self.dim, self.terms.len());
        for t in &self.terms {
            out.push_str(&format!("term w={} affines={}\n", fmt_real(t.w), t.affines.len()));
            for a in &t.affines {
                out.push_str(&format!("J={} b={}\n", fmt_reals(&a.jacobian), fmt_real(a.bias)));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "ghh")?;
        let dim = h.count("dim")?;
        let count = h.count("terms")?;
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let line = r.next_line("`term` line")?;
            let f = line.fields();
            if f.word(0) != Some("term") {
                return Err(line.error(1, "expected `term w=... affines=...`"));
            }
            let w = f.real("w")?;
            let k = f.count("affines")?;
            let mut affines = Vec::with_capacity(k);
            for _ in 0..k {
                let line = r.next_line("affine line `J=... b=...`")?;
                let f = line.fields();
                let jac = f.reals("J")?;
                expect_dim(&line, "J", jac.len(), dim)?;
                affines.push(AffineFunction::new(jac, f.real("b")?));
            }
            terms.push(GhhTerm { w, affines });
        }
        r.finish()?;
        Self::new(dim, terms).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for GhhModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.terms.iter().map(|t| t.w * t.max_value(x)).sum())
    }

    fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.w.abs()
                    * t.affines
                        .iter()
                        .map(|a| norm(&a.jacobian))
                        .fold(0.0, f64::max)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn ridge_values() {
        let m = catalog::ridge_ghh();
        assert_eq!(m.order(), 2);
        assert_eq!(m.eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(m.eval(&[1.0, 1.0]).unwrap(), 20.0);
        assert_eq!(m.eval(&[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn empty_term_rejected() {
        let t = GhhTerm { w: 1.0, affines: vec![] };
        assert!(matches!(GhhModel::new(1, vec![t]), Err(PwlError::InvalidModel(_))));
    }

    #[test]
    fn text_round_trip() {
        let m = catalog::ridge_ghh();
        assert_eq!(GhhModel::from_text(&m.to_text()).unwrap(), m);
    }
}
