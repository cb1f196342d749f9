use crate::error::{check_dim, PwlError, Result};
use crate::repr::PwlFunction;
use crate::text::{fmt_indices, fmt_real, fmt_reals, header, Reader};

/// Axis-aligned hinge `max{0, δ(x_v − β)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AhhFactor {
    pub delta: f64,
    pub var: usize,
    pub knot: f64,
}

impl AhhFactor {
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.delta * (x[self.var] - self.knot)).max(0.0)
    }
}

/// `w · min_j max{0, δ_j(x_{v_j} − β_j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AhhBasis {
    pub w: f64,
    pub factors: Vec<AhhFactor>,
}

impl AhhBasis {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.factors
            .iter()
            .map(|f| f.eval(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Adaptive hinging hyperplanes with an explicit constant basis `B₀ = 1`
/// weighted by `intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct AhhModel {
    dim: usize,
    pub intercept: f64,
    pub bases: Vec<AhhBasis>,
}

impl AhhModel {
    pub fn new(dim: usize, intercept: f64, bases: Vec<AhhBasis>) -> Result<Self> {
        for (m, b) in bases.iter().enumerate() {
            if b.factors.is_empty() {
                return Err(PwlError::InvalidModel(format!("AHH basis {} has no factors", m + 1)));
            }
            for f in &b.factors {
                if f.var >= dim {
                    return Err(PwlError::InvalidModel(format!(
                        "variable index {} out of range 1..={dim}",
                        f.var + 1
                    )));
                }
                if f.delta != 1.0 && f.delta != -1.0 {
                    return Err(PwlError::InvalidModel(format!("delta must be ±1, got {}", f.delta)));
                }
            }
        }
        Ok(Self { dim, intercept, bases })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-ahh v1 dim={} bases={}\n", self.dim, self.bases.len());
        out.push_str(&format!("constant w={}\n", fmt_real(self.intercept)));
        for b in &self.bases {
            let deltas: Vec<f64> = b.factors.iter().map(|f| f.delta).collect();
            let vars: Vec<usize> = b.factors.iter().map(|f| f.var).collect();
            let knots: Vec<f64> = b.factors.iter().map(|f| f.knot).collect();
            out.push_str(&format!(
                "basis w={} delta={} vars={} knots={}\n",
                fmt_real(b.w),
                fmt_reals(&deltas),
                fmt_indices(&vars),
                fmt_reals(&knots)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "ahh")?;
        let dim = h.count("dim")?;
        let count = h.count("bases")?;
        let line = r.next_line("`constant` line")?;
        let f = line.fields();
        if f.word(0) != Some("constant") {
            return Err(line.error(1, "expected `constant w=...`"));
        }
        let intercept = f.real("w")?;
        let mut bases = Vec::with_capacity(count);
        for _ in 0..count {
            let line = r.next_line("`basis` line")?;
            let f = line.fields();
            if f.word(0) != Some("basis") {
                return Err(line.error(1, "expected `basis w=... delta=... vars=... knots=...`"));
            }
            let deltas = f.reals("delta")?;
            let vars = f.indices("vars")?;
            let knots = f.reals("knots")?;
            if deltas.len() != vars.len() || vars.len() != knots.len() {
                return Err(line.error(1, "delta, vars and knots must have equal length"));
            }
            let factors = deltas
                .into_iter()
                .zip(vars)
                .zip(knots)
                .map(|((delta, var), knot)| AhhFactor { delta, var, knot })
                .collect();
            bases.push(AhhBasis { w: f.real("w")?, factors });
        }
        r.finish()?;
        Self::new(dim, intercept, bases).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for AhhModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.intercept + self.bases.iter().map(|b| b.w * b.value(x)).sum::<f64>())
    }

    fn lipschitz_bound(&self) -> f64 {
        self.bases.iter().map(|b| b.w.abs()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn interaction_basis() {
        let b5 = catalog::ahh_b5();
        assert!((b5.value(&[0.2, 0.5]) - 0.2).abs() < 1e-12);
        assert_eq!(b5.value(&[0.8, 0.2]), 0.0);
    }

    #[test]
    fn constant_basis_everywhere_one() {
        let m = AhhModel::new(2, 1.0, vec![]).unwrap();
        assert_eq!(m.eval(&[3.0, -7.0]).unwrap(), 1.0);
    }

    #[test]
    fn variable_out_of_range_rejected() {
        let b = AhhBasis {
            w: 1.0,
            factors: vec![AhhFactor { delta: 1.0, var: 2, knot: 0.0 }],
        };
        assert!(matches!(AhhModel::new(2, 0.0, vec![b]), Err(PwlError::InvalidModel(_))));
    }

    #[test]
    fn repeated_variable_is_allowed() {
        let b = AhhBasis {
            w: 1.0,
            factors: vec![
                AhhFactor { delta: 1.0, var: 0, knot: 0.2 },
                AhhFactor { delta: 1.0, var: 0, knot: 0.5 },
            ],
        };
        let m = AhhModel::new(1, 0.0, vec![b]).unwrap();
        assert!((m.eval(&[0.9]).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let m = AhhModel::new(2, 0.5, vec![catalog::ahh_b5()]).unwrap();
        assert_eq!(AhhModel::from_text(&m.to_text()).unwrap(), m);
    }
}
