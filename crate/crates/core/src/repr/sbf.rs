use crate::error::{check_dim, PwlError, Result};
use crate::repr::PwlFunction;
use crate::text::{expect_dim, fmt_real, fmt_reals, header, Reader};

/// Simplex basis `max{0, 1 − Σ_i γ_i |x_i − ζ_i|}` with weight `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbfBasis {
    pub w: f64,
    pub gamma: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl SbfBasis {
    pub fn value(&self, x: &[f64]) -> f64 {
        let spread: f64 = self
            .gamma
            .iter()
            .zip(&self.zeta)
            .zip(x)
            .map(|((g, z), xi)| g * (xi - z).abs())
            .sum();
        (1.0 - spread).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbfModel {
    dim: usize,
    pub bases: Vec<SbfBasis>,
}

impl SbfModel {
    pub fn new(dim: usize, bases: Vec<SbfBasis>) -> Result<Self> {
        for b in &bases {
            check_dim(dim, b.gamma.len())?;
            check_dim(dim, b.zeta.len())?;
            if let Some(g) = b.gamma.iter().find(|g| !(**g >= 0.0)) {
                return Err(PwlError::InvalidModel(format!("SBF gamma must be >= 0, got {g}")));
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-sbf v1 dim={} bases={}\n", self.dim, self.bases.len());
        for b in &self.bases {
            out.push_str(&format!(
                "basis w={} gamma={} zeta={}\n",
                fmt_real(b.w),
                fmt_reals(&b.gamma),
                fmt_reals(&b.zeta)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "sbf")?;
        let dim = h.count("dim")?;
        let count = h.count("bases")?;
        let mut bases = Vec::with_capacity(count);
        for _ in 0..count {
            let line = r.next_line("`basis` line")?;
            let f = line.fields();
            if f.word(0) != Some("basis") {
                return Err(line.error(1, "expected `basis w=... gamma=... zeta=...`"));
            }
            let gamma = f.reals("gamma")?;
            let zeta = f.reals("zeta")?;
            expect_dim(&line, "gamma", gamma.len(), dim)?;
            expect_dim(&line, "zeta", zeta.len(), dim)?;
            bases.push(SbfBasis { w: f.real("w")?, gamma, zeta });
        }
        r.finish()?;
        Self::new(dim, bases).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for SbfModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.bases.iter().map(|b| b.w * b.value(x)).sum())
    }

    fn lipschitz_bound(&self) -> f64 {
        self.bases
            .iter()
            .map(|b| b.w.abs() * b.gamma.iter().map(|g| g * g).sum::<f64>().sqrt())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SbfBasis {
        SbfBasis {
            w: 1.0,
            gamma: vec![1.0, 1.0],
            zeta: vec![0.0, 0.0],
        }
    }

    #[test]
    fn basis_examples() {
        let b = unit();
        assert_eq!(b.value(&[0.0, 0.0]), 1.0);
        assert_eq!(b.value(&[0.5, 0.25]), 0.25);
        assert_eq!(b.value(&[2.0, 0.0]), 0.0);
    }

    #[test]
    fn negative_gamma_rejected() {
        let mut b = unit();
        b.gamma[1] = -0.5;
        assert!(matches!(SbfModel::new(2, vec![b]), Err(PwlError::InvalidModel(_))));
    }

    #[test]
    fn text_round_trip() {
        let m = SbfModel::new(2, vec![unit()]).unwrap();
        assert_eq!(SbfModel::from_text(&m.to_text()).unwrap(), m);
    }
}
