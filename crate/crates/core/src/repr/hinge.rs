use crate::affine::{dot, norm, AffineFunction};
use crate::error::{check_dim, Result};
use crate::repr::PwlFunction;
use crate::text::{expect_dim, fmt_real, fmt_reals, header, Reader};

/// `w · max{α·x + β, 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hinge {
    pub w: f64,
    pub alpha: Vec<f64>,
    pub beta: f64,
}

impl Hinge {
    pub fn basis(&self, x: &[f64]) -> f64 {
        (dot(&self.alpha, x) + self.beta).max(0.0)
    }
}

/// Hinging hyperplanes `α₀·x + β₀ + Σ w_m max{α_m·x + β_m, 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeModel {
    pub alpha0: Vec<f64>,
    pub beta0: f64,
    pub hinges: Vec<Hinge>,
}

impl HingeModel {
    pub fn new(alpha0: Vec<f64>, beta0: f64, hinges: Vec<Hinge>) -> Result<Self> {
        for h in &hinges {
            check_dim(alpha0.len(), h.alpha.len())?;
        }
        Ok(Self { alpha0, beta0, hinges })
    }

    pub fn affine_part(&self) -> AffineFunction {
        AffineFunction::new(self.alpha0.clone(), self.beta0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-hh v1 dim={} hinges={}\n", self.dim(), self.hinges.len());
        out.push_str(&format!("affine J={} b={}\n", fmt_reals(&self.alpha0), fmt_real(self.beta0)));
        for h in &self.hinges {
            out.push_str(&format!(
                "hinge w={} J={} b={}\n",
                fmt_real(h.w),
                fmt_reals(&h.alpha),
                fmt_real(h.beta)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "hh")?;
        let dim = h.count("dim")?;
        let count = h.count("hinges")?;
        let line = r.next_line("`affine` line")?;
        let f = line.fields();
        if f.word(0) != Some("affine") {
            return Err(line.error(1, "expected `affine J=... b=...`"));
        }
        let alpha0 = f.reals("J")?;
        expect_dim(&line, "J", alpha0.len(), dim)?;
        let beta0 = f.real("b")?;
        let mut hinges = Vec::with_capacity(count);
        for _ in 0..count {
            let line = r.next_line("`hinge` line")?;
            let f = line.fields();
            if f.word(0) != Some("hinge") {
                return Err(line.error(1, "expected `hinge w=... J=... b=...`"));
            }
            let alpha = f.reals("J")?;
            expect_dim(&line, "J", alpha.len(), dim)?;
            hinges.push(Hinge {
                w: f.real("w")?,
                alpha,
                beta: f.real("b")?,
            });
        }
        r.finish()?;
        Self::new(alpha0, beta0, hinges).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for HingeModel {
    fn dim(&self) -> usize {
        self.alpha0.len()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let mut acc = dot(&self.alpha0, x) + self.beta0;
        for h in &self.hinges {
            acc += h.w * h.basis(x);
        }
        Ok(acc)
    }

    fn lipschitz_bound(&self) -> f64 {
        norm(&self.alpha0) + self.hinges.iter().map(|h| h.w.abs() * norm(&h.alpha)).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relu() -> HingeModel {
        HingeModel::new(
            vec![0.0],
            0.0,
            vec![Hinge {
                w: 1.0,
                alpha: vec![1.0],
                beta: 0.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn single_hinge_is_relu() {
        assert_eq!(relu().eval(&[-1.0]).unwrap(), 0.0);
        assert_eq!(relu().eval(&[2.0]).unwrap(), 2.0);
    }

    #[test]
    fn text_round_trip() {
        let m = relu();
        assert_eq!(HingeModel::from_text(&m.to_text()).unwrap(), m);
    }
}
