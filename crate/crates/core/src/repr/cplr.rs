use crate::affine::{dot, norm, AffineFunction};
use crate::error::{check_dim, PwlError, Result};
use crate::repr::PwlFunction;
use crate::text::{expect_dim, fmt_real, fmt_reals, header, Reader};

/// One `η |α·x + β|` term.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsTerm {
    pub eta: f64,
    pub alpha: Vec<f64>,
    pub beta: f64,
}

/// Canonical piecewise-linear representation
/// `α₀·x + β₀ + Σ η_m |α_m·x + β_m|` with `η_m = ±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CplrModel {
    pub alpha0: Vec<f64>,
    pub beta0: f64,
    pub terms: Vec<AbsTerm>,
}

impl CplrModel {
    pub fn new(alpha0: Vec<f64>, beta0: f64, terms: Vec<AbsTerm>) -> Result<Self> {
        let n = alpha0.len();
        for t in &terms {
            check_dim(n, t.alpha.len())?;
            if t.eta != 1.0 && t.eta != -1.0 {
                return Err(PwlError::InvalidModel(format!("eta must be ±1, got {}", t.eta)));
            }
        }
        Ok(Self { alpha0, beta0, terms })
    }

    pub fn affine_part(&self) -> AffineFunction {
        AffineFunction::new(self.alpha0.clone(), self.beta0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-cplr v1 dim={} terms={}\n", self.dim(), self.terms.len());
        out.push_str(&format!("affine J={} b={}\n", fmt_reals(&self.alpha0), fmt_real(self.beta0)));
        for t in &self.terms {
            out.push_str(&format!(
                "abs eta={} J={} b={}\n",
                if t.eta > 0.0 { "1" } else { "-1" },
                fmt_reals(&t.alpha),
                fmt_real(t.beta)
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "cplr")?;
        let dim = h.count("dim")?;
        let count = h.count("terms")?;
        let line = r.next_line("`affine` line")?;
        let f = line.fields();
        if f.word(0) != Some("affine") {
            return Err(line.error(1, "expected `affine J=... b=...`"));
        }
        let alpha0 = f.reals("J")?;
        expect_dim(&line, "J", alpha0.len(), dim)?;
        let beta0 = f.real("b")?;
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let line = r.next_line("`abs` line")?;
            let f = line.fields();
            if f.word(0) != Some("abs") {
                return Err(line.error(1, "expected `abs eta=... J=... b=...`"));
            }
            let alpha = f.reals("J")?;
            expect_dim(&line, "J", alpha.len(), dim)?;
            terms.push(AbsTerm {
                eta: f.sign("eta")?,
                alpha,
                beta: f.real("b")?,
            });
        }
        r.finish()?;
        Self::new(alpha0, beta0, terms).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for CplrModel {
    fn dim(&self) -> usize {
        self.alpha0.len()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let mut acc = dot(&self.alpha0, x) + self.beta0;
        for t in &self.terms {
            acc += t.eta * (dot(&t.alpha, x) + t.beta).abs();
        }
        Ok(acc)
    }

    fn lipschitz_bound(&self) -> f64 {
        norm(&self.alpha0) + self.terms.iter().map(|t| norm(&t.alpha)).sum::<f64>()
    }
}
