use crate::error::{check_dim, PwlError, Result};
use crate::repr::PwlFunction;
use crate::text::{fmt_real, header, Reader};

/// High-level CPLR basis `max{0, min_r (x_{k_r} − j_{k_r}·d)}` on a grid of
/// interval `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HlCplrBasis {
    pub interval: f64,
    /// `(axis, knot index)` pairs; axes are 0-based and distinct.
    pub coords: Vec<(usize, i64)>,
}

impl HlCplrBasis {
    pub fn new(interval: f64, coords: Vec<(usize, i64)>) -> Result<Self> {
        if !(interval > 0.0) || !interval.is_finite() {
            return Err(PwlError::InvalidModel("grid interval d must be > 0".into()));
        }
        if coords.is_empty() {
            return Err(PwlError::InvalidModel("HL-CPLR basis needs at least one axis".into()));
        }
        let mut axes: Vec<_> = coords.iter().map(|c| c.0).collect();
        axes.sort_unstable();
        if axes.windows(2).any(|w| w[0] == w[1]) {
            return Err(PwlError::InvalidModel("duplicate axis index in HL-CPLR basis".into()));
        }
        Ok(Self { interval, coords })
    }

    fn max_axis(&self) -> usize {
        self.coords.iter().map(|c| c.0).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if self.max_axis() >= x.len() {
            return Err(PwlError::DimensionMismatch {
                expected: self.max_axis() + 1,
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.coords
            .iter()
            .map(|&(k, j)| x[k] - j as f64 * self.interval)
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }
}

/// Weighted sum of HL-CPLR bases.
#[derive(Debug, Clone, PartialEq)]
pub struct HlCplrModel {
    dim: usize,
    pub bases: Vec<(f64, HlCplrBasis)>,
}

impl HlCplrModel {
    pub fn new(dim: usize, bases: Vec<(f64, HlCplrBasis)>) -> Result<Self> {
        for (_, b) in &bases {
            if b.max_axis() >= dim {
                return Err(PwlError::InvalidModel(format!(
                    "axis {} out of range for dimension {dim}",
                    b.max_axis() + 1
                )));
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-hlcplr v1 dim={} bases={}\n", self.dim, self.bases.len());
        for (w, b) in &self.bases {
            let axes: Vec<_> = b.coords.iter().map(|c| (c.0 + 1).to_string()).collect();
            let knots: Vec<_> = b.coords.iter().map(|c| c.1.to_string()).collect();
            out.push_str(&format!(
                "basis w={} d={} axes={} knots={}\n",
                fmt_real(*w),
                fmt_real(b.interval),
                axes.join(","),
                knots.join(",")
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "hlcplr")?;
        let dim = h.count("dim")?;
        let count = h.count("bases")?;
        let mut bases = Vec::with_capacity(count);
        for _ in 0..count {
            let line = r.next_line("`basis` line")?;
            let f = line.fields();
            if f.word(0) != Some("basis") {
                return Err(line.error(1, "expected `basis w=... d=... axes=... knots=...`"));
            }
            let axes = f.indices("axes")?;
            let knots: Vec<i64> = f
                .str("knots")?
                .split(',')
                .map(|s| s.parse::<i64>().map_err(|_| line.error(1, format!("bad knot index `{s}`"))))
                .collect::<Result<_>>()?;
            if knots.len() != axes.len() {
                return Err(line.error(1, "axes and knots must have equal length"));
            }
            let basis = HlCplrBasis::new(f.real("d")?, axes.into_iter().zip(knots).collect())
                .map_err(|e| line.error(1, e.to_string()))?;
            bases.push((f.real("w")?, basis));
        }
        r.finish()?;
        Self::new(dim, bases).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for HlCplrModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.bases.iter().map(|(w, b)| w * b.eval_unchecked(x)).sum())
    }

    fn lipschitz_bound(&self) -> f64 {
        self.bases.iter().map(|(w, _)| w.abs()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_examples() {
        let b1 = HlCplrBasis::new(1.0, vec![(0, 0)]).unwrap();
        assert_eq!(b1.eval(&[0.7]).unwrap(), 0.7);
        let b2 = HlCplrBasis::new(1.0, vec![(0, 0), (1, 0)]).unwrap();
        assert_eq!(b2.eval(&[0.3, 0.6]).unwrap(), 0.3);
        assert_eq!(b2.eval(&[-0.1, 0.6]).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_axis_rejected() {
        assert!(HlCplrBasis::new(1.0, vec![(0, 0), (0, 1)]).is_err());
    }

    #[test]
    fn single_axis_is_shifted_relu() {
        let b = HlCplrBasis::new(0.25, vec![(0, 3)]).unwrap();
        for k in -40..=40 {
            let x = k as f64 * 0.05;
            assert_eq!(b.eval(&[x]).unwrap(), (x - 0.75).max(0.0));
        }
    }

    #[test]
    fn text_round_trip() {
        let m = HlCplrModel::new(
            2,
            vec![(1.5, HlCplrBasis::new(0.5, vec![(1, 2), (0, -1)]).unwrap())],
        )
        .unwrap();
        assert_eq!(HlCplrModel::from_text(&m.to_text()).unwrap(), m);
    }
}
