//! Affine and polyhedral primitives shared by every representation.

use crate::error::{check_dim, PwlError, Result};

/// Feasibility tolerance used for membership tests and LP probes.
pub const FEAS_TOL: f64 = 1e-9;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `jacobian · x + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunction {
    pub jacobian: Vec<f64>,
    pub bias: f64,
}

impl AffineFunction {
    pub fn new(jacobian: Vec<f64>, bias: f64) -> Self {
        Self { jacobian, bias }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0.0; dim], 0.0)
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(vec![0.0; dim], value)
    }

    /// The coordinate projection `x_axis`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut jacobian = vec![0.0; dim];
        jacobian[axis] = 1.0;
        Self::new(jacobian, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.jacobian.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        dot(&self.jacobian, x) + self.bias
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.jacobian
                .iter()
                .zip(&other.jacobian)
                .map(|(a, b)| a + b)
                .collect(),
            self.bias + other.bias,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.jacobian.iter().map(|a| a * c).collect(), self.bias * c)
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.jacobian.iter().all(|v| v.is_finite())
    }

    /// Bit-level key, used for exact de-duplication.
    pub(crate) fn bits(&self) -> Vec<u64> {
        self.jacobian
            .iter()
            .chain(std::iter::once(&self.bias))
            .map(|v| if *v == 0.0 { 0 } else { v.to_bits() })
            .collect()
    }
}

/// `normal · x + offset >= 0` when closed, `> 0` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub closed: bool,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64, closed: bool) -> Result<Self> {
        if normal.iter().all(|v| *v == 0.0) {
            return Err(PwlError::InvalidModel(
                "halfspace normal must not be the zero vector".into(),
            ));
        }
        if !offset.is_finite() || normal.iter().any(|v| !v.is_finite()) {
            return Err(PwlError::InvalidModel("halfspace has non-finite entries".into()));
        }
        Ok(Self {
            normal,
            offset,
            closed,
        })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) + self.offset
    }

    /// Signed distance of `x` to the boundary hyperplane.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.value(x) / norm(&self.normal)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let d = self.signed_distance(x);
        if self.closed {
            d >= -FEAS_TOL
        } else {
            d > FEAS_TOL
        }
    }

    /// The complementary halfspace sharing the same boundary.
    pub fn flipped(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|v| -v).collect(),
            offset: -self.offset,
            closed: !self.closed,
        }
    }

    /// Unit-normal form `(normal, offset) / |normal|`.
    pub fn normalized(&self) -> (Vec<f64>, f64) {
        let n = norm(&self.normal);
        (self.normal.iter().map(|v| v / n).collect(), self.offset / n)
    }

    pub fn as_affine(&self) -> AffineFunction {
        AffineFunction::new(self.normal.clone(), self.offset)
    }
}

/// A convex polyhedral region given as an intersection of halfspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub halfspaces: Vec<Halfspace>,
    pub label: usize,
}

impl Region {
    pub fn new(halfspaces: Vec<Halfspace>, label: usize) -> Self {
        Self { halfspaces, label }
    }

    /// Builds a region and certifies it is non-empty by locating a feasible
    /// point (within `extra`, typically a bounding domain).
    pub fn validated(halfspaces: Vec<Halfspace>, label: usize, extra: &[Halfspace]) -> Result<Self> {
        let region = Self::new(halfspaces, label);
        let mut all = region.halfspaces.clone();
        all.extend_from_slice(extra);
        let dim = all.first().map(Halfspace::dim).unwrap_or(0);
        if crate::lp::chebyshev_center(dim, &all, &[])?.is_none() {
            return Err(PwlError::InvalidModel(format!("region {label} is empty")));
        }
        Ok(region)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x))
    }
}

/// Axis-aligned box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(PwlError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(PwlError::InvalidConfig("box bounds must be finite with lower <= upper".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
        }
    }

    /// Parses `a:b[,a:b...]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for part in text.split(',') {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| PwlError::InvalidConfig(format!("bad box component `{part}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| PwlError::InvalidConfig(format!("bad number `{s}` in box")))
            };
            lower.push(parse(a)?);
            upper.push(parse(b)?);
        }
        Self::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= l - FEAS_TOL && *v <= u + FEAS_TOL)
    }

    pub fn halfspaces(&self) -> Vec<Halfspace> {
        let n = self.dim();
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            out.push(Halfspace {
                normal: e.clone(),
                offset: -self.lower[i],
                closed: true,
            });
            e[i] = -1.0;
            out.push(Halfspace {
                normal: e,
                offset: self.upper[i],
                closed: true,
            });
        }
        out
    }

    /// Points of a regular grid with `per_dim` points along each axis, in
    /// lexicographic index order (last axis fastest).
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| linspace(self.lower[i], self.upper[i], per_dim))
            .collect();
        cartesian(&axes)
    }
}

/// `count` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => {
            // One rounding per point: integer endpoints give correctly
            // rounded grid values, so breakpoints like 1.5 land exactly.
            let n = (count - 1) as f64;
            (0..count)
                .map(|k| {
                    let k = k as f64;
                    ((n - k) * a + k * b) / n
                })
                .collect()
        }
    }
}

/// Cartesian product of per-axis values, last axis varying fastest.
pub fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: usize = axes.iter().map(Vec::len).product();
    if axes.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    if total == 0 {
        return out;
    }
    loop {
        out.push(idx.iter().zip(axes).map(|(&i, a)| a[i]).collect());
        let mut k = axes.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_affine_examples() {
        let f = AffineFunction::new(vec![1.0, -1.0, 1.0], 1.0);
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(AffineFunction::zero(4).eval(&[3.0, -2.0, 1.0, 9.0]).unwrap(), 0.0);
        let l2 = AffineFunction::new(vec![2.0], -1.0);
        assert!((l2.eval(&[1.8]).unwrap() - 2.6).abs() < 1e-12);
    }

    #[test]
    fn eval_affine_dimension_mismatch_names_both() {
        let f = AffineFunction::new(vec![1.0, 2.0], 0.0);
        assert_eq!(
            f.eval(&[1.0]),
            Err(PwlError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(Halfspace::new(vec![0.0, 0.0], 1.0, true).is_err());
    }

    #[test]
    fn open_and_closed_membership() {
        let h = Halfspace::new(vec![1.0], 0.0, true).unwrap();
        assert!(h.contains(&[0.0]));
        assert!(!h.flipped().contains(&[0.0]));
        assert!(h.flipped().contains(&[-0.5]));
    }

    #[test]
    fn validated_region_rejects_empty() {
        let a = Halfspace::new(vec![1.0], -1.0, true).unwrap(); // x >= 1
        let b = Halfspace::new(vec![-1.0], 0.0, true).unwrap(); // x <= 0
        assert!(Region::validated(vec![a.clone(), b], 0, &[]).is_err());
        assert!(Region::validated(vec![a], 0, &[]).is_ok());
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let b = BoxDomain::cube(2, 0.0, 1.0);
        let g = b.grid(2);
        assert_eq!(g, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(BoxDomain::parse("0:1,-2:2").unwrap().upper, vec![1.0, 2.0]);
    }
}
