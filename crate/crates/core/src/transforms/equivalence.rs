use std::fmt;

use crate::affine::BoxDomain;
use crate::error::{check_dim, Result};
use crate::repr::PwlFunction;
use crate::text::{fmt_real, fmt_reals};

/// Default absolute tolerance for equivalence verdicts.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Number of Halton points added to every sweep.
pub const HALTON_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub max_deviation: f64,
    pub argmax: Vec<f64>,
    pub samples: usize,
    pub tolerance: f64,
    pub equivalent: bool,
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(f, "max_deviation: {}", fmt_real(self.max_deviation))?;
        writeln!(f, "argmax: {}", fmt_reals(&self.argmax))?;
        writeln!(f, "tolerance: {}", fmt_real(self.tolerance))?;
        writeln!(f, "equivalent: {}", self.equivalent)
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    out
}

/// First `count` points of the Halton sequence mapped into `b`.
pub fn halton(b: &BoxDomain, count: usize) -> Vec<Vec<f64>> {
    (1..=count as u64)
        .map(|i| {
            (0..b.dim())
                .map(|d| {
                    let u = radical_inverse(i, PRIMES[d % PRIMES.len()]);
                    b.lower[d] + u * (b.upper[d] - b.lower[d])
                })
                .collect()
        })
        .collect()
}

/// Compares two functions on a `per_dim` grid plus a Halton sweep. The
/// first point attaining the maximum deviation is the witness.
pub fn check_equivalence<A: PwlFunction + ?Sized, B: PwlFunction + ?Sized>(
    a: &A,
    b: &B,
    domain: &BoxDomain,
    per_dim: usize,
    tolerance: f64,
) -> Result<EquivalenceReport> {
    check_dim(a.dim(), b.dim())?;
    check_dim(a.dim(), domain.dim())?;
    let mut max_deviation = 0.0;
    let mut argmax = domain.lower.clone();
    let mut samples = 0;
    for x in domain.grid(per_dim).into_iter().chain(halton(domain, HALTON_SAMPLES)) {
        let dev = (a.eval(&x)? - b.eval(&x)?).abs();
        if dev > max_deviation || dev.is_nan() {
            max_deviation = dev;
            argmax = x;
        }
        samples += 1;
    }
    Ok(EquivalenceReport {
        max_deviation,
        argmax,
        samples,
        tolerance,
        equivalent: max_deviation <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::transforms::hh_from_cplr;

    #[test]
    fn nested_and_ghh_agree() {
        let r = check_equivalence(
            &catalog::ridge_nested(),
            &catalog::ridge_ghh(),
            &BoxDomain::cube(2, -2.0, 2.0),
            101,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert!(r.equivalent, "{r}");
        assert_eq!(r.samples, 101 * 101 + HALTON_SAMPLES);
    }

    #[test]
    fn cplr_against_its_hinge_form_and_itself() {
        let c = catalog::three_piece_cplr();
        let b = BoxDomain::cube(1, -3.0, 3.0);
        let r = check_equivalence(&c, &hh_from_cplr(&c), &b, 601, DEFAULT_TOLERANCE).unwrap();
        assert!(r.equivalent);
        let r = check_equivalence(&c, &c, &b, 601, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn halton_stays_in_box() {
        let b = BoxDomain::cube(3, -1.0, 2.0);
        assert!(halton(&b, 200).iter().all(|x| b.contains(x)));
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn report_flags_deviation() {
        let c = catalog::three_piece_cplr();
        let shifted = crate::repr::CplrModel::new(vec![1.0], 0.5, c.terms.clone()).unwrap();
        let r = check_equivalence(&c, &shifted, &BoxDomain::cube(1, -1.0, 1.0), 11, 1e-9).unwrap();
        assert!(!r.equivalent);
        assert_eq!(r.max_deviation, 0.5);
    }
}
