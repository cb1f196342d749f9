use crate::affine::{cartesian, linspace, BoxDomain, Halfspace};
use crate::conventional::ConventionalPwl;
use crate::error::{PwlError, Result};
use crate::lp;
use crate::repr::LatticeModel;

/// Default probe count per dimension inside each region's bounding box.
pub const DEFAULT_PROBES: usize = 33;

/// Probe points of region `i`: a grid over its bounding box filtered to the
/// region, plus its Chebyshev center.
fn region_probes(
    m: &ConventionalPwl,
    i: usize,
    per_dim: usize,
    probe_box: Option<&BoxDomain>,
) -> Result<Vec<Vec<f64>>> {
    let mut hs: Vec<Halfspace> = m.region_constraints(i);
    if let Some(b) = probe_box {
        hs.extend(b.halfspaces());
    }
    let label = m.regions()[i].label;
    let (lower, upper) = lp::bounding_box(m.dim(), &hs)?.ok_or_else(|| {
        PwlError::Unbounded(format!(
            "region {label} is unbounded; supply a probe box or a bounded domain"
        ))
    })?;
    let axes: Vec<Vec<f64>> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| linspace(*l, *u, per_dim))
        .collect();
    let region = &m.regions()[i];
    let inside = |x: &Vec<f64>| {
        region.contains(x)
            && m.domain().is_none_or(|d| d.contains(x))
            && probe_box.is_none_or(|b| b.contains(x))
    };
    let mut probes: Vec<Vec<f64>> = cartesian(&axes).into_iter().filter(inside).collect();
    if let Some((c, _)) = lp::chebyshev_center(m.dim(), &hs, &[])? {
        probes.push(c);
    }
    Ok(probes)
}

fn dominates(a: f64, b: f64) -> bool {
    a >= b - 1e-9 * 1f64.max(a.abs()).max(b.abs())
}

/// Max-min form of a continuous conventional model. Row `i` collects every
/// piece that lies on or above piece `i` at all probe points of region `i`.
pub fn lattice_from_conventional(
    m: &ConventionalPwl,
    per_dim: usize,
    probe_box: Option<&BoxDomain>,
) -> Result<LatticeModel> {
    let report = m.check_continuity(8)?;
    if !report.is_continuous() {
        return Err(PwlError::Discontinuous {
            violations: report.violations.len(),
        });
    }
    let pieces = m.pieces();
    let mut probes = Vec::with_capacity(pieces.len());
    let mut rows = Vec::with_capacity(pieces.len());
    for i in 0..pieces.len() {
        let pts = region_probes(m, i, per_dim.max(2), probe_box)?;
        let row: Vec<usize> = (0..pieces.len())
            .filter(|&j| {
                j == i
                    || pts.iter().all(|x| {
                        dominates(pieces[j].eval_unchecked(x), pieces[i].eval_unchecked(x))
                    })
            })
            .collect();
        rows.push(row);
        probes.push(pts);
    }
    let lattice = LatticeModel::new(m.dim(), pieces.to_vec(), rows)?;

    // Verification pass: the max-min value must reproduce the local piece.
    for (i, pts) in probes.iter().enumerate() {
        for x in pts {
            let want = pieces[i].eval_unchecked(x);
            let got = (0..lattice.rows().len())
                .map(|r| lattice.row_value(r, x))
                .fold(f64::NEG_INFINITY, f64::max);
            if (got - want).abs() > 1e-9 * 1f64.max(want.abs()) {
                return Err(PwlError::Verification(format!(
                    "lattice value {got} differs from piece {} value {want} at {x:?}",
                    m.regions()[i].label
                )));
            }
        }
    }
    Ok(lattice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::{AffineFunction, Region};
    use crate::catalog;
    use crate::repr::PwlFunction;

    #[test]
    fn corrected_five_piece_sets() {
        let l = lattice_from_conventional(&catalog::five_piece(), DEFAULT_PROBES, None).unwrap();
        assert_eq!(
            l.selection_sets(),
            vec![
                vec![1, 3, 4, 5],
                vec![2, 3, 4, 5],
                vec![2, 3, 4],
                vec![1, 2, 3, 4],
                vec![1, 2, 3, 5]
            ]
        );
    }

    #[test]
    fn single_piece_is_its_own_row() {
        let m = ConventionalPwl::affine(AffineFunction::new(vec![2.0], 1.0), None);
        let b = BoxDomain::cube(1, -1.0, 1.0);
        let l = lattice_from_conventional(&m, 9, Some(&b)).unwrap();
        assert_eq!(l.selection_sets(), vec![vec![1]]);
        assert_eq!(l.eval(&[0.5]).unwrap(), 2.0);
    }

    #[test]
    fn convex_max_has_singleton_rows() {
        let hs = |n: f64, c: f64| Halfspace::new(vec![n], c, true).unwrap();
        let m = ConventionalPwl::new(
            1,
            vec![Region::new(vec![hs(1.0, 0.0)], 1), Region::new(vec![hs(-1.0, 0.0)], 2)],
            vec![AffineFunction::new(vec![1.0], 0.0), AffineFunction::new(vec![-1.0], 0.0)],
            Some(Region::new(vec![hs(1.0, 1.0), hs(-1.0, 1.0)], 0)),
        )
        .unwrap();
        let l = lattice_from_conventional(&m, DEFAULT_PROBES, None).unwrap();
        assert_eq!(l.selection_sets(), vec![vec![1], vec![2]]);
    }

    #[test]
    fn unbounded_without_box_rejected() {
        let m = catalog::two_piece_3d();
        assert!(matches!(
            lattice_from_conventional(&m, 5, None),
            Err(PwlError::Unbounded(_))
        ));
    }

    #[test]
    fn discontinuous_rejected() {
        assert!(matches!(
            lattice_from_conventional(&catalog::five_piece_broken(), DEFAULT_PROBES, None),
            Err(PwlError::Discontinuous { .. })
        ));
    }
}
