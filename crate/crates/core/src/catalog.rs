//! Small worked-example models used by tests, the acceptance suite and the
//! CLI documentation.

use crate::affine::{AffineFunction, Halfspace, Region};
use crate::conventional::ConventionalPwl;
use crate::repr::{AbsTerm, AhhBasis, AhhFactor, CplrModel, GhhModel, GhhTerm, LatticeModel, NestedCplrModel, NestedNode};

fn hs(normal: &[f64], offset: f64, closed: bool) -> Halfspace {
    Halfspace::new(normal.to_vec(), offset, closed).expect("catalog halfspace")
}

fn aff(jacobian: &[f64], bias: f64) -> AffineFunction {
    AffineFunction::new(jacobian.to_vec(), bias)
}

/// `x1 − x2 + x3 + 1` on `π ≥ 0`, its negation on `π < 0`.
pub fn two_piece_3d() -> ConventionalPwl {
    let regions = vec![
        Region::new(vec![hs(&[1.0, -1.0, 1.0], 1.0, true)], 1),
        Region::new(vec![hs(&[-1.0, 1.0, -1.0], -1.0, false)], 2),
    ];
    let pieces = vec![aff(&[1.0, -1.0, 1.0], 1.0), aff(&[-1.0, 1.0, -1.0], -1.0)];
    ConventionalPwl::new(3, regions, pieces, None).expect("two_piece_3d")
}

/// The three-piece univariate function `x+2 | −x | x−2` with breaks at ±1.
pub fn three_piece_1d() -> ConventionalPwl {
    let regions = vec![
        Region::new(vec![hs(&[-1.0], -1.0, true)], 1),
        Region::new(vec![hs(&[1.0], 1.0, false), hs(&[-1.0], 1.0, true)], 2),
        Region::new(vec![hs(&[1.0], -1.0, false)], 3),
    ];
    let pieces = vec![aff(&[1.0], 2.0), aff(&[-1.0], 0.0), aff(&[1.0], -2.0)];
    ConventionalPwl::new(1, regions, pieces, None).expect("three_piece_1d")
}

/// `x − |x + 1| + |x − 1|`.
pub fn three_piece_cplr() -> CplrModel {
    CplrModel::new(
        vec![1.0],
        0.0,
        vec![
            AbsTerm { eta: -1.0, alpha: vec![1.0], beta: 1.0 },
            AbsTerm { eta: 1.0, alpha: vec![1.0], beta: -1.0 },
        ],
    )
    .expect("three_piece_cplr")
}

/// Closed form of the two-ridge function: `max{0, min{l1, l2}}`.
pub fn ridge_value(x: &[f64]) -> f64 {
    let l1 = 80.0 * x[0] - 50.0 * x[1] - 10.0;
    let l2 = -50.0 * x[0] + 80.0 * x[1] - 10.0;
    l1.min(l2).max(0.0)
}

/// The two-ridge function as four convex regions. The zero piece is split
/// along `x1 = x2` so every region is a polyhedron.
pub fn ridge_conventional() -> ConventionalPwl {
    let upper = hs(&[-1.0, 1.0], 0.0, true);
    let lower = hs(&[1.0, -1.0], 0.0, true);
    let regions = vec![
        Region::new(vec![upper.clone(), hs(&[80.0, -50.0], -10.0, true)], 1),
        Region::new(vec![lower.clone(), hs(&[-50.0, 80.0], -10.0, true)], 2),
        Region::new(vec![upper, hs(&[-80.0, 50.0], 10.0, true)], 3),
        Region::new(vec![lower, hs(&[50.0, -80.0], 10.0, true)], 4),
    ];
    let pieces = vec![
        aff(&[80.0, -50.0], -10.0),
        aff(&[-50.0, 80.0], -10.0),
        AffineFunction::zero(2),
        AffineFunction::zero(2),
    ];
    ConventionalPwl::new(2, regions, pieces, None).expect("ridge_conventional")
}

/// `7.5(x1+x2) − 5 − 32.5|x1−x2| + |32.5|x1−x2| − 7.5(x1+x2) + 5|`.
///
/// The factor 32.5 sits inside the absolute values, so the model rounds
/// exactly like [`ridge_ghh`] and the two agree bit for bit.
pub fn ridge_nested() -> NestedCplrModel {
    let diff = || NestedNode::leaf(aff(&[32.5, -32.5], 0.0));
    let inner = NestedNode {
        affine: aff(&[-7.5, -7.5], 5.0),
        children: vec![(1.0, diff())],
    };
    let root = NestedNode {
        affine: aff(&[7.5, 7.5], -5.0),
        children: vec![(-1.0, diff()), (1.0, inner)],
    };
    NestedCplrModel::new(root).expect("ridge_nested")
}

/// `max{65(x1−x2), 65(x2−x1), 15(x1+x2)−10} − max{65(x1−x2), 65(x2−x1)}`.
pub fn ridge_ghh() -> GhhModel {
    let a = aff(&[65.0, -65.0], 0.0);
    let b = aff(&[-65.0, 65.0], 0.0);
    let c = aff(&[15.0, 15.0], -10.0);
    GhhModel::new(
        2,
        vec![
            GhhTerm { w: 1.0, affines: vec![a.clone(), b.clone(), c] },
            GhhTerm { w: -1.0, affines: vec![a, b] },
        ],
    )
    .expect("ridge_ghh")
}

fn five_piece_affines() -> Vec<AffineFunction> {
    vec![
        aff(&[0.5], 0.5),
        aff(&[2.0], -1.0),
        aff(&[0.0], 2.0),
        aff(&[-2.0], 9.0),
        aff(&[-0.5], 3.0),
    ]
}

fn interval_model(breaks: [f64; 6]) -> ConventionalPwl {
    let regions = (0..5)
        .map(|i| {
            Region::new(
                vec![hs(&[1.0], -breaks[i], true), hs(&[-1.0], breaks[i + 1], true)],
                i + 1,
            )
        })
        .collect();
    let domain = Region::new(vec![hs(&[1.0], 0.0, true), hs(&[-1.0], 5.0, true)], 0);
    ConventionalPwl::new(1, regions, five_piece_affines(), Some(domain)).expect("five_piece")
}

/// Five-piece function on `[0, 5]` with the breakpoints
/// `1, 1.8, 3.2, 4`; discontinuous at 1.8 and 3.2.
pub fn five_piece_broken() -> ConventionalPwl {
    interval_model([0.0, 1.0, 1.8, 3.2, 4.0, 5.0])
}

/// Same pieces with breakpoints at the piece intersections `1, 1.5, 3.5, 4`.
pub fn five_piece() -> ConventionalPwl {
    interval_model([0.0, 1.0, 1.5, 3.5, 4.0, 5.0])
}

/// Max-min form of the five-piece function.
pub fn five_piece_lattice() -> LatticeModel {
    let sets = [
        vec![1, 3, 4, 5],
        vec![2, 3, 4, 5],
        vec![2, 3, 4],
        vec![1, 2, 3, 4],
        vec![1, 2, 3, 5],
    ];
    let rows = sets.iter().map(|s| s.iter().map(|j| j - 1).collect()).collect();
    LatticeModel::new(1, five_piece_affines(), rows).expect("five_piece_lattice")
}

/// `max{0, x2 − 0.3}`.
pub fn ahh_b1() -> AhhBasis {
    AhhBasis {
        w: 1.0,
        factors: vec![AhhFactor { delta: 1.0, var: 1, knot: 0.3 }],
    }
}

/// `max{0, 0.6 − x1}`.
pub fn ahh_b3() -> AhhBasis {
    AhhBasis {
        w: 1.0,
        factors: vec![AhhFactor { delta: -1.0, var: 0, knot: 0.6 }],
    }
}

/// `min{B1, B3}`.
pub fn ahh_b5() -> AhhBasis {
    AhhBasis {
        w: 1.0,
        factors: vec![ahh_b1().factors[0].clone(), ahh_b3().factors[0].clone()],
    }
}
