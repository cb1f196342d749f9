//! Small linear-programming probes over polyhedra given by halfspaces.
//!
//! These back the region non-emptiness, facet detection and activation
//! pattern feasibility checks. Problems are tiny (tens of variables), so a
//! dense simplex solve per probe is fine.

use minilp::{ComparisonOp, Error as LpError, OptimizationDirection, Problem, Solution, Variable};

use crate::affine::{norm, AffineFunction, Halfspace, FEAS_TOL};
use crate::error::{PwlError, Result};

/// Upper cap on the inscribed-ball radius so unbounded regions stay bounded.
const SLACK_CAP: f64 = 1.0;

const UNBOUNDED: f64 = 1e100;

/// Free variables as differences of non-negative pairs; minilp mishandles
/// variables with two infinite bounds on some degenerate problems.
struct FreeVars(Vec<(Variable, Variable)>);

impl FreeVars {
    fn new(problem: &mut Problem, objective: &[f64]) -> Self {
        Self(
            objective
                .iter()
                .map(|c| {
                    (
                        problem.add_var(*c, (0.0, f64::INFINITY)),
                        problem.add_var(-*c, (0.0, f64::INFINITY)),
                    )
                })
                .collect(),
        )
    }

    fn expr(&self, coefs: &[f64]) -> Vec<(Variable, f64)> {
        self.0
            .iter()
            .zip(coefs)
            .flat_map(|((p, q), c)| [(*p, *c), (*q, -*c)])
            .collect()
    }

    fn value(&self, sol: &Solution) -> Vec<f64> {
        self.0.iter().map(|(p, q)| sol[*p] - sol[*q]).collect()
    }
}

/// Largest slack `t` such that every halfspace holds with margin `t` (in
/// unit-normal distance) and every equality `a·x + c = 0` holds, together
/// with the point attaining it. `Ok(None)` when the system is infeasible.
///
/// Rows parallel to an equality must not be passed as halfspaces; they would
/// pin the slack to zero.
pub fn chebyshev_center(
    dim: usize,
    halfspaces: &[Halfspace],
    equalities: &[AffineFunction],
) -> Result<Option<(Vec<f64>, f64)>> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let xs = FreeVars::new(&mut problem, &vec![0.0; dim]);
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, SLACK_CAP));
    for h in halfspaces {
        let (n, c) = h.normalized();
        // n·x + c - t >= 0
        let mut expr = xs.expr(&n);
        expr.push((t, -1.0));
        problem.add_constraint(expr.as_slice(), ComparisonOp::Ge, -c);
    }
    for e in equalities {
        let scale = norm(&e.jacobian).max(f64::MIN_POSITIVE);
        let unit: Vec<f64> = e.jacobian.iter().map(|v| v / scale).collect();
        let expr = xs.expr(&unit);
        problem.add_constraint(expr.as_slice(), ComparisonOp::Eq, -e.bias / scale);
    }
    match problem.solve() {
        Ok(sol) => {
            let slack = *sol.var_value(t);
            if slack < -FEAS_TOL {
                return Ok(None);
            }
            let point = xs.value(&sol);
            Ok(Some((point, slack)))
        }
        Err(LpError::Infeasible) => Ok(None),
        // The slack is capped, so unboundedness cannot occur with dim > 0;
        // with no halfspaces at all the whole space is feasible.
        Err(LpError::Unbounded) => Ok(Some((vec![0.0; dim], SLACK_CAP))),
    }
}

/// Maximum of `objective` over the polyhedron, `None` if unbounded,
/// error if infeasible.
pub fn maximize(dim: usize, halfspaces: &[Halfspace], objective: &AffineFunction) -> Result<Option<f64>> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let xs = FreeVars::new(&mut problem, &objective.jacobian[..dim]);
    for h in halfspaces {
        let (n, c) = h.normalized();
        let expr = xs.expr(&n);
        problem.add_constraint(expr.as_slice(), ComparisonOp::Ge, -c);
    }
    match problem.solve() {
        // minilp can report an unbounded ray as an infinite optimum.
        Ok(sol) if !sol.objective().is_finite() || sol.objective().abs() > UNBOUNDED => Ok(None),
        Ok(sol) => Ok(Some(sol.objective() + objective.bias)),
        Err(LpError::Unbounded) => Ok(None),
        Err(LpError::Infeasible) => Err(PwlError::Lp("maximize over an empty polyhedron".into())),
    }
}

/// Axis-aligned bounding box of a polyhedron, `None` if unbounded.
pub fn bounding_box(dim: usize, halfspaces: &[Halfspace]) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let mut lower = Vec::with_capacity(dim);
    let mut upper = Vec::with_capacity(dim);
    for axis in 0..dim {
        let e = AffineFunction::coordinate(dim, axis);
        match (maximize(dim, halfspaces, &e)?, maximize(dim, halfspaces, &e.scale(-1.0))?) {
            (Some(hi), Some(neg_lo)) => {
                upper.push(hi);
                lower.push(-neg_lo);
            }
            _ => return Ok(None),
        }
    }
    Ok(Some((lower, upper)))
}
