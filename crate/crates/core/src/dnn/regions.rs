use std::collections::HashMap;

use crate::affine::{AffineFunction, BoxDomain, Halfspace};
use crate::dnn::{Activation, DenseLayer, PwlNetwork};
use crate::error::{check_dim, PwlError, Result};
use crate::lp;

/// Hidden units allowed for exact pattern enumeration.
pub const REGION_BUDGET: usize = 20;

/// Smallest inscribed-ball radius for a pattern region to count.
const MIN_RADIUS: f64 = 1e-9;

/// Discrete state of every hidden unit: the linear segment of its
/// activation (kinks at or below the pre-activation), or the maxout argmax
/// (lowest index on ties).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivationPattern {
    pub layers: Vec<Vec<usize>>,
}

fn unit_state(layer: &DenseLayer, u: usize, pre: &[f64]) -> usize {
    match layer.activation {
        Activation::Maxout { k } => {
            let g = &pre[u * k..(u + 1) * k];
            (0..k).fold(0, |b, j| if g[j] > g[b] { j } else { b })
        }
        act => act.kinks(layer.unit_params(u)).partition_point(|t| *t <= pre[u]),
    }
}

pub fn activation_pattern(net: &PwlNetwork, x: &[f64]) -> Result<ActivationPattern> {
    let fw = net.forward(x)?;
    let layers = net
        .hidden
        .iter()
        .zip(&fw.pre)
        .map(|(l, z)| (0..l.units).map(|u| unit_state(l, u, z)).collect())
        .collect();
    Ok(ActivationPattern { layers })
}

/// `σ(z) = s·z + c` on segment `state` of a scalar activation.
fn segment_affine(act: Activation, p: &[f64], state: usize) -> (f64, f64) {
    let kinks = act.kinks(p);
    let r = match (state, kinks.len()) {
        (_, 0) => 0.0,
        (0, _) => kinks[0] - 1.0,
        (s, len) if s >= len => kinks[len - 1] + 1.0,
        (s, _) => 0.5 * (kinks[s - 1] + kinks[s]),
    };
    let s = act.slope(p, r);
    (s, act.value(p, r) - s * r)
}

/// Affine maps of a layer's pre-activations given affine maps of its inputs.
fn pre_maps(layer: &DenseLayer, inputs: &[AffineFunction]) -> Vec<AffineFunction> {
    let n = inputs[0].dim();
    (0..layer.pre_count())
        .map(|i| {
            let mut jac = vec![0.0; n];
            let mut bias = layer.bias[i];
            for (w, a) in layer.row(i).iter().zip(inputs) {
                jac.iter_mut().zip(&a.jacobian).for_each(|(j, v)| *j += w * v);
                bias += w * a.bias;
            }
            AffineFunction::new(jac, bias)
        })
        .collect()
}

fn unit_map(layer: &DenseLayer, u: usize, state: usize, pre: &[AffineFunction]) -> AffineFunction {
    match layer.activation {
        Activation::Maxout { k } => pre[u * k + state].clone(),
        act => {
            let (s, c) = segment_affine(act, layer.unit_params(u), state);
            let z = &pre[u];
            AffineFunction::new(z.jacobian.iter().map(|v| s * v).collect(), s * z.bias + c)
        }
    }
}

/// The affine input-output map the network follows wherever `pattern` holds.
pub fn local_map(net: &PwlNetwork, pattern: &ActivationPattern) -> Result<AffineFunction> {
    check_dim(net.hidden.len(), pattern.layers.len())?;
    let n = net.input_dim();
    let mut maps: Vec<AffineFunction> = (0..n).map(|i| AffineFunction::coordinate(n, i)).collect();
    for (layer, states) in net.hidden.iter().zip(&pattern.layers) {
        check_dim(layer.units, states.len())?;
        let pre = pre_maps(layer, &maps);
        maps = states.iter().enumerate().map(|(u, s)| unit_map(layer, u, *s, &pre)).collect();
    }
    Ok(pre_maps(&net.output, &maps).remove(0))
}

/// Exact number of regions `Σ_{j≤n} C(m, j)` cut by `m` generic hyperplanes
/// in dimension `n`; saturates at `u128::MAX`.
pub fn zaslavsky_bound(m: usize, n: usize) -> u128 {
    let mut total: u128 = 1;
    let mut c: u128 = 1;
    for j in 1..=n.min(m) {
        c = match c.checked_mul((m - j + 1) as u128) {
            Some(v) => v / j as u128,
            None => return u128::MAX,
        };
        total = total.saturating_add(c);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionMethod {
    /// Depth-first walk over activation patterns with LP feasibility.
    Enumerate,
    /// Distinct local maps over a `per_dim`-per-axis grid.
    Grid { per_dim: usize },
}

/// One linear region: an interior point, its pattern and its affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCert {
    pub point: Vec<f64>,
    pub pattern: ActivationPattern,
    pub map: AffineFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCount {
    pub count: usize,
    pub regions: Vec<RegionCert>,
    /// Zaslavsky bound for single-hidden-layer networks with scalar
    /// activations.
    pub bound: Option<u128>,
}

fn arrangement_bound(net: &PwlNetwork) -> Option<u128> {
    match net.hidden.as_slice() {
        [l] if !matches!(l.activation, Activation::Maxout { .. }) => {
            let m: usize = (0..l.units)
                .map(|u| {
                    let mut k = l.activation.kinks(l.unit_params(u));
                    k.dedup();
                    k.len()
                })
                .sum();
            Some(zaslavsky_bound(m, net.input_dim()))
        }
        _ => None,
    }
}

pub fn count_regions(net: &PwlNetwork, domain: &BoxDomain, method: RegionMethod) -> Result<RegionCount> {
    check_dim(net.input_dim(), domain.dim())?;
    let regions = match method {
        RegionMethod::Grid { per_dim } => grid_regions(net, domain, per_dim)?,
        RegionMethod::Enumerate => {
            let units = net.hidden_units();
            if units > REGION_BUDGET {
                return Err(PwlError::BudgetExceeded { requested: units, limit: REGION_BUDGET });
            }
            let mut walk = Walk { net, box_hs: domain.halfspaces(), out: Vec::new() };
            let n = net.input_dim();
            let inputs: Vec<AffineFunction> = (0..n).map(|i| AffineFunction::coordinate(n, i)).collect();
            if net.hidden.is_empty() {
                walk.emit(&inputs, &[], &[])?;
            } else {
                let pre = pre_maps(&net.hidden[0], &inputs);
                walk.visit(0, 0, &pre, &mut Vec::new(), &mut Vec::new(), &mut vec![Vec::new()])?;
            }
            walk.out
        }
    };
    Ok(RegionCount { count: regions.len(), regions, bound: arrangement_bound(net) })
}

fn grid_regions(net: &PwlNetwork, domain: &BoxDomain, per_dim: usize) -> Result<Vec<RegionCert>> {
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
    let mut out = Vec::new();
    for x in domain.grid(per_dim.max(2)) {
        let pattern = activation_pattern(net, &x)?;
        if on_boundary(net, &pattern, &net.forward(&x)?.pre) {
            continue;
        }
        let map = local_map(net, &pattern)?;
        if seen.insert(map.bits(), ()).is_none() {
            out.push(RegionCert { point: x, pattern, map });
        }
    }
    Ok(out)
}

/// Whether `x` lies exactly on a non-degenerate kink or maxout tie of some
/// unit, i.e. on a boundary between full-dimensional regions.
fn on_boundary(net: &PwlNetwork, pattern: &ActivationPattern, pre: &[Vec<f64>]) -> bool {
    let n = net.input_dim();
    let mut maps: Vec<AffineFunction> = (0..n).map(|i| AffineFunction::coordinate(n, i)).collect();
    let varies = |a: &AffineFunction| a.jacobian.iter().any(|v| *v != 0.0);
    for ((layer, states), z) in net.hidden.iter().zip(&pattern.layers).zip(pre) {
        let zmaps = pre_maps(layer, &maps);
        for (u, &s) in states.iter().enumerate() {
            let hit = match layer.activation {
                Activation::Maxout { k } => (0..k).any(|j| {
                    j != s && z[u * k + j] == z[u * k + s] && varies(&zmaps[u * k + j].sub(&zmaps[u * k + s]))
                }),
                act => varies(&zmaps[u]) && act.kinks(layer.unit_params(u)).contains(&z[u]),
            };
            if hit {
                return true;
            }
        }
        maps = states.iter().enumerate().map(|(u, s)| unit_map(layer, u, *s, &zmaps)).collect();
    }
    false
}

struct Walk<'a> {
    net: &'a PwlNetwork,
    box_hs: Vec<Halfspace>,
    out: Vec<RegionCert>,
}

/// `a ≥ 0` as a constraint: `Ok(None)` if it always holds, `Err(())` if it
/// never holds.
fn constraint(a: &AffineFunction) -> std::result::Result<Option<Halfspace>, ()> {
    if a.jacobian.iter().all(|v| *v == 0.0) {
        return if a.bias >= 0.0 { Ok(None) } else { Err(()) };
    }
    Ok(Some(Halfspace::new(a.jacobian.clone(), a.bias, true).expect("non-zero finite normal")))
}

impl Walk<'_> {
    fn center(&self, cons: &[Halfspace]) -> Result<Option<Vec<f64>>> {
        let mut hs = self.box_hs.clone();
        hs.extend_from_slice(cons);
        Ok(lp::chebyshev_center(self.net.input_dim(), &hs, &[])?
            .filter(|(_, r)| *r > MIN_RADIUS)
            .map(|(c, _)| c))
    }

    fn emit(&mut self, maps: &[AffineFunction], cons: &[Halfspace], layers: &[Vec<usize>]) -> Result<()> {
        if let Some(point) = self.center(cons)? {
            let map = pre_maps(&self.net.output, maps).remove(0);
            let pattern = ActivationPattern { layers: layers.to_vec() };
            self.out.push(RegionCert { point, pattern, map });
        }
        Ok(())
    }

    /// Branches on the state of unit `u` of hidden layer `k`.
    fn visit(
        &mut self,
        k: usize,
        u: usize,
        pre: &[AffineFunction],
        outs: &mut Vec<AffineFunction>,
        cons: &mut Vec<Halfspace>,
        states: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        let layer = &self.net.hidden[k];
        if u == layer.units {
            let maps = std::mem::take(outs);
            let result = if k + 1 == self.net.hidden.len() {
                self.emit(&maps, cons, states)
            } else {
                let next = pre_maps(&self.net.hidden[k + 1], &maps);
                states.push(Vec::new());
                let r = self.visit(k + 1, 0, &next, &mut Vec::new(), cons, states);
                states.pop();
                r
            };
            *outs = maps;
            return result;
        }
        for (state, branch) in branches(layer, u, pre) {
            let mark = cons.len();
            if branch.iter().any(|c| c.is_err()) {
                continue;
            }
            cons.extend(branch.into_iter().flatten().flatten());
            if self.center(cons)?.is_some() {
                outs.push(unit_map(layer, u, state, pre));
                states.last_mut().expect("layer entry pushed").push(state);
                self.visit(k, u + 1, pre, outs, cons, states)?;
                states.last_mut().expect("layer entry pushed").pop();
                outs.pop();
            }
            cons.truncate(mark);
        }
        Ok(())
    }
}

type Branch = Vec<std::result::Result<Option<Halfspace>, ()>>;

/// Candidate states of one unit with the constraints each imposes.
fn branches(layer: &DenseLayer, u: usize, pre: &[AffineFunction]) -> Vec<(usize, Branch)> {
    match layer.activation {
        Activation::Maxout { k } => (0..k)
            .map(|j| {
                let zj = &pre[u * k + j];
                let cons = (0..k)
                    .filter(|&i| i != j)
                    .map(|i| constraint(&zj.sub(&pre[u * k + i])))
                    .collect();
                (j, cons)
            })
            .collect(),
        act => {
            let z = &pre[u];
            let kinks = act.kinks(layer.unit_params(u));
            if z.jacobian.iter().all(|v| *v == 0.0) {
                return vec![(kinks.partition_point(|t| *t <= z.bias), Vec::new())];
            }
            (0..=kinks.len())
                .map(|s| {
                    let mut cons = Vec::new();
                    if s > 0 {
                        cons.push(constraint(&AffineFunction::new(z.jacobian.clone(), z.bias - kinks[s - 1])));
                    }
                    if s < kinks.len() {
                        cons.push(constraint(&AffineFunction::new(
                            z.jacobian.iter().map(|v| -v).collect(),
                            kinks[s] - z.bias,
                        )));
                    }
                    (s, cons)
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnn::InitScheme;
    use crate::repr::PwlFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// One hidden ReLU layer with the given `(normal, offset)` units and
    /// output weights `1, 2, 3, …`.
    fn relu_net(units: &[(Vec<f64>, f64)]) -> PwlNetwork {
        let n = units[0].0.len();
        let mut h = DenseLayer::zeros(n, units.len(), Activation::Relu);
        for (i, (w, b)) in units.iter().enumerate() {
            h.weights[i * n..(i + 1) * n].copy_from_slice(w);
            h.bias[i] = *b;
        }
        let mut o = DenseLayer::zeros(units.len(), 1, Activation::Identity);
        o.weights = (1..=units.len()).map(|v| v as f64).collect();
        PwlNetwork::new(n, vec![h], o).unwrap()
    }

    #[test]
    fn bound_values() {
        assert_eq!(zaslavsky_bound(3, 2), 7);
        assert_eq!(zaslavsky_bound(0, 5), 1);
        assert_eq!(zaslavsky_bound(5, 1), 6);
        assert_eq!(zaslavsky_bound(4, 2), 11);
        assert_eq!(zaslavsky_bound(2, 5), 4);
    }

    #[test]
    fn single_unit_patterns() {
        let net = relu_net(&[(vec![1.0], 0.0)]);
        let on = activation_pattern(&net, &[2.0]).unwrap();
        assert_eq!(on.layers, vec![vec![1]]);
        assert_eq!(local_map(&net, &on).unwrap(), AffineFunction::new(vec![1.0], 0.0));
        let off = activation_pattern(&net, &[-2.0]).unwrap();
        assert_eq!(off.layers, vec![vec![0]]);
        assert_eq!(local_map(&net, &off).unwrap(), AffineFunction::new(vec![0.0], 0.0));
    }

    #[test]
    fn local_map_reproduces_forward() {
        let net = PwlNetwork::init(2, &[(4, Activation::Relu)], InitScheme::ScaledNormal, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let map = local_map(&net, &activation_pattern(&net, &x).unwrap()).unwrap();
            let (a, b) = (map.eval(&x).unwrap(), net.eval(&x).unwrap());
            assert!((a - b).abs() <= 1e-12 * 1f64.max(b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn three_generic_lines() {
        let net = relu_net(&[(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0), (vec![1.0, 1.0], -0.5)]);
        let b = BoxDomain::cube(2, -2.0, 2.0);
        let e = count_regions(&net, &b, RegionMethod::Enumerate).unwrap();
        assert_eq!(e.count, 7);
        assert_eq!(e.bound, Some(7));
        let g = count_regions(&net, &b, RegionMethod::Grid { per_dim: 201 }).unwrap();
        assert_eq!(g.count, 7);
    }

    #[test]
    fn quadrants_and_line() {
        let q = relu_net(&[(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0)]);
        let b = BoxDomain::cube(2, -1.0, 1.0);
        assert_eq!(count_regions(&q, &b, RegionMethod::Enumerate).unwrap().count, 4);
        let units: Vec<(Vec<f64>, f64)> = (0..5).map(|i| (vec![1.0], -(i as f64) * 0.3)).collect();
        let line = relu_net(&units);
        let b1 = BoxDomain::cube(1, -1.0, 2.0);
        assert_eq!(count_regions(&line, &b1, RegionMethod::Enumerate).unwrap().count, 6);
    }

    #[test]
    fn deep_and_maxout_nets_enumerate() {
        let net = PwlNetwork::init(2, &[(4, Activation::Relu), (3, Activation::Maxout { k: 2 })], InitScheme::ScaledNormal, 2)
            .unwrap();
        let b = BoxDomain::cube(2, -1.0, 1.0);
        let e = count_regions(&net, &b, RegionMethod::Enumerate).unwrap();
        let g = count_regions(&net, &b, RegionMethod::Grid { per_dim: 101 }).unwrap();
        assert!(g.count <= e.count, "{} > {}", g.count, e.count);
        assert_eq!(e.bound, None);
        for r in &e.regions {
            assert_eq!(activation_pattern(&net, &r.point).unwrap(), r.pattern);
            assert_eq!(r.map.eval(&r.point).unwrap(), {
                let m = local_map(&net, &r.pattern).unwrap();
                m.eval(&r.point).unwrap()
            });
        }
    }

    #[test]
    fn constant_units_do_not_hide_regions() {
        let net = relu_net(&[(vec![0.0, 0.0], 0.0), (vec![1.0, 0.0], 0.0)]);
        let b = BoxDomain::cube(2, -1.0, 1.0);
        assert_eq!(count_regions(&net, &b, RegionMethod::Grid { per_dim: 11 }).unwrap().count, 2);
        assert_eq!(count_regions(&net, &b, RegionMethod::Enumerate).unwrap().count, 2);
    }

    #[test]
    fn budget_refusal() {
        let net = PwlNetwork::init(2, &[(25, Activation::Relu)], InitScheme::ScaledNormal, 0).unwrap();
        let err = count_regions(&net, &BoxDomain::cube(2, -1.0, 1.0), RegionMethod::Enumerate).unwrap_err();
        assert_eq!(err, PwlError::BudgetExceeded { requested: 25, limit: 20 });
    }
}
