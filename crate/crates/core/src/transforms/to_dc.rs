use crate::affine::AffineFunction;
use crate::dnn::{Activation, DenseLayer, PwlNetwork};
use crate::error::Result;
use crate::repr::{
    AhhModel, CplrModel, GhhModel, HingeModel, HlCplrModel, LatticeModel, NestedCplrModel, NestedNode, PwlFunction,
    SbfModel,
};
use crate::transforms::DcForm;

/// Exact rewrite as a difference of two max-of-affine functions.
pub trait ToDc {
    fn to_dc(&self) -> Result<DcForm>;
}

fn affine(jacobian: &[f64], bias: f64) -> DcForm {
    DcForm::from_affine(AffineFunction::new(jacobian.to_vec(), bias))
}

fn relu(f: &DcForm) -> Result<DcForm> {
    f.max(&DcForm::constant(f.plus()[0].dim(), 0.0))
}

impl ToDc for CplrModel {
    fn to_dc(&self) -> Result<DcForm> {
        let mut acc = affine(&self.alpha0, self.beta0);
        for t in &self.terms {
            acc = acc.sum(&affine(&t.alpha, t.beta).abs()?.scale(t.eta))?;
        }
        Ok(acc)
    }
}

fn nested_node(node: &NestedNode) -> Result<DcForm> {
    let mut acc = DcForm::from_affine(node.affine.clone());
    for (c, child) in &node.children {
        acc = acc.sum(&nested_node(child)?.abs()?.scale(*c))?;
    }
    Ok(acc)
}

impl ToDc for NestedCplrModel {
    fn to_dc(&self) -> Result<DcForm> {
        nested_node(self.root())
    }
}

impl ToDc for HingeModel {
    fn to_dc(&self) -> Result<DcForm> {
        let mut acc = affine(&self.alpha0, self.beta0);
        for h in &self.hinges {
            acc = acc.sum(&relu(&affine(&h.alpha, h.beta))?.scale(h.w))?;
        }
        Ok(acc)
    }
}

impl ToDc for GhhModel {
    fn to_dc(&self) -> Result<DcForm> {
        let mut acc = DcForm::constant(self.dim(), 0.0);
        for t in &self.terms {
            acc = acc.sum(&DcForm::max_of_affines(t.affines.clone())?.scale(t.w))?;
        }
        Ok(acc)
    }
}

impl ToDc for HlCplrModel {
    fn to_dc(&self) -> Result<DcForm> {
        let n = self.dim();
        let mut acc = DcForm::constant(n, 0.0);
        for (w, b) in &self.bases {
            let legs: Vec<DcForm> = b
                .coords
                .iter()
                .map(|&(k, j)| {
                    let mut e = AffineFunction::coordinate(n, k);
                    e.bias = -(j as f64) * b.interval;
                    DcForm::from_affine(e)
                })
                .collect();
            acc = acc.sum(&relu(&DcForm::min_all(&legs)?)?.scale(*w))?;
        }
        Ok(acc)
    }
}

impl ToDc for AhhModel {
    fn to_dc(&self) -> Result<DcForm> {
        let n = self.dim();
        let mut acc = DcForm::constant(n, self.intercept);
        for b in &self.bases {
            let factors: Vec<DcForm> = b
                .factors
                .iter()
                .map(|f| {
                    let e = AffineFunction::coordinate(n, f.var);
                    relu(&DcForm::from_affine(AffineFunction::new(
                        e.jacobian.iter().map(|v| v * f.delta).collect(),
                        -f.delta * f.knot,
                    )))
                })
                .collect::<Result<_>>()?;
            acc = acc.sum(&DcForm::min_all(&factors)?.scale(b.w))?;
        }
        Ok(acc)
    }
}

impl ToDc for SbfModel {
    fn to_dc(&self) -> Result<DcForm> {
        let n = self.dim();
        let mut acc = DcForm::constant(n, 0.0);
        for b in &self.bases {
            let mut tent = DcForm::constant(n, 1.0);
            for (i, (g, z)) in b.gamma.iter().zip(&b.zeta).enumerate() {
                let mut e = AffineFunction::coordinate(n, i);
                e.bias = -z;
                tent = tent.sum(&DcForm::from_affine(e).abs()?.scale(-g))?;
            }
            acc = acc.sum(&relu(&tent)?.scale(b.w))?;
        }
        Ok(acc)
    }
}

impl ToDc for LatticeModel {
    fn to_dc(&self) -> Result<DcForm> {
        let rows: Vec<DcForm> = self
            .rows()
            .iter()
            .map(|s| {
                let legs: Vec<DcForm> = s.iter().map(|&j| DcForm::from_affine(self.affines()[j].clone())).collect();
                DcForm::min_all(&legs)
            })
            .collect::<Result<_>>()?;
        DcForm::max_all(&rows)
    }
}

/// `σ(z)` as `s₀z + c₀ + Σ Δsᵢ·max{z − tᵢ, 0}` over the kinks `tᵢ`.
fn activation_dc(act: Activation, p: &[f64], z: &DcForm) -> Result<DcForm> {
    let n = z.plus()[0].dim();
    let kinks = act.kinks(p);
    let r0 = kinks.first().map_or(0.0, |t| t - 1.0);
    let s0 = act.slope(p, r0);
    let mut acc = z.scale(s0).sum(&DcForm::constant(n, act.value(p, r0) - s0 * r0))?;
    let mut prev = s0;
    for t in kinks {
        let s = act.slope(p, t);
        if s != prev {
            let shifted = z.sum(&DcForm::constant(n, -t))?;
            acc = acc.sum(&relu(&shifted)?.scale(s - prev))?;
            prev = s;
        }
    }
    Ok(acc)
}

fn layer_dc(layer: &DenseLayer, inputs: &[DcForm]) -> Result<Vec<DcForm>> {
    let n = inputs[0].plus()[0].dim();
    let pre: Vec<DcForm> = (0..layer.pre_count())
        .map(|i| {
            layer
                .row(i)
                .iter()
                .zip(inputs)
                .filter(|(w, _)| **w != 0.0)
                .try_fold(DcForm::constant(n, layer.bias[i]), |acc, (w, f)| acc.sum(&f.scale(*w)))
        })
        .collect::<Result<_>>()?;
    match layer.activation {
        Activation::Maxout { k } => pre.chunks(k).map(DcForm::max_all).collect(),
        act => pre
            .iter()
            .enumerate()
            .map(|(u, z)| activation_dc(act, layer.unit_params(u), z))
            .collect(),
    }
}

impl ToDc for PwlNetwork {
    fn to_dc(&self) -> Result<DcForm> {
        let n = self.input_dim();
        let mut maps: Vec<DcForm> = (0..n)
            .map(|i| DcForm::from_affine(AffineFunction::coordinate(n, i)))
            .collect();
        for layer in self.layers() {
            maps = layer_dc(layer, &maps)?;
        }
        Ok(maps.remove(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::linspace;
    use crate::catalog;
    use crate::transforms::ghh_from_dc;

    #[test]
    fn cplr_grid_agreement() {
        let m = catalog::three_piece_cplr();
        let dc = m.to_dc().unwrap();
        for x in linspace(-3.0, 3.0, 601) {
            let (a, b) = (dc.eval(&[x]).unwrap(), m.eval(&[x]).unwrap());
            assert!((a - b).abs() <= 1e-12, "x = {x}: {a} vs {b}");
        }
        for k in -48..=48 {
            let x = [k as f64 / 16.0];
            assert_eq!(dc.eval(&x).unwrap(), m.eval(&x).unwrap());
        }
    }

    #[test]
    fn lattice_grid_agreement() {
        let m = catalog::five_piece_lattice();
        let dc = m.to_dc().unwrap();
        for x in linspace(0.0, 5.0, 1001) {
            let (a, b) = (dc.eval(&[x]).unwrap(), m.eval(&[x]).unwrap());
            assert!((a - b).abs() <= 1e-12, "x = {x}: {a} vs {b}");
        }
        let g = ghh_from_dc(&dc);
        for x in linspace(0.0, 5.0, 101) {
            assert_eq!(g.eval(&[x]).unwrap(), dc.eval(&[x]).unwrap());
        }
    }

    #[test]
    fn ahh_interaction_basis_as_ghh() {
        let m = AhhModel::new(2, 0.0, vec![catalog::ahh_b5()]).unwrap();
        let g = ghh_from_dc(&m.to_dc().unwrap());
        for x1 in linspace(0.0, 1.0, 51) {
            for x2 in linspace(0.0, 1.0, 51) {
                let (a, b) = (g.eval(&[x1, x2]).unwrap(), m.eval(&[x1, x2]).unwrap());
                assert!((a - b).abs() <= 1e-12, "({x1},{x2}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn networks_rewrite_exactly_on_dyadic_points() {
        use crate::dnn::InitScheme;
        let shapes = [
            vec![(3, Activation::Relu), (2, Activation::LeakyRelu { lambda: 0.25 })],
            vec![(2, Activation::Apl { hinges: 2 })],
            vec![(2, Activation::Maxout { k: 3 })],
            vec![(2, Activation::SShapedRelu), (2, Activation::FlexibleRelu)],
        ];
        for (s, shape) in shapes.iter().enumerate() {
            let net = PwlNetwork::init(2, shape, InitScheme::Uniform, s as u64).unwrap();
            let dc = net.to_dc().unwrap();
            for i in -8..=8 {
                for j in -8..=8 {
                    let x = [i as f64 / 4.0, j as f64 / 4.0];
                    let (a, b) = (dc.eval(&x).unwrap(), net.eval(&x).unwrap());
                    assert!((a - b).abs() <= 1e-12 * 1f64.max(b.abs()), "{shape:?} at {x:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn nested_and_ghh_examples() {
        let n = catalog::ridge_nested().to_dc().unwrap();
        let g = catalog::ridge_ghh().to_dc().unwrap();
        for x in [[0.0, 0.0], [1.0, 1.0], [0.5, 0.5], [1.0, 0.0]] {
            assert_eq!(n.eval(&x).unwrap(), catalog::ridge_value(&x));
            assert_eq!(g.eval(&x).unwrap(), catalog::ridge_value(&x));
        }
    }
}
