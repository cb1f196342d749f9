use crate::affine::{norm, AffineFunction};
use crate::error::{check_dim, PwlError, Result};
use crate::repr::{CplrModel, PwlFunction};
use crate::text::{expect_dim, fmt_real, fmt_reals, header, Reader};

const MAX_DEPTH: usize = 64;

/// `affine(x) + Σ c_k |child_k(x)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedNode {
    pub affine: AffineFunction,
    pub children: Vec<(f64, NestedNode)>,
}

impl NestedNode {
    pub fn leaf(affine: AffineFunction) -> Self {
        Self {
            affine,
            children: Vec::new(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = self.affine.eval_unchecked(x);
        for (c, child) in &self.children {
            acc += c * child.eval(x).abs();
        }
        acc
    }

    /// Number of nested absolute-value levels below this node.
    pub fn level(&self) -> usize {
        self.children
            .iter()
            .map(|(_, c)| 1 + c.level())
            .max()
            .unwrap_or(0)
    }

    fn check(&self, dim: usize, depth: usize) -> Result<()> {
        if depth > MAX_DEPTH {
            return Err(PwlError::InvalidModel(format!("nesting deeper than {MAX_DEPTH}")));
        }
        check_dim(dim, self.affine.dim())?;
        self.children.iter().try_for_each(|(_, c)| c.check(dim, depth + 1))
    }

    fn lipschitz(&self) -> f64 {
        norm(&self.affine.jacobian)
            + self
                .children
                .iter()
                .map(|(c, n)| c.abs() * n.lipschitz())
                .sum::<f64>()
    }

    fn write(&self, coef: f64, out: &mut String) {
        out.push_str(&format!(
            "node coef={} J={} b={} children={}\n",
            fmt_real(coef),
            fmt_reals(&self.affine.jacobian),
            fmt_real(self.affine.bias),
            self.children.len()
        ));
        for (c, child) in &self.children {
            child.write(*c, out);
        }
    }
}

/// Nested (generalized) CPLR stored as an abs-of-sum expression tree.
/// The nesting level K is derived from the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedCplrModel {
    dim: usize,
    root: NestedNode,
}

impl NestedCplrModel {
    pub fn new(root: NestedNode) -> Result<Self> {
        let dim = root.affine.dim();
        root.check(dim, 0)?;
        Ok(Self { dim, root })
    }

    pub fn root(&self) -> &NestedNode {
        &self.root
    }

    pub fn level(&self) -> usize {
        self.root.level()
    }

    /// Wraps a one-level CPLR model as a nesting tree.
    pub fn from_cplr(m: &CplrModel) -> Self {
        let children = m
            .terms
            .iter()
            .map(|t| (t.eta, NestedNode::leaf(AffineFunction::new(t.alpha.clone(), t.beta))))
            .collect();
        Self {
            dim: m.dim(),
            root: NestedNode {
                affine: m.affine_part(),
                children,
            },
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-nested-cplr v1 dim={} level={}\n", self.dim, self.level());
        self.root.write(1.0, &mut out);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "nested-cplr")?;
        let dim = h.count("dim")?;
        let (_, root) = read_node(&mut r, dim, 0)?;
        r.finish()?;
        let m = Self::new(root).map_err(|e| head.error(1, e.to_string()))?;
        if h.has("level") && h.count("level")? != m.level() {
            return Err(head.error(1, "declared level does not match the tree"));
        }
        Ok(m)
    }
}

fn read_node(r: &mut Reader<'_>, dim: usize, depth: usize) -> Result<(f64, NestedNode)> {
    let line = r.next_line("`node` line")?;
    if depth > MAX_DEPTH {
        return Err(line.error(1, "nesting too deep"));
    }
    let f = line.fields();
    if f.word(0) != Some("node") {
        return Err(line.error(1, "expected `node coef=... J=... b=... children=...`"));
    }
    let jac = f.reals("J")?;
    expect_dim(&line, "J", jac.len(), dim)?;
    let coef = f.real("coef")?;
    let affine = AffineFunction::new(jac, f.real("b")?);
    let n = f.count("children")?;
    let mut children = Vec::with_capacity(n);
    for _ in 0..n {
        children.push(read_node(r, dim, depth + 1)?);
    }
    Ok((coef, NestedNode { affine, children }))
}

impl PwlFunction for NestedCplrModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.root.eval(x))
    }

    fn lipschitz_bound(&self) -> f64 {
        self.root.lipschitz()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn ridge_values() {
        let m = catalog::ridge_nested();
        assert_eq!(m.level(), 2);
        assert_eq!(m.eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(m.eval(&[1.0, 1.0]).unwrap(), 20.0);
        assert_eq!(m.eval(&[0.5, 0.5]).unwrap(), 5.0);
    }

    #[test]
    fn cplr_wrap_is_level_one_and_identical() {
        let c = catalog::three_piece_cplr();
        let n = NestedCplrModel::from_cplr(&c);
        assert_eq!(n.level(), 1);
        for k in 0..=600 {
            let x = [-3.0 + k as f64 * 0.01];
            assert_eq!(n.eval(&x).unwrap(), c.eval(&x).unwrap());
        }
    }

    #[test]
    fn text_round_trip() {
        let m = catalog::ridge_nested();
        assert_eq!(NestedCplrModel::from_text(&m.to_text()).unwrap(), m);
    }
}
