use crate::affine::{norm, AffineFunction};
use crate::error::{check_dim, PwlError, Result};
use crate::repr::PwlFunction;
use crate::text::{expect_dim, fmt_indices, fmt_real, fmt_reals, header, Reader};

/// Lattice representation `max_i min_{j ∈ S_i} (J_j·x + b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    dim: usize,
    affines: Vec<AffineFunction>,
    /// Selection sets, 0-based indices into `affines`.
    rows: Vec<Vec<usize>>,
}

impl LatticeModel {
    pub fn new(dim: usize, affines: Vec<AffineFunction>, rows: Vec<Vec<usize>>) -> Result<Self> {
        for a in &affines {
            check_dim(dim, a.dim())?;
        }
        if rows.is_empty() {
            return Err(PwlError::InvalidModel("lattice needs at least one selection set".into()));
        }
        for (i, s) in rows.iter().enumerate() {
            if s.is_empty() {
                return Err(PwlError::InvalidModel(format!("selection set S_{} is empty", i + 1)));
            }
            if let Some(j) = s.iter().find(|j| **j >= affines.len()) {
                return Err(PwlError::InvalidModel(format!(
                    "selection set S_{} references affine {} of {}",
                    i + 1,
                    j + 1,
                    affines.len()
                )));
            }
        }
        Ok(Self { dim, affines, rows })
    }

    pub fn affines(&self) -> &[AffineFunction] {
        &self.affines
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Selection sets as sorted, de-duplicated 1-based lists.
    pub fn selection_sets(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|s| {
                let mut v: Vec<usize> = s.iter().map(|j| j + 1).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }

    pub fn row_value(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i]
            .iter()
            .map(|&j| self.affines[j].eval_unchecked(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "pwl-lattice v1 dim={} affines={} rows={}\n",
            self.dim,
            self.affines.len(),
            self.rows.len()
        );
        for a in &self.affines {
            out.push_str(&format!("J={} b={}\n", fmt_reals(&a.jacobian), fmt_real(a.bias)));
        }
        for s in self.selection_sets() {
            let zero_based: Vec<usize> = s.iter().map(|j| j - 1).collect();
            out.push_str(&format!("S={}\n", fmt_indices(&zero_based)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "lattice")?;
        let dim = h.count("dim")?;
        let d = h.count("affines")?;
        let m = h.count("rows")?;
        let mut affines = Vec::with_capacity(d);
        for _ in 0..d {
            let line = r.next_line("affine line `J=... b=...`")?;
            let f = line.fields();
            let jac = f.reals("J")?;
            expect_dim(&line, "J", jac.len(), dim)?;
            affines.push(AffineFunction::new(jac, f.real("b")?));
        }
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let line = r.next_line("selection line `S=...`")?;
            rows.push(line.fields().indices("S")?);
        }
        r.finish()?;
        Self::new(dim, affines, rows).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for LatticeModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((0..self.rows.len())
            .map(|i| self.row_value(i, x))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    fn lipschitz_bound(&self) -> f64 {
        self.affines
            .iter()
            .map(|a| norm(&a.jacobian))
            .fold(0.0, f64::max)
    }
}
