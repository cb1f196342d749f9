use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{PwlError, Result};
use crate::text::fmt_real;

/// Samples `(xⁱ, yⁱ)` with optional feature names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(PwlError::InvalidData("dataset has no rows".into()));
        }
        if inputs.len() != targets.len() {
            return Err(PwlError::InvalidData(format!(
                "{} input rows but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let dim = inputs[0].len();
        if dim == 0 {
            return Err(PwlError::InvalidData("rows have no input columns".into()));
        }
        for (i, (row, t)) in inputs.iter().zip(&targets).enumerate() {
            if row.len() != dim {
                return Err(PwlError::InvalidData(format!(
                    "row {} has {} inputs, expected {dim}",
                    i + 1,
                    row.len()
                )));
            }
            if !t.is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(PwlError::InvalidData(format!("row {} has a non-finite entry", i + 1)));
            }
        }
        Ok(Self { inputs, targets, names: None })
    }

    /// Samples `f` at every point.
    pub fn from_fn(points: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let targets = points.iter().map(|x| f(x)).collect();
        Self::new(points, targets)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(PwlError::InvalidData(format!(
                "{} feature names for {} inputs",
                names.len(),
                self.dim()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Values of input column `v`.
    pub fn column(&self, v: usize) -> Vec<f64> {
        self.inputs.iter().map(|x| x[v]).collect()
    }

    fn subset(&self, idx: &[usize]) -> Self {
        Self {
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
            names: self.names.clone(),
        }
    }

    /// Seeded train/validation split; both parts keep the original row order.
    /// A zero fraction returns the whole set with no validation part.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Dataset, Option<Dataset>)> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(PwlError::InvalidConfig(format!(
                "validation split must lie in [0, 1), got {fraction}"
            )));
        }
        if fraction == 0.0 {
            return Ok((self.clone(), None));
        }
        if self.len() < 2 {
            return Err(PwlError::InvalidData("a validation split needs at least 2 rows".into()));
        }
        let n_valid = ((fraction * self.len() as f64).round() as usize).clamp(1, self.len() - 1);
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (valid, train) = idx.split_at_mut(n_valid);
        valid.sort_unstable();
        train.sort_unstable();
        Ok((self.subset(train), Some(self.subset(valid))))
    }

    /// Root-mean-square error of `f` over the samples.
    pub fn rmse(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let sse: f64 = self
            .inputs
            .iter()
            .zip(&self.targets)
            .map(|(x, y)| (f(x) - y).powi(2))
            .sum();
        (sse / self.len() as f64).sqrt()
    }
}

/// Settings shared by the incremental fitters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Maximum number of non-constant basis functions.
    pub max_terms: usize,
    /// Alternation limit for hinge finding and backfitting sweeps.
    pub max_iters: usize,
    /// Relative SSE decrease below which growth stops.
    pub tolerance: f64,
    pub ridge: f64,
    pub seed: u64,
    pub validation_split: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_terms: 8,
            max_iters: 50,
            tolerance: 1e-9,
            ridge: 1e-8,
            seed: 0,
            validation_split: 0.0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PwlError::InvalidConfig(m));
        if self.max_terms == 0 {
            return bad("max_terms must be at least 1".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return bad(format!("ridge must be >= 0, got {}", self.ridge));
        }
        if !(0.0..1.0).contains(&self.validation_split) {
            return bad(format!("validation_split must lie in [0, 1), got {}", self.validation_split));
        }
        Ok(())
    }
}

/// One fitting event.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub terms: usize,
    pub train_sse: f64,
    pub valid_sse: Option<f64>,
    pub action: TraceAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAction {
    /// Starting model.
    Init,
    /// A basis was added.
    Grow,
    /// An existing basis was re-estimated.
    Refit,
    /// A candidate was rejected because it raised the SSE.
    Reject,
    /// Hinge finding failed for this round.
    Skip,
    /// A basis was removed by backward pruning.
    Prune,
    /// Growth ended early.
    Stop,
}

impl TraceAction {
    pub fn name(self) -> &'static str {
        match self {
            Self::Init => "init",
            Self::Grow => "grow",
            Self::Refit => "refit",
            Self::Reject => "reject",
            Self::Skip => "skip",
            Self::Prune => "prune",
            Self::Stop => "stop",
        }
    }

    /// Whether the record describes the model that was kept.
    pub fn accepted(self) -> bool {
        matches!(self, Self::Init | Self::Grow | Self::Refit)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    pub records: Vec<TraceRecord>,
}

impl FitTrace {
    pub(crate) fn push(&mut self, terms: usize, train_sse: f64, valid_sse: Option<f64>, action: TraceAction) {
        self.records.push(TraceRecord {
            step: self.records.len(),
            terms,
            train_sse,
            valid_sse,
            action,
        });
    }

    /// `step,terms,train_sse,valid_sse,action` rows; reals round-trip exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,terms,train_sse,valid_sse,action\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.step,
                r.terms,
                fmt_real(r.train_sse),
                r.valid_sse.map(fmt_real).unwrap_or_default(),
                r.action.name()
            ));
        }
        out
    }

    /// Training SSE of the last accepted record.
    pub fn final_train_sse(&self) -> Option<f64> {
        self.records.iter().rev().find(|r| r.action.accepted()).map(|r| r.train_sse)
    }
}

/// Sum of squares below which a fit counts as exact.
pub(crate) fn exact_floor(y: &[f64]) -> f64 {
    1e-16 * y.iter().map(|v| v * v).sum::<f64>()
}

/// True when going from `old` to `new` is too small a gain to continue.
pub(crate) fn no_progress(old: f64, new: f64, tolerance: f64, floor: f64) -> bool {
    old <= floor || old - new <= tolerance * old
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0.0, 0.0]).is_err());
        assert!(Dataset::new(vec![vec![f64::NAN]], vec![0.0]).is_err());
        assert!(Dataset::new(vec![], vec![]).is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn split_is_seeded_and_disjoint() {
        let d = Dataset::from_fn((0..20).map(|i| vec![i as f64]).collect(), |x| x[0]).unwrap();
        let (t1, v1) = d.split(0.25, 4).unwrap();
        let (t2, v2) = d.split(0.25, 4).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(v1, v2);
        let v1 = v1.unwrap();
        assert_eq!((t1.len(), v1.len()), (15, 5));
        assert!(v1.targets().iter().all(|v| !t1.targets().contains(v)));
        assert!(d.split(1.0, 0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        for cfg in [
            FitConfig { max_terms: 0, ..Default::default() },
            FitConfig { ridge: -1.0, ..Default::default() },
            FitConfig { validation_split: 1.0, ..Default::default() },
            FitConfig { tolerance: 0.0, ..Default::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(PwlError::InvalidConfig(_))));
        }
    }

    #[test]
    fn trace_csv_layout() {
        let mut t = FitTrace::default();
        t.push(0, 4.0, None, TraceAction::Init);
        t.push(1, 0.5, Some(0.25), TraceAction::Grow);
        assert_eq!(t.to_csv(), "step,terms,train_sse,valid_sse,action\n0,0,4,,init\n1,1,0.5,0.25,grow\n");
        assert_eq!(t.final_train_sse(), Some(0.5));
    }
}
