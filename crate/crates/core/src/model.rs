//! Kind-agnostic handling of every text model format.

use crate::affine::BoxDomain;
use crate::conventional::ConventionalPwl;
use crate::dnn::PwlNetwork;
use crate::error::{PwlError, Result};
use crate::repr::{
    AhhModel, CplrModel, GhhModel, HingeModel, HlCplrModel, LatticeModel, NestedCplrModel, PwlFunction, SbfModel,
};
use crate::text::sniff_kind;
use crate::transforms::{lattice_from_conventional, DcForm, ToDc, DEFAULT_PROBES};

/// Header kinds accepted by [`Model::from_text`].
pub const MODEL_KINDS: [&str; 11] = [
    "conventional",
    "cplr",
    "nested-cplr",
    "hh",
    "ghh",
    "hlcplr",
    "ahh",
    "sbf",
    "lattice",
    "dc",
    "net",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Conventional(ConventionalPwl),
    Cplr(CplrModel),
    NestedCplr(NestedCplrModel),
    Hh(HingeModel),
    Ghh(GhhModel),
    HlCplr(HlCplrModel),
    Ahh(AhhModel),
    Sbf(SbfModel),
    Lattice(LatticeModel),
    Dc(DcForm),
    Net(PwlNetwork),
}

impl Model {
    /// Parses any supported format, dispatching on the header kind.
    pub fn from_text(text: &str) -> Result<Self> {
        let kind = sniff_kind(text).ok_or_else(|| PwlError::Parse {
            line: 1,
            column: 1,
            message: "expected a `pwl-<kind> v1` header".into(),
        })?;
        Ok(match kind.as_str() {
            "conventional" => Self::Conventional(ConventionalPwl::from_text(text)?),
            "cplr" => Self::Cplr(CplrModel::from_text(text)?),
            "nested-cplr" => Self::NestedCplr(NestedCplrModel::from_text(text)?),
            "hh" => Self::Hh(HingeModel::from_text(text)?),
            "ghh" => Self::Ghh(GhhModel::from_text(text)?),
            "hlcplr" => Self::HlCplr(HlCplrModel::from_text(text)?),
            "ahh" => Self::Ahh(AhhModel::from_text(text)?),
            "sbf" => Self::Sbf(SbfModel::from_text(text)?),
            "lattice" => Self::Lattice(LatticeModel::from_text(text)?),
            "dc" => Self::Dc(DcForm::from_text(text)?),
            "net" => Self::Net(PwlNetwork::from_text(text)?),
            other => {
                return Err(PwlError::Parse {
                    line: 1,
                    column: 1,
                    message: format!("unknown model kind `pwl-{other}` (known: {})", MODEL_KINDS.join(", ")),
                })
            }
        })
    }

    pub fn to_text(&self) -> String {
        match self {
            Self::Conventional(m) => m.to_text(),
            Self::Cplr(m) => m.to_text(),
            Self::NestedCplr(m) => m.to_text(),
            Self::Hh(m) => m.to_text(),
            Self::Ghh(m) => m.to_text(),
            Self::HlCplr(m) => m.to_text(),
            Self::Ahh(m) => m.to_text(),
            Self::Sbf(m) => m.to_text(),
            Self::Lattice(m) => m.to_text(),
            Self::Dc(m) => m.to_text(),
            Self::Net(m) => m.to_text(),
        }
    }

    pub fn kind(&self) -> &'static str {
        let i = match self {
            Self::Conventional(_) => 0,
            Self::Cplr(_) => 1,
            Self::NestedCplr(_) => 2,
            Self::Hh(_) => 3,
            Self::Ghh(_) => 4,
            Self::HlCplr(_) => 5,
            Self::Ahh(_) => 6,
            Self::Sbf(_) => 7,
            Self::Lattice(_) => 8,
            Self::Dc(_) => 9,
            Self::Net(_) => 10,
        };
        MODEL_KINDS[i]
    }

    pub fn as_pwl(&self) -> &dyn PwlFunction {
        match self {
            Self::Conventional(m) => m,
            Self::Cplr(m) => m,
            Self::NestedCplr(m) => m,
            Self::Hh(m) => m,
            Self::Ghh(m) => m,
            Self::HlCplr(m) => m,
            Self::Ahh(m) => m,
            Self::Sbf(m) => m,
            Self::Lattice(m) => m,
            Self::Dc(m) => m,
            Self::Net(m) => m,
        }
    }

    pub fn dim(&self) -> usize {
        self.as_pwl().dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.as_pwl().eval(x)
    }

    /// Difference-of-convex rewrite. Conventional models go through their
    /// lattice form, which needs `probe_box` when a region is unbounded.
    pub fn to_dc(&self, probe_box: Option<&BoxDomain>) -> Result<DcForm> {
        match self {
            Self::Conventional(m) => lattice_from_conventional(m, DEFAULT_PROBES, probe_box)?.to_dc(),
            Self::Cplr(m) => m.to_dc(),
            Self::NestedCplr(m) => m.to_dc(),
            Self::Hh(m) => m.to_dc(),
            Self::Ghh(m) => m.to_dc(),
            Self::HlCplr(m) => m.to_dc(),
            Self::Ahh(m) => m.to_dc(),
            Self::Sbf(m) => m.to_dc(),
            Self::Lattice(m) => m.to_dc(),
            Self::Dc(m) => Ok(m.clone()),
            Self::Net(m) => m.to_dc(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn every_kind_round_trips_through_dispatch() {
        let models = vec![
            Model::Conventional(catalog::two_piece_3d()),
            Model::Cplr(catalog::three_piece_cplr()),
            Model::NestedCplr(catalog::ridge_nested()),
            Model::Ghh(catalog::ridge_ghh()),
            Model::Lattice(catalog::five_piece_lattice()),
            Model::Ahh(AhhModel::new(2, 0.5, vec![catalog::ahh_b5()]).unwrap()),
            Model::Dc(catalog::three_piece_cplr().to_dc().unwrap()),
            Model::Net(PwlNetwork::from_ghh(&catalog::ridge_ghh()).unwrap()),
        ];
        for m in models {
            let back = Model::from_text(&m.to_text()).unwrap();
            assert_eq!(back.kind(), m.kind());
            assert_eq!(back, m);
        }
    }

    #[test]
    fn unknown_kind_is_a_parse_error() {
        let err = Model::from_text("pwl-spline v1 dim=1\n").unwrap_err();
        assert!(matches!(err, PwlError::Parse { line: 1, .. }), "{err}");
        assert!(matches!(Model::from_text("hello\n"), Err(PwlError::Parse { .. })));
    }

    #[test]
    fn conventional_to_dc_matches() {
        let m = Model::Conventional(catalog::three_piece_1d());
        assert!(matches!(m.to_dc(None), Err(PwlError::Unbounded(_))));
        let dc = m.to_dc(Some(&BoxDomain::cube(1, -3.0, 3.0))).unwrap();
        for k in -24..=24 {
            let x = [k as f64 / 8.0];
            assert_eq!(dc.eval(&x).unwrap(), m.eval(&x).unwrap());
        }
    }
}
