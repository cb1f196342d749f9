use crate::error::{PwlError, Result};

/// Piecewise-linear activation of a dense layer.
///
/// Learnable kinds keep per-unit parameters in the layer, laid out unit by
/// unit: parametric `[λ]`, S-shaped `[α₀, β₀, α₁, α₂, tˡ, tʳ]`, flexible
/// `[a, b]`, APL `[a¹..aˢ, b¹..bˢ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    /// Affine output layer.
    Identity,
    Relu,
    /// `max{z, 0} − λ·max{−z, 0}` with a fixed `λ`.
    LeakyRelu { lambda: f64 },
    ParametricRelu,
    /// `α₀z + β₀ + α₁|z − tˡ| + α₂|z − tʳ|`.
    SShapedRelu,
    /// `max{z + a, 0} + b`.
    FlexibleRelu,
    /// `max{z, 0} + Σ_s aˢ·max{0, −z + bˢ}`.
    Apl { hinges: usize },
    /// Maximum over `k` consecutive pre-activations.
    Maxout { k: usize },
}

/// Right-continuous sign: `+1` at zero.
fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl Activation {
    pub fn params_per_unit(&self) -> usize {
        match self {
            Self::ParametricRelu => 1,
            Self::SShapedRelu => 6,
            Self::FlexibleRelu => 2,
            Self::Apl { hinges } => 2 * hinges,
            _ => 0,
        }
    }

    /// Pre-activations consumed per output unit.
    pub fn fan(&self) -> usize {
        match self {
            Self::Maxout { k } => *k,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Maxout { k: 0 } => Err(PwlError::InvalidModel("maxout group size must be at least 1".into())),
            Self::LeakyRelu { lambda } if !lambda.is_finite() => {
                Err(PwlError::InvalidModel("leaky slope must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Parameters that make the unit act as a plain ReLU (parametric slope
    /// starts at 0.25).
    pub fn default_params(&self) -> Vec<f64> {
        match self {
            Self::ParametricRelu => vec![0.25],
            Self::SShapedRelu => vec![0.5, 0.0, 0.5, 0.0, 0.0, 1.0],
            Self::FlexibleRelu => vec![0.0, 0.0],
            Self::Apl { hinges } => {
                let s = *hinges;
                let mut p = vec![0.0; 2 * s];
                for i in 0..s {
                    p[s + i] = -(i as f64 + 1.0) / s as f64;
                }
                p
            }
            _ => Vec::new(),
        }
    }

    /// Value of a scalar (non-maxout) activation.
    pub fn value(&self, p: &[f64], z: f64) -> f64 {
        match self {
            Self::Identity | Self::Maxout { .. } => z,
            Self::Relu => z.max(0.0),
            Self::LeakyRelu { lambda } => z.max(0.0) - lambda * (-z).max(0.0),
            Self::ParametricRelu => z.max(0.0) - p[0] * (-z).max(0.0),
            Self::SShapedRelu => p[0] * z + p[1] + p[2] * (z - p[4]).abs() + p[3] * (z - p[5]).abs(),
            Self::FlexibleRelu => (z + p[0]).max(0.0) + p[1],
            Self::Apl { hinges } => {
                let (a, b) = p.split_at(*hinges);
                z.max(0.0) + a.iter().zip(b).map(|(a, b)| a * (b - z).max(0.0)).sum::<f64>()
            }
        }
    }

    /// Right derivative `dσ/dz`.
    pub fn slope(&self, p: &[f64], z: f64) -> f64 {
        let on = |v: f64| if v >= 0.0 { 1.0 } else { 0.0 };
        match self {
            Self::Identity | Self::Maxout { .. } => 1.0,
            Self::Relu => on(z),
            Self::LeakyRelu { lambda } => if z >= 0.0 { 1.0 } else { *lambda },
            Self::ParametricRelu => if z >= 0.0 { 1.0 } else { p[0] },
            Self::SShapedRelu => p[0] + p[2] * sgn(z - p[4]) + p[3] * sgn(z - p[5]),
            Self::FlexibleRelu => on(z + p[0]),
            Self::Apl { hinges } => {
                let (a, b) = p.split_at(*hinges);
                on(z) - a.iter().zip(b).filter(|(_, b)| z < **b).map(|(a, _)| a).sum::<f64>()
            }
        }
    }

    /// `∂σ/∂p` for the unit's own parameters, written into `out`.
    pub fn param_grads(&self, p: &[f64], z: f64, out: &mut [f64]) {
        match self {
            Self::ParametricRelu => out[0] = z.min(0.0),
            Self::SShapedRelu => {
                out[0] = z;
                out[1] = 1.0;
                out[2] = (z - p[4]).abs();
                out[3] = (z - p[5]).abs();
                out[4] = -p[2] * sgn(z - p[4]);
                out[5] = -p[3] * sgn(z - p[5]);
            }
            Self::FlexibleRelu => {
                out[0] = if z + p[0] >= 0.0 { 1.0 } else { 0.0 };
                out[1] = 1.0;
            }
            Self::Apl { hinges } => {
                let s = *hinges;
                for i in 0..s {
                    let (a, b) = (p[i], p[s + i]);
                    out[i] = (b - z).max(0.0);
                    out[s + i] = if z < b { a } else { 0.0 };
                }
            }
            _ => {}
        }
    }

    /// Sorted kinks of a scalar activation; segment `i` is
    /// `[kinks[i-1], kinks[i])`.
    pub fn kinks(&self, p: &[f64]) -> Vec<f64> {
        let mut k = match self {
            Self::Identity | Self::Maxout { .. } => Vec::new(),
            Self::Relu | Self::LeakyRelu { .. } | Self::ParametricRelu => vec![0.0],
            Self::SShapedRelu => vec![p[4], p[5]],
            Self::FlexibleRelu => vec![-p[0]],
            Self::Apl { hinges } => std::iter::once(0.0).chain(p[*hinges..].iter().copied()).collect(),
        };
        k.sort_by(f64::total_cmp);
        k
    }

    /// Upper bound on `|dσ/dz|` over all segments.
    pub fn max_slope(&self, p: &[f64]) -> f64 {
        match self {
            Self::Identity | Self::Maxout { .. } | Self::Relu | Self::FlexibleRelu => 1.0,
            Self::LeakyRelu { lambda } => lambda.abs().max(1.0),
            Self::ParametricRelu => p[0].abs().max(1.0),
            Self::SShapedRelu => p[0].abs() + p[2].abs() + p[3].abs(),
            Self::Apl { hinges } => 1.0 + p[..*hinges].iter().map(|a| a.abs()).sum::<f64>(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Relu => "relu",
            Self::LeakyRelu { .. } => "leaky",
            Self::ParametricRelu => "prelu",
            Self::SShapedRelu => "srelu",
            Self::FlexibleRelu => "frelu",
            Self::Apl { .. } => "apl",
            Self::Maxout { .. } => "maxout",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZS: [f64; 7] = [-2.0, -0.75, -0.1, 0.0, 0.3, 1.0, 2.5];

    #[test]
    fn learnable_kinds_reduce_to_relu() {
        let relu = Activation::Relu;
        for (act, p) in [
            (Activation::ParametricRelu, vec![0.0]),
            (Activation::FlexibleRelu, vec![0.0, 0.0]),
            (Activation::Apl { hinges: 0 }, vec![]),
            (Activation::Apl { hinges: 2 }, vec![0.0, 0.0, -1.0, 0.5]),
            (Activation::SShapedRelu, Activation::SShapedRelu.default_params()),
            (Activation::LeakyRelu { lambda: 0.0 }, vec![]),
        ] {
            for z in ZS {
                assert_eq!(act.value(&p, z), relu.value(&[], z), "{act:?} at {z}");
                assert_eq!(act.slope(&p, z), relu.slope(&[], z), "{act:?} at {z}");
            }
        }
    }

    #[test]
    fn right_derivative_at_kink() {
        assert_eq!(Activation::Relu.slope(&[], 0.0), 1.0);
        assert_eq!(Activation::LeakyRelu { lambda: 0.1 }.slope(&[], 0.0), 1.0);
        let apl = Activation::Apl { hinges: 1 };
        // Slope just right of b = 0.5 is 1 (the hinge has switched off).
        assert_eq!(apl.slope(&[2.0, 0.5], 0.5), 1.0);
        assert_eq!(apl.slope(&[2.0, 0.5], 0.4), -1.0);
    }

    #[test]
    fn slopes_match_difference_quotients() {
        let h = 1e-7;
        for (act, p) in [
            (Activation::SShapedRelu, vec![0.2, 0.1, 0.7, -0.3, -1.0, 1.5]),
            (Activation::Apl { hinges: 2 }, vec![0.5, -0.25, -0.5, 1.2]),
            (Activation::FlexibleRelu, vec![0.4, -0.2]),
            (Activation::ParametricRelu, vec![0.3]),
        ] {
            for z in ZS {
                let fd = (act.value(&p, z + h) - act.value(&p, z)) / h;
                assert!((fd - act.slope(&p, z)).abs() < 1e-6, "{act:?} at {z}");
                let mut g = vec![0.0; p.len()];
                act.param_grads(&p, z, &mut g);
                for i in 0..p.len() {
                    let mut q = p.clone();
                    q[i] += h;
                    let fd = (act.value(&q, z) - act.value(&p, z)) / h;
                    assert!((fd - g[i]).abs() < 1e-6, "{act:?} param {i} at {z}");
                }
            }
        }
    }
}
