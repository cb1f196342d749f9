use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::affine::dot;
use crate::dnn::Activation;
use crate::error::{check_dim, PwlError, Result};
use crate::repr::{GhhModel, PwlFunction};
use crate::text::{fmt_real, fmt_reals, header, Reader};

/// Dense layer `σ(W·x + b)`; `weights` is row-major with one row per
/// pre-activation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub units: usize,
    pub activation: Activation,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub act_params: Vec<f64>,
}

impl DenseLayer {
    /// Layer with zero weights and default activation parameters.
    pub fn zeros(fan_in: usize, units: usize, activation: Activation) -> Self {
        let pre = units * activation.fan();
        Self {
            fan_in,
            units,
            activation,
            weights: vec![0.0; pre * fan_in],
            bias: vec![0.0; pre],
            act_params: (0..units).flat_map(|_| activation.default_params()).collect(),
        }
    }

    pub fn pre_count(&self) -> usize {
        self.units * self.activation.fan()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.fan_in..(i + 1) * self.fan_in]
    }

    pub fn unit_params(&self, u: usize) -> &[f64] {
        let k = self.activation.params_per_unit();
        &self.act_params[u * k..(u + 1) * k]
    }

    fn validate(&self, index: usize) -> Result<()> {
        self.activation.validate()?;
        let bad = |m: String| Err(PwlError::InvalidModel(format!("layer {index}: {m}")));
        if self.units == 0 || self.fan_in == 0 {
            return bad("layers must have at least one unit and one input".into());
        }
        if self.weights.len() != self.pre_count() * self.fan_in {
            return bad(format!("expected {} weights, found {}", self.pre_count() * self.fan_in, self.weights.len()));
        }
        if self.bias.len() != self.pre_count() {
            return bad(format!("expected {} biases, found {}", self.pre_count(), self.bias.len()));
        }
        if self.act_params.len() != self.units * self.activation.params_per_unit() {
            return bad(format!("expected {} activation parameters", self.units * self.activation.params_per_unit()));
        }
        if self.weights.iter().chain(&self.bias).chain(&self.act_params).any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        Ok(())
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len() + self.act_params.len()
    }

    /// Pre-activations and outputs for input `x`.
    fn apply(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let pre: Vec<f64> = (0..self.pre_count()).map(|i| dot(self.row(i), x) + self.bias[i]).collect();
        let post = match self.activation {
            Activation::Maxout { k } => pre.chunks(k).map(|g| g.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect(),
            act => pre.iter().enumerate().map(|(u, z)| act.value(self.unit_params(u), *z)).collect(),
        };
        (pre, post)
    }
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Normal with variance `2 / fan_in`.
    ScaledNormal,
    /// Uniform on `±√(6 / (fan_in + fan_out))`.
    Uniform,
}

/// Layer-by-layer values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub output: f64,
    /// Input to each layer, the output layer last.
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activations of each layer.
    pub pre: Vec<Vec<f64>>,
}

/// Feed-forward network with PWL hidden activations and one affine output.
#[derive(Debug, Clone, PartialEq)]
pub struct PwlNetwork {
    input_dim: usize,
    pub hidden: Vec<DenseLayer>,
    pub output: DenseLayer,
}

impl PwlNetwork {
    pub fn new(input_dim: usize, hidden: Vec<DenseLayer>, output: DenseLayer) -> Result<Self> {
        if input_dim == 0 {
            return Err(PwlError::InvalidModel("network needs at least one input".into()));
        }
        let mut width = input_dim;
        for (k, l) in hidden.iter().enumerate() {
            l.validate(k + 1)?;
            check_dim(width, l.fan_in)?;
            width = l.units;
        }
        output.validate(hidden.len() + 1)?;
        check_dim(width, output.fan_in)?;
        if output.activation != Activation::Identity || output.units != 1 {
            return Err(PwlError::InvalidModel("output layer must be a single identity unit".into()));
        }
        Ok(Self { input_dim, hidden, output })
    }

    /// Randomly initialized network with hidden layers `(units, activation)`
    /// and zero biases.
    pub fn init(input_dim: usize, hidden: &[(usize, Activation)], scheme: InitScheme, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(PwlError::InvalidModel("network needs at least one input".into()));
        }
        if let Some(k) = hidden.iter().position(|(u, _)| *u == 0) {
            return Err(PwlError::InvalidModel(format!("layer {} has zero units", k + 1)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fan_in = input_dim;
        let mut layers = Vec::with_capacity(hidden.len());
        let shapes = hidden.iter().copied().chain([(1, Activation::Identity)]);
        for (units, act) in shapes {
            act.validate()?;
            let mut layer = DenseLayer::zeros(fan_in, units, act);
            let fan_out = layer.pre_count();
            match scheme {
                InitScheme::ScaledNormal => {
                    let d = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive variance");
                    layer.weights.iter_mut().for_each(|w| *w = d.sample(&mut rng));
                }
                InitScheme::Uniform => {
                    let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    let d = Uniform::new_inclusive(-r, r).expect("finite range");
                    layer.weights.iter_mut().for_each(|w| *w = d.sample(&mut rng));
                }
            }
            fan_in = units;
            layers.push(layer);
        }
        let output = layers.pop().expect("output layer pushed last");
        Self::new(input_dim, layers, output)
    }

    /// One maxout layer reproducing a GHH model: unit `m` takes the maximum
    /// of term `m`'s affines (padded by repetition) and the output weights
    /// are the term weights.
    pub fn from_ghh(g: &GhhModel) -> Result<Self> {
        let n = g.dim();
        let k = g.terms.iter().map(|t| t.affines.len()).max().unwrap_or(0);
        if k == 0 {
            return Err(PwlError::InvalidModel("GHH model has no terms".into()));
        }
        let mut layer = DenseLayer::zeros(n, g.terms.len(), Activation::Maxout { k });
        for (m, t) in g.terms.iter().enumerate() {
            for j in 0..k {
                let a = &t.affines[j.min(t.affines.len() - 1)];
                let row = m * k + j;
                layer.weights[row * n..(row + 1) * n].copy_from_slice(&a.jacobian);
                layer.bias[row] = a.bias;
            }
        }
        let mut out = DenseLayer::zeros(g.terms.len(), 1, Activation::Identity);
        out.weights = g.terms.iter().map(|t| t.w).collect();
        Self::new(n, vec![layer], out)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.hidden.iter().chain(std::iter::once(&self.output))
    }

    /// Layer widths `m₀, …, m_{K+1}`.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim).chain(self.layers().map(|l| l.units)).collect()
    }

    pub fn hidden_units(&self) -> usize {
        self.hidden.iter().map(|l| l.units).sum()
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(DenseLayer::param_count).sum()
    }

    /// All parameters: per layer, weights, then biases, then activation
    /// parameters.
    pub fn params(&self) -> Vec<f64> {
        self.layers()
            .flat_map(|l| l.weights.iter().chain(&l.bias).chain(&l.act_params).copied())
            .collect()
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        check_dim(self.param_count(), p.len())?;
        let mut rest = p;
        for l in self.hidden.iter_mut().chain(std::iter::once(&mut self.output)) {
            for block in [&mut l.weights, &mut l.bias, &mut l.act_params] {
                let (head, tail) = rest.split_at(block.len());
                block.copy_from_slice(head);
                rest = tail;
            }
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        check_dim(self.input_dim, x.len())?;
        let mut inputs = Vec::with_capacity(self.hidden.len() + 1);
        let mut pre = Vec::with_capacity(self.hidden.len() + 1);
        let mut cur = x.to_vec();
        for (k, l) in self.layers().enumerate() {
            let (z, a) = l.apply(&cur);
            if a.iter().any(|v| !v.is_finite()) {
                return Err(PwlError::NonFinite { layer: k + 1 });
            }
            inputs.push(std::mem::replace(&mut cur, a));
            pre.push(z);
        }
        Ok(Forward { output: cur[0], inputs, pre })
    }

    /// Squared-error loss `(f(x) − y)²` and its gradient with respect to
    /// [`params`](Self::params), using right derivatives at kinks.
    pub fn backward(&self, x: &[f64], y: f64) -> Result<(f64, Vec<f64>)> {
        let fw = self.forward(x)?;
        let err = fw.output - y;
        let loss = err * err;
        if !loss.is_finite() {
            return Err(PwlError::NonFinite { layer: self.hidden.len() + 1 });
        }
        let layers: Vec<&DenseLayer> = self.layers().collect();
        let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(layers.len());
        // dL/d(layer output), starting at the network output.
        let mut upstream = vec![2.0 * err];
        for k in (0..layers.len()).rev() {
            let l = layers[k];
            let z = &fw.pre[k];
            let input = &fw.inputs[k];
            let mut dz = vec![0.0; l.pre_count()];
            let mut dp = vec![0.0; l.act_params.len()];
            match l.activation {
                Activation::Maxout { k: fan } => {
                    for (u, g) in upstream.iter().enumerate() {
                        let group = &z[u * fan..(u + 1) * fan];
                        let arg = (0..fan).fold(0, |b, j| if group[j] > group[b] { j } else { b });
                        dz[u * fan + arg] = *g;
                    }
                }
                act => {
                    let per = act.params_per_unit();
                    let mut pg = vec![0.0; per];
                    for (u, g) in upstream.iter().enumerate() {
                        let p = l.unit_params(u);
                        dz[u] = g * act.slope(p, z[u]);
                        if per > 0 {
                            act.param_grads(p, z[u], &mut pg);
                            dp[u * per..(u + 1) * per].iter_mut().zip(&pg).for_each(|(d, v)| *d = g * v);
                        }
                    }
                }
            }
            let mut block = Vec::with_capacity(l.param_count());
            for d in &dz {
                block.extend(input.iter().map(|v| d * v));
            }
            block.extend_from_slice(&dz);
            block.extend_from_slice(&dp);
            blocks.push(block);
            let mut down = vec![0.0; l.fan_in];
            for (i, d) in dz.iter().enumerate() {
                if *d != 0.0 {
                    down.iter_mut().zip(l.row(i)).for_each(|(s, w)| *s += d * w);
                }
            }
            upstream = down;
        }
        blocks.reverse();
        Ok((loss, blocks.concat()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pwl-net v1 inputs={} layers={}\n", self.input_dim, self.hidden.len() + 1);
        for (k, l) in self.layers().enumerate() {
            let tag = if k == self.hidden.len() { "output" } else { "layer" };
            let extra = match l.activation {
                Activation::LeakyRelu { lambda } => format!(" lambda={}", fmt_real(lambda)),
                Activation::Apl { hinges } => format!(" hinges={hinges}"),
                Activation::Maxout { k } => format!(" k={k}"),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{tag} units={} fan_in={} act={}{extra}\n",
                l.units,
                l.fan_in,
                l.activation.name()
            ));
            out.push_str(&format!("W={}\n", fmt_reals(&l.weights)));
            out.push_str(&format!("b={}\n", fmt_reals(&l.bias)));
            if !l.act_params.is_empty() {
                out.push_str(&format!("p={}\n", fmt_reals(&l.act_params)));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let (head, h) = header(&mut r, "net")?;
        let input_dim = h.count("inputs")?;
        let count = h.count("layers")?;
        if count == 0 {
            return Err(head.error(1, "a network needs at least the output layer"));
        }
        let mut layers = Vec::with_capacity(count);
        for k in 0..count {
            let tag = if k + 1 == count { "output" } else { "layer" };
            let line = r.next_line(&format!("`{tag}` line"))?;
            let f = line.fields();
            if f.word(0) != Some(tag) {
                return Err(line.error(1, format!("expected `{tag} units=... fan_in=... act=...`")));
            }
            let activation = match f.str("act")? {
                "identity" => Activation::Identity,
                "relu" => Activation::Relu,
                "leaky" => Activation::LeakyRelu { lambda: f.real("lambda")? },
                "prelu" => Activation::ParametricRelu,
                "srelu" => Activation::SShapedRelu,
                "frelu" => Activation::FlexibleRelu,
                "apl" => Activation::Apl { hinges: f.count("hinges")? },
                "maxout" => Activation::Maxout { k: f.count("k")? },
                other => return Err(line.error(1, format!("unknown activation `{other}`"))),
            };
            let mut layer = DenseLayer::zeros(f.count("fan_in")?, f.count("units")?, activation);
            let block = |r: &mut Reader, key: &str, len: usize| -> Result<Vec<f64>> {
                let line = r.next_line(&format!("`{key}=` line"))?;
                let v = line.fields().reals(key)?;
                if v.len() != len {
                    return Err(line.error(1, format!("`{key}` has {} values, expected {len}", v.len())));
                }
                Ok(v)
            };
            layer.weights = block(&mut r, "W", layer.weights.len())?;
            layer.bias = block(&mut r, "b", layer.bias.len())?;
            if !layer.act_params.is_empty() {
                layer.act_params = block(&mut r, "p", layer.act_params.len())?;
            }
            layers.push(layer);
        }
        r.finish()?;
        let output = layers.pop().expect("count >= 1");
        Self::new(input_dim, layers, output).map_err(|e| head.error(1, e.to_string()))
    }
}

impl PwlFunction for PwlNetwork {
    fn dim(&self) -> usize {
        self.input_dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.output)
    }

    /// Product over layers of the largest activation slope times the
    /// Frobenius norm of the weights.
    fn lipschitz_bound(&self) -> f64 {
        self.layers()
            .map(|l| {
                let slope = (0..l.units)
                    .map(|u| l.activation.max_slope(l.unit_params(u)))
                    .fold(0.0, f64::max);
                slope * l.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
            })
            .product()
    }
}
