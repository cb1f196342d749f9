use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dnn::{InitScheme, PwlNetwork};
use crate::error::{check_dim, PwlError, Result};
use crate::learning::Dataset;

/// Loss above which training is treated as diverged.
pub const DIVERGENCE_LOSS: f64 = 1e12;

/// Mini-batch SGD settings for squared-error regression.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Scheme used when a network is built from a shape for training.
    pub init: InitScheme,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 16,
            epochs: 100,
            seed: 0,
            init: InitScheme::ScaledNormal,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(PwlError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(PwlError::InvalidConfig("batch size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: PwlNetwork,
    /// Mean squared error over the data after each completed epoch.
    pub losses: Vec<f64>,
    /// Epoch (0-based) at which the loss blew up; `net` is then the state
    /// after the previous epoch.
    pub diverged_at: Option<usize>,
}

impl TrainOutcome {
    pub fn losses_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (i, l) in self.losses.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, crate::text::fmt_real(*l)));
        }
        out
    }
}

/// Mean squared error of `net` over `data`.
pub fn mean_loss(net: &PwlNetwork, data: &Dataset) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in data.inputs().iter().zip(data.targets()) {
        let r = net.forward(x)?.output - y;
        total += r * r;
    }
    Ok(total / data.len() as f64)
}

pub fn train_sgd(net: &PwlNetwork, data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_dim(net.input_dim(), data.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut good = net.clone();
    let mut params = net.params();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut work = net.clone();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut failed = false;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = vec![0.0; params.len()];
            for &i in batch {
                match work.backward(&data.inputs()[i], data.targets()[i]) {
                    Ok((_, g)) => grad.iter_mut().zip(&g).for_each(|(a, v)| *a += v),
                    Err(_) => failed = true,
                }
            }
            if failed {
                break;
            }
            let step = cfg.learning_rate / batch.len() as f64;
            params.iter_mut().zip(&grad).for_each(|(p, g)| *p -= step * g);
            if params.iter().any(|p| !p.is_finite()) {
                failed = true;
                break;
            }
            work.set_params(&params)?;
        }
        let loss = if failed { None } else { mean_loss(&work, data).ok() };
        match loss {
            Some(l) if l.is_finite() && l <= DIVERGENCE_LOSS => {
                losses.push(l);
                good = work.clone();
            }
            _ => {
                return Ok(TrainOutcome { net: good, losses, diverged_at: Some(epoch) });
            }
        }
    }
    Ok(TrainOutcome { net: good, losses, diverged_at: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::linspace;
    use crate::dnn::Activation;
    use crate::repr::PwlFunction;

    fn relu_data() -> Dataset {
        let xs: Vec<Vec<f64>> = linspace(-1.0, 1.0, 201).into_iter().map(|x| vec![x]).collect();
        Dataset::from_fn(xs, |x| x[0].max(0.0)).unwrap()
    }

    #[test]
    fn single_unit_learns_relu() {
        let data = relu_data();
        let net = PwlNetwork::init(1, &[(1, Activation::Relu)], InitScheme::ScaledNormal, 0).unwrap();
        let cfg = TrainConfig { learning_rate: 0.05, batch_size: 8, epochs: 200, ..Default::default() };
        let out = train_sgd(&net, &data, &cfg).unwrap();
        assert_eq!(out.losses.len(), 200);
        assert_eq!(out.diverged_at, None);
        let rmse = data.rmse(|x| out.net.eval(x).unwrap());
        assert!(rmse <= 1e-2, "rmse {rmse}");
    }

    #[test]
    fn zero_epochs_is_identity() {
        let data = relu_data();
        let net = PwlNetwork::init(1, &[(3, Activation::Relu)], InitScheme::ScaledNormal, 4).unwrap();
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        let out = train_sgd(&net, &data, &cfg).unwrap();
        assert!(out.losses.is_empty());
        assert_eq!(out.net.params(), net.params());
    }

    #[test]
    fn deterministic_per_seed() {
        let data = relu_data();
        let net = PwlNetwork::init(1, &[(4, Activation::Relu)], InitScheme::ScaledNormal, 1).unwrap();
        let cfg = TrainConfig { epochs: 5, seed: 9, ..Default::default() };
        let a = train_sgd(&net, &data, &cfg).unwrap();
        let b = train_sgd(&net, &data, &cfg).unwrap();
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.net.params(), b.net.params());
    }

    #[test]
    fn divergence_keeps_last_good_state() {
        let xs: Vec<Vec<f64>> = linspace(-100.0, 100.0, 51).into_iter().map(|x| vec![x]).collect();
        let data = Dataset::from_fn(xs, |x| 1e3 * x[0]).unwrap();
        let net = PwlNetwork::init(1, &[(4, Activation::Relu)], InitScheme::ScaledNormal, 2).unwrap();
        let cfg = TrainConfig { learning_rate: 10.0, epochs: 50, ..Default::default() };
        let out = train_sgd(&net, &data, &cfg).unwrap();
        let at = out.diverged_at.expect("learning rate 10 must diverge");
        assert_eq!(out.losses.len(), at);
        assert!(out.net.params().iter().all(|p| p.is_finite()));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = TrainConfig { batch_size: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig { learning_rate: -1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
