//! Fit settings from a `key = value` file overlaid with command-line flags.

use std::path::Path;

use pwlnn::dnn::{Activation, InitScheme, TrainConfig};
use pwlnn::learning::FitConfig;

use crate::error::{CliError, CliResult};
use crate::io::read_text;

#[derive(Debug, Clone)]
pub struct Settings {
    pub fit: FitConfig,
    pub train: TrainConfig,
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            train: TrainConfig::default(),
            hidden: vec![16, 16],
            activation: Activation::Relu,
        }
    }
}

fn usage(m: String) -> CliError {
    CliError::Usage(m)
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| usage(format!("`{key}`: cannot parse `{value}`")))
}

pub fn parse_activation(text: &str) -> CliResult<Activation> {
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    let act = match (name, arg) {
        ("identity", None) => Activation::Identity,
        ("relu", None) => Activation::Relu,
        ("leaky", a) => Activation::LeakyRelu { lambda: a.map_or(Ok(0.01), |a| number("activation", a))? },
        ("prelu", None) => Activation::ParametricRelu,
        ("srelu", None) => Activation::SShapedRelu,
        ("frelu", None) => Activation::FlexibleRelu,
        ("apl", a) => Activation::Apl { hinges: a.map_or(Ok(2), |a| number("activation", a))? },
        ("maxout", a) => Activation::Maxout { k: a.map_or(Ok(2), |a| number("activation", a))? },
        _ => {
            return Err(usage(format!(
                "unknown activation `{text}` (identity, relu, leaky[:λ], prelu, srelu, frelu, apl[:S], maxout[:k])"
            )))
        }
    };
    act.validate().map_err(|e| usage(e.to_string()))?;
    Ok(act)
}

pub fn parse_init(text: &str) -> CliResult<InitScheme> {
    match text {
        "scaled-normal" => Ok(InitScheme::ScaledNormal),
        "uniform" => Ok(InitScheme::Uniform),
        _ => Err(usage(format!("unknown init scheme `{text}` (scaled-normal, uniform)"))),
    }
}

pub fn parse_hidden(text: &str) -> CliResult<Vec<usize>> {
    let sizes: Vec<usize> = text.split(',').map(|s| number("hidden", s.trim())).collect::<CliResult<_>>()?;
    if sizes.contains(&0) {
        return Err(usage("hidden layer sizes must be positive".into()));
    }
    Ok(sizes)
}

impl Settings {
    /// Applies one `key = value` setting; keys mirror the flag names with
    /// `_` or `-`.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key.replace('-', "_").as_str() {
            "max_terms" => self.fit.max_terms = number(key, value)?,
            "max_iters" => self.fit.max_iters = number(key, value)?,
            "tolerance" => self.fit.tolerance = number(key, value)?,
            "ridge" => self.fit.ridge = number(key, value)?,
            "seed" => {
                self.fit.seed = number(key, value)?;
                self.train.seed = self.fit.seed;
            }
            "validation_split" => self.fit.validation_split = number(key, value)?,
            "learning_rate" => self.train.learning_rate = number(key, value)?,
            "batch_size" => self.train.batch_size = number(key, value)?,
            "epochs" => self.train.epochs = number(key, value)?,
            "init" => self.train.init = parse_init(value)?,
            "hidden" => self.hidden = parse_hidden(value)?,
            "activation" => self.activation = parse_activation(value)?,
            _ => return Err(usage(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> CliResult<()> {
        for (i, line) in read_text(path)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("{}:{}: expected `key = value`", path.display(), i + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.fit.validate().map_err(|e| usage(e.to_string()))?;
        self.train.validate().map_err(|e| usage(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_accept_both_separators() {
        let mut s = Settings::default();
        s.set("max-terms", "3").unwrap();
        s.set("learning_rate", "0.5").unwrap();
        s.set("seed", "7").unwrap();
        assert_eq!(s.fit.max_terms, 3);
        assert_eq!(s.train.learning_rate, 0.5);
        assert_eq!(s.train.seed, 7);
        assert!(matches!(s.set("colour", "red"), Err(CliError::Usage(_))));
    }

    #[test]
    fn activation_specs() {
        assert_eq!(parse_activation("leaky:0.2").unwrap(), Activation::LeakyRelu { lambda: 0.2 });
        assert_eq!(parse_activation("maxout:3").unwrap(), Activation::Maxout { k: 3 });
        assert!(parse_activation("maxout:0").is_err());
        assert!(parse_activation("tanh").is_err());
        assert_eq!(parse_hidden("16, 8").unwrap(), vec![16, 8]);
        assert!(parse_hidden("16,0").is_err());
    }
}
