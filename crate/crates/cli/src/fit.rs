use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pwlnn::dnn::{train_sgd, PwlNetwork};
use pwlnn::learning::{fit_ahh, fit_hh, fit_sbf, Dataset, FitTrace};
use pwlnn::repr::PwlFunction;
use pwlnn::fmt_real;

use crate::config::{parse_activation, parse_hidden, parse_init, Settings};
use crate::error::{CliError, CliResult};
use crate::io::{read_dataset, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitKind {
    Hh,
    Ahh,
    Sbf,
    Dnn,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with input columns followed by the target column.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub kind: FitKind,
    /// `key = value` settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_terms: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iters: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub validation_split: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: Option<u64>,
    #[arg(long)]
    pub epochs: Option<u64>,
    /// Hidden layer sizes, e.g. `16,16`.
    #[arg(long)]
    pub hidden: Option<String>,
    /// Hidden activation: relu, leaky[:λ], prelu, srelu, frelu, apl[:S], maxout[:k].
    #[arg(long)]
    pub activation: Option<String>,
    /// scaled-normal or uniform.
    #[arg(long)]
    pub init: Option<String>,
}

impl FitArgs {
    pub fn settings(&self) -> CliResult<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.load_file(path)?;
        }
        let flags: [(&str, Option<String>); 9] = [
            ("max_terms", self.max_terms.map(|v| v.to_string())),
            ("max_iters", self.max_iters.map(|v| v.to_string())),
            ("tolerance", self.tolerance.map(|v| v.to_string())),
            ("ridge", self.ridge.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("validation_split", self.validation_split.map(|v| v.to_string())),
            ("learning_rate", self.learning_rate.map(|v| v.to_string())),
            ("batch_size", self.batch_size.map(|v| v.to_string())),
            ("epochs", self.epochs.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, &v)?;
            }
        }
        if let Some(h) = &self.hidden {
            s.hidden = parse_hidden(h)?;
        }
        if let Some(a) = &self.activation {
            s.activation = parse_activation(a)?;
        }
        if let Some(i) = &self.init {
            s.train.init = parse_init(i)?;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Trace CSV to write (loss curve for dnn).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// A finished fit with everything the commands may print or write.
pub struct Fitted {
    pub model_text: String,
    pub trace_csv: String,
    pub plot_csv: String,
    pub terms: usize,
    pub train_rmse: f64,
    pub valid_rmse: Option<f64>,
    pub samples: (usize, usize),
    pub diverged_at: Option<usize>,
    pub seed: u64,
}

fn rmse(sse: f64, n: usize) -> f64 {
    (sse / n as f64).sqrt()
}

fn shallow_plot(trace: &FitTrace, train: usize, valid: usize) -> String {
    let mut out = String::from("step,terms,train_sse,valid_sse,train_rmse,valid_rmse,action\n");
    for r in &trace.records {
        let v = r.valid_sse.map_or(String::new(), fmt_real);
        let vr = r.valid_sse.map_or(String::new(), |s| fmt_real(rmse(s, valid)));
        out.push_str(&format!(
            "{},{},{},{v},{},{vr},{}\n",
            r.step,
            r.terms,
            fmt_real(r.train_sse),
            fmt_real(rmse(r.train_sse, train)),
            r.action.name()
        ));
    }
    out
}

fn split_sizes(data: &Dataset, s: &Settings) -> CliResult<(Dataset, Option<Dataset>)> {
    data.split(s.fit.validation_split, s.fit.seed).map_err(CliError::compute)
}

pub fn run_fit(args: &FitArgs) -> CliResult<Fitted> {
    let s = args.settings()?;
    let data = read_dataset(&args.data)?;
    let (train, valid) = split_sizes(&data, &s)?;
    let score = |f: &dyn PwlFunction| -> (f64, Option<f64>) {
        let e = |d: &Dataset| d.rmse(|x| f.eval(x).unwrap_or(f64::NAN));
        (e(&train), valid.as_ref().map(e))
    };
    let sizes = (train.len(), valid.as_ref().map_or(0, Dataset::len));
    let shallow = |model: &dyn PwlFunction, text: String, trace: FitTrace, terms: usize| {
        let (train_rmse, valid_rmse) = score(model);
        Fitted {
            model_text: text,
            trace_csv: trace.to_csv(),
            plot_csv: shallow_plot(&trace, sizes.0, sizes.1),
            terms,
            train_rmse,
            valid_rmse,
            samples: sizes,
            diverged_at: None,
            seed: s.fit.seed,
        }
    };
    Ok(match args.kind {
        FitKind::Hh => {
            let (m, t) = fit_hh(&data, &s.fit).map_err(CliError::compute)?;
            shallow(&m, m.to_text(), t, m.hinges.len())
        }
        FitKind::Ahh => {
            let f = fit_ahh(&data, &s.fit).map_err(CliError::compute)?;
            shallow(&f.model, f.model.to_text(), f.trace, f.model.bases.len())
        }
        FitKind::Sbf => {
            let (m, t) = fit_sbf(&data, &s.fit).map_err(CliError::compute)?;
            shallow(&m, m.to_text(), t, m.bases.len())
        }
        FitKind::Dnn => {
            let shape: Vec<_> = s.hidden.iter().map(|&u| (u, s.activation)).collect();
            let net = PwlNetwork::init(data.dim(), &shape, s.train.init, s.train.seed).map_err(CliError::compute)?;
            let out = train_sgd(&net, &train, &s.train).map_err(CliError::compute)?;
            let (train_rmse, valid_rmse) = score(&out.net);
            let mut plot = String::from("epoch,loss,rmse\n");
            for (i, l) in out.losses.iter().enumerate() {
                plot.push_str(&format!("{},{},{}\n", i + 1, fmt_real(*l), fmt_real(l.sqrt())));
            }
            Fitted {
                model_text: out.net.to_text(),
                trace_csv: out.losses_csv(),
                plot_csv: plot,
                terms: out.net.hidden_units(),
                train_rmse,
                valid_rmse,
                samples: sizes,
                diverged_at: out.diverged_at,
                seed: s.train.seed,
            }
        }
    })
}

pub fn summary(kind: FitKind, f: &Fitted) -> String {
    let kind = kind.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
    let mut out = format!("kind: {kind}\nseed: {}\nterms: {}\n", f.seed, f.terms);
    out.push_str(&format!("train_samples: {}\nvalid_samples: {}\n", f.samples.0, f.samples.1));
    out.push_str(&format!("train_rmse: {}\n", fmt_real(f.train_rmse)));
    out.push_str(&format!("valid_rmse: {}\n", f.valid_rmse.map_or("none".into(), fmt_real)));
    if let Some(e) = f.diverged_at {
        out.push_str(&format!("diverged_at_epoch: {}\n", e + 1));
    }
    out
}

pub fn cmd_fit(cmd: &FitCmd) -> CliResult<String> {
    let f = run_fit(&cmd.fit)?;
    write_atomic(&cmd.out, &f.model_text)?;
    let mut out = summary(cmd.fit.kind, &f);
    out.push_str(&format!("model: {}\n", cmd.out.display()));
    if let Some(t) = &cmd.trace {
        write_atomic(t, &f.trace_csv)?;
        out.push_str(&format!("trace: {}\n", t.display()));
    }
    if let Some(e) = f.diverged_at {
        print!("{out}");
        return Err(CliError::Fit(format!(
            "training diverged in epoch {}; wrote the last good state",
            e + 1
        )));
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct TraceExportCmd {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Plot-ready CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_trace_export(cmd: &TraceExportCmd) -> CliResult<String> {
    let f = run_fit(&cmd.fit)?;
    write_atomic(&cmd.out, &f.plot_csv)?;
    let mut out = summary(cmd.fit.kind, &f);
    out.push_str(&format!("plot: {}\n", cmd.out.display()));
    Ok(out)
}
