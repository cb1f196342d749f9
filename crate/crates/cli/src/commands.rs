use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pwlnn::dnn::{count_regions, RegionMethod};
use pwlnn::lp::bounding_box;
use pwlnn::transforms::{
    check_equivalence, cplr_from_consistent, cplr_from_hh, hh_from_cplr, lattice_from_conventional, DEFAULT_PROBES,
    DEFAULT_TOLERANCE,
};
use pwlnn::{fmt_real, BoxDomain, Model};

use crate::error::{CliError, CliResult};
use crate::io::{join_reals, parse_grid, read_csv, read_model, write_atomic};

/// Default half-width of the comparison box for models without a bounded
/// domain.
const DEFAULT_HALF_WIDTH: f64 = 5.0;

fn parse_box(text: &str) -> CliResult<BoxDomain> {
    BoxDomain::parse(text).map_err(|e| CliError::Usage(e.to_string()))
}

/// Grid density keeping comparison sweeps near 10⁵ points. Powers of two
/// plus one put every grid point of an integer box on a dyadic rational.
fn default_per_dim(dim: usize) -> usize {
    match dim {
        0 | 1 => 1025,
        2 => 129,
        3 => 33,
        _ => 9,
    }
}

fn box_text(b: &BoxDomain) -> String {
    b.lower
        .iter()
        .zip(&b.upper)
        .map(|(l, u)| format!("{}:{}", fmt_real(*l), fmt_real(*u)))
        .collect::<Vec<_>>()
        .join(",")
}

/// The explicit box, else a conventional model's bounded domain, else a
/// symmetric default cube.
fn resolve_box(explicit: Option<&str>, model: &Model) -> CliResult<BoxDomain> {
    if let Some(t) = explicit {
        let b = parse_box(t)?;
        if b.dim() != model.dim() {
            return Err(CliError::Input(format!("box has dimension {}, model has {}", b.dim(), model.dim())));
        }
        return Ok(b);
    }
    if let Model::Conventional(m) = model {
        if let Some((lo, hi)) = bounding_box(m.dim(), &m.domain_halfspaces()).map_err(CliError::compute)? {
            return BoxDomain::new(lo, hi).map_err(CliError::compute);
        }
    }
    Ok(BoxDomain::cube(model.dim(), -DEFAULT_HALF_WIDTH, DEFAULT_HALF_WIDTH))
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of input points, one per row.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub points: Option<PathBuf>,
    /// Grid `a:b:step[,a:b:step...]`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_eval(cmd: &EvalCmd) -> CliResult<String> {
    let model = read_model(&cmd.model)?;
    let points = match (&cmd.points, &cmd.grid) {
        (Some(p), _) => read_csv(p)?.rows,
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => return Err(CliError::Usage("give --points or --grid".into())),
    };
    let mut out = String::new();
    if !points.is_empty() {
        let n = model.dim();
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        out.push_str(&format!("{},f\n", names.join(",")));
        for (i, x) in points.iter().enumerate() {
            let y = model
                .eval(x)
                .map_err(|e| CliError::Input(format!("point {}: {e}", i + 1)))?;
            out.push_str(&format!("{},{}\n", join_reals(x), fmt_real(y)));
        }
    }
    match &cmd.out {
        Some(path) => {
            write_atomic(path, &out)?;
            Ok(format!("rows: {}\noutput: {}\n", points.len(), path.display()))
        }
        None => Ok(out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Lattice,
    Cplr,
    Hh,
    Dc,
    Ghh,
}

pub const SUPPORTED_PATHS: &str =
    "conventional->lattice, conventional->cplr, <any>->dc, dc->ghh, cplr->hh, hh->cplr";

#[derive(Debug, Args)]
pub struct ConvertCmd {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub to: Target,
    #[arg(long)]
    pub out: PathBuf,
    /// Box `a:b[,a:b...]` for lattice probing and the equivalence check.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Grid points per axis in the equivalence check.
    #[arg(long)]
    pub per_dim: Option<usize>,
}

pub fn cmd_convert(cmd: &ConvertCmd) -> CliResult<String> {
    let model = read_model(&cmd.model)?;
    let domain = resolve_box(cmd.domain.as_deref(), &model)?;
    let c = CliError::compute;
    let mut notes = String::new();
    let converted = match (&model, cmd.to) {
        (Model::Conventional(m), Target::Lattice) => {
            let l = lattice_from_conventional(m, DEFAULT_PROBES, Some(&domain)).map_err(c)?;
            for (i, s) in l.selection_sets().iter().enumerate() {
                let ids: Vec<String> = s.iter().map(|j| j.to_string()).collect();
                notes.push_str(&format!("S{}: {{{}}}\n", i + 1, ids.join(",")));
            }
            Model::Lattice(l)
        }
        (Model::Conventional(m), Target::Cplr) => Model::Cplr(cplr_from_consistent(m).map_err(c)?),
        (Model::Cplr(m), Target::Hh) => Model::Hh(hh_from_cplr(m)),
        (Model::Hh(m), Target::Cplr) => Model::Cplr(cplr_from_hh(m)),
        (Model::Dc(m), Target::Ghh) => Model::Ghh(m.to_ghh()),
        (m, Target::Dc) => Model::Dc(m.to_dc(Some(&domain)).map_err(c)?),
        (m, t) => {
            let t = t.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
            return Err(CliError::Input(format!(
                "no conversion from {} to {t}; supported: {SUPPORTED_PATHS}",
                m.kind()
            )));
        }
    };
    let per_dim = cmd.per_dim.unwrap_or_else(|| default_per_dim(model.dim()));
    let report =
        check_equivalence(model.as_pwl(), converted.as_pwl(), &domain, per_dim, DEFAULT_TOLERANCE).map_err(c)?;
    let mut out = format!("from: {}\nto: {}\nbox: {}\n", model.kind(), converted.kind(), box_text(&domain));
    out.push_str(&notes);
    out.push_str(&report.to_string());
    if !report.equivalent {
        print!("{out}");
        return Err(CliError::Fit(format!(
            "conversion deviates by {} (tolerance {}); nothing written",
            fmt_real(report.max_deviation),
            fmt_real(report.tolerance)
        )));
    }
    write_atomic(&cmd.out, &converted.to_text())?;
    out.push_str(&format!("model: {}\n", cmd.out.display()));
    Ok(out)
}

#[derive(Debug, Args)]
pub struct ValidateCmd {
    #[arg(long)]
    pub model: PathBuf,
    /// Sample points per facet in the continuity check.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
}

pub fn cmd_validate(cmd: &ValidateCmd) -> CliResult<String> {
    let model = read_model(&cmd.model)?;
    let mut out = format!("kind: {}\ndim: {}\n", model.kind(), model.dim());
    match &model {
        Model::Conventional(m) => {
            let report = m.check_continuity(cmd.samples).map_err(CliError::compute)?;
            out.push_str(&report.to_string());
            out.push_str(&format!("continuous: {}\n", report.is_continuous()));
            if !report.is_continuous() {
                print!("{out}");
                return Err(CliError::Violations);
            }
            let verdict = m.check_consistent_variation().map_err(CliError::compute)?;
            out.push_str(&verdict.to_string());
        }
        other => {
            out.push_str("continuous: true\n");
            out.push_str(&format!("lipschitz_bound: {}\n", fmt_real(other.as_pwl().lipschitz_bound())));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Enumerate,
    Grid,
}

#[derive(Debug, Args)]
pub struct RegionsCmd {
    /// Network file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    pub domain: String,
    #[arg(long, value_enum, default_value_t = Method::Enumerate)]
    pub method: Method,
    /// Grid points per axis for the grid method.
    #[arg(long)]
    pub per_dim: Option<usize>,
    /// Certificate CSV; appended to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_regions(cmd: &RegionsCmd) -> CliResult<String> {
    let model = read_model(&cmd.model)?;
    let Model::Net(net) = &model else {
        return Err(CliError::Input(format!("regions needs a network model, got {}", model.kind())));
    };
    let domain = parse_box(&cmd.domain)?;
    if domain.dim() != net.input_dim() {
        return Err(CliError::Input(format!(
            "box has dimension {}, network has {} inputs",
            domain.dim(),
            net.input_dim()
        )));
    }
    let method = match cmd.method {
        Method::Enumerate => RegionMethod::Enumerate,
        Method::Grid => RegionMethod::Grid { per_dim: cmd.per_dim.unwrap_or_else(|| default_per_dim(domain.dim())) },
    };
    let result = count_regions(net, &domain, method).map_err(CliError::compute)?;
    let n = net.input_dim();
    let mut csv = String::new();
    let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let js: Vec<String> = (1..=n).map(|i| format!("j{i}")).collect();
    csv.push_str(&format!("{},pattern,{},b\n", xs.join(","), js.join(",")));
    for r in &result.regions {
        let pattern: Vec<String> = r
            .pattern
            .layers
            .iter()
            .map(|l| l.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        csv.push_str(&format!(
            "{},{},{},{}\n",
            join_reals(&r.point),
            pattern.join(";"),
            join_reals(&r.map.jacobian),
            fmt_real(r.map.bias)
        ));
    }
    let method_name = cmd.method.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
    let mut out = format!("method: {method_name}\ncount: {}\n", result.count);
    out.push_str(&format!("bound: {}\n", result.bound.map_or("none".into(), |b| b.to_string())));
    match &cmd.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            out.push_str(&format!("regions: {}\n", path.display()));
        }
        None => {
            out.push('\n');
            out.push_str(&csv);
        }
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct EquivCmd {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long)]
    pub per_dim: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

pub fn cmd_equiv(cmd: &EquivCmd) -> CliResult<String> {
    let a = read_model(&cmd.a)?;
    let b = read_model(&cmd.b)?;
    if a.dim() != b.dim() {
        return Err(CliError::Input(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    let domain = resolve_box(cmd.domain.as_deref(), &a)?;
    let per_dim = cmd.per_dim.unwrap_or_else(|| default_per_dim(a.dim()));
    let report = check_equivalence(a.as_pwl(), b.as_pwl(), &domain, per_dim, cmd.tolerance).map_err(CliError::compute)?;
    let out = format!("a: {}\nb: {}\nbox: {}\n{report}", a.kind(), b.kind(), box_text(&domain));
    if !report.equivalent {
        print!("{out}");
        return Err(CliError::Violations);
    }
    Ok(out)
}
