use std::fs;
use std::io::Read;
use std::path::Path;

use pwlnn::affine::cartesian;
use pwlnn::learning::Dataset;
use pwlnn::{fmt_real, Model};

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_model(path: &Path) -> CliResult<Model> {
    Model::from_text(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let fail = |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    fs::write(&tmp, contents).map_err(fail)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

/// Numeric CSV table; a first row that does not parse as numbers is taken
/// as a header.
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_csv(path: &Path) -> CliResult<Table> {
    let mut raw = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut raw))
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let parsed: Result<Vec<f64>, usize> = rec
            .iter()
            .enumerate()
            .map(|(c, s)| s.parse::<f64>().map_err(|_| c))
            .collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => header = Some(rec.iter().map(str::to_owned).collect()),
            Err(c) => {
                let line = rec.position().map_or(i + 1, |p| p.line() as usize);
                return Err(CliError::Input(format!(
                    "{}: line {line}, column {}: `{}` is not a number",
                    path.display(),
                    c + 1,
                    &rec[c]
                )));
            }
        }
    }
    Ok(Table { header, rows })
}

/// Inputs are every column but the last, which is the target.
pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let table = read_csv(path)?;
    let width = table.rows.first().map_or(0, Vec::len);
    if width < 2 && !table.rows.is_empty() {
        return Err(CliError::Input(format!(
            "{}: need at least one input column and a target column",
            path.display()
        )));
    }
    let (inputs, targets): (Vec<Vec<f64>>, Vec<f64>) = table
        .rows
        .into_iter()
        .map(|mut r| {
            let y = r.pop().unwrap_or(f64::NAN);
            (r, y)
        })
        .unzip();
    let data = Dataset::new(inputs, targets).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    match table.header {
        Some(mut names) => {
            names.pop();
            data.with_names(names).map_err(|e| CliError::Input(e.to_string()))
        }
        None => Ok(data),
    }
}

/// Parses `a:b:step[,a:b:step...]` into grid points, first axis slowest.
pub fn parse_grid(text: &str) -> CliResult<Vec<Vec<f64>>> {
    let bad = |m: String| CliError::Usage(format!("bad grid `{text}`: {m}"));
    let mut axes = Vec::new();
    for part in text.split(',') {
        let nums: Vec<f64> = part
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number"))))
            .collect::<CliResult<_>>()?;
        let [a, b, step] = nums[..] else {
            return Err(bad(format!("component `{part}` is not a:b:step")));
        };
        if !(a.is_finite() && b.is_finite() && step.is_finite() && step > 0.0 && a <= b) {
            return Err(bad("need finite a <= b and step > 0".into()));
        }
        let span = (b - a) / step;
        let n = span.round();
        if (span - n).abs() > 1e-9 * span.max(1.0) {
            return Err(bad(format!("step {step} does not divide {a}:{b}")));
        }
        if n > 1e7 {
            return Err(bad("too many points".into()));
        }
        let n = n as usize;
        axes.push(if n == 0 { vec![a] } else { pwlnn::affine::linspace(a, b, n + 1) });
    }
    Ok(cartesian(&axes))
}

pub fn join_reals(vs: &[f64]) -> String {
    vs.iter().map(|v| fmt_real(*v)).collect::<Vec<_>>().join(",")
}
