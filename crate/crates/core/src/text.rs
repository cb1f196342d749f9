//! Line-oriented helpers shared by the text model formats.
//!
//! Every format is a header line `pwl-<kind> v1 key=value ...` followed by
//! body lines of whitespace-separated `key=value` fields. Blank lines and
//! lines starting with `#` are ignored. Reals are written with Rust's
//! shortest round-trip formatting, so parameters are recovered bit-exactly.

use std::fmt::Write as _;

use crate::error::{PwlError, Result};

/// Shortest round-trip decimal form, without a trailing `.0`.
pub fn fmt_real(v: f64) -> String {
    let s = format!("{v:?}");
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}

pub(crate) fn fmt_reals(vs: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", fmt_real(*v));
    }
    out
}

pub(crate) fn fmt_indices(vs: &[usize]) -> String {
    vs.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// One significant line of input with its 1-based line number.
#[derive(Debug, Clone)]
pub(crate) struct Line<'a> {
    pub no: usize,
    pub text: &'a str,
}

impl<'a> Line<'a> {
    pub fn error(&self, column: usize, message: impl Into<String>) -> PwlError {
        PwlError::Parse {
            line: self.no,
            column,
            message: message.into(),
        }
    }

    /// Splits into tokens with their 1-based columns.
    pub fn tokens(&self) -> Vec<(usize, &'a str)> {
        let mut out = Vec::new();
        let bytes = self.text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i > start {
                out.push((start + 1, &self.text[start..i]));
            }
        }
        out
    }

    /// Parses `key=value` fields; tokens without `=` are returned with an
    /// empty key.
    pub fn fields(&self) -> Fields<'a> {
        Fields {
            line: self.clone(),
            items: self
                .tokens()
                .into_iter()
                .map(|(col, tok)| match tok.split_once('=') {
                    Some((k, v)) => (col, k, v),
                    None => (col, "", tok),
                })
                .collect(),
        }
    }
}

pub(crate) struct Fields<'a> {
    line: Line<'a>,
    items: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    pub fn word(&self, index: usize) -> Option<&'a str> {
        self.items
            .get(index)
            .filter(|(_, k, _)| k.is_empty())
            .map(|(_, _, v)| *v)
    }

    fn find(&self, key: &str) -> Result<(usize, &'a str)> {
        self.items
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|(c, _, v)| (*c, *v))
            .ok_or_else(|| self.line.error(1, format!("missing field `{key}`")))
    }

    pub fn has(&self, key: &str) -> bool {
        self.items.iter().any(|(_, k, _)| *k == key)
    }

    pub fn str(&self, key: &str) -> Result<&'a str> {
        self.find(key).map(|(_, v)| v)
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        let (col, v) = self.find(key)?;
        parse_real(v).ok_or_else(|| self.line.error(col, format!("`{key}` is not a finite real: `{v}`")))
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>> {
        let (col, v) = self.find(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                parse_real(s).ok_or_else(|| self.line.error(col, format!("`{key}` has a bad entry `{s}`")))
            })
            .collect()
    }

    pub fn count(&self, key: &str) -> Result<usize> {
        let (col, v) = self.find(key)?;
        v.parse()
            .map_err(|_| self.line.error(col, format!("`{key}` is not a count: `{v}`")))
    }

    /// 1-based index list in the text, 0-based in memory.
    pub fn indices(&self, key: &str) -> Result<Vec<usize>> {
        let (col, v) = self.find(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| match s.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(self.line.error(col, format!("`{key}` has a bad index `{s}`"))),
            })
            .collect()
    }

    pub fn sign(&self, key: &str) -> Result<f64> {
        let (col, v) = self.find(key)?;
        match v {
            "1" | "+1" => Ok(1.0),
            "-1" => Ok(-1.0),
            _ => Err(self.line.error(col, format!("`{key}` must be +1 or -1, got `{v}`"))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        let (col, v) = self.find(key)?;
        match v {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(self.line.error(col, format!("`{key}` must be 0 or 1, got `{v}`"))),
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Cursor over the significant lines of a document.
pub(crate) struct Reader<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_no: usize,
}

impl<'a> Reader<'a> {
    pub fn new(text: &'a str) -> Self {
        let lines: Vec<_> = text
            .lines()
            .enumerate()
            .map(|(i, t)| Line { no: i + 1, text: t.trim_end() })
            .filter(|l| {
                let t = l.text.trim_start();
                !t.is_empty() && !t.starts_with('#')
            })
            .collect();
        let last_no = text.lines().count().max(1);
        Self { lines, pos: 0, last_no }
    }

    pub fn next_line(&mut self, what: &str) -> Result<Line<'a>> {
        let line = self.lines.get(self.pos).cloned().ok_or_else(|| PwlError::Parse {
            line: self.last_no,
            column: 1,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.pos += 1;
        Ok(line)
    }

    pub fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    pub fn finish(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            Some(l) => Err(l.error(1, "trailing content after model")),
            None => Ok(()),
        }
    }
}

/// Reads and checks the `pwl-<kind> v1` header, returning its fields.
pub(crate) fn header<'a>(reader: &mut Reader<'a>, kind: &str) -> Result<(Line<'a>, Fields<'a>)> {
    let line = reader.next_line("header")?;
    let fields = line.fields();
    let tag = format!("pwl-{kind}");
    if fields.word(0) != Some(tag.as_str()) {
        return Err(line.error(1, format!("expected header `{tag} v1`")));
    }
    if fields.word(1) != Some("v1") {
        return Err(line.error(tag.len() + 2, "unsupported format version (expected v1)"));
    }
    Ok((line, fields))
}

/// The `<kind>` of a document's header, if it has one.
pub fn sniff_kind(text: &str) -> Option<String> {
    let reader = Reader::new(text);
    let first = reader.peek()?;
    let tok = first.tokens().first()?.1;
    tok.strip_prefix("pwl-").map(str::to_owned)
}

pub(crate) fn expect_dim(line: &Line<'_>, what: &str, found: usize, dim: usize) -> Result<()> {
    if found == dim {
        Ok(())
    } else {
        Err(line.error(1, format!("{what} has length {found}, expected {dim}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_bit_exact() {
        for v in [0.1, -2.5e-300, 1.0 / 3.0, 7.0, -0.0, 1e22] {
            let s = fmt_real(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_real(2.0), "2");
    }

    #[test]
    fn parse_error_carries_line_and_column() {
        let text = "pwl-x v1\n\n  a=1 b=oops\n";
        let mut r = Reader::new(text);
        header(&mut r, "x").unwrap();
        let line = r.next_line("body").unwrap();
        let err = line.fields().real("b").unwrap_err();
        assert_eq!(
            err,
            PwlError::Parse {
                line: 3,
                column: 7,
                message: "`b` is not a finite real: `oops`".into()
            }
        );
    }

    #[test]
    fn sniff() {
        assert_eq!(sniff_kind("# c\npwl-lattice v1 dim=1").as_deref(), Some("lattice"));
        assert_eq!(sniff_kind("hello"), None);
    }
}
