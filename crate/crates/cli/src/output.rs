//! CSV/JSON rendering and all-or-nothing file output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

/// Nine significant digits, fixed layout.
pub fn num(x: f64) -> String {
    // Print negative zero as zero.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

/// Two decimals for dB summaries, without a sign on values that round to 0.
pub fn db2(x: f64) -> String {
    let x = if x.abs() < 0.005 { 0.0 } else { x };
    format!("{x:.2}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self {
            text: format!("{header}\n"),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn numbers(&mut self, values: &[f64]) {
        let fields: Vec<String> = values.iter().map(|&v| num(v)).collect();
        self.row(&fields);
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Files staged in memory and written together once the command succeeds.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.files.push((path.into(), contents));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    /// Writes every file to a temporary sibling first and renames only after
    /// all of them were written, so a failure leaves no partial outputs.
    pub fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, contents) in self.files {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            std::io::Write::write_all(&mut tmp, contents.as_bytes())
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path)
                .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
        }
        Ok(())
    }
}

/// Fixed-width text table for stdout.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, f) in width.iter_mut().zip(r) {
            *w = (*w).max(f.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, fields: &[&str]| {
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{f:>w$}", w = width[k]);
        }
        out.push('\n');
    };
    line(&mut out, header);
    for r in rows {
        let fields: Vec<&str> = r.iter().map(String::as_str).take(cols).collect();
        line(&mut out, &fields);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(num(1.0), "1.00000000e0");
        assert_eq!(num(-0.000123456789123), "-1.23456789e-4");
        assert_eq!(num(299792458.0), "2.99792458e8");
        assert_eq!(num(-0.0), "0.00000000e0");
        assert_eq!(db2(-1e-9), "0.00");
        assert_eq!(db2(-3.456), "-3.46");
    }

    #[test]
    fn commit_writes_all() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::default();
        out.add(dir.path().join("a.csv"), "x\n".into());
        out.add(dir.path().join("sub/b.json"), "{}\n".into());
        out.commit().unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x\n");
        assert_eq!(std::fs::read_to_string(dir.path().join("sub/b.json")).unwrap(), "{}\n");
    }
}
