// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

//! Command results are assembled in memory and written in one go, so a
//! failing run leaves no partial files behind.

use std::fmt::Write as _;
use std::path::Path;

use ndshift::TestReport;

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    /// JSON echoed to standard output unless `--quiet`.
    pub stdout: String,
}

impl Outputs {
    pub fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn reports(&mut self, reports: &[TestReport]) {
        if !reports.is_empty() {
            self.file("reports.jsonl", jsonl(reports));
        }
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        let unwritable = |path: &Path, source| CliError::Unwritable { path: path.to_path_buf(), source };
        std::fs::create_dir_all(dir).map_err(|e| unwritable(dir, e))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| unwritable(&path, e))?;
        }
        Ok(())
    }
}

pub fn jsonl(reports: &[TestReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&r.to_json_line());
        s.push('\n');
    }
    s
}

/// CSV with a header row; reals in shortest round-trip form.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[&dyn std::fmt::Display]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            write!(self.text, "{c}").expect("writing to a String");
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// One-column CSV of a vector.
pub fn column_csv(header: &str, values: &[f64]) -> String {
    let mut c = Csv::new(&[header]);
    for v in values {
        c.row(&[v]);
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_reals() {
        let x = 0.1 + 0.2;
        let text = column_csv("mass", &[x, 1.0, 1e-300]);
        assert!(text.starts_with("mass\n0.30000000000000004\n1\n0.000"));
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, vec![x, 1.0, 1e-300]);
    }

    #[test]
    fn unwritable_directory() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let mut o = Outputs::default();
        o.file("a.csv", "a\n".into());
        let err = o.write_to(&blocker.join("sub")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
