//! CSV tables, output directories and manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::io;

/// 17 significant digits: round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV table with a fixed header.
pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Self {
        Csv {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// A dense matrix as CSV without a header.
pub fn matrix_csv(m: &nalgebra::DMatrix<f64>) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                s.push(',');
            }
            s.push_str(&num(m[(r, c)]));
        }
        s.push('\n');
    }
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records the hash of everything written to it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<(String, String)>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        io::write_bytes(&self.root.join(name), bytes)?;
        self.written.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    /// Writes `manifest.toml` listing the command, the configuration, inputs
    /// with their hashes, derived parameters, results and output hashes.
    pub fn finish(self, manifest: Manifest) -> Result<()> {
        let mut t = Table::new();
        t.insert("command".into(), Value::String(manifest.command.into()));
        t.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        t.insert("config".into(), Value::Table(manifest.config));
        let mut inputs = Table::new();
        for p in &manifest.inputs {
            let bytes = io::read_bytes(p)?;
            inputs.insert(p.display().to_string(), Value::String(sha256_hex(&bytes)));
        }
        t.insert("inputs".into(), Value::Table(inputs));
        t.insert("resolved".into(), Value::Table(pairs(manifest.resolved)));
        t.insert("results".into(), Value::Table(pairs(manifest.results)));
        let outputs: Table = self
            .written
            .iter()
            .map(|(n, h)| (n.clone(), Value::String(h.clone())))
            .collect();
        t.insert("outputs".into(), Value::Table(outputs));
        let text = toml::to_string(&t).map_err(|e| Error::format("manifest", e.to_string()))?;
        io::write_bytes(&self.root.join("manifest.toml"), text.as_bytes())
    }
}

fn pairs(v: Vec<(String, Value)>) -> Table {
    v.into_iter().collect()
}

pub struct Manifest {
    pub command: &'static str,
    pub config: Table,
    pub inputs: Vec<PathBuf>,
    pub resolved: Vec<(String, Value)>,
    pub results: Vec<(String, Value)>,
}

/// `key = value` lines for a summary table.
pub fn key_value_csv(rows: &[(&str, String)]) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(vec!["1".into(), "2".into()]);
        assert_eq!(c.render(), "a,b\n1,2\n");
    }
}
