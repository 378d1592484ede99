//! Run directories: CSV tables, sorted-key JSON and the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Canonical text of a JSON value: keys sorted, two-space indent, trailing newline.
pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// An output directory `<command>_<timestamp>` and the files written into it.
pub struct RunDir {
    path: PathBuf,
    command: String,
    params: Value,
    params_digest: String,
    started_utc: String,
    files: Vec<(String, String, usize)>,
}

impl RunDir {
    pub fn create(out: &Path, command: &str, params: Value) -> Result<Self> {
        fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))?;
        let now = chrono::Utc::now();
        let stamp = now.format("%Y%m%dT%H%M%S%.3fZ").to_string();
        let base = format!("{command}_{stamp}");
        let mut path = out.join(&base);
        let mut k = 1;
        while path.exists() {
            path = out.join(format!("{base}_{k}"));
            k += 1;
        }
        fs::create_dir(&path).with_context(|| format!("cannot create {}", path.display()))?;
        let params_digest = sha256_hex(json_text(&params).as_bytes());
        Ok(RunDir {
            path,
            command: command.to_string(),
            params,
            params_digest,
            started_utc: now.to_rfc3339(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let target = self.path.join(name);
        fs::write(&target, bytes).with_context(|| format!("cannot write {}", target.display()))?;
        self.files.push((name.to_string(), sha256_hex(bytes), bytes.len()));
        Ok(())
    }

    /// Table with a `# schema=` line, a `# params_sha256=` line and a header row.
    pub fn write_csv(&mut self, name: &str, schema: &str, header: &[String], rows: &[Vec<Cell>]) -> Result<()> {
        let mut text = format!("# schema={schema}\n# params_sha256={}\n", self.params_digest);
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<()> {
        self.write(name, json_text(value).as_bytes())
    }

    /// Write `manifest.json` listing every file written so far; `started` marks
    /// the beginning of the command.
    pub fn finish(mut self, seeds: &[u64], exit_code: u8, started: Instant) -> Result<PathBuf> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(name, digest, bytes)| json!({"name": name, "sha256": digest, "bytes": bytes}))
            .collect();
        let manifest = json!({
            "command": self.command,
            "parameters": self.params,
            "params_sha256": self.params_digest,
            "seeds": seeds,
            "version": env!("CARGO_PKG_VERSION"),
            "started_utc": self.started_utc,
            "duration_seconds": started.elapsed().as_secs_f64(),
            "exit_code": exit_code,
            "files": files,
        });
        let target = self.path.join("manifest.json");
        fs::write(&target, json_text(&manifest)).with_context(|| format!("cannot write {}", target.display()))?;
        Ok(std::mem::take(&mut self.path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_digits() {
        assert_eq!(Cell::Num(0.1).render(), "1.0000000000000001e-1");
        assert_eq!(Cell::Num(-2.5).render(), "-2.5000000000000000e0");
        assert_eq!("0.1".parse::<f64>().unwrap(), Cell::Num(0.1).render().parse::<f64>().unwrap());
    }

    #[test]
    fn json_keys_are_sorted() {
        let v = json!({"zeta": 1, "alpha": {"b": 2, "a": 1}});
        assert_eq!(json_text(&v), "{\n  \"alpha\": {\n    \"a\": 1,\n    \"b\": 2\n  },\n  \"zeta\": 1\n}\n");
    }
}
