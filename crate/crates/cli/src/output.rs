use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use spectral_drop::io::format_real;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// CSV table with a fixed header; reals use 17 significant digits.
#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// One CSV cell.
pub enum Cell {
    Real(f64),
    Int(usize),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format_real(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row.iter().map(Cell::render).collect());
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

/// Files produced by a run, kept in memory until the run succeeds.
#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    pub fn table(&mut self, name: &str, t: &Table) {
        self.add(name, t.render());
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .context("artifact path has no file name")?;
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct ArtifactEntry<'a> {
    name: &'a str,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    status: &'a str,
    error: Option<String>,
    config_sha256: String,
    seed: u64,
    threads: usize,
    artifacts: Vec<ArtifactEntry<'a>>,
    config: serde_json::Value,
}

/// What the manifest records about a run.
pub struct RunInfo<'a> {
    pub command: &'a str,
    pub config_text: &'a str,
    pub seed: u64,
    pub threads: usize,
}

/// Writes every artifact, a byte copy of the config, and the manifest.
pub fn commit(
    dir: &Path,
    info: &RunInfo<'_>,
    artifacts: &Artifacts,
    error: Option<String>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for (name, bytes) in &artifacts.files {
        let p = dir.join(name);
        write_atomic(&p, bytes)?;
        written.push(p);
    }
    let p = dir.join("config.json");
    write_atomic(&p, info.config_text.as_bytes())?;
    written.push(p);
    let config: serde_json::Value = serde_json::from_str(info.config_text)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: info.command,
        status: if error.is_some() { "solver_error" } else { "ok" },
        error,
        config_sha256: sha256_hex(info.config_text.as_bytes()),
        seed: info.seed,
        threads: info.threads,
        artifacts: artifacts
            .files
            .iter()
            .map(|(name, bytes)| ArtifactEntry {
                name,
                sha256: sha256_hex(bytes),
            })
            .collect(),
        config,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let p = dir.join("manifest.json");
    write_atomic(&p, text.as_bytes())?;
    written.push(p);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rendering() {
        let mut t = Table::new(&["k", "lambda", "note"]);
        t.push(vec![1usize.into(), 0.1.into(), "a,b".into()]);
        assert_eq!(t.render(), "k,lambda,note\n1,1.0000000000000001e-1,\"a,b\"\n");
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
