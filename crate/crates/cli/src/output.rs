use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use nanophase::{Error, Result};

/// Output directory for one run.
pub struct OutDir {
    root: PathBuf,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, body).map_err(|e| io_err(&p, e))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.text(name, &to_json(value)?)
    }

    /// Writes a CSV from a header and rows of already formatted cells.
    pub fn csv(&self, name: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
        let mut body = header.join(",");
        body.push('\n');
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.text(name, &body)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a C,
    inputs: Vec<InputDigest>,
}

/// Records what produced the outputs: the parsed command (output location
/// and display format excluded), input digests and the tool version.
pub fn write_manifest<C: Serialize>(out: &OutDir, command: &C, inputs: &[PathBuf]) -> Result<()> {
    let inputs = inputs
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| io_err(p, e))?;
            Ok(InputDigest {
                path: p.display().to_string(),
                bytes: bytes.len(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { tool: "nanophase", version: env!("CARGO_PKG_VERSION"), command, inputs };
    out.json("manifest.json", &manifest)
}

/// Shortest round-trip decimal form of a float; empty for missing values.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
