//! Result emission: JSON envelope with provenance (config hash, master
//! seed), the human-readable table on stdout, and CSV export.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const OUT_DIR_ENV: &str = "KEYRATE_OUT_DIR";

#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub config: C,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub result: R,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn config_hash<C: Serialize>(config: &C) -> Result<String, CliError> {
    let json = serde_json::to_string(config)
        .map_err(|e| CliError::internal(format!("config serialization failed: {e}")))?;
    Ok(sha256_hex(json.as_bytes()))
}

/// Resolve an output path against KEYRATE_OUT_DIR when relative.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let path = resolve_out(path);
    let mut json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::internal(format!("serialization failed: {e}")))?;
    json.push('\n');
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::validation(format!("cannot create {parent:?}: {e}")))?;
        }
    }
    fs::write(&path, json)
        .map_err(|e| CliError::validation(format!("cannot write {path:?}: {e}")))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let path = resolve_out(path);
    fs::write(&path, text)
        .map_err(|e| CliError::validation(format!("cannot write {path:?}: {e}")))
}

/// Emit the standard envelope: JSON to `out` when given, table to stdout.
pub fn emit<C: Serialize, R: Serialize>(
    command: &str,
    config: C,
    master_seed: Option<u64>,
    result: R,
    out: Option<&Path>,
    table: &str,
) -> Result<(), CliError> {
    let envelope = Envelope {
        schema_version: crate::schema::SCHEMA_VERSION,
        command: command.to_string(),
        config_hash: config_hash(&config)?,
        config,
        master_seed,
        result,
    };
    if let Some(path) = out {
        write_json(path, &envelope)?;
    }
    println!("{table}");
    println!("config_hash: {}", envelope.config_hash);
    Ok(())
}

pub struct Table {
    rows: Vec<(String, String)>,
}

impl Table {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn row(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.rows.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        self.rows
            .iter()
            .map(|(k, v)| format!("{k:<width$}  {v}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl Default for Table {
    fn default() -> Self {
        Self::new()
    }
}

/// CSV writer: header plus rows, comma-separated, plain `{}` formatting.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}
