//! Result files. Every run writes `<prefix>.config.toml` with the fully
//! resolved configuration; every data file names that sidecar in its header,
//! so `qutrit <command> --config <prefix>.config.toml` reproduces it.

use crate::error::{CliError, Result};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Bumped whenever a column or JSON field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub struct Output {
    dir: PathBuf,
    prefix: String,
    command: &'static str,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    config: String,
    data: &'a T,
}

impl Output {
    pub fn new(dir: &Path, prefix: &str, command: &'static str) -> Result<Self> {
        if prefix.is_empty() || prefix.contains(['/', '\\']) {
            return Err(CliError::config(format!("invalid output prefix '{prefix}'")));
        }
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.display().to_string(), source })?;
        Ok(Self { dir: dir.to_path_buf(), prefix: prefix.to_string(), command, written: Vec::new() })
    }

    fn sidecar_name(&self) -> String {
        format!("{}.config.toml", self.prefix)
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.prefix))
    }

    fn write(&mut self, path: PathBuf, contents: &[u8]) -> Result<()> {
        fs::write(&path, contents).map_err(|source| CliError::Write { path: path.display().to_string(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn config<C: Serialize>(&mut self, config: &C) -> Result<()> {
        let body = toml::to_string_pretty(config).map_err(|e| CliError::config(format!("serializing config: {e}")))?;
        let text = format!(
            "# qutrit {} — rerun with: qutrit {} --config {}\n{body}",
            self.command,
            self.command,
            self.sidecar_name()
        );
        self.write(self.path(".config.toml"), text.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, suffix: &str, data: &T) -> Result<()> {
        let env = Envelope { schema: SCHEMA_VERSION, command: self.command, config: self.sidecar_name(), data };
        let mut text =
            serde_json::to_string_pretty(&env).map_err(|e| CliError::Numerical(format!("serializing output: {e}")))?;
        text.push('\n');
        self.write(self.path(suffix), text.as_bytes())
    }

    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut buf =
            format!("# qutrit {} schema={SCHEMA_VERSION} config={}\n", self.command, self.sidecar_name()).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let err = |e: csv::Error| CliError::Numerical(format!("csv: {e}"));
            w.write_record(header).map_err(err)?;
            for row in rows {
                w.write_record(&row).map_err(err)?;
            }
            w.flush().map_err(|e| CliError::Numerical(format!("csv: {e}")))?;
        }
        self.write(self.path(suffix), &buf)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Shortest round-trip decimal; non-finite values as `inf`, `-inf`, `nan`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
