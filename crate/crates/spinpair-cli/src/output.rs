use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use spinpair::experiments::SweepResult;

use crate::config::Format;

/// Where and how result files are written.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub format: Format,
    /// Timestamp recorded in metadata and file names; `None` for byte-stable output.
    pub timestamp: Option<String>,
}

impl Sink {
    pub fn new(dir: PathBuf, format: Format, deterministic: bool) -> Self {
        let timestamp = (!deterministic).then(|| chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string());
        Self { dir, format, timestamp }
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    /// Writes a table as `<prefix><scheme>_<swept>[_<timestamp>]` in the chosen formats.
    pub fn table(&self, prefix: &str, mut res: SweepResult) -> Result<Vec<PathBuf>> {
        res.metadata.timestamp = self.timestamp.clone();
        for e in &res.errors {
            eprintln!("warning: row {} (param {}) failed: {}", e.row, e.param, e.message);
        }
        let stem = format!("{prefix}{}", res.file_stem());
        let mut out = Vec::new();
        if self.format.csv() {
            out.push(self.write(&format!("{stem}.csv"), &res.to_csv_string()?)?);
        }
        if self.format.json() {
            out.push(self.write(&format!("{stem}.json"), &res.to_json_string()?)?);
        }
        Ok(out)
    }

    /// Writes a file whose name is fixed apart from the timestamp.
    pub fn named(&self, stem: &str, ext: &str, contents: &str) -> Result<PathBuf> {
        let name = match &self.timestamp {
            Some(ts) => format!("{stem}_{ts}.{ext}"),
            None => format!("{stem}.{ext}"),
        };
        self.write(&name, contents)
    }
}

