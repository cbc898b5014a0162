use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use serde_json::json;

use crate::config::RunConfig;

/// Destination for results: stdout, or a directory receiving `<name>.csv`
/// and a `run.json` sidecar.
pub struct Output {
    pub dir: Option<PathBuf>,
}

pub struct Table {
    pub name: &'static str,
    pub comments: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            comments: Vec::new(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn render(&self, hash: &str) -> anyhow::Result<Vec<u8>> {
        let mut out = format!("# config-hash: {hash}\n").into_bytes();
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

impl Output {
    pub fn emit(&self, cfg: &RunConfig, table: &Table) -> anyhow::Result<()> {
        let hash = cfg.hash();
        let bytes = table.render(&hash)?;
        match &self.dir {
            None => std::io::stdout().write_all(&bytes)?,
            Some(dir) => {
                let path = dir.join(format!("{}.csv", table.name));
                self.sidecar(cfg)?;
                std::fs::write(&path, bytes)
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
        }
        Ok(())
    }

    /// Writes `run.json` when an output directory is set.
    pub fn sidecar(&self, cfg: &RunConfig) -> anyhow::Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let doc = json!({ "config": cfg, "config_hash": cfg.hash() });
        let path = dir.join("run.json");
        std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
