//! All file and stdout writes go through [`Writer`], which runs on the main
//! thread after the parallel work has finished.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use crate::error::{CliError, CliResult};

/// Fixed six-decimal rendering; negative zero prints as zero.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let encode = |e: csv::Error| CliError::Config(format!("csv encoding: {e}"));
        w.write_record(&self.header).map_err(encode)?;
        for row in &self.rows {
            w.write_record(row).map_err(encode)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Config(format!("csv encoding: {e}")))
    }
}

/// Writes into `dir` when set, otherwise the primary table goes to stdout.
pub struct Writer {
    dir: Option<PathBuf>,
}

impl Writer {
    pub fn new(dir: Option<PathBuf>) -> CliResult<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(Self { dir })
    }

    /// Primary output: `<dir>/<name>` or stdout.
    pub fn primary(&self, name: &str, table: &Table) -> CliResult<()> {
        let bytes = table.to_bytes()?;
        match &self.dir {
            Some(_) => self.file(name, &bytes),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(&bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io("<stdout>", e))
            }
        }
    }

    /// Secondary output; silently dropped without an output directory.
    pub fn secondary(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        if self.dir.is_some() {
            self.file(name, bytes)
        } else {
            log::info!("no --out directory, not writing {name}");
            Ok(())
        }
    }

    pub fn secondary_table(&self, name: &str, table: &Table) -> CliResult<()> {
        self.secondary(name, &table.to_bytes()?)
    }

    fn file(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let dir = self.dir.as_ref().expect("checked by caller");
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}
