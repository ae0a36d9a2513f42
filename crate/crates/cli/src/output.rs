//! Result files and the run manifest.

use crate::config::{Format, RunConfig};
use serde::Serialize;
use serde_json::Value;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

pub(crate) struct Outputs {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Outputs {
    pub(crate) fn create(cfg: &RunConfig) -> io::Result<Self> {
        fs::create_dir_all(&cfg.params.output_dir)?;
        Ok(Outputs { dir: cfg.params.output_dir.clone(), format: cfg.params.format, written: Vec::new() })
    }

    pub(crate) fn file(&mut self, name: &str) -> io::Result<BufWriter<File>> {
        self.written.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    /// One row per record, as CSV with a header or as JSON lines.
    pub(crate) fn records(&mut self, stem: &str) -> io::Result<Records> {
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        };
        let w = self.file(&format!("{stem}.{ext}"))?;
        Ok(Records { w, format: self.format, header: false })
    }

    /// Writes `manifest.txt`: comment lines with the hash and file list, then the rendered config.
    pub(crate) fn finish(&mut self, cfg: &RunConfig) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join("manifest.txt"))?);
        writeln!(w, "# pinlab manifest v1")?;
        writeln!(w, "# config_hash = {}", cfg.hash())?;
        writeln!(w, "# outputs: {}", self.written.join(" "))?;
        w.write_all(cfg.render().as_bytes())?;
        w.flush()
    }
}

pub(crate) struct Records {
    w: BufWriter<File>,
    format: Format,
    header: bool,
}

impl Records {
    pub(crate) fn write<T: Serialize>(&mut self, rec: &T) -> io::Result<()> {
        let value = serde_json::to_value(rec).map_err(io::Error::other)?;
        match self.format {
            Format::Jsonl => writeln!(self.w, "{value}"),
            Format::Csv => {
                let Value::Object(map) = value else {
                    return Err(io::Error::other("record is not a struct"));
                };
                if !self.header {
                    let keys: Vec<&str> = map.keys().map(String::as_str).collect();
                    writeln!(self.w, "{}", keys.join(","))?;
                    self.header = true;
                }
                let cells: Vec<String> = map.values().map(cell).collect();
                writeln!(self.w, "{}", cells.join(","))
            }
        }
    }

    pub(crate) fn finish(mut self) -> io::Result<()> {
        self.w.flush()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => {
            let text = other.to_string();
            if text.contains(',') { format!("\"{}\"", text.replace('"', "\"\"")) } else { text }
        }
    }
}
