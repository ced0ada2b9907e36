use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mechsim::experiment::{schema_line, Summary};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A result table. Floats print at full precision unless `decimals` is set;
/// JSON always keeps full precision.
pub struct Table {
    pub kind: &'static str,
    pub columns: Vec<&'static str>,
    pub decimals: Option<usize>,
    pub rows: Vec<Vec<Value>>,
    pub summary: String,
}

impl Table {
    pub fn new(kind: &'static str, columns: &[&'static str]) -> Self {
        Self {
            kind,
            columns: columns.to_vec(),
            decimals: None,
            rows: Vec::new(),
            summary: String::new(),
        }
    }

    pub fn summarize(&mut self, metric: &str, values: &[f64]) {
        let s = Summary::of(values);
        self.summary = format!(
            "{metric}: mean {:.6} stderr {:.6} over {} trials",
            s.mean, s.stderr, s.count
        );
    }

    fn cell(&self, v: &Value) -> String {
        match (v, self.decimals) {
            (Value::Number(n), Some(d)) if !(n.is_u64() || n.is_i64()) => {
                format!("{:.*}", d, n.as_f64().unwrap_or(f64::NAN))
            }
            (Value::String(s), _) => s.clone(),
            (Value::Null, _) => String::new(),
            (other, _) => other.to_string(),
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => {
                let mut out = schema_line(self.kind);
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(|v| self.cell(v)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                Ok(out)
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> = self
                            .columns
                            .iter()
                            .map(|c| c.to_string())
                            .zip(r.iter().cloned())
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let doc = serde_json::json!({
                    "schema": format!("mechsim {} v1", self.kind),
                    "rows": rows,
                });
                Ok(serde_json::to_string_pretty(&doc)? + "\n")
            }
        }
    }
}

/// Resolves where a result goes: `--out` wins, then the default directory.
pub fn destination(out: Option<PathBuf>, out_dir: Option<PathBuf>, name: &str) -> Option<PathBuf> {
    out.or_else(|| out_dir.map(|d| d.join(name)))
}

/// Writes through a temporary file in the target directory so a failed run
/// leaves nothing behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn emit(table: &Table, format: Format, path: Option<PathBuf>) -> Result<()> {
    let body = table.render(format)?;
    match path {
        Some(p) => {
            write_atomic(&p, &body)?;
            println!("{} -> {}", table.summary, p.display());
        }
        None => {
            print!("{body}");
            if !table.summary.is_empty() {
                eprintln!("{}", table.summary);
            }
        }
    }
    Ok(())
}
