//! Output plumbing: fixed-layout CSV, the optional JSON mirror, and run
//! manifests with output checksums.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Floating-point cell format: 17 significant digits, so equal values
/// always print identically and re-runs can be byte-compared.
pub fn f17(v: f64) -> String {
    if v.is_finite() {
        format!("{:.16e}", v)
    } else {
        v.to_string()
    }
}

/// One tabular report: a fixed header and stringified rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn json_value(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (key, cell) in self.header.iter().zip(row) {
                    obj.insert(key.clone(), serde_json::Value::String(cell.clone()));
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Where a command's table goes: a file (plus optional JSON mirror and a
/// manifest) or stdout.
pub struct OutputTarget {
    pub out: Option<PathBuf>,
    pub json_mirror: bool,
}

/// Path of the JSON mirror sitting next to a CSV output.
pub fn mirror_path(out: &Path) -> PathBuf {
    let candidate = out.with_extension("json");
    if candidate == out {
        let mut s = out.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    } else {
        candidate
    }
}

/// Path of the manifest recorded beside an output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

impl OutputTarget {
    /// Write the table; returns the list of files written (empty for stdout).
    pub fn write(&self, table: &Table) -> Result<Vec<PathBuf>> {
        match &self.out {
            None => {
                let stdout = std::io::stdout();
                table.write_csv(stdout.lock())?;
                Ok(Vec::new())
            }
            Some(out) => {
                if let Some(parent) = out.parent() {
                    if !parent.as_os_str().is_empty() {
                        std::fs::create_dir_all(parent)
                            .with_context(|| format!("cannot create {}", parent.display()))?;
                    }
                }
                let file = std::fs::File::create(out)
                    .with_context(|| format!("cannot create {}", out.display()))?;
                table.write_csv(file)?;
                let mut written = vec![out.clone()];
                if self.json_mirror {
                    let mpath = mirror_path(out);
                    let json = serde_json::to_string_pretty(&table.json_value())?;
                    std::fs::write(&mpath, json.as_bytes())
                        .with_context(|| format!("cannot write {}", mpath.display()))?;
                    written.push(mpath);
                }
                Ok(written)
            }
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// Record of one CLI invocation: enough to re-run it and to check that the
/// re-run reproduced the same output bytes.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    /// Arguments after the binary name, exactly as invoked.
    pub command: Vec<String>,
    pub config_sha256: String,
    pub seed: u64,
    pub created_unix_ms: u128,
    pub wall_ms: u128,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(
        command: Vec<String>,
        config_bytes: &[u8],
        seed: u64,
        wall_ms: u128,
        outputs: &[PathBuf],
    ) -> Result<Self> {
        let mut records = Vec::with_capacity(outputs.len());
        for path in outputs {
            records.push(OutputRecord {
                path: path.display().to_string(),
                sha256: sha256_file(path)?,
            });
        }
        Ok(RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config_sha256: sha256_hex(config_bytes),
            seed,
            created_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            wall_ms,
            outputs: records,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("malformed manifest {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_digits() {
        assert_eq!(f17(1.0), "1.0000000000000000e0");
        assert_eq!(f17(0.5), "5.0000000000000000e-1");
        assert_eq!(f17(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn mirror_and_manifest_paths() {
        assert_eq!(mirror_path(Path::new("a/report.csv")), PathBuf::from("a/report.json"));
        assert_eq!(mirror_path(Path::new("report.json")), PathBuf::from("report.json.json"));
        assert_eq!(
            manifest_path(Path::new("report.csv")),
            PathBuf::from("report.csv.manifest.json")
        );
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let mut t = Table::new(&["k", "note"]);
        t.push(vec!["1".into(), "a, b".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,note\n1,\"a, b\"\n");
    }
}
