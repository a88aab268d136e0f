//! CSV formatting, hashing and run manifests.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Twelve significant digits. Plain decimal for moderate magnitudes,
/// scientific otherwise, and never `-0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Accumulates a CSV table in memory.
pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut csv = Csv {
            writer: csv::Writer::from_writer(Vec::new()),
        };
        csv.row(header);
        csv
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.writer
            .write_record(cells.iter().map(AsRef::as_ref))
            .expect("writing to memory cannot fail");
    }

    pub fn numbers(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
        self.row(&cells);
    }

    pub fn into_string(self) -> String {
        let bytes = self
            .writer
            .into_inner()
            .expect("flushing to memory cannot fail");
        String::from_utf8(bytes).expect("cells are UTF-8")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    s.into()
}

/// Everything needed to regenerate an output file.
pub fn manifest(command: &[String], config: &str, output: &str) -> serde_json::Value {
    serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "config_sha256": sha256_hex(config.as_bytes()),
        "output_sha256": sha256_hex(output.as_bytes()),
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path.display().to_string(), e))
}
