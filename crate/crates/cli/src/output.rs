//! Input parsing, artifact writing and the exit-code classification.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::manifest::{Input, Manifest};

/// Exit 2 for anything the user can fix in the configuration, exit 1 when a
/// computation fails or a postcondition is violated.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<qdpole::Error> for Failure {
    fn from(e: qdpole::Error) -> Self {
        use qdpole::Error::*;
        match e {
            InvalidInput(_)
            | OutsideChart { .. }
            | UnsupportedOrder { .. }
            | BranchAmbiguity { .. }
            | SingularPoint { .. }
            | ChartTopology(_)
            | MismatchedTree => Failure::Config(e.to_string()),
            Accuracy { .. } | NoConvergence { .. } | EnergyIncrease { .. } | Inconclusive(_) | Recovery(_) => {
                Failure::Runtime(e.to_string())
            }
        }
    }
}

pub fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Reads a JSON document. Syntax errors report line and column; shape errors
/// report the path of the offending key.
pub fn read_json<T: DeserializeOwned>(path: &Path, manifest: &mut Manifest) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| config_error(format!("{}: malformed JSON: {e}", path.display())))?;
    let parsed = serde_path_to_error::deserialize(&value).map_err(|e| {
        let at = e.path().to_string();
        let at = if at == "." { "document root".to_string() } else { format!("`{at}`") };
        config_error(format!("{}: at {at}: {}", path.display(), e.inner()))
    })?;
    manifest.inputs.push(Input {
        path: path.display().to_string(),
        document: value,
    });
    Ok(parsed)
}

/// JSON payload object with the manifest under the key `manifest`.
pub fn document<T: Serialize>(payload: &T, manifest: &Manifest) -> Result<String, Failure> {
    let mut v = serde_json::to_value(payload).map_err(|e| Failure::Runtime(e.to_string()))?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| Failure::Runtime("payload must be a JSON object".into()))?;
    obj.insert(
        "manifest".into(),
        serde_json::to_value(manifest).map_err(|e| Failure::Runtime(e.to_string()))?,
    );
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Failure::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Writes a JSON document to `out`, or to stdout when `out` is `None`.
pub fn emit_json<T: Serialize>(payload: &T, manifest: &mut Manifest, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => {
            manifest.outputs.push(p.display().to_string());
            write_file(p, &document(payload, manifest)?)
        }
        None => {
            print!("{}", document(payload, manifest)?);
            Ok(())
        }
    }
}

/// `foo.svg` -> `foo.svg.manifest.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// `dir/report.csv` + `verdict` -> `dir/report.verdict.json`.
pub fn sibling(path: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

/// 17 significant digits: enough to round-trip every `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table built in memory and written in one piece.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Self, Failure> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).map_err(|e| Failure::Runtime(e.to_string()))?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), Failure> {
        self.writer.write_record(fields).map_err(|e| Failure::Runtime(e.to_string()))
    }

    pub fn write(self, path: &Path) -> Result<(), Failure> {
        let bytes = self.writer.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
        fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}
