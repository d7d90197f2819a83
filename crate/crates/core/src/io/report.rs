//! Analysis reports as JSON or plain text.
//!
//! A report records where its input came from (with a SHA-256 of the input
//! text) and every flag that influenced the numbers, so two runs with the
//! same inputs serialize identically once the timestamp is switched off.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::ecm::ParameterMode;
use crate::pipeline::{AnalysisSettings, ControlRows};
use crate::stats::{Correction, EtaMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputInfo {
    pub source: String,
    pub sha256: String,
}

impl InputInfo {
    pub fn new(source: impl Into<String>, text: &str) -> Self {
        Self {
            source: source.into(),
            sha256: sha256_hex(text.as_bytes()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flags {
    pub mode: ParameterMode,
    pub yates: bool,
    pub round_counts: bool,
    pub family_size: u32,
    pub correction: Correction,
    pub eta_measure: EtaMeasure,
    pub control_rows: ControlRows,
}

impl Flags {
    pub fn new(mode: ParameterMode, a: &AnalysisSettings) -> Self {
        Self {
            mode,
            yates: a.recipe.yates,
            round_counts: a.recipe.round_counts,
            family_size: a.family_size,
            correction: a.correction,
            eta_measure: a.eta_measure,
            control_rows: a.control_rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: InputInfo,
    pub flags: Flags,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unix_time: Option<u64>,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub name: String,
    pub value: Value,
}

impl Report {
    pub fn new(command: &str, input: InputInfo, flags: Flags, timestamp: bool) -> Self {
        let unix_time = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            input,
            flags,
            unix_time,
            sections: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, value: &impl Serialize) -> serde_json::Result<&mut Self> {
        self.sections.push(Section {
            name: name.into(),
            value: serde_json::to_value(value)?,
        });
        Ok(self)
    }

    pub fn section(&self, name: &str) -> Option<&Value> {
        self.sections.iter().find(|s| s.name == name).map(|s| &s.value)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report values are plain data");
                s.push('\n');
                s
            }
            Format::Text => self.to_text(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.tool, self.version, self.command);
        let _ = writeln!(out, "input: {} (sha256 {})", self.input.source, self.input.sha256);
        let flags = serde_json::to_value(&self.flags).expect("plain data");
        text_value(&mut out, &flags, "flags", 0);
        if let Some(t) = self.unix_time {
            let _ = writeln!(out, "unix_time: {t}");
        }
        for s in &self.sections {
            let _ = writeln!(out);
            text_value(&mut out, &s.value, &s.name, 0);
        }
        out
    }

    pub fn write(&self, path: &Path, format: Format) -> std::io::Result<()> {
        super::write_atomic(path, self.render(format).as_bytes())
    }
}

fn scalar(v: &Value) -> Option<String> {
    Some(match v {
        Value::Null => "none".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::Number(_))) && a.len() <= 8 => {
            format!("[{}]", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
        }
        _ => return None,
    })
}

fn text_value(out: &mut String, v: &Value, key: &str, depth: usize) {
    let pad = "  ".repeat(depth);
    if let Some(s) = scalar(v) {
        let _ = writeln!(out, "{pad}{key}: {s}");
        return;
    }
    let _ = writeln!(out, "{pad}{key}:");
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                text_value(out, x, k, depth + 1);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                text_value(out, x, &format!("[{i}]"), depth + 1);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}
