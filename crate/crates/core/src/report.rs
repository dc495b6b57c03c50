//! JSON report envelope shared by every CLI command: command echo,
//! input digests, result payload, optional timing, tool version.

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub struct ReportBuilder {
    command: String,
    inputs: Vec<InputDigest>,
    started: Instant,
    timing: bool,
}

impl ReportBuilder {
    pub fn new(command: String, timing: bool) -> Self {
        ReportBuilder {
            command,
            inputs: Vec::new(),
            started: Instant::now(),
            timing,
        }
    }

    pub fn record_input(&mut self, path: &str, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        self.inputs.push(InputDigest {
            path: path.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
    }

    pub fn finish(self, result: Value) -> Report {
        Report {
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            inputs: self.inputs,
            result,
            timing_ms: self.timing.then(|| self.started.elapsed().as_millis()),
        }
    }
}

impl Report {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
