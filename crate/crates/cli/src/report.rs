use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One check: what was measured against which threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    /// The structural property the check is a discrete proxy for, or "plumbing".
    pub anchor: String,
    pub status: Status,
    pub measured: Value,
    pub threshold: Value,
}

impl CheckRecord {
    pub fn new(id: &str, anchor: &str, ok: bool, measured: Value, threshold: Value) -> CheckRecord {
        CheckRecord {
            check_id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::from_bool(ok),
            measured,
            threshold,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub seed: u64,
    pub n: usize,
    pub version: String,
}

impl EnvStamp {
    pub fn new(seed: u64, n: usize) -> EnvStamp {
        EnvStamp {
            seed,
            n,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// A command's report. Contains no timings, so equal inputs give equal bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub env: EnvStamp,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Report {
    pub fn new(command: &str, env: EnvStamp) -> Report {
        Report {
            command: command.to_string(),
            env,
            checks: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn push(&mut self, c: CheckRecord) {
        self.checks.push(c);
    }

    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.check_id.clone()).collect()
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
    }

    pub fn to_json(&self) -> String {
        polyot::io::to_json_string(self)
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
