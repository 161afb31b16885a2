//! The result document every subcommand emits, and real-number formatting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scientific notation with 17 significant digits, enough to round-trip any
/// finite `f64`. Exponents always carry a sign, as in `8.3e-1` or `1.0e+0`.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => s,
    }
}

/// A JSON number carrying exactly the digits of [`format_real`]; non-finite
/// values become `null`.
pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let n: Number = serde_json::from_str(&format_real(x)).expect("formatted real is valid JSON");
    Value::Number(n)
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| real(x)).collect())
}

pub fn optional_real(x: Option<f64>) -> Value {
    x.map_or(Value::Null, real)
}

/// `sha256:` followed by the hex digest of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub command: String,
    pub input_digest: String,
    pub payload: Value,
    pub tolerances: BTreeMap<String, Value>,
    pub version: String,
}

impl ResultDocument {
    pub fn new(command: &str, input_digest: String, payload: Value, tolerances: &[(&str, f64)]) -> Self {
        ResultDocument {
            command: command.to_string(),
            input_digest,
            payload,
            tolerances: tolerances.iter().map(|&(k, v)| (k.to_string(), real(v))).collect(),
            version: VERSION.to_string(),
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
