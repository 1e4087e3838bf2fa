//! The result record and its numerals.

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use serde_json::{Map, Number, Value};
use std::str::FromStr;

pub const SCHEMA: u32 = 1;

/// A real as a JSON number with 17 significant digits; `null` if not finite.
pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    if x == 0.0 {
        // keep the sign of zero out of the record
        return Value::Number(Number::from_str("0.0000000000000000e0").unwrap());
    }
    Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is a JSON number"))
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| real(x)).collect())
}

pub fn complex(z: C64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), real(z.re));
    m.insert("im".into(), real(z.im));
    Value::Object(m)
}

pub fn complexes(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex(z)).collect())
}

/// Exact integer of any size.
pub fn integer(n: &BigInt) -> Value {
    Value::Number(Number::from_str(&n.to_string()).expect("integer is a JSON number"))
}

pub fn integer_matrix(e: [&BigInt; 4]) -> Value {
    Value::Array(e.iter().map(|x| integer(x)).collect())
}

/// Builder for the single top-level record a command emits.
#[derive(Debug, Default)]
pub struct Record {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub config: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub certificates: Vec<Value>,
    pub tolerances: Map<String, Value>,
    pub diagnostics: Vec<String>,
}

impl Record {
    pub fn new(command: &str) -> Self {
        Record { command: command.into(), ..Default::default() }
    }

    pub fn input(&mut self, k: &str, v: impl Into<Value>) {
        self.inputs.insert(k.into(), v.into());
    }

    pub fn output(&mut self, k: &str, v: impl Into<Value>) {
        self.outputs.insert(k.into(), v.into());
    }

    pub fn tol(&mut self, k: &str, v: f64) {
        self.tolerances.insert(k.into(), real(v));
    }

    /// The record as a JSON value; `status` is `ok` or `error`.
    pub fn finish(self, status: &str, error: Option<(&str, String)>, elapsed_ms: f64) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), SCHEMA.into());
        m.insert("command".into(), self.command.into());
        m.insert("status".into(), status.into());
        if let Some((kind, message)) = error {
            let mut e = Map::new();
            e.insert("kind".into(), kind.into());
            e.insert("message".into(), message.into());
            m.insert("error".into(), Value::Object(e));
        }
        m.insert("inputs".into(), Value::Object(self.inputs));
        m.insert("config".into(), Value::Object(self.config));
        m.insert("outputs".into(), Value::Object(self.outputs));
        m.insert("certificates".into(), Value::Array(self.certificates));
        m.insert("tolerances".into(), Value::Object(self.tolerances));
        m.insert("diagnostics".into(), self.diagnostics.into());
        let mut t = Map::new();
        t.insert("total_ms".into(), real(elapsed_ms));
        m.insert("timings".into(), Value::Object(t));
        Value::Object(m)
    }
}
