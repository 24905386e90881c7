//! Structured run reports and their deterministic serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub scenario: Value,
    pub version: String,
    /// Booleans decide pass/fail; strings and lists are informational.
    pub verdicts: BTreeMap<String, Value>,
    pub dims: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    pub best_fit_scalars: BTreeMap<String, f64>,
    pub timings_ms: BTreeMap<String, f64>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::invalid(format!("unknown format `{other}` (json, text)"))),
        }
    }
}

impl Report {
    pub fn new(scenario: Value, seed: u64) -> Self {
        Self {
            scenario,
            version: VERSION.to_string(),
            seed,
            ..Default::default()
        }
    }

    pub fn verdict(&mut self, name: impl Into<String>, v: impl Into<Value>) {
        self.verdicts.insert(name.into(), v.into());
    }

    pub fn dim(&mut self, name: impl Into<String>, v: impl Into<Value>) {
        self.dims.insert(name.into(), v.into());
    }

    /// Residuals are norms; negative zero is folded to zero.
    pub fn residual(&mut self, name: impl Into<String>, v: f64) {
        self.residuals.insert(name.into(), v.abs());
    }

    pub fn scalar(&mut self, name: impl Into<String>, v: f64) {
        self.best_fit_scalars.insert(name.into(), v);
    }

    /// True when every boolean verdict holds.
    pub fn pass(&self) -> bool {
        self.verdicts.values().all(|v| v.as_bool() != Some(false))
    }

    pub fn failed_verdicts(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| v.as_bool() == Some(false))
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// Every residual must be finite and non-negative.
    pub fn check(&self) -> Result<()> {
        for (k, v) in &self.residuals {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Numerical(format!("residual `{k}` is {v}")));
            }
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report fields serialize")
    }

    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(&self.to_value()),
            Format::Text => self.to_text(),
        }
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let name = self.scenario.get("name").and_then(Value::as_str).unwrap_or("?");
        let kind = self.scenario.get("kind").and_then(Value::as_str).unwrap_or("?");
        let _ = writeln!(out, "scenario {name} ({kind}), seed {}, version {}", self.seed, self.version);
        let _ = writeln!(out, "verdicts:");
        for (k, v) in &self.verdicts {
            let shown = match v.as_bool() {
                Some(true) => "PASS".to_string(),
                Some(false) => "FAIL".to_string(),
                None => compact(v),
            };
            let _ = writeln!(out, "  {k:<44} {shown}");
        }
        let sections: [(&str, Vec<(&String, String)>); 4] = [
            ("dims", self.dims.iter().map(|(k, v)| (k, compact(v))).collect()),
            ("residuals", self.residuals.iter().map(|(k, v)| (k, number(*v))).collect()),
            ("best_fit_scalars", self.best_fit_scalars.iter().map(|(k, v)| (k, number(*v))).collect()),
            ("timings_ms", self.timings_ms.iter().map(|(k, v)| (k, number(*v))).collect()),
        ];
        for (title, rows) in sections {
            if rows.is_empty() {
                continue;
            }
            let _ = writeln!(out, "{title}:");
            for (k, v) in rows {
                let _ = writeln!(out, "  {k:<44} {v}");
            }
        }
        let _ = writeln!(out, "result: {}", if self.pass() { "PASS" } else { "FAIL" });
        out
    }
}

/// Shortest round-trip decimal; integral values print without a fraction
/// and non-finite values print as `null`.
pub fn number(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let s = format!("{x:e}");
    let plain = format!("{x}");
    if plain.len() <= s.len() {
        plain
    } else {
        s
    }
}

fn compact(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, None, 0);
    out
}

/// Pretty JSON with sorted keys (maps are ordered) and the number format of
/// [`number`].
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, Some(2), 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: Option<usize>, level: usize) {
    let (nl, pad, pad_in, sep) = match indent {
        Some(w) => ("\n", " ".repeat(w * level), " ".repeat(w * (level + 1)), ": "),
        None => ("", String::new(), String::new(), ": "),
    };
    let item_sep = if indent.is_some() { "," } else { ", " };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&number(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|x| !x.is_array() && !x.is_object());
            if flat || indent.is_none() {
                out.push('[');
                for (k, x) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, None, 0);
                }
                out.push(']');
                return;
            }
            out.push('[');
            out.push_str(nl);
            for (k, x) in items.iter().enumerate() {
                out.push_str(&pad_in);
                write_value(out, x, indent, level + 1);
                if k + 1 < items.len() {
                    out.push_str(item_sep);
                }
                out.push_str(nl);
            }
            out.push_str(&pad);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            out.push_str(nl);
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad_in);
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(sep);
                write_value(out, &map[*key], indent, level + 1);
                if k + 1 < keys.len() {
                    out.push_str(item_sep);
                }
                out.push_str(nl);
            }
            out.push_str(&pad);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn numbers() {
        assert_eq!(number(0.0), "0");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(3.0), "3");
        assert_eq!(number(0.5), "0.5");
        assert_eq!(number(1e-15), "1e-15");
        assert_eq!(number(f64::NAN), "null");
        let x = 0.1 + 0.2;
        assert_eq!(number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn keys_sorted_and_stable() {
        let v = json!({"b": 1.0, "a": [1, 2], "c": {"z": 0.25, "y": null}});
        let s = to_json(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("\"b\": 1"));
        assert_eq!(s, to_json(&v));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["c"]["z"], json!(0.25));
    }

    #[test]
    fn residual_zero_is_integer() {
        let mut r = Report::new(json!({"name": "x", "kind": "lie_closure"}), 1);
        r.residual("r", 0.0);
        r.verdict("ok", true);
        let s = r.emit(Format::Json);
        assert!(s.contains("\"r\": 0\n") || s.contains("\"r\": 0,"));
        assert!(r.pass());
        r.verdict("bad", false);
        assert!(!r.pass());
        assert_eq!(r.failed_verdicts(), vec!["bad"]);
        assert!(r.emit(Format::Text).contains("FAIL"));
    }
}
