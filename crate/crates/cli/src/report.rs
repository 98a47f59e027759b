//! Report records and their JSON-lines / long-CSV rendering.
//!
//! The first line of every report is `format=1`. JSON records have sorted
//! keys; `timing_ms` appears only when timings are requested, so the rest of
//! the output is byte-identical across runs and thread counts.

use serde_json::{Map, Value};

pub const FORMAT_HEADER: &str = "format=1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub index: usize,
    pub command: String,
    pub status: Status,
    pub fields: Map<String, Value>,
    pub timing_ms: Option<f64>,
}

impl Record {
    pub fn new(index: usize, command: &str) -> Self {
        Record {
            index,
            command: command.to_string(),
            status: Status::Pass,
            fields: Map::new(),
            timing_ms: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    /// Records a named check; a false check fails the record.
    pub fn check(&mut self, name: &str, ok: bool) {
        self.fields
            .entry("checks")
            .or_insert_with(|| Value::Object(Map::new()))
            .as_object_mut()
            .expect("checks is an object")
            .insert(name.to_string(), Value::Bool(ok));
        if !ok && self.status == Status::Pass {
            self.status = Status::Fail;
        }
    }

    pub fn error(&mut self, message: impl std::fmt::Display) {
        self.status = Status::Error;
        self.set("error", message.to_string());
    }

    fn to_json(&self, timings: bool) -> Value {
        let mut m = self.fields.clone();
        m.insert("index".into(), self.index.into());
        m.insert("command".into(), self.command.clone().into());
        m.insert("status".into(), self.status.as_str().into());
        if timings {
            if let Some(t) = self.timing_ms {
                m.insert("timing_ms".into(), t.into());
            }
        }
        Value::Object(m)
    }
}

/// A JSON number for `v`, or `null` when it is not finite.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Renders records, header first, as JSON lines or as `index,command,status,key,value` rows.
pub fn render(records: &[Record], csv: bool, timings: bool) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    if !csv {
        for r in records {
            out.push_str(&r.to_json(timings).to_string());
            out.push('\n');
        }
        return out;
    }
    let mut w = ::csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "command", "status", "key", "value"])
        .expect("write to memory");
    for r in records {
        let mut fields = Map::new();
        fields.extend(r.fields.clone());
        if timings {
            if let Some(t) = r.timing_ms {
                fields.insert("timing_ms".into(), t.into());
            }
        }
        let mut rows = Vec::new();
        flatten("", &Value::Object(fields), &mut rows);
        let index = r.index.to_string();
        for (k, v) in rows {
            w.write_record([index.as_str(), &r.command, r.status.as_str(), &k, &v])
                .expect("write to memory");
        }
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keys_sorted_and_timings_optional() {
        let mut r = Record::new(3, "lambda");
        r.set("zeta", 1);
        r.set("alpha", "x");
        r.timing_ms = Some(1.5);
        let plain = render(&[r.clone()], false, false);
        assert_eq!(
            plain,
            "format=1\n{\"alpha\":\"x\",\"command\":\"lambda\",\"index\":3,\"status\":\"pass\",\"zeta\":1}\n"
        );
        assert!(render(&[r], false, true).contains("\"timing_ms\":1.5"));
    }

    #[test]
    fn csv_is_long_format() {
        let mut r = Record::new(0, "energy");
        r.set("energy", 15);
        r.check("oracle", false);
        assert_eq!(r.status, Status::Fail);
        let text = render(&[r], true, false);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "format=1");
        assert_eq!(lines[1], "index,command,status,key,value");
        assert_eq!(lines[2], "0,energy,fail,checks.oracle,false");
        assert_eq!(lines[3], "0,energy,fail,energy,15");
    }

    #[test]
    fn non_finite_numbers_are_null() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(0.5), serde_json::json!(0.5));
    }
}
