//! Machine-readable output records.

use cheshire_core::C64;
use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{json, Value};

/// Bumped whenever the layout of any record or CSV changes.
pub const SCHEMA_VERSION: &str = "1.0";

pub type Row = IndexMap<String, Value>;

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub parameters: IndexMap<String, Value>,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
}

impl OutputRecord {
    pub fn new(command: &'static str, parameters: IndexMap<String, Value>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            parameters,
            rows: Vec::new(),
            report: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records are plain data");
        s.push('\n');
        s
    }
}

pub fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Fixed 17-significant-digit form used in every CSV cell.
pub fn number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// CSV with the parameters echoed as leading `# key=value` lines.
pub fn csv(parameters: &IndexMap<String, Value>, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!("# schema_version={SCHEMA_VERSION}\n");
    for (k, v) in parameters {
        let v = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| number(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_significant_digits() {
        assert_eq!(number(0.1), "1.0000000000000001e-1");
        assert_eq!(number(-0.0), "0.0000000000000000e0");
        assert_eq!(number(1.0), "1.0000000000000000e0");
        assert_eq!(number(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn complex_is_an_object() {
        assert_eq!(complex(C64::new(1.5, -2.0)), json!({"re": 1.5, "im": -2.0}));
    }

    #[test]
    fn csv_layout() {
        let mut p = IndexMap::new();
        p.insert("kind".to_string(), json!("qcc"));
        p.insert("theta".to_string(), json!(0.5));
        let text = csv(&p, &["a", "b"], &[vec![1.0, -0.0]]);
        assert_eq!(
            text,
            "# schema_version=1.0\n# kind=qcc\n# theta=0.5\na,b\n1.0000000000000000e0,0.0000000000000000e0\n"
        );
    }
}
