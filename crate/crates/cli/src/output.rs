//! Result rows and their JSON-lines / CSV renderings.

use serde_json::Value;

use crate::config::Format;

/// Ordered key/value record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row(pub Vec<(String, Value)>);

impl Row {
    pub fn new(record: &str) -> Self {
        Row(vec![("record".into(), Value::from(record))])
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.0.push((key.to_string(), value.into()));
    }

    /// Non-finite numbers become `null`.
    pub fn num(&mut self, key: &str, v: f64) {
        self.push(key, num(v));
    }

    pub fn extend(&mut self, other: &Row) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map(num).unwrap_or(Value::Null)
}

pub fn render(rows: &[Row], format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => Ok(render_json(rows)),
        Format::Csv => render_csv(rows),
    }
}

pub fn render_json(rows: &[Row]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push('{');
        for (i, (k, v)) in row.0.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&Value::from(k.as_str()).to_string());
            out.push(':');
            out.push_str(&v.to_string());
        }
        out.push_str("}\n");
    }
    out
}

/// One header over the union of keys, in first-appearance order.
pub fn render_csv(rows: &[Row]) -> anyhow::Result<String> {
    let mut columns: Vec<&str> = Vec::new();
    for row in rows {
        for (k, _) in &row.0 {
            if !columns.contains(&k.as_str()) {
                columns.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&columns)?;
    for row in rows {
        w.write_record(columns.iter().map(|c| match row.get(c) {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
        }))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keeps_key_order_and_nulls_infinities() {
        let mut r = Row::new("x").with("b", 1).with("a", "s");
        r.num("inf", f64::INFINITY);
        assert_eq!(render_json(&[r]), "{\"record\":\"x\",\"b\":1,\"a\":\"s\",\"inf\":null}\n");
    }

    #[test]
    fn csv_uses_union_of_columns() {
        let rows = [Row::new("a").with("x", 1.5), Row::new("b").with("y", "q,r")];
        assert_eq!(render_csv(&rows).unwrap(), "record,x,y\na,1.5,\nb,,\"q,r\"\n");
    }
}
