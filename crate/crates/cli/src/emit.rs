//! Output formats: canonical JSON, RFC-4180 CSV, atomic file writes.
//!
//! Canonical JSON has object keys in byte order, no insignificant
//! whitespace, and every non-integer number printed like C's `%.12g`, so
//! equal reports produce equal bytes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// `printf("%.12g", x)`.
pub fn format_g12(x: f64) -> String {
    format_g(x, 12)
}

pub fn format_g(x: f64, precision: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let p = precision.max(1);
    // The exponent after rounding to `p` significant digits decides the style.
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = strip_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn number(n: &serde_json::Number) -> String {
    if let Some(i) = n.as_i64() {
        i.to_string()
    } else if let Some(u) = n.as_u64() {
        u.to_string()
    } else {
        format_g12(n.as_f64().expect("finite number"))
    }
}

/// Canonical JSON text of `v`, newline terminated.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{}:",
                    serde_json::to_string(k).expect("string serializes")
                );
                write_value(out, &map[k]);
            }
            out.push('}');
        }
    }
}

/// Rows for CSV output. Cells are JSON values: strings are written as-is,
/// numbers canonically, `null` as an empty field, and nested values as
/// canonical JSON text.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// One row per object, columns in the given order.
    pub fn from_objects(columns: &[&str], objects: &[Value]) -> Self {
        let mut t = Table::new(columns.iter().copied());
        for o in objects {
            t.rows.push(
                columns
                    .iter()
                    .map(|c| o.get(*c).cloned().unwrap_or(Value::Null))
                    .collect(),
            );
        }
        t
    }

    /// Prepends `config.<key>` columns carrying the effective configuration.
    pub fn with_config(mut self, config: &Map<String, Value>) -> Self {
        let mut keys: Vec<&String> = config.keys().collect();
        keys.sort();
        let mut header: Vec<String> = keys.iter().map(|k| format!("config.{k}")).collect();
        header.append(&mut self.header);
        self.header = header;
        for row in &mut self.rows {
            let mut full: Vec<Value> = keys.iter().map(|k| config[*k].clone()).collect();
            full.append(row);
            *row = full;
        }
        self
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .quote_style(csv::QuoteStyle::Necessary)
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell)).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Io(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => number(n),
        Value::Bool(b) => b.to_string(),
        other => canonical_json(other).trim_end().to_string(),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let ctx = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(ctx)?;
    tmp.write_all(contents).map_err(ctx)?;
    tmp.as_file().sync_all().map_err(ctx)?;
    tmp.persist(path).map_err(|e| ctx(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn g_format_matches_printf() {
        // reference strings from C printf("%.12g")
        let cases = [
            (0.625, "0.625"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e20, "1e+20"),
            (0.0001, "0.0001"),
            (0.00001, "1e-05"),
            (1.5e-5, "1.5e-05"),
            (2.87094458799e-21, "2.87094458799e-21"),
            (999999999999.5, "1e+12"),
            (0.1 + 0.2, "0.3"),
            (std::f64::consts::PI, "3.14159265359"),
            (1e100, "1e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g12(x), want, "{x:e}");
        }
    }

    #[test]
    fn canonical_json_sorts_and_formats() {
        let v = json!({"b": 1, "a": [0.5, 2.0, null, "x\"y"], "c": {"z": true, "y": 1e-7}});
        assert_eq!(
            canonical_json(&v),
            "{\"a\":[0.5,2,null,\"x\\\"y\"],\"b\":1,\"c\":{\"y\":1e-07,\"z\":true}}\n"
        );
        // integral floats come back as integers; everything else is unchanged
        let parsed: Value = serde_json::from_str(&canonical_json(&v)).unwrap();
        assert_eq!(
            parsed,
            json!({"b": 1, "a": [0.5, 2, null, "x\"y"], "c": {"z": true, "y": 1e-7}})
        );
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(["name", "value"]);
        t.rows.push(vec![json!("plain"), json!(0.25)]);
        t.rows.push(vec![json!("has,comma"), json!("say \"hi\"")]);
        t.rows.push(vec![json!([1, 2]), Value::Null]);
        assert_eq!(
            t.to_csv().unwrap(),
            "name,value\r\nplain,0.25\r\n\"has,comma\",\"say \"\"hi\"\"\"\r\n\"[1,2]\",\r\n"
        );
    }

    #[test]
    fn config_columns_lead() {
        let mut cfg = Map::new();
        cfg.insert("seed".into(), json!(7));
        cfg.insert("command".into(), json!("x"));
        let t = Table::from_objects(&["v"], &[json!({"v": 1})]).with_config(&cfg);
        assert_eq!(t.header, ["config.command", "config.seed", "v"]);
        assert_eq!(t.rows[0], vec![json!("x"), json!(7), json!(1)]);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
