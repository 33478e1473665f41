//! Structured run outputs: a human-readable, machine-parseable key-value
//! document with named sections, and delimiter-separated tables for
//! sweeps. Numbers are printed with 12 significant digits so archived
//! outputs round-trip every tolerance used in verification, and all
//! content is a pure function of the inputs so reruns are byte-identical.

use std::fmt::Write as _;

/// Default manifest timestamp. Wall-clock time would break the guarantee
/// that identical invocations produce identical bytes, so runs carry this
/// fixed value unless the caller supplies one.
pub const EPOCH_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

/// Formats with 12 significant digits, in plain decimal notation for
/// moderate exponents and scientific notation otherwise, trimming
/// trailing zeros either way.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker present");
    let exp: i32 = exp.parse().expect("numeric exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };
    if (-4..12).contains(&exp) {
        let point = exp + 1; // digits before the decimal point
        let mut body = String::new();
        if point <= 0 {
            body.push_str("0.");
            for _ in 0..-point {
                body.push('0');
            }
            body.push_str(&digits);
        } else {
            let point = point as usize;
            body.push_str(&digits[..point.min(digits.len())]);
            for _ in digits.len()..point {
                body.push('0');
            }
            if point < digits.len() {
                body.push('.');
                body.push_str(&digits[point..]);
            }
        }
        if body.contains('.') {
            let trimmed = body.trim_end_matches('0').trim_end_matches('.');
            format!("{sign}{trimmed}")
        } else {
            format!("{sign}{body}")
        }
    } else {
        let trimmed = digits.trim_end_matches('0');
        let (head, tail) = trimmed.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}

/// Metadata embedded in every emitted result document.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    /// Flag/value pairs of the invocation, in a fixed order.
    pub parameters: Vec<(String, String)>,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            timestamp: EPOCH_TIMESTAMP.to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<String>) -> Self {
        self.parameters.push((key.to_string(), value.into()));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn timestamp(mut self, timestamp: &str) -> Self {
        self.timestamp = timestamp.to_string();
        self
    }
}

/// One value in a document: kept as pre-rendered text plus a kind marker
/// so strings are quoted and numbers are not.
enum Value {
    Raw(String),
    Text(String),
}

/// A key-value document with named sections.
pub struct Doc {
    manifest: RunManifest,
    sections: Vec<(String, Vec<(String, Value)>)>,
}

impl Doc {
    pub fn new(manifest: RunManifest) -> Self {
        Self {
            manifest,
            sections: Vec::new(),
        }
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Vec::new()));
        self
    }

    fn push(&mut self, key: &str, value: Value) {
        self.sections
            .last_mut()
            .expect("a section must be opened before adding keys")
            .1
            .push((key.to_string(), value));
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.push(key, Value::Raw(sig12(value)));
        self
    }

    pub fn int(&mut self, key: &str, value: i64) -> &mut Self {
        self.push(key, Value::Raw(value.to_string()));
        self
    }

    pub fn text(&mut self, key: &str, value: &str) -> &mut Self {
        self.push(key, Value::Text(value.to_string()));
        self
    }

    pub fn opt_num(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(v) => self.num(key, v),
            None => self.text(key, "n/a"),
        }
    }

    pub fn opt_int(&mut self, key: &str, value: Option<i64>) -> &mut Self {
        match value {
            Some(v) => self.int(key, v),
            None => self.text(key, "n/a"),
        }
    }

    pub fn nums(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let body = values.iter().map(|&v| sig12(v)).collect::<Vec<_>>().join(", ");
        self.push(key, Value::Raw(format!("[{body}]")));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "[manifest]").unwrap();
        writeln!(out, "command = \"{}\"", self.manifest.command).unwrap();
        writeln!(out, "tool_version = \"{}\"", self.manifest.tool_version).unwrap();
        if let Some(seed) = self.manifest.seed {
            writeln!(out, "seed = {seed}").unwrap();
        }
        writeln!(out, "timestamp = \"{}\"", self.manifest.timestamp).unwrap();
        if !self.manifest.parameters.is_empty() {
            writeln!(out, "\n[manifest.parameters]").unwrap();
            for (key, value) in &self.manifest.parameters {
                writeln!(out, "{key} = {value}").unwrap();
            }
        }
        for (name, entries) in &self.sections {
            writeln!(out, "\n[{name}]").unwrap();
            for (key, value) in entries {
                match value {
                    Value::Raw(v) => writeln!(out, "{key} = {v}").unwrap(),
                    Value::Text(v) => writeln!(out, "{key} = \"{v}\"").unwrap(),
                }
            }
        }
        out
    }
}

/// A delimiter-separated table with the manifest and a trailing summary
/// carried on `#` comment lines.
pub struct Table {
    manifest: RunManifest,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    summary: Vec<(String, String)>,
}

impl Table {
    pub fn new(manifest: RunManifest, header: &[&str]) -> Self {
        Self {
            manifest,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn summary(&mut self, key: &str, value: impl Into<String>) {
        self.summary.push((key.to_string(), value.into()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let m = &self.manifest;
        write!(
            out,
            "# manifest: command={} tool_version={}",
            m.command, m.tool_version
        )
        .unwrap();
        if let Some(seed) = m.seed {
            write!(out, " seed={seed}").unwrap();
        }
        for (key, value) in &m.parameters {
            write!(out, " {key}={value}").unwrap();
        }
        writeln!(out, " timestamp={}", m.timestamp).unwrap();
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        for (key, value) in &self.summary {
            writeln!(out, "# {key} = {value}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_plain_decimals() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1.971), "1.971");
        assert_eq!(sig12(-1.971), "-1.971");
        assert_eq!(sig12(50.0), "50");
        assert_eq!(sig12(0.1 + 0.2), "0.3");
        assert_eq!(sig12(0.000123), "0.000123");
    }

    #[test]
    fn sig12_scientific() {
        assert_eq!(sig12(1.23e-5), "1.23e-5");
        assert_eq!(sig12(1234567890123.0), "1.23456789012e12");
        assert_eq!(sig12(-4.0e20), "-4e20");
    }

    #[test]
    fn sig12_keeps_twelve_digits() {
        assert_eq!(sig12(0.123456789012345), "0.123456789012");
        assert_eq!(sig12(123456789.012345), "123456789.012");
    }

    #[test]
    fn sig12_round_trips_within_tolerance() {
        for &x in &[0.3887, 1.0 / 3.0, 2.23e-7, 41.99999999, 0.999999999999] {
            let parsed: f64 = sig12(x).parse().unwrap();
            assert!((parsed - x).abs() <= 1e-11 * x.abs().max(1.0));
        }
    }

    #[test]
    fn document_renders_sections_in_order() {
        let manifest = RunManifest::new("solve")
            .param("mu", sig12(0.9))
            .seed(42);
        let mut doc = Doc::new(manifest);
        doc.section("solve");
        doc.int("n_p", 9).num("q_np", 0.25).text("note", "ok");
        doc.opt_num("maybe", None);
        let text = doc.render();
        let expect = "[manifest]\n\
                      command = \"solve\"\n\
                      tool_version = \"0.1.0\"\n\
                      seed = 42\n\
                      timestamp = \"1970-01-01T00:00:00Z\"\n\
                      \n[manifest.parameters]\n\
                      mu = 0.9\n\
                      \n[solve]\n\
                      n_p = 9\n\
                      q_np = 0.25\n\
                      note = \"ok\"\n\
                      maybe = \"n/a\"\n";
        assert_eq!(text, expect);
    }

    #[test]
    fn table_renders_manifest_and_summary() {
        let mut table = Table::new(RunManifest::new("sweep"), &["a", "b"]);
        table.row(vec!["1".into(), "2".into()]);
        table.summary("cells", "1");
        let text = table.render();
        assert!(text.starts_with("# manifest: command=sweep"));
        assert!(text.contains("\na,b\n1,2\n"));
        assert!(text.ends_with("# cells = 1\n"));
    }
}
