//! JSON emission with 17 significant digits and parsing with positioned
//! diagnostics.

use std::io;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::CliError;

/// Formats `v` like C's `%.17g`: 17 significant digits, trailing zeros
/// trimmed, scientific notation outside `1e-4 <= |v| < 1e17`. Non-finite
/// values become `null`.
pub fn format_f64(v: f64) -> String {
    if !v.is_finite() {
        return "null".to_owned();
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".to_owned()
        } else {
            "0".to_owned()
        };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty printer whose floats go through [`format_f64`].
pub struct DigitsFormatter {
    inner: PrettyFormatter<'static>,
}

impl DigitsFormatter {
    pub fn new() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Default for DigitsFormatter {
    fn default() -> Self {
        Self::new()
    }
}

impl Formatter for DigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes with [`DigitsFormatter`] and a trailing newline.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, DigitsFormatter::new());
    value.serialize(&mut ser).expect("report types serialize infallibly");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Parses a document, reporting syntax and schema errors with their line
/// and column.
pub fn parse<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let kind = match e.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => "malformed JSON",
            _ => "invalid document",
        };
        let text = e.to_string();
        let detail = text.rsplit_once(" at line ").map_or(text.as_str(), |(head, _)| head);
        CliError::Input(format!("{source}:{}:{}: {kind}: {detail}", e.line(), e.column()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(3.0), "3");
        assert_eq!(format_f64(-2.25), "-2.25");
        assert_eq!(format_f64(4.088878631591797e-05), "4.0888786315917969e-05");
        assert_eq!(format_f64(1e20), "1e+20");
        assert_eq!(format_f64(f64::NAN), "null");
        assert_eq!(format_f64(1.0 / 3.0), "0.33333333333333331");
    }

    #[test]
    fn round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            2.0f64.sqrt(),
            1e-300,
            123456.789,
            6.02214076e23,
            -7.5e-7,
        ] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn floats_in_documents() {
        let s = to_string(&serde_json::json!({"a": 0.1, "b": [1.5, 2], "c": "x"}));
        assert_eq!(
            s,
            "{\n  \"a\": 0.10000000000000001,\n  \"b\": [\n    1.5,\n    2\n  ],\n  \"c\": \"x\"\n}\n"
        );
    }

    #[test]
    fn positions_in_errors() {
        let err = parse::<serde_json::Value>("{\n  \"a\": [1, 2,\n}", "in.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("in.json:3:1: malformed JSON"), "{msg}");
    }
}
