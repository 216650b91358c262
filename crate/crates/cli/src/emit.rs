//! Deterministic output: canonical JSON (fixed 17-significant-digit float
//! formatting, struct-ordered keys) and RFC-4180 CSV with the same float
//! format.  Identical inputs produce byte-identical artifacts.

use std::io::{self, Write};

use serde::Serialize;

/// 17 significant digits, scientific; enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct CanonicalFormatter;

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize to the canonical JSON byte form (newline terminated).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

/// Render a header row plus records as RFC-4180 CSV bytes.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(w.into_inner().expect("csv writer over Vec cannot fail"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_scientific() {
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn canonical_json_formats_floats() {
        #[derive(Serialize)]
        struct S {
            x: f64,
            n: u32,
        }
        let bytes = to_canonical_json(&S { x: 0.5, n: 3 }).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "{\"x\":5.0000000000000000e-1,\"n\":3}\n"
        );
    }

    #[test]
    fn csv_quotes_embedded_separators() {
        let bytes = to_csv(&["a", "b"], &[vec!["1;2".into(), "x,y".into()]]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("\"x,y\""));
    }
}
