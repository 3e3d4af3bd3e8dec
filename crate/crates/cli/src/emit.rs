//! Serialization of records: JSON Lines and region-scan CSV.

use std::io::Write;
use std::path::Path;

use hyperq::inequality_lab::Certificate;
use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 12;
pub const CSV_HEADER: &str = "p,q,t,threshold,estimate,witness_ratio,verdict";

/// `x` rounded to 12 significant digits and printed positionally (trailing
/// zeros kept); integers print without a fraction, very large or small
/// magnitudes in scientific notation.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{x:.0}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{}{}", digits, "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    };
    format!("{sign}{body}")
}

fn round(x: f64) -> f64 {
    // `+ 0.0` folds negative zero
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse::<f64>().unwrap_or(x) + 0.0
}

/// Rounds every floating-point number in `v` to 12 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

pub fn json_lines(records: &[Value]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&round_floats(r.clone())).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn certificate_csv(certs: &[Certificate]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in certs {
        for e in &c.entries {
            let t = e.times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let verdict = serde_json::to_value(e.verdict).expect("verdict");
            let cols = [
                format_float(e.p),
                format_float(e.q),
                format_float(t),
                format_float(e.threshold),
                format_float(e.estimate),
                format_float(e.witness_ratio),
                verdict.as_str().unwrap_or_default().to_string(),
            ];
            out.push_str(&cols.join(","));
            out.push('\n');
        }
    }
    out
}

/// Writes to `path`, or stdout when `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(2.0f64.ln()), "0.693147180560");
        assert_eq!(format_float((1.0f64 / 3.0).sqrt()), "0.577350269190");
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(-4.0), "-4");
        assert_eq!(format_float(1.0 + 3e-13), "1.00000000000");
        assert_eq!(format_float(0.1 * 3.0), "0.300000000000");
        assert_eq!(format_float(123.456), "123.456000000");
        assert_eq!(format_float(-0.00012), "-0.000120000000000");
        assert_eq!(format_float(1.5e-9), "1.50000000000e-9");
        assert_eq!(format_float(9.9999999999999), "10.0000000000");
    }

    #[test]
    fn rounding_json() {
        let v = round_floats(serde_json::json!({ "a": [0.1234567890123456, 3], "b": 1.0 }));
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.123456789012);
        assert_eq!(v["a"][1].as_u64().unwrap(), 3);
        assert_eq!(serde_json::to_string(&round_floats(serde_json::json!(-0.0))).unwrap(), "0.0");
    }

    #[test]
    fn empty_csv_has_header() {
        assert_eq!(certificate_csv(&[]), format!("{CSV_HEADER}\n"));
    }
}
