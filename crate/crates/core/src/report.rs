//! Report serialization helpers shared by the library and the CLI.

use serde_json::Value;

/// Significant digits used for every number written to a report.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Decimal text with at most 12 significant digits.
pub fn format_sig(x: f64) -> String {
    let r = round_sig(x);
    if r.is_finite() {
        format!("{r}")
    } else {
        format!("{x}")
    }
}

/// Rounds every number inside a JSON value in place.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(x) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                        *n = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes `value` as pretty JSON with rounded numbers.
pub fn to_report_json<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    serde_json::to_string_pretty(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(123456789.123456), "123456789.123");
    }

    #[test]
    fn rounds_nested_json() {
        let mut v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 1.0 / 7.0}, "s": "x"});
        round_json(&mut v);
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["a"][1].as_u64().unwrap(), 2);
        assert_eq!(v["b"]["c"].as_f64().unwrap(), 0.142857142857);
    }
}
