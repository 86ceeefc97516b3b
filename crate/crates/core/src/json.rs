//! Numeric output helpers.

use serde_json::{Number, Value};

/// A JSON number carrying 17 significant digits; non-finite values become `null`.
pub fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str::<Number>(&format_17(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// `x` with 17 significant digits in scientific notation.
pub fn format_17(x: f64) -> String {
    format!("{x:.16e}")
}
