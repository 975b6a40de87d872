//! Plain-text emission helpers shared by the CLI and the trajectory export.

use serde_json::{Map, Value};

/// Schema tag carried by every JSON document.
pub const JSON_SCHEMA: &str = "specsing/1";

/// 17 significant digits, locale independent, round-trips through `f64::from_str`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Wrap a payload object with the schema tag.
pub fn json_document(command: &str, payload: Value) -> Value {
    let mut doc = Map::new();
    doc.insert("schema".into(), Value::from(JSON_SCHEMA));
    doc.insert("command".into(), Value::from(command));
    doc.insert("data".into(), payload);
    Value::Object(doc)
}
