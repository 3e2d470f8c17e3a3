//! Small helpers for reading hand-written JSON inputs with path-qualified errors.

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JsonError {
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

pub(crate) fn schema(path: &str, message: impl Into<String>) -> JsonError {
    JsonError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

pub(crate) fn parse_array(text: &str) -> Result<Vec<Value>, JsonError> {
    let v: Value = serde_json::from_str(text).map_err(|e| JsonError::Syntax(e.to_string()))?;
    match v {
        Value::Array(items) => Ok(items),
        _ => Err(schema("$", "expected an array")),
    }
}

pub(crate) fn object<'a>(
    v: &'a Value,
    path: &str,
    allowed: &[&str],
) -> Result<&'a serde_json::Map<String, Value>, JsonError> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(&format!("{path}.{k}"), "unknown field"));
    }
    Ok(obj)
}

/// `[x_min, y_min, x_max, y_max]` with ordered, finite corners.
pub(crate) fn bbox(v: Option<&Value>, path: &str) -> Result<[f64; 4], JsonError> {
    let v = v.ok_or_else(|| schema(path, "missing field"))?;
    let arr = v
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| schema(path, "expected [x_min, y_min, x_max, y_max]"))?;
    let mut out = [0.0; 4];
    for (i, item) in arr.iter().enumerate() {
        out[i] = item
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| schema(&format!("{path}[{i}]"), "expected a finite number"))?;
    }
    if out[0] > out[2] {
        return Err(schema(path, "x_min > x_max"));
    }
    if out[1] > out[3] {
        return Err(schema(path, "y_min > y_max"));
    }
    Ok(out)
}

pub(crate) fn number_json(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}
