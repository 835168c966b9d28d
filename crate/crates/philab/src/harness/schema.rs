//! Minimal JSON-schema validation for the report files.
//!
//! Supports the subset the shipped schema uses: `type`, `properties`,
//! `required`, `additionalProperties` (boolean), `items`, `enum`, `const`,
//! and `oneOf`. Enough to pin the report layout in tests without pulling a
//! full validator.

use serde_json::Value;

/// Validate `instance` against `schema`; returns the first violation as a
/// path-qualified message.
pub fn validate(schema: &Value, instance: &Value) -> Result<(), String> {
    check(schema, instance, "$")
}

fn check(schema: &Value, instance: &Value, path: &str) -> Result<(), String> {
    let obj = match schema.as_object() {
        Some(o) => o,
        None => return Err(format!("{path}: schema node is not an object")),
    };

    if let Some(variants) = obj.get("oneOf").and_then(Value::as_array) {
        let mut errors = Vec::new();
        let mut matches = 0;
        for (i, variant) in variants.iter().enumerate() {
            match check(variant, instance, path) {
                Ok(()) => matches += 1,
                Err(e) => errors.push(format!("variant {i}: {e}")),
            }
        }
        return if matches == 1 {
            Ok(())
        } else {
            Err(format!(
                "{path}: matched {matches} of {} oneOf variants ({})",
                variants.len(),
                errors.join("; ")
            ))
        };
    }

    if let Some(expected) = obj.get("const") {
        if instance != expected {
            return Err(format!("{path}: expected const {expected}, got {instance}"));
        }
    }

    if let Some(allowed) = obj.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            return Err(format!("{path}: value {instance} not in enum"));
        }
    }

    if let Some(ty) = obj.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => instance.is_object(),
            "array" => instance.is_array(),
            "string" => instance.is_string(),
            "boolean" => instance.is_boolean(),
            "null" => instance.is_null(),
            "integer" => instance.as_i64().is_some() || instance.as_u64().is_some(),
            "number" => instance.is_number(),
            other => return Err(format!("{path}: unsupported schema type '{other}'")),
        };
        if !ok {
            return Err(format!("{path}: expected type {ty}, got {instance}"));
        }
    }

    if let Some(props) = obj.get("properties").and_then(Value::as_object) {
        let inst = match instance.as_object() {
            Some(i) => i,
            None => return Err(format!("{path}: expected object")),
        };
        if let Some(required) = obj.get("required").and_then(Value::as_array) {
            for key in required {
                let key = key.as_str().unwrap_or_default();
                if !inst.contains_key(key) {
                    return Err(format!("{path}: missing required property '{key}'"));
                }
            }
        }
        let additional = obj
            .get("additionalProperties")
            .and_then(Value::as_bool)
            .unwrap_or(true);
        for (key, value) in inst {
            match props.get(key) {
                Some(sub) => check(sub, value, &format!("{path}.{key}"))?,
                None if !additional => {
                    return Err(format!("{path}: unexpected property '{key}'"))
                }
                None => {}
            }
        }
    }

    if let Some(items) = obj.get("items") {
        if let Some(arr) = instance.as_array() {
            for (i, item) in arr.iter().enumerate() {
                check(items, item, &format!("{path}[{i}]"))?;
            }
        }
    }

    Ok(())
}
