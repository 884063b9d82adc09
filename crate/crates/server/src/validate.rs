//! Turns a `POST /sessions` body into a runnable plan, or into the list of
//! everything wrong with it.

use serde_json::Value;
use vqh_core::config::{ConfigError, RunConfig, RunPlan};
use vqh_core::qubo::{QuboError, QuboProblem};

use crate::error::FieldError;

pub struct Accepted {
    pub plan: RunPlan,
    pub config: Value,
    pub expected_records: usize,
}

fn qubo_error(e: &QuboError) -> FieldError {
    let mut err = FieldError::new("qubo_csv", e.to_string());
    match *e {
        QuboError::NonNumeric { line, column, .. } => {
            err.line = Some(line);
            err.column = Some(column);
        }
        QuboError::NotSquare { line, .. } => err.line = Some(line),
        QuboError::DuplicateLabel { column, .. } | QuboError::EmptyLabel { column } => {
            err.line = Some(1);
            err.column = Some(column);
        }
        _ => {}
    }
    err
}

fn config_error(e: &ConfigError) -> FieldError {
    match e {
        ConfigError::Invalid { field, reason } => FieldError::new(format!("config.{field}"), reason.clone()),
        ConfigError::Qubo { context, source } if context.starts_with("schedule.") => {
            FieldError::new(format!("config.{context}"), source.to_string())
        }
        ConfigError::Ansatz(_) => FieldError::new("config.ansatz", e.to_string()),
        ConfigError::Optimizer(_) => FieldError::new("config.optimizer", e.to_string()),
        _ => FieldError::new("config", e.to_string()),
    }
}

fn parse_config(value: &Value) -> Result<RunConfig, FieldError> {
    let config: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "config".to_string() } else { format!("config.{path}") };
        FieldError::new(field, e.into_inner().to_string())
    })?;
    config.validate().map_err(|e| config_error(&e))?;
    if let Some(schedule) = &config.schedule {
        if let Some(i) = schedule.segments.iter().position(|s| s.qubo_file.is_some()) {
            return Err(FieldError::new(
                format!("config.schedule.segments[{i}].qubo_file"),
                "file references are not accepted over HTTP; inline the matrix as qubo_csv",
            ));
        }
    }
    Ok(config)
}

/// Checks every part of the body and reports all failures together.
pub fn validate_request(body: &[u8]) -> Result<Accepted, Vec<FieldError>> {
    let doc: Value =
        serde_json::from_slice(body).map_err(|e| vec![FieldError::new("body", format!("not JSON: {e}"))])?;
    let Value::Object(map) = &doc else {
        return Err(vec![FieldError::new("body", "expected a JSON object")]);
    };
    let mut errors: Vec<FieldError> = map
        .keys()
        .filter(|k| !matches!(k.as_str(), "qubo_csv" | "config"))
        .map(|k| FieldError::new(k.clone(), "unknown field"))
        .collect();

    let qubo = match map.get("qubo_csv") {
        None => Err(FieldError::new("qubo_csv", "required")),
        Some(Value::String(text)) => QuboProblem::parse_csv(text).map_err(|e| qubo_error(&e)),
        Some(_) => Err(FieldError::new("qubo_csv", "expected a string")),
    };
    let empty = Value::Object(Default::default());
    let config_value = map.get("config").unwrap_or(&empty);
    let config = match config_value {
        Value::Object(_) => parse_config(config_value),
        _ => Err(FieldError::new("config", "expected an object")),
    };

    match (qubo, config) {
        (Ok(qubo), Ok(config)) if errors.is_empty() => match config.plan(Some(&qubo), None) {
            Ok(plan) => Ok(Accepted {
                expected_records: config.total_records(),
                plan,
                config: config_value.clone(),
            }),
            Err(e) => Err(vec![config_error(&e)]),
        },
        (qubo, config) => {
            errors.extend(qubo.err());
            errors.extend(config.err());
            Err(errors)
        }
    }
}
