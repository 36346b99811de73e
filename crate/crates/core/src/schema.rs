//! Versioned JSON documents for instances and configurations.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{ProblemInstance, SolverConfig, CONFIG_SCHEMA_VERSION};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct InstanceOut<'a> {
    schema_version: u32,
    dim: usize,
    #[serde(flatten)]
    instance: &'a ProblemInstance,
}

#[derive(Deserialize)]
struct InstanceIn {
    schema_version: u32,
    dim: usize,
    #[serde(flatten)]
    instance: ProblemInstance,
}

/// Pretty-printed instance document. Matrices are row-major with explicit
/// `rows`/`cols`.
pub fn instance_to_json(instance: &ProblemInstance) -> Result<String, ModelError> {
    Ok(serde_json::to_string_pretty(&InstanceOut {
        schema_version: INSTANCE_SCHEMA_VERSION,
        dim: instance.dim(),
        instance,
    })?)
}

/// Parses an instance document. Shapes are checked; call
/// [`crate::model::validate_instance`] for the full invariants.
pub fn instance_from_json(text: &str) -> Result<ProblemInstance, ModelError> {
    let doc: InstanceIn = serde_json::from_str(text)?;
    if doc.schema_version != INSTANCE_SCHEMA_VERSION {
        return Err(ModelError::SchemaVersion {
            found: doc.schema_version,
            expected: INSTANCE_SCHEMA_VERSION,
        });
    }
    if doc.dim != doc.instance.dim() {
        return Err(ModelError::DimensionMismatch(format!(
            "document declares dim {} but A has {} columns",
            doc.dim,
            doc.instance.dim()
        )));
    }
    Ok(doc.instance)
}

pub fn config_to_json(config: &SolverConfig) -> Result<String, ModelError> {
    Ok(serde_json::to_string_pretty(config)?)
}

pub fn config_from_json(text: &str) -> Result<SolverConfig, ModelError> {
    let config: SolverConfig = serde_json::from_str(text)?;
    if config.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(ModelError::SchemaVersion {
            found: config.schema_version,
            expected: CONFIG_SCHEMA_VERSION,
        });
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_instance, GeneratorSpec};

    #[test]
    fn instance_round_trip() {
        let inst = generate_instance(&GeneratorSpec {
            m: 3,
            k: 4,
            n_bifunctions: 2,
            m_maps: 2,
            seed: 9,
        });
        let json = instance_to_json(&inst).unwrap();
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"dim\": 3"));
        assert_eq!(instance_from_json(&json).unwrap(), inst);
    }

    #[test]
    fn rejects_other_versions() {
        let inst = generate_instance(&GeneratorSpec {
            m: 2,
            k: 2,
            n_bifunctions: 1,
            m_maps: 1,
            seed: 1,
        });
        let json = instance_to_json(&inst).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(
            instance_from_json(&json),
            Err(ModelError::SchemaVersion { found: 7, .. })
        ));
        let mut cfg = SolverConfig::standard(1, 1);
        cfg.schema_version = 2;
        assert!(config_from_json(&config_to_json(&cfg).unwrap()).is_err());
    }
}
