use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::de::DeserializeOwned;
use serde_json::Value;
use thiserror::Error;

use super::params::{AllocationSection, CellAssignment, ManagerSection, ObjectSection};
use super::Section;
use crate::floorplan::{AdjacencySpec, RoomSpec};
use crate::materials::MaterialEntry;
use crate::openings::{ColumnStyles, OpeningSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HookError {
    #[error("[{schema}] reply has no fenced JSON block")]
    NoJsonBlock { schema: String },
    #[error("[{schema}] reply has {count} fenced JSON blocks, expected one")]
    MultipleJsonBlocks { schema: String, count: usize },
    #[error("[{schema}] JSON block does not parse: {message}")]
    InvalidJson { schema: String, message: String },
    #[error("[{schema}] at `{path}`: {message}")]
    SchemaViolation {
        schema: String,
        /// Dotted path into the reply, `rooms[0].width`.
        path: String,
        message: String,
    },
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
}

const SOURCES: [(&str, &str); 12] = [
    ("manager.v1", include_str!("../../schemas/manager.v1.json")),
    (
        "allocation.wall.v1",
        include_str!("../../schemas/allocation.wall.v1.json"),
    ),
    (
        "allocation.column.v1",
        include_str!("../../schemas/allocation.column.v1.json"),
    ),
    (
        "adjacency.wall.v1",
        include_str!("../../schemas/adjacency.wall.v1.json"),
    ),
    (
        "adjacency.column.v1",
        include_str!("../../schemas/adjacency.column.v1.json"),
    ),
    ("check.v1", include_str!("../../schemas/check.v1.json")),
    ("shape.v1", include_str!("../../schemas/shape.v1.json")),
    ("material.v1", include_str!("../../schemas/material.v1.json")),
    (
        "door_window.wall.v1",
        include_str!("../../schemas/door_window.wall.v1.json"),
    ),
    (
        "door_window.column.v1",
        include_str!("../../schemas/door_window.column.v1.json"),
    ),
    ("object.wall.v1", include_str!("../../schemas/object.wall.v1.json")),
    ("object.column.v1", include_str!("../../schemas/object.column.v1.json")),
];

struct Compiled {
    raw: Value,
    validator: jsonschema::Validator,
}

fn registry() -> &'static BTreeMap<&'static str, Compiled> {
    static REG: OnceLock<BTreeMap<&'static str, Compiled>> = OnceLock::new();
    REG.get_or_init(|| {
        SOURCES
            .iter()
            .map(|(id, src)| {
                let raw: Value = serde_json::from_str(src).expect("shipped schema parses");
                let validator = jsonschema::validator_for(&raw).expect("shipped schema compiles");
                (*id, Compiled { raw, validator })
            })
            .collect()
    })
}

pub fn schema_ids() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(id, _)| *id)
}

/// Raw JSON of a shipped schema.
pub fn schema(id: &str) -> Option<&'static Value> {
    registry().get(id).map(|c| &c.raw)
}

/// The single fenced JSON block of an agent reply.
pub fn extract_json_block<'a>(message: &'a str, schema: &str) -> Result<&'a str, HookError> {
    static FENCE: OnceLock<Regex> = OnceLock::new();
    let re = FENCE.get_or_init(|| Regex::new(r"(?s)```(?:json|JSON)?[ \t]*\r?\n(.*?)```").unwrap());
    let blocks: Vec<&str> = re.captures_iter(message).map(|c| c.get(1).unwrap().as_str()).collect();
    match blocks.len() {
        0 => Err(HookError::NoJsonBlock { schema: schema.into() }),
        1 => Ok(blocks[0]),
        count => Err(HookError::MultipleJsonBlocks {
            schema: schema.into(),
            count,
        }),
    }
}

fn dotted(pointer: &str) -> String {
    let mut out = String::new();
    for seg in pointer.split('/').skip(1) {
        let seg = seg.replace("~1", "/").replace("~0", "~");
        if !seg.is_empty() && seg.bytes().all(|b| b.is_ascii_digit()) {
            out.push_str(&format!("[{seg}]"));
        } else {
            if !out.is_empty() {
                out.push('.');
            }
            out.push_str(&seg);
        }
    }
    if out.is_empty() {
        out.push('$');
    }
    out
}

/// Validate `value` against a shipped schema. The reported violation is the
/// first by reply path, so results do not depend on validator order.
pub fn validate_value(value: &Value, schema: &str) -> Result<(), HookError> {
    let c = registry()
        .get(schema)
        .ok_or_else(|| HookError::UnknownSchema(schema.into()))?;
    let first = c
        .validator
        .iter_errors(value)
        .map(|e| (dotted(e.instance_path.as_str()), e.to_string()))
        .min();
    match first {
        None => Ok(()),
        Some((path, message)) => Err(HookError::SchemaViolation {
            schema: schema.into(),
            path,
            message,
        }),
    }
}

fn typed<T: DeserializeOwned>(v: Value, schema: &str) -> Result<T, HookError> {
    serde_json::from_value(v).map_err(|e| HookError::SchemaViolation {
        schema: schema.into(),
        path: "$".into(),
        message: e.to_string(),
    })
}

fn field(mut v: Value, key: &str) -> Value {
    v.get_mut(key).map(Value::take).unwrap_or(Value::Null)
}

/// Turn an agent reply into its typed section: locate the fenced block,
/// parse, schema-check, then map.
pub fn extract_params(message: &str, schema: &str) -> Result<Section, HookError> {
    if registry().get(schema).is_none() {
        return Err(HookError::UnknownSchema(schema.into()));
    }
    let block = extract_json_block(message, schema)?;
    let value: Value = serde_json::from_str(block).map_err(|e| HookError::InvalidJson {
        schema: schema.into(),
        message: e.to_string(),
    })?;
    validate_value(&value, schema)?;
    Ok(match schema {
        "manager.v1" => Section::Manager(typed::<ManagerSection>(value, schema)?),
        "allocation.wall.v1" | "allocation.column.v1" => {
            Section::Allocation(typed::<AllocationSection>(value, schema)?)
        }
        "adjacency.wall.v1" => Section::Adjacency(typed::<AdjacencySpec>(value, schema)?),
        "adjacency.column.v1" => Section::Cells(typed::<Vec<CellAssignment>>(field(value, "cells"), schema)?),
        "shape.v1" => Section::Shape(typed::<Vec<RoomSpec>>(field(value, "rooms"), schema)?),
        "material.v1" => Section::Materials(typed::<Vec<MaterialEntry>>(field(value, "materials"), schema)?),
        "door_window.wall.v1" => Section::Openings(typed::<Vec<OpeningSpec>>(field(value, "openings"), schema)?),
        "door_window.column.v1" => Section::Styles(typed::<ColumnStyles>(field(value, "styles"), schema)?),
        "object.wall.v1" | "object.column.v1" => Section::Objects(typed::<ObjectSection>(value, schema)?),
        other => return Err(HookError::UnknownSchema(other.into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fenced(json: &str) -> String {
        format!("Here is my answer.\n```json\n{json}\n```\n")
    }

    #[test]
    fn shape_round_trip() {
        let s = extract_params(
            &fenced(r#"{"rooms":[{"name":"room1","width":4,"depth":3}]}"#),
            "shape.v1",
        )
        .unwrap();
        assert_eq!(s, Section::Shape(vec![RoomSpec::new("room1", 4.0, 3.0)]));
    }

    #[test]
    fn prose_only() {
        assert_eq!(
            extract_params("I think two rooms will do.", "shape.v1").unwrap_err(),
            HookError::NoJsonBlock {
                schema: "shape.v1".into()
            }
        );
    }

    #[test]
    fn two_blocks() {
        let m = format!("{}{}", fenced("{}"), fenced("{}"));
        assert!(matches!(
            extract_params(&m, "manager.v1"),
            Err(HookError::MultipleJsonBlocks { count: 2, .. })
        ));
    }

    #[test]
    fn negative_width_path() {
        let e = extract_params(
            &fenced(r#"{"rooms":[{"name":"room1","width":-2,"depth":3}]}"#),
            "shape.v1",
        )
        .unwrap_err();
        match e {
            HookError::SchemaViolation { path, .. } => assert_eq!(path, "rooms[0].width"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let e = extract_params(
            &fenced(r#"{"structure_kind":"wall","scene":"x","mood":"calm"}"#),
            "manager.v1",
        )
        .unwrap_err();
        assert!(matches!(e, HookError::SchemaViolation { .. }));
    }

    #[test]
    fn shipped_examples_validate() {
        for id in schema_ids() {
            let ex = &schema(id).unwrap()["examples"][0];
            validate_value(ex, id).unwrap();
            if id != "check.v1" {
                extract_params(&fenced(&ex.to_string()), id).unwrap();
            }
        }
    }

    #[test]
    fn pointer_to_dotted() {
        assert_eq!(dotted("/regions/2/stable/0/slot"), "regions[2].stable[0].slot");
        assert_eq!(dotted(""), "$");
    }
}
