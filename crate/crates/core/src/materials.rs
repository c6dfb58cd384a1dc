//! Attribute-id patterns to catalog materials, resolved by retrieval and
//! applied to a scene graph in one batch.

use std::collections::BTreeMap;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AttributeId, MaterialInfo, SceneGraph};
use crate::retrieval::{AssetCategory, Catalog, Embedder, EmbeddingIndex, RetrievalError, DEFAULT_MATERIAL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("catalog has no materials")]
    EmptyCatalogCategory,
    #[error("`{id}` is matched by both `{first}` and `{second}`")]
    AmbiguousPattern { id: String, first: String, second: String },
    #[error("`{0}` is not an attribute id or pattern")]
    BadPattern(String),
    #[error("entry for `{0}` has an empty query")]
    EmptyQuery(String),
    #[error("`{0}` matches no element of the scene")]
    UnknownAttribute(String),
    #[error("material `{0}` is not in the catalog")]
    UnknownMaterial(String),
    #[error(transparent)]
    Retrieval(RetrievalError),
}

impl From<RetrievalError> for MaterialError {
    fn from(e: RetrievalError) -> Self {
        match e {
            RetrievalError::EmptyCategory(AssetCategory::Material) => MaterialError::EmptyCatalogCategory,
            other => MaterialError::Retrieval(other),
        }
    }
}

/// Raw agent output: which elements get which described material.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialEntry {
    /// Exact id, `*` glob (`room2_id*`), or a class name: `column`, `beam`, `arc`.
    pub target: String,
    pub query: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialAssignment {
    pub entries: Vec<MaterialEntry>,
    /// Pattern to material id, in entry order.
    pub resolved: Vec<(String, String)>,
    /// uv scale of every material that may be referenced, default included.
    pub uv_scales: BTreeMap<String, f64>,
}

fn class_alias(pattern: &str) -> Option<&'static str> {
    match pattern {
        "column" => Some("column_*"),
        "beam" => Some("beam_*"),
        "arc" => Some("arc*"),
        _ => None,
    }
}

/// Compiled form of a target pattern.
#[derive(Debug, Clone)]
pub struct Pattern {
    raw: String,
    re: Regex,
}

impl Pattern {
    pub fn parse(raw: &str) -> Result<Pattern, MaterialError> {
        let glob = class_alias(raw).unwrap_or(raw);
        if !glob.contains('*') {
            glob.parse::<AttributeId>()
                .map_err(|_| MaterialError::BadPattern(raw.to_string()))?;
        } else if glob.is_empty() || !glob.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '*') {
            return Err(MaterialError::BadPattern(raw.to_string()));
        }
        let body = glob
            .split('*')
            .map(regex::escape)
            .collect::<Vec<_>>()
            .join("[A-Za-z0-9_]*");
        Ok(Pattern {
            raw: raw.to_string(),
            re: Regex::new(&format!("^{body}$")).expect("escaped glob"),
        })
    }

    pub fn matches(&self, id: &str) -> bool {
        self.re.is_match(id)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Concrete structural ids this pattern can stand for, using the id
    /// grammar's finite parts (wall facings). Useful before a graph exists.
    pub fn expand_walls(&self, rooms: &[u32]) -> Vec<String> {
        let mut out = Vec::new();
        for &n in rooms {
            for id in [format!("room{n}"), format!("room{n}_floor")]
                .into_iter()
                .chain((1..=4).map(|y| format!("room{n}_id{y}")))
            {
                if self.matches(&id) {
                    out.push(id);
                }
            }
        }
        out
    }
}

/// Resolve each entry's query to the best matching catalog material.
pub fn resolve_materials(
    entries: &[MaterialEntry],
    catalog: &Catalog,
    index: &EmbeddingIndex,
    embedder: &dyn Embedder,
) -> Result<MaterialAssignment, MaterialError> {
    if catalog.of(AssetCategory::Material).next().is_none() {
        return Err(MaterialError::EmptyCatalogCategory);
    }
    let mut resolved = Vec::new();
    let mut uv_scales = BTreeMap::new();
    let default = catalog
        .get(DEFAULT_MATERIAL)
        .ok_or_else(|| MaterialError::UnknownMaterial(DEFAULT_MATERIAL.into()))?;
    uv_scales.insert(default.id.clone(), default.uv_scale());
    for e in entries {
        Pattern::parse(&e.target)?;
        if e.query.trim().is_empty() {
            return Err(MaterialError::EmptyQuery(e.target.clone()));
        }
        let hits = index.search(embedder, &e.query, AssetCategory::Material, 1)?;
        let id = hits[0].0.clone();
        let rec = catalog
            .get(&id)
            .ok_or_else(|| MaterialError::UnknownMaterial(id.clone()))?;
        uv_scales.insert(id.clone(), rec.uv_scale());
        log::debug!("material `{}` -> {} ({:.3})", e.query, id, hits[0].1);
        resolved.push((e.target.clone(), id));
    }
    Ok(MaterialAssignment {
        entries: entries.to_vec(),
        resolved,
        uv_scales,
    })
}

impl MaterialAssignment {
    /// Concrete id to material id over the given ids. Each id may be
    /// claimed by at most one pattern and each pattern must claim one.
    pub fn expand<'a>(
        &self,
        ids: impl IntoIterator<Item = &'a str> + Clone,
    ) -> Result<BTreeMap<String, String>, MaterialError> {
        let mut out: BTreeMap<String, (String, String)> = BTreeMap::new();
        for (raw, material) in &self.resolved {
            let pat = Pattern::parse(raw)?;
            let mut any = false;
            for id in ids.clone().into_iter().filter(|id| pat.matches(id)) {
                any = true;
                if let Some((first, _)) = out.get(id) {
                    return Err(MaterialError::AmbiguousPattern {
                        id: id.to_string(),
                        first: first.clone(),
                        second: raw.clone(),
                    });
                }
                out.insert(id.to_string(), (raw.clone(), material.clone()));
            }
            if !any {
                return Err(MaterialError::UnknownAttribute(raw.clone()));
            }
        }
        Ok(out.into_iter().map(|(k, (_, m))| (k, m)).collect())
    }
}

/// Set `material_ref` on every targeted element and the default material on
/// everything else still untextured. Idempotent.
pub fn apply_material(mut graph: SceneGraph, assign: &MaterialAssignment) -> Result<SceneGraph, MaterialError> {
    let ids: Vec<String> = graph.attribute_ids().into_iter().map(String::from).collect();
    let map = assign.expand(ids.iter().map(String::as_str))?;
    graph.walk_mut(|e| {
        if let Some(m) = map.get(&e.attribute_id) {
            e.material_ref = Some(m.clone());
        } else if e.material_ref.is_none() {
            e.material_ref = Some(DEFAULT_MATERIAL.to_string());
        }
    });
    for (id, &uv_scale) in &assign.uv_scales {
        graph.materials.insert(id.clone(), MaterialInfo { uv_scale });
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glob_and_alias() {
        let p = Pattern::parse("room1_id*").unwrap();
        assert_eq!(
            p.expand_walls(&[1, 2]),
            vec!["room1_id1", "room1_id2", "room1_id3", "room1_id4"]
        );
        let c = Pattern::parse("column").unwrap();
        assert!(c.matches("column_0_3") && !c.matches("beam_1"));
        assert!(Pattern::parse("arc").unwrap().matches("arc2"));
        assert!(!Pattern::parse("room1*").unwrap().matches("room1.obj1"));
    }

    #[test]
    fn bad_patterns() {
        assert!(Pattern::parse("room1_id5").is_err());
        assert!(Pattern::parse("wall").is_err());
        assert!(Pattern::parse("room(1)*").is_err());
    }

    #[test]
    fn overlapping_patterns_are_ambiguous() {
        let a = MaterialAssignment {
            entries: vec![],
            resolved: vec![("room1_id*".into(), "a".into()), ("room1_id2".into(), "b".into())],
            uv_scales: BTreeMap::new(),
        };
        let ids = ["room1_id1", "room1_id2"];
        assert!(matches!(a.expand(ids), Err(MaterialError::AmbiguousPattern { .. })));
    }

    #[test]
    fn unmatched_pattern_is_unknown() {
        let a = MaterialAssignment {
            entries: vec![],
            resolved: vec![("room3_floor".into(), "a".into())],
            uv_scales: BTreeMap::new(),
        };
        assert_eq!(
            a.expand(["room1_floor"]).unwrap_err(),
            MaterialError::UnknownAttribute("room3_floor".into())
        );
    }
}
