use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RetrievalError;
use crate::geom::Vec3;
use crate::model::Mesh;

/// Every catalog must carry this material; it fills untargeted elements.
pub const DEFAULT_MATERIAL: &str = "default_plaster";
/// `mesh_path` value standing for a procedural box of the native size.
pub const BUILTIN_BOX: &str = "builtin:box";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetCategory {
    Object,
    Door,
    Window,
    Material,
}

impl std::fmt::Display for AssetCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AssetCategory::Object => "object",
            AssetCategory::Door => "door",
            AssetCategory::Window => "window",
            AssetCategory::Material => "material",
        })
    }
}

/// Where an object is meant to go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mount {
    #[default]
    Floor,
    Wall,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotations {
    pub category_label: String,
    #[serde(default)]
    pub style: String,
    #[serde(default)]
    pub cultural_origin: String,
    #[serde(default)]
    pub era: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Annotations {
    /// Fields joined by single spaces in a fixed order, blanks skipped.
    pub fn text(&self) -> String {
        [&self.category_label, &self.style, &self.cultural_origin, &self.era]
            .into_iter()
            .map(String::as_str)
            .chain(self.tags.iter().map(String::as_str))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetRecord {
    pub id: String,
    pub category: AssetCategory,
    pub annotations: Annotations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub native_size: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uv_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mount: Option<Mount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

impl AssetRecord {
    pub fn is_geometric(&self) -> bool {
        self.category != AssetCategory::Material
    }

    pub fn mount(&self) -> Mount {
        self.mount.unwrap_or_default()
    }

    pub fn uv_scale(&self) -> f64 {
        self.uv_scale.unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<(), RetrievalError> {
        let bad = |reason: &str| {
            Err(RetrievalError::InvalidRecord {
                id: self.id.clone(),
                reason: reason.into(),
            })
        };
        if self.id.is_empty() {
            return bad("empty id");
        }
        if self.annotations.text().is_empty() {
            return bad("no annotation text");
        }
        if self.is_geometric() {
            match self.native_size {
                Some(s) if s.x > 0.0 && s.y > 0.0 && s.z > 0.0 => {}
                _ => return bad("native_size must be positive"),
            }
        } else if let Some(s) = self.uv_scale {
            if !(s > 0.0) {
                return bad("uv_scale must be positive");
            }
        }
        if self.mount.is_some() && self.category != AssetCategory::Object {
            return bad("only objects carry a mount");
        }
        if let Some(e) = &self.embedding {
            let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-6 {
                return bad("embedding is not unit length");
            }
        }
        Ok(())
    }
}

/// Records plus the directory their mesh paths are relative to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Catalog {
    pub root: PathBuf,
    pub records: Vec<AssetRecord>,
}

impl Catalog {
    pub fn new(root: impl Into<PathBuf>, records: Vec<AssetRecord>) -> Result<Self, RetrievalError> {
        let mut seen = BTreeSet::new();
        for r in &records {
            r.validate()?;
            if !seen.insert(r.id.as_str()) {
                return Err(RetrievalError::InvalidRecord {
                    id: r.id.clone(),
                    reason: "duplicate id".into(),
                });
            }
        }
        let cat = Catalog {
            root: root.into(),
            records,
        };
        match cat.get(DEFAULT_MATERIAL) {
            Some(r) if r.category == AssetCategory::Material => Ok(cat),
            _ => Err(RetrievalError::Catalog(format!(
                "catalog lacks the `{DEFAULT_MATERIAL}` material"
            ))),
        }
    }

    pub fn from_json(root: impl Into<PathBuf>, json: &str) -> Result<Self, RetrievalError> {
        let records: Vec<AssetRecord> =
            serde_json::from_str(json).map_err(|e| RetrievalError::Catalog(e.to_string()))?;
        Catalog::new(root, records)
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| RetrievalError::Catalog(format!("{}: {e}", path.display())))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Catalog::from_json(root, &text)
    }

    pub fn get(&self, id: &str) -> Option<&AssetRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn of(&self, category: AssetCategory) -> impl Iterator<Item = &AssetRecord> {
        self.records.iter().filter(move |r| r.category == category)
    }
}

/// Asset geometry normalized so its footprint is centred on the origin and
/// its base rests on z = 0. Front faces local -y.
pub fn load_asset_mesh(catalog: &Catalog, record: &AssetRecord) -> Result<Mesh, RetrievalError> {
    let size = record.native_size.ok_or_else(|| RetrievalError::InvalidRecord {
        id: record.id.clone(),
        reason: "no native size".into(),
    })?;
    let path = match record.mesh_path.as_deref() {
        None | Some(BUILTIN_BOX) => return Ok(Mesh::footprint_box(size)),
        Some(p) => catalog.root.join(p),
    };
    let opts = tobj::LoadOptions {
        triangulate: true,
        single_index: true,
        ..Default::default()
    };
    let (models, _) = tobj::load_obj(&path, &opts).map_err(|e| RetrievalError::InvalidRecord {
        id: record.id.clone(),
        reason: format!("{}: {e}", path.display()),
    })?;
    let mut mesh = Mesh::default();
    for m in models {
        let part = Mesh {
            vertices: m
                .mesh
                .positions
                .chunks_exact(3)
                .map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64))
                .collect(),
            faces: m.mesh.indices.chunks_exact(3).map(|f| [f[0], f[1], f[2]]).collect(),
        };
        mesh.append(&part);
    }
    let b = mesh.aabb();
    if b.is_empty() {
        return Err(RetrievalError::InvalidRecord {
            id: record.id.clone(),
            reason: "mesh has no vertices".into(),
        });
    }
    let (c, ext) = (b.center(), b.extents());
    if !(ext.x > 0.0 && ext.y > 0.0 && ext.z > 0.0) {
        return Err(RetrievalError::InvalidRecord {
            id: record.id.clone(),
            reason: "mesh is flat along an axis".into(),
        });
    }
    // Rescale so the mesh box equals the annotated real-world size.
    let k = Vec3::new(size.x / ext.x, size.y / ext.y, size.z / ext.z);
    for v in &mut mesh.vertices {
        *v = Vec3::new((v.x - c.x) * k.x, (v.y - c.y) * k.y, (v.z - b.min.z) * k.z);
    }
    Ok(mesh)
}
