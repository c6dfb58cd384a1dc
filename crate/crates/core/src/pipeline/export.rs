use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::geom::{Aabb, Vec3};
use crate::model::{MaterialInfo, Mesh, SceneElement, SceneGraph, StructureKind, Transform};
use crate::retrieval::{fnv1a64, DEFAULT_MATERIAL};

pub const SCENE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformDoc {
    t: Vec3,
    yaw: f64,
    s: Vec3,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementDoc {
    attribute_id: String,
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    transform: TransformDoc,
    material_ref: Option<String>,
    children: Vec<ElementDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    schema_version: u32,
    structure_kind: StructureKind,
    bounding_box: Option<Aabb>,
    materials: BTreeMap<String, MaterialInfo>,
    elements: Vec<ElementDoc>,
}

impl From<&SceneElement> for ElementDoc {
    fn from(e: &SceneElement) -> Self {
        ElementDoc {
            attribute_id: e.attribute_id.clone(),
            vertices: e.mesh.vertices.clone(),
            faces: e.mesh.faces.clone(),
            transform: TransformDoc {
                t: e.transform.t,
                yaw: e.transform.yaw,
                s: e.transform.s,
            },
            material_ref: e.material_ref.clone(),
            children: e.children.iter().map(ElementDoc::from).collect(),
        }
    }
}

impl From<ElementDoc> for SceneElement {
    fn from(d: ElementDoc) -> Self {
        SceneElement {
            attribute_id: d.attribute_id,
            mesh: Mesh {
                vertices: d.vertices,
                faces: d.faces,
            },
            transform: Transform::new(d.transform.t, d.transform.yaw, d.transform.s),
            material_ref: d.material_ref,
            children: d.children.into_iter().map(SceneElement::from).collect(),
        }
    }
}

/// `v` rounded to nine significant digits, negative zero folded to zero.
fn round9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { 0.0 } else { v };
    }
    let r: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if n.is_f64() {
        let v = round9(n.as_f64().expect("f64 number"));
        // Shortest representation that parses back to the same value.
        let s = serde_json::Number::from_f64(v)
            .map(|n| n.to_string())
            .unwrap_or_else(|| "null".into());
        out.push_str(&s);
    } else {
        out.push_str(&n.to_string());
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let keys: BTreeSet<&String> = map.keys().collect();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(out, &map[k]);
            }
            out.push('}');
        }
    }
}

/// Canonical scene document: sorted keys, nine significant digits, one
/// line, newline-terminated.
pub fn export_json(graph: &SceneGraph) -> Vec<u8> {
    let doc = SceneDoc {
        schema_version: SCENE_SCHEMA_VERSION,
        structure_kind: graph.structure_kind,
        bounding_box: (!graph.bounding_box.is_empty()).then_some(graph.bounding_box),
        materials: graph.materials.clone(),
        elements: graph.elements.iter().map(ElementDoc::from).collect(),
    };
    let value = serde_json::to_value(&doc).expect("scene serializes");
    let mut out = String::new();
    write_value(&mut out, &value);
    out.push('\n');
    out.into_bytes()
}

pub fn import_json(bytes: &[u8]) -> Result<SceneGraph, String> {
    let doc: SceneDoc = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    if doc.schema_version != SCENE_SCHEMA_VERSION {
        return Err(format!(
            "scene schema version {} is not supported (expected {SCENE_SCHEMA_VERSION})",
            doc.schema_version
        ));
    }
    Ok(SceneGraph {
        structure_kind: doc.structure_kind,
        elements: doc.elements.into_iter().map(SceneElement::from).collect(),
        bounding_box: doc.bounding_box.unwrap_or(Aabb::EMPTY),
        materials: doc.materials,
    })
}

fn fmt_coord(v: f64) -> String {
    let r = round9(v);
    serde_json::Number::from_f64(r)
        .map(|n| n.to_string())
        .unwrap_or_else(|| "0".into())
}

/// Wavefront OBJ with transforms baked, one group per non-empty element.
pub fn export_obj(graph: &SceneGraph, mtl_name: &str) -> Vec<u8> {
    let mut out = String::new();
    let _ = writeln!(out, "# setforge scene ({})", graph.structure_kind);
    let _ = writeln!(out, "mtllib {mtl_name}");
    let mut base = 1u64;
    for (e, mesh) in graph.baked() {
        if mesh.is_empty() {
            continue;
        }
        let _ = writeln!(out, "g {}", e.attribute_id);
        let _ = writeln!(out, "usemtl {}", e.material_ref.as_deref().unwrap_or(DEFAULT_MATERIAL));
        for v in &mesh.vertices {
            let _ = writeln!(out, "v {} {} {}", fmt_coord(v.x), fmt_coord(v.y), fmt_coord(v.z));
        }
        for f in &mesh.faces {
            let _ = writeln!(
                out,
                "f {} {} {}",
                base + f[0] as u64,
                base + f[1] as u64,
                base + f[2] as u64
            );
        }
        base += mesh.vertices.len() as u64;
    }
    out.into_bytes()
}

/// Flat color per material id, derived from its hash.
fn color(id: &str) -> [f64; 3] {
    let h = fnv1a64(id.as_bytes());
    let c = |shift: u32| 0.25 + 0.6 * ((h >> shift) & 0xff) as f64 / 255.0;
    [c(0), c(8), c(16)]
}

/// Companion material library covering every `usemtl` of [`export_obj`].
pub fn export_mtl(graph: &SceneGraph) -> Vec<u8> {
    let mut ids = BTreeSet::new();
    graph.walk(|e| {
        if !e.mesh.is_empty() {
            ids.insert(e.material_ref.clone().unwrap_or_else(|| DEFAULT_MATERIAL.to_string()));
        }
    });
    let mut out = String::from("# setforge materials\n");
    for id in ids {
        let [r, g, b] = color(&id);
        let _ = write!(
            out,
            "\nnewmtl {id}\nKa 0 0 0\nKd {r:.4} {g:.4} {b:.4}\nKs 0 0 0\nd 1\nillum 1\n"
        );
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mesh;

    fn cube_scene() -> SceneGraph {
        let mut e = SceneElement::new(Mesh::cuboid(Vec3::ZERO, Vec3::ONE));
        e.attribute_id = "floor".into();
        e.transform.t = Vec3::new(1.0, 2.0, 0.0);
        SceneGraph::new(StructureKind::Column, vec![e])
    }

    #[test]
    fn empty_scene() {
        let g = SceneGraph::new(StructureKind::Wall, vec![]);
        let s = String::from_utf8(export_json(&g)).unwrap();
        assert_eq!(
            s,
            "{\"bounding_box\":null,\"elements\":[],\"materials\":{},\"schema_version\":1,\"structure_kind\":\"wall\"}\n"
        );
        assert_eq!(import_json(s.as_bytes()).unwrap().elements.len(), 0);
    }

    #[test]
    fn canonical_fixed_point() {
        let mut g = cube_scene();
        g.elements[0].transform.yaw = std::f64::consts::PI / 3.0;
        g.elements[0].mesh.vertices[0].x = -0.0;
        g.refresh_bounds();
        let a = export_json(&g);
        let back = import_json(&a).unwrap();
        assert_eq!(export_json(&back), a);
        assert!((back.elements[0].transform.yaw - g.elements[0].transform.yaw).abs() < 1e-8);
        assert!(!String::from_utf8(a).unwrap().contains("-0.0,"));
    }

    #[test]
    fn round9_digits() {
        assert_eq!(round9(1.0 / 3.0), 0.333333333);
        assert_eq!(round9(123456789012.0), 123456789000.0);
        assert_eq!(round9(-0.0).to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn unit_cube_obj() {
        let g = cube_scene();
        let s = String::from_utf8(export_obj(&g, "scene.mtl")).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(s.lines().filter(|l| l.starts_with("f ")).count(), 12);
        assert_eq!(s.lines().filter(|l| l.starts_with("g ")).count(), 1);
        assert!(s.contains("usemtl default_plaster"));
        let mtl = String::from_utf8(export_mtl(&g)).unwrap();
        assert!(mtl.contains("newmtl default_plaster"));
    }
}
