//! Scene graph, attribute identifiers and rigid transforms.
//!
//! Every procedural stage produces or mutates [`SceneElement`]s. Structural
//! elements carry an [`AttributeId`] so that later stages (materials, openings,
//! layout) can address them in batch. Geometry is stored untransformed; the
//! transform is only baked when exporting.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Aabb, Vec2, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("attribute `{0}` is already registered in this scene")]
    DuplicateAttribute(String),
    #[error("malformed attribute id `{0}`")]
    MalformedAttribute(String),
    #[error("scale components must be strictly positive, got {0:?}")]
    NonPositiveScale([f64; 3]),
    #[error("face {face} references vertex {index} but the mesh has {len} vertices")]
    IndexOutOfRange { face: usize, index: u32, len: usize },
}

/// Which way a rectangular room side faces, numbered as in the `roomX_idY`
/// scheme: 1 west, 2 south, 3 north, 4 east.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Facing {
    West,
    South,
    North,
    East,
}

impl Facing {
    pub const ALL: [Facing; 4] = [Facing::West, Facing::South, Facing::North, Facing::East];

    pub fn wall_index(self) -> u8 {
        match self {
            Facing::West => 1,
            Facing::South => 2,
            Facing::North => 3,
            Facing::East => 4,
        }
    }

    pub fn from_wall_index(y: u8) -> Option<Facing> {
        match y {
            1 => Some(Facing::West),
            2 => Some(Facing::South),
            3 => Some(Facing::North),
            4 => Some(Facing::East),
            _ => None,
        }
    }

    /// Normal pointing out of the room through this side.
    pub fn outward(self) -> Vec2 {
        match self {
            Facing::West => Vec2::new(-1.0, 0.0),
            Facing::South => Vec2::new(0.0, -1.0),
            Facing::North => Vec2::new(0.0, 1.0),
            Facing::East => Vec2::new(1.0, 0.0),
        }
    }

    /// Normal pointing into the room; objects mounted on or backed against this
    /// side face this way.
    pub fn inward(self) -> Vec2 {
        -self.outward()
    }

    pub fn from_outward(n: Vec2) -> Option<Facing> {
        Facing::ALL.into_iter().find(|f| f.outward().approx_eq(n, 1e-9))
    }
}

/// Identifier of a structural element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeId {
    Room(u32),
    RoomFloor(u32),
    RoomWall { room: u32, facing: Facing },
    Arc(u32),
    Outer,
    Floor,
    Column { row: u32, col: u32 },
    Beam(u32),
}

impl AttributeId {
    pub fn room_wall(room: u32, facing: Facing) -> Self {
        AttributeId::RoomWall { room, facing }
    }

    /// Room number for room-scoped ids.
    pub fn room(&self) -> Option<u32> {
        match *self {
            AttributeId::Room(n) | AttributeId::RoomFloor(n) => Some(n),
            AttributeId::RoomWall { room, .. } => Some(room),
            _ => None,
        }
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeId::Room(n) => write!(f, "room{n}"),
            AttributeId::RoomFloor(n) => write!(f, "room{n}_floor"),
            AttributeId::RoomWall { room, facing } => {
                write!(f, "room{room}_id{}", facing.wall_index())
            }
            AttributeId::Arc(n) => write!(f, "arc{n}"),
            AttributeId::Outer => f.write_str("outer"),
            AttributeId::Floor => f.write_str("floor"),
            AttributeId::Column { row, col } => write!(f, "column_{row}_{col}"),
            AttributeId::Beam(k) => write!(f, "beam_{k}"),
        }
    }
}

fn parse_index(s: &str) -> Option<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return None;
    }
    s.parse().ok()
}

fn parse_positive(s: &str) -> Option<u32> {
    parse_index(s).filter(|&n| n >= 1)
}

impl FromStr for AttributeId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::MalformedAttribute(s.to_string());
        match s {
            "outer" => return Ok(AttributeId::Outer),
            "floor" => return Ok(AttributeId::Floor),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("column_") {
            let (r, c) = rest.split_once('_').ok_or_else(bad)?;
            let row = parse_index(r).ok_or_else(bad)?;
            let col = parse_index(c).ok_or_else(bad)?;
            return Ok(AttributeId::Column { row, col });
        }
        if let Some(rest) = s.strip_prefix("beam_") {
            return parse_index(rest).map(AttributeId::Beam).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix("arc") {
            return parse_positive(rest).map(AttributeId::Arc).ok_or_else(bad);
        }
        if let Some(rest) = s.strip_prefix("room") {
            if let Some(n) = rest.strip_suffix("_floor") {
                return parse_positive(n).map(AttributeId::RoomFloor).ok_or_else(bad);
            }
            if let Some((n, y)) = rest.split_once("_id") {
                let room = parse_positive(n).ok_or_else(bad)?;
                let facing = parse_index(y)
                    .and_then(|y| u8::try_from(y).ok())
                    .and_then(Facing::from_wall_index)
                    .ok_or_else(bad)?;
                return Ok(AttributeId::RoomWall { room, facing });
            }
            return parse_positive(rest).map(AttributeId::Room).ok_or_else(bad);
        }
        Err(bad())
    }
}

impl Serialize for AttributeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AttributeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Triangle soup. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let len = self.vertices.len();
        for (face, tri) in self.faces.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= len) {
                return Err(ModelError::IndexOutOfRange { face, index, len });
            }
        }
        Ok(())
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }

    /// Append another mesh, re-indexing its faces.
    pub fn append(&mut self, other: &Mesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
    }

    /// Axis-aligned box spanning `[min, max]`, faces wound outward.
    pub fn cuboid(min: Vec3, max: Vec3) -> Mesh {
        let b = Aabb::new(min, max);
        let vertices = b.corners().to_vec();
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        Mesh { vertices, faces }
    }

    /// Box with its footprint centered on the origin and its base at z = 0.
    pub fn footprint_box(size: Vec3) -> Mesh {
        Mesh::cuboid(
            Vec3::new(-size.x / 2.0, -size.y / 2.0, 0.0),
            Vec3::new(size.x / 2.0, size.y / 2.0, size.z),
        )
    }

    /// Count of undirected edges not shared by exactly two triangles.
    pub fn boundary_edge_count(&self) -> usize {
        let mut edges: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        edges.values().filter(|&&c| c != 2).count()
    }
}

/// A single transform step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformOp {
    /// Rotate about the world z axis through the origin.
    Rotate(f64),
    /// Scale along the element's own axes.
    Scale(Vec3),
    /// Translate in world space.
    Translate(Vec3),
}

/// Translation, yaw and per-axis scale. A local point `p` maps to
/// `t + Rz(yaw) * (s ⊙ p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub t: Vec3,
    pub yaw: f64,
    pub s: Vec3,
}

impl Default for Transform {
    fn default() -> Self {
        Transform::IDENTITY
    }
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        t: Vec3::ZERO,
        yaw: 0.0,
        s: Vec3::ONE,
    };

    pub fn new(t: Vec3, yaw: f64, s: Vec3) -> Self {
        Self { t, yaw, s }
    }

    pub fn apply_point(&self, p: Vec3) -> Vec3 {
        let q = p.mul_elem(self.s);
        let r = q.xy().rotated(self.yaw);
        Vec3::new(r.x + self.t.x, r.y + self.t.y, q.z + self.t.z)
    }

    /// Compose `op` after this transform.
    pub fn then(&self, op: TransformOp) -> Result<Transform, ModelError> {
        Ok(match op {
            TransformOp::Rotate(a) => {
                let r = self.t.xy().rotated(a);
                Transform::new(Vec3::new(r.x, r.y, self.t.z), self.yaw + a, self.s)
            }
            TransformOp::Scale(k) => {
                check_scale(k)?;
                Transform::new(self.t, self.yaw, self.s.mul_elem(k))
            }
            TransformOp::Translate(d) => Transform::new(self.t + d, self.yaw, self.s),
        })
    }

    pub fn to_affine(&self) -> Affine {
        let (sn, cs) = self.yaw.sin_cos();
        let s = self.s;
        Affine {
            m: [
                [cs * s.x, -sn * s.y, 0.0, self.t.x],
                [sn * s.x, cs * s.y, 0.0, self.t.y],
                [0.0, 0.0, s.z, self.t.z],
            ],
        }
    }
}

fn check_scale(k: Vec3) -> Result<(), ModelError> {
    if k.x > 0.0 && k.y > 0.0 && k.z > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositiveScale(k.to_array()))
    }
}

/// Row-major 3x4 affine matrix (implicit last row `0 0 0 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub m: [[f64; 4]; 3],
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        m: [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
    };

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let r = |i: usize| self.m[i][0] * p.x + self.m[i][1] * p.y + self.m[i][2] * p.z + self.m[i][3];
        Vec3::new(r(0), r(1), r(2))
    }

    /// `self * rhs`: apply `rhs` first, then `self`.
    pub fn mul(&self, rhs: &Affine) -> Affine {
        let mut out = [[0.0; 4]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut v: f64 = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
                if j == 3 {
                    v += self.m[i][3];
                }
                *cell = v;
            }
        }
        Affine { m: out }
    }
}

/// A node of the scene graph. Children are expressed in the parent's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneElement {
    pub attribute_id: String,
    pub mesh: Mesh,
    pub transform: Transform,
    pub material_ref: Option<String>,
    pub children: Vec<SceneElement>,
}

impl SceneElement {
    /// An untagged element; ids are attached with [`AttributeRegistry::set_attribute`]
    /// or [`SceneElement::instance`].
    pub fn new(mesh: Mesh) -> Self {
        SceneElement {
            attribute_id: String::new(),
            mesh,
            transform: Transform::IDENTITY,
            material_ref: None,
            children: Vec::new(),
        }
    }

    /// An asset instance. Instance ids live in their own namespace,
    /// `<owner>.<kind><n>`, so they never collide with structural ids.
    pub fn instance(owner: &str, kind: &str, n: usize, mesh: Mesh) -> Self {
        let mut e = SceneElement::new(mesh);
        e.attribute_id = format!("{owner}.{kind}{n}");
        e
    }

    pub fn structural_id(&self) -> Option<AttributeId> {
        self.attribute_id.parse().ok()
    }

    pub fn apply_transform(mut self, op: TransformOp) -> Result<SceneElement, ModelError> {
        self.transform = self.transform.then(op)?;
        Ok(self)
    }

    /// World-space box of this element and its subtree, given the parent's
    /// world matrix.
    pub fn world_aabb_under(&self, parent: &Affine) -> Aabb {
        let world = parent.mul(&self.transform.to_affine());
        let own = Aabb::from_points(self.mesh.vertices.iter().map(|&v| world.apply(v)));
        self.children
            .iter()
            .fold(own, |b, c| b.union(c.world_aabb_under(&world)))
    }

    pub fn world_aabb(&self) -> Aabb {
        self.world_aabb_under(&Affine::IDENTITY)
    }

    /// Depth-first visit of this element and its descendants.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a SceneElement)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut SceneElement)) {
        f(self);
        for c in &mut self.children {
            c.walk_mut(f);
        }
    }

    pub fn find(&self, id: &str) -> Option<&SceneElement> {
        if self.attribute_id == id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(id))
    }

    pub fn find_mut(&mut self, id: &str) -> Option<&mut SceneElement> {
        if self.attribute_id == id {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }
}

/// Tracks which attribute ids are in use while a scene is being assembled.
#[derive(Debug, Clone, Default)]
pub struct AttributeRegistry {
    used: BTreeSet<String>,
}

impl AttributeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.used.contains(id)
    }

    /// Tag `element` with `id`, failing if the id is taken.
    pub fn set_attribute(&mut self, mut element: SceneElement, id: &AttributeId) -> Result<SceneElement, ModelError> {
        let raw = id.to_string();
        if !self.used.insert(raw.clone()) {
            return Err(ModelError::DuplicateAttribute(raw));
        }
        element.attribute_id = raw;
        Ok(element)
    }

    /// Parse and tag in one step.
    pub fn set_attribute_str(&mut self, element: SceneElement, raw: &str) -> Result<SceneElement, ModelError> {
        let id: AttributeId = raw.parse()?;
        self.set_attribute(element, &id)
    }

    pub fn register_instance(&mut self, id: &str) -> Result<(), ModelError> {
        if !self.used.insert(id.to_string()) {
            return Err(ModelError::DuplicateAttribute(id.to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Wall,
    Column,
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureKind::Wall => "wall",
            StructureKind::Column => "column",
        })
    }
}

/// Per-material data carried into exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialInfo {
    pub uv_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub structure_kind: StructureKind,
    pub elements: Vec<SceneElement>,
    pub bounding_box: Aabb,
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialInfo>,
}

impl SceneGraph {
    pub fn new(structure_kind: StructureKind, elements: Vec<SceneElement>) -> Self {
        let mut g = SceneGraph {
            structure_kind,
            elements,
            bounding_box: Aabb::EMPTY,
            materials: BTreeMap::new(),
        };
        g.refresh_bounds();
        g
    }

    pub fn refresh_bounds(&mut self) {
        self.bounding_box = self.elements.iter().fold(Aabb::EMPTY, |b, e| b.union(e.world_aabb()));
    }

    pub fn walk<'a>(&'a self, mut f: impl FnMut(&'a SceneElement)) {
        for e in &self.elements {
            e.walk(&mut f);
        }
    }

    pub fn walk_mut(&mut self, mut f: impl FnMut(&mut SceneElement)) {
        for e in &mut self.elements {
            e.walk_mut(&mut f);
        }
    }

    pub fn attribute_ids(&self) -> Vec<&str> {
        let mut ids = Vec::new();
        self.walk(|e| ids.push(e.attribute_id.as_str()));
        ids
    }

    pub fn find(&self, id: &str) -> Option<&SceneElement> {
        self.elements.iter().find_map(|e| e.find(id))
    }

    pub fn find_mut(&mut self, id: &str) -> Option<&mut SceneElement> {
        self.elements.iter_mut().find_map(|e| e.find_mut(id))
    }

    /// Registry pass: ids unique and well formed, meshes index-valid, scales
    /// positive.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        let mut result = Ok(());
        self.walk(|e| {
            if result.is_err() {
                return;
            }
            let id = e.attribute_id.as_str();
            if !id.contains('.') {
                if let Err(err) = id.parse::<AttributeId>() {
                    result = Err(err);
                    return;
                }
            }
            if !seen.insert(id) {
                result = Err(ModelError::DuplicateAttribute(id.to_string()));
                return;
            }
            if let Err(err) = check_scale(e.transform.s).and_then(|_| e.mesh.validate()) {
                result = Err(err);
            }
        });
        result
    }

    /// Every mesh with transforms baked into world space, in depth-first
    /// order, paired with the element it came from.
    pub fn baked(&self) -> Vec<(&SceneElement, Mesh)> {
        fn rec<'a>(e: &'a SceneElement, parent: &Affine, out: &mut Vec<(&'a SceneElement, Mesh)>) {
            let world = parent.mul(&e.transform.to_affine());
            let mesh = Mesh {
                vertices: e.mesh.vertices.iter().map(|&v| world.apply(v)).collect(),
                faces: e.mesh.faces.clone(),
            };
            out.push((e, mesh));
            for c in &e.children {
                rec(c, &world, out);
            }
        }
        let mut out = Vec::new();
        for e in &self.elements {
            rec(e, &Affine::IDENTITY, &mut out);
        }
        out
    }
}

/// Yaw that turns an asset's front (local -y) toward `dir`.
pub fn yaw_facing(dir: Vec2) -> f64 {
    crate::geom::wrap_angle(dir.y.atan2(dir.x) + FRAC_PI_2)
}

/// Unit direction an asset with the given yaw faces.
pub fn facing_of_yaw(yaw: f64) -> Vec2 {
    Vec2::new(0.0, -1.0).rotated(yaw)
}
