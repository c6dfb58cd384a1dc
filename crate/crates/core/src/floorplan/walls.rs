use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{
    arc_points, circle_from_chord, room_number, side_facing, validate_structure_dims, Classification, Edge, EdgeKind,
    FloorPolygon, FloorplanError, PlacedFloorplan,
};
use crate::geom::{bounding_rect, Rect, Vec2, Vec3, EPS};
use crate::model::{AttributeId, AttributeRegistry, Facing, Mesh, SceneElement};

/// Gap between an external wall's outer face and the `outer` cladding skin.
pub const SKIN_OFFSET: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpeningKind {
    Door,
    Window,
}

/// Rectangular hole in side coordinates (`u` along the wall from its left
/// end as seen from inside the room, `z` up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub u0: f64,
    pub u1: f64,
    pub z0: f64,
    pub z1: f64,
    pub kind: OpeningKind,
}

impl Hole {
    fn contains(&self, u: f64, z: f64) -> bool {
        u > self.u0 && u < self.u1 && z > self.z0 && z < self.z1
    }
}

/// One straight stretch of a room side. `v` is measured along the side's
/// outward normal from the room's boundary line: external pieces occupy
/// `[0, t]`, a room's half of a shared wall `[-t/2, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallPiece {
    pub u0: f64,
    pub u1: f64,
    /// Extension past `u0` (toward negative `u`) closing a convex corner.
    pub ext_lo: f64,
    /// Extension past `u1`.
    pub ext_hi: f64,
    pub v0: f64,
    pub v1: f64,
    pub internal: bool,
    /// The neighbouring room's side sharing this piece.
    pub twin: Option<AttributeId>,
}

impl WallPiece {
    pub fn span(&self) -> (f64, f64) {
        (self.u0 - self.ext_lo, self.u1 + self.ext_hi)
    }
}

/// All straight wall geometry of one room side, tagged `roomX_idY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallSide {
    pub id: AttributeId,
    pub room: String,
    pub facing: Facing,
    /// Left end of the side on the room boundary, seen from inside.
    pub origin: Vec2,
    /// Unit direction of increasing `u`.
    pub dir: Vec2,
    /// Unit normal out of the room.
    pub normal: Vec2,
    pub length: f64,
    pub height: f64,
    pub thickness: f64,
    pub pieces: Vec<WallPiece>,
    pub holes: Vec<Hole>,
}

impl WallSide {
    pub fn world(&self, u: f64, v: f64, z: f64) -> Vec3 {
        (self.origin + self.dir * u + self.normal * v).extend(z)
    }

    pub fn u_of(&self, p: Vec2) -> f64 {
        (p - self.origin).dot(self.dir)
    }

    pub fn piece_at(&self, u0: f64, u1: f64) -> Option<&WallPiece> {
        self.pieces.iter().find(|p| u0 >= p.u0 - EPS && u1 <= p.u1 + EPS)
    }

    /// Closed mesh of every piece with its holes cut through.
    pub fn mesh(&self) -> Mesh {
        let mut mesh = Mesh::default();
        for piece in &self.pieces {
            let (ua, ub) = piece.span();
            let holes: Vec<Hole> = self
                .holes
                .iter()
                .filter(|h| h.u1 > ua + EPS && h.u0 < ub - EPS)
                .copied()
                .collect();
            mesh.append(&slab(self, ua, ub, piece.v0, piece.v1, &holes, false));
        }
        mesh
    }

    /// Outward-facing cladding surface for the external pieces.
    pub fn skin(&self) -> Mesh {
        let mut mesh = Mesh::default();
        for piece in self.pieces.iter().filter(|p| !p.internal) {
            let (ua, ub) = piece.span();
            let v = piece.v1 + SKIN_OFFSET;
            mesh.append(&slab(self, ua, ub, v, v, &self.holes, true));
        }
        mesh
    }

    /// World box of the side's geometry before any openings.
    pub fn footprint(&self) -> Rect {
        let pts: Vec<Vec2> = self
            .pieces
            .iter()
            .flat_map(|p| {
                let (ua, ub) = p.span();
                [(ua, p.v0), (ua, p.v1), (ub, p.v0), (ub, p.v1)]
            })
            .map(|(u, v)| self.origin + self.dir * u + self.normal * v)
            .collect();
        bounding_rect(&pts)
    }
}

/// A curved external wall, tagged `arcN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcWall {
    pub id: AttributeId,
    pub room: String,
    /// Discretized room-side boundary.
    pub inner: Vec<Vec2>,
    /// Unit outward normal at each `inner` point.
    pub normals: Vec<Vec2>,
    pub thickness: f64,
    pub height: f64,
}

impl ArcWall {
    pub fn outer(&self) -> Vec<Vec2> {
        self.inner
            .iter()
            .zip(&self.normals)
            .map(|(&p, &n)| p + n * self.thickness)
            .collect()
    }

    pub fn mesh(&self) -> Mesh {
        let mut b = Builder::default();
        let (inner, outer) = (&self.inner, self.outer());
        let n = inner.len();
        let h = self.height;
        let at = |p: Vec2, z: f64| p.extend(z);
        for k in 0..n - 1 {
            let nrm = ((self.normals[k] + self.normals[k + 1]) * 0.5).extend(0.0);
            let (p0, p1, q0, q1) = (inner[k], inner[k + 1], outer[k], outer[k + 1]);
            b.quad([at(p0, 0.0), at(p1, 0.0), at(p1, h), at(p0, h)], nrm * -1.0);
            b.quad([at(q0, 0.0), at(q1, 0.0), at(q1, h), at(q0, h)], nrm);
            b.quad(
                [at(p0, 0.0), at(q0, 0.0), at(q1, 0.0), at(p1, 0.0)],
                Vec3::new(0.0, 0.0, -1.0),
            );
            b.quad([at(p0, h), at(q0, h), at(q1, h), at(p1, h)], Vec3::new(0.0, 0.0, 1.0));
        }
        let t0 = (inner[0] - inner[1]).extend(0.0);
        b.quad(
            [at(inner[0], 0.0), at(outer[0], 0.0), at(outer[0], h), at(inner[0], h)],
            t0,
        );
        let t1 = (inner[n - 1] - inner[n - 2]).extend(0.0);
        b.quad(
            [
                at(inner[n - 1], 0.0),
                at(outer[n - 1], 0.0),
                at(outer[n - 1], h),
                at(inner[n - 1], h),
            ],
            t1,
        );
        b.mesh
    }

    pub fn skin(&self) -> Mesh {
        let mut b = Builder::default();
        let h = self.height;
        let pts: Vec<Vec2> = self
            .inner
            .iter()
            .zip(&self.normals)
            .map(|(&p, &n)| p + n * (self.thickness + SKIN_OFFSET))
            .collect();
        for k in 0..pts.len() - 1 {
            let nrm = ((self.normals[k] + self.normals[k + 1]) * 0.5).extend(0.0);
            b.quad(
                [
                    pts[k].extend(0.0),
                    pts[k + 1].extend(0.0),
                    pts[k + 1].extend(h),
                    pts[k].extend(h),
                ],
                nrm,
            );
        }
        b.mesh
    }
}

/// Extruded wall structure of a wall-type scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallSet {
    pub sides: Vec<WallSide>,
    pub arcs: Vec<ArcWall>,
    pub thickness: f64,
    pub height: f64,
}

impl WallSet {
    pub fn side(&self, id: &AttributeId) -> Option<&WallSide> {
        self.sides.iter().find(|s| &s.id == id)
    }

    pub fn side_mut(&mut self, id: &AttributeId) -> Option<&mut WallSide> {
        self.sides.iter_mut().find(|s| &s.id == id)
    }

    pub fn sides_of<'a>(&'a self, room: &'a str) -> impl Iterator<Item = &'a WallSide> + 'a {
        self.sides.iter().filter(move |s| s.room == room)
    }

    /// One element per side and per arc with ids set but not registered.
    pub fn wall_elements(&self) -> Vec<SceneElement> {
        self.sides
            .iter()
            .map(|s| {
                let mut e = SceneElement::new(s.mesh());
                e.attribute_id = s.id.to_string();
                e
            })
            .chain(self.arcs.iter().map(|a| {
                let mut e = SceneElement::new(a.mesh());
                e.attribute_id = a.id.to_string();
                e
            }))
            .collect()
    }

    pub fn outer_skin(&self) -> Mesh {
        let mut m = Mesh::default();
        for s in &self.sides {
            m.append(&s.skin());
        }
        for a in &self.arcs {
            m.append(&a.skin());
        }
        m
    }
}

/// Offset every boundary edge into a wall prism of the given thickness and
/// extrude it to `height`. External walls grow outward so the declared room
/// sizes stay clear; shared walls straddle the boundary line.
pub fn build_walls(
    plan: &PlacedFloorplan,
    edges: &[Edge],
    thickness: f64,
    height: f64,
    arc_segments: usize,
) -> Result<WallSet, FloorplanError> {
    validate_structure_dims(thickness, height)?;
    let t = thickness;
    let room_rects: Vec<Rect> = plan.rooms.iter().map(|r| r.rect()).collect();

    // Base rectangles of straight external walls, for corner fill decisions.
    let ext_rects: Vec<(usize, Rect)> = edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.classification == Classification::External && e.kind == EdgeKind::Line)
        .map(|(i, e)| {
            let n = e.outward() * t;
            (i, bounding_rect(&[e.start, e.end, e.start + n, e.end + n]))
        })
        .collect();
    let fillable = |c: Vec2, me: usize| {
        !room_rects.iter().any(|r| r.contains_open(c)) && !ext_rects.iter().any(|(i, r)| *i != me && r.contains_open(c))
    };

    let mut sides: Vec<WallSide> = Vec::new();
    let mut arcs = Vec::new();
    for (ei, edge) in edges.iter().enumerate() {
        if edge.kind == EdgeKind::Arc {
            let pts = arc_points(edge.start, edge.end, edge.h_chord, arc_segments);
            let (center, _) = circle_from_chord(edge.start, edge.end, edge.h_chord);
            let normals = pts
                .iter()
                .map(|&p| (p - center).normalized() * edge.h_chord.signum())
                .collect();
            arcs.push(ArcWall {
                id: AttributeId::Arc(arcs.len() as u32 + 1),
                room: edge.owner_rooms[0].clone(),
                inner: pts,
                normals,
                thickness: t,
                height,
            });
            continue;
        }
        for (k, room_name) in edge.owner_rooms.iter().enumerate() {
            let room = plan
                .room(room_name)
                .ok_or_else(|| FloorplanError::UnknownRoom(room_name.clone()))?;
            let side_index = edge.owner_sides[k];
            let facing = side_facing(side_index);
            let id = AttributeId::room_wall(room.number, facing);
            let side = match sides.iter().position(|s| s.id == id) {
                Some(i) => &mut sides[i],
                None => {
                    let (p, q) = room.side(side_index);
                    sides.push(WallSide {
                        id,
                        room: room_name.clone(),
                        facing,
                        origin: q,
                        dir: (p - q).normalized(),
                        normal: facing.outward(),
                        length: p.distance(q),
                        height,
                        thickness: t,
                        pieces: Vec::new(),
                        holes: Vec::new(),
                    });
                    sides.last_mut().unwrap()
                }
            };
            let (ua, ub) = (side.u_of(edge.start), side.u_of(edge.end));
            let (u0, u1) = (ua.min(ub), ua.max(ub));
            let piece = if edge.classification == Classification::Internal {
                let other = 1 - k;
                let twin_room = room_number(&edge.owner_rooms[other])?;
                WallPiece {
                    u0,
                    u1,
                    ext_lo: 0.0,
                    ext_hi: 0.0,
                    v0: -t / 2.0,
                    v1: 0.0,
                    internal: true,
                    twin: Some(AttributeId::room_wall(twin_room, side_facing(edge.owner_sides[other]))),
                }
            } else {
                // Counter-clockwise end sits at u0, start at u1.
                let d = (edge.end - edge.start).normalized();
                let n = edge.outward();
                let beyond_end = edge.end + d * (t / 2.0) + n * (t / 2.0);
                let ext_lo = if fillable(beyond_end, ei) { t } else { 0.0 };
                let arc_before = edges
                    .iter()
                    .any(|o| o.kind == EdgeKind::Arc && o.end.approx_eq(edge.start, EPS));
                let before_start = edge.start - d * (t / 2.0) + n * (t / 2.0);
                let ext_hi = if arc_before && fillable(before_start, ei) {
                    t
                } else {
                    0.0
                };
                WallPiece {
                    u0,
                    u1,
                    ext_lo,
                    ext_hi,
                    v0: 0.0,
                    v1: t,
                    internal: false,
                    twin: None,
                }
            };
            side.pieces.push(piece);
        }
    }
    for s in &mut sides {
        s.pieces.sort_by(|a, b| a.u0.total_cmp(&b.u0));
    }
    sides.sort_by_key(|s| (room_number(&s.room).unwrap_or(u32::MAX), s.facing));
    Ok(WallSet {
        sides,
        arcs,
        thickness: t,
        height,
    })
}

/// Group floors and walls under their `roomX` containers and add the
/// `outer` cladding skin.
pub fn assemble_wall_structure(
    floors: &[FloorPolygon],
    walls: &WallSet,
    registry: &mut AttributeRegistry,
) -> Result<Vec<SceneElement>, FloorplanError> {
    let mut out = Vec::new();
    for floor in floors {
        let n = room_number(&floor.room)?;
        let mut room = registry.set_attribute(SceneElement::new(Mesh::default()), &AttributeId::Room(n))?;
        room.children
            .push(registry.set_attribute(SceneElement::new(floor.mesh()), &AttributeId::RoomFloor(n))?);
        for side in walls.sides_of(&floor.room) {
            room.children
                .push(registry.set_attribute(SceneElement::new(side.mesh()), &side.id)?);
        }
        for arc in walls.arcs.iter().filter(|a| a.room == floor.room) {
            room.children
                .push(registry.set_attribute(SceneElement::new(arc.mesh()), &arc.id)?);
        }
        out.push(room);
    }
    let skin = walls.outer_skin();
    if !skin.is_empty() {
        out.push(registry.set_attribute(SceneElement::new(skin), &AttributeId::Outer)?);
    }
    Ok(out)
}

/// Deduplicating triangle emitter.
#[derive(Default)]
pub(crate) struct Builder {
    pub mesh: Mesh,
    index: HashMap<[u64; 3], u32>,
}

impl Builder {
    pub fn vertex(&mut self, p: Vec3) -> u32 {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        let mesh = &mut self.mesh;
        *self.index.entry(key).or_insert_with(|| {
            mesh.vertices.push(p);
            (mesh.vertices.len() - 1) as u32
        })
    }

    /// Two triangles over the cyclic quad `q`, wound so the normal agrees
    /// with `outward`.
    pub fn quad(&mut self, q: [Vec3; 4], outward: Vec3) {
        let normal = (q[1] - q[0]).cross(q[2] - q[0]) + (q[2] - q[0]).cross(q[3] - q[0]);
        let idx = q.map(|p| self.vertex(p));
        if normal.dot(outward) >= 0.0 {
            self.mesh.faces.push([idx[0], idx[1], idx[2]]);
            self.mesh.faces.push([idx[0], idx[2], idx[3]]);
        } else {
            self.mesh.faces.push([idx[0], idx[2], idx[1]]);
            self.mesh.faces.push([idx[0], idx[3], idx[2]]);
        }
    }
}

/// Box slab `[ua, ub] x [v0, v1] x [0, height]` in side coordinates with
/// rectangular holes punched through along `v`. The solid is decomposed on
/// the grid induced by the hole bounds so neighbouring faces share edges
/// exactly. With `surface_only` just the `v1` face is emitted.
fn slab(side: &WallSide, ua: f64, ub: f64, v0: f64, v1: f64, holes: &[Hole], surface_only: bool) -> Mesh {
    let mut us = vec![ua, ub];
    let mut zs = vec![0.0, side.height];
    for h in holes {
        us.extend([h.u0, h.u1].into_iter().filter(|&u| u > ua && u < ub));
        zs.extend([h.z0, h.z1].into_iter().filter(|&z| z > 0.0 && z < side.height));
    }
    us.sort_by(f64::total_cmp);
    us.dedup();
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let (nu, nz) = (us.len() - 1, zs.len() - 1);
    let solid = |i: isize, k: isize| {
        if i < 0 || k < 0 || i as usize >= nu || k as usize >= nz {
            return false;
        }
        let (i, k) = (i as usize, k as usize);
        let (um, zm) = ((us[i] + us[i + 1]) / 2.0, (zs[k] + zs[k + 1]) / 2.0);
        !holes.iter().any(|h| h.contains(um, zm))
    };
    let p = |u: f64, v: f64, z: f64| side.world(u, v, z);
    let n3 = side.normal.extend(0.0);
    let d3 = side.dir.extend(0.0);
    let up = Vec3::new(0.0, 0.0, 1.0);

    let mut b = Builder::default();
    for i in 0..nu {
        for k in 0..nz {
            let (ii, kk) = (i as isize, k as isize);
            if !solid(ii, kk) {
                continue;
            }
            let (u0, u1, z0, z1) = (us[i], us[i + 1], zs[k], zs[k + 1]);
            b.quad([p(u0, v1, z0), p(u1, v1, z0), p(u1, v1, z1), p(u0, v1, z1)], n3);
            if surface_only {
                continue;
            }
            b.quad([p(u0, v0, z0), p(u1, v0, z0), p(u1, v0, z1), p(u0, v0, z1)], n3 * -1.0);
            if !solid(ii - 1, kk) {
                b.quad([p(u0, v0, z0), p(u0, v1, z0), p(u0, v1, z1), p(u0, v0, z1)], d3 * -1.0);
            }
            if !solid(ii + 1, kk) {
                b.quad([p(u1, v0, z0), p(u1, v1, z0), p(u1, v1, z1), p(u1, v0, z1)], d3);
            }
            if !solid(ii, kk - 1) {
                b.quad([p(u0, v0, z0), p(u1, v0, z0), p(u1, v1, z0), p(u0, v1, z0)], up * -1.0);
            }
            if !solid(ii, kk + 1) {
                b.quad([p(u0, v0, z1), p(u1, v0, z1), p(u1, v1, z1), p(u0, v1, z1)], up);
            }
        }
    }
    b.mesh
}
