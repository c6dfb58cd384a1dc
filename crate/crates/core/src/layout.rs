//! Floor and wall object placement: stable slots, anchor-relative objects,
//! collision separation and orientation refinement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floorplan::{ColumnGridSpec, FloorPolygon, PlacedRoom, UnitRegion, WallSet, WallSide};
use crate::geom::{bounding_rect, centroid, clip_half_plane, rect_in_polygon, snap_quarter, Rect, Vec2, Vec3, EPS};
use crate::model::{facing_of_yaw, yaw_facing, Facing};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("`{object}` ({w:.2} x {d:.2} m) does not fit region `{region}`")]
    ObjectLargerThanRegion {
        object: String,
        region: String,
        w: f64,
        d: f64,
    },
    #[error("anchor `{0}` is not defined in this region")]
    UnknownAnchor(String),
    #[error("`{object}` at ({x:.3}, {y:.3}) lies outside region `{region}`")]
    ResultOutsideRegion {
        object: String,
        region: String,
        x: f64,
        y: f64,
    },
    #[error("collisions unresolved after {iters} sweeps; `{object}` is the lowest-priority offender")]
    Unresolvable { object: String, index: usize, iters: usize },
    #[error("wall `{wall}` has no free span for `{object}`")]
    WallFullyOccupied { wall: String, object: String },
    #[error("slot index {index} out of range for {slot:?} (0..4)")]
    BadSlotIndex { slot: Slot, index: usize },
    #[error("region `{0}` is not defined")]
    UnknownRegion(String),
    #[error("wall objects are not allowed in column scenes")]
    WallObjectInColumnScene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Room,
    Unit,
}

/// Area objects are laid out in: a room floor (less the shared-wall halves)
/// or a column unit (less the columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRegion {
    pub kind: RegionKind,
    pub id: String,
    /// Counter-clockwise.
    pub polygon: Vec<Vec2>,
    /// Rectangle slots are measured from.
    pub frame: Rect,
    /// Prefix for issued anchor ids when it differs from `id`, as for
    /// the units of a multi-cell column room.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_prefix: Option<String>,
}

impl PlacementRegion {
    /// A room region. Shared walls straddle the room boundary, so sides
    /// with a shared piece are pulled in by half the wall thickness.
    pub fn room(room: &PlacedRoom, floor: &FloorPolygon, walls: &WallSet) -> Self {
        let mut polygon = floor.polygon.clone();
        let mut frame = room.rect();
        for side in walls.sides_of(room.name()) {
            if !side.pieces.iter().any(|p| p.internal) {
                continue;
            }
            let inset = side.thickness / 2.0;
            let n = side.normal;
            polygon = clip_half_plane(&polygon, n, n.dot(side.origin) - inset);
            match side.facing {
                Facing::West => frame.min.x += inset,
                Facing::East => frame.max.x -= inset,
                Facing::South => frame.min.y += inset,
                Facing::North => frame.max.y -= inset,
            }
        }
        let hull = bounding_rect(&polygon);
        let frame = Rect::new(
            Vec2::new(frame.min.x.max(hull.min.x), frame.min.y.max(hull.min.y)),
            Vec2::new(frame.max.x.min(hull.max.x), frame.max.y.min(hull.max.y)),
        );
        PlacementRegion {
            kind: RegionKind::Room,
            id: room.name().to_string(),
            polygon,
            frame,
            anchor_prefix: None,
        }
    }

    /// A column unit less a band of the column radius on every side.
    pub fn unit(unit: &UnitRegion, grid: &ColumnGridSpec) -> Self {
        let frame = unit.rect.shrunk(grid.column_radius);
        PlacementRegion {
            kind: RegionKind::Unit,
            id: unit.name(),
            polygon: frame.corners().to_vec(),
            frame,
            anchor_prefix: None,
        }
    }

    pub fn rect(id: &str, frame: Rect) -> Self {
        PlacementRegion {
            kind: RegionKind::Room,
            id: id.to_string(),
            polygon: frame.corners().to_vec(),
            frame,
            anchor_prefix: None,
        }
    }

    pub fn contains(&self, r: &Rect) -> bool {
        self.frame.contains_rect(r, 1e-9) && rect_in_polygon(r, &self.polygon, 1e-9)
    }

    pub fn anchor_prefix(&self) -> &str {
        self.anchor_prefix.as_deref().unwrap_or(&self.id)
    }

    pub fn with_anchor_prefix(mut self, prefix: &str) -> Self {
        self.anchor_prefix = Some(prefix.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialRelation {
    Left,
    Right,
    InFrontOf,
    Behind,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceLevel {
    Near,
    Far,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutTriplet {
    pub anchor: String,
    pub relation: SpatialRelation,
    pub distance: DistanceLevel,
    pub object_query: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementConfig {
    pub lambda_near: f64,
    pub lambda_far: f64,
    pub basis: BTreeMap<SpatialRelation, Vec3>,
    pub collision_max_iters: usize,
    pub collision_step: f64,
    /// Gap kept between stable objects and walls.
    pub wall_clearance: f64,
    /// Relative objects closer than this to their anchor turn toward it.
    pub face_anchor_radius: f64,
    /// Objects whose back is this close to a wall turn to face the room.
    pub wall_snap_distance: f64,
    pub hang_height: f64,
    pub wall_object_max_fraction: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            lambda_near: 0.6,
            lambda_far: 1.8,
            basis: BTreeMap::from([
                (SpatialRelation::Right, Vec3::new(1.0, 0.0, 0.0)),
                (SpatialRelation::Left, Vec3::new(-1.0, 0.0, 0.0)),
                (SpatialRelation::InFrontOf, Vec3::new(0.0, -1.0, 0.0)),
                (SpatialRelation::Behind, Vec3::new(0.0, 1.0, 0.0)),
                (SpatialRelation::Above, Vec3::new(0.0, 0.0, 1.0)),
            ]),
            collision_max_iters: 64,
            collision_step: 0.02,
            wall_clearance: 0.05,
            face_anchor_radius: 1.5,
            wall_snap_distance: 0.1,
            hang_height: 1.5,
            wall_object_max_fraction: 0.6,
        }
    }
}

impl PlacementConfig {
    pub fn lambda(&self, d: DistanceLevel) -> f64 {
        match d {
            DistanceLevel::Near => self.lambda_near,
            DistanceLevel::Far => self.lambda_far,
        }
    }

    pub fn basis(&self, r: SpatialRelation) -> Vec3 {
        self.basis
            .get(&r)
            .copied()
            .unwrap_or_else(|| PlacementConfig::default().basis[&r])
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda_near > 0.0 && self.lambda_near < self.lambda_far) {
            return Err("lambda_near must be positive and below lambda_far".into());
        }
        for (r, v) in &self.basis {
            if (v.length() - 1.0).abs() > 1e-9 {
                return Err(format!("basis for {r:?} is not unit length"));
            }
        }
        if self.collision_max_iters == 0 || !(self.collision_step > 0.0) {
            return Err("collision parameters must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Corner,
    Edge,
    Center,
    Relative,
    Wall,
}

impl Slot {
    /// Lower moves less during collision resolution.
    pub fn rank(self) -> u8 {
        self as u8
    }
}

/// A positioned object. `position` is the footprint centre at the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub object: String,
    pub position: Vec3,
    pub yaw: f64,
    pub scale: Vec3,
    /// Unscaled asset extents.
    pub size: Vec3,
    pub slot: Slot,
    /// Issued to edge and centre placements.
    pub anchor_id: Option<String>,
    /// The anchor a relative placement hangs off.
    pub anchor_ref: Option<String>,
    /// Target wall of a wall placement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall: Option<String>,
}

impl Placement {
    pub fn extents(&self) -> Vec3 {
        self.size.mul_elem(self.scale)
    }

    /// Half extents of the yawed footprint's axis-aligned box.
    pub fn half_xy(&self) -> Vec2 {
        half_extents(self.extents(), self.yaw)
    }

    pub fn rect(&self) -> Rect {
        Rect::from_center(self.position.xy(), self.half_xy())
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.position.z, self.position.z + self.extents().z)
    }
}

fn half_extents(ext: Vec3, yaw: f64) -> Vec2 {
    let (s, c) = yaw.sin_cos();
    let (s, c) = (s.abs(), c.abs());
    Vec2::new(c * ext.x + s * ext.y, s * ext.x + c * ext.y) * 0.5
}

/// Sequential anchor ids per region: `<region>_a1`, `<region>_a2`, ...
#[derive(Debug, Clone, Default)]
pub struct AnchorIssuer {
    next: BTreeMap<String, usize>,
}

impl AnchorIssuer {
    pub fn issue(&mut self, region: &str) -> String {
        let n = self.next.entry(region.to_string()).or_insert(0);
        *n += 1;
        format!("{region}_a{n}")
    }
}

fn larger(object: &str, region: &PlacementRegion, ext: Vec3) -> LayoutError {
    LayoutError::ObjectLargerThanRegion {
        object: object.to_string(),
        region: region.id.clone(),
        w: ext.x,
        d: ext.y,
    }
}

/// Put an object in a corner (0..4, counter-clockwise from min-x/min-y),
/// against an edge (0 south, 1 east, 2 north, 3 west) or at the centroid.
pub fn place_stable(
    region: &PlacementRegion,
    object: &str,
    size: Vec3,
    slot: Slot,
    slot_index: usize,
    anchors: &mut AnchorIssuer,
    cfg: &PlacementConfig,
) -> Result<Placement, LayoutError> {
    let f = region.frame;
    let gap = cfg.wall_clearance;
    let (position, yaw, inward) = match slot {
        Slot::Corner => {
            let corner = *f.corners().get(slot_index).ok_or(LayoutError::BadSlotIndex {
                slot,
                index: slot_index,
            })?;
            let yaw = yaw_facing((f.center() - corner).normalized());
            let h = half_extents(size, yaw);
            let sx = if corner.x == f.min.x { 1.0 } else { -1.0 };
            let sy = if corner.y == f.min.y { 1.0 } else { -1.0 };
            let p = corner + Vec2::new(sx * (h.x + gap), sy * (h.y + gap));
            (p, yaw, (f.center() - corner).normalized())
        }
        Slot::Edge => {
            let c = f.corners();
            if slot_index >= 4 {
                return Err(LayoutError::BadSlotIndex {
                    slot,
                    index: slot_index,
                });
            }
            let mid = (c[slot_index] + c[(slot_index + 1) % 4]) * 0.5;
            let inward = match slot_index {
                0 => Vec2::new(0.0, 1.0),
                1 => Vec2::new(-1.0, 0.0),
                2 => Vec2::new(0.0, -1.0),
                _ => Vec2::new(1.0, 0.0),
            };
            let yaw = yaw_facing(inward);
            let h = half_extents(size, yaw);
            (
                mid + inward * (gap + h.dot(Vec2::new(inward.x.abs(), inward.y.abs()))),
                yaw,
                inward,
            )
        }
        Slot::Center => {
            let c = centroid(&region.polygon);
            (c, 0.0, Vec2::default())
        }
        Slot::Relative | Slot::Wall => {
            return Err(LayoutError::BadSlotIndex {
                slot,
                index: slot_index,
            })
        }
    };
    let mut p = Placement {
        object: object.to_string(),
        position: position.extend(0.0),
        yaw,
        scale: Vec3::ONE,
        size,
        slot,
        anchor_id: None,
        anchor_ref: None,
        wall: None,
    };
    if !f.contains_rect(&p.rect(), 1e-9) {
        return Err(larger(object, region, size));
    }
    // Concave arcs dent the frame; slide inward until the footprint clears.
    if !region.contains(&p.rect()) {
        let dir = if inward == Vec2::default() {
            (f.center() - p.position.xy()).normalized()
        } else {
            inward
        };
        let step = 0.02;
        let limit = (f.width().max(f.height()) / step).ceil() as usize;
        let start = p.position;
        let ok = (1..=limit).any(|k| {
            p.position = start + (dir * (step * k as f64)).extend(0.0);
            region.contains(&p.rect())
        });
        if !ok || dir == Vec2::default() {
            return Err(larger(object, region, size));
        }
    }
    if matches!(slot, Slot::Edge | Slot::Center) {
        p.anchor_id = Some(anchors.issue(region.anchor_prefix()));
    }
    Ok(p)
}

/// `p = p_anchor + lambda(d) R(yaw_anchor) v(s)`; `above` rests on the
/// anchor's top instead. The result inherits the anchor's yaw and is not
/// clamped.
pub fn place_relative(
    triplet: &LayoutTriplet,
    object: &str,
    size: Vec3,
    anchors: &BTreeMap<String, Placement>,
    cfg: &PlacementConfig,
) -> Result<Placement, LayoutError> {
    let a = anchors
        .get(&triplet.anchor)
        .ok_or_else(|| LayoutError::UnknownAnchor(triplet.anchor.clone()))?;
    let v = cfg.basis(triplet.relation);
    let offset = if triplet.relation == SpatialRelation::Above {
        v * a.extents().z
    } else {
        let r = v.xy().rotated(a.yaw);
        Vec3::new(r.x, r.y, v.z) * cfg.lambda(triplet.distance)
    };
    Ok(Placement {
        object: object.to_string(),
        position: a.position + offset,
        yaw: a.yaw,
        scale: Vec3::ONE,
        size,
        slot: Slot::Relative,
        anchor_id: None,
        anchor_ref: Some(triplet.anchor.clone()),
        wall: None,
    })
}

pub fn check_in_region(p: &Placement, region: &PlacementRegion) -> Result<(), LayoutError> {
    if region.contains(&p.rect()) {
        Ok(())
    } else {
        Err(LayoutError::ResultOutsideRegion {
            object: p.object.clone(),
            region: region.id.clone(),
            x: p.position.x,
            y: p.position.y,
        })
    }
}

/// Move a placement the least amount that brings its footprint inside the
/// region. Returns whether it moved; an unchanged placement is untouched.
pub fn clamp_into_region(p: &mut Placement, region: &PlacementRegion) -> bool {
    if region.contains(&p.rect()) {
        return false;
    }
    let f = region.frame;
    let h = p.half_xy();
    let c = p.position.xy();
    let clamp = |v: f64, lo: f64, hi: f64| if lo > hi { (lo + hi) / 2.0 } else { v.clamp(lo, hi) };
    let moved = Vec2::new(
        clamp(c.x, f.min.x + h.x, f.max.x - h.x),
        clamp(c.y, f.min.y + h.y, f.max.y - h.y),
    );
    p.position = moved.extend(p.position.z);
    if !region.contains(&p.rect()) {
        let target = centroid(&region.polygon);
        let start = moved;
        for k in 1..=50 {
            let q = start + (target - start) * (k as f64 / 50.0);
            p.position = q.extend(p.position.z);
            if region.contains(&p.rect()) {
                break;
            }
        }
    }
    true
}

fn collide(a: &Placement, b: &Placement) -> Option<(f64, f64)> {
    let (az, bz) = (a.z_range(), b.z_range());
    if az.1.min(bz.1) - az.0.max(bz.0) <= EPS {
        return None;
    }
    let (ox, oy) = a.rect().overlap(&b.rect());
    (ox > EPS && oy > EPS).then_some((ox, oy))
}

/// Number of overlapping pairs, the oracle used by the resolver's callers.
pub fn overlapping_pairs(ps: &[Placement]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            if collide(&ps[i], &ps[j]).is_some() {
                out.push((i, j));
            }
        }
    }
    out
}

/// Separate overlapping footprints. Each sweep visits pairs in order and
/// pushes the lower-priority object (later one on ties) out along the axis
/// of least overlap, falling back to the opposite side or the other axis
/// when a wall is in the way. Objects whose height ranges do not meet, such
/// as a lamp resting on a table, may share footprint.
pub fn avoid_collision(
    mut ps: Vec<Placement>,
    region: &PlacementRegion,
    cfg: &PlacementConfig,
) -> Result<Vec<Placement>, LayoutError> {
    for p in ps.iter_mut() {
        if clamp_into_region(p, region) {
            log::info!("{}: `{}` pulled back inside the region", region.id, p.object);
        }
    }
    let step = cfg.collision_step;
    let mut last = None;
    for _ in 0..cfg.collision_max_iters {
        let mut clean = true;
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let Some((ox, oy)) = collide(&ps[i], &ps[j]) else {
                    continue;
                };
                clean = false;
                let (m, o) = if ps[j].slot.rank() >= ps[i].slot.rank() {
                    (j, i)
                } else {
                    (i, j)
                };
                last = Some(m);
                let (mc, oc) = (ps[m].position.xy(), ps[o].position.xy());
                let (mh, oh) = (ps[m].half_xy(), ps[o].half_xy());
                let sign = |d: f64| if d >= 0.0 { 1.0 } else { -1.0 };
                let x_first = ox <= oy;
                let axes = if x_first { [0, 1] } else { [1, 0] };
                let mut candidates = Vec::new();
                for axis in axes {
                    let (d, reach) = if axis == 0 {
                        (sign(mc.x - oc.x), mh.x + oh.x + step)
                    } else {
                        (sign(mc.y - oc.y), mh.y + oh.y + step)
                    };
                    for s in [d, -d] {
                        let mut q = mc;
                        if axis == 0 {
                            q.x = oc.x + s * reach;
                        } else {
                            q.y = oc.y + s * reach;
                        }
                        candidates.push(q);
                    }
                }
                let original = ps[m].clone();
                let mut chosen = None;
                for q in &candidates {
                    let mut t = original.clone();
                    t.position = q.extend(t.position.z);
                    clamp_into_region(&mut t, region);
                    if collide(&t, &ps[o]).is_none() {
                        chosen = Some(t);
                        break;
                    }
                }
                ps[m] = chosen.unwrap_or_else(|| {
                    let mut t = original;
                    t.position = candidates[0].extend(t.position.z);
                    clamp_into_region(&mut t, region);
                    t
                });
            }
        }
        if clean {
            return Ok(ps);
        }
    }
    if overlapping_pairs(&ps).is_empty() {
        return Ok(ps);
    }
    let index = last.unwrap_or(0);
    Err(LayoutError::Unresolvable {
        object: ps[index].object.clone(),
        index,
        iters: cfg.collision_max_iters,
    })
}

/// Nearest frame side to the footprint and the gap to it, for the inward
/// direction of that side.
fn nearest_wall(r: &Rect, f: &Rect) -> (f64, Vec2) {
    [
        (r.min.y - f.min.y, Vec2::new(0.0, 1.0)),
        (f.max.x - r.max.x, Vec2::new(-1.0, 0.0)),
        (f.max.y - r.max.y, Vec2::new(0.0, -1.0)),
        (r.min.x - f.min.x, Vec2::new(1.0, 0.0)),
    ]
    .into_iter()
    .fold(
        (f64::MAX, Vec2::default()),
        |best, c| if c.0 < best.0 { c } else { best },
    )
}

/// Turn relative objects near their anchor toward it and objects backed
/// against a wall toward the room. Corner objects keep their diagonal.
pub fn refine_orientation(mut ps: Vec<Placement>, region: &PlacementRegion, cfg: &PlacementConfig) -> Vec<Placement> {
    let anchors: BTreeMap<String, Vec3> = ps
        .iter()
        .filter_map(|p| p.anchor_id.clone().map(|id| (id, p.position)))
        .collect();
    for p in ps.iter_mut() {
        if p.slot == Slot::Corner || p.slot == Slot::Wall {
            continue;
        }
        if let Some(a) = p.anchor_ref.as_ref().and_then(|id| anchors.get(id)) {
            let d = a.xy() - p.position.xy();
            if d.length() > EPS && d.length() <= cfg.face_anchor_radius {
                p.yaw = snap_quarter(yaw_facing(d.normalized()));
                continue;
            }
        }
        let r = p.rect();
        let (gap, inward) = nearest_wall(&r, &region.frame);
        if gap <= cfg.wall_snap_distance + EPS {
            p.yaw = yaw_facing(inward);
        }
    }
    ps
}

/// One object request for a region.
#[derive(Debug, Clone, PartialEq)]
pub enum ItemRequest {
    Stable { slot: Slot, index: usize },
    Relative(LayoutTriplet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorItem {
    pub object: String,
    pub size: Vec3,
    pub request: ItemRequest,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionLayout {
    pub placements: Vec<Placement>,
    /// Objects removed to reach a collision-free layout.
    pub dropped: Vec<String>,
    /// Relative objects pulled back into the region.
    pub clamped: Vec<String>,
}

/// Full floor layout of one region: stable objects, then relative ones,
/// separation, orientation, and separation again. Unresolvable offenders
/// are dropped one at a time. Anchor ids come from `issuer` so several
/// regions can share one numbering.
pub fn layout_region(
    region: &PlacementRegion,
    items: &[FloorItem],
    issuer: &mut AnchorIssuer,
    cfg: &PlacementConfig,
) -> Result<RegionLayout, LayoutError> {
    let mut out = RegionLayout::default();
    let mut ps = Vec::new();
    for it in items {
        if let ItemRequest::Stable { slot, index } = it.request {
            ps.push(place_stable(region, &it.object, it.size, slot, index, issuer, cfg)?);
        }
    }
    let anchors: BTreeMap<String, Placement> = ps
        .iter()
        .filter_map(|p| p.anchor_id.clone().map(|id| (id, p.clone())))
        .collect();
    for it in items {
        if let ItemRequest::Relative(t) = &it.request {
            let mut p = place_relative(t, &it.object, it.size, &anchors, cfg)?;
            if let Err(e) = check_in_region(&p, region) {
                log::info!("{e}; clamping");
                clamp_into_region(&mut p, region);
                out.clamped.push(p.object.clone());
            }
            ps.push(p);
        }
    }
    let resolve = |mut ps: Vec<Placement>, dropped: &mut Vec<String>| loop {
        match avoid_collision(ps.clone(), region, cfg) {
            Ok(v) => return Ok::<_, LayoutError>(v),
            Err(LayoutError::Unresolvable { index, object, .. }) => {
                log::warn!("{}: dropping `{object}` to resolve collisions", region.id);
                dropped.push(object);
                ps.remove(index);
            }
            Err(e) => return Err(e),
        }
    };
    let ps = resolve(ps, &mut out.dropped)?;
    let ps = refine_orientation(ps, region, cfg);
    out.placements = resolve(ps, &mut out.dropped)?;
    Ok(out)
}

/// Hang a wall object centred on the wall at hang height, scaled down to
/// fit, sliding sideways to clear openings and earlier wall objects.
pub fn place_wall_object(
    side: &WallSide,
    object: &str,
    size: Vec3,
    taken: &[(f64, f64)],
    cfg: &PlacementConfig,
) -> Result<Placement, LayoutError> {
    let k = (cfg.wall_object_max_fraction * side.length / size.x).min(1.0);
    let (w, h) = (size.x * k, size.z * k);
    let z0 = (cfg.hang_height - h / 2.0).max(0.0);
    let z1 = z0 + h;
    let mut blocked: Vec<(f64, f64)> = side
        .holes
        .iter()
        .filter(|o| o.z1 > z0 + EPS && o.z0 < z1 - EPS)
        .map(|o| (o.u0, o.u1))
        .chain(taken.iter().copied())
        .collect();
    blocked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut free = Vec::new();
    let mut cursor = 0.0;
    for (a, b) in blocked {
        if a > cursor {
            free.push((cursor, a));
        }
        cursor = cursor.max(b);
    }
    if cursor < side.length {
        free.push((cursor, side.length));
    }
    let want = side.length / 2.0;
    let u = free
        .iter()
        .filter(|(a, b)| b - a >= w - EPS)
        .map(|&(a, b)| want.clamp(a + w / 2.0, b - w / 2.0))
        .min_by(|x, y| (x - want).abs().total_cmp(&(y - want).abs()))
        .ok_or_else(|| LayoutError::WallFullyOccupied {
            wall: side.id.to_string(),
            object: object.to_string(),
        })?;
    let face = side
        .pieces
        .iter()
        .filter(|p| p.u0 - EPS <= u && u <= p.u1 + EPS)
        .map(|p| p.v0.min(0.0))
        .fold(0.0, f64::min);
    let depth = size.y * k;
    let inward = side.normal * -1.0;
    let centre = side.origin + side.dir * u + side.normal * face + inward * (depth / 2.0);
    Ok(Placement {
        object: object.to_string(),
        position: centre.extend(z0),
        yaw: yaw_facing(inward),
        scale: Vec3::new(k, k, k),
        size,
        slot: Slot::Wall,
        anchor_id: None,
        anchor_ref: None,
        wall: Some(side.id.to_string()),
    })
}

/// Span a wall placement occupies along its wall.
pub fn wall_span(side: &WallSide, p: &Placement) -> (f64, f64) {
    let u = side.u_of(p.position.xy());
    let w = p.extents().x / 2.0;
    (u - w, u + w)
}

/// Direction a placement's front faces.
pub fn front(p: &Placement) -> Vec2 {
    facing_of_yaw(p.yaw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn room43() -> PlacementRegion {
        PlacementRegion::rect("room1", Rect::new(Vec2::new(0.0, 0.0), Vec2::new(4.0, 3.0)))
    }

    fn cfg() -> PlacementConfig {
        PlacementConfig::default()
    }

    #[test]
    fn center_slot() {
        let mut iss = AnchorIssuer::default();
        let p = place_stable(
            &room43(),
            "table",
            Vec3::new(1.0, 1.0, 0.75),
            Slot::Center,
            0,
            &mut iss,
            &cfg(),
        )
        .unwrap();
        assert!(p.position.max_abs_diff(Vec3::new(2.0, 1.5, 0.0)) < 1e-12);
        assert_eq!(p.anchor_id.as_deref(), Some("room1_a1"));
    }

    #[test]
    fn corner_slot_clearance() {
        let mut iss = AnchorIssuer::default();
        let p = place_stable(
            &room43(),
            "cab",
            Vec3::new(0.5, 0.5, 1.0),
            Slot::Corner,
            0,
            &mut iss,
            &cfg(),
        )
        .unwrap();
        let r = p.rect();
        assert!((r.min.x - 0.05).abs() < 1e-12 && (r.min.y - 0.05).abs() < 1e-12);
        assert!(p.anchor_id.is_none());
        let p2 = place_stable(
            &room43(),
            "cab",
            Vec3::new(0.5, 0.5, 1.0),
            Slot::Corner,
            2,
            &mut iss,
            &cfg(),
        )
        .unwrap();
        assert!((p2.rect().max.x - 3.95).abs() < 1e-12 && (p2.rect().max.y - 2.95).abs() < 1e-12);
    }

    #[test]
    fn edge_slot_faces_inward() {
        let mut iss = AnchorIssuer::default();
        let p = place_stable(
            &room43(),
            "sofa",
            Vec3::new(2.0, 0.8, 0.8),
            Slot::Edge,
            0,
            &mut iss,
            &cfg(),
        )
        .unwrap();
        assert!(front(&p).approx_eq(Vec2::new(0.0, 1.0), 1e-12));
        assert!((p.rect().min.y - 0.05).abs() < 1e-12);
        assert!((p.position.x - 2.0).abs() < 1e-12);
        let e = place_stable(
            &room43(),
            "tv",
            Vec3::new(1.5, 0.4, 0.8),
            Slot::Edge,
            1,
            &mut iss,
            &cfg(),
        )
        .unwrap();
        assert!(front(&e).approx_eq(Vec2::new(-1.0, 0.0), 1e-12));
        assert!((e.rect().max.x - 3.95).abs() < 1e-12);
    }

    #[test]
    fn too_big() {
        let mut iss = AnchorIssuer::default();
        assert!(matches!(
            place_stable(
                &room43(),
                "x",
                Vec3::new(5.0, 1.0, 1.0),
                Slot::Center,
                0,
                &mut iss,
                &cfg()
            ),
            Err(LayoutError::ObjectLargerThanRegion { .. })
        ));
    }

    fn anchor(yaw: f64) -> BTreeMap<String, Placement> {
        let p = Placement {
            object: "table".into(),
            position: Vec3::new(2.0, 1.5, 0.0),
            yaw,
            scale: Vec3::ONE,
            size: Vec3::new(1.0, 1.0, 0.75),
            slot: Slot::Center,
            anchor_id: Some("room1_a1".into()),
            anchor_ref: None,
            wall: None,
        };
        BTreeMap::from([("room1_a1".to_string(), p)])
    }

    fn trip(rel: SpatialRelation, d: DistanceLevel) -> LayoutTriplet {
        LayoutTriplet {
            anchor: "room1_a1".into(),
            relation: rel,
            distance: d,
            object_query: "x".into(),
        }
    }

    #[test]
    fn relative_examples() {
        let s = Vec3::new(0.5, 0.5, 0.5);
        let p = place_relative(
            &trip(SpatialRelation::Right, DistanceLevel::Near),
            "c",
            s,
            &anchor(0.0),
            &cfg(),
        )
        .unwrap();
        assert!(p.position.max_abs_diff(Vec3::new(2.6, 1.5, 0.0)) < 1e-12);
        let p = place_relative(
            &trip(SpatialRelation::Right, DistanceLevel::Near),
            "c",
            s,
            &anchor(FRAC_PI_2),
            &cfg(),
        )
        .unwrap();
        assert!(p.position.max_abs_diff(Vec3::new(2.0, 2.1, 0.0)) < 1e-12);
        let p = place_relative(
            &trip(SpatialRelation::Above, DistanceLevel::Far),
            "lamp",
            s,
            &anchor(0.0),
            &cfg(),
        )
        .unwrap();
        assert_eq!(p.position.z, 0.75);
        assert_eq!(
            place_relative(
                &LayoutTriplet {
                    anchor: "room1_a9".into(),
                    ..trip(SpatialRelation::Left, DistanceLevel::Far)
                },
                "c",
                s,
                &anchor(0.0),
                &cfg()
            )
            .unwrap_err(),
            LayoutError::UnknownAnchor("room1_a9".into())
        );
    }

    fn obj(name: &str, x: f64, y: f64, slot: Slot) -> Placement {
        Placement {
            object: name.into(),
            position: Vec3::new(x, y, 0.0),
            yaw: 0.0,
            scale: Vec3::ONE,
            size: Vec3::new(1.0, 1.0, 1.0),
            slot,
            anchor_id: None,
            anchor_ref: None,
            wall: None,
        }
    }

    #[test]
    fn identical_positions_separate() {
        let ps = vec![obj("a", 2.0, 1.5, Slot::Center), obj("b", 2.0, 1.5, Slot::Relative)];
        let out = avoid_collision(ps, &room43(), &cfg()).unwrap();
        assert!(overlapping_pairs(&out).is_empty());
        assert_eq!(out[0].position, Vec3::new(2.0, 1.5, 0.0));
        for p in &out {
            assert!(room43().contains(&p.rect()));
        }
    }

    #[test]
    fn fixpoint_when_clear() {
        let ps = vec![obj("a", 1.0, 1.0, Slot::Center), obj("b", 3.0, 2.0, Slot::Relative)];
        assert_eq!(avoid_collision(ps.clone(), &room43(), &cfg()).unwrap(), ps);
    }

    #[test]
    fn wall_overlap_pushed_in() {
        let ps = vec![obj("a", 3.9, 1.5, Slot::Relative)];
        let out = avoid_collision(ps, &room43(), &cfg()).unwrap();
        assert!(room43().contains(&out[0].rect()));
    }

    #[test]
    fn stacked_objects_exempt() {
        let mut lamp = obj("lamp", 2.0, 1.5, Slot::Relative);
        lamp.position.z = 1.0;
        let ps = vec![obj("t", 2.0, 1.5, Slot::Center), lamp];
        assert_eq!(avoid_collision(ps.clone(), &room43(), &cfg()).unwrap(), ps);
    }

    #[test]
    fn overfull_region_unresolvable() {
        let ps: Vec<Placement> = (0..20)
            .map(|i| obj(&format!("o{i}"), 2.0, 1.5, Slot::Relative))
            .collect();
        assert!(matches!(
            avoid_collision(ps, &room43(), &cfg()),
            Err(LayoutError::Unresolvable { .. })
        ));
    }

    #[test]
    fn orientation_rules() {
        let mut chair = obj("chair", 2.0, 0.9, Slot::Relative);
        chair.anchor_ref = Some("room1_a1".into());
        let mut desk = obj("desk", 2.0, 1.5, Slot::Center);
        desk.anchor_id = Some("room1_a1".into());
        let mut lone = obj("lone", 1.0, 1.5, Slot::Center);
        lone.yaw = 0.3;
        let mut backed = obj("shelf", 3.0, 2.45, Slot::Center);
        backed.size = Vec3::new(1.0, 0.4, 1.0);
        let out = refine_orientation(vec![desk, chair, lone, backed], &room43(), &cfg());
        assert!(front(&out[1]).approx_eq(Vec2::new(0.0, 1.0), 1e-12));
        assert_eq!(out[2].yaw, 0.3);
        assert!(front(&out[3]).approx_eq(Vec2::new(0.0, -1.0), 1e-12));
    }

    fn wall() -> WallSide {
        use crate::floorplan::{build_walls, parse_edge, place_rooms, AdjacencySpec, RoomSpec};
        let plan = place_rooms(&[RoomSpec::new("room1", 4.0, 3.0)], &AdjacencySpec::default()).unwrap();
        let ws = build_walls(&plan, &parse_edge(&plan).unwrap(), 0.2, 3.0, 16).unwrap();
        ws.side(&"room1_id2".parse().unwrap()).unwrap().clone()
    }

    #[test]
    fn painting_centred() {
        let side = wall();
        let p = place_wall_object(&side, "painting", Vec3::new(1.0, 0.05, 0.8), &[], &cfg()).unwrap();
        assert!((p.position.x - 2.0).abs() < 1e-12);
        assert!((p.position.z + p.extents().z / 2.0 - 1.5).abs() < 1e-12);
        assert!(front(&p).approx_eq(Vec2::new(0.0, 1.0), 1e-12));
        assert!(p.rect().min.y >= -1e-12);
    }

    #[test]
    fn full_width_window_blocks_wall() {
        use crate::floorplan::{Hole, OpeningKind};
        let mut side = wall();
        side.holes.push(Hole {
            u0: 0.0,
            u1: 4.0,
            z0: 1.0,
            z1: 2.0,
            kind: OpeningKind::Window,
        });
        assert!(matches!(
            place_wall_object(&side, "painting", Vec3::new(1.0, 0.05, 0.8), &[], &cfg()),
            Err(LayoutError::WallFullyOccupied { .. })
        ));
    }

    #[test]
    fn wall_object_slides_past_window() {
        use crate::floorplan::{Hole, OpeningKind};
        let mut side = wall();
        side.holes.push(Hole {
            u0: 1.4,
            u1: 2.6,
            z0: 1.0,
            z1: 2.0,
            kind: OpeningKind::Window,
        });
        let p = place_wall_object(&side, "painting", Vec3::new(1.0, 0.05, 0.8), &[], &cfg()).unwrap();
        let (a, b) = wall_span(&side, &p);
        assert!(b <= 1.4 + 1e-9 || a >= 2.6 - 1e-9);
    }
}
