//! Wall openings with fitted door and window assets, and the gap-filling
//! rules of column structures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floorplan::{ColumnGridSpec, Gap, GapAxis, Hole, OpeningKind, WallSet, WallSide};
use crate::geom::{Aabb, Vec2, Vec3, EPS};
use crate::model::{yaw_facing, AttributeId, Mesh, SceneElement, SceneGraph, Transform};

pub const DEFAULT_DOOR_SIZE: (f64, f64) = (1.0, 2.1);
pub const DEFAULT_WINDOW_SIZE: (f64, f64) = (1.2, 1.0);
/// Minimum solid wall kept between two openings.
pub const MIN_MULLION: f64 = 0.1;
/// Minimum lintel kept above a window.
pub const MIN_LINTEL: f64 = 0.3;

pub const LONG_WINDOW_SILL: f64 = 0.3;
pub const SHORT_WINDOW_SILL: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpeningError {
    #[error(
        "`{target}`: {kind:?} {width} x {height} m at offset {offset} m does not fit a {length} x {wall_height} m wall"
    )]
    OpeningTooLarge {
        target: String,
        kind: OpeningKind,
        width: f64,
        height: f64,
        offset: f64,
        length: f64,
        wall_height: f64,
    },
    #[error("`{0}`: opening overlaps an existing opening or leaves less than 0.1 m between them")]
    OverlapWithExistingOpening(String),
    #[error("`{0}` is a curved wall; openings on arcs are not supported")]
    OpeningOnArc(String),
    #[error("`{0}` is not a room wall id")]
    NotAWall(String),
    #[error("wall `{0}` does not exist in this plan")]
    UnknownWall(String),
    #[error("`{0}`: opening straddles the junction of a shared and an exterior wall")]
    StraddlesJunction(String),
    #[error("asset `{0}` has a zero or negative extent")]
    DegenerateAsset(String),
    #[error("partition gap {0} lies on the perimeter")]
    PartitionOnPerimeter(Gap),
    #[error("partition gap {0} is outside the grid")]
    PartitionOutOfGrid(Gap),
    #[error("partition gap {0} listed twice")]
    DuplicatePartition(Gap),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpeningSpec {
    /// A `roomX_idY` wall.
    pub target: String,
    pub kind: OpeningKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    /// Distance from the wall's left end as seen from inside the room.
    pub horizontal_offset: f64,
    pub asset_query: String,
}

impl OpeningSpec {
    pub fn size(&self) -> (f64, f64) {
        let (w, h) = match self.kind {
            OpeningKind::Door => DEFAULT_DOOR_SIZE,
            OpeningKind::Window => DEFAULT_WINDOW_SIZE,
        };
        (self.width.unwrap_or(w), self.height.unwrap_or(h))
    }
}

/// A cut opening, in the coordinates of the targeted side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedOpening {
    pub target: AttributeId,
    /// The other room's side, for openings through a shared wall.
    pub twin: Option<AttributeId>,
    pub hole: Hole,
}

impl PlacedOpening {
    pub fn width(&self) -> f64 {
        self.hole.u1 - self.hole.u0
    }

    pub fn height(&self) -> f64 {
        self.hole.z1 - self.hole.z0
    }

    /// Through-thickness range in side `v` coordinates.
    pub fn v_range(&self, side: &WallSide) -> (f64, f64) {
        if self.twin.is_some() {
            (-side.thickness / 2.0, side.thickness / 2.0)
        } else {
            (0.0, side.thickness)
        }
    }

    /// World box of the void.
    pub fn hole_aabb(&self, side: &WallSide) -> Aabb {
        let (v0, v1) = self.v_range(side);
        let h = &self.hole;
        Aabb::from_points([
            side.world(h.u0, v0, h.z0),
            side.world(h.u1, v1, h.z1),
            side.world(h.u0, v1, h.z0),
            side.world(h.u1, v0, h.z1),
        ])
    }
}

fn clear_of(holes: &[Hole], u0: f64, u1: f64) -> bool {
    holes
        .iter()
        .all(|h| u1 + MIN_MULLION <= h.u0 + EPS || h.u1 + MIN_MULLION <= u0 + EPS)
}

/// Cut a rectangular hole through a wall. Doors start at the floor; windows
/// are centred vertically. A hole through a shared wall is cut in both
/// rooms' halves.
pub fn open_wall(walls: &mut WallSet, spec: &OpeningSpec) -> Result<PlacedOpening, OpeningError> {
    let id: AttributeId = spec
        .target
        .parse()
        .map_err(|_| OpeningError::NotAWall(spec.target.clone()))?;
    match id {
        AttributeId::Arc(_) => return Err(OpeningError::OpeningOnArc(spec.target.clone())),
        AttributeId::RoomWall { .. } => {}
        _ => return Err(OpeningError::NotAWall(spec.target.clone())),
    }
    let side = walls
        .side(&id)
        .ok_or_else(|| OpeningError::UnknownWall(spec.target.clone()))?;
    let (width, mut height) = spec.size();
    let too_large = || OpeningError::OpeningTooLarge {
        target: spec.target.clone(),
        kind: spec.kind,
        width,
        height,
        offset: spec.horizontal_offset,
        length: side.length,
        wall_height: side.height,
    };
    if !(width > 0.0 && height > 0.0 && spec.horizontal_offset >= 0.0)
        || spec.horizontal_offset + width > side.length + EPS
        || height > side.height + EPS
    {
        return Err(too_large());
    }
    let (u0, u1) = (spec.horizontal_offset, spec.horizontal_offset + width);
    let (z0, z1) = match spec.kind {
        OpeningKind::Door => (0.0, height),
        OpeningKind::Window => {
            if height > side.height - MIN_LINTEL {
                log::warn!(
                    "{}: window height {height} m capped to {} m",
                    spec.target,
                    side.height - MIN_LINTEL
                );
                height = side.height - MIN_LINTEL;
            }
            let sill = (side.height - height) / 2.0;
            (sill, sill + height)
        }
    };
    let piece = side
        .piece_at(u0, u1)
        .ok_or_else(|| OpeningError::StraddlesJunction(spec.target.clone()))?;
    if !clear_of(&side.holes, u0, u1) {
        return Err(OpeningError::OverlapWithExistingOpening(spec.target.clone()));
    }
    let hole = Hole {
        u0,
        u1,
        z0,
        z1,
        kind: spec.kind,
    };

    let twin = piece.twin;
    let twin_hole = match &twin {
        Some(tid) => {
            let tside = walls
                .side(tid)
                .ok_or_else(|| OpeningError::UnknownWall(tid.to_string()))?;
            let (a, b) = (
                tside.u_of(side.origin + side.dir * u0),
                tside.u_of(side.origin + side.dir * u1),
            );
            let (t0, t1) = (a.min(b), a.max(b));
            if !clear_of(&tside.holes, t0, t1) {
                return Err(OpeningError::OverlapWithExistingOpening(tid.to_string()));
            }
            Some(Hole { u0: t0, u1: t1, ..hole })
        }
        None => None,
    };
    walls.side_mut(&id).expect("side exists").holes.push(hole);
    if let (Some(tid), Some(th)) = (&twin, twin_hole) {
        walls.side_mut(tid).expect("twin exists").holes.push(th);
    }
    Ok(PlacedOpening { target: id, twin, hole })
}

fn scale_for(native: Vec3, target: Vec3, asset: &str) -> Result<Vec3, OpeningError> {
    if !(native.x > 0.0 && native.y > 0.0 && native.z > 0.0) {
        return Err(OpeningError::DegenerateAsset(asset.to_string()));
    }
    Ok(Vec3::new(target.x / native.x, target.y / native.y, target.z / native.z))
}

/// Rotate, scale and translate a door or window asset into its opening. The
/// asset's front (local -y) faces into the target room; the thickness axis
/// is scaled to the wall.
pub fn fit_asset(
    opening: &PlacedOpening,
    side: &WallSide,
    asset_id: &str,
    mesh: Mesh,
    native: Vec3,
) -> Result<SceneElement, OpeningError> {
    let (v0, v1) = opening.v_range(side);
    let s = scale_for(native, Vec3::new(opening.width(), v1 - v0, opening.height()), asset_id)?;
    let h = &opening.hole;
    let centre = side.origin + side.dir * ((h.u0 + h.u1) / 2.0) + side.normal * ((v0 + v1) / 2.0);
    let mut e = SceneElement::new(mesh);
    e.transform = Transform {
        t: centre.extend(h.z0),
        yaw: yaw_facing(side.normal * -1.0),
        s,
    };
    e.material_ref = Some(asset_id.to_string());
    Ok(e)
}

/// Replace wall and `outer` meshes with ones rebuilt from `walls`.
pub fn refresh_wall_meshes(graph: &mut SceneGraph, walls: &WallSet) {
    let skin = walls.outer_skin();
    graph.walk_mut(|e| {
        if e.attribute_id == "outer" {
            e.mesh = skin.clone();
        } else if let Some(side) = e.structural_id().and_then(|id| walls.side(&id)) {
            e.mesh = side.mesh();
        }
    });
    graph.refresh_bounds();
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapFill {
    Door,
    LongWindow,
    ShortWindow,
    PartitionShortWindow,
}

impl GapFill {
    pub fn category(self) -> crate::retrieval::AssetCategory {
        match self {
            GapFill::Door => crate::retrieval::AssetCategory::Door,
            _ => crate::retrieval::AssetCategory::Window,
        }
    }

    /// Bottom of the fill; the top is the underside of the beams.
    pub fn sill(self) -> f64 {
        match self {
            GapFill::Door => 0.0,
            GapFill::LongWindow => LONG_WINDOW_SILL,
            GapFill::ShortWindow | GapFill::PartitionShortWindow => SHORT_WINDOW_SILL,
        }
    }
}

/// Style queries for the three fill kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnStyles {
    pub door: String,
    pub long_window: String,
    pub short_window: String,
}

impl ColumnStyles {
    pub fn query(&self, fill: GapFill) -> &str {
        match fill {
            GapFill::Door => &self.door,
            GapFill::LongWindow => &self.long_window,
            GapFill::ShortWindow | GapFill::PartitionShortWindow => &self.short_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSlot {
    pub gap: Gap,
    pub fill: GapFill,
    pub asset_query: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnOpeningPlan {
    pub slots: Vec<ColumnSlot>,
}

/// Index of the middle gap among `gaps`, lower one when there are two.
pub fn middle_gap(gaps: usize) -> usize {
    (gaps - 1) / 2
}

/// Fill every perimeter gap: doors in the middle of the first and last rows,
/// long windows in the middle of the first and last columns, short windows
/// elsewhere. Interior partition gaps get short windows too.
pub fn plan_column_openings(
    grid: &ColumnGridSpec,
    partitions: &[Gap],
    styles: &ColumnStyles,
) -> Result<ColumnOpeningPlan, OpeningError> {
    let door_j = middle_gap(grid.cols - 1);
    let long_i = middle_gap(grid.rows - 1);
    let mut slots: Vec<ColumnSlot> = crate::floorplan::perimeter_gaps(grid)
        .into_iter()
        .map(|gap| {
            let fill = match gap.axis {
                GapAxis::Row if gap.j == door_j => GapFill::Door,
                GapAxis::Column if gap.i == long_i => GapFill::LongWindow,
                _ => GapFill::ShortWindow,
            };
            ColumnSlot {
                gap,
                fill,
                asset_query: styles.query(fill).to_string(),
            }
        })
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    for &gap in partitions {
        if !gap.in_grid(grid) {
            return Err(OpeningError::PartitionOutOfGrid(gap));
        }
        if gap.is_perimeter(grid) {
            return Err(OpeningError::PartitionOnPerimeter(gap));
        }
        if !seen.insert(gap) {
            return Err(OpeningError::DuplicatePartition(gap));
        }
        slots.push(ColumnSlot {
            gap,
            fill: GapFill::PartitionShortWindow,
            asset_query: styles.query(GapFill::PartitionShortWindow).to_string(),
        });
    }
    Ok(ColumnOpeningPlan { slots })
}

/// World box a gap fill occupies: the clear span between the two columns,
/// beam width deep, from the sill to the underside of the beams.
pub fn gap_fill_box(grid: &ColumnGridSpec, slot: &ColumnSlot) -> Aabb {
    let (a, b) = slot.gap.clear_span(grid);
    let half = match slot.gap.axis {
        GapAxis::Row => Vec2::new(0.0, grid.beam_section.width / 2.0),
        GapAxis::Column => Vec2::new(grid.beam_section.width / 2.0, 0.0),
    };
    Aabb::from_points([
        (a - half).extend(slot.fill.sill()),
        (b + half).extend(grid.clear_height()),
    ])
}

/// Fit an asset into a column gap, front facing into the grid.
pub fn fit_gap_fill(
    grid: &ColumnGridSpec,
    slot: &ColumnSlot,
    asset_id: &str,
    mesh: Mesh,
    native: Vec3,
) -> Result<SceneElement, OpeningError> {
    let b = gap_fill_box(grid, slot);
    let ext = b.extents();
    let (along, across) = match slot.gap.axis {
        GapAxis::Row => (ext.x, ext.y),
        GapAxis::Column => (ext.y, ext.x),
    };
    let s = scale_for(native, Vec3::new(along, across, ext.z), asset_id)?;
    let mut e = SceneElement::new(mesh);
    e.transform = Transform {
        t: b.center().xy().extend(b.min.z),
        yaw: yaw_facing(slot.gap.outward(grid) * -1.0),
        s,
    };
    e.material_ref = Some(asset_id.to_string());
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floorplan::{build_walls, parse_edge, place_rooms, AdjacencySpec, Direction, Relation, RoomSpec};

    fn one_room() -> WallSet {
        let plan = place_rooms(&[RoomSpec::new("room1", 4.0, 3.0)], &AdjacencySpec::default()).unwrap();
        build_walls(&plan, &parse_edge(&plan).unwrap(), 0.2, 3.0, 16).unwrap()
    }

    fn spec(target: &str, kind: OpeningKind, w: f64, h: f64, off: f64) -> OpeningSpec {
        OpeningSpec {
            target: target.into(),
            kind,
            width: Some(w),
            height: Some(h),
            horizontal_offset: off,
            asset_query: "x".into(),
        }
    }

    #[test]
    fn door_from_floor_window_centred() {
        let mut w = one_room();
        let d = open_wall(&mut w, &spec("room1_id2", OpeningKind::Door, 1.0, 2.1, 1.5)).unwrap();
        assert_eq!((d.hole.u0, d.hole.u1, d.hole.z0, d.hole.z1), (1.5, 2.5, 0.0, 2.1));
        let win = open_wall(&mut w, &spec("room1_id3", OpeningKind::Window, 1.2, 1.0, 0.5)).unwrap();
        assert_eq!((win.hole.z0, win.hole.z1), (1.0, 2.0));
        for s in &w.sides {
            assert_eq!(s.mesh().boundary_edge_count(), 0);
        }
    }

    #[test]
    fn too_large_and_overlap() {
        let mut w = one_room();
        assert!(matches!(
            open_wall(&mut w, &spec("room1_id2", OpeningKind::Door, 5.0, 2.1, 0.0)),
            Err(OpeningError::OpeningTooLarge { .. })
        ));
        open_wall(&mut w, &spec("room1_id2", OpeningKind::Door, 1.0, 2.1, 1.0)).unwrap();
        assert!(matches!(
            open_wall(&mut w, &spec("room1_id2", OpeningKind::Window, 1.0, 1.0, 2.05)),
            Err(OpeningError::OverlapWithExistingOpening(_))
        ));
        open_wall(&mut w, &spec("room1_id2", OpeningKind::Window, 1.0, 1.0, 2.1)).unwrap();
    }

    #[test]
    fn arcs_and_non_walls_rejected() {
        let mut w = one_room();
        assert_eq!(
            open_wall(&mut w, &spec("arc1", OpeningKind::Door, 1.0, 2.0, 0.0)).unwrap_err(),
            OpeningError::OpeningOnArc("arc1".into())
        );
        assert!(matches!(
            open_wall(&mut w, &spec("room1_floor", OpeningKind::Door, 1.0, 2.0, 0.0)),
            Err(OpeningError::NotAWall(_))
        ));
    }

    #[test]
    fn shared_wall_cut_on_both_sides() {
        let rooms = [RoomSpec::new("room1", 4.0, 3.0), RoomSpec::new("room2", 3.0, 3.0)];
        let adj = AdjacencySpec::new(vec![Relation::new("room1", "room2", Direction::East)]);
        let plan = place_rooms(&rooms, &adj).unwrap();
        let mut w = build_walls(&plan, &parse_edge(&plan).unwrap(), 0.2, 3.0, 16).unwrap();
        let o = open_wall(&mut w, &spec("room1_id4", OpeningKind::Door, 1.0, 2.1, 0.5)).unwrap();
        assert_eq!(o.twin, Some("room2_id1".parse().unwrap()));
        let twin = w.side(&"room2_id1".parse().unwrap()).unwrap();
        // room1's east wall runs south to north from inside; room2's west
        // wall runs north to south, so offset 0.5 maps to [1.5, 2.5].
        assert!((twin.holes[0].u0 - 1.5).abs() < 1e-12 && (twin.holes[0].u1 - 2.5).abs() < 1e-12);
        let side = w.side(&o.target).unwrap();
        let b = o.hole_aabb(side);
        assert!((b.min.x - 3.9).abs() < 1e-12 && (b.max.x - 4.1).abs() < 1e-12);
    }

    #[test]
    fn fitted_door_scale_and_containment() {
        let mut w = one_room();
        let o = open_wall(&mut w, &spec("room1_id2", OpeningKind::Door, 1.0, 2.1, 1.5)).unwrap();
        let side = w.side(&o.target).unwrap();
        let native = Vec3::new(1.0, 0.1, 2.0);
        let e = fit_asset(&o, side, "door", Mesh::footprint_box(native), native).unwrap();
        assert!(e.transform.s.max_abs_diff(Vec3::new(1.0, 2.0, 1.05)) < 1e-12);
        assert!(o.hole_aabb(side).inflated(1e-6).contains(&e.world_aabb()));
        // South wall: the door front looks north into the room.
        let front = crate::model::facing_of_yaw(e.transform.yaw);
        assert!(front.approx_eq(Vec2::new(0.0, 1.0), 1e-12));
    }

    #[test]
    fn degenerate_asset() {
        let mut w = one_room();
        let o = open_wall(&mut w, &spec("room1_id2", OpeningKind::Door, 1.0, 2.1, 1.5)).unwrap();
        let side = w.side(&o.target).unwrap();
        assert_eq!(
            fit_asset(&o, side, "flat", Mesh::default(), Vec3::new(1.0, 0.0, 2.0)).unwrap_err(),
            OpeningError::DegenerateAsset("flat".into())
        );
    }

    fn styles() -> ColumnStyles {
        ColumnStyles {
            door: "d".into(),
            long_window: "l".into(),
            short_window: "s".into(),
        }
    }

    fn count(plan: &ColumnOpeningPlan, f: GapFill) -> usize {
        plan.slots.iter().filter(|s| s.fill == f).count()
    }

    #[test]
    fn three_by_four_rules() {
        let g = ColumnGridSpec::new(3, 4, 4.0);
        let p = plan_column_openings(&g, &[], &styles()).unwrap();
        let doors: Vec<Gap> = p
            .slots
            .iter()
            .filter(|s| s.fill == GapFill::Door)
            .map(|s| s.gap)
            .collect();
        assert_eq!(doors, vec![Gap::row(0, 1), Gap::row(2, 1)]);
        let longs: Vec<Gap> = p
            .slots
            .iter()
            .filter(|s| s.fill == GapFill::LongWindow)
            .map(|s| s.gap)
            .collect();
        assert_eq!(longs, vec![Gap::column(0, 0), Gap::column(0, 3)]);
        assert_eq!(count(&p, GapFill::ShortWindow), 6);
    }

    #[test]
    fn minimal_grid_rules() {
        let p = plan_column_openings(&ColumnGridSpec::new(2, 2, 4.0), &[], &styles()).unwrap();
        assert_eq!(
            (
                count(&p, GapFill::Door),
                count(&p, GapFill::LongWindow),
                count(&p, GapFill::ShortWindow)
            ),
            (2, 2, 0)
        );
    }

    #[test]
    fn partitions() {
        let g = ColumnGridSpec::new(3, 3, 4.0);
        let p = plan_column_openings(&g, &[Gap::column(0, 1), Gap::column(1, 1)], &styles()).unwrap();
        assert_eq!(count(&p, GapFill::PartitionShortWindow), 2);
        assert_eq!(
            plan_column_openings(&g, &[Gap::row(0, 0)], &styles()).unwrap_err(),
            OpeningError::PartitionOnPerimeter(Gap::row(0, 0))
        );
    }

    #[test]
    fn gap_fill_inside_frame() {
        let g = ColumnGridSpec::new(2, 3, 4.0);
        let p = plan_column_openings(&g, &[], &styles()).unwrap();
        for slot in &p.slots {
            let native = Vec3::new(1.0, 0.1, 2.0);
            let e = fit_gap_fill(&g, slot, "a", Mesh::footprint_box(native), native).unwrap();
            let b = gap_fill_box(&g, slot);
            assert!(b.inflated(1e-6).contains(&e.world_aabb()), "{slot:?}");
            assert!(e.world_aabb().inflated(1e-6).contains(&b));
        }
    }
}
