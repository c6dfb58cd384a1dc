//! Floorplan synthesis for wall-structure and column-structure scenes.
//!
//! Wall scenes start from rectangular room sizes plus a relative-position
//! graph. `place_rooms` fixes absolute origins breadth-first from `room1`,
//! `parse_edge` derives the deduplicated boundary edges, `tessellate` turns
//! them into floor polygons and `build_walls` extrudes wall prisms. Column
//! scenes are a regular grid of columns joined by beams.

mod columns;
mod edges;
mod placement;
mod tessellate;
mod walls;

pub use columns::{
    build_column_grid, column_center, perimeter_gaps, unit_regions, BeamSection, ColumnGridSpec, Gap, GapAxis,
    UnitRegion,
};
pub use edges::{parse_edge, Classification, Edge, EdgeKind};
pub use placement::place_rooms;
pub use tessellate::{arc_points, circle_from_chord, tessellate, FloorPolygon};
pub use walls::{
    assemble_wall_structure, build_walls, ArcWall, Hole, OpeningKind, WallPiece, WallSet, WallSide, SKIN_OFFSET,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Rect, Vec2};
use crate::model::{Facing, ModelError};

pub const MIN_ROOM_SIZE: f64 = 1.0;
pub const MAX_ROOM_SIZE: f64 = 50.0;
/// Minimum length of the boundary two related rooms must share.
pub const MIN_SHARED_LENGTH: f64 = 0.9;

pub const DEFAULT_WALL_THICKNESS: f64 = 0.2;
pub const DEFAULT_WALL_HEIGHT: f64 = 3.0;
pub const DEFAULT_ARC_SEGMENTS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloorplanError {
    #[error("room `{0}` is not named room<N>")]
    BadRoomName(String),
    #[error("room `{0}` declared twice")]
    DuplicateRoom(String),
    #[error("room `{room}`: {field} {value} m outside [1, 50] m")]
    RoomSizeOutOfRange {
        room: String,
        field: &'static str,
        value: f64,
    },
    #[error("no room named room1 to anchor the plan")]
    MissingRoom1,
    #[error("relation references unknown room `{0}`")]
    UnknownRoom(String),
    #[error("relation relates `{0}` to itself")]
    SelfRelation(String),
    #[error("room `{room}` cannot be placed {relation} of `{reference}`: {reason}")]
    UnplaceableRoom {
        room: String,
        reference: String,
        relation: Direction,
        reason: String,
    },
    #[error("room `{0}` is not reachable from room1")]
    DisconnectedGraph(String),
    #[error("room `{room}` side {edge}: arc requested on a shared wall")]
    ArcOnInternalEdge { room: String, edge: usize },
    #[error("room `{room}` side {edge}: chord height {h_chord} m must satisfy |h| < chord/2 = {limit} m")]
    InvalidArc {
        room: String,
        edge: usize,
        h_chord: f64,
        limit: f64,
    },
    #[error("room `{room}`: arc side index {edge} is not in 0..4")]
    ArcEdgeIndex { room: String, edge: usize },
    #[error("room `{room}` side {edge}: arc bulge overlaps room `{other}`")]
    ArcCollision { room: String, edge: usize, other: String },
    #[error("room `{0}`: boundary edges do not form a closed loop")]
    OpenLoop(String),
    #[error("room `{0}`: floor polygon self-intersects")]
    SelfIntersection(String),
    #[error("wall thickness {0} m outside [0.05, 0.6] m")]
    ThicknessOutOfRange(f64),
    #[error("wall height {0} m outside [2.2, 8.0] m")]
    HeightOutOfRange(f64),
    #[error("invalid column grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `(a, b, east)` reads "b lies east of a".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    East,
    West,
    North,
    South,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::East => Direction::West,
            Direction::West => Direction::East,
            Direction::North => Direction::South,
            Direction::South => Direction::North,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::East => "east",
            Direction::West => "west",
            Direction::North => "north",
            Direction::South => "south",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    /// Side index, counter-clockwise from south: 0 south, 1 east, 2 north, 3 west.
    pub edge: usize,
    /// Signed sagitta; positive bulges out of the room.
    pub h_chord: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSpec {
    pub name: String,
    /// Extent along x, meters.
    pub width: f64,
    /// Extent along y, meters.
    pub depth: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arc_edges: Vec<ArcSpec>,
}

impl RoomSpec {
    pub fn new(name: impl Into<String>, width: f64, depth: f64) -> Self {
        RoomSpec {
            name: name.into(),
            width,
            depth,
            arc_edges: Vec::new(),
        }
    }

    pub fn with_arc(mut self, edge: usize, h_chord: f64) -> Self {
        self.arc_edges.push(ArcSpec { edge, h_chord });
        self
    }

    /// The `N` of `roomN`.
    pub fn number(&self) -> Result<u32, FloorplanError> {
        room_number(&self.name)
    }

    pub fn validate(&self) -> Result<(), FloorplanError> {
        self.number()?;
        for (field, value) in [("width", self.width), ("depth", self.depth)] {
            if !(MIN_ROOM_SIZE..=MAX_ROOM_SIZE).contains(&value) {
                return Err(FloorplanError::RoomSizeOutOfRange {
                    room: self.name.clone(),
                    field,
                    value,
                });
            }
        }
        Ok(())
    }
}

pub fn room_number(name: &str) -> Result<u32, FloorplanError> {
    match name.parse::<crate::model::AttributeId>() {
        Ok(crate::model::AttributeId::Room(n)) => Ok(n),
        _ => Err(FloorplanError::BadRoomName(name.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub a: String,
    pub b: String,
    pub relation: Direction,
}

impl Relation {
    pub fn new(a: impl Into<String>, b: impl Into<String>, relation: Direction) -> Self {
        Relation {
            a: a.into(),
            b: b.into(),
            relation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjacencySpec {
    pub relations: Vec<Relation>,
}

impl AdjacencySpec {
    pub fn new(relations: Vec<Relation>) -> Self {
        AdjacencySpec { relations }
    }
}

/// A room with its absolute origin (min-x, min-y corner).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedRoom {
    pub spec: RoomSpec,
    pub number: u32,
    pub origin: Vec2,
}

impl PlacedRoom {
    pub fn rect(&self) -> Rect {
        Rect::new(self.origin, self.origin + Vec2::new(self.spec.width, self.spec.depth))
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Counter-clockwise endpoints of side `index` (0 south, 1 east, 2 north, 3 west).
    pub fn side(&self, index: usize) -> (Vec2, Vec2) {
        let c = self.rect().corners();
        (c[index % 4], c[(index + 1) % 4])
    }
}

/// Side index to facing, counter-clockwise from south.
pub fn side_facing(index: usize) -> Facing {
    match index % 4 {
        0 => Facing::South,
        1 => Facing::East,
        2 => Facing::North,
        _ => Facing::West,
    }
}

pub fn facing_side(f: Facing) -> usize {
    match f {
        Facing::South => 0,
        Facing::East => 1,
        Facing::North => 2,
        Facing::West => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedFloorplan {
    /// Rooms in declaration order.
    pub rooms: Vec<PlacedRoom>,
    pub wall_thickness: f64,
    pub wall_height: f64,
}

impl PlacedFloorplan {
    pub fn room(&self, name: &str) -> Option<&PlacedRoom> {
        self.rooms.iter().find(|r| r.spec.name == name)
    }

    pub fn room_by_number(&self, n: u32) -> Option<&PlacedRoom> {
        self.rooms.iter().find(|r| r.number == n)
    }

    pub fn origin(&self, name: &str) -> Option<Vec2> {
        self.room(name).map(|r| r.origin)
    }
}

pub fn validate_structure_dims(thickness: f64, height: f64) -> Result<(), FloorplanError> {
    if !(0.05..=0.6).contains(&thickness) {
        return Err(FloorplanError::ThicknessOutOfRange(thickness));
    }
    if !(2.2..=8.0).contains(&height) {
        return Err(FloorplanError::HeightOutOfRange(height));
    }
    Ok(())
}
