use serde::{Deserialize, Serialize};

use super::AgentRole;
use crate::floorplan::{AdjacencySpec, RoomSpec};
use crate::layout::{LayoutTriplet, Slot};
use crate::materials::MaterialEntry;
use crate::model::StructureKind;
use crate::openings::{ColumnStyles, OpeningSpec};
use crate::retrieval::AssetCategory;

pub const PARAMS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManagerSection {
    pub structure_kind: StructureKind,
    pub scene: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomFunction {
    pub name: String,
    pub function: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSize {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationSection {
    pub rooms: Vec<RoomFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSize>,
}

/// Cells are `[i, j]`: the unit between column rows `i..i+1` and columns
/// `j..j+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellAssignment {
    pub room: String,
    pub cells: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableObject {
    pub query: String,
    pub slot: Slot,
    #[serde(default)]
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallObject {
    pub wall: String,
    pub query: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionObjects {
    /// A room name.
    pub region: String,
    #[serde(default)]
    pub stable: Vec<StableObject>,
    #[serde(default)]
    pub relative: Vec<LayoutTriplet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wall: Vec<WallObject>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSection {
    pub regions: Vec<RegionObjects>,
}

/// One agent's typed contribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Manager(ManagerSection),
    Allocation(AllocationSection),
    Adjacency(AdjacencySpec),
    Cells(Vec<CellAssignment>),
    Shape(Vec<RoomSpec>),
    Materials(Vec<MaterialEntry>),
    Openings(Vec<OpeningSpec>),
    Styles(ColumnStyles),
    Objects(ObjectSection),
}

impl Section {
    pub fn name(&self) -> &'static str {
        match self {
            Section::Manager(_) => "manager",
            Section::Allocation(_) => "allocation",
            Section::Adjacency(_) => "adjacency",
            Section::Cells(_) => "cells",
            Section::Shape(_) => "shape",
            Section::Materials(_) => "materials",
            Section::Openings(_) => "openings",
            Section::Styles(_) => "styles",
            Section::Objects(_) => "objects",
        }
    }

    /// Retrieval queries the section carries, in order.
    pub fn queries(&self) -> Vec<(AssetCategory, String)> {
        match self {
            Section::Materials(m) => m.iter().map(|e| (AssetCategory::Material, e.query.clone())).collect(),
            Section::Openings(o) => o
                .iter()
                .map(|s| {
                    let cat = match s.kind {
                        crate::floorplan::OpeningKind::Door => AssetCategory::Door,
                        crate::floorplan::OpeningKind::Window => AssetCategory::Window,
                    };
                    (cat, s.asset_query.clone())
                })
                .collect(),
            Section::Styles(s) => vec![
                (AssetCategory::Door, s.door.clone()),
                (AssetCategory::Window, s.long_window.clone()),
                (AssetCategory::Window, s.short_window.clone()),
            ],
            Section::Objects(o) => o
                .regions
                .iter()
                .flat_map(|r| {
                    r.stable
                        .iter()
                        .map(|s| s.query.clone())
                        .chain(r.relative.iter().map(|t| t.object_query.clone()))
                        .chain(r.wall.iter().map(|w| w.query.clone()))
                })
                .map(|q| (AssetCategory::Object, q))
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Everything the procedural stages need. Sections not used by the chosen
/// structure kind stay empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredParams {
    pub schema_version: u32,
    #[serde(default)]
    pub description: String,
    pub structure_kind: StructureKind,
    #[serde(default)]
    pub scene: String,
    pub rooms: Vec<RoomFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shapes: Option<Vec<RoomSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<AdjacencySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellAssignment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<Vec<MaterialEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub openings: Option<Vec<OpeningSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_styles: Option<ColumnStyles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objects: Option<Vec<RegionObjects>>,
}

impl StructuredParams {
    pub fn new(description: &str, manager: ManagerSection) -> Self {
        StructuredParams {
            schema_version: PARAMS_SCHEMA_VERSION,
            description: description.to_string(),
            structure_kind: manager.structure_kind,
            scene: manager.scene,
            rooms: Vec::new(),
            shapes: None,
            adjacency: None,
            grid: None,
            cells: None,
            materials: None,
            openings: None,
            column_styles: None,
            objects: None,
        }
    }

    /// Store a section. Each slot may be filled once.
    pub fn insert(&mut self, section: Section) -> Result<(), String> {
        fn put<T>(slot: &mut Option<T>, v: T, name: &str) -> Result<(), String> {
            if slot.is_some() {
                return Err(format!("section `{name}` already populated"));
            }
            *slot = Some(v);
            Ok(())
        }
        let name = section.name();
        match section {
            Section::Manager(_) => Err("manager section is fixed at construction".into()),
            Section::Allocation(a) => {
                if !self.rooms.is_empty() {
                    return Err(format!("section `{name}` already populated"));
                }
                self.rooms = a.rooms;
                if let Some(g) = a.grid {
                    put(&mut self.grid, g, "grid")?;
                }
                Ok(())
            }
            Section::Adjacency(a) => put(&mut self.adjacency, a, name),
            Section::Cells(c) => put(&mut self.cells, c, name),
            Section::Shape(s) => put(&mut self.shapes, s, name),
            Section::Materials(m) => put(&mut self.materials, m, name),
            Section::Openings(o) => put(&mut self.openings, o, name),
            Section::Styles(s) => put(&mut self.column_styles, s, name),
            Section::Objects(o) => put(&mut self.objects, o.regions, name),
        }
    }

    /// Names of required sections that are still empty.
    pub fn missing(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.rooms.is_empty() {
            out.push("allocation");
        }
        let common = [
            ("materials", self.materials.is_some()),
            ("objects", self.objects.is_some()),
        ];
        let specific: [(&'static str, bool); 3] = match self.structure_kind {
            StructureKind::Wall => [
                ("adjacency", self.adjacency.is_some()),
                ("shape", self.shapes.is_some()),
                ("openings", self.openings.is_some()),
            ],
            StructureKind::Column => [
                ("grid", self.grid.is_some()),
                ("cells", self.cells.is_some()),
                ("styles", self.column_styles.is_some()),
            ],
        };
        out.extend(specific.into_iter().chain(common).filter(|(_, ok)| !ok).map(|(n, _)| n));
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing().is_empty()
    }

    /// Sections that do not belong to the chosen kind.
    pub fn foreign(&self) -> Vec<&'static str> {
        let pairs: [(&'static str, bool); 3] = match self.structure_kind {
            StructureKind::Wall => [
                ("grid", self.grid.is_some()),
                ("cells", self.cells.is_some()),
                ("column_styles", self.column_styles.is_some()),
            ],
            StructureKind::Column => [
                ("shapes", self.shapes.is_some()),
                ("adjacency", self.adjacency.is_some()),
                ("openings", self.openings.is_some()),
            ],
        };
        pairs.into_iter().filter(|(_, p)| *p).map(|(n, _)| n).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("params serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Role that owns a section name, for error reports.
    pub fn owner(section: &str) -> AgentRole {
        match section {
            "allocation" | "grid" => AgentRole::Allocation,
            "adjacency" | "cells" => AgentRole::Adjacency,
            "shape" | "shapes" => AgentRole::Shape,
            "materials" => AgentRole::Material,
            "openings" | "styles" | "column_styles" => AgentRole::DoorWindow,
            "objects" => AgentRole::Object,
            _ => AgentRole::Manager,
        }
    }
}
