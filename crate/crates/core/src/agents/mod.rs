//! Set-design agents: who speaks when, how their replies become typed
//! parameters, and the generate/verify/revise loop on room adjacency.

mod backend;
mod chain;
mod check;
mod fsm;
mod hooks;
mod params;

pub use backend::{
    AgentBackend, BackendError, BackendKind, RemoteBackend, RemoteBackendConfig, ScriptedBackend, TurnPrompt,
};
pub use chain::{
    check_loop, run_chain, ChainError, ChainErrorKind, ChainRun, LoopOutcome, NoHooks, SectionHook, TurnRecord,
    DEFAULT_MAX_RETRIES, NOMINAL_ROOM_SIZE,
};
pub use check::{
    nominal_rooms, partition_gaps, validate_adjacency, validate_cells, CheckReport, Violation, ViolationKind,
};
pub use fsm::{FsmError, Next, Outcome, TurnFSM};
pub use hooks::{extract_json_block, extract_params, schema, schema_ids, validate_value, HookError};
pub use params::{
    AllocationSection, CellAssignment, GridSize, ManagerSection, ObjectSection, RegionObjects, RoomFunction, Section,
    StableObject, StructuredParams, WallObject, PARAMS_SCHEMA_VERSION,
};

use serde::{Deserialize, Serialize};

use crate::model::StructureKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgentRole {
    Manager,
    Allocation,
    Adjacency,
    Check,
    Shape,
    Material,
    #[serde(rename = "Door_Window")]
    DoorWindow,
    Object,
}

impl AgentRole {
    pub const ALL: [AgentRole; 8] = [
        AgentRole::Manager,
        AgentRole::Allocation,
        AgentRole::Adjacency,
        AgentRole::Check,
        AgentRole::Shape,
        AgentRole::Material,
        AgentRole::DoorWindow,
        AgentRole::Object,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentRole::Manager => "Manager",
            AgentRole::Allocation => "Allocation",
            AgentRole::Adjacency => "Adjacency",
            AgentRole::Check => "Check",
            AgentRole::Shape => "Shape",
            AgentRole::Material => "Material",
            AgentRole::DoorWindow => "Door_Window",
            AgentRole::Object => "Object",
        }
    }

    /// Whether the role speaks on the path for `kind`.
    pub fn on_path(self, kind: StructureKind) -> bool {
        !(kind == StructureKind::Column && matches!(self, AgentRole::Check | AgentRole::Shape))
    }

    /// Schema the role's reply must satisfy. Manager and Material share one
    /// schema across kinds; Check and Shape exist only for walls.
    pub fn duty_schema(self, kind: StructureKind) -> Option<&'static str> {
        use StructureKind::{Column, Wall};
        Some(match (self, kind) {
            (AgentRole::Manager, _) => "manager.v1",
            (AgentRole::Allocation, Wall) => "allocation.wall.v1",
            (AgentRole::Allocation, Column) => "allocation.column.v1",
            (AgentRole::Adjacency, Wall) => "adjacency.wall.v1",
            (AgentRole::Adjacency, Column) => "adjacency.column.v1",
            (AgentRole::Check, Wall) => "check.v1",
            (AgentRole::Shape, Wall) => "shape.v1",
            (AgentRole::Material, _) => "material.v1",
            (AgentRole::DoorWindow, Wall) => "door_window.wall.v1",
            (AgentRole::DoorWindow, Column) => "door_window.column.v1",
            (AgentRole::Object, Wall) => "object.wall.v1",
            (AgentRole::Object, Column) => "object.column.v1",
            (AgentRole::Check | AgentRole::Shape, Column) => return None,
        })
    }

    /// Turn constraint carried as metadata and quoted in remote prompts.
    pub fn description(self) -> &'static str {
        match self {
            AgentRole::Manager => {
                "I speak first. I choose wall-structure or column-structure according to the user input and name the scene."
            }
            AgentRole::Allocation => {
                "I can only speak after Manager. I assign the number and functions of rooms; for column structures I also size the column grid."
            }
            AgentRole::Adjacency => {
                "I can only speak after Allocation or after Check rejects my relations. I state where each room lies relative to the others, or assign rooms to grid cells."
            }
            AgentRole::Check => {
                "I can only speak after Adjacency. I validate adjacency logic and return to Adjacency if constraints are violated."
            }
            AgentRole::Shape => {
                "I can only speak after Check accepts. I generate room sizes and decide whether to add arc walls."
            }
            AgentRole::Material => {
                "I can only speak after the layout of rooms is settled. I describe materials for floors, walls and structure."
            }
            AgentRole::DoorWindow => {
                "I can only speak after Material. I place doors and windows, or describe door and window styles for column structures."
            }
            AgentRole::Object => {
                "I can only speak after Door_Window. I choose furniture and where it goes relative to the room and to other objects."
            }
        }
    }
}

impl std::fmt::Display for AgentRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AgentRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentRole::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown agent role `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_schema_per_kind_on_path() {
        for kind in [StructureKind::Wall, StructureKind::Column] {
            for r in AgentRole::ALL {
                assert_eq!(r.duty_schema(kind).is_some(), r.on_path(kind), "{r} {kind}");
                if let Some(id) = r.duty_schema(kind) {
                    assert!(schema(id).is_some(), "{id}");
                }
            }
        }
    }

    #[test]
    fn role_names_round_trip() {
        for r in AgentRole::ALL {
            assert_eq!(r.name().parse::<AgentRole>().unwrap(), r);
            assert_eq!(serde_json::to_string(&r).unwrap(), format!("\"{}\"", r.name()));
        }
    }
}
