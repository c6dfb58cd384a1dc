use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{CellAssignment, GridSize, RoomFunction};
use crate::floorplan::{place_rooms, AdjacencySpec, Direction, FloorplanError, Gap, Relation, RoomSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    InvalidRooms,
    UnknownRoom,
    SelfRelation,
    Contradictory,
    Disconnected,
    Unrealizable,
    CellOutOfGrid,
    CellOverlap,
    NotRectangular,
    UnassignedRoom,
    Uncovered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    pub detail: String,
}

/// Result of a validation pass. Violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    fn from(violations: Vec<Violation>) -> Self {
        CheckReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    /// Plain-text summary fed back to the Adjacency agent.
    pub fn feedback(&self) -> String {
        let mut s = String::from("The previous answer was rejected:\n");
        for v in &self.violations {
            s.push_str("- ");
            s.push_str(&v.detail);
            s.push('\n');
        }
        s
    }
}

fn violation(kind: ViolationKind, relation: Option<&Relation>, detail: String) -> Violation {
    Violation {
        kind,
        relation: relation.cloned(),
        detail,
    }
}

/// Room specs of a uniform nominal size, for checking adjacency before
/// the Shape agent has chosen sizes.
pub fn nominal_rooms(rooms: &[RoomFunction], size: f64) -> Vec<RoomSpec> {
    rooms
        .iter()
        .map(|r| RoomSpec::new(r.name.clone(), size, size))
        .collect()
}

/// Referential, contradiction and connectivity checks, then a dry run of
/// room placement when those pass.
pub fn validate_adjacency(rooms: &[RoomSpec], adj: &AdjacencySpec) -> CheckReport {
    let names: BTreeSet<&str> = rooms.iter().map(|r| r.name.as_str()).collect();
    let mut out = Vec::new();

    for rel in &adj.relations {
        for n in [&rel.a, &rel.b] {
            if !names.contains(n.as_str()) {
                out.push(violation(
                    ViolationKind::UnknownRoom,
                    Some(rel),
                    format!("{} {} {}: `{n}` is not an allocated room", rel.a, rel.relation, rel.b),
                ));
            }
        }
        if rel.a == rel.b {
            out.push(violation(
                ViolationKind::SelfRelation,
                Some(rel),
                format!("`{}` is related to itself", rel.a),
            ));
        }
    }

    // Normalise each relation to the lexically smaller room's view.
    let mut seen: BTreeMap<(&str, &str), (Direction, &Relation)> = BTreeMap::new();
    for rel in adj.relations.iter().filter(|r| r.a != r.b) {
        let (key, dir) = if rel.a < rel.b {
            ((rel.a.as_str(), rel.b.as_str()), rel.relation)
        } else {
            ((rel.b.as_str(), rel.a.as_str()), rel.relation.opposite())
        };
        match seen.get(&key) {
            Some(&(d, first)) if d != dir => out.push(violation(
                ViolationKind::Contradictory,
                Some(rel),
                format!(
                    "`{} {} {}` contradicts `{} {} {}`",
                    rel.b, rel.relation, rel.a, first.b, first.relation, first.a
                ),
            )),
            Some(_) => {}
            None => {
                seen.insert(key, (dir, rel));
            }
        }
    }

    if names.contains("room1") {
        let mut reached = BTreeSet::from(["room1"]);
        let mut queue = VecDeque::from(["room1"]);
        while let Some(cur) = queue.pop_front() {
            for rel in &adj.relations {
                let other = if rel.a == cur {
                    rel.b.as_str()
                } else if rel.b == cur {
                    rel.a.as_str()
                } else {
                    continue;
                };
                if names.contains(other) && reached.insert(other) {
                    queue.push_back(other);
                }
            }
        }
        for n in &names {
            if !reached.contains(n) {
                out.push(violation(
                    ViolationKind::Disconnected,
                    None,
                    format!("`{n}` has no relation chain to room1"),
                ));
            }
        }
    }

    if out.is_empty() {
        if let Err(e) = place_rooms(rooms, adj) {
            let (kind, rel) = match &e {
                FloorplanError::UnplaceableRoom {
                    room,
                    reference,
                    relation,
                    ..
                } => (
                    ViolationKind::Unrealizable,
                    Some(Relation::new(reference.clone(), room.clone(), *relation)),
                ),
                FloorplanError::DisconnectedGraph(_) => (ViolationKind::Disconnected, None),
                _ => (ViolationKind::InvalidRooms, None),
            };
            out.push(violation(kind, rel.as_ref(), e.to_string()));
        }
    }
    CheckReport::from(out)
}

/// Column-path counterpart: every allocated room gets a non-empty,
/// rectangular block of cells; blocks are disjoint and tile the grid.
pub fn validate_cells(grid: &GridSize, rooms: &[RoomFunction], cells: &[CellAssignment]) -> CheckReport {
    let (ni, nj) = (grid.rows.saturating_sub(1), grid.cols.saturating_sub(1));
    let mut out = Vec::new();
    let mut owner: BTreeMap<[usize; 2], &str> = BTreeMap::new();
    let allocated: BTreeSet<&str> = rooms.iter().map(|r| r.name.as_str()).collect();
    let mut assigned = BTreeSet::new();
    for a in cells {
        if !allocated.contains(a.room.as_str()) {
            out.push(violation(
                ViolationKind::UnknownRoom,
                None,
                format!("`{}` is not an allocated room", a.room),
            ));
        }
        if !assigned.insert(a.room.as_str()) {
            out.push(violation(
                ViolationKind::CellOverlap,
                None,
                format!("`{}` is assigned twice", a.room),
            ));
        }
        for &c in &a.cells {
            if c[0] >= ni || c[1] >= nj {
                out.push(violation(
                    ViolationKind::CellOutOfGrid,
                    None,
                    format!("cell {c:?} of `{}` is outside the {ni}x{nj} cell grid", a.room),
                ));
            } else if let Some(prev) = owner.insert(c, &a.room) {
                out.push(violation(
                    ViolationKind::CellOverlap,
                    None,
                    format!("cell {c:?} is claimed by `{prev}` and `{}`", a.room),
                ));
            }
        }
        let set: BTreeSet<[usize; 2]> = a.cells.iter().copied().collect();
        if let (Some(i0), Some(i1), Some(j0), Some(j1)) = (
            set.iter().map(|c| c[0]).min(),
            set.iter().map(|c| c[0]).max(),
            set.iter().map(|c| c[1]).min(),
            set.iter().map(|c| c[1]).max(),
        ) {
            if set.len() != (i1 - i0 + 1) * (j1 - j0 + 1) {
                out.push(violation(
                    ViolationKind::NotRectangular,
                    None,
                    format!("cells of `{}` do not form a rectangle", a.room),
                ));
            }
        } else {
            out.push(violation(
                ViolationKind::UnassignedRoom,
                None,
                format!("`{}` has no cells", a.room),
            ));
        }
    }
    for r in &allocated {
        if !assigned.contains(r) {
            out.push(violation(
                ViolationKind::UnassignedRoom,
                None,
                format!("`{r}` has no cells"),
            ));
        }
    }
    for i in 0..ni {
        for j in 0..nj {
            if !owner.contains_key(&[i, j]) {
                out.push(violation(
                    ViolationKind::Uncovered,
                    None,
                    format!("cell [{i}, {j}] belongs to no room"),
                ));
            }
        }
    }
    CheckReport::from(out)
}

/// Interior gaps separating cells of different rooms, sorted.
pub fn partition_gaps(cells: &[CellAssignment]) -> Vec<Gap> {
    let owner: BTreeMap<[usize; 2], &str> = cells
        .iter()
        .flat_map(|a| a.cells.iter().map(move |&c| (c, a.room.as_str())))
        .collect();
    let mut out = BTreeSet::new();
    for (&[i, j], room) in &owner {
        if owner.get(&[i, j + 1]).is_some_and(|o| o != room) {
            out.insert(Gap::column(i, j + 1));
        }
        if owner.get(&[i + 1, j]).is_some_and(|o| o != room) {
            out.insert(Gap::row(i + 1, j));
        }
    }
    out.into_iter().collect()
}
