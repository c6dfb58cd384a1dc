use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AgentRole;
use crate::model::StructureKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Next {
    Role(AgentRole),
    Done,
}

impl std::fmt::Display for Next {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Next::Role(r) => write!(f, "{r}"),
            Next::Done => f.write_str("Done"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FsmError {
    #[error("illegal transition from {from} on {outcome:?}{}", requested.map(|r| format!(" to {r}")).unwrap_or_default())]
    IllegalTransition {
        from: Next,
        outcome: Outcome,
        requested: Option<Next>,
    },
}

/// Speaker transition table for one structure kind plus the current speaker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnFSM {
    pub kind: StructureKind,
    pub transitions: BTreeMap<(AgentRole, Outcome), Next>,
    pub current: Next,
}

impl TurnFSM {
    pub fn new(kind: StructureKind) -> Self {
        use AgentRole::*;
        let order: &[AgentRole] = match kind {
            StructureKind::Wall => &[
                Manager, Allocation, Adjacency, Check, Shape, Material, DoorWindow, Object,
            ],
            StructureKind::Column => &[Manager, Allocation, Adjacency, Material, DoorWindow, Object],
        };
        let mut transitions = BTreeMap::new();
        for w in order.windows(2) {
            transitions.insert((w[0], Outcome::Ok), Next::Role(w[1]));
        }
        transitions.insert((Object, Outcome::Ok), Next::Done);
        if kind == StructureKind::Wall {
            transitions.insert((Check, Outcome::Fail), Next::Role(Adjacency));
        }
        TurnFSM {
            kind,
            transitions,
            current: Next::Role(Manager),
        }
    }

    /// Successor of `(role, outcome)` without moving.
    pub fn successor(&self, role: AgentRole, outcome: Outcome) -> Result<Next, FsmError> {
        self.transitions
            .get(&(role, outcome))
            .copied()
            .ok_or(FsmError::IllegalTransition {
                from: Next::Role(role),
                outcome,
                requested: None,
            })
    }

    /// Advance past the current speaker.
    pub fn next_speaker(&mut self, outcome: Outcome) -> Result<Next, FsmError> {
        let Next::Role(role) = self.current else {
            return Err(FsmError::IllegalTransition {
                from: Next::Done,
                outcome,
                requested: None,
            });
        };
        let next = self.successor(role, outcome)?;
        self.current = next;
        Ok(next)
    }

    /// Advance only if `requested` is the table's successor.
    pub fn request(&mut self, requested: Next, outcome: Outcome) -> Result<Next, FsmError> {
        let expected = match self.current {
            Next::Role(role) => self.successor(role, outcome).ok(),
            Next::Done => None,
        };
        if expected != Some(requested) {
            return Err(FsmError::IllegalTransition {
                from: self.current,
                outcome,
                requested: Some(requested),
            });
        }
        self.current = requested;
        Ok(requested)
    }

    pub fn is_done(&self) -> bool {
        self.current == Next::Done
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_path_with_one_rejection() {
        let mut f = TurnFSM::new(StructureKind::Wall);
        let mut seen = vec![f.current];
        let outcomes = [
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Fail,
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Ok,
            Outcome::Ok,
        ];
        for o in outcomes {
            seen.push(f.next_speaker(o).unwrap());
        }
        use AgentRole::*;
        let want: Vec<Next> = [
            Manager, Allocation, Adjacency, Check, Adjacency, Check, Shape, Material, DoorWindow, Object,
        ]
        .into_iter()
        .map(Next::Role)
        .chain([Next::Done])
        .collect();
        assert_eq!(seen, want);
        assert!(f.next_speaker(Outcome::Ok).is_err());
    }

    #[test]
    fn material_after_allocation_rejected() {
        let mut f = TurnFSM::new(StructureKind::Wall);
        f.next_speaker(Outcome::Ok).unwrap();
        assert_eq!(f.current, Next::Role(AgentRole::Allocation));
        assert!(matches!(
            f.request(Next::Role(AgentRole::Material), Outcome::Ok),
            Err(FsmError::IllegalTransition { .. })
        ));
        assert_eq!(f.current, Next::Role(AgentRole::Allocation));
        assert_eq!(
            f.request(Next::Role(AgentRole::Adjacency), Outcome::Ok).unwrap(),
            Next::Role(AgentRole::Adjacency)
        );
    }

    #[test]
    fn column_path_skips_check_and_shape() {
        let f = TurnFSM::new(StructureKind::Column);
        assert_eq!(
            f.successor(AgentRole::Adjacency, Outcome::Ok).unwrap(),
            Next::Role(AgentRole::Material)
        );
        assert!(f.successor(AgentRole::Check, Outcome::Fail).is_err());
        assert_eq!(f.transitions.len(), 6);
    }
}
