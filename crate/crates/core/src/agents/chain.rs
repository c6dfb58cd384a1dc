use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::backend::{AgentBackend, BackendError, TurnPrompt};
use super::check::{nominal_rooms, validate_adjacency, validate_cells, CheckReport};
use super::fsm::{FsmError, Next, Outcome, TurnFSM};
use super::hooks::{extract_json_block, extract_params, HookError};
use super::{AgentRole, Section, StructuredParams};
use crate::floorplan::{place_rooms, AdjacencySpec, RoomSpec};
use crate::model::StructureKind;
use crate::retrieval::AssetCategory;

/// Default number of Adjacency attempts before giving up.
pub const DEFAULT_MAX_RETRIES: usize = 3;
/// Side of the square rooms used to dry-run adjacency before sizes exist.
pub const NOMINAL_ROOM_SIZE: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainErrorKind {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Hook(#[from] HookError),
    #[error(transparent)]
    Fsm(#[from] FsmError),
    #[error("adjacency still invalid after {attempts} attempts: {}", last.violations.iter().map(|v| v.detail.as_str()).collect::<Vec<_>>().join("; "))]
    AdjacencyExhausted { attempts: usize, last: CheckReport },
    #[error("{0}")]
    Inconsistent(String),
    #[error("retrieval hook: {0}")]
    Retrieval(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{role}: {kind}")]
pub struct ChainError {
    pub role: AgentRole,
    pub kind: ChainErrorKind,
}

fn fail(role: AgentRole, kind: impl Into<ChainErrorKind>) -> ChainError {
    ChainError {
        role,
        kind: kind.into(),
    }
}

fn inconsistent(role: AgentRole, msg: String) -> ChainError {
    fail(role, ChainErrorKind::Inconsistent(msg))
}

/// Called whenever a section is accepted, e.g. to start retrieval early.
pub trait SectionHook {
    fn on_section(&mut self, role: AgentRole, section: &Section) -> Result<(), String>;
}

pub struct NoHooks;

impl SectionHook for NoHooks {
    fn on_section(&mut self, _: AgentRole, _: &Section) -> Result<(), String> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub role: AgentRole,
    pub outcome: Outcome,
    pub reply: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub params: StructuredParams,
    pub turns: Vec<TurnRecord>,
    pub adjacency_attempts: usize,
    /// Retrieval queries raised by hooks, in arrival order.
    pub queries: Vec<(AgentRole, AssetCategory, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutcome {
    pub section: Section,
    pub attempts: usize,
    pub reports: Vec<CheckReport>,
}

struct Session<'a> {
    backend: &'a mut dyn AgentBackend,
    hooks: &'a mut dyn SectionHook,
    description: String,
    fsm: TurnFSM,
    turns: Vec<TurnRecord>,
    context: Vec<(AgentRole, String)>,
    queries: Vec<(AgentRole, AssetCategory, String)>,
}

impl Session<'_> {
    fn expect_turn(&self, role: AgentRole) -> Result<(), ChainError> {
        if self.fsm.current != Next::Role(role) {
            return Err(fail(
                role,
                FsmError::IllegalTransition {
                    from: self.fsm.current,
                    outcome: Outcome::Ok,
                    requested: Some(Next::Role(role)),
                },
            ));
        }
        Ok(())
    }

    /// One agent turn: prompt, reply, hook extraction.
    fn ask(&mut self, role: AgentRole, feedback: Option<String>) -> Result<(Section, String), ChainError> {
        self.expect_turn(role)?;
        let schema_id = role
            .duty_schema(self.fsm.kind)
            .expect("roles on the path have a schema");
        let prompt = TurnPrompt {
            role,
            schema_id: schema_id.to_string(),
            description: self.description.clone(),
            context: self.context.clone(),
            feedback,
        };
        let reply = self.backend.respond(&prompt).map_err(|e| fail(role, e))?;
        log::debug!("{role} replied ({} bytes)", reply.len());
        let section = extract_params(&reply, schema_id).map_err(|e| fail(role, e))?;
        let block = extract_json_block(&reply, schema_id)
            .map_err(|e| fail(role, e))?
            .trim()
            .to_string();
        self.turns.push(TurnRecord {
            role,
            outcome: Outcome::Ok,
            reply,
        });
        Ok((section, block))
    }

    fn accept(&mut self, role: AgentRole, section: &Section, block: String) -> Result<(), ChainError> {
        for (cat, q) in section.queries() {
            self.queries.push((role, cat, q));
        }
        self.hooks
            .on_section(role, section)
            .map_err(|m| fail(role, ChainErrorKind::Retrieval(m)))?;
        self.context.push((role, block));
        Ok(())
    }

    fn advance(&mut self, role: AgentRole, outcome: Outcome) -> Result<Next, ChainError> {
        self.fsm.next_speaker(outcome).map_err(|e| fail(role, e))
    }

    /// Generate, verify, revise. On the wall path every verification is a
    /// Check turn; on the column path it happens in code between turns.
    fn adjacency_loop(
        &mut self,
        max_retries: usize,
        validate: &dyn Fn(&Section) -> CheckReport,
    ) -> Result<LoopOutcome, ChainError> {
        let wall = self.fsm.kind == StructureKind::Wall;
        let mut feedback = None;
        let mut reports = Vec::new();
        for attempt in 1..=max_retries {
            let (section, block) = self.ask(AgentRole::Adjacency, feedback.take())?;
            let report = validate(&section);
            reports.push(report.clone());
            if wall {
                self.advance(AgentRole::Adjacency, Outcome::Ok)?;
                let outcome = if report.ok { Outcome::Ok } else { Outcome::Fail };
                self.turns.push(TurnRecord {
                    role: AgentRole::Check,
                    outcome,
                    reply: serde_json::to_string(&report).expect("report serializes"),
                });
                self.advance(AgentRole::Check, outcome)?;
            } else if let Some(last) = self.turns.last_mut() {
                if !report.ok {
                    last.outcome = Outcome::Fail;
                }
            }
            if report.ok {
                self.accept(AgentRole::Adjacency, &section, block)?;
                if !wall {
                    self.advance(AgentRole::Adjacency, Outcome::Ok)?;
                }
                return Ok(LoopOutcome {
                    section,
                    attempts: attempt,
                    reports,
                });
            }
            log::info!(
                "adjacency attempt {attempt} rejected with {} violations",
                report.violations.len()
            );
            feedback = Some(report.feedback());
        }
        let role = if wall { AgentRole::Check } else { AgentRole::Adjacency };
        Err(fail(
            role,
            ChainErrorKind::AdjacencyExhausted {
                attempts: max_retries,
                last: reports.pop().unwrap_or_default(),
            },
        ))
    }
}

/// Run only the Adjacency/Check cycle for fixed rooms.
pub fn check_loop(
    backend: &mut dyn AgentBackend,
    description: &str,
    rooms: &[RoomSpec],
    max_retries: usize,
) -> Result<(AdjacencySpec, LoopOutcome), ChainError> {
    let mut fsm = TurnFSM::new(StructureKind::Wall);
    fsm.current = Next::Role(AgentRole::Adjacency);
    let mut hooks = NoHooks;
    let mut s = Session {
        backend,
        hooks: &mut hooks,
        description: description.to_string(),
        fsm,
        turns: Vec::new(),
        context: Vec::new(),
        queries: Vec::new(),
    };
    let out = s.adjacency_loop(max_retries, &|sec| match sec {
        Section::Adjacency(a) => validate_adjacency(rooms, a),
        _ => CheckReport::default(),
    })?;
    match &out.section {
        Section::Adjacency(a) => Ok((a.clone(), out)),
        _ => unreachable!("adjacency schema yields an adjacency section"),
    }
}

/// Walk the agents from Manager to Done and collect their parameters.
pub fn run_chain(
    description: &str,
    backend: &mut dyn AgentBackend,
    hooks: &mut dyn SectionHook,
    max_retries: usize,
) -> Result<ChainRun, ChainError> {
    use AgentRole::*;
    let mut s = Session {
        backend,
        hooks,
        description: description.to_string(),
        // Replaced once Manager picks the kind; the first step is shared.
        fsm: TurnFSM::new(StructureKind::Wall),
        turns: Vec::new(),
        context: Vec::new(),
        queries: Vec::new(),
    };

    let (section, block) = s.ask(Manager, None)?;
    let Section::Manager(manager) = &section else {
        unreachable!()
    };
    let kind = manager.structure_kind;
    s.fsm = TurnFSM::new(kind);
    let mut params = StructuredParams::new(description, manager.clone());
    s.accept(Manager, &section, block)?;
    s.advance(Manager, Outcome::Ok)?;

    let (section, block) = s.ask(Allocation, None)?;
    let Section::Allocation(alloc) = &section else {
        unreachable!()
    };
    let alloc = alloc.clone();
    let names: BTreeSet<String> = alloc.rooms.iter().map(|r| r.name.clone()).collect();
    if names.len() != alloc.rooms.len() {
        return Err(inconsistent(Allocation, "room names repeat".into()));
    }
    if !names.contains("room1") {
        return Err(inconsistent(Allocation, "no room1".into()));
    }
    if (kind == StructureKind::Column) != alloc.grid.is_some() {
        return Err(inconsistent(
            Allocation,
            format!("grid must be given exactly for column scenes (kind {kind})"),
        ));
    }
    s.accept(Allocation, &section, block)?;
    params.insert(section).map_err(|m| inconsistent(Allocation, m))?;
    s.advance(Allocation, Outcome::Ok)?;

    let out = match kind {
        StructureKind::Wall => {
            let nominal = nominal_rooms(&alloc.rooms, NOMINAL_ROOM_SIZE);
            s.adjacency_loop(max_retries, &|sec| match sec {
                Section::Adjacency(a) => validate_adjacency(&nominal, a),
                _ => CheckReport::default(),
            })?
        }
        StructureKind::Column => {
            let grid = alloc.grid.expect("checked above");
            s.adjacency_loop(max_retries, &|sec| match sec {
                Section::Cells(c) => validate_cells(&grid, &alloc.rooms, c),
                _ => CheckReport::default(),
            })?
        }
    };
    let adjacency_attempts = out.attempts;
    params.insert(out.section).map_err(|m| inconsistent(Adjacency, m))?;

    if kind == StructureKind::Wall {
        let (section, block) = s.ask(Shape, None)?;
        let Section::Shape(rooms) = &section else {
            unreachable!()
        };
        let shaped: BTreeSet<String> = rooms.iter().map(|r| r.name.clone()).collect();
        if shaped != names || rooms.len() != names.len() {
            return Err(inconsistent(
                Shape,
                "sized rooms differ from the allocated rooms".into(),
            ));
        }
        let adj = params.adjacency.as_ref().expect("accepted above");
        place_rooms(rooms, adj).map_err(|e| inconsistent(Shape, format!("sizes break the accepted adjacency: {e}")))?;
        s.accept(Shape, &section, block)?;
        params.insert(section).map_err(|m| inconsistent(Shape, m))?;
        s.advance(Shape, Outcome::Ok)?;
    }

    for role in [Material, DoorWindow, Object] {
        let (section, block) = s.ask(role, None)?;
        if let Section::Objects(o) = &section {
            if let Some(r) = o.regions.iter().find(|r| !names.contains(&r.region)) {
                return Err(inconsistent(
                    Object,
                    format!("region `{}` is not an allocated room", r.region),
                ));
            }
        }
        s.accept(role, &section, block)?;
        params.insert(section).map_err(|m| inconsistent(role, m))?;
        s.advance(role, Outcome::Ok)?;
    }

    debug_assert!(s.fsm.is_done());
    let missing = params.missing();
    if !missing.is_empty() {
        let first = missing[0];
        return Err(inconsistent(
            StructuredParams::owner(first),
            format!("section `{first}` never arrived"),
        ));
    }
    Ok(ChainRun {
        params,
        turns: s.turns,
        adjacency_attempts,
        queries: s.queries,
    })
}
