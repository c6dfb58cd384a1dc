use serde::{Deserialize, Serialize};

use super::{FloorplanError, PlacedFloorplan};
use crate::geom::{Rect, Vec2, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Line,
    Arc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    External,
    Internal,
}

/// A wall-boundary edge. Oriented counter-clockwise around its first owner,
/// so the first owner's interior lies to the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub start: Vec2,
    pub end: Vec2,
    /// Signed sagitta for arcs (positive bulges out of the owner), 0 for lines.
    pub h_chord: f64,
    pub classification: Classification,
    pub owner_rooms: Vec<String>,
    /// Side index (0 south, 1 east, 2 north, 3 west) of each owner.
    pub owner_sides: Vec<usize>,
}

impl Edge {
    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    /// Unit normal pointing out of the first owner.
    pub fn outward(&self) -> Vec2 {
        let d = (self.end - self.start).normalized();
        Vec2::new(d.y, -d.x)
    }

    /// Endpoints oriented counter-clockwise around `room`.
    pub fn oriented_for(&self, room: &str) -> Option<(Vec2, Vec2)> {
        match self.owner_rooms.iter().position(|r| r == room)? {
            0 => Some((self.start, self.end)),
            _ => Some((self.end, self.start)),
        }
    }
}

struct Shared {
    t0: f64,
    t1: f64,
    other: usize,
    other_side: usize,
}

/// Derive the boundary edges of a placed plan. Collinear opposite-facing room
/// sides are split where they start to coincide; coincident pieces become one
/// internal edge owned by both rooms, everything else is external. Requested
/// arcs replace whole external sides.
pub fn parse_edge(plan: &PlacedFloorplan) -> Result<Vec<Edge>, FloorplanError> {
    let rooms = &plan.rooms;
    let rects: Vec<Rect> = rooms.iter().map(|r| r.rect()).collect();
    let mut out = Vec::new();

    for (i, room) in rooms.iter().enumerate() {
        for arc in &room.spec.arc_edges {
            if arc.edge >= 4 {
                return Err(FloorplanError::ArcEdgeIndex {
                    room: room.spec.name.clone(),
                    edge: arc.edge,
                });
            }
        }
        for side in 0..4 {
            let (p, q) = room.side(side);
            let len = p.distance(q);
            let dir = (q - p).normalized();
            let opposite = (side + 2) % 4;

            let mut shared = Vec::new();
            for (j, other) in rooms.iter().enumerate() {
                if j == i {
                    continue;
                }
                let (op, oq) = other.side(opposite);
                if (op - p).cross(dir).abs() > EPS || (oq - p).cross(dir).abs() > EPS {
                    continue;
                }
                let (a, b) = ((op - p).dot(dir), (oq - p).dot(dir));
                let (t0, t1) = (a.min(b).max(0.0), a.max(b).min(len));
                if t1 - t0 > EPS {
                    shared.push(Shared {
                        t0,
                        t1,
                        other: j,
                        other_side: opposite,
                    });
                }
            }

            let mut breaks = vec![0.0, len];
            for s in &shared {
                breaks.push(s.t0);
                breaks.push(s.t1);
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup_by(|a, b| (*a - *b).abs() <= EPS);

            let arc = room.spec.arc_edges.iter().find(|a| a.edge == side);
            let pieces: Vec<(f64, f64, Option<&Shared>)> = breaks
                .windows(2)
                .map(|w| {
                    let mid = 0.5 * (w[0] + w[1]);
                    let owner = shared.iter().find(|s| s.t0 - EPS <= mid && mid <= s.t1 + EPS);
                    (w[0], w[1], owner)
                })
                .collect();

            if let Some(arc) = arc.filter(|a| a.h_chord != 0.0) {
                if pieces.iter().any(|p| p.2.is_some()) {
                    return Err(FloorplanError::ArcOnInternalEdge {
                        room: room.spec.name.clone(),
                        edge: side,
                    });
                }
                if arc.h_chord.abs() >= len / 2.0 {
                    return Err(FloorplanError::InvalidArc {
                        room: room.spec.name.clone(),
                        edge: side,
                        h_chord: arc.h_chord,
                        limit: len / 2.0,
                    });
                }
                if arc.h_chord > 0.0 {
                    let n = Vec2::new(dir.y, -dir.x);
                    let far = [p + n * arc.h_chord, q + n * arc.h_chord];
                    let bulge = crate::geom::bounding_rect(&[p, q, far[0], far[1]]);
                    if let Some(j) = (0..rooms.len()).find(|&j| j != i && rects[j].interiors_intersect(&bulge, EPS)) {
                        return Err(FloorplanError::ArcCollision {
                            room: room.spec.name.clone(),
                            edge: side,
                            other: rooms[j].spec.name.clone(),
                        });
                    }
                }
                out.push(Edge {
                    kind: super::EdgeKind::Arc,
                    start: p,
                    end: q,
                    h_chord: arc.h_chord,
                    classification: Classification::External,
                    owner_rooms: vec![room.spec.name.clone()],
                    owner_sides: vec![side],
                });
                continue;
            }

            for (t0, t1, owner) in pieces {
                let (a, b) = (p + dir * t0, p + dir * t1);
                match owner {
                    None => out.push(Edge {
                        kind: EdgeKind::Line,
                        start: a,
                        end: b,
                        h_chord: 0.0,
                        classification: Classification::External,
                        owner_rooms: vec![room.spec.name.clone()],
                        owner_sides: vec![side],
                    }),
                    Some(s) if s.other > i => out.push(Edge {
                        kind: EdgeKind::Line,
                        start: a,
                        end: b,
                        h_chord: 0.0,
                        classification: Classification::Internal,
                        owner_rooms: vec![room.spec.name.clone(), rooms[s.other].spec.name.clone()],
                        owner_sides: vec![side, s.other_side],
                    }),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(out)
}
