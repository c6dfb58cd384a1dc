use serde::{Deserialize, Serialize};

use super::{room_number, Edge, EdgeKind, FloorplanError};
use crate::geom::{ear_clip, is_self_intersecting, signed_area, Vec2, EPS};
use crate::model::Mesh;

/// A room's closed floor outline, counter-clockwise, with its triangulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPolygon {
    pub room: String,
    pub polygon: Vec<Vec2>,
    pub triangles: Vec<[usize; 3]>,
}

impl FloorPolygon {
    pub fn area(&self) -> f64 {
        signed_area(&self.polygon)
    }

    /// Upward-facing floor mesh at z = 0.
    pub fn mesh(&self) -> Mesh {
        Mesh {
            vertices: self.polygon.iter().map(|p| p.extend(0.0)).collect(),
            faces: self
                .triangles
                .iter()
                .map(|t| [t[0] as u32, t[1] as u32, t[2] as u32])
                .collect(),
        }
    }
}

/// Circle through the chord `start`-`end` whose arc has sagitta `h_chord`,
/// measured positive to the right of the direction of travel.
/// Returns `(center, radius)`.
pub fn circle_from_chord(start: Vec2, end: Vec2, h_chord: f64) -> (Vec2, f64) {
    let c = start.distance(end);
    let radius = (c * c / 4.0 + h_chord * h_chord) / (2.0 * h_chord.abs());
    let d = (end - start).normalized();
    let n = Vec2::new(d.y, -d.x);
    let mid = (start + end) * 0.5;
    let center = mid + n * (h_chord - h_chord.signum() * radius);
    (center, radius)
}

/// `segments + 1` points along the minor arc from `start` to `end`, endpoints
/// included exactly. A zero chord height yields the straight segment.
pub fn arc_points(start: Vec2, end: Vec2, h_chord: f64, segments: usize) -> Vec<Vec2> {
    let segments = segments.max(1);
    if h_chord == 0.0 {
        return (0..=segments)
            .map(|k| start + (end - start) * (k as f64 / segments as f64))
            .collect();
    }
    let (center, radius) = circle_from_chord(start, end, h_chord);
    let (a0, a1) = (
        (start - center).y.atan2((start - center).x),
        (end - center).y.atan2((end - center).x),
    );
    let sweep = crate::geom::wrap_angle(a1 - a0);
    let mut pts: Vec<Vec2> = (0..=segments)
        .map(|k| {
            let a = a0 + sweep * (k as f64 / segments as f64);
            center + Vec2::new(a.cos(), a.sin()) * radius
        })
        .collect();
    pts[0] = start;
    pts[segments] = end;
    pts
}

/// Close each room's boundary into a floor polygon, discretizing arcs into
/// `arc_segments` chords, and triangulate it. Rooms are returned in room
/// number order.
pub fn tessellate(edges: &[Edge], arc_segments: usize) -> Result<Vec<FloorPolygon>, FloorplanError> {
    let mut rooms: Vec<&str> = Vec::new();
    for e in edges {
        for r in &e.owner_rooms {
            if !rooms.contains(&r.as_str()) {
                rooms.push(r);
            }
        }
    }
    rooms.sort_by_key(|r| (room_number(r).unwrap_or(u32::MAX), r.to_string()));

    rooms
        .into_iter()
        .map(|room| {
            let segs: Vec<(Vec2, Vec2, &Edge)> = edges
                .iter()
                .filter_map(|e| e.oriented_for(room).map(|(a, b)| (a, b, e)))
                .collect();
            let polygon = close_loop(room, &segs, arc_segments)?;
            if polygon.len() < 3 || is_self_intersecting(&polygon) {
                return Err(FloorplanError::SelfIntersection(room.to_string()));
            }
            let triangles = ear_clip(&polygon);
            Ok(FloorPolygon {
                room: room.to_string(),
                polygon,
                triangles,
            })
        })
        .collect()
}

fn close_loop(room: &str, segs: &[(Vec2, Vec2, &Edge)], arc_segments: usize) -> Result<Vec<Vec2>, FloorplanError> {
    let open = || FloorplanError::OpenLoop(room.to_string());
    if segs.is_empty() {
        return Err(open());
    }
    let mut used = vec![false; segs.len()];
    let mut polygon = Vec::new();
    let mut cur = 0usize;
    let first = segs[0].0;
    loop {
        used[cur] = true;
        let (a, b, edge) = segs[cur];
        match edge.kind {
            EdgeKind::Line => polygon.push(a),
            EdgeKind::Arc => {
                let h = if edge.start.approx_eq(a, EPS) {
                    edge.h_chord
                } else {
                    -edge.h_chord
                };
                let pts = arc_points(a, b, h, arc_segments);
                polygon.extend_from_slice(&pts[..pts.len() - 1]);
            }
        }
        if b.approx_eq(first, EPS) {
            break;
        }
        let mut next = segs
            .iter()
            .enumerate()
            .filter(|(i, s)| !used[*i] && s.0.approx_eq(b, EPS));
        cur = match (next.next(), next.next()) {
            (Some((i, _)), None) => i,
            _ => return Err(open()),
        };
    }
    if used.iter().any(|u| !u) {
        return Err(open());
    }
    Ok(polygon)
}
