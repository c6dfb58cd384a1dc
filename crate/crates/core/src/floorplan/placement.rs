use std::collections::{BTreeSet, VecDeque};

use super::{
    AdjacencySpec, Direction, FloorplanError, PlacedFloorplan, PlacedRoom, RoomSpec, DEFAULT_WALL_HEIGHT,
    DEFAULT_WALL_THICKNESS, MIN_SHARED_LENGTH,
};
use crate::geom::{Rect, Vec2, EPS};

/// Origin for a room of size `size` placed `dir` of `reference`. East/west
/// neighbours share the reference's min-y, north/south neighbours its min-x.
fn origin_for(dir: Direction, reference: &Rect, size: Vec2) -> Vec2 {
    match dir {
        Direction::East => Vec2::new(reference.max.x, reference.min.y),
        Direction::West => Vec2::new(reference.min.x - size.x, reference.min.y),
        Direction::North => Vec2::new(reference.min.x, reference.max.y),
        Direction::South => Vec2::new(reference.min.x, reference.min.y - size.y),
    }
}

/// True if `b` sits `dir` of `a` and they share at least the minimum boundary.
pub(crate) fn relation_holds(a: &Rect, b: &Rect, dir: Direction) -> bool {
    let (touch, shared) = match dir {
        Direction::East => ((b.min.x - a.max.x).abs(), a.overlap(b).1),
        Direction::West => ((a.min.x - b.max.x).abs(), a.overlap(b).1),
        Direction::North => ((b.min.y - a.max.y).abs(), a.overlap(b).0),
        Direction::South => ((a.min.y - b.max.y).abs(), a.overlap(b).0),
    };
    touch <= EPS && shared >= MIN_SHARED_LENGTH - EPS
}

pub(crate) fn check_rooms(rooms: &[RoomSpec]) -> Result<(), FloorplanError> {
    let mut names = BTreeSet::new();
    for r in rooms {
        r.validate()?;
        if !names.insert(r.name.as_str()) {
            return Err(FloorplanError::DuplicateRoom(r.name.clone()));
        }
    }
    if !names.contains("room1") {
        return Err(FloorplanError::MissingRoom1);
    }
    Ok(())
}

pub(crate) fn check_references(rooms: &[RoomSpec], adj: &AdjacencySpec) -> Result<(), FloorplanError> {
    for rel in &adj.relations {
        for n in [&rel.a, &rel.b] {
            if !rooms.iter().any(|r| &r.name == n) {
                return Err(FloorplanError::UnknownRoom(n.clone()));
            }
        }
        if rel.a == rel.b {
            return Err(FloorplanError::SelfRelation(rel.a.clone()));
        }
    }
    Ok(())
}

/// Fix absolute room origins. `room1` sits at the origin; every other room is
/// placed breadth-first from an already placed neighbour, visiting relations
/// in declaration order.
pub fn place_rooms(rooms: &[RoomSpec], adj: &AdjacencySpec) -> Result<PlacedFloorplan, FloorplanError> {
    check_rooms(rooms)?;
    check_references(rooms, adj)?;

    let index = |name: &str| rooms.iter().position(|r| r.name == name).unwrap();
    let mut rects: Vec<Option<Rect>> = vec![None; rooms.len()];
    let start = index("room1");
    rects[start] = Some(Rect::new(
        Vec2::default(),
        Vec2::new(rooms[start].width, rooms[start].depth),
    ));
    let mut queue = VecDeque::from([start]);

    while let Some(cur) = queue.pop_front() {
        let cur_rect = rects[cur].unwrap();
        for rel in &adj.relations {
            let (ia, ib) = (index(&rel.a), index(&rel.b));
            let (other, dir_from_cur) = if ia == cur {
                (ib, rel.relation)
            } else if ib == cur {
                (ia, rel.relation.opposite())
            } else {
                continue;
            };
            if let Some(other_rect) = rects[other] {
                if !relation_holds(&cur_rect, &other_rect, dir_from_cur) {
                    return Err(FloorplanError::UnplaceableRoom {
                        room: rooms[other].name.clone(),
                        reference: rooms[cur].name.clone(),
                        relation: dir_from_cur,
                        reason: "conflicts with its earlier placement".into(),
                    });
                }
                continue;
            }
            let size = Vec2::new(rooms[other].width, rooms[other].depth);
            let origin = origin_for(dir_from_cur, &cur_rect, size);
            let rect = Rect::new(origin, origin + size);
            if let Some(hit) = rects
                .iter()
                .enumerate()
                .find(|(_, r)| r.is_some_and(|r| r.interiors_intersect(&rect, EPS)))
            {
                return Err(FloorplanError::UnplaceableRoom {
                    room: rooms[other].name.clone(),
                    reference: rooms[cur].name.clone(),
                    relation: dir_from_cur,
                    reason: format!("would overlap `{}`", rooms[hit.0].name),
                });
            }
            rects[other] = Some(rect);
            queue.push_back(other);
        }
    }

    let mut placed = Vec::with_capacity(rooms.len());
    for (spec, rect) in rooms.iter().zip(&rects) {
        let rect = rect.ok_or_else(|| FloorplanError::DisconnectedGraph(spec.name.clone()))?;
        placed.push(PlacedRoom {
            number: spec.number()?,
            spec: spec.clone(),
            origin: rect.min,
        });
    }
    Ok(PlacedFloorplan {
        rooms: placed,
        wall_thickness: DEFAULT_WALL_THICKNESS,
        wall_height: DEFAULT_WALL_HEIGHT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floorplan::Relation;

    /// Count sample points (cell centres of a `step` grid) lying in the open
    /// interior of two or more rectangles.
    fn grid_overlaps(rects: &[Rect], step: f64) -> usize {
        let lo = rects.iter().fold(Vec2::new(f64::MAX, f64::MAX), |m, r| {
            Vec2::new(m.x.min(r.min.x), m.y.min(r.min.y))
        });
        let hi = rects.iter().fold(Vec2::new(f64::MIN, f64::MIN), |m, r| {
            Vec2::new(m.x.max(r.max.x), m.y.max(r.max.y))
        });
        let nx = ((hi.x - lo.x) / step).ceil() as usize;
        let ny = ((hi.y - lo.y) / step).ceil() as usize;
        let mut hits = 0;
        for i in 0..nx {
            for j in 0..ny {
                let p = Vec2::new(lo.x + (i as f64 + 0.5) * step, lo.y + (j as f64 + 0.5) * step);
                if rects.iter().filter(|r| r.contains_open(p)).count() > 1 {
                    hits += 1;
                }
            }
        }
        hits
    }

    #[test]
    fn east_neighbour_shares_wall() {
        let rooms = [RoomSpec::new("room1", 4.0, 3.0), RoomSpec::new("room2", 3.0, 3.0)];
        let adj = AdjacencySpec::new(vec![Relation::new("room1", "room2", Direction::East)]);
        let plan = place_rooms(&rooms, &adj).unwrap();
        assert_eq!(plan.origin("room1"), Some(Vec2::new(0.0, 0.0)));
        assert_eq!(plan.origin("room2"), Some(Vec2::new(4.0, 0.0)));
        let rects: Vec<Rect> = plan.rooms.iter().map(|r| r.rect()).collect();
        assert_eq!(grid_overlaps(&rects, 0.1), 0);
        assert!(relation_holds(&rects[0], &rects[1], Direction::East));
    }

    #[test]
    fn single_room_sits_at_origin() {
        let plan = place_rooms(&[RoomSpec::new("room1", 4.0, 3.0)], &AdjacencySpec::default()).unwrap();
        assert_eq!(plan.rooms[0].origin, Vec2::new(0.0, 0.0));
    }

    #[test]
    fn chain_of_three() {
        let rooms: Vec<RoomSpec> = (1..=3).map(|i| RoomSpec::new(format!("room{i}"), 4.0, 3.0)).collect();
        let adj = AdjacencySpec::new(vec![
            Relation::new("room1", "room2", Direction::East),
            Relation::new("room2", "room3", Direction::East),
        ]);
        let plan = place_rooms(&rooms, &adj).unwrap();
        let origins: Vec<Vec2> = plan.rooms.iter().map(|r| r.origin).collect();
        assert_eq!(
            origins,
            vec![Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(8.0, 0.0)]
        );
        let rects: Vec<Rect> = plan.rooms.iter().map(|r| r.rect()).collect();
        assert_eq!(grid_overlaps(&rects, 0.1), 0);
    }

    #[test]
    fn reverse_relation_places_reference_side() {
        // room2 is the reference: room1 lies north of room2, so room2 goes south of room1.
        let rooms = [RoomSpec::new("room1", 4.0, 3.0), RoomSpec::new("room2", 2.0, 2.0)];
        let adj = AdjacencySpec::new(vec![Relation::new("room2", "room1", Direction::North)]);
        let plan = place_rooms(&rooms, &adj).unwrap();
        assert_eq!(plan.origin("room2"), Some(Vec2::new(0.0, -2.0)));
    }

    #[test]
    fn overlap_is_unplaceable() {
        // room3 east of room1 lands on top of room2.
        let rooms: Vec<RoomSpec> = (1..=3).map(|i| RoomSpec::new(format!("room{i}"), 3.0, 3.0)).collect();
        let adj = AdjacencySpec::new(vec![
            Relation::new("room1", "room2", Direction::East),
            Relation::new("room1", "room3", Direction::East),
        ]);
        let err = place_rooms(&rooms, &adj).unwrap_err();
        assert!(matches!(err, FloorplanError::UnplaceableRoom { ref room, .. } if room == "room3"));
    }

    #[test]
    fn unreachable_room_is_disconnected() {
        let rooms: Vec<RoomSpec> = (1..=3).map(|i| RoomSpec::new(format!("room{i}"), 3.0, 3.0)).collect();
        let adj = AdjacencySpec::new(vec![Relation::new("room1", "room2", Direction::East)]);
        assert_eq!(
            place_rooms(&rooms, &adj).unwrap_err(),
            FloorplanError::DisconnectedGraph("room3".into())
        );
    }

    #[test]
    fn cycle_that_closes_consistently_is_fine() {
        // 2x2 block of equal rooms.
        let rooms: Vec<RoomSpec> = (1..=4).map(|i| RoomSpec::new(format!("room{i}"), 3.0, 3.0)).collect();
        let adj = AdjacencySpec::new(vec![
            Relation::new("room1", "room2", Direction::East),
            Relation::new("room1", "room3", Direction::North),
            Relation::new("room3", "room4", Direction::East),
            Relation::new("room2", "room4", Direction::North),
        ]);
        let plan = place_rooms(&rooms, &adj).unwrap();
        assert_eq!(plan.origin("room4"), Some(Vec2::new(3.0, 3.0)));
    }

    #[test]
    fn size_bounds_enforced() {
        let err = place_rooms(&[RoomSpec::new("room1", 0.5, 3.0)], &AdjacencySpec::default()).unwrap_err();
        assert!(matches!(err, FloorplanError::RoomSizeOutOfRange { .. }));
    }
}
