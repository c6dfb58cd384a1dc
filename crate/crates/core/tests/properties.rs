use proptest::prelude::*;

use setforge_core::floorplan::{place_rooms, AdjacencySpec, Direction, Relation, RoomSpec};
use setforge_core::geom::{Rect, Vec2, Vec3};
use setforge_core::layout::{avoid_collision, overlapping_pairs, Placement, PlacementConfig, PlacementRegion, Slot};
use setforge_core::model::{Mesh, SceneElement, SceneGraph, StructureKind, Transform};
use setforge_core::pipeline::{export_json, export_obj, import_json};
use setforge_core::retrieval::{Embedder, MockEmbedder};

fn dir() -> impl Strategy<Value = Direction> {
    prop_oneof![
        Just(Direction::East),
        Just(Direction::West),
        Just(Direction::North),
        Just(Direction::South)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn placed_rooms_never_overlap(
        sizes in prop::collection::vec((2.0f64..8.0, 2.0f64..8.0), 2..6),
        links in prop::collection::vec((0usize..6, dir()), 5),
    ) {
        let rooms: Vec<RoomSpec> = sizes
            .iter()
            .enumerate()
            .map(|(i, &(w, d))| RoomSpec::new(format!("room{}", i + 1), w, d))
            .collect();
        let relations = (1..rooms.len())
            .map(|k| {
                let (from, d) = links[k - 1];
                Relation::new(format!("room{}", from % k + 1), format!("room{}", k + 1), d)
            })
            .collect();
        if let Ok(plan) = place_rooms(&rooms, &AdjacencySpec::new(relations)) {
            let rects: Vec<Rect> = plan.rooms.iter().map(|r| r.rect()).collect();
            for i in 0..rects.len() {
                for j in i + 1..rects.len() {
                    prop_assert!(!rects[i].interiors_intersect(&rects[j], 1e-9), "{i} and {j} overlap");
                }
            }
            prop_assert_eq!(plan.rooms[0].origin, Vec2::default());
        }
    }

    #[test]
    fn resolved_layouts_have_no_overlaps(
        boxes in prop::collection::vec((0.0f64..6.0, 0.0f64..4.0, 0.2f64..1.0, 0.2f64..1.0), 1..12),
    ) {
        let region = PlacementRegion::rect("room1", Rect::new(Vec2::default(), Vec2::new(6.0, 4.0)));
        let ps: Vec<Placement> = boxes
            .iter()
            .enumerate()
            .map(|(k, &(x, y, w, d))| Placement {
                object: format!("o{k}"),
                position: Vec3::new(x, y, 0.0),
                yaw: 0.0,
                scale: Vec3::ONE,
                size: Vec3::new(w, d, 0.8),
                slot: Slot::Center,
                anchor_id: None,
                anchor_ref: None,
                wall: None,
            })
            .collect();
        if let Ok(out) = avoid_collision(ps, &region, &PlacementConfig::default()) {
            prop_assert!(overlapping_pairs(&out).is_empty());
            for p in &out {
                prop_assert!(region.contains(&p.rect()), "{} left the region", p.object);
            }
        }
    }

    #[test]
    fn scene_json_is_a_fixed_point(
        cubes in prop::collection::vec(
            (-50.0f64..50.0, -50.0f64..50.0, 0.0f64..5.0, -3.2f64..3.2, 0.1f64..4.0),
            0..6,
        ),
    ) {
        let elements = cubes
            .iter()
            .enumerate()
            .map(|(k, &(x, y, z, yaw, s))| {
                let mut e = SceneElement::instance("room1", "obj", k + 1, Mesh::footprint_box(Vec3::new(1.0, 0.7, 0.4)));
                e.transform = Transform::new(Vec3::new(x, y, z), yaw, Vec3::new(s, s, s));
                e.material_ref = Some("oak".into());
                e
            })
            .collect();
        let g = SceneGraph::new(StructureKind::Wall, elements);
        let once = export_json(&g);
        let back = import_json(&once).unwrap();
        prop_assert_eq!(export_json(&back), once);
        prop_assert_eq!(back.attribute_ids(), g.attribute_ids());
        let obj = String::from_utf8(export_obj(&g, "scene.mtl")).unwrap();
        prop_assert_eq!(obj.lines().filter(|l| l.starts_with("g ")).count(), cubes.len());
        prop_assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8 * cubes.len());
    }

    #[test]
    fn mock_embeddings_are_unit_and_stable(text in "[a-z]{1,8}( [a-z]{1,8}){0,5}") {
        let e = MockEmbedder::default();
        let v = e.embed(&text).unwrap();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert_eq!(v, e.embed(&text).unwrap());
    }
}
