//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setforge_core::agents::{validate_adjacency, AgentRole, FsmError, Next, Outcome, ScriptedBackend, TurnFSM};
use setforge_core::floorplan::{
    build_walls, parse_edge, place_rooms, AdjacencySpec, ColumnGridSpec, Direction, GapAxis, OpeningKind, Relation,
    RoomSpec,
};
use setforge_core::geom::{Aabb, Rect, Vec2, Vec3};
use setforge_core::layout::{
    avoid_collision, place_relative, DistanceLevel, LayoutError, LayoutTriplet, Placement, PlacementConfig,
    PlacementRegion, Slot, SpatialRelation,
};
use setforge_core::model::{Mesh, StructureKind};
use setforge_core::openings::{fit_asset, open_wall, plan_column_openings, ColumnStyles, GapFill, OpeningSpec};
use setforge_core::pipeline::{demo, export_json, generate_with, import_json, Input, PipelineConfig, RunReport};
use setforge_core::retrieval::{build_index, Annotations, AssetCategory, AssetRecord, Embedder, MockEmbedder};

type Outcome_ = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome_);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    }};
}

// ---------------------------------------------------------------- 1

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("room{i}")).collect()
}

/// Conflicting directions for the same unordered pair.
fn oracle_contradiction(adj: &AdjacencySpec) -> bool {
    let mut seen: BTreeMap<(String, String), Direction> = BTreeMap::new();
    for r in &adj.relations {
        let (key, d) = if r.a < r.b {
            ((r.a.clone(), r.b.clone()), r.relation)
        } else {
            ((r.b.clone(), r.a.clone()), r.relation.opposite())
        };
        if let Some(prev) = seen.insert(key, d) {
            if prev != d {
                return true;
            }
        }
    }
    false
}

fn oracle_connected(n: usize, adj: &AdjacencySpec) -> bool {
    let mut reached = BTreeSet::from(["room1".to_string()]);
    let mut queue = VecDeque::from(["room1".to_string()]);
    while let Some(cur) = queue.pop_front() {
        for r in &adj.relations {
            let other = if r.a == cur {
                &r.b
            } else if r.b == cur {
                &r.a
            } else {
                continue;
            };
            if reached.insert(other.clone()) {
                queue.push_back(other.clone());
            }
        }
    }
    reached.len() == n
}

/// Sample points at the centres of a `step` grid covered by two or more rooms.
fn sampled_overlaps(rects: &[Rect], step: f64) -> usize {
    let lo = rects.iter().fold(Vec2::new(f64::MAX, f64::MAX), |m, r| {
        Vec2::new(m.x.min(r.min.x), m.y.min(r.min.y))
    });
    let hi = rects.iter().fold(Vec2::new(f64::MIN, f64::MIN), |m, r| {
        Vec2::new(m.x.max(r.max.x), m.y.max(r.max.y))
    });
    let (nx, ny) = (
        ((hi.x - lo.x) / step).ceil() as usize,
        ((hi.y - lo.y) / step).ceil() as usize,
    );
    let mut hits = 0;
    for ix in 0..nx {
        for iy in 0..ny {
            let p = Vec2::new(lo.x + (ix as f64 + 0.5) * step, lo.y + (iy as f64 + 0.5) * step);
            let inside = rects
                .iter()
                .filter(|r| p.x > r.min.x && p.x < r.max.x && p.y > r.min.y && p.y < r.max.y)
                .count();
            if inside > 1 {
                hits += 1;
            }
        }
    }
    hits
}

fn adjacency_loop() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dirs = [Direction::East, Direction::West, Direction::North, Direction::South];
    let (mut accepted, mut rejected) = (0, 0);
    for case in 0..200 {
        let n = rng.gen_range(3..=5);
        let ids = names(n);
        let rooms: Vec<RoomSpec> = ids
            .iter()
            .map(|id| {
                RoomSpec::new(
                    id,
                    rng.gen_range(20..=70) as f64 / 10.0,
                    rng.gen_range(20..=70) as f64 / 10.0,
                )
            })
            .collect();
        let mut relations = Vec::new();
        // A spanning chain most of the time, then a few random extras.
        if rng.gen_bool(0.8) {
            for k in 1..n {
                let a = ids[rng.gen_range(0..k)].clone();
                relations.push(Relation::new(a, ids[k].clone(), *dirs.choose(&mut rng).unwrap()));
            }
        }
        for _ in 0..rng.gen_range(0..=2) {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n);
            if a == b {
                b = (b + 1) % n;
            }
            relations.push(Relation::new(
                ids[a].clone(),
                ids[b].clone(),
                *dirs.choose(&mut rng).unwrap(),
            ));
        }
        let adj = AdjacencySpec::new(relations);
        let report = validate_adjacency(&rooms, &adj);
        let realized = place_rooms(&rooms, &adj);
        if report.ok {
            accepted += 1;
            let plan = realized.map_err(|e| format!("case {case}: accepted but not realized: {e}"))?;
            let rects: Vec<Rect> = plan.rooms.iter().map(|r| r.rect()).collect();
            let overlaps = sampled_overlaps(&rects, 0.05);
            ensure!(overlaps == 0, "case {case}: {overlaps} overlapping samples");
            ensure!(
                !oracle_contradiction(&adj) && oracle_connected(n, &adj),
                "case {case}: accepted a contradictory or disconnected spec"
            );
        } else {
            rejected += 1;
            let explained = realized.is_err() || oracle_contradiction(&adj) || !oracle_connected(n, &adj);
            ensure!(
                explained,
                "case {case}: rejected without cause: {:?}",
                report.violations
            );
        }
    }
    ensure!(
        accepted > 20 && rejected > 20,
        "degenerate mix: {accepted} accepted, {rejected} rejected"
    );
    Ok(format!(
        "200 specs, {accepted} accepted, {rejected} rejected, 100% agreement"
    ))
}

// ---------------------------------------------------------------- 2

fn anchor(pos: Vec3, yaw: f64, size: Vec3) -> Placement {
    Placement {
        object: "anchor".into(),
        position: pos,
        yaw,
        scale: Vec3::new(1.0, 1.0, 1.0),
        size,
        slot: Slot::Edge,
        anchor_id: Some("room1_a1".into()),
        anchor_ref: None,
        wall: None,
    }
}

fn relative_offsets() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = PlacementConfig::default();
    let planar = [
        (SpatialRelation::Left, (-1.0, 0.0)),
        (SpatialRelation::Right, (1.0, 0.0)),
        (SpatialRelation::InFrontOf, (0.0, -1.0)),
        (SpatialRelation::Behind, (0.0, 1.0)),
        (SpatialRelation::Above, (0.0, 0.0)),
    ];
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let pos = Vec3::new(
            rng.gen_range(-20.0..20.0),
            rng.gen_range(-20.0..20.0),
            rng.gen_range(0.0..1.0),
        );
        let yaw = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let a = anchor(pos, yaw, Vec3::new(1.0, 0.8, 0.7));
        let anchors = BTreeMap::from([("room1_a1".to_string(), a)]);
        let &(rel, (vx, vy)) = planar.choose(&mut rng).unwrap();
        let (dist, lambda) = if rng.gen_bool(0.5) {
            (DistanceLevel::Near, cfg.lambda_near)
        } else {
            (DistanceLevel::Far, cfg.lambda_far)
        };
        let t = LayoutTriplet {
            anchor: "room1_a1".into(),
            relation: rel,
            distance: dist,
            object_query: "chair".into(),
        };
        let p = place_relative(&t, "chair", Vec3::new(0.5, 0.5, 0.9), &anchors, &cfg).map_err(|e| e.to_string())?;
        let (s, c) = yaw.sin_cos();
        // Above rests on the anchor's top whatever the distance level.
        let expect = if rel == SpatialRelation::Above {
            Vec3::new(pos.x, pos.y, pos.z + 0.7)
        } else {
            Vec3::new(
                pos.x + lambda * (c * vx - s * vy),
                pos.y + lambda * (s * vx + c * vy),
                pos.z,
            )
        };
        let err = (p.position - expect).length();
        worst = worst.max(err);
        ensure!(err <= 1e-9, "{rel:?} {dist:?} yaw {yaw}: off by {err:e}");
    }
    Ok(format!("1000 placements, max error {worst:.1e} m"))
}

// ---------------------------------------------------------------- 3

fn box_at(k: usize, c: Vec2, size: Vec3) -> Placement {
    Placement {
        object: format!("obj{k}"),
        position: c.extend(0.0),
        yaw: 0.0,
        scale: Vec3::new(1.0, 1.0, 1.0),
        size,
        slot: Slot::Center,
        anchor_id: None,
        anchor_ref: None,
        wall: None,
    }
}

fn xy_overlaps(ps: &[Placement]) -> usize {
    let mut n = 0;
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let (a, b) = (ps[i].rect(), ps[j].rect());
            let ox = a.max.x.min(b.max.x) - a.min.x.max(b.min.x);
            let oy = a.max.y.min(b.max.y) - a.min.y.max(b.min.y);
            if ox > 1e-9 && oy > 1e-9 {
                n += 1;
            }
        }
    }
    n
}

fn collision_free() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = PlacementConfig::default();
    let (mut resolved, mut unresolvable) = (0, 0);
    for case in 0..100 {
        let (w, d) = (rng.gen_range(3.0..9.0), rng.gen_range(3.0..9.0));
        let origin = Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let frame = Rect::new(origin, origin + Vec2::new(w, d));
        let region = PlacementRegion::rect("room1", frame);
        let n = rng.gen_range(1..=20);
        let ps: Vec<Placement> = (0..n)
            .map(|k| {
                let size = Vec3::new(
                    rng.gen_range(0.3..1.2),
                    rng.gen_range(0.3..1.2),
                    rng.gen_range(0.3..1.5),
                );
                let c = Vec2::new(
                    rng.gen_range(frame.min.x..frame.max.x),
                    rng.gen_range(frame.min.y..frame.max.y),
                );
                box_at(k, c, size)
            })
            .collect();
        match avoid_collision(ps, &region, &cfg) {
            Ok(out) => {
                resolved += 1;
                ensure!(out.len() == n, "case {case}: lost objects");
                let hits = xy_overlaps(&out);
                ensure!(hits == 0, "case {case}: {hits} overlapping pairs remain");
                for p in &out {
                    let r = p.rect();
                    let inside = r.min.x >= frame.min.x - 1e-9
                        && r.min.y >= frame.min.y - 1e-9
                        && r.max.x <= frame.max.x + 1e-9
                        && r.max.y <= frame.max.y + 1e-9;
                    ensure!(inside, "case {case}: {} escapes the region", p.object);
                }
            }
            Err(LayoutError::Unresolvable { .. }) => unresolvable += 1,
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok(format!(
        "100 layouts, {resolved} resolved, {unresolvable} reported unresolvable"
    ))
}

// ---------------------------------------------------------------- 4

fn column_rules() -> Outcome_ {
    let styles = ColumnStyles {
        door: "door".into(),
        long_window: "long".into(),
        short_window: "short".into(),
    };
    let mut grids = 0;
    for rows in 2..=6 {
        for cols in 2..=6 {
            let grid = ColumnGridSpec::new(rows, cols, 4.0);
            let plan = plan_column_openings(&grid, &[], &styles).map_err(|e| e.to_string())?;
            // Every gap between neighbouring columns on the outer ring.
            let mut perimeter = BTreeSet::new();
            for i in 0..rows {
                for j in 0..cols - 1 {
                    if i == 0 || i == rows - 1 {
                        perimeter.insert((GapAxis::Row, i, j));
                    }
                }
            }
            for i in 0..rows - 1 {
                for j in 0..cols {
                    if j == 0 || j == cols - 1 {
                        perimeter.insert((GapAxis::Column, i, j));
                    }
                }
            }
            let mut seen = BTreeMap::new();
            for s in &plan.slots {
                *seen.entry((s.gap.axis, s.gap.i, s.gap.j)).or_insert(0) += 1;
            }
            ensure!(
                seen.keys().copied().collect::<BTreeSet<_>>() == perimeter,
                "{rows}x{cols}: slots do not cover the perimeter exactly"
            );
            ensure!(seen.values().all(|&c| c == 1), "{rows}x{cols}: a gap is filled twice");
            let count = |f: GapFill| plan.slots.iter().filter(|s| s.fill == f).count();
            ensure!(
                count(GapFill::Door) == 2,
                "{rows}x{cols}: {} doors",
                count(GapFill::Door)
            );
            ensure!(
                count(GapFill::LongWindow) == 2,
                "{rows}x{cols}: {} long windows",
                count(GapFill::LongWindow)
            );
            ensure!(
                count(GapFill::ShortWindow) == perimeter.len() - 4,
                "{rows}x{cols}: short windows do not fill the rest"
            );
            for s in plan.slots.iter().filter(|s| s.fill == GapFill::Door) {
                ensure!(
                    s.gap.axis == GapAxis::Row,
                    "{rows}x{cols}: door off the first and last rows"
                );
            }
            for s in plan.slots.iter().filter(|s| s.fill == GapFill::LongWindow) {
                ensure!(
                    s.gap.axis == GapAxis::Column,
                    "{rows}x{cols}: long window off the side columns"
                );
            }
            grids += 1;
        }
    }
    Ok(format!("{grids} grids enumerated"))
}

// ---------------------------------------------------------------- 5

const VOCAB: [&str; 12] = [
    "oak",
    "walnut",
    "chair",
    "table",
    "lamp",
    "carved",
    "lacquer",
    "modern",
    "ming",
    "victorian",
    "brass",
    "silk",
];

fn words(rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..rng.gen_range(1..=4))
        .map(|_| VOCAB.choose(rng).unwrap().to_string())
        .collect()
}

fn retrieval_oracle() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let embedder = MockEmbedder::default();
    let cats = [
        AssetCategory::Object,
        AssetCategory::Door,
        AssetCategory::Window,
        AssetCategory::Material,
    ];
    let mut queries = 0;
    for case in 0..100 {
        let n = rng.gen_range(1..=200);
        let records: Vec<AssetRecord> = (0..n)
            .map(|k| {
                let category = *cats.choose(&mut rng).unwrap();
                let mut w = words(&mut rng);
                let label = w.remove(0);
                AssetRecord {
                    id: format!("a{:03}", rng.gen_range(0..1000) * 1000 + k),
                    category,
                    annotations: Annotations {
                        category_label: label,
                        tags: w,
                        ..Annotations::default()
                    },
                    native_size: (category != AssetCategory::Material).then(|| Vec3::new(1.0, 1.0, 1.0)),
                    mesh_path: None,
                    uv_scale: None,
                    mount: None,
                    embedding: None,
                }
            })
            .collect();
        let index = build_index(&records, &embedder, None).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let cat = *cats.choose(&mut rng).unwrap();
            let q = words(&mut rng).join(" ");
            let k = rng.gen_range(1..=10);
            let got = index.search(&embedder, &q, cat, k);
            let qv = embedder.embed(&q).map_err(|e| e.to_string())?;
            let mut brute: Vec<(String, f64)> = records
                .iter()
                .filter(|r| r.category == cat)
                .map(|r| {
                    let v = embedder.embed(&r.annotations.text()).unwrap();
                    let dot: f64 = v.iter().zip(&qv).map(|(a, b)| a * b).sum();
                    let norm = |x: &[f64]| x.iter().map(|c| c * c).sum::<f64>().sqrt();
                    let cos = dot / (norm(&v) * norm(&qv));
                    assert!((cos - dot).abs() < 1e-12, "mock vectors are unit length");
                    (r.id.clone(), dot)
                })
                .collect();
            brute.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            brute.truncate(k);
            match got {
                Ok(hits) => {
                    ensure!(!brute.is_empty(), "case {case}: hits from an empty category");
                    let ids: Vec<&str> = hits.iter().map(|h| h.0.as_str()).collect();
                    let want: Vec<&str> = brute.iter().map(|h| h.0.as_str()).collect();
                    ensure!(ids == want, "case {case}: `{q}` ranked {ids:?}, oracle {want:?}");
                    for (h, b) in hits.iter().zip(&brute) {
                        ensure!((h.1 - b.1).abs() < 1e-12, "case {case}: score drift");
                    }
                }
                Err(_) => ensure!(brute.is_empty(), "case {case}: search failed on a populated category"),
            }
            queries += 1;
        }
    }
    Ok(format!("100 catalogs, {queries} queries match the brute-force ranking"))
}

// ---------------------------------------------------------------- 6

fn contains(outer: &Aabb, inner: &Aabb, eps: f64) -> bool {
    inner.min.x >= outer.min.x - eps
        && inner.min.y >= outer.min.y - eps
        && inner.min.z >= outer.min.z - eps
        && inner.max.x <= outer.max.x + eps
        && inner.max.y <= outer.max.y + eps
        && inner.max.z <= outer.max.z + eps
}

fn geometry_soundness() -> Outcome_ {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut cut, mut refused) = (0, 0);
    for case in 0..100 {
        let n = rng.gen_range(1..=3);
        let ids = names(n);
        let rooms: Vec<RoomSpec> = ids
            .iter()
            .map(|id| {
                RoomSpec::new(
                    id,
                    rng.gen_range(30..=70) as f64 / 10.0,
                    rng.gen_range(30..=70) as f64 / 10.0,
                )
            })
            .collect();
        let relations = (1..n)
            .map(|k| {
                let d = if rng.gen_bool(0.5) {
                    Direction::East
                } else {
                    Direction::North
                };
                Relation::new(ids[k - 1].clone(), ids[k].clone(), d)
            })
            .collect();
        let plan = place_rooms(&rooms, &AdjacencySpec::new(relations)).map_err(|e| e.to_string())?;
        let thickness = rng.gen_range(0.1..0.3);
        let height = rng.gen_range(26..=40) as f64 / 10.0;
        let edges = parse_edge(&plan).map_err(|e| e.to_string())?;
        let mut walls = build_walls(&plan, &edges, thickness, height, 16).map_err(|e| e.to_string())?;
        for side in &walls.sides {
            let b = side.mesh().aabb();
            ensure!(
                b.min.z == 0.0 && b.max.z == height,
                "case {case}: {} spans z {}..{}, wanted 0..{height}",
                side.id,
                b.min.z,
                b.max.z
            );
        }
        let targets: Vec<String> = walls.sides.iter().map(|s| s.id.to_string()).collect();
        let mut placed = Vec::new();
        for t in targets {
            for _ in 0..rng.gen_range(0..=2) {
                let len = walls.side(&t.parse().unwrap()).unwrap().length;
                let door = rng.gen_bool(0.5);
                let w = rng.gen_range(0.6..1.4f64).min(len);
                let h = if door {
                    rng.gen_range(1.8..2.3)
                } else {
                    rng.gen_range(0.6..1.5)
                };
                let spec = OpeningSpec {
                    target: t.clone(),
                    kind: if door { OpeningKind::Door } else { OpeningKind::Window },
                    width: Some(w),
                    height: Some(h),
                    horizontal_offset: rng.gen_range(0.0..=(len - w)),
                    asset_query: String::new(),
                };
                match open_wall(&mut walls, &spec) {
                    Ok(o) => {
                        cut += 1;
                        placed.push(o);
                    }
                    Err(_) => refused += 1,
                }
            }
        }
        for side in &walls.sides {
            let open = side.mesh().boundary_edge_count();
            ensure!(open == 0, "case {case}: {} has {open} boundary edges", side.id);
        }
        for o in &placed {
            let side = walls.side(&o.target).unwrap();
            let native = Vec3::new(
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.05..0.3),
                rng.gen_range(0.5..2.5),
            );
            let e = fit_asset(o, side, "asset", Mesh::footprint_box(native), native).map_err(|e| e.to_string())?;
            let hole = o.hole_aabb(side);
            ensure!(
                contains(&hole, &e.world_aabb(), 1e-6),
                "case {case}: asset in {} leaves its hole",
                o.target
            );
        }
    }
    ensure!(cut >= 100, "only {cut} openings cut");
    Ok(format!(
        "100 plans, {cut} openings cut ({refused} refused), all meshes closed"
    ))
}

// ---------------------------------------------------------------- 7

fn expected_table(kind: StructureKind) -> BTreeMap<(AgentRole, Outcome), Next> {
    use AgentRole::*;
    let ok = |a, b| ((a, Outcome::Ok), Next::Role(b));
    let mut t = BTreeMap::from([
        ok(Manager, Allocation),
        ok(Allocation, Adjacency),
        ok(Material, DoorWindow),
        ok(DoorWindow, Object),
        ((Object, Outcome::Ok), Next::Done),
    ]);
    match kind {
        StructureKind::Wall => t.extend([
            ok(Adjacency, Check),
            ok(Check, Shape),
            ((Check, Outcome::Fail), Next::Role(Adjacency)),
            ok(Shape, Material),
        ]),
        StructureKind::Column => t.extend([ok(Adjacency, Material)]),
    }
    t
}

fn demo_run(name: &str, out: &Path) -> Result<RunReport, String> {
    let cfg = PipelineConfig {
        output_dir: out.to_path_buf(),
        ..PipelineConfig::default()
    };
    let mut backend = ScriptedBackend::from_json(demo::fixtures(name).unwrap()).map_err(|e| e.to_string())?;
    let text = demo::description(name).unwrap();
    generate_with(&cfg, Input::Description(text.into()), Some(&mut backend)).map_err(|e| e.to_string())
}

fn fsm_conformance() -> Outcome_ {
    let mut checked = 0;
    let states: Vec<Next> = AgentRole::ALL
        .iter()
        .map(|&r| Next::Role(r))
        .chain([Next::Done])
        .collect();
    for kind in [StructureKind::Wall, StructureKind::Column] {
        let table = expected_table(kind);
        let fsm = TurnFSM::new(kind);
        for role in AgentRole::ALL {
            for outcome in [Outcome::Ok, Outcome::Fail] {
                let got = fsm.successor(role, outcome);
                match table.get(&(role, outcome)) {
                    Some(&want) => ensure!(got == Ok(want), "{kind}: {role} {outcome:?} gave {got:?}"),
                    None => ensure!(
                        matches!(got, Err(FsmError::IllegalTransition { .. })),
                        "{kind}: {role} {outcome:?} should be illegal, gave {got:?}"
                    ),
                }
                checked += 1;
            }
        }
        // Every explicit request from every state, including the final one.
        for &from in &states {
            for &to in &states {
                for outcome in [Outcome::Ok, Outcome::Fail] {
                    let mut f = TurnFSM::new(kind);
                    f.current = from;
                    let legal = match from {
                        Next::Role(r) => table.get(&(r, outcome)) == Some(&to),
                        Next::Done => false,
                    };
                    let got = f.request(to, outcome);
                    if legal {
                        ensure!(got == Ok(to) && f.current == to, "{kind}: {from} -> {to} refused");
                    } else {
                        ensure!(
                            matches!(got, Err(FsmError::IllegalTransition { .. })) && f.current == from,
                            "{kind}: {from} -> {to} on {outcome:?} accepted"
                        );
                    }
                    checked += 1;
                }
            }
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let wall = demo_run("western_guestroom", &dir.path().join("w"))?;
    ensure!(wall.turns == 8, "wall run took {} turns", wall.turns);
    ensure!(wall.adjacency_attempts == 1, "wall run needed a re-plan");
    let column = demo_run("chinese_residence", &dir.path().join("c"))?;
    ensure!(column.turns == 6, "column run took {} turns", column.turns);
    Ok(format!("{checked} transitions, scripted runs took 8 and 6 turns"))
}

// ---------------------------------------------------------------- 8

fn determinism() -> Outcome_ {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut differing = Vec::new();
    for name in demo::DEMOS {
        let (a, b) = (
            dir.path().join(format!("{name}_a")),
            dir.path().join(format!("{name}_b")),
        );
        demo_run(name, &a)?;
        demo_run(name, &b)?;
        for f in ["scene.json", "scene.obj", "floorplan.svg"] {
            let x = std::fs::read(a.join(f)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.join(f)).map_err(|e| e.to_string())?;
            if x != y {
                differing.push(format!("{name}/{f}"));
            }
        }
    }
    let took = start.elapsed();
    ensure!(differing.is_empty(), "differing artifacts: {differing:?}");
    ensure!(took < Duration::from_secs(10), "four runs took {took:?}");
    Ok(format!(
        "both demos byte-identical across runs, {:.2} s total",
        took.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 9

fn export_validity() -> Outcome_ {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for name in demo::DEMOS {
        let out = dir.path().join(name);
        demo_run(name, &out)?;
        let json = std::fs::read(out.join("scene.json")).map_err(|e| e.to_string())?;
        let graph = import_json(&json)?;
        ensure!(export_json(&graph) == json, "{name}: scene.json is not a fixed point");

        let obj_text = std::fs::read_to_string(out.join("scene.obj")).map_err(|e| e.to_string())?;
        let expected: usize = graph.baked().iter().map(|(_, m)| m.vertices.len()).sum();
        let opts = tobj::LoadOptions {
            triangulate: false,
            single_index: false,
            ..Default::default()
        };
        let (models, mtl) = tobj::load_obj(out.join("scene.obj"), &opts).map_err(|e| e.to_string())?;
        let mtl = mtl.map_err(|e| format!("{name}: mtl: {e}"))?;
        let mut positions = 0;
        for m in &models {
            let nv = m.mesh.positions.len() / 3;
            ensure!(
                m.mesh.indices.iter().all(|&i| (i as usize) < nv),
                "{name}: bad index in {}",
                m.name
            );
            ensure!(
                m.mesh.material_id.is_some_and(|k| k < mtl.len()),
                "{name}: {} lacks a material",
                m.name
            );
            positions += nv;
        }
        let raw_v = obj_text.lines().filter(|l| l.starts_with("v ")).count();
        ensure!(
            positions == expected && raw_v == expected,
            "{name}: {positions}/{raw_v} vertices, expected {expected}"
        );
        for l in obj_text.lines().filter(|l| l.starts_with("f ")) {
            for t in l.split_whitespace().skip(1) {
                let i: usize = t.parse().map_err(|_| format!("{name}: bad face token {t}"))?;
                ensure!(i >= 1 && i <= raw_v, "{name}: face index {i} out of range");
            }
        }

        let svg = std::fs::read_to_string(out.join("floorplan.svg")).map_err(|e| e.to_string())?;
        let doc = roxmltree::Document::parse(&svg).map_err(|e| format!("{name}: {e}"))?;
        let root = doc.root_element();
        ensure!(
            root.tag_name().name() == "svg" && root.attribute("version") == Some("1.1"),
            "{name}: not SVG 1.1"
        );
        notes.push(format!("{name} {} groups/{expected} vertices", models.len()));
    }
    Ok(notes.join(", "))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 9] = [
        ("adjacency loop", Duration::from_secs(30), adjacency_loop),
        (
            "relative placement closed form",
            Duration::from_secs(1),
            relative_offsets,
        ),
        ("collision-free layouts", Duration::from_secs(30), collision_free),
        ("column opening rules", Duration::from_secs(5), column_rules),
        (
            "retrieval oracle equivalence",
            Duration::from_secs(10),
            retrieval_oracle,
        ),
        ("geometry soundness", Duration::from_secs(60), geometry_soundness),
        ("turn FSM conformance", Duration::from_secs(60), fsm_conformance),
        ("end-to-end determinism", Duration::from_secs(60), determinism),
        ("export validity", Duration::from_secs(60), export_validity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > budget => Err(format!("took {took:?}, budget {budget:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail} [{:.2} s]", k + 1, took.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{:.2} s]", k + 1, took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
