use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AssetLibrary, PipelineConfig, PipelineError, Stage, MAX_ROOMS};
use crate::agents::{partition_gaps, CellAssignment, RegionObjects, StructuredParams};
use crate::floorplan::{
    assemble_wall_structure, build_column_grid, build_walls, parse_edge, place_rooms, tessellate, unit_regions,
    ColumnGridSpec, FloorPolygon, FloorplanError, OpeningKind, PlacedFloorplan, WallSet,
};
use crate::geom::{Rect, Vec2};
use crate::layout::{
    front, layout_region, place_wall_object, wall_span, AnchorIssuer, FloorItem, ItemRequest, LayoutError, Placement,
    PlacementRegion, Slot,
};
use crate::materials::{apply_material, resolve_materials, MaterialError};
use crate::model::{AttributeId, AttributeRegistry, SceneElement, SceneGraph, StructureKind, Transform};
use crate::openings::{
    fit_asset, fit_gap_fill, open_wall, plan_column_openings, refresh_wall_meshes, GapFill, OpeningError,
};
use crate::retrieval::{AssetCategory, Mount};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomLabel {
    pub name: String,
    pub function: String,
    pub polygon: Vec<Vec2>,
}

/// An opening seen from above. `a` is the hinge-side jamb on the inner
/// face, `b` the other jamb, `inward` points into the room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawnOpening {
    pub id: String,
    pub kind: OpeningKind,
    pub a: Vec2,
    pub b: Vec2,
    pub inward: Vec2,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawnObject {
    pub id: String,
    pub label: String,
    pub rect: Rect,
    pub front: Vec2,
}

/// Everything the plan drawing needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDrawing {
    pub kind: StructureKind,
    pub rooms: Vec<RoomLabel>,
    pub walls: Option<WallSet>,
    pub grid: Option<ColumnGridSpec>,
    pub openings: Vec<DrawnOpening>,
    pub objects: Vec<DrawnObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSummary {
    pub region: String,
    pub placed: usize,
    pub dropped: Vec<String>,
    pub clamped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltScene {
    pub graph: SceneGraph,
    pub drawing: PlanDrawing,
    /// Stages in the order they completed.
    pub stages: Vec<Stage>,
    pub layout: Vec<LayoutSummary>,
}

fn missing(what: &str) -> PipelineError {
    PipelineError::Params(format!("section `{what}` is missing"))
}

/// Wall-scene geometry kept between stages.
struct WallPlan {
    plan: PlacedFloorplan,
    floors: Vec<FloorPolygon>,
    walls: WallSet,
}

enum Structure {
    Wall(WallPlan),
    Column(ColumnGridSpec),
}

struct Builder<'a> {
    params: &'a StructuredParams,
    cfg: &'a PipelineConfig,
    lib: &'a mut AssetLibrary,
    registry: AttributeRegistry,
    graph: SceneGraph,
    structure: Structure,
    drawing: PlanDrawing,
    stages: Vec<Stage>,
    layout: Vec<LayoutSummary>,
}

/// Run floorplan, materials, openings and layout on complete parameters.
pub fn build_scene(
    params: &StructuredParams,
    lib: &mut AssetLibrary,
    cfg: &PipelineConfig,
) -> Result<BuiltScene, PipelineError> {
    let gaps = params.missing();
    if let Some(first) = gaps.first() {
        return Err(missing(first));
    }
    if params.rooms.len() > MAX_ROOMS {
        return Err(PipelineError::stage(
            Stage::Floorplan,
            "rooms",
            format!("{} rooms exceed the limit of {MAX_ROOMS}", params.rooms.len()),
        ));
    }
    let mut b = floorplan(params, lib, cfg)?;
    b.stages.push(Stage::Floorplan);
    b.materials()?;
    b.stages.push(Stage::Materials);
    b.openings()?;
    b.stages.push(Stage::Openings);
    b.objects()?;
    b.stages.push(Stage::Layout);
    b.graph.refresh_bounds();
    b.graph
        .validate()
        .map_err(|e| PipelineError::stage(Stage::Layout, "objects", e))?;
    Ok(BuiltScene {
        graph: b.graph,
        drawing: b.drawing,
        stages: b.stages,
        layout: b.layout,
    })
}

fn function_of(params: &StructuredParams, room: &str) -> String {
    params
        .rooms
        .iter()
        .find(|r| r.name == room)
        .map(|r| r.function.clone())
        .unwrap_or_default()
}

fn floorplan_path(params: &StructuredParams, e: &FloorplanError) -> String {
    use FloorplanError::*;
    let room = match e {
        BadRoomName(r) | DuplicateRoom(r) => Some(r),
        RoomSizeOutOfRange { room, .. }
        | ArcOnInternalEdge { room, .. }
        | InvalidArc { room, .. }
        | ArcEdgeIndex { room, .. }
        | ArcCollision { room, .. } => Some(room),
        UnknownRoom(_) | SelfRelation(_) | UnplaceableRoom { .. } | DisconnectedGraph(_) | MissingRoom1 => {
            return "adjacency".into()
        }
        ThicknessOutOfRange(_) | HeightOutOfRange(_) => return "structure".into(),
        _ => None,
    };
    let shapes = params.shapes.as_deref().unwrap_or_default();
    match room.and_then(|r| shapes.iter().position(|s| &s.name == r)) {
        Some(i) => format!("shapes[{i}]"),
        None => "shapes".into(),
    }
}

fn floorplan<'a>(
    params: &'a StructuredParams,
    lib: &'a mut AssetLibrary,
    cfg: &'a PipelineConfig,
) -> Result<Builder<'a>, PipelineError> {
    let s = &cfg.structure;
    let mut registry = AttributeRegistry::new();
    let fail = |e: FloorplanError| PipelineError::stage(Stage::Floorplan, floorplan_path(params, &e), e);
    let (elements, structure, rooms) = match params.structure_kind {
        StructureKind::Wall => {
            let shapes = params.shapes.as_ref().ok_or_else(|| missing("shapes"))?;
            let adj = params.adjacency.clone().unwrap_or_default();
            let plan = place_rooms(shapes, &adj).map_err(fail)?;
            let edges = parse_edge(&plan).map_err(fail)?;
            let floors = tessellate(&edges, s.arc_segments).map_err(fail)?;
            let walls = build_walls(&plan, &edges, s.wall_thickness, s.wall_height, s.arc_segments).map_err(fail)?;
            let elements = assemble_wall_structure(&floors, &walls, &mut registry).map_err(fail)?;
            let rooms = floors
                .iter()
                .map(|f| RoomLabel {
                    name: f.room.clone(),
                    function: function_of(params, &f.room),
                    polygon: f.polygon.clone(),
                })
                .collect();
            (elements, Structure::Wall(WallPlan { plan, floors, walls }), rooms)
        }
        StructureKind::Column => {
            let size = params.grid.as_ref().ok_or_else(|| missing("grid"))?;
            let grid = s.grid(size);
            let elements = build_column_grid(&grid, &mut registry)
                .map_err(|e| PipelineError::stage(Stage::Floorplan, "grid", e))?;
            let cells = params.cells.as_deref().unwrap_or_default();
            let rooms = cells
                .iter()
                .map(|c| RoomLabel {
                    name: c.room.clone(),
                    function: function_of(params, &c.room),
                    polygon: cells_rect(&grid, c).corners().to_vec(),
                })
                .collect();
            (elements, Structure::Column(grid), rooms)
        }
    };
    let drawing = PlanDrawing {
        kind: params.structure_kind,
        rooms,
        walls: None,
        grid: match &structure {
            Structure::Column(g) => Some(g.clone()),
            Structure::Wall(_) => None,
        },
        openings: Vec::new(),
        objects: Vec::new(),
    };
    Ok(Builder {
        params,
        cfg,
        lib,
        registry,
        graph: SceneGraph::new(params.structure_kind, elements),
        structure,
        drawing,
        stages: Vec::new(),
        layout: Vec::new(),
    })
}

/// Rectangle covered by a room's cells.
fn cells_rect(grid: &ColumnGridSpec, c: &CellAssignment) -> Rect {
    let units = unit_regions(grid);
    let per_row = grid.cols - 1;
    c.cells
        .iter()
        .filter_map(|&[i, j]| units.get(i * per_row + j).filter(|_| j < per_row))
        .map(|u| u.rect)
        .reduce(|a, b| {
            Rect::new(
                Vec2::new(a.min.x.min(b.min.x), a.min.y.min(b.min.y)),
                Vec2::new(a.max.x.max(b.max.x), a.max.y.max(b.max.y)),
            )
        })
        .unwrap_or(Rect::new(Vec2::default(), Vec2::default()))
}

fn material_path(params: &StructuredParams, e: &MaterialError) -> String {
    let entries = params.materials.as_deref().unwrap_or_default();
    let (raw, field) = match e {
        MaterialError::AmbiguousPattern { second, .. } => (second, "target"),
        MaterialError::UnknownAttribute(r) | MaterialError::BadPattern(r) => (r, "target"),
        MaterialError::EmptyQuery(r) => (r, "query"),
        _ => return "materials".into(),
    };
    match entries.iter().position(|m| &m.target == raw) {
        Some(i) => format!("materials[{i}].{field}"),
        None => "materials".into(),
    }
}

fn opening_path(i: usize, e: &OpeningError) -> String {
    match e {
        OpeningError::NotAWall(_) | OpeningError::UnknownWall(_) | OpeningError::OpeningOnArc(_) => {
            format!("openings[{i}].target")
        }
        OpeningError::OverlapWithExistingOpening(_) | OpeningError::StraddlesJunction(_) => {
            format!("openings[{i}].horizontal_offset")
        }
        OpeningError::DegenerateAsset(_) => format!("openings[{i}].asset_query"),
        _ => format!("openings[{i}]"),
    }
}

/// Item of an object request with where it came from.
struct Requested {
    path: String,
    item: FloorItem,
}

fn kind_name(kind: OpeningKind) -> &'static str {
    match kind {
        OpeningKind::Door => "door",
        OpeningKind::Window => "window",
    }
}

impl Builder<'_> {
    fn materials(&mut self) -> Result<(), PipelineError> {
        let entries = self.params.materials.as_deref().unwrap_or_default();
        let fail = |e: MaterialError| PipelineError::stage(Stage::Materials, material_path(self.params, &e), e);
        let assign =
            resolve_materials(entries, &self.lib.catalog, &self.lib.index, self.lib.embedder.as_ref()).map_err(fail)?;
        let graph = std::mem::replace(&mut self.graph, SceneGraph::new(self.params.structure_kind, Vec::new()));
        self.graph = apply_material(graph, &assign).map_err(fail)?;
        Ok(())
    }

    fn asset(
        &mut self,
        stage: Stage,
        path: &str,
        category: AssetCategory,
        query: &str,
        mount: Option<Mount>,
    ) -> Result<(String, crate::model::Mesh, crate::geom::Vec3), PipelineError> {
        let fail = |e: crate::retrieval::RetrievalError| PipelineError::stage(stage, path, e);
        let rec = self.lib.best(category, query, mount).map_err(fail)?.clone();
        let (mesh, size) = self.lib.mesh(&rec).map_err(fail)?;
        Ok((rec.id, mesh, size))
    }

    fn register(&mut self, stage: Stage, path: &str, id: &str) -> Result<(), PipelineError> {
        self.registry
            .register_instance(id)
            .map_err(|e| PipelineError::stage(stage, path, e))
    }

    fn attach(&mut self, container: Option<&str>, e: SceneElement) {
        match container.and_then(|c| self.graph.find_mut(c)) {
            Some(parent) => parent.children.push(e),
            None => self.graph.elements.push(e),
        }
    }

    fn openings(&mut self) -> Result<(), PipelineError> {
        match &self.structure {
            Structure::Wall(_) => self.wall_openings(),
            Structure::Column(grid) => {
                let grid = grid.clone();
                self.column_openings(&grid)
            }
        }
    }

    fn wall_openings(&mut self) -> Result<(), PipelineError> {
        let Structure::Wall(wp) = &mut self.structure else {
            unreachable!()
        };
        let mut walls = wp.walls.clone();
        let specs = self.params.openings.clone().unwrap_or_default();
        let [dw, dh] = self.cfg.structure.door_size;
        let [ww, wh] = self.cfg.structure.window_size;
        let mut counters: BTreeMap<(String, &str), usize> = BTreeMap::new();
        for (i, spec) in specs.iter().enumerate() {
            let mut spec = spec.clone();
            let (w, h) = match spec.kind {
                OpeningKind::Door => (dw, dh),
                OpeningKind::Window => (ww, wh),
            };
            spec.width.get_or_insert(w);
            spec.height.get_or_insert(h);
            let fail = |e: OpeningError| PipelineError::stage(Stage::Openings, opening_path(i, &e), e);
            let placed = open_wall(&mut walls, &spec).map_err(fail)?;
            let category = match spec.kind {
                OpeningKind::Door => AssetCategory::Door,
                OpeningKind::Window => AssetCategory::Window,
            };
            let path = format!("openings[{i}].asset_query");
            let (asset, mesh, native) = self.asset(Stage::Openings, &path, category, &spec.asset_query, None)?;
            let side = walls.side(&placed.target).expect("opened side exists");
            let mut e = fit_asset(&placed, side, &asset, mesh, native).map_err(fail)?;
            let target = placed.target.to_string();
            let n = counters.entry((target.clone(), kind_name(spec.kind))).or_insert(0);
            *n += 1;
            e.attribute_id = format!("{target}.{}{n}", kind_name(spec.kind));
            let (v0, v1) = placed.v_range(side);
            let h = &placed.hole;
            self.drawing.openings.push(DrawnOpening {
                id: e.attribute_id.clone(),
                kind: spec.kind,
                a: side.world(h.u0, v0, 0.0).xy(),
                b: side.world(h.u1, v0, 0.0).xy(),
                inward: side.normal * -1.0,
                depth: v1 - v0,
            });
            let room = placed.target.room().map(|n| AttributeId::Room(n).to_string());
            let id = e.attribute_id.clone();
            self.register(Stage::Openings, &format!("openings[{i}]"), &id)?;
            self.attach(room.as_deref(), e);
        }
        refresh_wall_meshes(&mut self.graph, &walls);
        if let Structure::Wall(wp) = &mut self.structure {
            wp.walls = walls.clone();
        }
        self.drawing.walls = Some(walls);
        Ok(())
    }

    fn column_openings(&mut self, grid: &ColumnGridSpec) -> Result<(), PipelineError> {
        let styles = self
            .params
            .column_styles
            .clone()
            .ok_or_else(|| missing("column_styles"))?;
        let cells = self.params.cells.as_deref().unwrap_or_default();
        let partitions = partition_gaps(cells);
        let plan = plan_column_openings(grid, &partitions, &styles)
            .map_err(|e| PipelineError::stage(Stage::Openings, "cells", e))?;
        let mut counters: BTreeMap<(String, &str), usize> = BTreeMap::new();
        for slot in &plan.slots {
            let kind = if slot.fill == GapFill::Door {
                OpeningKind::Door
            } else {
                OpeningKind::Window
            };
            let field = match slot.fill {
                GapFill::Door => "door",
                GapFill::LongWindow => "long_window",
                _ => "short_window",
            };
            let path = format!("column_styles.{field}");
            let (asset, mesh, native) =
                self.asset(Stage::Openings, &path, slot.fill.category(), &slot.asset_query, None)?;
            let mut e = fit_gap_fill(grid, slot, &asset, mesh, native)
                .map_err(|e| PipelineError::stage(Stage::Openings, path.as_str(), e))?;
            let ((i, j), _) = slot.gap.columns();
            let owner = AttributeId::Column {
                row: i as u32,
                col: j as u32,
            }
            .to_string();
            let n = counters.entry((owner.clone(), kind_name(kind))).or_insert(0);
            *n += 1;
            e.attribute_id = format!("{owner}.{}{n}", kind_name(kind));
            let (a, b) = slot.gap.clear_span(grid);
            let inward = slot.gap.outward(grid) * -1.0;
            let half = grid.beam_section.width / 2.0;
            self.drawing.openings.push(DrawnOpening {
                id: e.attribute_id.clone(),
                kind,
                a: a + inward * half,
                b: b + inward * half,
                inward,
                depth: grid.beam_section.width,
            });
            let id = e.attribute_id.clone();
            self.register(Stage::Openings, &path, &id)?;
            self.attach(None, e);
        }
        Ok(())
    }

    fn requested(&mut self, ri: usize, r: &RegionObjects) -> Result<Vec<Requested>, PipelineError> {
        let mut out = Vec::new();
        for (k, s) in r.stable.iter().enumerate() {
            let path = format!("objects[{ri}].stable[{k}]");
            let (id, _, size) = self.asset(
                Stage::Layout,
                &path,
                AssetCategory::Object,
                &s.query,
                Some(Mount::Floor),
            )?;
            out.push(Requested {
                path,
                item: FloorItem {
                    object: id,
                    size,
                    request: ItemRequest::Stable {
                        slot: s.slot,
                        index: s.index,
                    },
                },
            });
        }
        for (k, t) in r.relative.iter().enumerate() {
            let path = format!("objects[{ri}].relative[{k}]");
            let (id, _, size) = self.asset(
                Stage::Layout,
                &path,
                AssetCategory::Object,
                &t.object_query,
                Some(Mount::Floor),
            )?;
            out.push(Requested {
                path,
                item: FloorItem {
                    object: id,
                    size,
                    request: ItemRequest::Relative(t.clone()),
                },
            });
        }
        Ok(out)
    }

    fn objects(&mut self) -> Result<(), PipelineError> {
        let regions = self.params.objects.clone().unwrap_or_default();
        for (ri, r) in regions.iter().enumerate() {
            let requested = self.requested(ri, r)?;
            let placed = match &self.structure {
                Structure::Wall(_) => self.room_layout(ri, r, &requested)?,
                Structure::Column(grid) => {
                    let grid = grid.clone();
                    self.cell_layout(ri, r, &requested, &grid)?
                }
            };
            let container = match self.params.structure_kind {
                StructureKind::Wall => Some(r.region.clone()),
                StructureKind::Column => None,
            };
            for (n, p) in placed.iter().enumerate() {
                let rec = self
                    .lib
                    .catalog
                    .get(&p.object)
                    .cloned()
                    .expect("placed objects come from the catalog");
                let path = format!("objects[{ri}]");
                let (mesh, _) = self
                    .lib
                    .mesh(&rec)
                    .map_err(|e| PipelineError::stage(Stage::Layout, path.as_str(), e))?;
                let mut e = SceneElement::instance(&r.region, "obj", n + 1, mesh);
                e.transform = Transform::new(p.position, p.yaw, p.scale);
                e.material_ref = Some(p.object.clone());
                self.drawing.objects.push(DrawnObject {
                    id: e.attribute_id.clone(),
                    label: p.object.clone(),
                    rect: p.rect(),
                    front: front(p),
                });
                let id = e.attribute_id.clone();
                self.register(Stage::Layout, &path, &id)?;
                self.attach(container.as_deref(), e);
            }
        }
        Ok(())
    }

    fn layout_fail(ri: usize, requested: &[Requested], e: LayoutError) -> PipelineError {
        let by_object = |o: &str| requested.iter().find(|q| q.item.object == o).map(|q| q.path.clone());
        let path = match &e {
            LayoutError::ObjectLargerThanRegion { object, .. }
            | LayoutError::ResultOutsideRegion { object, .. }
            | LayoutError::Unresolvable { object, .. } => by_object(object),
            LayoutError::UnknownAnchor(a) => requested
                .iter()
                .find(|q| matches!(&q.item.request, ItemRequest::Relative(t) if &t.anchor == a))
                .map(|q| format!("{}.anchor", q.path)),
            LayoutError::BadSlotIndex { .. } => Some(format!("objects[{ri}].stable")),
            _ => None,
        };
        PipelineError::stage(Stage::Layout, path.unwrap_or_else(|| format!("objects[{ri}]")), e)
    }

    fn room_layout(
        &mut self,
        ri: usize,
        r: &RegionObjects,
        requested: &[Requested],
    ) -> Result<Vec<Placement>, PipelineError> {
        let Structure::Wall(wp) = &self.structure else {
            unreachable!()
        };
        let region_path = format!("objects[{ri}].region");
        let unknown = || {
            PipelineError::stage(
                Stage::Layout,
                region_path.as_str(),
                LayoutError::UnknownRegion(r.region.clone()),
            )
        };
        let room = wp.plan.room(&r.region).ok_or_else(unknown)?;
        let floor = wp.floors.iter().find(|f| f.room == r.region).ok_or_else(unknown)?;
        let region = PlacementRegion::room(room, floor, &wp.walls);
        let items: Vec<FloorItem> = requested.iter().map(|q| q.item.clone()).collect();
        let mut issuer = AnchorIssuer::default();
        let lay = layout_region(&region, &items, &mut issuer, &self.cfg.placement)
            .map_err(|e| Self::layout_fail(ri, requested, e))?;
        let mut placed = lay.placements;
        self.layout.push(LayoutSummary {
            region: r.region.clone(),
            placed: placed.len(),
            dropped: lay.dropped,
            clamped: lay.clamped,
        });

        let mut taken: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for (k, w) in r.wall.iter().enumerate() {
            let path = format!("objects[{ri}].wall[{k}]");
            let (asset, _, size) =
                self.asset(Stage::Layout, &path, AssetCategory::Object, &w.query, Some(Mount::Wall))?;
            let Structure::Wall(wp) = &self.structure else {
                unreachable!()
            };
            let side = w
                .wall
                .parse::<AttributeId>()
                .ok()
                .and_then(|id| wp.walls.side(&id))
                .filter(|s| s.room == r.region)
                .ok_or_else(|| {
                    PipelineError::stage(
                        Stage::Layout,
                        format!("{path}.wall"),
                        format!("`{}` is not a straight wall of `{}`", w.wall, r.region),
                    )
                })?;
            let spans = taken.entry(w.wall.clone()).or_default();
            let p = place_wall_object(side, &asset, size, spans, &self.cfg.placement)
                .map_err(|e| PipelineError::stage(Stage::Layout, path.as_str(), e))?;
            spans.push(wall_span(side, &p));
            placed.push(p);
        }
        if let Some(s) = self.layout.last_mut() {
            s.placed = placed.len();
        }
        Ok(placed)
    }

    fn cell_layout(
        &mut self,
        ri: usize,
        r: &RegionObjects,
        requested: &[Requested],
        grid: &ColumnGridSpec,
    ) -> Result<Vec<Placement>, PipelineError> {
        if !r.wall.is_empty() {
            return Err(PipelineError::stage(
                Stage::Layout,
                format!("objects[{ri}].wall"),
                LayoutError::WallObjectInColumnScene,
            ));
        }
        let region_path = format!("objects[{ri}].region");
        let assignment = self
            .params
            .cells
            .as_deref()
            .unwrap_or_default()
            .iter()
            .find(|c| c.room == r.region)
            .ok_or_else(|| {
                PipelineError::stage(
                    Stage::Layout,
                    region_path.as_str(),
                    LayoutError::UnknownRegion(r.region.clone()),
                )
            })?;
        let mut cells = assignment.cells.clone();
        cells.sort();
        cells.dedup();
        let units = unit_regions(grid);
        let per_row = grid.cols - 1;
        let regions: Vec<PlacementRegion> = cells
            .iter()
            .map(|&[i, j]| PlacementRegion::unit(&units[i * per_row + j], grid).with_anchor_prefix(&r.region))
            .collect();

        // Stable items in contiguous chunks, one per unit in row-major order.
        let stable: Vec<&Requested> = requested
            .iter()
            .filter(|q| matches!(q.item.request, ItemRequest::Stable { .. }))
            .collect();
        let (base, extra) = (stable.len() / regions.len(), stable.len() % regions.len());
        let mut per_unit: Vec<Vec<&Requested>> = vec![Vec::new(); regions.len()];
        let mut anchor_unit: BTreeMap<String, usize> = BTreeMap::new();
        let mut next_anchor = 0;
        let mut it = stable.into_iter();
        for (u, bucket) in per_unit.iter_mut().enumerate() {
            for q in it.by_ref().take(base + usize::from(u < extra)) {
                if let ItemRequest::Stable {
                    slot: Slot::Edge | Slot::Center,
                    ..
                } = q.item.request
                {
                    next_anchor += 1;
                    anchor_unit.insert(format!("{}_a{next_anchor}", r.region), u);
                }
                bucket.push(q);
            }
        }
        for q in requested {
            if let ItemRequest::Relative(t) = &q.item.request {
                let u = *anchor_unit.get(&t.anchor).ok_or_else(|| {
                    PipelineError::stage(
                        Stage::Layout,
                        format!("{}.anchor", q.path),
                        LayoutError::UnknownAnchor(t.anchor.clone()),
                    )
                })?;
                per_unit[u].push(q);
            }
        }

        let mut issuer = AnchorIssuer::default();
        let mut placed = Vec::new();
        let mut summary = LayoutSummary {
            region: r.region.clone(),
            placed: 0,
            dropped: Vec::new(),
            clamped: Vec::new(),
        };
        for (region, bucket) in regions.iter().zip(&per_unit) {
            let items: Vec<FloorItem> = bucket.iter().map(|q| q.item.clone()).collect();
            let lay = layout_region(region, &items, &mut issuer, &self.cfg.placement)
                .map_err(|e| Self::layout_fail(ri, requested, e))?;
            placed.extend(lay.placements);
            summary.dropped.extend(lay.dropped);
            summary.clamped.extend(lay.clamped);
        }
        summary.placed = placed.len();
        self.layout.push(summary);
        Ok(placed)
    }
}
