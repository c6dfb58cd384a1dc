use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::PlanDrawing;
use crate::floorplan::{column_center, OpeningKind, WallSet};
use crate::geom::{bounding_rect, centroid, Rect, Vec2};
use crate::model::StructureKind;

/// Drawing units per metre. The SVG user unit is one millimetre on paper,
/// so 20 units per metre is a 1:50 drawing.
pub const MM_PER_M: f64 = 20.0;
/// Coordinates are snapped to micrometres before the union is traced.
const QUANTUM: f64 = 1e6;

fn q(v: f64) -> i64 {
    (v * QUANTUM).round() as i64
}

/// Plan rectangles of every straight wall piece, with the openings cut out.
fn wall_rects(walls: &WallSet) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for side in &walls.sides {
        for piece in &side.pieces {
            let (ua, ub) = piece.span();
            let mut cuts: Vec<(f64, f64)> = side
                .holes
                .iter()
                .filter(|h| h.u1 > ua && h.u0 < ub)
                .map(|h| (h.u0.max(ua), h.u1.min(ub)))
                .collect();
            cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut intervals = Vec::new();
            let mut cursor = ua;
            for (a, b) in cuts {
                if a > cursor {
                    intervals.push((cursor, a));
                }
                cursor = cursor.max(b);
            }
            if ub > cursor {
                intervals.push((cursor, ub));
            }
            for (u0, u1) in intervals {
                let r = bounding_rect(&[side.world(u0, piece.v0, 0.0).xy(), side.world(u1, piece.v1, 0.0).xy()]);
                let rect = [q(r.min.x), q(r.min.y), q(r.max.x), q(r.max.y)];
                if rect[0] < rect[2] && rect[1] < rect[3] {
                    out.push(rect);
                }
            }
        }
    }
    out
}

/// Closed outlines of the union of axis-aligned rectangles, interior on the
/// left. Outer boundaries run counter-clockwise, holes clockwise.
fn union_outlines(rects: &[[i64; 4]]) -> Vec<Vec<(i64, i64)>> {
    let xs: Vec<i64> = rects
        .iter()
        .flat_map(|r| [r[0], r[2]])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ys: Vec<i64> = rects
        .iter()
        .flat_map(|r| [r[1], r[3]])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if xs.len() < 2 || ys.len() < 2 {
        return Vec::new();
    }
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let mut covered = vec![false; nx * ny];
    for r in rects {
        let (i0, i1) = (xs.binary_search(&r[0]).unwrap(), xs.binary_search(&r[2]).unwrap());
        let (j0, j1) = (ys.binary_search(&r[1]).unwrap(), ys.binary_search(&r[3]).unwrap());
        for i in i0..i1 {
            for j in j0..j1 {
                covered[i * ny + j] = true;
            }
        }
    }
    let cell = |i: isize, j: isize| {
        i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && covered[i as usize * ny + j as usize]
    };
    // Unit boundary edges keyed by start point.
    let mut edges: BTreeMap<(i64, i64), Vec<(i64, i64)>> = BTreeMap::new();
    for i in 0..=nx as isize {
        for j in 0..ny as isize {
            let (l, r) = (cell(i - 1, j), cell(i, j));
            let (x, y0, y1) = (xs[i as usize], ys[j as usize], ys[j as usize + 1]);
            if l && !r {
                edges.entry((x, y0)).or_default().push((x, y1));
            } else if r && !l {
                edges.entry((x, y1)).or_default().push((x, y0));
            }
        }
    }
    for j in 0..=ny as isize {
        for i in 0..nx as isize {
            let (below, above) = (cell(i, j - 1), cell(i, j));
            let (y, x0, x1) = (ys[j as usize], xs[i as usize], xs[i as usize + 1]);
            if below && !above {
                edges.entry((x1, y)).or_default().push((x0, y));
            } else if above && !below {
                edges.entry((x0, y)).or_default().push((x1, y));
            }
        }
    }
    let mut loops = Vec::new();
    while let Some((&start, _)) = edges.iter().find(|(_, v)| !v.is_empty()) {
        let mut pts = vec![start];
        let mut at = start;
        loop {
            let next = {
                let outs = edges.get_mut(&at).expect("boundary is closed");
                outs.remove(0)
            };
            if next == start {
                break;
            }
            pts.push(next);
            at = next;
        }
        edges.retain(|_, v| !v.is_empty());
        loops.push(merge_collinear(pts));
    }
    loops
}

fn merge_collinear(pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    let n = pts.len();
    (0..n)
        .filter(|&k| {
            let (a, b, c) = (pts[(k + n - 1) % n], pts[k], pts[(k + 1) % n]);
            (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0) != 0
        })
        .map(|k| pts[k])
        .collect()
}

/// Outlines of the straight walls seen from above: one loop per closed
/// wall line, openings showing as breaks.
pub fn wall_outlines(walls: &WallSet) -> Vec<Vec<Vec2>> {
    union_outlines(&wall_rects(walls))
        .into_iter()
        .map(|l| {
            l.into_iter()
                .map(|(x, y)| Vec2::new(x as f64 / QUANTUM, y as f64 / QUANTUM))
                .collect()
        })
        .collect()
}

struct Canvas {
    origin: Vec2,
    top: f64,
    out: String,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

impl Canvas {
    fn x(&self, v: f64) -> f64 {
        (v - self.origin.x) * MM_PER_M
    }

    fn y(&self, v: f64) -> f64 {
        (self.top - v) * MM_PER_M
    }

    fn pt(&self, p: Vec2) -> String {
        format!("{:.2} {:.2}", self.x(p.x), self.y(p.y))
    }

    fn line(&mut self, a: Vec2, b: Vec2, class: &str) {
        let (x1, y1, x2, y2) = (self.x(a.x), self.y(a.y), self.x(b.x), self.y(b.y));
        let _ = writeln!(
            self.out,
            r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
        );
    }

    fn polygon_path(&self, loops: &[Vec<Vec2>]) -> String {
        let mut d = String::new();
        for l in loops.iter().filter(|l| l.len() >= 3) {
            let _ = write!(d, "M {} ", self.pt(l[0]));
            for p in &l[1..] {
                let _ = write!(d, "L {} ", self.pt(*p));
            }
            d.push_str("Z ");
        }
        d.trim_end().to_string()
    }

    fn rect(&mut self, r: &Rect, class: &str) {
        let _ = writeln!(
            self.out,
            r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
            self.x(r.min.x),
            self.y(r.max.y),
            r.width() * MM_PER_M,
            r.height() * MM_PER_M
        );
    }

    fn text(&mut self, p: Vec2, class: &str, s: &str) {
        let _ = writeln!(
            self.out,
            r#"<text class="{class}" x="{:.2}" y="{:.2}">{}</text>"#,
            self.x(p.x),
            self.y(p.y),
            esc(s)
        );
    }
}

fn extent(d: &PlanDrawing) -> Rect {
    let mut pts: Vec<Vec2> = d.rooms.iter().flat_map(|r| r.polygon.iter().copied()).collect();
    if let Some(w) = &d.walls {
        for s in &w.sides {
            let f = s.footprint();
            pts.extend([f.min, f.max]);
        }
        for a in &w.arcs {
            pts.extend(a.outer());
        }
    }
    if let Some(g) = &d.grid {
        let e = g.extent();
        let m = Vec2::new(g.margin, g.margin);
        pts.extend([e.min - m, e.max + m]);
    }
    for o in &d.objects {
        pts.extend([o.rect.min, o.rect.max]);
    }
    if pts.is_empty() {
        pts.push(Vec2::default());
    }
    let b = bounding_rect(&pts);
    Rect::new(
        Vec2::new((b.min.x - 1.0).floor(), (b.min.y - 1.0).floor()),
        Vec2::new((b.max.x + 1.0).ceil(), (b.max.y + 1.0).ceil()),
    )
}

const STYLE: &str = "\
.grid{stroke:#d8d8d8;stroke-width:0.15}\n\
.wall{fill:#c8c8c8;stroke:#000;stroke-width:0.35;fill-rule:evenodd}\n\
.room{fill:none;stroke:#888;stroke-width:0.2;stroke-dasharray:1.5 1}\n\
.door{stroke:#000;stroke-width:0.25;fill:none}\n\
.swing{stroke:#000;stroke-width:0.15;fill:none;stroke-dasharray:0.8 0.6}\n\
.glass{stroke:#1565c0;stroke-width:0.2}\n\
.sill{stroke:#000;stroke-width:0.15}\n\
.object{fill:#fff7e0;stroke:#8d6e63;stroke-width:0.2}\n\
.front{stroke:#8d6e63;stroke-width:0.2}\n\
.column{fill:#6d4c41;stroke:#000;stroke-width:0.2}\n\
.beam{fill:none;stroke:#6d4c41;stroke-width:0.2;stroke-dasharray:2 1}\n\
.ground{fill:none;stroke:#aaa;stroke-width:0.2}\n\
.label{font-family:sans-serif;font-size:3px;text-anchor:middle}\n\
.small{font-family:sans-serif;font-size:1.8px;text-anchor:middle}\n\
.caption{font-family:sans-serif;font-size:3px}\n";

/// Top-down construction drawing at 1:50.
pub fn export_svg(d: &PlanDrawing) -> Vec<u8> {
    let b = extent(d);
    let (w, h) = (b.width() * MM_PER_M, (b.height() + 1.0) * MM_PER_M);
    let mut c = Canvas {
        origin: b.min,
        top: b.max.y + 1.0,
        out: String::new(),
    };
    let _ = writeln!(c.out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}mm" height="{h:.0}mm" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(c.out, "<title>Floor plan ({} structure), scale 1:50</title>", d.kind);
    let _ = writeln!(c.out, "<style>\n{STYLE}</style>");

    c.out.push_str("<g id=\"grid\">\n");
    let (x0, x1, y0, y1) = (b.min.x as i64, b.max.x as i64, b.min.y as i64, b.max.y as i64);
    for x in x0..=x1 {
        c.line(Vec2::new(x as f64, b.min.y), Vec2::new(x as f64, b.max.y), "grid");
    }
    for y in y0..=y1 {
        c.line(Vec2::new(b.min.x, y as f64), Vec2::new(b.max.x, y as f64), "grid");
    }
    c.out.push_str("</g>\n");

    match d.kind {
        StructureKind::Wall => draw_walls(&mut c, d),
        StructureKind::Column => draw_columns(&mut c, d),
    }

    c.out.push_str("<g id=\"openings\">\n");
    for o in &d.openings {
        let along = o.b - o.a;
        let width = along.length();
        let _ = writeln!(c.out, "<g id=\"{}\">", esc(&o.id));
        match o.kind {
            OpeningKind::Door => {
                let leaf = o.a + o.inward * width;
                c.line(o.a, leaf, "door");
                let sweep = if o.inward.cross(along) > 0.0 { 0 } else { 1 };
                let r = width * MM_PER_M;
                let _ = writeln!(
                    c.out,
                    r#"<path class="swing" d="M {} A {r:.2} {r:.2} 0 0 {sweep} {}"/>"#,
                    c.pt(leaf),
                    c.pt(o.b)
                );
            }
            OpeningKind::Window => {
                let out = o.inward * -1.0;
                c.line(o.a, o.b, "sill");
                c.line(o.a + out * (o.depth / 2.0), o.b + out * (o.depth / 2.0), "glass");
                c.line(o.a + out * o.depth, o.b + out * o.depth, "sill");
            }
        }
        c.out.push_str("</g>\n");
    }
    c.out.push_str("</g>\n");

    c.out.push_str("<g id=\"objects\">\n");
    for o in &d.objects {
        c.rect(&o.rect, "object");
        let mid = o.rect.center();
        let reach = o.rect.width().min(o.rect.height()) / 2.0;
        c.line(mid, mid + o.front * reach, "front");
        c.text(mid, "small", &o.label);
    }
    c.out.push_str("</g>\n");

    c.out.push_str("<g id=\"labels\">\n");
    for r in &d.rooms {
        if r.polygon.len() < 3 {
            continue;
        }
        let p = centroid(&r.polygon);
        let bb = bounding_rect(&r.polygon);
        let title = if r.function.is_empty() {
            r.name.clone()
        } else {
            format!("{} ({})", r.name, r.function)
        };
        c.text(p + Vec2::new(0.0, 0.35), "label", &title);
        c.text(
            p - Vec2::new(0.0, 0.25),
            "small",
            &format!("{:.2} x {:.2} m", bb.width(), bb.height()),
        );
    }
    c.out.push_str("</g>\n");

    let base = Vec2::new(b.min.x + 0.3, b.min.y - 0.6);
    c.text(base, "caption", "Scale 1:50, grid 1 m");
    c.line(base + Vec2::new(4.0, 0.1), base + Vec2::new(5.0, 0.1), "door");
    c.out.push_str("</svg>\n");
    c.out.into_bytes()
}

fn draw_walls(c: &mut Canvas, d: &PlanDrawing) {
    c.out.push_str("<g id=\"rooms\">\n");
    for r in &d.rooms {
        let path = c.polygon_path(std::slice::from_ref(&r.polygon));
        let _ = writeln!(c.out, r#"<path class="room" d="{path}"/>"#);
    }
    c.out.push_str("</g>\n");
    let Some(walls) = &d.walls else { return };
    c.out.push_str("<g id=\"walls\">\n");
    let path = c.polygon_path(&wall_outlines(walls));
    if !path.is_empty() {
        let _ = writeln!(c.out, r#"<path class="wall" d="{path}"/>"#);
    }
    for a in &walls.arcs {
        let mut ring = a.inner.clone();
        ring.extend(a.outer().into_iter().rev());
        let path = c.polygon_path(&[ring]);
        let _ = writeln!(c.out, r#"<path class="wall" id="{}" d="{path}"/>"#, a.id);
    }
    c.out.push_str("</g>\n");
}

fn draw_columns(c: &mut Canvas, d: &PlanDrawing) {
    let Some(g) = &d.grid else { return };
    let e = g.extent();
    let m = Vec2::new(g.margin, g.margin);
    c.rect(&Rect::new(e.min - m, e.max + m), "ground");
    c.out.push_str("<g id=\"rooms\">\n");
    for r in &d.rooms {
        let path = c.polygon_path(std::slice::from_ref(&r.polygon));
        let _ = writeln!(c.out, r#"<path class="room" d="{path}"/>"#);
    }
    c.out.push_str("</g>\n<g id=\"beams\">\n");
    let half = g.beam_section.width / 2.0;
    for i in 0..g.rows {
        for j in 0..g.cols {
            let p = column_center(g, i, j);
            if j + 1 < g.cols {
                let q = column_center(g, i, j + 1);
                c.rect(&Rect::new(p - Vec2::new(0.0, half), q + Vec2::new(0.0, half)), "beam");
            }
            if i + 1 < g.rows {
                let q = column_center(g, i + 1, j);
                c.rect(&Rect::new(p - Vec2::new(half, 0.0), q + Vec2::new(half, 0.0)), "beam");
            }
        }
    }
    c.out.push_str("</g>\n<g id=\"columns\">\n");
    for i in 0..g.rows {
        for j in 0..g.cols {
            let p = column_center(g, i, j);
            let _ = writeln!(
                c.out,
                r#"<circle class="column" id="column_{i}_{j}" cx="{:.2}" cy="{:.2}" r="{:.2}"/>"#,
                c.x(p.x),
                c.y(p.y),
                g.column_radius * MM_PER_M
            );
        }
    }
    c.out.push_str("</g>\n");
}
