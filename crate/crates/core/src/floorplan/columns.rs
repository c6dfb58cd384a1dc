use serde::{Deserialize, Serialize};

use super::walls::Builder;
use super::FloorplanError;
use crate::geom::{Rect, Vec2, Vec3};
use crate::model::{AttributeId, AttributeRegistry, Mesh, SceneElement, Transform};

const COLUMN_SIDES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnGridSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub column_radius: f64,
    pub column_height: f64,
    pub beam_section: BeamSection,
    /// Ground plane overhang past the outer column centres.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    1.0
}

impl ColumnGridSpec {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Self {
        ColumnGridSpec {
            rows,
            cols,
            spacing,
            column_radius: 0.15,
            column_height: 3.5,
            beam_section: BeamSection {
                width: 0.2,
                height: 0.3,
            },
            margin: default_margin(),
        }
    }

    pub fn validate(&self) -> Result<(), FloorplanError> {
        let bad = |m: String| Err(FloorplanError::InvalidGrid(m));
        if self.rows < 2 || self.cols < 2 {
            return bad(format!("need at least 2x2 columns, got {}x{}", self.rows, self.cols));
        }
        if !(self.column_radius > 0.0) {
            return bad(format!("column_radius {} must be positive", self.column_radius));
        }
        if !(self.spacing > 2.0 * self.column_radius) {
            return bad(format!(
                "spacing {} must exceed the column diameter {}",
                self.spacing,
                2.0 * self.column_radius
            ));
        }
        if !(self.column_height > 0.0) {
            return bad(format!("column_height {} must be positive", self.column_height));
        }
        let b = self.beam_section;
        if !(b.width > 0.0 && b.height > 0.0 && b.height < self.column_height) {
            return bad(format!("beam section {}x{} out of range", b.width, b.height));
        }
        if !(self.margin >= 0.0) {
            return bad(format!("margin {} must be non-negative", self.margin));
        }
        Ok(())
    }

    /// Height of the clear opening below the beams.
    pub fn clear_height(&self) -> f64 {
        self.column_height - self.beam_section.height
    }

    pub fn extent(&self) -> Rect {
        Rect::new(
            Vec2::new(0.0, 0.0),
            Vec2::new(
                (self.cols - 1) as f64 * self.spacing,
                (self.rows - 1) as f64 * self.spacing,
            ),
        )
    }

    pub fn beam_count(&self) -> usize {
        self.rows * (self.cols - 1) + self.cols * (self.rows - 1)
    }
}

/// Centre of column `C_{i,j}`: row `i` runs along y, column `j` along x.
pub fn column_center(spec: &ColumnGridSpec, i: usize, j: usize) -> Vec2 {
    Vec2::new(j as f64 * spec.spacing, i as f64 * spec.spacing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapAxis {
    /// Between `(i, j)` and `(i, j + 1)`.
    Row,
    /// Between `(i, j)` and `(i + 1, j)`.
    Column,
}

/// Opening between two adjacent columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gap {
    pub axis: GapAxis,
    pub i: usize,
    pub j: usize,
}

impl Gap {
    pub fn row(i: usize, j: usize) -> Self {
        Gap {
            axis: GapAxis::Row,
            i,
            j,
        }
    }

    pub fn column(i: usize, j: usize) -> Self {
        Gap {
            axis: GapAxis::Column,
            i,
            j,
        }
    }

    pub fn columns(&self) -> ((usize, usize), (usize, usize)) {
        match self.axis {
            GapAxis::Row => ((self.i, self.j), (self.i, self.j + 1)),
            GapAxis::Column => ((self.i, self.j), (self.i + 1, self.j)),
        }
    }

    pub fn in_grid(&self, spec: &ColumnGridSpec) -> bool {
        match self.axis {
            GapAxis::Row => self.i < spec.rows && self.j + 1 < spec.cols,
            GapAxis::Column => self.i + 1 < spec.rows && self.j < spec.cols,
        }
    }

    pub fn is_perimeter(&self, spec: &ColumnGridSpec) -> bool {
        match self.axis {
            GapAxis::Row => self.i == 0 || self.i == spec.rows - 1,
            GapAxis::Column => self.j == 0 || self.j == spec.cols - 1,
        }
    }

    /// Endpoints on the column surfaces facing each other.
    pub fn clear_span(&self, spec: &ColumnGridSpec) -> (Vec2, Vec2) {
        let (a, b) = self.columns();
        let (pa, pb) = (column_center(spec, a.0, a.1), column_center(spec, b.0, b.1));
        let d = (pb - pa).normalized();
        (pa + d * spec.column_radius, pb - d * spec.column_radius)
    }

    pub fn clear_width(&self, spec: &ColumnGridSpec) -> f64 {
        spec.spacing - 2.0 * spec.column_radius
    }

    /// Unit normal pointing out of the grid for perimeter gaps; interior
    /// gaps get the positive-axis normal.
    pub fn outward(&self, spec: &ColumnGridSpec) -> Vec2 {
        match self.axis {
            GapAxis::Row if self.i == 0 && spec.rows > 1 => Vec2::new(0.0, -1.0),
            GapAxis::Row => Vec2::new(0.0, 1.0),
            GapAxis::Column if self.j == 0 && spec.cols > 1 => Vec2::new(-1.0, 0.0),
            GapAxis::Column => Vec2::new(1.0, 0.0),
        }
    }
}

impl std::fmt::Display for Gap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = self.columns();
        write!(f, "C{},{}-C{},{}", a.0, a.1, b.0, b.1)
    }
}

/// Perimeter gaps in a fixed order: row 0, last row, column 0, last column,
/// each in increasing index.
pub fn perimeter_gaps(spec: &ColumnGridSpec) -> Vec<Gap> {
    let mut out = Vec::new();
    for i in [0, spec.rows - 1] {
        out.extend((0..spec.cols - 1).map(|j| Gap::row(i, j)));
    }
    for j in [0, spec.cols - 1] {
        out.extend((0..spec.rows - 1).map(|i| Gap::column(i, j)));
    }
    out
}

/// Rectangle enclosed by four columns `(i1, j1)`..`(i2, j2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitRegion {
    pub i1: usize,
    pub j1: usize,
    pub i2: usize,
    pub j2: usize,
    pub rect: Rect,
}

impl UnitRegion {
    pub fn name(&self) -> String {
        format!("unit_{}_{}", self.i1, self.j1)
    }
}

/// Elementary cells of the grid, row-major.
pub fn unit_regions(spec: &ColumnGridSpec) -> Vec<UnitRegion> {
    let mut out = Vec::new();
    for i in 0..spec.rows - 1 {
        for j in 0..spec.cols - 1 {
            out.push(UnitRegion {
                i1: i,
                j1: j,
                i2: i + 1,
                j2: j + 1,
                rect: Rect::new(column_center(spec, i, j), column_center(spec, i + 1, j + 1)),
            });
        }
    }
    out
}

fn column_mesh(radius: f64, height: f64) -> Mesh {
    let ring: Vec<Vec2> = (0..COLUMN_SIDES)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / COLUMN_SIDES as f64;
            Vec2::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    let mut b = Builder::default();
    for k in 0..COLUMN_SIDES {
        let (p, q) = (ring[k], ring[(k + 1) % COLUMN_SIDES]);
        let out = ((p + q) * 0.5).extend(0.0);
        b.quad([p.extend(0.0), q.extend(0.0), q.extend(height), p.extend(height)], out);
    }
    let idx_bottom: Vec<u32> = ring.iter().map(|p| b.vertex(p.extend(0.0))).collect();
    let idx_top: Vec<u32> = ring.iter().map(|p| b.vertex(p.extend(height))).collect();
    for k in 1..COLUMN_SIDES - 1 {
        b.mesh.faces.push([idx_bottom[0], idx_bottom[k + 1], idx_bottom[k]]);
        b.mesh.faces.push([idx_top[0], idx_top[k], idx_top[k + 1]]);
    }
    b.mesh
}

/// Ground plane, columns and beams. Columns are numbered `column_<i>_<j>`
/// and carry a translation to their centre; beams run centre to centre at
/// the column tops, row beams first (row-major), then column beams.
pub fn build_column_grid(
    spec: &ColumnGridSpec,
    registry: &mut AttributeRegistry,
) -> Result<Vec<SceneElement>, FloorplanError> {
    spec.validate()?;
    let ext = spec.extent();
    let (lo, hi) = (
        ext.min - Vec2::new(spec.margin, spec.margin),
        ext.max + Vec2::new(spec.margin, spec.margin),
    );
    let ground = Mesh {
        vertices: vec![
            Vec3::new(lo.x, lo.y, 0.0),
            Vec3::new(hi.x, lo.y, 0.0),
            Vec3::new(hi.x, hi.y, 0.0),
            Vec3::new(lo.x, hi.y, 0.0),
        ],
        faces: vec![[0, 1, 2], [0, 2, 3]],
    };
    let mut out = vec![registry.set_attribute(SceneElement::new(ground), &AttributeId::Floor)?];

    let proto = column_mesh(spec.column_radius, spec.column_height);
    for i in 0..spec.rows {
        for j in 0..spec.cols {
            let mut e = SceneElement::new(proto.clone());
            e.transform = Transform {
                t: column_center(spec, i, j).extend(0.0),
                ..Transform::IDENTITY
            };
            out.push(registry.set_attribute(
                e,
                &AttributeId::Column {
                    row: i as u32,
                    col: j as u32,
                },
            )?);
        }
    }

    let (h, bw, bh) = (spec.column_height, spec.beam_section.width, spec.beam_section.height);
    let mut k = 0u32;
    let mut beam = |a: Vec2, b: Vec2, registry: &mut AttributeRegistry| {
        let half = if a.x == b.x {
            Vec2::new(bw / 2.0, 0.0)
        } else {
            Vec2::new(0.0, bw / 2.0)
        };
        let (min, max) = (a - half, b + half);
        let mesh = Mesh::cuboid(Vec3::new(min.x, min.y, h - bh), Vec3::new(max.x, max.y, h));
        let e = registry.set_attribute(SceneElement::new(mesh), &AttributeId::Beam(k));
        k += 1;
        e
    };
    for i in 0..spec.rows {
        for j in 0..spec.cols - 1 {
            out.push(beam(
                column_center(spec, i, j),
                column_center(spec, i, j + 1),
                registry,
            )?);
        }
    }
    for i in 0..spec.rows - 1 {
        for j in 0..spec.cols {
            out.push(beam(
                column_center(spec, i, j),
                column_center(spec, i + 1, j),
                registry,
            )?);
        }
    }
    Ok(out)
}
