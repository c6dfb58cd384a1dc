//! Small vector and polygon toolkit shared by the geometry stages.
//!
//! Everything is `f64` meters in a right-handed, z-up frame.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance used when comparing positions that came out of exact arithmetic
/// on room sizes (sums of declared widths and depths).
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec2 {
        let l = self.length();
        Vec2::new(self.x / l, self.y / l)
    }

    /// Rotate counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).length()
    }

    pub fn approx_eq(self, o: Vec2, tol: f64) -> bool {
        (self.x - o.x).abs() <= tol && (self.y - o.y).abs() <= tol
    }

    pub fn extend(self, z: f64) -> Vec3 {
        Vec3::new(self.x, self.y, z)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const ONE: Vec3 = Vec3::new(1.0, 1.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn xy(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn mul_elem(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn max_abs_diff(self, o: Vec3) -> f64 {
        (self.x - o.x).abs().max((self.y - o.y).abs()).max((self.z - o.z).abs())
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// The empty box: `min` above `max` so that any union replaces it.
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn from_points<I: IntoIterator<Item = Vec3>>(pts: I) -> Aabb {
        pts.into_iter().fold(Aabb::EMPTY, |b, p| b.including(p))
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn including(self, p: Vec3) -> Aabb {
        Aabb::new(self.min.min(p), self.max.max(p))
    }

    pub fn union(self, o: Aabb) -> Aabb {
        if o.is_empty() {
            return self;
        }
        if self.is_empty() {
            return o;
        }
        Aabb::new(self.min.min(o.min), self.max.max(o.max))
    }

    pub fn extents(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn inflated(&self, e: f64) -> Aabb {
        Aabb::new(self.min - Vec3::new(e, e, e), self.max + Vec3::new(e, e, e))
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        o.is_empty() || (self.contains_point(o.min) && self.contains_point(o.max))
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(b.x, b.y, b.z),
            Vec3::new(a.x, b.y, b.z),
        ]
    }
}

/// 2D axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn from_center(c: Vec2, half: Vec2) -> Self {
        Rect::new(c - half, c + half)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    /// Overlap of the open interiors along each axis; both positive iff the
    /// interiors intersect.
    pub fn overlap(&self, o: &Rect) -> (f64, f64) {
        (
            self.max.x.min(o.max.x) - self.min.x.max(o.min.x),
            self.max.y.min(o.max.y) - self.min.y.max(o.min.y),
        )
    }

    pub fn interiors_intersect(&self, o: &Rect, tol: f64) -> bool {
        let (ox, oy) = self.overlap(o);
        ox > tol && oy > tol
    }

    pub fn contains_rect(&self, o: &Rect, tol: f64) -> bool {
        o.min.x >= self.min.x - tol
            && o.min.y >= self.min.y - tol
            && o.max.x <= self.max.x + tol
            && o.max.y <= self.max.y + tol
    }

    pub fn contains_open(&self, p: Vec2) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    pub fn shrunk(&self, d: f64) -> Rect {
        Rect::new(self.min + Vec2::new(d, d), self.max - Vec2::new(d, d))
    }

    pub fn translated(&self, d: Vec2) -> Rect {
        Rect::new(self.min + d, self.max + d)
    }
}

/// Signed area, positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Vec2]) -> Vec2 {
    let n = poly.len();
    let a = signed_area(poly);
    if a.abs() < EPS {
        let s = poly.iter().fold(Vec2::default(), |acc, &p| acc + p);
        return s * (1.0 / n as f64);
    }
    let mut c = Vec2::default();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let w = p.cross(q);
        c = c + (p + q) * w;
    }
    c * (1.0 / (6.0 * a))
}

pub fn bounding_rect(poly: &[Vec2]) -> Rect {
    let mut r = Rect::new(
        Vec2::new(f64::INFINITY, f64::INFINITY),
        Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in poly {
        r.min.x = r.min.x.min(p.x);
        r.min.y = r.min.y.min(p.y);
        r.max.x = r.max.x.max(p.x);
        r.max.y = r.max.y.max(p.y);
    }
    r
}

/// Even-odd point-in-polygon test. Points on the boundary may land either way.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// True when the two closed segments cross at a point interior to both
/// (proper intersection). Touching at endpoints or collinear overlap is not
/// counted.
pub fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    let scale = (b - a).length() * (d - c).length();
    let tol = 1e-12 * scale.max(1.0);
    ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
}

/// True if any two non-adjacent edges of the closed polygon cross or any
/// vertex repeats.
pub fn is_self_intersecting(poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if poly[i].approx_eq(poly[j], EPS) {
                return true;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// True if the rectangle lies inside the polygon: all corners inside (or on
/// the boundary within `tol`) and no polygon edge cuts through it.
pub fn rect_in_polygon(r: &Rect, poly: &[Vec2], tol: f64) -> bool {
    let inner = r.shrunk(tol.min(r.width() / 4.0).min(r.height() / 4.0));
    let on_or_in = |p: Vec2| {
        point_in_polygon(p, poly)
            || (0..poly.len()).any(|i| point_segment_distance(p, poly[i], poly[(i + 1) % poly.len()]) <= tol)
    };
    if !r.corners().iter().all(|&c| on_or_in(c)) {
        return false;
    }
    if poly.iter().any(|&v| inner.contains_open(v)) {
        return false;
    }
    let rc = inner.corners();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        for k in 0..4 {
            if segments_cross(a, b, rc[k], rc[(k + 1) % 4]) {
                return false;
            }
        }
    }
    true
}

/// Ear-clipping triangulation of a simple polygon. Returns index triples into
/// `poly`, counter-clockwise. Collinear vertices are tolerated.
pub fn ear_clip(poly: &[Vec2]) -> Vec<[usize; 3]> {
    let n = poly.len();
    if n < 3 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if signed_area(poly) < 0.0 {
        idx.reverse();
    }
    let mut tris = Vec::with_capacity(n - 2);
    let mut guard = 0usize;
    while idx.len() > 3 && guard < n * n {
        guard += 1;
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            let turn = (b - a).cross(c - b);
            if turn <= EPS * EPS {
                if turn.abs() <= EPS * EPS && collinear_between(a, b, c) {
                    // Degenerate ear: drop the middle vertex without emitting.
                    idx.remove(k);
                    clipped = true;
                    break;
                }
                continue;
            }
            let blocked = idx
                .iter()
                .any(|&j| j != ia && j != ib && j != ic && point_in_triangle_closed(poly[j], a, b, c));
            if !blocked {
                tris.push([ia, ib, ic]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
        if (b - a).cross(c - a).abs() > EPS * EPS {
            tris.push([idx[0], idx[1], idx[2]]);
        }
    }
    tris
}

fn collinear_between(a: Vec2, b: Vec2, c: Vec2) -> bool {
    (b - a).dot(c - b) >= 0.0
}

fn point_in_triangle_closed(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= -EPS && d2 >= -EPS && d3 >= -EPS
}

/// Clip a polygon by the half-plane `n·p <= offset` (Sutherland-Hodgman).
pub fn clip_half_plane(poly: &[Vec2], n: Vec2, offset: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let len = poly.len();
    for i in 0..len {
        let (p, q) = (poly[i], poly[(i + 1) % len]);
        let (dp, dq) = (n.dot(p) - offset, n.dot(q) - offset);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Normalize an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Round to the nearest multiple of pi/2, wrapped to (-pi, pi].
pub fn snap_quarter(a: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    wrap_angle((a / FRAC_PI_2).round() * FRAC_PI_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 3.0),
            Vec2::new(0.0, 3.0),
        ]
    }

    #[test]
    fn rectangle_triangulates_to_two() {
        let tris = ear_clip(&square());
        assert_eq!(tris.len(), 2);
        let area: f64 = tris
            .iter()
            .map(|t| signed_area(&[square()[t[0]], square()[t[1]], square()[t[2]]]))
            .sum();
        assert!((area - 12.0).abs() < 1e-12);
    }

    #[test]
    fn clockwise_input_still_covers_area() {
        let mut p = square();
        p.reverse();
        let tris = ear_clip(&p);
        let area: f64 = tris.iter().map(|t| signed_area(&[p[t[0]], p[t[1]], p[t[2]]])).sum();
        assert!((area - 12.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_vertices_are_skipped() {
        let p = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 3.0),
            Vec2::new(0.0, 3.0),
        ];
        let tris = ear_clip(&p);
        let area: f64 = tris.iter().map(|t| signed_area(&[p[t[0]], p[t[1]], p[t[2]]])).sum();
        assert!((area - 12.0).abs() < 1e-12);
        assert!(tris.len() <= 3);
    }

    #[test]
    fn bowtie_is_self_intersecting() {
        let p = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(is_self_intersecting(&p));
        assert!(!is_self_intersecting(&square()));
    }

    #[test]
    fn centroid_of_rectangle() {
        let c = centroid(&square());
        assert!(c.approx_eq(Vec2::new(2.0, 1.5), 1e-12));
    }

    #[test]
    fn rect_containment() {
        let r = Rect::new(Vec2::new(0.5, 0.5), Vec2::new(1.5, 1.5));
        assert!(rect_in_polygon(&r, &square(), 1e-9));
        let out = Rect::new(Vec2::new(3.5, 0.5), Vec2::new(4.5, 1.5));
        assert!(!rect_in_polygon(&out, &square(), 1e-9));
        let flush = Rect::new(Vec2::new(0.0, 0.0), Vec2::new(4.0, 3.0));
        assert!(rect_in_polygon(&flush, &square(), 1e-9));
    }

    #[test]
    fn angle_helpers() {
        use std::f64::consts::{FRAC_PI_2, PI};
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((snap_quarter(0.8) - FRAC_PI_2).abs() < 1e-12);
        assert!((snap_quarter(-3.1) - PI).abs() < 1e-12);
    }
}
