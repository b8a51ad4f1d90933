//! Closed-path data model: points, line and cubic segments, sampling,
//! reflection, centroids, Laplacian coordinates and self-intersection tests.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::GeometryError;

/// Endpoints closer than this are snapped together when a path is built.
pub const SNAP_TOLERANCE: f64 = 1e-6;

/// Default polyline density used by [`self_intersects`] callers.
pub const DEFAULT_POLY_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self * (1.0 - t) + other * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, rhs: Point) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Line,
    Cubic,
}

/// A single path element. Lines carry `[start, end]`, cubics carry
/// `[start, control1, control2, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSegment {
    Line([Point; 2]),
    Cubic([Point; 4]),
}

impl CurveSegment {
    pub fn line(start: Point, end: Point) -> Self {
        CurveSegment::Line([start, end])
    }

    pub fn cubic(start: Point, c1: Point, c2: Point, end: Point) -> Self {
        CurveSegment::Cubic([start, c1, c2, end])
    }

    pub fn kind(&self) -> SegmentKind {
        match self {
            CurveSegment::Line(_) => SegmentKind::Line,
            CurveSegment::Cubic(_) => SegmentKind::Cubic,
        }
    }

    pub fn controls(&self) -> &[Point] {
        match self {
            CurveSegment::Line(p) => p,
            CurveSegment::Cubic(p) => p,
        }
    }

    pub fn controls_mut(&mut self) -> &mut [Point] {
        match self {
            CurveSegment::Line(p) => p,
            CurveSegment::Cubic(p) => p,
        }
    }

    pub fn start(&self) -> Point {
        self.controls()[0]
    }

    pub fn end(&self) -> Point {
        *self.controls().last().unwrap()
    }

    pub fn set_start(&mut self, p: Point) {
        self.controls_mut()[0] = p;
    }

    pub fn set_end(&mut self, p: Point) {
        *self.controls_mut().last_mut().unwrap() = p;
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        match *self {
            CurveSegment::Line([a, b]) => CurveSegment::Line([b, a]),
            CurveSegment::Cubic([a, b, c, d]) => CurveSegment::Cubic([d, c, b, a]),
        }
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Self {
        match *self {
            CurveSegment::Line([a, b]) => CurveSegment::Line([f(a), f(b)]),
            CurveSegment::Cubic([a, b, c, d]) => CurveSegment::Cubic([f(a), f(b), f(c), f(d)]),
        }
    }

    /// Basis weights of each control point at parameter `t`. Unused trailing
    /// entries are zero for lines.
    pub fn basis(&self, t: f64) -> [f64; 4] {
        match self {
            CurveSegment::Line(_) => [1.0 - t, t, 0.0, 0.0],
            CurveSegment::Cubic(_) => bernstein3(t),
        }
    }

    /// Point at `t` without range checking; used on hot paths where the
    /// parameter is generated internally.
    pub fn point_at(&self, t: f64) -> Point {
        match *self {
            CurveSegment::Line([a, b]) => a.lerp(b, t),
            CurveSegment::Cubic([a, b, c, d]) => {
                let w = bernstein3(t);
                Point::new(
                    w[0] * a.x + w[1] * b.x + w[2] * c.x + w[3] * d.x,
                    w[0] * a.y + w[1] * b.y + w[2] * c.y + w[3] * d.y,
                )
            }
        }
    }

    /// Split at `t` into two segments of the same kind (de Casteljau).
    pub fn split(&self, t: f64) -> (Self, Self) {
        match *self {
            CurveSegment::Line([a, b]) => {
                let m = a.lerp(b, t);
                (CurveSegment::Line([a, m]), CurveSegment::Line([m, b]))
            }
            CurveSegment::Cubic([p0, p1, p2, p3]) => {
                let p01 = p0.lerp(p1, t);
                let p12 = p1.lerp(p2, t);
                let p23 = p2.lerp(p3, t);
                let p012 = p01.lerp(p12, t);
                let p123 = p12.lerp(p23, t);
                let m = p012.lerp(p123, t);
                (
                    CurveSegment::Cubic([p0, p01, p012, m]),
                    CurveSegment::Cubic([m, p123, p23, p3]),
                )
            }
        }
    }
}

/// Standard cubic Bernstein basis (1, 3, 3, 1 binomial weights).
pub fn bernstein3(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * t * s * s, 3.0 * t * t * s, t * t * t]
}

pub fn eval_curve(seg: &CurveSegment, t: f64) -> Result<Point, GeometryError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GeometryError::ParameterOutOfRange(t));
    }
    Ok(seg.point_at(t))
}

/// An ordered loop of segments where every segment starts where the previous
/// one ended and the last one ends at the first start point.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedPath {
    segments: Vec<CurveSegment>,
}

impl ClosedPath {
    /// Builds a closed path, snapping endpoint gaps below [`SNAP_TOLERANCE`]
    /// so that shared endpoints are bit-identical.
    pub fn new(mut segments: Vec<CurveSegment>) -> Result<Self, GeometryError> {
        if segments.is_empty() {
            return Err(GeometryError::EmptyPath);
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.controls().iter().any(|p| !p.is_finite()) {
                return Err(GeometryError::NonFinite { segment: i });
            }
        }
        let k = segments.len();
        for i in 0..k {
            let j = (i + 1) % k;
            let end = segments[i].end();
            let gap = end.dist(segments[j].start());
            if gap > SNAP_TOLERANCE {
                return Err(GeometryError::Gap { segment: i, gap });
            }
            segments[j].set_start(end);
        }
        Ok(Self { segments })
    }

    /// Closed polygon of straight lines through `vertices`.
    pub fn polygon(vertices: &[Point]) -> Result<Self, GeometryError> {
        let n = vertices.len();
        let segs = (0..n)
            .map(|i| CurveSegment::line(vertices[i], vertices[(i + 1) % n]))
            .collect();
        Self::new(segs)
    }

    pub fn segments(&self) -> &[CurveSegment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn into_segments(self) -> Vec<CurveSegment> {
        self.segments
    }

    /// Applies `f` to every control point. Shared endpoints stay shared
    /// because `f` is deterministic.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Self {
        Self {
            segments: self.segments.iter().map(|s| s.map_points(&f)).collect(),
        }
    }

    pub fn translated(&self, d: Point) -> Self {
        self.map_points(|p| p + d)
    }

    /// Opposite traversal direction, starting from the same point.
    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    /// Flattened control points in traversal order; shared endpoints appear
    /// once per segment that owns them.
    pub fn control_points(&self) -> Vec<Point> {
        self.segments
            .iter()
            .flat_map(|s| s.controls().iter().copied())
            .collect()
    }

    /// Offsets of each segment's start point into the free-point list
    /// returned by [`ClosedPath::free_points`]. A segment's end is the start
    /// of the next segment.
    pub fn free_point_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.segments.len());
        let mut acc = 0;
        for seg in &self.segments {
            offsets.push(acc);
            acc += seg.controls().len() - 1;
        }
        offsets
    }

    /// Indices into the free-point list of every control point of segment
    /// `k`, in control order.
    pub fn control_slots(&self, k: usize) -> [usize; 4] {
        let offsets = self.free_point_offsets();
        let next = offsets[(k + 1) % offsets.len()];
        let s = offsets[k];
        match self.segments[k] {
            CurveSegment::Line(_) => [s, next, usize::MAX, usize::MAX],
            CurveSegment::Cubic(_) => [s, s + 1, s + 2, next],
        }
    }

    /// Independent control points: each segment's start plus the interior
    /// handles of cubics. Ends are implied by closure.
    pub fn free_points(&self) -> Vec<Point> {
        self.segments
            .iter()
            .flat_map(|s| {
                let c = s.controls();
                c[..c.len() - 1].iter().copied()
            })
            .collect()
    }

    /// Same segment kinds with new free points (see [`ClosedPath::free_points`]).
    pub fn with_free_points(&self, pts: &[Point]) -> Self {
        let offsets = self.free_point_offsets();
        let k = self.segments.len();
        let segments = (0..k)
            .map(|i| {
                let s = offsets[i];
                let e = pts[offsets[(i + 1) % k]];
                match self.segments[i] {
                    CurveSegment::Line(_) => CurveSegment::Line([pts[s], e]),
                    CurveSegment::Cubic(_) => CurveSegment::Cubic([pts[s], pts[s + 1], pts[s + 2], e]),
                }
            })
            .collect();
        Self { segments }
    }

    /// Shoelace area of a dense polygonization; positive means clockwise on a
    /// y-down canvas.
    pub fn signed_area(&self) -> f64 {
        polygon_signed_area(&polygonize(self, 32))
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in polygonize(self, 32) {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

/// Line of reflection given by a point on it and a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryAxis {
    origin: Point,
    direction: Point,
}

impl SymmetryAxis {
    pub fn new(origin: Point, direction: Point) -> Result<Self, GeometryError> {
        let len = direction.norm();
        if !(len > 0.0 && len.is_finite() && origin.is_finite()) {
            return Err(GeometryError::DegenerateAxis);
        }
        Ok(Self {
            origin,
            direction: direction * (1.0 / len),
        })
    }

    /// Axis through `origin` at `angle` radians from the +x direction.
    pub fn from_angle(origin: Point, angle: f64) -> Result<Self, GeometryError> {
        Self::new(origin, Point::new(angle.cos(), angle.sin()))
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn direction(&self) -> Point {
        self.direction
    }

    pub fn angle(&self) -> f64 {
        self.direction.y.atan2(self.direction.x)
    }

    /// Signed distance of `p` from the axis (positive to the left of the
    /// direction vector).
    pub fn side(&self, p: Point) -> f64 {
        self.direction.cross(p - self.origin)
    }

    pub fn reflect(&self, p: Point) -> Point {
        let d = self.direction;
        let v = p - self.origin;
        let along = d * v.dot(d);
        self.origin + along * 2.0 - v
    }

    /// Reflection as a linear map applied to displacement vectors.
    pub fn reflect_vector(&self, v: Point) -> Point {
        let d = self.direction;
        d * (2.0 * v.dot(d)) - v
    }
}

pub fn mirror(path: &ClosedPath, axis: &SymmetryAxis) -> ClosedPath {
    path.map_points(|p| axis.reflect(p))
}

/// Ordered samples along a path together with where each one came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePolyline {
    pub points: Vec<Point>,
    /// `(segment index, t)` of each sample.
    pub params: Vec<(usize, f64)>,
}

impl SamplePolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of samples each segment receives when `n` samples are spread over
/// `k` segments: `n / k` each, remainder to the earliest segments.
pub fn sample_counts(n: usize, k: usize) -> Vec<usize> {
    let base = n / k;
    let rem = n % k;
    (0..k).map(|i| base + usize::from(i < rem)).collect()
}

pub fn sample_path(path: &ClosedPath, n: usize) -> Result<SamplePolyline, GeometryError> {
    let k = path.len();
    if n < k {
        return Err(GeometryError::TooFewSamples {
            samples: n,
            segments: k,
        });
    }
    let mut points = Vec::with_capacity(n);
    let mut params = Vec::with_capacity(n);
    for (si, (seg, m)) in path.segments().iter().zip(sample_counts(n, k)).enumerate() {
        for j in 0..m {
            let t = j as f64 / m as f64;
            points.push(seg.point_at(t));
            params.push((si, t));
        }
    }
    Ok(SamplePolyline { points, params })
}

/// Dense polygon with `samples_per_segment` half-open samples on every
/// segment, in traversal order.
pub fn polygonize(path: &ClosedPath, samples_per_segment: usize) -> Vec<Point> {
    let m = samples_per_segment.max(1);
    let mut out = Vec::with_capacity(path.len() * m);
    for seg in path.segments() {
        for j in 0..m {
            out.push(seg.point_at(j as f64 / m as f64));
        }
    }
    out
}

pub fn polygon_signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

/// Area centroid of a closed polygon.
pub fn polygon_centroid(poly: &[Point]) -> Result<Point, GeometryError> {
    let n = poly.len();
    // shift to the first vertex to limit cancellation
    let o = poly.first().copied().unwrap_or_default();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = poly[i] - o;
        let q = poly[(i + 1) % n] - o;
        let c = p.cross(q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    if a2.abs() * 0.5 <= 1e-9 {
        return Err(GeometryError::ZeroArea);
    }
    Ok(Point::new(cx / (3.0 * a2), cy / (3.0 * a2)) + o)
}

/// Area centroid of the path, computed on a dense polygonization.
pub fn path_centroid(path: &ClosedPath) -> Result<Point, GeometryError> {
    let per_seg = |s: &CurveSegment| match s.kind() {
        SegmentKind::Line => 1,
        SegmentKind::Cubic => 64,
    };
    let mut poly = Vec::new();
    for seg in path.segments() {
        let m = per_seg(seg);
        poly.extend((0..m).map(|j| seg.point_at(j as f64 / m as f64)));
    }
    polygon_centroid(&poly)
}

/// Cyclic Laplacian coordinates `p_i - (p_{i-1} + p_{i+1}) / 2`.
pub fn laplacian(points: &[Point]) -> Result<Vec<Point>, GeometryError> {
    let n = points.len();
    if n < 3 {
        return Err(GeometryError::TooFewPoints { needed: 3, got: n });
    }
    Ok((0..n)
        .map(|i| {
            let prev = points[(i + n - 1) % n];
            let next = points[(i + 1) % n];
            points[i] - (prev + next) * 0.5
        })
        .collect())
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test using orientation signs; collinear
/// overlaps and touching endpoints count as intersections.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// True when the closed polygon has two non-adjacent edges that touch.
pub fn polygon_self_intersects(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 4 {
        return false;
    }
    let edge = |i: usize| (poly[i], poly[(i + 1) % n]);
    // bounding boxes let most pairs be rejected without predicates
    let boxes: Vec<(Point, Point)> = (0..n)
        .map(|i| {
            let (a, b) = edge(i);
            (
                Point::new(a.x.min(b.x), a.y.min(b.y)),
                Point::new(a.x.max(b.x), a.y.max(b.y)),
            )
        })
        .collect();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (lo_i, hi_i) = boxes[i];
            let (lo_j, hi_j) = boxes[j];
            if lo_i.x > hi_j.x || lo_j.x > hi_i.x || lo_i.y > hi_j.y || lo_j.y > hi_i.y {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Self-intersection test on the polygonization with `poly_n` samples per
/// segment. Callers should use at least 8.
pub fn self_intersects(path: &ClosedPath, poly_n: usize) -> bool {
    polygon_self_intersects(&polygonize(path, poly_n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn unit_square() -> ClosedPath {
        ClosedPath::polygon(&[p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)]).unwrap()
    }

    fn arc_cubic() -> CurveSegment {
        CurveSegment::cubic(p(0., 0.), p(0., 1.), p(1., 1.), p(1., 0.))
    }

    #[test]
    fn eval_endpoints_and_midpoint() {
        let l = CurveSegment::line(p(0., 0.), p(2., 0.));
        assert_eq!(eval_curve(&l, 0.0).unwrap(), p(0., 0.));
        assert_eq!(eval_curve(&arc_cubic(), 1.0).unwrap(), p(1., 0.));
        let mid = eval_curve(&arc_cubic(), 0.5).unwrap();
        // de Casteljau midpoint from the split
        let (left, _) = arc_cubic().split(0.5);
        assert!((mid.x - left.end().x).abs() < 1e-15 && (mid.y - left.end().y).abs() < 1e-15);
        assert!((mid.x - 0.5).abs() < 1e-15 && (mid.y - 0.75).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_out_of_range() {
        assert!(eval_curve(&arc_cubic(), 1.5).is_err());
        assert!(eval_curve(&arc_cubic(), -0.01).is_err());
        assert!(eval_curve(&arc_cubic(), f64::NAN).is_err());
    }

    #[test]
    fn closure_snaps_small_gaps_and_rejects_large() {
        let segs = vec![
            CurveSegment::line(p(0., 0.), p(1., 0.)),
            CurveSegment::line(p(1. + 1e-8, 0.), p(0., 1.)),
            CurveSegment::line(p(0., 1.), p(0., 1e-9)),
        ];
        let path = ClosedPath::new(segs).unwrap();
        for k in 0..3 {
            assert_eq!(path.segments()[k].end(), path.segments()[(k + 1) % 3].start());
        }
        let bad = vec![
            CurveSegment::line(p(0., 0.), p(1., 0.)),
            CurveSegment::line(p(1.1, 0.), p(0., 0.)),
        ];
        assert!(matches!(ClosedPath::new(bad), Err(GeometryError::Gap { .. })));
        assert!(ClosedPath::new(vec![]).is_err());
    }

    #[test]
    fn sampling_square() {
        let sq = unit_square();
        let s4 = sample_path(&sq, 4).unwrap();
        assert_eq!(s4.points, vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)]);
        let s8 = sample_path(&sq, 8).unwrap();
        assert_eq!(s8.points[1], p(0.5, 0.));
        assert_eq!(s8.points[3], p(1., 0.5));
        assert_eq!(s8.len(), 8);
        assert!(sample_path(&sq, 3).is_err());
    }

    #[test]
    fn sample_counts_spread_remainder_first() {
        assert_eq!(sample_counts(200, 3), vec![67, 67, 66]);
        let tri = ClosedPath::polygon(&[p(0., 0.), p(3., 0.), p(0., 3.)]).unwrap();
        let s = sample_path(&tri, 200).unwrap();
        let count = |k| s.params.iter().filter(|(i, _)| *i == k).count();
        assert_eq!((count(0), count(1), count(2)), (67, 67, 66));
    }

    #[test]
    fn mirror_examples() {
        let vertical = SymmetryAxis::new(p(0., 0.), p(0., 1.)).unwrap();
        let r = vertical.reflect(p(1., 2.));
        assert!((r.x + 1.0).abs() < 1e-15 && (r.y - 2.0).abs() < 1e-15);
        let diag = SymmetryAxis::new(p(0., 0.), p(1., 1.)).unwrap();
        let r = diag.reflect(p(3., 0.));
        assert!(r.x.abs() < 1e-12 && (r.y - 3.0).abs() < 1e-12);
        assert!((diag.direction().norm() - 1.0).abs() < 1e-12);
        assert!(SymmetryAxis::new(p(0., 0.), p(0., 0.)).is_err());
    }

    #[test]
    fn mirror_of_symmetric_path_keeps_control_multiset() {
        let sq = ClosedPath::polygon(&[p(-1., 0.), p(1., 0.), p(1., 2.), p(-1., 2.)]).unwrap();
        let axis = SymmetryAxis::new(p(0., 0.), p(0., 1.)).unwrap();
        let m = mirror(&sq, &axis);
        let key = |v: &Point| ((v.x * 1e9).round() as i64, (v.y * 1e9).round() as i64);
        let mut a: Vec<_> = sq.control_points().iter().map(key).collect();
        let mut b: Vec<_> = m.control_points().iter().map(key).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn centroid_examples() {
        let c = path_centroid(&unit_square()).unwrap();
        assert!((c.x - 0.5).abs() < 1e-12 && (c.y - 0.5).abs() < 1e-12);
        let l = ClosedPath::polygon(&[p(0., 0.), p(2., 0.), p(2., 1.), p(1., 1.), p(1., 2.), p(0., 2.)]).unwrap();
        let c = path_centroid(&l).unwrap();
        assert!((c.x - 5.0 / 6.0).abs() < 1e-12 && (c.y - 5.0 / 6.0).abs() < 1e-12);
        let flat = ClosedPath::polygon(&[p(0., 0.), p(1., 0.), p(2., 0.)]).unwrap();
        assert!(matches!(path_centroid(&flat), Err(GeometryError::ZeroArea)));
    }

    #[test]
    fn laplacian_examples() {
        let l = laplacian(&[p(0., 0.), p(1., 0.), p(1., 1.)]).unwrap();
        assert_eq!(l[1], p(0.5, -0.5));
        assert!(laplacian(&[p(0., 0.), p(1., 0.)]).is_err());
        let s8 = sample_path(&unit_square(), 8).unwrap();
        let l = laplacian(&s8.points).unwrap();
        // edge midpoints sit halfway between their neighbours
        for i in [1, 3, 5, 7] {
            assert_eq!(l[i], p(0., 0.));
        }
    }

    #[test]
    fn self_intersection_examples() {
        assert!(!self_intersects(&unit_square(), 16));
        let bowtie = ClosedPath::polygon(&[p(0., 0.), p(1., 1.), p(1., 0.), p(0., 1.)]).unwrap();
        assert!(self_intersects(&bowtie, 16));
        // two S-shaped cubics that cross at their shared midpoint (1, 0)
        let fig8 = ClosedPath::new(vec![
            CurveSegment::cubic(p(0., 0.), p(0.5, 1.), p(1.5, -1.), p(2., 0.)),
            CurveSegment::cubic(p(2., 0.), p(1.5, 1.), p(0.5, -1.), p(0., 0.)),
        ])
        .unwrap();
        assert!(self_intersects(&fig8, 16));
    }

    #[test]
    fn polygonize_examples() {
        assert_eq!(polygonize(&unit_square(), 1).len(), 4);
        let half = ClosedPath::new(vec![
            CurveSegment::cubic(p(0., 0.), p(0., 1.33), p(2., 1.33), p(2., 0.)),
            CurveSegment::line(p(2., 0.), p(0., 0.)),
        ])
        .unwrap();
        let poly = polygonize(&half, 2);
        assert_eq!(poly.len(), 4);
        assert_eq!(poly[1], eval_curve(&half.segments()[0], 0.5).unwrap());
    }

    #[test]
    fn reversed_path_keeps_start() {
        let sq = unit_square();
        let r = sq.reversed();
        assert_eq!(r.segments()[0].start(), sq.segments()[0].start());
        assert!((r.signed_area() + sq.signed_area()).abs() < 1e-12);
    }
}
