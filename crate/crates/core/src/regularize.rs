//! Post-fit regularization of clipart documents.
//!
//! Rules run in a fixed order: axis alignment, arc replacement, concentric
//! snapping, parallel snapping. [`regularize`] repeats the sequence until the
//! document stops changing, so its output is a fixed point.
//!
//! Line rules move vertices rather than rotating segments independently.
//! Every snapped line contributes a constraint line; a vertex touched by one
//! constraint is projected onto it and a vertex touched by two is placed at
//! their intersection. Corners shared by a horizontal and a vertical line
//! therefore stay exact. Cubic handles next to a moved vertex move with it.

use crate::document::ClipartDocument;
use crate::geometry::{sample_path, ClosedPath, CurveSegment, Point, SegmentKind};

/// Circle approximation constant for four cubic quarter arcs.
pub const KAPPA: f64 = 0.5522847498;
const MAX_ROUNDS: usize = 16;
const SAME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizeConfig {
    /// Degrees.
    pub angle_tol: f64,
    /// Canvas pixels.
    pub arc_dist_tol: f64,
    pub concentric_frac: f64,
    pub arc_samples: usize,
}

impl Default for RegularizeConfig {
    fn default() -> Self {
        Self {
            angle_tol: 10.0,
            arc_dist_tol: 0.5,
            concentric_frac: 0.1,
            arc_samples: 64,
        }
    }
}

impl RegularizeConfig {
    pub fn validate(&self) -> Result<(), String> {
        let ok = self.angle_tol > 0.0
            && self.angle_tol < 45.0
            && self.arc_dist_tol > 0.0
            && self.concentric_frac > 0.0
            && self.arc_samples >= 3;
        if ok {
            Ok(())
        } else {
            Err(format!("invalid regularization config {self:?}"))
        }
    }
}

/// A line through `point` with unit direction `dir`. Axis directions are
/// stored exactly as `(1, 0)` or `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Constraint {
    point: Point,
    dir: Point,
}

impl Constraint {
    fn horizontal(y: f64) -> Self {
        Self {
            point: Point::new(0.0, y),
            dir: Point::new(1.0, 0.0),
        }
    }

    fn vertical(x: f64) -> Self {
        Self {
            point: Point::new(x, 0.0),
            dir: Point::new(0.0, 1.0),
        }
    }

    fn is_horizontal(&self) -> bool {
        self.dir.y == 0.0
    }

    fn is_vertical(&self) -> bool {
        self.dir.x == 0.0
    }

    fn project(&self, v: Point) -> Point {
        if self.is_horizontal() {
            Point::new(v.x, self.point.y)
        } else if self.is_vertical() {
            Point::new(self.point.x, v.y)
        } else {
            self.point + self.dir * (v - self.point).dot(self.dir)
        }
    }

    fn intersect(&self, other: &Constraint) -> Option<Point> {
        let (a, b) = (self, other);
        if a.is_horizontal() && b.is_vertical() {
            return Some(Point::new(b.point.x, a.point.y));
        }
        if a.is_vertical() && b.is_horizontal() {
            return Some(Point::new(a.point.x, b.point.y));
        }
        let den = a.dir.cross(b.dir);
        if den.abs() < 1e-12 {
            return None;
        }
        // keep the axis-aligned coordinate exact
        if a.is_horizontal() || b.is_horizontal() {
            let (h, g) = if a.is_horizontal() { (a, b) } else { (b, a) };
            let t = (h.point.y - g.point.y) / g.dir.y;
            return Some(Point::new(g.point.x + g.dir.x * t, h.point.y));
        }
        if a.is_vertical() || b.is_vertical() {
            let (v, g) = if a.is_vertical() { (a, b) } else { (b, a) };
            let t = (v.point.x - g.point.x) / g.dir.x;
            return Some(Point::new(v.point.x, g.point.y + g.dir.y * t));
        }
        let t = (b.point - a.point).cross(b.dir) / den;
        Some(a.point + a.dir * t)
    }
}

fn place(v: Point, cons: &[Constraint]) -> Point {
    match cons {
        [] => v,
        [c] => c.project(v),
        [a, b, ..] => a.intersect(b).unwrap_or_else(|| a.project(v)),
    }
}

/// Moves vertex `k` (start of segment `k`) to `to`, dragging adjacent cubic
/// handles by the same offset.
fn move_vertex(segs: &mut [CurveSegment], k: usize, to: Point) {
    let n = segs.len();
    let prev = (k + n - 1) % n;
    let delta = to - segs[k].start();
    if delta == Point::default() {
        return;
    }
    if let CurveSegment::Cubic(c) = &mut segs[k] {
        c[1] += delta;
    }
    if let CurveSegment::Cubic(c) = &mut segs[prev] {
        c[2] += delta;
    }
    segs[k].set_start(to);
    segs[prev].set_end(to);
}

/// Identifies a line segment: (layer, segment).
type LineId = (usize, usize);

#[derive(Debug, Clone, Copy)]
struct LineInfo {
    id: LineId,
    a: Point,
    b: Point,
}

impl LineInfo {
    fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    fn mid(&self) -> Point {
        (self.a + self.b) * 0.5
    }

    /// Undirected angle in `[0, pi)`.
    fn angle(&self) -> f64 {
        let d = self.b - self.a;
        let t = d.y.atan2(d.x);
        let t = if t < 0.0 { t + std::f64::consts::PI } else { t };
        if t >= std::f64::consts::PI {
            0.0
        } else {
            t
        }
    }
}

fn lines_of(doc: &ClipartDocument) -> Vec<LineInfo> {
    let mut out = Vec::new();
    for (li, layer) in doc.layers.iter().enumerate() {
        for (si, seg) in layer.path.segments().iter().enumerate() {
            if seg.kind() == SegmentKind::Line && seg.start() != seg.end() {
                out.push(LineInfo {
                    id: (li, si),
                    a: seg.start(),
                    b: seg.end(),
                });
            }
        }
    }
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn groups(&mut self, n: usize) -> Vec<Vec<usize>> {
        let mut map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = self.find(i);
            map.entry(r).or_default().push(i);
        }
        map.into_values().collect()
    }
}

fn adjacent(a: LineId, b: LineId, doc: &ClipartDocument) -> bool {
    if a.0 != b.0 {
        return false;
    }
    let n = doc.layers[a.0].path.len();
    (a.1 + 1) % n == b.1 || (b.1 + 1) % n == a.1
}

/// Applies per-line constraints to every affected vertex.
fn apply_constraints(doc: &ClipartDocument, cons: &[(LineId, Constraint)]) -> ClipartDocument {
    let mut out = doc.clone();
    for (li, layer) in doc.layers.iter().enumerate() {
        let n = layer.path.len();
        let mine: Vec<&(LineId, Constraint)> = cons.iter().filter(|(id, _)| id.0 == li).collect();
        if mine.is_empty() {
            continue;
        }
        let mut segs = layer.path.segments().to_vec();
        for k in 0..n {
            let prev = (k + n - 1) % n;
            let mut at: Vec<Constraint> = Vec::with_capacity(2);
            for (id, c) in &mine {
                if (id.1 == k || id.1 == prev) && !at.contains(c) {
                    at.push(*c);
                }
            }
            if at.is_empty() {
                continue;
            }
            let v = layer.path.segments()[k].start();
            move_vertex(&mut segs, k, place(v, &at));
        }
        if let Ok(p) = ClosedPath::new(segs) {
            out.layers[li].path = p;
        }
    }
    out
}

fn weighted_mean(items: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut w) = (0.0, 0.0);
    for (v, wt) in items {
        s += v * wt;
        w += wt;
    }
    s / w
}

/// Makes every line within `angle_tol` of horizontal or vertical exactly
/// axis-aligned. Chains of such lines sharing vertices get one common
/// coordinate, the length-weighted mean of their midpoints.
pub fn snap_axis_aligned(doc: &ClipartDocument, cfg: &RegularizeConfig) -> ClipartDocument {
    let tol = cfg.angle_tol.to_radians();
    let lines = lines_of(doc);
    let mut cons = Vec::new();
    for horizontal in [true, false] {
        let pick: Vec<LineInfo> = lines
            .iter()
            .filter(|l| {
                let d = l.b - l.a;
                let (along, across) = if horizontal { (d.x, d.y) } else { (d.y, d.x) };
                across.abs().atan2(along.abs()) < tol
            })
            .copied()
            .collect();
        let mut uf = UnionFind::new(pick.len());
        for i in 0..pick.len() {
            for j in i + 1..pick.len() {
                if adjacent(pick[i].id, pick[j].id, doc) {
                    uf.union(i, j);
                }
            }
        }
        for group in uf.groups(pick.len()) {
            let coord = |p: Point| if horizontal { p.y } else { p.x };
            let first = coord(pick[group[0]].a);
            let exact = group
                .iter()
                .all(|&i| coord(pick[i].a) == first && coord(pick[i].b) == first);
            let value = if exact {
                first
            } else {
                weighted_mean(group.iter().map(|&i| (coord(pick[i].mid()), pick[i].len())))
            };
            let c = if horizontal {
                Constraint::horizontal(value)
            } else {
                Constraint::vertical(value)
            };
            cons.extend(group.iter().map(|&i| (pick[i].id, c)));
        }
    }
    apply_constraints(doc, &cons)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if !d.is_finite() || d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][i] = b[r];
        }
        *slot = det(m) / d;
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Least-squares circle: algebraic fit followed by one Gauss-Newton step on
/// the geometric residuals. Returns `(center, radius)`.
pub fn fit_circle(points: &[Point]) -> Option<(Point, f64)> {
    if points.len() < 3 {
        return None;
    }
    // work relative to the centroid for conditioning
    let n = points.len() as f64;
    let m = points.iter().fold(Point::default(), |s, p| s + *p) * (1.0 / n);
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for p in points {
        let q = *p - m;
        let row = [q.x, q.y, 1.0];
        let rhs = -(q.x * q.x + q.y * q.y);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let [d, e, f] = solve3(ata, atb)?;
    let mut c = Point::new(-d / 2.0, -e / 2.0);
    let r2 = c.norm_sq() - f;
    if !(r2 > 0.0) {
        return None;
    }
    let mut r = r2.sqrt();
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for p in points {
        let q = *p - m;
        let dist = q.dist(c);
        if dist < 1e-12 {
            continue;
        }
        let res = dist - r;
        let row = [-(q.x - c.x) / dist, -(q.y - c.y) / dist, -1.0];
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] += row[i] * row[j];
            }
            jtr[i] -= row[i] * res;
        }
    }
    if let Some([dx, dy, dr]) = solve3(jtj, jtr) {
        if r + dr > 0.0 {
            c += Point::new(dx, dy);
            r += dr;
        }
    }
    Some((c + m, r))
}

/// Four-cubic circle starting at angle zero; `positive` selects the
/// traversal with positive signed area.
pub fn circle_path(center: Point, r: f64, positive: bool) -> ClosedPath {
    let k = KAPPA * r;
    let at = |x: f64, y: f64| center + Point::new(x, y);
    let segs = vec![
        CurveSegment::cubic(at(r, 0.0), at(r, k), at(k, r), at(0.0, r)),
        CurveSegment::cubic(at(0.0, r), at(-k, r), at(-r, k), at(-r, 0.0)),
        CurveSegment::cubic(at(-r, 0.0), at(-r, -k), at(-k, -r), at(0.0, -r)),
        CurveSegment::cubic(at(0.0, -r), at(k, -r), at(r, -k), at(r, 0.0)),
    ];
    let p = ClosedPath::new(segs).expect("circle segments are contiguous");
    if positive {
        p
    } else {
        p.reversed()
    }
}

fn paths_close(a: &ClosedPath, b: &ClosedPath, tol: f64) -> bool {
    let (pa, pb) = (a.control_points(), b.control_points());
    pa.len() == pb.len() && pa.iter().zip(&pb).all(|(x, y)| x.dist(*y) <= tol)
}

/// Center and radius if `path` is (within 1e-9) the output of
/// [`circle_path`].
pub fn as_circle(path: &ClosedPath) -> Option<(Point, f64)> {
    let segs = path.segments();
    if segs.len() != 4 || segs.iter().any(|s| s.kind() != SegmentKind::Cubic) {
        return None;
    }
    let c = segs.iter().fold(Point::default(), |s, x| s + x.start()) * 0.25;
    let r = segs[0].start().dist(c);
    if !(r > 0.0) {
        return None;
    }
    let tol = SAME_EPS * r.max(1.0);
    let positive = path.signed_area() > 0.0;
    paths_close(path, &circle_path(c, r, positive), tol).then_some((c, r))
}

/// Replaces every path whose samples stay within `arc_dist_tol` (mean) of
/// their best-fit circle by a four-cubic circle.
pub fn fit_arc_like(doc: &ClipartDocument, cfg: &RegularizeConfig) -> ClipartDocument {
    let mut out = doc.clone();
    for layer in &mut out.layers {
        if as_circle(&layer.path).is_some() {
            continue;
        }
        let Ok(samples) = sample_path(&layer.path, cfg.arc_samples.max(layer.path.len())) else {
            continue;
        };
        let Some((c, r)) = fit_circle(&samples.points) else {
            continue;
        };
        let mean_dev = samples.points.iter().map(|p| (p.dist(c) - r).abs()).sum::<f64>() / samples.points.len() as f64;
        if mean_dev < cfg.arc_dist_tol {
            layer.path = circle_path(c, r, layer.path.signed_area() >= 0.0);
        }
    }
    out
}

/// Moves circles whose centers nearly coincide onto their common mean
/// center. Two circles link when their center distance is below
/// `concentric_frac` times the longer bounding-box side of either one.
pub fn enforce_concentric(doc: &ClipartDocument, cfg: &RegularizeConfig) -> ClipartDocument {
    let circles: Vec<(usize, Point, f64)> = doc
        .layers
        .iter()
        .enumerate()
        .filter_map(|(i, l)| as_circle(&l.path).map(|(c, r)| (i, c, r)))
        .collect();
    let mut uf = UnionFind::new(circles.len());
    for i in 0..circles.len() {
        for j in i + 1..circles.len() {
            let side = 2.0 * circles[i].2.max(circles[j].2);
            if circles[i].1.dist(circles[j].1) < cfg.concentric_frac * side {
                uf.union(i, j);
            }
        }
    }
    let mut out = doc.clone();
    for group in uf.groups(circles.len()) {
        if group.len() < 2 {
            continue;
        }
        let c0 = circles[group[0]].1;
        if group.iter().all(|&i| circles[i].1.dist(c0) <= SAME_EPS) {
            continue;
        }
        let center = group.iter().fold(Point::default(), |s, &i| s + circles[i].1) * (1.0 / group.len() as f64);
        for &i in &group {
            let (li, _, r) = circles[i];
            let positive = doc.layers[li].path.signed_area() > 0.0;
            out.layers[li].path = circle_path(center, r, positive);
        }
    }
    out
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % std::f64::consts::PI;
    d.min(std::f64::consts::PI - d)
}

/// Makes lines whose directions differ by less than `angle_tol` exactly
/// parallel. Axis-aligned lines and clusters that are already parallel are
/// frozen. Axis-aligned lines, when present in a cluster,
/// fix its direction; otherwise the direction is the length-weighted
/// circular mean.
pub fn enforce_parallel(doc: &ClipartDocument, cfg: &RegularizeConfig) -> ClipartDocument {
    let tol = cfg.angle_tol.to_radians();
    let lines = lines_of(doc);
    let is_anchor = |l: &LineInfo| l.a.x == l.b.x || l.a.y == l.b.y;
    let angles: Vec<f64> = lines.iter().map(LineInfo::angle).collect();
    let mut uf = UnionFind::new(lines.len());
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if angle_diff(angles[i], angles[j]) < tol {
                uf.union(i, j);
            }
        }
    }
    let mut cons: Vec<(LineId, Constraint)> = Vec::new();
    let mut frozen: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| is_anchor(l))
        .map(|(i, _)| i)
        .collect();
    let mut active = false;
    for group in uf.groups(lines.len()) {
        if group.len() < 2 {
            continue;
        }
        let spread = group
            .iter()
            .map(|&i| angle_diff(angles[i], angles[group[0]]))
            .fold(0.0, f64::max);
        if spread <= SAME_EPS {
            frozen.extend(group.iter().filter(|&&i| !is_anchor(&lines[i])));
            continue;
        }
        let anchor = group
            .iter()
            .filter(|&&i| is_anchor(&lines[i]))
            .max_by(|&&a, &&b| lines[a].len().total_cmp(&lines[b].len()));
        let dir = match anchor {
            Some(&a) if lines[a].a.y == lines[a].b.y => Point::new(1.0, 0.0),
            Some(_) => Point::new(0.0, 1.0),
            None => {
                let (mut s, mut c) = (0.0, 0.0);
                for &i in &group {
                    let w = lines[i].len();
                    s += w * (2.0 * angles[i]).sin();
                    c += w * (2.0 * angles[i]).cos();
                }
                let t = 0.5 * s.atan2(c);
                Point::new(t.cos(), t.sin())
            }
        };
        let movable: Vec<usize> = group.iter().copied().filter(|&i| !is_anchor(&lines[i])).collect();
        if movable.is_empty() {
            continue;
        }
        active = true;
        // collinear chains within the cluster share one constraint line
        let mut chain = UnionFind::new(movable.len());
        for a in 0..movable.len() {
            for b in a + 1..movable.len() {
                if adjacent(lines[movable[a]].id, lines[movable[b]].id, doc) {
                    chain.union(a, b);
                }
            }
        }
        for sub in chain.groups(movable.len()) {
            let w: f64 = sub.iter().map(|&k| lines[movable[k]].len()).sum();
            let p = sub.iter().fold(Point::default(), |s, &k| {
                s + lines[movable[k]].mid() * lines[movable[k]].len()
            }) * (1.0 / w);
            let c = Constraint { point: p, dir };
            cons.extend(sub.iter().map(|&k| (lines[movable[k]].id, c)));
        }
    }
    if !active {
        return doc.clone();
    }
    // already satisfied lines keep their direction
    for &i in &frozen {
        let l = &lines[i];
        let c = if l.a.y == l.b.y {
            Constraint::horizontal(l.a.y)
        } else if l.a.x == l.b.x {
            Constraint::vertical(l.a.x)
        } else {
            Constraint {
                point: l.a,
                dir: (l.b - l.a) * (1.0 / l.len()),
            }
        };
        cons.push((l.id, c));
    }
    apply_constraints(doc, &cons)
}

/// One pass of all four rules in order.
pub fn regularize_once(doc: &ClipartDocument, cfg: &RegularizeConfig) -> ClipartDocument {
    let d = snap_axis_aligned(doc, cfg);
    let d = fit_arc_like(&d, cfg);
    let d = enforce_concentric(&d, cfg);
    enforce_parallel(&d, cfg)
}

/// Applies the rules until the document no longer changes.
pub fn regularize(doc: &ClipartDocument, cfg: &RegularizeConfig) -> ClipartDocument {
    let mut cur = doc.clone();
    for _ in 0..MAX_ROUNDS {
        let next = regularize_once(&cur, cfg);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{FillColor, Layer};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn doc_of(paths: Vec<ClosedPath>) -> ClipartDocument {
        let mut d = ClipartDocument::new(100.0, 100.0);
        for path in paths {
            d.push(Layer::new(path, FillColor::BLACK));
        }
        d
    }

    fn tri_with_edge_at(deg: f64) -> ClosedPath {
        let t = deg.to_radians();
        let a = p(20.0, 50.0);
        let b = a + p(t.cos(), t.sin()) * 30.0;
        ClosedPath::polygon(&[a, b, p(35.0, 90.0)]).unwrap()
    }

    fn first_edge_angle(doc: &ClipartDocument) -> f64 {
        let s = &doc.layers[0].path.segments()[0];
        let d = s.end() - s.start();
        d.y.atan2(d.x).to_degrees()
    }

    #[test]
    fn axis_snap_threshold() {
        let cfg = RegularizeConfig::default();
        let snapped = snap_axis_aligned(&doc_of(vec![tri_with_edge_at(5.0)]), &cfg);
        assert_eq!(first_edge_angle(&snapped), 0.0);
        let len = 30.0;
        let before = doc_of(vec![tri_with_edge_at(5.0)]);
        for (a, b) in before.layers[0]
            .path
            .control_points()
            .iter()
            .zip(snapped.layers[0].path.control_points())
        {
            assert!(a.dist(b) <= len * 10f64.to_radians().sin() / 2.0 + 1e-12);
        }
        for deg in [10.5, 45.0] {
            let d = doc_of(vec![tri_with_edge_at(deg)]);
            assert_eq!(snap_axis_aligned(&d, &cfg), d);
        }
        let again = snap_axis_aligned(&snapped, &cfg);
        assert_eq!(again, snapped);
    }

    #[test]
    fn near_rectangle_gets_exact_corners() {
        let rect = ClosedPath::polygon(&[p(10.0, 10.0), p(60.0, 12.0), p(61.0, 40.0), p(9.0, 39.0)]).unwrap();
        let out = snap_axis_aligned(&doc_of(vec![rect]), &RegularizeConfig::default());
        let v: Vec<Point> = out.layers[0].path.segments().iter().map(|s| s.start()).collect();
        assert_eq!(v[0].y, v[1].y);
        assert_eq!(v[2].y, v[3].y);
        assert_eq!(v[1].x, v[2].x);
        assert_eq!(v[3].x, v[0].x);
    }

    #[test]
    fn circle_fit_recovers_polygon_circle() {
        let pts: Vec<Point> = (0..64)
            .map(|i| {
                let t = i as f64 / 64.0 * std::f64::consts::TAU;
                p(40.0 + 10.0 * t.cos(), 30.0 + 10.0 * t.sin())
            })
            .collect();
        let (c, r) = fit_circle(&pts).unwrap();
        assert!(c.dist(p(40.0, 30.0)) < 1e-9);
        assert!((r - 10.0).abs() < 1e-9);
        let d = doc_of(vec![ClosedPath::polygon(&pts).unwrap()]);
        let out = fit_arc_like(&d, &RegularizeConfig::default());
        let (c2, r2) = as_circle(&out.layers[0].path).unwrap();
        assert!(c2.dist(p(40.0, 30.0)) < 0.05 && (r2 - 10.0).abs() < 0.1);
    }

    #[test]
    fn square_is_not_an_arc_and_circle_is_fixed() {
        let cfg = RegularizeConfig::default();
        // mean deviation of a square from its best circle is about 0.0538 * side
        let square = |s: f64| {
            doc_of(vec![
                ClosedPath::polygon(&[p(0., 0.), p(s, 0.), p(s, s), p(0., s)]).unwrap()
            ])
        };
        let big = square(10.0);
        assert_eq!(fit_arc_like(&big, &cfg), big);
        assert!(as_circle(&fit_arc_like(&square(8.0), &cfg).layers[0].path).is_some());
        let circ = doc_of(vec![circle_path(p(20.0, 20.0), 7.0, true)]);
        assert_eq!(fit_arc_like(&circ, &cfg), circ);
    }

    #[test]
    fn concentric_threshold() {
        let cfg = RegularizeConfig::default();
        let near = doc_of(vec![
            circle_path(p(50., 50.), 10.0, true),
            circle_path(p(51., 50.), 6.0, true),
        ]);
        let out = enforce_concentric(&near, &cfg);
        let (c0, _) = as_circle(&out.layers[0].path).unwrap();
        let (c1, r1) = as_circle(&out.layers[1].path).unwrap();
        assert!(c0.dist(c1) < 1e-9 && c0.dist(p(50.5, 50.0)) < 1e-9);
        assert!((r1 - 6.0).abs() < 1e-9);
        let far = doc_of(vec![
            circle_path(p(50., 50.), 10.0, true),
            circle_path(p(55., 50.), 10.0, true),
        ]);
        assert_eq!(enforce_concentric(&far, &cfg), far);
    }

    #[test]
    fn parallel_lines_meet_at_weighted_mean() {
        let cfg = RegularizeConfig::default();
        let tri = |base: Point, deg: f64| {
            let t = deg.to_radians();
            ClosedPath::polygon(&[base, base + p(t.cos(), t.sin()) * 20.0, base + p(-15.0, 5.0)]).unwrap()
        };
        let d = doc_of(vec![tri(p(20., 20.), 58.0), tri(p(60., 20.), 62.0)]);
        let out = enforce_parallel(&d, &cfg);
        for l in 0..2 {
            let s = &out.layers[l].path.segments()[0];
            let e = s.end() - s.start();
            assert!((e.y.atan2(e.x).to_degrees() - 60.0).abs() < 1e-9);
        }
        let single = doc_of(vec![ClosedPath::polygon(&[p(0., 0.), p(30., 10.), p(5., 40.)]).unwrap()]);
        assert_eq!(enforce_parallel(&single, &cfg), single);
    }

    #[test]
    fn regularize_is_idempotent_and_empty_safe() {
        let cfg = RegularizeConfig::default();
        let empty = ClipartDocument::new(10.0, 10.0);
        assert_eq!(regularize(&empty, &cfg), empty);
        let d = doc_of(vec![
            ClosedPath::polygon(&[p(10.0, 10.0), p(60.0, 12.0), p(61.0, 40.0), p(9.0, 39.0)]).unwrap(),
            tri_with_edge_at(33.0),
            circle_path(p(70., 70.), 10.0, true),
        ]);
        let once = regularize(&d, &cfg);
        assert_eq!(regularize(&once, &cfg), once);
    }
}
