//! Random closed paths and random layered canvases for synthetic corpora.
//!
//! Paths are grown one curve at a time; each candidate curve is rejected if
//! its polyline touches itself or any earlier curve. Symmetric paths are made
//! by cutting a random path with an axis through its bounding-box center,
//! keeping the longer side and appending its mirror image.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::document::{ClipartDocument, FillColor, Layer};
use crate::error::ImageIoError;
use crate::geometry::{segments_intersect, ClosedPath, CurveSegment, Point, SymmetryAxis, DEFAULT_POLY_SAMPLES};
use crate::image_io::encode_png;
use crate::raster::render_document;
use crate::svg_io::write_svg;

pub const CURVE_RETRIES: usize = 64;
pub const PATH_RESTARTS: usize = 1000;
const INSET: f64 = 0.08;
const MIN_AREA_FRAC: f64 = 0.02;
const GRID_STEPS: f64 = 1e6;
/// Minimum turning gap, in degrees, between a segment and the reversed
/// previous one at a shared vertex.
const SPIKE_DEG: f64 = 15.0;
const FINAL_POLY_SAMPLES: usize = 64;
const END_CHORD: f64 = 1.0 / 256.0;

#[derive(Debug, Error)]
pub enum PathGenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("no valid path after {restarts} restarts")]
    Exhausted { restarts: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Image(#[from] ImageIoError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorMode {
    Random,
    Fixed(FillColor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Inclusive range of curves per path.
    pub curve_count: (usize, usize),
    pub symmetric_prob: f64,
    pub width: f64,
    pub height: f64,
    pub seed: u64,
    pub color_mode: ColorMode,
    /// Probability that a generated curve is a straight line.
    pub line_prob: f64,
    /// Inclusive range of layers per corpus item.
    pub layers: (usize, usize),
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            curve_count: (3, 6),
            symmetric_prob: 0.5,
            width: 64.0,
            height: 64.0,
            seed: 0,
            color_mode: ColorMode::Random,
            line_prob: 0.5,
            layers: (1, 1),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), PathGenError> {
        let bad = |m: &str| Err(PathGenError::InvalidConfig(m.to_string()));
        let (lo, hi) = self.curve_count;
        if lo < 1 || lo > hi {
            return bad("curve count range must satisfy 1 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.symmetric_prob) || !(0.0..=1.0).contains(&self.line_prob) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.symmetric_prob > 0.0 && even_counts(self.curve_count).is_empty() {
            return bad("symmetric paths need an even curve count of at least 4 in range");
        }
        if !(self.width.is_finite() && self.height.is_finite() && self.width >= 1.0 && self.height >= 1.0) {
            return bad("canvas must be at least 1x1");
        }
        if self.layers.0 < 1 || self.layers.0 > self.layers.1 {
            return bad("layer range must satisfy 1 <= min <= max");
        }
        Ok(())
    }

    fn inset_box(&self) -> (Point, Point) {
        let (mx, my) = (self.width * INSET, self.height * INSET);
        (Point::new(mx, my), Point::new(self.width - mx, self.height - my))
    }
}

// Symmetric paths have 2m curves with m >= 2.
fn even_counts((lo, hi): (usize, usize)) -> Vec<usize> {
    (lo.max(4)..=hi).filter(|c| c % 2 == 0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPath {
    pub path: ClosedPath,
    pub axis: Option<SymmetryAxis>,
}

fn snap(p: Point) -> Point {
    let q = |v: f64| (v * GRID_STEPS).round() / GRID_STEPS;
    Point::new(q(p.x), q(p.y))
}

fn random_point<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (Point, Point)) -> Point {
    Point::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y))
}

fn random_segment<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig, from: Point, to: Point) -> CurveSegment {
    if rng.random_bool(cfg.line_prob) {
        CurveSegment::line(from, to)
    } else {
        let b = cfg.inset_box();
        let c1 = random_point(rng, b);
        let c2 = random_point(rng, b);
        CurveSegment::cubic(from, c1, c2, to)
    }
}

fn segment_polyline(seg: &CurveSegment) -> Vec<Point> {
    let m = match seg.kind() {
        crate::geometry::SegmentKind::Line => 1,
        crate::geometry::SegmentKind::Cubic => DEFAULT_POLY_SAMPLES,
    };
    let mut ts: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64).collect();
    if m > 1 {
        // short end chords so the spike test sees the true end tangents
        ts.insert(1, END_CHORD);
        ts.insert(ts.len() - 1, 1.0 - END_CHORD);
    }
    ts.into_iter().map(|t| seg.point_at(t)).collect()
}

// Near-reversal at a shared vertex creates a zero-width spike.
fn is_spike(incoming: Point, outgoing: Point) -> bool {
    let (a, b) = (incoming * -1.0, outgoing);
    let (na, nb) = (a.norm(), b.norm());
    if na < 1e-9 || nb < 1e-9 {
        return true;
    }
    a.dot(b) / (na * nb) > SPIKE_DEG.to_radians().cos()
}

fn open_polyline_self_intersects(pl: &[Point]) -> bool {
    let e = pl.len().saturating_sub(1);
    for i in 0..e {
        for j in (i + 2)..e {
            if segments_intersect(pl[i], pl[i + 1], pl[j], pl[j + 1]) {
                return true;
            }
        }
    }
    false
}

/// Whether `cand` can be appended after `prev`. With `closing`, the candidate
/// also ends at the first curve's start.
fn accepts(cand: &[Point], prev: &[Vec<Point>], closing: bool) -> bool {
    if open_polyline_self_intersects(cand) {
        return false;
    }
    let ce = cand.len() - 1;
    let n = prev.len();
    for (k, pl) in prev.iter().enumerate() {
        let pe = pl.len() - 1;
        for i in 0..pe {
            for j in 0..ce {
                let at_join = k + 1 == n && i + 1 == pe && j == 0;
                let at_close = closing && k == 0 && i == 0 && j + 1 == ce;
                if at_join || at_close {
                    continue;
                }
                if segments_intersect(pl[i], pl[i + 1], cand[j], cand[j + 1]) {
                    return false;
                }
            }
        }
    }
    if let Some(last) = prev.last() {
        let l = last.len();
        if is_spike(last[l - 1] - last[l - 2], cand[1] - cand[0]) {
            return false;
        }
    }
    if closing {
        let first = &prev[0];
        if is_spike(cand[ce] - cand[ce - 1], first[1] - first[0]) {
            return false;
        }
    }
    true
}

fn grow_path<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig, count: usize) -> Option<ClosedPath> {
    let bx = cfg.inset_box();
    let start = random_point(rng, bx);
    let mut cur = start;
    let mut segs = Vec::with_capacity(count);
    let mut lines: Vec<Vec<Point>> = Vec::with_capacity(count);
    for i in 0..count {
        let closing = i + 1 == count;
        let mut placed = false;
        for _ in 0..CURVE_RETRIES {
            let end = if closing { start } else { random_point(rng, bx) };
            let seg = random_segment(rng, cfg, cur, end);
            let pl = segment_polyline(&seg);
            // a single closing curve has no earlier curve to join
            let ok = if count == 1 {
                !open_polyline_self_intersects(&pl)
            } else {
                accepts(&pl, &lines, closing)
            };
            if ok {
                cur = end;
                segs.push(seg);
                lines.push(pl);
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    ClosedPath::new(segs).ok()
}

fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let l = d.norm_sq();
    let t = if l > 0.0 {
        ((p - a).dot(d) / l).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.dist(a + d * t)
}

fn segment_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Upper bound on the distance between a segment and its uniform polyline
/// with `m` chords.
fn sagitta_bound(seg: &CurveSegment, m: usize) -> f64 {
    match seg {
        CurveSegment::Line(_) => 0.0,
        CurveSegment::Cubic(c) => {
            let d2 = |i: usize| (c[i + 2] - c[i + 1] * 2.0 + c[i]).norm();
            6.0 * d2(0).max(d2(1)) / (8.0 * (m * m) as f64)
        }
    }
}

/// True when non-adjacent chords of the fine polyline stay farther apart than
/// the combined sagitta bounds, so the curves themselves cannot touch.
fn has_clearance(path: &ClosedPath) -> bool {
    let m = FINAL_POLY_SAMPLES;
    let mut edges: Vec<(Point, Point, f64)> = Vec::new();
    for seg in path.segments() {
        let k = if seg.kind() == crate::geometry::SegmentKind::Line {
            1
        } else {
            m
        };
        let s = sagitta_bound(seg, m);
        edges.extend((0..k).map(|j| {
            (
                seg.point_at(j as f64 / k as f64),
                seg.point_at((j + 1) as f64 / k as f64),
                s,
            )
        }));
    }
    let n = edges.len();
    let boxes: Vec<(Point, Point)> = edges
        .iter()
        .map(|&(a, b, s)| {
            (
                Point::new(a.x.min(b.x) - s, a.y.min(b.y) - s),
                Point::new(a.x.max(b.x) + s, a.y.max(b.y) + s),
            )
        })
        .collect();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let ((li, hi), (lj, hj)) = (boxes[i], boxes[j]);
            if li.x > hj.x || lj.x > hi.x || li.y > hj.y || lj.y > hi.y {
                continue;
            }
            let (a, b, sa) = edges[i];
            let (c, d, sc) = edges[j];
            if segment_dist(a, b, c, d) <= sa + sc {
                return false;
            }
        }
    }
    true
}

fn finalize(path: ClosedPath, cfg: &GenConfig) -> Option<ClosedPath> {
    let path = path.map_points(snap);
    let inside = path
        .control_points()
        .iter()
        .all(|p| p.x >= 0.0 && p.y >= 0.0 && p.x <= cfg.width && p.y <= cfg.height);
    let area = path.signed_area();
    let (lo, hi) = cfg.inset_box();
    let min_area = MIN_AREA_FRAC * (hi.x - lo.x) * (hi.y - lo.y);
    if !inside || area.abs() < min_area || !has_clearance(&path) {
        return None;
    }
    Some(if area < 0.0 { path.reversed() } else { path })
}

/// Parameters where the path crosses the axis, found from sign changes of
/// the signed distance and refined by bisection.
fn axis_crossings(path: &ClosedPath, axis: &SymmetryAxis) -> Vec<(usize, f64)> {
    const SCAN: usize = 64;
    let mut out = Vec::new();
    for (k, seg) in path.segments().iter().enumerate() {
        let f = |t: f64| axis.side(seg.point_at(t));
        for j in 0..SCAN {
            let (mut a, mut b) = (j as f64 / SCAN as f64, (j + 1) as f64 / SCAN as f64);
            let (mut fa, fb) = (f(a), f(b));
            if fa == 0.0 {
                out.push((k, a));
                continue;
            }
            if fa * fb >= 0.0 {
                continue;
            }
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            out.push((k, 0.5 * (a + b)));
        }
    }
    out
}

fn chain_length(chain: &[CurveSegment]) -> f64 {
    chain
        .iter()
        .map(|s| segment_polyline(s).windows(2).map(|w| w[0].dist(w[1])).sum::<f64>())
        .sum()
}

/// The two open chains obtained by cutting `path` at two parameters.
fn split_at(path: &ClosedPath, c0: (usize, f64), c1: (usize, f64)) -> (Vec<CurveSegment>, Vec<CurveSegment>) {
    let segs = path.segments();
    let k = segs.len();
    let ((a, ta), (b, tb)) = (c0, c1);
    if a == b {
        let (head, rest) = segs[a].split(ta);
        let s = (tb - ta) / (1.0 - ta);
        let (mid, tail) = rest.split(s);
        let inner = vec![mid];
        let mut outer = vec![tail];
        outer.extend((1..k).map(|i| segs[(a + i) % k]));
        outer.push(head);
        return (inner, outer);
    }
    let (a_head, a_tail) = segs[a].split(ta);
    let (b_head, b_tail) = segs[b].split(tb);
    let mut first = vec![a_tail];
    first.extend(segs[a + 1..b].iter().cloned());
    first.push(b_head);
    let mut second = vec![b_tail];
    second.extend((b + 1..k + a).map(|i| segs[i % k]));
    second.push(a_head);
    (first, second)
}

fn project(axis: &SymmetryAxis, p: Point) -> Point {
    let d = axis.direction();
    axis.origin() + d * (p - axis.origin()).dot(d)
}

fn symmetric_path<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig, half: usize) -> Option<GeneratedPath> {
    // chain lengths of the two sides sum to base + 2
    let base_count = rng.random_range(half.max(2)..=(2 * half - 2).max(half.max(2)));
    let base = grow_path(rng, cfg, base_count)?;
    let (lo, hi) = base.bbox();
    let center = (lo + hi) * 0.5;
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    let axis = SymmetryAxis::from_angle(center, angle).ok()?;
    let cross = axis_crossings(&base, &axis);
    if cross.len() != 2 || cross.iter().any(|&(_, t)| !(1e-3..=1.0 - 1e-3).contains(&t)) {
        return None;
    }
    let (c0, c1) = (cross[0], cross[1]);
    if c0.0 == c1.0 && c1.1 - c0.1 < 1e-3 {
        return None;
    }
    let (first, second) = split_at(&base, c0, c1);
    let mut chain = if chain_length(&first) >= chain_length(&second) {
        first
    } else {
        second
    };
    if chain.len() != half {
        return None;
    }
    let s = project(&axis, chain[0].start());
    let e = project(&axis, chain[half - 1].end());
    chain[0].set_start(s);
    chain[half - 1].set_end(e);
    let mut segs = chain.clone();
    segs.extend(
        chain
            .iter()
            .rev()
            .map(|seg| seg.reversed().map_points(|p| axis.reflect(p))),
    );
    // points on the axis reflect onto themselves up to rounding
    let n = segs.len();
    segs[half].set_start(e);
    segs[n - 1].set_end(s);
    let path = finalize(ClosedPath::new(segs).ok()?, cfg)?;
    Some(GeneratedPath { path, axis: Some(axis) })
}

/// One random closed path, symmetric with probability `symmetric_prob`.
pub fn random_closed_path<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<GeneratedPath, PathGenError> {
    cfg.validate()?;
    let symmetric = cfg.symmetric_prob > 0.0 && rng.random_bool(cfg.symmetric_prob);
    if symmetric {
        let evens = even_counts(cfg.curve_count);
        let total = evens[rng.random_range(0..evens.len())];
        // a symmetric attempt succeeds far less often than a plain one
        for _ in 0..PATH_RESTARTS * 16 {
            if let Some(g) = symmetric_path(rng, cfg, total / 2) {
                return Ok(g);
            }
        }
    } else {
        let count = rng.random_range(cfg.curve_count.0..=cfg.curve_count.1);
        for _ in 0..PATH_RESTARTS {
            if let Some(path) = grow_path(rng, cfg, count).and_then(|p| finalize(p, cfg)) {
                return Ok(GeneratedPath { path, axis: None });
            }
        }
    }
    Err(PathGenError::Exhausted {
        restarts: PATH_RESTARTS,
    })
}

fn random_color<R: Rng + ?Sized>(rng: &mut R, mode: ColorMode) -> FillColor {
    match mode {
        ColorMode::Fixed(c) => c,
        ColorMode::Random => FillColor::from_rgb8(rng.random(), rng.random(), rng.random()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCanvas {
    pub doc: ClipartDocument,
    /// Symmetry axis of each layer, if it was generated symmetric.
    pub axes: Vec<Option<SymmetryAxis>>,
    /// Index of the topmost layer.
    pub top: usize,
}

/// A canvas of `k` independent random layers.
pub fn random_canvas<R: Rng + ?Sized>(cfg: &GenConfig, k: usize, rng: &mut R) -> Result<GeneratedCanvas, PathGenError> {
    if k == 0 {
        return Err(PathGenError::InvalidConfig("path count must be at least 1".into()));
    }
    let mut doc = ClipartDocument::new(cfg.width, cfg.height);
    let mut axes = Vec::with_capacity(k);
    for _ in 0..k {
        let g = random_closed_path(cfg, rng)?;
        let color = random_color(rng, cfg.color_mode);
        doc.push(Layer::new(g.path, color));
        axes.push(g.axis);
    }
    Ok(GeneratedCanvas { doc, axes, top: k - 1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub index: usize,
    pub seed: u64,
    pub axis: Option<SymmetryAxis>,
    pub k_curves: usize,
    pub color: FillColor,
}

impl ManifestRow {
    pub fn to_tsv(&self) -> String {
        let (sym, origin, angle) = match &self.axis {
            Some(a) => (
                1,
                format!("{:.6},{:.6}", a.origin().x, a.origin().y),
                format!("{:.9}", a.angle()),
            ),
            None => (0, "-".into(), "-".into()),
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.index,
            self.seed,
            sym,
            origin,
            angle,
            self.k_curves,
            self.color.to_hex()
        )
    }
}

pub const MANIFEST_HEADER: &str = "# index\tseed\tsymmetric\taxis_origin\taxis_angle\tk_curves\tcolor_hex";

pub fn manifest_tsv(rows: &[ManifestRow]) -> String {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_tsv());
    }
    out
}

/// A rendered corpus item; the manifest row describes the top layer.
#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub row: ManifestRow,
    pub canvas: GeneratedCanvas,
    pub png: Vec<u8>,
    pub svg: Vec<u8>,
}

pub fn item_seed(base: u64, index: usize) -> u64 {
    base ^ index as u64
}

/// Generates item `index` from its own derived seed, independent of any other
/// item.
pub fn corpus_item(cfg: &GenConfig, index: usize) -> Result<CorpusItem, PathGenError> {
    let seed = item_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(cfg.layers.0..=cfg.layers.1);
    let canvas = random_canvas(cfg, k, &mut rng)?;
    let top = &canvas.doc.layers[canvas.top];
    let row = ManifestRow {
        index,
        seed,
        axis: canvas.axes[canvas.top],
        k_curves: top.path.len(),
        color: top.color,
    };
    let img = render_document(&canvas.doc, cfg.width.round() as usize, cfg.height.round() as usize);
    Ok(CorpusItem {
        row,
        png: encode_png(&img)?,
        svg: write_svg(&canvas.doc),
        canvas,
    })
}

/// Subdirectory of `out_dir` an item belongs to under an optional
/// train/test split.
pub fn item_dir(out_dir: &Path, index: usize, train: Option<usize>) -> PathBuf {
    match train {
        Some(t) if index < t => out_dir.join("train"),
        Some(_) => out_dir.join("test"),
        None => out_dir.to_path_buf(),
    }
}

pub fn write_item(dir: &Path, item: &CorpusItem) -> Result<(), PathGenError> {
    let stem = format!("{:05}", item.row.index);
    fs::write(dir.join(format!("{stem}.png")), &item.png)?;
    fs::write(dir.join(format!("{stem}.svg")), &item.svg)?;
    Ok(())
}

/// Writes the manifests for `rows` (sorted by index) into each split
/// directory and returns the written manifest paths.
pub fn write_manifests(
    out_dir: &Path,
    rows: &[ManifestRow],
    train: Option<usize>,
) -> Result<Vec<PathBuf>, PathGenError> {
    let mut groups: Vec<(PathBuf, Vec<ManifestRow>)> = Vec::new();
    for r in rows {
        let dir = item_dir(out_dir, r.index, train);
        match groups.iter_mut().find(|(d, _)| *d == dir) {
            Some((_, g)) => g.push(r.clone()),
            None => groups.push((dir, vec![r.clone()])),
        }
    }
    let mut written = Vec::new();
    for (dir, g) in groups {
        let p = dir.join("manifest.tsv");
        fs::write(&p, manifest_tsv(&g))?;
        written.push(p);
    }
    Ok(written)
}

/// Generates `count` items into `out_dir`. With `train = Some(t)` the first
/// `t` items go to `train/` and the rest to `test/`.
pub fn emit_corpus(
    cfg: &GenConfig,
    count: usize,
    out_dir: &Path,
    train: Option<usize>,
) -> Result<Vec<ManifestRow>, PathGenError> {
    cfg.validate()?;
    prepare_dirs(out_dir, count, train)?;
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let item = corpus_item(cfg, i)?;
        write_item(&item_dir(out_dir, i, train), &item)?;
        rows.push(item.row);
    }
    write_manifests(out_dir, &rows, train)?;
    Ok(rows)
}

pub fn prepare_dirs(out_dir: &Path, count: usize, train: Option<usize>) -> Result<(), PathGenError> {
    if let Some(t) = train {
        if t > count {
            return Err(PathGenError::InvalidConfig(format!(
                "train split {t} exceeds corpus size {count}"
            )));
        }
        fs::create_dir_all(out_dir.join("train"))?;
        fs::create_dir_all(out_dir.join("test"))?;
    } else {
        fs::create_dir_all(out_dir)?;
    }
    Ok(())
}
