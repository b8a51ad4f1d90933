//! Rasterization and compositing.
//!
//! Hard masks are exact nonzero-winding coverage of a dense polygonization,
//! box-filtered over a regular supersample grid. The soft rasterizer computes
//! coverage as `sigmoid(-sdf / bandwidth)` where `sdf` is the signed distance
//! from a sample to the polygonized boundary (negative inside), which makes
//! every pixel a smooth function of the path's control points.

use crate::document::{ClipartDocument, FillColor};
use crate::error::RasterError;
use crate::geometry::{ClosedPath, CurveSegment, Point};

/// Polygon samples per cubic segment for hard masks.
pub const HARD_CUBIC_SAMPLES: usize = 32;
/// Polygon samples per cubic segment for the soft rasterizer.
pub const SOFT_CUBIC_SAMPLES: usize = 16;
pub const DEFAULT_SUPERSAMPLE: usize = 4;
/// Samples farther than this many bandwidths outside the path's bounding box
/// get zero coverage without a distance query (sigmoid(-30) < 1e-13).
const SOFT_CUTOFF: f64 = 30.0;

/// Row-major image with 1 or 3 channels of values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl RasterImage {
    /// Image filled with a constant per-channel value.
    pub fn filled(width: usize, height: usize, value: &[f64]) -> Result<Self, RasterError> {
        let channels = value.len();
        check_dims(width, height, channels)?;
        let mut data = Vec::with_capacity(width * height * channels);
        for _ in 0..width * height {
            data.extend(value.iter().map(|v| v.clamp(0.0, 1.0)));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn white(width: usize, height: usize) -> Self {
        Self::filled(width, height, &[1.0, 1.0, 1.0]).expect("white canvas needs positive size")
    }

    /// Wraps raw data, clamping every value into `[0, 1]`.
    pub fn from_data(width: usize, height: usize, channels: usize, mut data: Vec<f64>) -> Result<Self, RasterError> {
        check_dims(width, height, channels)?;
        if data.len() != width * height * channels {
            return Err(RasterError::BadDimensions {
                width,
                height,
                channels,
            });
        }
        for v in &mut data {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    /// Mean absolute difference over all pixels and channels.
    pub fn mean_abs_diff(&self, other: &RasterImage) -> Result<f64, RasterError> {
        same_shape(self, other)?;
        let sum: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).sum();
        Ok(sum / self.data.len() as f64)
    }
}

fn check_dims(width: usize, height: usize, channels: usize) -> Result<(), RasterError> {
    if width == 0 || height == 0 || !(channels == 1 || channels == 3) {
        return Err(RasterError::BadDimensions {
            width,
            height,
            channels,
        });
    }
    Ok(())
}

fn same_shape(a: &RasterImage, b: &RasterImage) -> Result<(), RasterError> {
    if a.shape() != b.shape() {
        return Err(RasterError::ShapeMismatch(a.shape(), b.shape()));
    }
    Ok(())
}

/// Per-pixel coverage in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl MaskImage {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

fn flatten(path: &ClosedPath, cubic_samples: usize) -> Vec<Point> {
    let mut out = Vec::new();
    for seg in path.segments() {
        let m = match seg {
            CurveSegment::Line(_) => 1,
            CurveSegment::Cubic(_) => cubic_samples,
        };
        out.extend((0..m).map(|j| seg.point_at(j as f64 / m as f64)));
    }
    out
}

/// Edge crossings of the horizontal line at `y` as `(x, winding delta)`,
/// sorted by `x`. Edges are half-open in y so shared vertices count once.
fn scanline_crossings(poly: &[Point], y: f64, out: &mut Vec<(f64, i32)>) {
    out.clear();
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let (dir, lo, hi) = if a.y < b.y {
            (1, a, b)
        } else if b.y < a.y {
            (-1, b, a)
        } else {
            continue;
        };
        if y >= lo.y && y < hi.y {
            let x = lo.x + (y - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
            out.push((x, dir));
        }
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
}

/// Nonzero-winding coverage of a polygon, box-filtered from an `s` x `s`
/// grid of sample points per pixel.
pub fn polygon_coverage(poly: &[Point], width: usize, height: usize, s: usize) -> MaskImage {
    let s = s.max(1);
    let mut counts = vec![0u32; width * height];
    let mut crossings = Vec::new();
    let sub_w = (width * s) as i64;
    for row in 0..height * s {
        let y = (row as f64 + 0.5) / s as f64;
        scanline_crossings(poly, y, &mut crossings);
        let py = row / s;
        let mut winding = 0;
        for w in crossings.windows(2) {
            winding += w[0].1;
            if winding == 0 {
                continue;
            }
            // sample columns j with (j + 0.5) / s in [x0, x1)
            let j0 = ((w[0].0 * s as f64 - 0.5).ceil() as i64).max(0);
            let j1 = ((w[1].0 * s as f64 - 0.5).ceil() as i64).min(sub_w);
            for j in j0..j1 {
                counts[py * width + j as usize / s] += 1;
            }
        }
    }
    let denom = (s * s) as f64;
    MaskImage {
        width,
        height,
        data: counts.into_iter().map(|c| f64::from(c) / denom).collect(),
    }
}

/// Hard coverage mask of a closed path (nonzero winding, box filter).
pub fn rasterize_mask(path: &ClosedPath, width: usize, height: usize, supersample: usize) -> MaskImage {
    polygon_coverage(&flatten(path, HARD_CUBIC_SAMPLES), width, height, supersample)
}

/// Paints `color` through `mask` over `prev`: `prev * (1 - m) + color * m`.
pub fn composite(prev: &RasterImage, mask: &MaskImage, color: FillColor) -> Result<RasterImage, RasterError> {
    if prev.width != mask.width || prev.height != mask.height {
        return Err(RasterError::ShapeMismatch(prev.shape(), (mask.width, mask.height, 1)));
    }
    let rgb = color.to_array();
    let c = prev.channels;
    let mut data = prev.data.clone();
    for (px, m) in mask.data.iter().enumerate() {
        if *m == 0.0 {
            continue;
        }
        for ch in 0..c {
            let v = &mut data[px * c + ch];
            // single-channel images take the red component
            *v = *v * (1.0 - m) + rgb[ch] * m;
        }
    }
    Ok(RasterImage { data, ..*prev })
}

/// Renders a document at `width` x `height` over a white background, painting
/// layers in stack order with hard masks.
pub fn render_document(doc: &ClipartDocument, width: usize, height: usize) -> RasterImage {
    let doc = doc.scaled_to(width as f64, height as f64);
    let mut img = RasterImage::white(width, height);
    for layer in &doc.layers {
        let mask = rasterize_mask(&layer.path, width, height, DEFAULT_SUPERSAMPLE);
        img = composite(&img, &mask, layer.color).expect("mask matches canvas");
    }
    img
}

/// Summed squared difference over every pixel and channel.
pub fn render_loss(image: &RasterImage, target: &RasterImage) -> Result<f64, RasterError> {
    same_shape(image, target)?;
    Ok(image
        .data
        .iter()
        .zip(&target.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftRenderParams {
    /// Width of the sigmoid transition, in canvas units.
    pub bandwidth: f64,
    /// Sample grid per pixel side.
    pub supersample: usize,
}

impl SoftRenderParams {
    pub fn new(bandwidth: f64, supersample: usize) -> Result<Self, RasterError> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(RasterError::BadBandwidth(bandwidth));
        }
        Ok(Self {
            bandwidth,
            supersample: supersample.max(1),
        })
    }
}

impl Default for SoftRenderParams {
    fn default() -> Self {
        Self {
            bandwidth: 1.0,
            supersample: 1,
        }
    }
}

/// Polygonization of a path where every vertex remembers its weights on the
/// path's free points.
#[derive(Debug, Clone)]
struct Flattened {
    verts: Vec<Point>,
    weights: Vec<[(usize, f64); 4]>,
    n_free: usize,
}

impl Flattened {
    fn new(path: &ClosedPath) -> Self {
        let mut verts = Vec::new();
        let mut weights = Vec::new();
        for (k, seg) in path.segments().iter().enumerate() {
            let slots = path.control_slots(k);
            let m = match seg {
                CurveSegment::Line(_) => 1,
                CurveSegment::Cubic(_) => SOFT_CUBIC_SAMPLES,
            };
            for j in 0..m {
                let t = j as f64 / m as f64;
                verts.push(seg.point_at(t));
                let b = seg.basis(t);
                let mut w = [(0usize, 0.0); 4];
                for (i, slot) in slots.iter().enumerate() {
                    if *slot != usize::MAX {
                        w[i] = (*slot, b[i]);
                    }
                }
                weights.push(w);
            }
        }
        let n_free = path.free_points().len();
        Self { verts, weights, n_free }
    }

    fn scatter(&self, vert_grad: &[Point]) -> Vec<Point> {
        let mut out = vec![Point::default(); self.n_free];
        for (g, w) in vert_grad.iter().zip(&self.weights) {
            for &(slot, wt) in w {
                if wt != 0.0 {
                    out[slot] += *g * wt;
                }
            }
        }
        out
    }
}

/// Per-sample record of the frozen nearest-edge choice.
#[derive(Debug, Clone, Copy)]
struct SampleInfo {
    /// Edge index, or `u32::MAX` when culled.
    edge: u32,
    u: f64,
    coverage: f64,
    /// Unit vector from the nearest boundary point to the sample, flipped
    /// for inside samples, so that `d sdf / d boundary = -g`.
    g: Point,
}

/// Soft coverage mask plus what is needed to differentiate it.
#[derive(Debug, Clone)]
pub struct SoftMask {
    pub mask: MaskImage,
    params: SoftRenderParams,
    flat: Flattened,
    samples: Vec<SampleInfo>,
}

/// Differentiable coverage of `path` on a `width` x `height` grid.
pub fn soft_mask(
    path: &ClosedPath,
    width: usize,
    height: usize,
    params: &SoftRenderParams,
) -> Result<SoftMask, RasterError> {
    SoftRenderParams::new(params.bandwidth, params.supersample)?;
    let flat = Flattened::new(path);
    let poly = &flat.verts;
    let n = poly.len();
    let s = params.supersample.max(1);
    let bw = params.bandwidth;
    let cutoff = SOFT_CUTOFF * bw;

    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let edges: Vec<(Point, Point, f64)> = (0..n)
        .map(|i| {
            let a = poly[i];
            let d = poly[(i + 1) % n] - a;
            (a, d, d.norm_sq())
        })
        .collect();

    let sub_w = width * s;
    let mut samples = Vec::with_capacity(sub_w * height * s);
    let mut crossings = Vec::new();
    let culled = SampleInfo {
        edge: u32::MAX,
        u: 0.0,
        coverage: 0.0,
        g: Point::default(),
    };
    for row in 0..height * s {
        let y = (row as f64 + 0.5) / s as f64;
        scanline_crossings(poly, y, &mut crossings);
        let mut ci = 0;
        let mut winding = 0;
        for col in 0..sub_w {
            let x = (col as f64 + 0.5) / s as f64;
            while ci < crossings.len() && crossings[ci].0 <= x {
                winding += crossings[ci].1;
                ci += 1;
            }
            let dx = (lo.x - x).max(x - hi.x).max(0.0);
            let dy = (lo.y - y).max(y - hi.y).max(0.0);
            if dx * dx + dy * dy > cutoff * cutoff {
                samples.push(culled);
                continue;
            }
            let c = Point::new(x, y);
            let mut best = (f64::INFINITY, 0usize, 0.0);
            for (i, (a, d, len2)) in edges.iter().enumerate() {
                let ac = c - *a;
                let u = if *len2 > 0.0 {
                    (ac.dot(*d) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let dist2 = (ac - *d * u).norm_sq();
                if dist2 < best.0 {
                    best = (dist2, i, u);
                }
            }
            let (dist2, edge, u) = best;
            let dist = dist2.sqrt();
            let inside = winding != 0;
            let sdf = if inside { -dist } else { dist };
            let coverage = sigmoid(-sdf / bw);
            let g = if dist > 0.0 {
                let (a, d, _) = edges[edge];
                let n = (c - (a + d * u)) * (1.0 / dist);
                if inside {
                    -n
                } else {
                    n
                }
            } else {
                Point::default()
            };
            samples.push(SampleInfo {
                edge: edge as u32,
                u,
                coverage,
                g,
            });
        }
    }

    let mut mask = MaskImage::zeros(width, height);
    let inv = 1.0 / (s * s) as f64;
    for row in 0..height * s {
        for col in 0..sub_w {
            mask.data[(row / s) * width + col / s] += samples[row * sub_w + col].coverage * inv;
        }
    }
    Ok(SoftMask {
        mask,
        params: *params,
        flat,
        samples,
    })
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl SoftMask {
    /// Adds `weight * d coverage(sample) / d vertex` into `vert_grad`.
    fn accumulate_sample(&self, idx: usize, weight: f64, vert_grad: &mut [Point]) {
        let info = self.samples[idx];
        if info.edge == u32::MAX || weight == 0.0 {
            return;
        }
        let cov = info.coverage;
        // d cov / d sdf
        let dcov = -cov * (1.0 - cov) / self.params.bandwidth;
        if dcov == 0.0 {
            return;
        }
        let n = self.flat.verts.len();
        let a = info.edge as usize;
        let b = (a + 1) % n;
        let k = weight * dcov;
        vert_grad[a] += info.g * (-(1.0 - info.u) * k);
        vert_grad[b] += info.g * (-info.u * k);
    }

    /// Gradient of pixel `(x, y)`'s coverage with respect to each free point
    /// of the path (see [`ClosedPath::free_points`]).
    pub fn pixel_grad(&self, x: usize, y: usize) -> Vec<Point> {
        let s = self.params.supersample.max(1);
        let sub_w = self.mask.width * s;
        let inv = 1.0 / (s * s) as f64;
        let mut vg = vec![Point::default(); self.flat.verts.len()];
        for sy in 0..s {
            for sx in 0..s {
                let idx = (y * s + sy) * sub_w + x * s + sx;
                self.accumulate_sample(idx, inv, &mut vg);
            }
        }
        self.flat.scatter(&vg)
    }

    /// Contracts per-pixel weights `w_px` against the mask Jacobian:
    /// returns `sum_px w_px * d mask_px / d free point`.
    pub fn vjp(&self, pixel_weights: &[f64]) -> Vec<Point> {
        let s = self.params.supersample.max(1);
        let w = self.mask.width;
        let sub_w = w * s;
        let inv = 1.0 / (s * s) as f64;
        let mut vg = vec![Point::default(); self.flat.verts.len()];
        for (idx, _) in self.samples.iter().enumerate() {
            let row = idx / sub_w;
            let col = idx % sub_w;
            let pw = pixel_weights[(row / s) * w + col / s];
            self.accumulate_sample(idx, pw * inv, &mut vg);
        }
        self.flat.scatter(&vg)
    }
}

/// Loss and gradient of rendering one soft layer over a fixed background.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderGradient {
    pub loss: f64,
    /// `d loss / d free point` of the layer's path.
    pub points: Vec<Point>,
    /// `d loss / d color channel`.
    pub color: [f64; 3],
    /// `sum m^2` over pixels; half the loss curvature in each color channel.
    pub mask_sq: f64,
}

fn soft_composite<'a>(
    background: &'a RasterImage,
    mask: &'a MaskImage,
    color: [f64; 3],
) -> impl Iterator<Item = (usize, [f64; 3])> + 'a {
    mask.data.iter().enumerate().map(move |(px, &m)| {
        let bg = background.pixel(px % mask.width, px / mask.width);
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = bg[c] * (1.0 - m) + color[c] * m;
        }
        (px, out)
    })
}

fn check_layer_inputs(background: &RasterImage, target: &RasterImage) -> Result<(), RasterError> {
    same_shape(background, target)?;
    if background.channels != 3 {
        return Err(RasterError::BadDimensions {
            width: background.width,
            height: background.height,
            channels: background.channels,
        });
    }
    Ok(())
}

/// Rendering loss of a soft layer (unclamped `color`) composited over
/// `background`, against `target`.
pub fn soft_layer_loss(
    background: &RasterImage,
    path: &ClosedPath,
    color: [f64; 3],
    target: &RasterImage,
    params: &SoftRenderParams,
) -> Result<f64, RasterError> {
    check_layer_inputs(background, target)?;
    let sm = soft_mask(path, background.width, background.height, params)?;
    let mut loss = 0.0;
    for (px, img) in soft_composite(background, &sm.mask, color) {
        let t = &target.data[px * 3..px * 3 + 3];
        for c in 0..3 {
            loss += (img[c] - t[c]) * (img[c] - t[c]);
        }
    }
    Ok(loss)
}

/// Rendering loss of one soft layer and its gradient with respect to the
/// path's free points and the fill color.
pub fn render_loss_grad(
    background: &RasterImage,
    path: &ClosedPath,
    color: [f64; 3],
    target: &RasterImage,
    params: &SoftRenderParams,
) -> Result<RenderGradient, RasterError> {
    check_layer_inputs(background, target)?;
    let sm = soft_mask(path, background.width, background.height, params)?;
    let mut loss = 0.0;
    let mut gcolor = [0.0; 3];
    let mut gmask = vec![0.0; sm.mask.data.len()];
    let mut mask_sq = 0.0;
    for (px, img) in soft_composite(background, &sm.mask, color) {
        let m = sm.mask.data[px];
        mask_sq += m * m;
        let bg = &background.data[px * 3..px * 3 + 3];
        let t = &target.data[px * 3..px * 3 + 3];
        let mut gm = 0.0;
        for c in 0..3 {
            let r = img[c] - t[c];
            loss += r * r;
            gcolor[c] += 2.0 * r * m;
            gm += 2.0 * r * (color[c] - bg[c]);
        }
        gmask[px] = gm;
    }
    Ok(RenderGradient {
        loss,
        points: sm.vjp(&gmask),
        color: gcolor,
        mask_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::Layer;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> ClosedPath {
        ClosedPath::polygon(&[p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)]).unwrap()
    }

    /// Four-cubic circle approximation.
    fn circle(c: Point, r: f64) -> ClosedPath {
        let k = 0.552_284_749_8 * r;
        let pts = [p(r, 0.), p(0., r), p(-r, 0.), p(0., -r)];
        let tan = [p(0., k), p(-k, 0.), p(0., -k), p(k, 0.)];
        ClosedPath::new(
            (0..4)
                .map(|i| {
                    let j = (i + 1) % 4;
                    CurveSegment::cubic(c + pts[i], c + pts[i] + tan[i], c + pts[j] - tan[j], c + pts[j])
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn left_half_mask_is_exact() {
        let m = rasterize_mask(&rect(0., 0., 4., 8.), 8, 8, 4);
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(m.get(x, y), if x < 4 { 1.0 } else { 0.0 });
            }
        }
        let outside = rasterize_mask(&rect(20., 20., 30., 30.), 8, 8, 4);
        assert_eq!(outside.sum(), 0.0);
    }

    #[test]
    fn disc_area_matches_analytic() {
        let r = 20.0;
        let m = rasterize_mask(&circle(p(32., 32.), r), 64, 64, 4);
        let ratio = m.sum() / (std::f64::consts::PI * r * r);
        assert!((0.99..=1.01).contains(&ratio), "{ratio}");
    }

    #[test]
    fn composite_examples() {
        let prev = RasterImage::filled(2, 1, &[0.2, 0.2, 0.2]).unwrap();
        let zero = MaskImage::zeros(2, 1);
        assert_eq!(composite(&prev, &zero, FillColor::WHITE).unwrap(), prev);
        let half = MaskImage {
            width: 2,
            height: 1,
            data: vec![0.5, 1.0],
        };
        let out = composite(&prev, &half, FillColor::WHITE).unwrap();
        assert!((out.get(0, 0, 0) - 0.6).abs() < 1e-15);
        assert_eq!(out.get(1, 0, 2), 1.0);
        let wrong = MaskImage::zeros(3, 1);
        assert!(composite(&prev, &wrong, FillColor::WHITE).is_err());
    }

    #[test]
    fn render_document_overlap() {
        let mut doc = ClipartDocument::new(8.0, 8.0);
        assert_eq!(render_document(&doc, 8, 8), RasterImage::white(8, 8));
        doc.push(Layer::new(rect(0., 0., 6., 6.), FillColor::new(1., 0., 0.).unwrap()));
        doc.push(Layer::new(rect(2., 2., 8., 8.), FillColor::new(0., 0., 1.).unwrap()));
        let img = render_document(&doc, 8, 8);
        assert_eq!(img.pixel(0, 0), &[1., 0., 0.]);
        assert_eq!(img.pixel(3, 3), &[0., 0., 1.]);
        assert_eq!(img.pixel(7, 0), &[1., 1., 1.]);
    }

    #[test]
    fn render_loss_examples() {
        let a = RasterImage::filled(2, 2, &[0.0]).unwrap();
        let b = RasterImage::filled(2, 2, &[1.0]).unwrap();
        assert_eq!(render_loss(&a, &b).unwrap(), 4.0);
        assert_eq!(render_loss(&a, &a).unwrap(), 0.0);
        let c = RasterImage::filled(2, 3, &[1.0]).unwrap();
        assert!(render_loss(&a, &c).is_err());
    }

    #[test]
    fn soft_mask_saturation_and_boundary() {
        let path = rect(10., 10., 50., 50.);
        let params = SoftRenderParams::new(0.5, 1).unwrap();
        let sm = soft_mask(&path, 64, 64, &params).unwrap();
        assert!((sm.mask.get(30, 30) - 1.0).abs() < 1e-6);
        assert!(sm.mask.get(2, 2) < 1e-6);
        // pixel centres are at +0.5, so this edge passes through column 20's centre
        let on_edge = rect(10., 10., 20.5, 50.);
        let sm = soft_mask(&on_edge, 64, 64, &params).unwrap();
        assert!((sm.mask.get(20, 30) - 0.5).abs() < 1e-12);
        assert!(soft_mask(
            &path,
            8,
            8,
            &SoftRenderParams {
                bandwidth: 0.0,
                supersample: 1
            }
        )
        .is_err());
    }

    #[test]
    fn soft_pixel_grad_matches_central_difference() {
        let path = circle(p(32., 30.), 12.);
        let params = SoftRenderParams::new(1.0, 1).unwrap();
        let sm = soft_mask(&path, 64, 64, &params).unwrap();
        // a pixel close to the right-hand boundary
        let (x, y) = (43, 30);
        let g = sm.pixel_grad(x, y);
        let free = path.free_points();
        let h = 1e-3;
        for slot in 0..free.len() {
            let mut plus = free.clone();
            plus[slot].x += h;
            let mut minus = free.clone();
            minus[slot].x -= h;
            let fp = soft_mask(&path.with_free_points(&plus), 64, 64, &params)
                .unwrap()
                .mask
                .get(x, y);
            let fm = soft_mask(&path.with_free_points(&minus), 64, 64, &params)
                .unwrap()
                .mask
                .get(x, y);
            let fd = (fp - fm) / (2.0 * h);
            let err = (fd - g[slot].x).abs();
            assert!(
                err <= 0.01 * fd.abs().max(g[slot].x.abs()) || err < 1e-8,
                "slot {slot}: {fd} vs {}",
                g[slot].x
            );
        }
    }

    #[test]
    fn color_gradient_closed_form_on_full_mask() {
        // a path much larger than the canvas gives mask == 1 everywhere
        let path = rect(-100., -100., 200., 200.);
        let bg = RasterImage::white(4, 3);
        let target = RasterImage::filled(4, 3, &[0.3, 0.6, 0.9]).unwrap();
        let color = [0.5, 0.5, 0.5];
        let g = render_loss_grad(&bg, &path, color, &target, &SoftRenderParams::default()).unwrap();
        let expect = |c: usize, t: f64| 2.0 * 12.0 * (color[c] - t);
        for (c, t) in [0.3, 0.6, 0.9].into_iter().enumerate() {
            assert!((g.color[c] - expect(c, t)).abs() < 1e-9);
        }
        let same = render_loss_grad(&target, &path, [0.3, 0.6, 0.9], &target, &SoftRenderParams::default()).unwrap();
        assert!(same.loss < 1e-20);
        assert!(same.color.iter().all(|v| v.abs() < 1e-12));
        assert!(same.points.iter().all(|v| v.norm() < 1e-12));
    }
}
