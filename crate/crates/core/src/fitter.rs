//! Layer-by-layer vectorization of a raster image.
//!
//! Each round looks at the residual between the current rendering and the
//! target, seeds a new layer as an ellipse over the largest residual blob,
//! and optimizes that layer's control points and color through the soft
//! rasterizer. The loop stops when the residual is small, the layer budget
//! is spent, or a new layer fails to lower the residual.
//!
//! [`fit_layer_supervised`] optimizes a path against a known target path with
//! the geometric losses instead of the image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::document::{ClipartDocument, FillColor, Layer};
use crate::error::{GeometryError, LossError, RasterError};
use crate::geometry::{mirror, sample_path, ClosedPath, CurveSegment, Point, SamplePolyline, SymmetryAxis};
use crate::losses::{
    control_symmetry_grad, emd_grad, ordered_chamfer_grad, sample_symmetry_grad, smoothness_grad, GeometricLoss,
    LossWeights,
};
use crate::raster::{
    composite, rasterize_mask, render_document, render_loss_grad, MaskImage, RasterImage, SoftRenderParams,
    DEFAULT_SUPERSAMPLE,
};
use crate::regularize::{regularize, RegularizeConfig};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid fit config: {0}")]
    InvalidConfig(String),
    #[error("target must have 3 channels, got {0}")]
    Channels(usize),
    #[error("residual is empty; nothing left to fit")]
    EmptyResidual,
    #[error("non-finite loss at step {step} (last finite loss {last})")]
    NonFinite { step: usize, last: f64 },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_layers: usize,
    /// Stop once the mean per-pixel residual drops below this.
    pub residual_stop: f64,
    /// Cubic segments in each new layer.
    pub seg_count: usize,
    pub opt_steps: usize,
    /// Initial step as a fraction of the canvas (or target) size.
    pub step_size: f64,
    /// `(first step, bandwidth)` pairs, sorted by step.
    pub bandwidth_schedule: Vec<(usize, f64)>,
    pub weights: LossWeights,
    pub seed: u64,
    /// Soft rasterizer samples per pixel side.
    pub supersample: usize,
    /// Points sampled per path for the geometric losses.
    pub samples: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_layers: 12,
            residual_stop: 0.01,
            seg_count: 8,
            opt_steps: 300,
            step_size: 0.02,
            bandwidth_schedule: vec![(0, 2.0), (150, 1.0), (250, 0.5)],
            weights: LossWeights::default(),
            seed: 0,
            supersample: 1,
            samples: 64,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |m: String| Err(FitError::InvalidConfig(m));
        if self.max_layers == 0 || self.seg_count < 2 || self.supersample == 0 {
            return bad("max_layers, supersample must be positive and seg_count at least 2".into());
        }
        if !(self.residual_stop > 0.0 && self.step_size > 0.0) {
            return bad("residual_stop and step_size must be positive".into());
        }
        if self.samples < 3 {
            return bad("samples must be at least 3".into());
        }
        match self.bandwidth_schedule.first() {
            Some((0, _)) => {}
            _ => return bad("bandwidth schedule must start at step 0".into()),
        }
        if self.bandwidth_schedule.windows(2).any(|w| w[0].0 >= w[1].0)
            || self
                .bandwidth_schedule
                .iter()
                .any(|(_, b)| !(*b > 0.0 && b.is_finite()))
        {
            return bad("bandwidth schedule must be increasing in step with positive widths".into());
        }
        LossWeights::new(self.weights.sym, self.weights.smooth).map_err(FitError::InvalidConfig)?;
        Ok(())
    }

    pub fn bandwidth_at(&self, step: usize) -> f64 {
        self.bandwidth_schedule
            .iter()
            .take_while(|(s, _)| *s <= step)
            .last()
            .map_or(1.0, |(_, b)| *b)
    }

    // linear decay to a tenth of the initial rate over the run
    fn decay(&self, step: usize) -> f64 {
        1.0 - 0.9 * step as f64 / self.opt_steps.max(1) as f64
    }
}

/// Document built so far, its rendering, and the target.
#[derive(Debug, Clone)]
pub struct FitState {
    pub doc: ClipartDocument,
    pub rendered: RasterImage,
    pub target: RasterImage,
}

impl FitState {
    pub fn new(target: RasterImage) -> Result<Self, FitError> {
        if target.channels() != 3 {
            return Err(FitError::Channels(target.channels()));
        }
        let (w, h) = (target.width(), target.height());
        Ok(Self {
            doc: ClipartDocument::new(w as f64, h as f64),
            rendered: RasterImage::white(w, h),
            target,
        })
    }

    pub fn layer_count(&self) -> usize {
        self.doc.layers.len()
    }

    /// State with `layer` painted on top.
    pub fn with_layer(&self, layer: Layer) -> Self {
        let (w, h) = (self.target.width(), self.target.height());
        let mask = rasterize_mask(&layer.path, w, h, DEFAULT_SUPERSAMPLE);
        let rendered = composite(&self.rendered, &mask, layer.color).expect("mask matches canvas");
        let mut doc = self.doc.clone();
        doc.push(layer);
        debug_assert_eq!(rendered, render_document(&doc, w, h));
        Self {
            doc,
            rendered,
            target: self.target.clone(),
        }
    }
}

/// Per-pixel mean absolute channel difference, as a one-channel image.
pub fn residual(state: &FitState) -> Result<RasterImage, FitError> {
    let (r, t) = (&state.rendered, &state.target);
    if r.shape() != t.shape() {
        return Err(RasterError::ShapeMismatch(r.shape(), t.shape()).into());
    }
    let c = r.channels();
    let data = r
        .data()
        .chunks(c)
        .zip(t.data().chunks(c))
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / c as f64)
        .collect();
    Ok(RasterImage::from_data(r.width(), r.height(), 1, data)?)
}

pub fn mean_residual(state: &FitState) -> Result<f64, FitError> {
    let r = residual(state)?;
    Ok(r.data().iter().sum::<f64>() / r.data().len() as f64)
}

pub fn should_continue(state: &FitState, cfg: &FitConfig) -> Result<bool, FitError> {
    Ok(state.layer_count() < cfg.max_layers && mean_residual(state)? >= cfg.residual_stop)
}

/// Normalized residual over the chosen blob, with its residual-weighted
/// centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedMap {
    pub width: usize,
    pub height: usize,
    pub probs: Vec<f64>,
    /// Pixel indices of the selected component, in scan order.
    pub component: Vec<usize>,
    pub argmax: Point,
}

/// Largest 4-connected component of `on`; ties go to the first in scan order.
fn largest_component(on: &[bool], w: usize, h: usize) -> Vec<usize> {
    let mut label = vec![usize::MAX; on.len()];
    let mut best: Vec<usize> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..on.len() {
        if !on[start] || label[start] != usize::MAX {
            continue;
        }
        let mut comp = Vec::new();
        label[start] = start;
        stack.push(start);
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if on[j] && label[j] == usize::MAX {
                    label[j] = start;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.sort_unstable();
    best
}

pub fn seed_map(state: &FitState) -> Result<SeedMap, FitError> {
    let r = residual(state)?;
    let (w, h) = (r.width(), r.height());
    let max = r.data().iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(FitError::EmptyResidual);
    }
    let on: Vec<bool> = r.data().iter().map(|v| *v >= 0.5 * max).collect();
    let component = largest_component(&on, w, h);
    let total: f64 = component.iter().map(|&i| r.data()[i]).sum();
    let mut probs = vec![0.0; w * h];
    let mut c = Point::default();
    for &i in &component {
        let p = r.data()[i] / total;
        probs[i] = p;
        c += Point::new((i % w) as f64 + 0.5, (i / w) as f64 + 0.5) * p;
    }
    Ok(SeedMap {
        width: w,
        height: h,
        probs,
        component,
        argmax: c,
    })
}

/// Closed ellipse made of `n` cubic arcs, with positive signed area.
pub fn ellipse_path(center: Point, axis_u: Point, a: f64, b: f64, n: usize) -> ClosedPath {
    let u = axis_u * (1.0 / axis_u.norm());
    let v = Point::new(-u.y, u.x);
    let dt = std::f64::consts::TAU / n as f64;
    let k = 4.0 / 3.0 * (dt / 4.0).tan();
    let pos = |t: f64| center + u * (a * t.cos()) + v * (b * t.sin());
    let vel = |t: f64| u * (-a * t.sin()) + v * (b * t.cos());
    let segs = (0..n)
        .map(|i| {
            let (t0, t1) = (i as f64 * dt, ((i + 1) % n) as f64 * dt);
            let (p0, p1) = (pos(t0), pos(t1));
            CurveSegment::cubic(p0, p0 + vel(t0) * (k * dt.recip() * dt), p1 - vel(t1) * k, p1)
        })
        .collect();
    ClosedPath::new(segs).expect("ellipse arcs are contiguous")
}

/// Ellipse matching the second moments of the seed component, colored with
/// the component's mean target color.
pub fn init_layer(seed: &SeedMap, state: &FitState, cfg: &FitConfig) -> Layer {
    let w = seed.width;
    let comp = &seed.component;
    let n = comp.len().max(1) as f64;
    let centers: Vec<Point> = comp
        .iter()
        .map(|&i| Point::new((i % w) as f64 + 0.5, (i / w) as f64 + 0.5))
        .collect();
    let mean = centers.iter().fold(Point::default(), |s, p| s + *p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &centers {
        let d = *p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // pixel footprint adds 1/12 per axis
    let (sxx, sxy, syy) = (sxx / n + 1.0 / 12.0, sxy / n, syy / n + 1.0 / 12.0);
    let tr = sxx + syy;
    let disc = ((sxx - syy) * (sxx - syy) / 4.0 + sxy * sxy).sqrt();
    let (l1, l2) = (tr / 2.0 + disc, (tr / 2.0 - disc).max(0.0));
    let u = if sxy.abs() > 1e-12 {
        Point::new(l1 - syy, sxy)
    } else if sxx >= syy {
        Point::new(1.0, 0.0)
    } else {
        Point::new(0.0, 1.0)
    };
    let path = if comp.len() < 4 {
        ellipse_path(mean, Point::new(1.0, 0.0), 2.0, 2.0, cfg.seg_count)
    } else {
        ellipse_path(
            mean,
            u,
            (2.0 * l1.sqrt()).max(1.0),
            (2.0 * l2.sqrt()).max(1.0),
            cfg.seg_count,
        )
    };
    let mut color = [0.0; 3];
    for &i in comp {
        let px = state.target.pixel(i % w, i / w);
        for c in 0..3 {
            color[c] += px[c] / n;
        }
    }
    Layer::new(path, FillColor::clamped(color))
}

/// Chains per-sample gradients to the path's free points through the basis
/// weights of each sample.
fn chain_samples(path: &ClosedPath, poly: &SamplePolyline, grads: &[Point], out: &mut [Point]) {
    for (&(k, t), g) in poly.params.iter().zip(grads) {
        let slots = path.control_slots(k);
        let w = path.segments()[k].basis(t);
        for (slot, wt) in slots.iter().zip(w) {
            if *slot != usize::MAX {
                out[*slot] += *g * wt;
            }
        }
    }
}

/// Smoothness of the path's own samples, `sum |L(p_i)|^2`, with its gradient
/// on free points.
fn self_smoothness(path: &ClosedPath, n: usize) -> Result<(f64, Vec<Point>), FitError> {
    let poly = sample_path(path, n)?;
    let zeros = vec![Point::default(); poly.points.len()];
    let (v, g) = smoothness_grad(&poly.points, &zeros)?;
    let mut out = vec![Point::default(); path.free_points().len()];
    chain_samples(path, &poly, &g, &mut out);
    Ok((v, out))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// Normalized update direction for gradient `g`.
    fn direction(&mut self, g: &[f64]) -> Vec<f64> {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        g.iter()
            .enumerate()
            .map(|(i, gi)| {
                self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * gi;
                self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * gi * gi;
                (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-12)
            })
            .collect()
    }
}

fn flatten(pts: &[Point]) -> Vec<f64> {
    pts.iter().flat_map(|p| [p.x, p.y]).collect()
}

#[derive(Debug, Clone)]
pub struct LayerFit {
    pub layer: Layer,
    /// Objective after every accepted step.
    pub history: Vec<f64>,
}

struct Eval {
    loss: f64,
    grad_pts: Vec<Point>,
    grad_color: [f64; 3],
    mask_sq: f64,
}

fn evaluate(
    state: &FitState,
    path: &ClosedPath,
    color: [f64; 3],
    params: &SoftRenderParams,
    cfg: &FitConfig,
) -> Result<Eval, FitError> {
    let rg = render_loss_grad(&state.rendered, path, color, &state.target, params)?;
    let (sv, sg) = self_smoothness(path, cfg.samples.max(path.len()))?;
    let ws = cfg.weights.smooth;
    Ok(Eval {
        loss: rg.loss + ws * sv,
        grad_pts: rg.points.iter().zip(&sg).map(|(a, b)| *a + *b * ws).collect(),
        grad_color: rg.color,
        mask_sq: rg.mask_sq,
    })
}

/// Least-squares fill color for a fixed hard mask over `state.rendered`,
/// clamped to `[0, 1]`.
fn closed_form_color(state: &FitState, mask: &MaskImage, fallback: FillColor) -> FillColor {
    let (mut num, mut den) = ([0.0; 3], 0.0);
    for (px, &m) in mask.data.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let (x, y) = (px % mask.width, px / mask.width);
        let bg = state.rendered.pixel(x, y);
        let t = state.target.pixel(x, y);
        for c in 0..3 {
            num[c] += m * (t[c] - bg[c] * (1.0 - m));
        }
        den += m * m;
    }
    if den == 0.0 {
        return fallback;
    }
    FillColor::clamped(num.map(|v| v / den))
}

/// Optimizes one layer's free points and color against the target, composited
/// over the current rendering through the soft rasterizer.
pub fn fit_layer(state: &FitState, init: &Layer, cfg: &FitConfig) -> Result<LayerFit, FitError> {
    cfg.validate()?;
    let (w, h) = (state.target.width(), state.target.height());
    let scale = w.max(h) as f64;
    let template = init.path.clone();
    let mut pts = template.free_points();
    let mut color = init.color.to_array();
    let mut adam = Adam::new(pts.len() * 2);
    let mut mult = 1.0;
    let mut bw = f64::NAN;
    let mut cur: Option<Eval> = None;
    let mut history = Vec::new();

    for step in 0..cfg.opt_steps {
        let b = cfg.bandwidth_at(step);
        let params = SoftRenderParams::new(b, cfg.supersample)?;
        if b != bw || cur.is_none() {
            bw = b;
            cur = Some(evaluate(state, &template.with_free_points(&pts), color, &params, cfg)?);
        }
        let e = cur.as_ref().expect("evaluated above");
        if !e.loss.is_finite() {
            return Err(FitError::NonFinite {
                step,
                last: history.last().copied().unwrap_or(f64::NAN),
            });
        }
        let dir = adam.direction(&flatten(&e.grad_pts));
        let lr = cfg.step_size * mult * cfg.decay(step);
        let np = pts.len();
        let cand_pts: Vec<Point> = (0..np)
            .map(|i| pts[i] - Point::new(dir[2 * i], dir[2 * i + 1]) * (lr * scale))
            .collect();
        // the loss is quadratic in color, so a Newton step is exact
        let cand_color = if e.mask_sq > 1e-12 {
            [0, 1, 2].map(|c| (color[c] - e.grad_color[c] / (2.0 * e.mask_sq)).clamp(0.0, 1.0))
        } else {
            color
        };
        let cand = evaluate(state, &template.with_free_points(&cand_pts), cand_color, &params, cfg)?;
        if cand.loss.is_finite() && cand.loss <= e.loss {
            pts = cand_pts;
            color = cand_color;
            history.push(cand.loss);
            cur = Some(cand);
            mult = (mult * 1.2).min(1.0);
        } else {
            mult *= 0.5;
        }
    }
    let path = template.with_free_points(&pts);
    let mask = rasterize_mask(&path, w, h, DEFAULT_SUPERSAMPLE);
    let color = closed_form_color(state, &mask, FillColor::clamped(color));
    Ok(LayerFit {
        layer: Layer::new(path, color),
        history,
    })
}

/// Geometric loss of `pred` against `target` with its gradient on `pred`'s
/// free points.
pub fn geometric_loss_grad(
    pred: &ClosedPath,
    target: &ClosedPath,
    axis: Option<&SymmetryAxis>,
    w: &LossWeights,
    n: usize,
) -> Result<(GeometricLoss, Vec<Point>), FitError> {
    let ps = sample_path(pred, n)?;
    let t = sample_path(target, n)?.points;
    let (chamfer, gc) = ordered_chamfer_grad(&ps.points, &t)?;
    let (mover, ge) = emd_grad(&ps.points, &t)?;
    let (smooth, gs) = smoothness_grad(&ps.points, &t)?;
    let per_sample: Vec<Point> = (0..n).map(|i| gc[i] + ge[i] + gs[i] * w.smooth).collect();
    let mut grad = vec![Point::default(); pred.free_points().len()];
    chain_samples(pred, &ps, &per_sample, &mut grad);
    let mut out = GeometricLoss {
        chamfer,
        mover,
        smooth,
        ..Default::default()
    };
    if let Some(axis) = axis {
        // mirrored segment j is the reflection of pred segment K-1-j reversed
        let k = pred.len();
        let ms = sample_path(&mirror(pred, axis).reversed(), n)?;
        let (sym, gm) = sample_symmetry_grad(&ms.points, &t)?;
        for (&(j, tm), g) in ms.params.iter().zip(&gm) {
            let seg = k - 1 - j;
            let slots = pred.control_slots(seg);
            let b = pred.segments()[seg].basis(1.0 - tm);
            let rg = axis.reflect_vector(*g) * w.sym;
            for (slot, wt) in slots.iter().zip(b) {
                if *slot != usize::MAX {
                    grad[*slot] += rg * wt;
                }
            }
        }
        let q = pred.control_points();
        let (csym, gq) = control_symmetry_grad(&q, axis);
        let mut idx = 0;
        for seg in 0..k {
            let slots = pred.control_slots(seg);
            for slot in slots.iter().take(pred.segments()[seg].controls().len()) {
                grad[*slot] += gq[idx] * w.sym;
                idx += 1;
            }
        }
        out.sym = sym;
        out.csym = csym;
    }
    out.total = out.weighted_total(w);
    Ok((out, grad))
}

#[derive(Debug, Clone)]
pub struct SupervisedFit {
    pub path: ClosedPath,
    /// Loss terms at the start and after every accepted step.
    pub history: Vec<GeometricLoss>,
}

/// Optimizes `init` toward `target` under the weighted geometric loss.
pub fn fit_layer_supervised(
    init: &ClosedPath,
    target: &ClosedPath,
    axis: Option<&SymmetryAxis>,
    cfg: &FitConfig,
) -> Result<SupervisedFit, FitError> {
    cfg.validate()?;
    let n = cfg.samples.max(init.len()).max(target.len());
    let (lo, hi) = target.bbox();
    let scale = (hi.x - lo.x).max(hi.y - lo.y).max(1.0);
    let mut pts = init.free_points();
    let mut adam = Adam::new(pts.len() * 2);
    let mut mult = 1.0;
    let (mut cur, mut grad) = geometric_loss_grad(init, target, axis, &cfg.weights, n)?;
    let mut history = vec![cur];
    for step in 0..cfg.opt_steps {
        if !cur.total.is_finite() {
            return Err(FitError::NonFinite {
                step,
                last: history.last().map_or(f64::NAN, |l| l.total),
            });
        }
        if cur.total == 0.0 {
            break;
        }
        let dir = adam.direction(&flatten(&grad));
        let lr = cfg.step_size * mult * cfg.decay(step) * scale;
        let cand_pts: Vec<Point> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| *p - Point::new(dir[2 * i], dir[2 * i + 1]) * lr)
            .collect();
        let cand = init.with_free_points(&cand_pts);
        let (l, g) = geometric_loss_grad(&cand, target, axis, &cfg.weights, n)?;
        if l.total.is_finite() && l.total <= cur.total {
            pts = cand_pts;
            cur = l;
            grad = g;
            history.push(l);
            mult = (mult * 1.2).min(1.0);
        } else {
            mult *= 0.5;
        }
    }
    Ok(SupervisedFit {
        path: init.with_free_points(&pts),
        history,
    })
}

/// Copy of `path` with Gaussian-like noise of scale `sigma` on every free
/// point, drawn from `cfg.seed`-style deterministic streams.
pub fn perturb_path(path: &ClosedPath, sigma: f64, seed: u64) -> ClosedPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = || {
        // sum of uniforms: cheap bell shape with unit variance
        let s: f64 = (0..4).map(|_| rng.random_range(-1.0..1.0)).sum();
        s * (0.75f64).sqrt() * sigma
    };
    let pts: Vec<Point> = path
        .free_points()
        .into_iter()
        .map(|p| p + Point::new(noise(), noise()))
        .collect();
    path.with_free_points(&pts)
}

#[derive(Debug, Clone)]
pub struct Vectorization {
    /// Regularized result.
    pub doc: ClipartDocument,
    /// Accepted layers before regularization.
    pub raw: ClipartDocument,
    /// Mean residual before the first layer and after every accepted layer.
    pub residuals: Vec<f64>,
    /// Optimizer objective trace of every accepted layer.
    pub histories: Vec<Vec<f64>>,
}

/// Vectorizes `target` layer by layer, then regularizes the result.
pub fn vectorize(target: &RasterImage, cfg: &FitConfig) -> Result<Vectorization, FitError> {
    cfg.validate()?;
    let mut state = FitState::new(target.clone())?;
    let mut residuals = vec![mean_residual(&state)?];
    let mut histories = Vec::new();
    while should_continue(&state, cfg)? {
        let seed = seed_map(&state)?;
        let init = init_layer(&seed, &state, cfg);
        let fitted = fit_layer(&state, &init, cfg)?;
        let next = state.with_layer(fitted.layer);
        let r = mean_residual(&next)?;
        if r >= *residuals.last().expect("non-empty") {
            break;
        }
        residuals.push(r);
        histories.push(fitted.history);
        state = next;
    }
    Ok(Vectorization {
        doc: regularize(&state.doc, &RegularizeConfig::default()),
        raw: state.doc,
        residuals,
        histories,
    })
}
