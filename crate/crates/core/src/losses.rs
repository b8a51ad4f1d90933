//! Geometric losses between sampled paths: ordered Chamfer, earth mover's
//! distance, the two symmetry terms, Laplacian smoothness, and their weighted
//! combination.
//!
//! Every loss has a companion `*_grad` routine returning the gradient with
//! respect to the predicted point set. Gradients treat the discrete choices
//! (best cyclic shift, optimal assignment, reversal) as fixed, which is exact
//! wherever the minimizer is unique.

use crate::error::LossError;
use crate::geometry::{laplacian, mirror, sample_path, ClosedPath, Point, SymmetryAxis};

/// Relative weights of the symmetry and smoothness terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub sym: f64,
    pub smooth: f64,
}

impl LossWeights {
    pub fn new(sym: f64, smooth: f64) -> Result<Self, String> {
        for (name, v) in [("sym", sym), ("smooth", smooth)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("weight {name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(Self { sym, smooth })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { sym: 1.0, smooth: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlRole {
    Start,
    Control1,
    Control2,
    End,
}

/// Control points of a path flattened in traversal order: two per line,
/// four per cubic.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPointSet {
    pub points: Vec<Point>,
    pub roles: Vec<ControlRole>,
}

impl ControlPointSet {
    pub fn from_path(path: &ClosedPath) -> Self {
        let mut points = Vec::new();
        let mut roles = Vec::new();
        for seg in path.segments() {
            let c = seg.controls();
            points.extend_from_slice(c);
            if c.len() == 2 {
                roles.extend([ControlRole::Start, ControlRole::End]);
            } else {
                roles.extend([
                    ControlRole::Start,
                    ControlRole::Control1,
                    ControlRole::Control2,
                    ControlRole::End,
                ]);
            }
        }
        Self { points, roles }
    }
}

fn check_sizes(p: &[Point], t: &[Point]) -> Result<usize, LossError> {
    if p.len() != t.len() {
        return Err(LossError::SizeMismatch(p.len(), t.len()));
    }
    if p.is_empty() {
        return Err(LossError::Empty);
    }
    Ok(p.len())
}

/// Best cyclic shift `j` minimizing `sum_i |p_i - t_{(j+i) % k}|^2`.
fn best_shift(p: &[Point], t: &[Point]) -> (f64, usize) {
    let k = p.len();
    let mut best = (f64::INFINITY, 0);
    for j in 0..k {
        let mut acc = 0.0;
        for (i, pi) in p.iter().enumerate() {
            acc += pi.dist_sq(t[(j + i) % k]);
            if acc >= best.0 {
                break;
            }
        }
        if acc < best.0 {
            best = (acc, j);
        }
    }
    best
}

/// One-sided ordered matching cost: the minimum over cyclic shifts of the
/// summed squared distances.
pub fn match_loss(p: &[Point], t: &[Point]) -> Result<f64, LossError> {
    check_sizes(p, t)?;
    Ok(best_shift(p, t).0)
}

pub fn ordered_chamfer(p: &[Point], t: &[Point]) -> Result<f64, LossError> {
    check_sizes(p, t)?;
    Ok(best_shift(p, t).0 + best_shift(t, p).0)
}

/// Ordered Chamfer loss and its gradient with respect to `p`.
pub fn ordered_chamfer_grad(p: &[Point], t: &[Point]) -> Result<(f64, Vec<Point>), LossError> {
    let k = check_sizes(p, t)?;
    let (a, ja) = best_shift(p, t);
    let (b, jb) = best_shift(t, p);
    let mut grad = vec![Point::default(); k];
    for i in 0..k {
        grad[i] += (p[i] - t[(ja + i) % k]) * 2.0;
        let q = (jb + i) % k;
        grad[q] += (p[q] - t[i]) * 2.0;
    }
    Ok((a + b, grad))
}

/// Minimum-cost perfect assignment on a dense square cost matrix
/// (Hungarian method with potentials, O(n^3)). Returns `row -> column`.
pub fn solve_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));
    let inf = f64::INFINITY;
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![inf; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = inf);
        used.iter_mut().for_each(|u| *u = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Optimal bijection `p_i -> t_{phi(i)}` under squared Euclidean cost.
pub fn emd_assignment(p: &[Point], t: &[Point]) -> Result<(f64, Vec<usize>), LossError> {
    check_sizes(p, t)?;
    let cost: Vec<Vec<f64>> = p.iter().map(|a| t.iter().map(|b| a.dist_sq(*b)).collect()).collect();
    let phi = solve_assignment(&cost);
    let total = phi.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok((total, phi))
}

/// Earth mover's distance: minimum summed squared distance over bijections.
pub fn emd(p: &[Point], t: &[Point]) -> Result<f64, LossError> {
    Ok(emd_assignment(p, t)?.0)
}

pub fn emd_grad(p: &[Point], t: &[Point]) -> Result<(f64, Vec<Point>), LossError> {
    let (total, phi) = emd_assignment(p, t)?;
    let grad = p.iter().zip(&phi).map(|(a, &j)| (*a - t[j]) * 2.0).collect();
    Ok((total, grad))
}

/// Samples `n` points on the reflection of `path`, traversed in reverse so the
/// reflected samples run in the same rotational sense as the original.
pub fn mirrored_samples(path: &ClosedPath, axis: &SymmetryAxis, n: usize) -> Result<Vec<Point>, LossError> {
    let m = mirror(path, axis).reversed();
    Ok(sample_path(&m, n)?.points)
}

/// Chamfer plus earth mover's loss between the reflected prediction and the
/// target samples.
pub fn sample_symmetry_loss(
    path: &ClosedPath,
    axis: &SymmetryAxis,
    target: &[Point],
    n: usize,
) -> Result<f64, LossError> {
    if target.len() != n {
        return Err(LossError::SizeMismatch(n, target.len()));
    }
    let mirrored = mirrored_samples(path, axis, n)?;
    Ok(ordered_chamfer(&mirrored, target)? + emd(&mirrored, target)?)
}

/// Gradient of the sample symmetry loss with respect to the mirrored samples.
pub fn sample_symmetry_grad(mirrored: &[Point], target: &[Point]) -> Result<(f64, Vec<Point>), LossError> {
    let (c, gc) = ordered_chamfer_grad(mirrored, target)?;
    let (e, ge) = emd_grad(mirrored, target)?;
    let grad = gc.into_iter().zip(ge).map(|(a, b)| a + b).collect();
    Ok((c + e, grad))
}

/// Which ordering of the mirrored control points realized the minimum, plus
/// the shifts used by each direction of the Chamfer sum.
#[derive(Debug, Clone, Copy)]
struct CsymChoice {
    value: f64,
    reversed: bool,
    shift_ab: usize,
    shift_ba: usize,
}

fn csym_choice(q: &[Point], axis: &SymmetryAxis) -> CsymChoice {
    let forward: Vec<Point> = q.iter().map(|p| axis.reflect(*p)).collect();
    let backward: Vec<Point> = forward.iter().rev().copied().collect();
    let mut best: Option<CsymChoice> = None;
    for (reversed, m) in [(false, &forward), (true, &backward)] {
        let (a, ja) = best_shift(m, q);
        let (b, jb) = best_shift(q, m);
        let value = a + b;
        if best.is_none_or(|c| value < c.value) {
            best = Some(CsymChoice {
                value,
                reversed,
                shift_ab: ja,
                shift_ba: jb,
            });
        }
    }
    best.expect("two candidates evaluated")
}

/// Ordered Chamfer between the mirrored and original control sequences,
/// minimized over cyclic shifts and over reversal of the mirrored sequence.
pub fn control_symmetry_loss(q: &ControlPointSet, axis: &SymmetryAxis) -> f64 {
    if q.points.is_empty() {
        return 0.0;
    }
    csym_choice(&q.points, axis).value
}

/// Control symmetry loss and its gradient with respect to every entry of `q`
/// (both the mirrored copy and the original depend on `q`).
pub fn control_symmetry_grad(q: &[Point], axis: &SymmetryAxis) -> (f64, Vec<Point>) {
    let k = q.len();
    if k == 0 {
        return (0.0, Vec::new());
    }
    let choice = csym_choice(q, axis);
    // mirrored[i] = reflect(q[src(i)])
    let src = |i: usize| if choice.reversed { k - 1 - i } else { i };
    let mirrored = |i: usize| axis.reflect(q[src(i)]);
    let mut grad = vec![Point::default(); k];
    for i in 0..k {
        let j = (choice.shift_ab + i) % k;
        let d = (mirrored(i) - q[j]) * 2.0;
        grad[src(i)] += axis.reflect_vector(d);
        grad[j] += -d;
    }
    for i in 0..k {
        let j = (choice.shift_ba + i) % k;
        let d = (q[i] - mirrored(j)) * 2.0;
        grad[i] += d;
        grad[src(j)] += -axis.reflect_vector(d);
    }
    (choice.value, grad)
}

/// Sum over samples of the squared norm of the Laplacian difference.
pub fn smoothness_loss(p: &[Point], t: &[Point]) -> Result<f64, LossError> {
    check_sizes(p, t)?;
    let lp = laplacian(p)?;
    let lt = laplacian(t)?;
    Ok(lp.iter().zip(&lt).map(|(a, b)| (*a - *b).norm_sq()).sum())
}

pub fn smoothness_grad(p: &[Point], t: &[Point]) -> Result<(f64, Vec<Point>), LossError> {
    let n = check_sizes(p, t)?;
    let lp = laplacian(p)?;
    let lt = laplacian(t)?;
    let diff: Vec<Point> = lp.iter().zip(&lt).map(|(a, b)| *a - *b).collect();
    let value = diff.iter().map(|d| d.norm_sq()).sum();
    let grad = (0..n)
        .map(|j| diff[j] * 2.0 - diff[(j + n - 1) % n] - diff[(j + 1) % n])
        .collect();
    Ok((value, grad))
}

/// Individual terms of the combined geometric loss.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeometricLoss {
    pub chamfer: f64,
    pub mover: f64,
    pub sym: f64,
    pub csym: f64,
    pub smooth: f64,
    pub total: f64,
}

impl GeometricLoss {
    pub fn weighted_total(&self, w: &LossWeights) -> f64 {
        (self.chamfer + self.mover) + w.sym * (self.sym + self.csym) + w.smooth * self.smooth
    }
}

/// `(L_chm + L_mover) + w_sym (L_sym + L_csym) + w_smooth L_smooth` for a
/// predicted path against a target path, both sampled with `n` points.
/// Without an axis the symmetry terms are zero.
pub fn geometric_loss(
    pred: &ClosedPath,
    target: &ClosedPath,
    axis: Option<&SymmetryAxis>,
    w: &LossWeights,
    n: usize,
) -> Result<GeometricLoss, LossError> {
    let p = sample_path(pred, n)?.points;
    let t = sample_path(target, n)?.points;
    let mut out = GeometricLoss {
        chamfer: ordered_chamfer(&p, &t)?,
        mover: emd(&p, &t)?,
        smooth: smoothness_loss(&p, &t)?,
        ..Default::default()
    };
    if let Some(axis) = axis {
        out.sym = sample_symmetry_loss(pred, axis, &t, n)?;
        out.csym = control_symmetry_loss(&ControlPointSet::from_path(pred), axis);
    }
    out.total = out.weighted_total(w);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurveSegment;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    /// Exhaustive permutation minimum.
    fn brute_emd(a: &[Point], b: &[Point]) -> f64 {
        fn rec(a: &[Point], b: &[Point], used: &mut Vec<bool>, i: usize, acc: f64, best: &mut f64) {
            if i == a.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    rec(a, b, used, i + 1, acc + a[i].dist_sq(b[j]), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
        best
    }

    #[test]
    fn match_and_chamfer_two_point_example() {
        let a = [p(0., 0.), p(1., 0.)];
        let b = [p(0., 0.), p(0., 1.)];
        assert_eq!(match_loss(&a, &b).unwrap(), 2.0);
        assert_eq!(ordered_chamfer(&a, &b).unwrap(), 4.0);
        assert!(matches!(match_loss(&a, &b[..1]), Err(LossError::SizeMismatch(2, 1))));
    }

    #[test]
    fn chamfer_zero_on_rotation() {
        let a: Vec<Point> = (0..7).map(|i| p(i as f64, (i * i) as f64)).collect();
        for k in 0..7 {
            let mut r = a.clone();
            r.rotate_left(k);
            assert_eq!(ordered_chamfer(&a, &r).unwrap(), 0.0);
        }
    }

    #[test]
    fn emd_examples() {
        assert_eq!(emd(&[p(0., 0.)], &[p(3., 4.)]).unwrap(), 25.0);
        let a = [p(0., 0.), p(1., 2.), p(5., 1.), p(2., 2.), p(-1., 3.)];
        let b = [p(1., 1.), p(4., 0.), p(0., 2.), p(2., -1.), p(3., 3.)];
        assert!((emd(&a, &b).unwrap() - brute_emd(&a, &b)).abs() < 1e-9);
        assert_eq!(emd(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn control_symmetry_examples() {
        let axis = SymmetryAxis::new(p(0., 0.), p(0., 1.)).unwrap();
        let q = ControlPointSet {
            points: vec![p(1., 0.), p(2., 0.)],
            roles: vec![ControlRole::Start, ControlRole::End],
        };
        // both orderings of the mirrored pair give 18 + 18
        assert_eq!(control_symmetry_loss(&q, &axis), 36.0);
        let on_axis = ControlPointSet {
            points: vec![p(0., 5.)],
            roles: vec![ControlRole::Start],
        };
        assert_eq!(control_symmetry_loss(&on_axis, &axis), 0.0);
        let sym = ClosedPath::polygon(&[p(-1., 0.), p(1., 0.), p(2., 3.), p(-2., 3.)]).unwrap();
        let q = ControlPointSet::from_path(&sym);
        assert!(control_symmetry_loss(&q, &axis) < 1e-20);
    }

    #[test]
    fn smoothness_square_corner_displacement() {
        let t = [p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)];
        let mut q = t;
        q[2].x += 0.1;
        // displacing p2 by d changes L(p2) by d and L(p1), L(p3) by -d/2
        let expected = 0.01 + 2.0 * 0.0025;
        assert!((smoothness_loss(&q, &t).unwrap() - expected).abs() < 1e-15);
        let shifted: Vec<Point> = t.iter().map(|v| *v + p(3., -2.)).collect();
        assert!(smoothness_loss(&shifted, &t).unwrap() < 1e-24);
    }

    #[test]
    fn sample_symmetry_on_symmetric_and_far_axis() {
        let path = ClosedPath::new(vec![
            CurveSegment::cubic(p(0., 0.), p(1., 0.5), p(2., 0.5), p(3., 0.)),
            CurveSegment::line(p(3., 0.), p(1.5, 4.)),
            CurveSegment::line(p(1.5, 4.), p(0., 0.)),
        ])
        .unwrap();
        let axis = SymmetryAxis::new(p(1.5, 0.), p(0., 1.)).unwrap();
        let t = sample_path(&path, 60).unwrap().points;
        let s = sample_symmetry_loss(&path, &axis, &t, 60).unwrap();
        assert!(s <= 1e-9, "{s}");
        let far = SymmetryAxis::new(p(100., 0.), p(0., 1.)).unwrap();
        assert!(sample_symmetry_loss(&path, &far, &t, 60).unwrap() > 1.0);
    }

    #[test]
    fn zero_weights_leave_point_terms() {
        let a = ClosedPath::polygon(&[p(0., 0.), p(4., 0.), p(4., 3.)]).unwrap();
        let b = ClosedPath::polygon(&[p(1., 0.), p(4., 1.), p(3., 3.)]).unwrap();
        let axis = SymmetryAxis::new(p(2., 0.), p(0., 1.)).unwrap();
        let g = geometric_loss(&a, &b, Some(&axis), &LossWeights::new(0.0, 0.0).unwrap(), 30).unwrap();
        assert_eq!(g.total, g.chamfer + g.mover);
        assert!(g.sym > 0.0 && g.csym > 0.0);
    }
}
