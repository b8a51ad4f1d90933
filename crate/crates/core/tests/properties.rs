use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use clipvec_core::geometry::{sample_counts, sample_path, Point};
use clipvec_core::losses::{emd, match_loss, ordered_chamfer};
use clipvec_core::pathgen::{emit_corpus, random_canvas, GenConfig};
use clipvec_core::raster::render_document;
use clipvec_core::regularize::{regularize, RegularizeConfig};
use clipvec_core::svg_io::{parse_svg, write_svg, SvgError};

fn points(max: usize) -> impl Strategy<Value = (Vec<Point>, Vec<Point>)> {
    (1..=max).prop_flat_map(|k| {
        let pt = (-50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y)| Point::new(x, y));
        (prop::collection::vec(pt.clone(), k), prop::collection::vec(pt, k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chamfer_is_symmetric_and_shift_invariant((a, b) in points(24), shift in 0usize..24) {
        let k = b.len();
        let rotated: Vec<Point> = (0..k).map(|i| b[(i + shift) % k]).collect();
        let ab = ordered_chamfer(&a, &b).unwrap();
        prop_assert!((ab - ordered_chamfer(&b, &a).unwrap()).abs() <= 1e-9 * ab.max(1.0));
        prop_assert!((ab - ordered_chamfer(&a, &rotated).unwrap()).abs() <= 1e-9 * ab.max(1.0));
    }

    #[test]
    fn emd_never_exceeds_best_cyclic_matching((a, b) in points(16)) {
        let e = emd(&a, &b).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!(e <= match_loss(&a, &b).unwrap() + 1e-9);
    }

    #[test]
    fn sample_counts_partition_n(n in 1usize..500, k in 1usize..40) {
        let c = sample_counts(n, k);
        prop_assert_eq!(c.iter().sum::<usize>(), n);
        prop_assert!(c.windows(2).all(|w| w[0] >= w[1] && w[0] - w[1] <= 1));
    }

    #[test]
    fn generated_documents_round_trip_and_render(seed in any::<u64>(), k in 1usize..5) {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let doc = random_canvas(&cfg, k, &mut rng).unwrap().doc;
        let svg = write_svg(&doc);
        prop_assert_eq!(&parse_svg(&svg).unwrap(), &doc);
        let img = render_document(&doc, 24, 24);
        prop_assert!(img.data().iter().all(|v| (0.0..=1.0).contains(v)));
        for layer in &doc.layers {
            prop_assert_eq!(sample_path(&layer.path, 50).unwrap().points.len(), 50);
        }
    }

    #[test]
    fn regularize_reaches_a_fixed_point(seed in any::<u64>(), k in 1usize..5) {
        let cfg = RegularizeConfig::default();
        let gen = GenConfig { line_prob: 0.8, ..GenConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let once = regularize(&random_canvas(&gen, k, &mut rng).unwrap().doc, &cfg);
        prop_assert_eq!(regularize(&once, &cfg), once);
    }
}

#[test]
fn svg_errors_carry_offsets() {
    let bad_cmd =
        br#"<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"><path d="M 1 1 A 2 2 0 0 1 5 5 Z"/></svg>"#;
    match parse_svg(bad_cmd) {
        Err(SvgError::UnsupportedCommand { command, offset }) => {
            assert_eq!(command, 'A');
            assert_eq!(bad_cmd[offset], b'A');
        }
        other => panic!("unexpected {other:?}"),
    }
    let open = br#"<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"><path d="M 1 1 L 5 5 L 1 5"/></svg>"#;
    assert!(matches!(parse_svg(open), Err(SvgError::UnclosedPath { .. })));
    assert!(parse_svg(b"\xff\xfe<svg/>").is_err());
}

#[test]
fn corpus_emission_is_deterministic() {
    let cfg = GenConfig {
        seed: 42,
        layers: (1, 3),
        ..GenConfig::default()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let rows_a = emit_corpus(&cfg, 6, a.path(), Some(4)).unwrap();
    let rows_b = emit_corpus(&cfg, 6, b.path(), Some(4)).unwrap();
    assert_eq!(rows_a, rows_b);
    for (dir, i) in [("train", 0), ("train", 3), ("test", 5)] {
        let name = format!("{i:05}.svg");
        let x = std::fs::read(a.path().join(dir).join(&name)).unwrap();
        let y = std::fs::read(b.path().join(dir).join(&name)).unwrap();
        assert_eq!(x, y);
    }
}

mod oracles {
    use super::*;
    use clipvec_core::document::{ClipartDocument, FillColor, Layer};
    use clipvec_core::geometry::{
        mirror, path_centroid, polygonize, self_intersects, ClosedPath, CurveSegment, SymmetryAxis,
    };
    use clipvec_core::losses::{geometric_loss, LossWeights};
    use clipvec_core::raster::{rasterize_mask, soft_mask, SoftRenderParams};
    use rand::Rng;

    fn random_path(rng: &mut ChaCha8Rng) -> ClosedPath {
        let k = rng.random_range(3..7);
        let mut pt = || Point::new(rng.random_range(0.0..40.0), rng.random_range(0.0..40.0));
        let verts: Vec<Point> = (0..k).map(|_| pt()).collect();
        let segs = (0..k)
            .map(|i| {
                let (a, b) = (verts[i], verts[(i + 1) % k]);
                if i % 2 == 0 {
                    CurveSegment::line(a, b)
                } else {
                    CurveSegment::cubic(a, pt(), pt(), b)
                }
            })
            .collect();
        ClosedPath::new(segs).unwrap()
    }

    fn cross(o: Point, a: Point, b: Point) -> f64 {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    }

    fn within(a: Point, b: Point, q: Point) -> bool {
        q.x >= a.x.min(b.x) && q.x <= a.x.max(b.x) && q.y >= a.y.min(b.y) && q.y <= a.y.max(b.y)
    }

    fn touch(a: Point, b: Point, c: Point, d: Point) -> bool {
        let (d1, d2, d3, d4) = (cross(c, d, a), cross(c, d, b), cross(a, b, c), cross(a, b, d));
        if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
            return true;
        }
        (d1 == 0.0 && within(c, d, a))
            || (d2 == 0.0 && within(c, d, b))
            || (d3 == 0.0 && within(a, b, c))
            || (d4 == 0.0 && within(a, b, d))
    }

    fn brute(poly: &[Point]) -> bool {
        let n = poly.len();
        (0..n).any(|i| {
            (i + 2..n)
                .filter(|&j| !(i == 0 && j == n - 1))
                .any(|j| touch(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        })
    }

    #[test]
    fn self_intersects_matches_all_pairs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0;
        for _ in 0..500 {
            let path = random_path(&mut rng);
            let want = brute(&polygonize(&path, 16));
            assert_eq!(self_intersects(&path, 16), want);
            hits += usize::from(want);
        }
        assert!(hits > 50 && hits < 450, "{hits}");
    }

    #[test]
    fn losses_are_translation_invariant_and_total_is_weighted_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = LossWeights::new(1.0, 0.1).unwrap();
        for _ in 0..20 {
            let (a, b) = (random_path(&mut rng), random_path(&mut rng));
            let axis = SymmetryAxis::from_angle(Point::new(20.0, 20.0), rng.random_range(0.0..3.0)).unwrap();
            let l = geometric_loss(&a, &b, Some(&axis), &w, 60).unwrap();
            let sum = l.chamfer + l.mover + w.sym * (l.sym + l.csym) + w.smooth * l.smooth;
            assert!((l.total - sum).abs() <= 1e-12 * sum.max(1.0));
            for v in [l.chamfer, l.mover, l.sym, l.csym, l.smooth] {
                assert!(v >= 0.0);
            }
            let d = Point::new(7.5, -3.25);
            let moved = geometric_loss(&a.translated(d), &b.translated(d), None, &w, 60).unwrap();
            let still = geometric_loss(&a, &b, None, &w, 60).unwrap();
            assert!((moved.chamfer - still.chamfer).abs() <= 1e-9 * still.chamfer.max(1.0));
            assert!((moved.mover - still.mover).abs() <= 1e-9 * still.mover.max(1.0));
            assert!((moved.smooth - still.smooth).abs() <= 1e-9 * still.smooth.max(1.0));
        }
    }

    #[test]
    fn mirror_and_centroid_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let path = random_path(&mut rng);
            let axis = SymmetryAxis::from_angle(Point::new(10.0, 30.0), rng.random_range(0.0..3.0)).unwrap();
            let twice = mirror(&mirror(&path, &axis), &axis);
            for (p, q) in path.control_points().iter().zip(twice.control_points()) {
                assert!(p.dist(q) <= 1e-12);
            }
            if let Ok(c) = path_centroid(&path) {
                let d = Point::new(-4.0, 9.0);
                assert!(path_centroid(&path.translated(d)).unwrap().dist(c + d) <= 1e-9);
            }
        }
    }

    #[test]
    fn swapping_layers_changes_only_the_overlap() {
        let sq = |x: f64, y: f64, s: f64| {
            ClosedPath::polygon(&[
                Point::new(x, y),
                Point::new(x + s, y),
                Point::new(x + s, y + s),
                Point::new(x, y + s),
            ])
            .unwrap()
        };
        let (a, b) = (sq(4.3, 5.1, 14.0), sq(11.7, 9.2, 13.0));
        let (la, lb) = (
            Layer::new(a.clone(), FillColor::from_rgb8(200, 10, 10)),
            Layer::new(b.clone(), FillColor::from_rgb8(10, 10, 200)),
        );
        let doc = |first: &Layer, second: &Layer| {
            let mut d = ClipartDocument::new(32.0, 32.0);
            d.push(first.clone());
            d.push(second.clone());
            d
        };
        let (x, y) = (
            render_document(&doc(&la, &lb), 32, 32),
            render_document(&doc(&lb, &la), 32, 32),
        );
        let (ma, mb) = (rasterize_mask(&a, 32, 32, 4), rasterize_mask(&b, 32, 32, 4));
        let mut changed = 0;
        for px in 0..32 * 32 {
            let differs = (0..3).any(|c| x.data()[px * 3 + c] != y.data()[px * 3 + c]);
            if differs {
                changed += 1;
                assert!(ma.data[px] > 0.0 && mb.data[px] > 0.0);
            }
        }
        assert!(changed > 0);
        assert_eq!(render_document(&doc(&la, &lb), 32, 32), x);
    }

    #[test]
    fn soft_mask_approaches_hard_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let path = clipvec_core::pathgen::random_closed_path(&GenConfig::default(), &mut rng)
            .unwrap()
            .path;
        let hard = rasterize_mask(&path, 64, 64, 4);
        let mut last = f64::INFINITY;
        for bw in [2.0, 1.0, 0.5, 0.25, 0.125] {
            let soft = soft_mask(&path, 64, 64, &SoftRenderParams::new(bw, 4).unwrap()).unwrap();
            let err: f64 = soft.mask.data.iter().zip(&hard.data).map(|(s, h)| (s - h).abs()).sum();
            assert!(err < last, "bandwidth {bw}: {err} >= {last}");
            last = err;
        }
    }
}
