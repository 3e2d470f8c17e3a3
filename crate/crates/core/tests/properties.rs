use inkforge::eval::{char_f1, chamfer, CharBox};
use inkforge::geo::{build_graph, plan_traversal, skeletonize, BinaryImage, Walk};
use inkforge::inkml::{parse_inkml, serialize_inkml, InkmlDocument};
use inkforge::normalize::{fit_to_canvas, resample_time, simplify, CanvasTransform, ResampleSpec, SimplifySpec};
use inkforge::raster::{fit_image, render, AugmentationSpec};
use inkforge::tokens::{decode_ink, encode_ink, DecodeOptions, Token, TokenSeq, Vocabulary};
use inkforge::{BBox, DigitalInk, Ink, Point, RasterImage, Stroke};
use proptest::prelude::*;

fn coords(range: f64, max_strokes: usize, max_points: usize) -> impl Strategy<Value = Vec<Vec<(f64, f64)>>> {
    prop::collection::vec(
        prop::collection::vec((-range..range, -range..range), 1..=max_points),
        1..=max_strokes,
    )
}

fn ink_from(strokes: &[Vec<(f64, f64)>]) -> Ink {
    DigitalInk::new(strokes.iter().map(|s| Stroke::from_xy(s).unwrap()).collect())
}

fn timed_ink(strokes: &[Vec<(f64, f64)>], dt: f64) -> Ink {
    let mut t = 0.0;
    DigitalInk::new(
        strokes
            .iter()
            .map(|s| {
                let pts = s
                    .iter()
                    .map(|&(x, y)| {
                        t += dt;
                        Point::new(x, y, t)
                    })
                    .collect();
                Stroke::new(pts).unwrap()
            })
            .collect(),
    )
}

fn shape(ink: &Ink) -> Vec<usize> {
    ink.strokes().iter().map(Stroke::len).collect()
}

fn valid(ink: &Ink) -> bool {
    ink.strokes().iter().all(|s| Stroke::new(s.points().to_vec()).is_ok())
}

fn transform() -> impl Strategy<Value = CanvasTransform<f64>> {
    (0.05f64..20.0, -500.0f64..500.0, -500.0f64..500.0).prop_map(|(s, x, y)| CanvasTransform::new(s, x, y, 224).unwrap())
}

proptest! {
    #[test]
    fn transform_is_a_group_action(c in coords(300.0, 4, 8), a in transform(), b in transform()) {
        let ink = ink_from(&c);
        let twice = ink.transform(&a).unwrap().transform(&b).unwrap();
        let once = ink.transform(&a.then(&b)).unwrap();
        prop_assert_eq!(shape(&twice), shape(&ink));
        for (p, q) in twice.points().zip(once.points()) {
            prop_assert!((p.x - q.x).abs() <= 1e-9 * (1.0 + p.x.abs()));
            prop_assert!((p.y - q.y).abs() <= 1e-9 * (1.0 + p.y.abs()));
        }
    }

    #[test]
    fn bounds_scale_with_uniform_scale(c in coords(300.0, 4, 8), s in 0.01f64..50.0) {
        let ink = ink_from(&c);
        let b = ink.bounds().unwrap();
        let t = CanvasTransform::new(s, 0.0, 0.0, 224).unwrap();
        let sb = ink.transform(&t).unwrap().bounds().unwrap();
        for (got, want) in [(sb.x_min, b.x_min), (sb.y_min, b.y_min), (sb.x_max, b.x_max), (sb.y_max, b.y_max)] {
            prop_assert!((got - want * s).abs() <= 1e-9 * (1.0 + want.abs() * s));
        }
    }

    #[test]
    fn rotation_keeps_shape(c in coords(100.0, 4, 8), angle in -3.2f64..3.2) {
        let ink = ink_from(&c);
        let r = ink.rotate(angle, 1.0, 2.0);
        prop_assert_eq!(shape(&r), shape(&ink));
        prop_assert!(valid(&r));
    }

    #[test]
    fn inkml_round_trip_is_exact(
        strokes in prop::collection::vec(prop::collection::vec((-1_000_000_000i64..1_000_000_000, -1_000_000_000i64..1_000_000_000, 0u32..50_000), 1..6), 1..4),
    ) {
        let mut t = 0i64;
        let ink: Ink = DigitalInk::new(strokes.iter().map(|s| {
            Stroke::new(s.iter().map(|&(x, y, dt)| {
                t += dt as i64;
                Point::new(x as f64 / 1e6, y as f64 / 1e6, t as f64 / 1e6)
            }).collect()).unwrap()
        }).collect()).with_meta("label", "a<b&c");
        let doc = InkmlDocument::single(ink);
        let text = serialize_inkml(&doc).unwrap();
        let back = parse_inkml::<f64>(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize_inkml(&back).unwrap(), text);
    }

    #[test]
    fn simplify_keeps_a_subset(c in coords(100.0, 3, 30), eps in 0.0f64..20.0) {
        let ink = timed_ink(&c, 0.01);
        let out = simplify(&ink, &SimplifySpec { epsilon: eps }).unwrap();
        prop_assert_eq!(out.strokes().len(), ink.strokes().len());
        for (s, o) in ink.strokes().iter().zip(out.strokes()) {
            prop_assert!(o.len() <= s.len());
            prop_assert_eq!(o.first(), s.first());
            prop_assert_eq!(o.last(), s.last());
            let mut it = s.points().iter();
            for p in o.points() {
                prop_assert!(it.any(|q| q == p), "retained points must be an ordered subsequence");
            }
        }
    }

    #[test]
    fn resample_keeps_endpoints(c in coords(100.0, 3, 12), dt in 0.001f64..0.05, period in 0.005f64..0.05) {
        let ink = timed_ink(&c, dt);
        let out = resample_time(&ink, &ResampleSpec { period }).unwrap();
        prop_assert!(valid(&out));
        for (s, o) in ink.strokes().iter().zip(out.strokes()) {
            prop_assert_eq!(o.first(), s.first());
            prop_assert_eq!(o.last(), s.last());
        }
    }

    #[test]
    fn fit_bounds_inverse_and_idempotence(c in coords(1000.0, 4, 10), n in 1u32..512) {
        let ink = ink_from(&c);
        let (fitted, t) = fit_to_canvas(&ink, n).unwrap();
        let b = fitted.bounds().unwrap();
        let size = n as f64;
        let tol = 1e-6;
        prop_assert!(b.x_min >= -tol && b.y_min >= -tol && b.x_max <= size + tol && b.y_max <= size + tol);
        let (w, h) = (b.width(), b.height());
        if w.max(h) > 0.0 {
            prop_assert!((w.max(h) - size).abs() <= tol);
        }
        let back = fitted.transform(&t.inverse()).unwrap();
        for (p, q) in back.points().zip(ink.points()) {
            prop_assert!((p.x - q.x).abs() <= 1e-6 && (p.y - q.y).abs() <= 1e-6);
        }
        let (again, t2) = fit_to_canvas(&fitted, n).unwrap();
        prop_assert!((t2.scale - 1.0).abs() <= 1e-6 && t2.offset_x.abs() <= 1e-6 && t2.offset_y.abs() <= 1e-6);
        for (p, q) in again.points().zip(fitted.points()) {
            prop_assert!((p.x - q.x).abs() <= 1e-6 && (p.y - q.y).abs() <= 1e-6);
        }
    }

    #[test]
    fn integer_inks_round_trip_exactly(
        strokes in prop::collection::vec(prop::collection::vec((0u32..=224, 0u32..=224), 1..10), 1..6),
    ) {
        let vocab = Vocabulary::default();
        let ink: Ink = DigitalInk::new(strokes.iter().map(|s| {
            let xy: Vec<(f64, f64)> = s.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
            Stroke::from_xy(&xy).unwrap()
        }).collect());
        let seq = encode_ink(&ink, &vocab).unwrap();
        let back = decode_ink::<f64>(&seq, &vocab, &DecodeOptions::default()).unwrap();
        prop_assert!(back.diagnostics.is_empty());
        prop_assert_eq!(shape(&back.ink), shape(&ink));
        for (p, q) in back.ink.points().zip(ink.points()) {
            prop_assert_eq!((p.x, p.y), (q.x, q.y));
        }
    }

    #[test]
    fn encoding_follows_the_grammar(c in coords(120.0, 5, 10)) {
        let vocab = Vocabulary::default();
        let (ink, _) = fit_to_canvas(&ink_from(&c), 224).unwrap();
        let seq = encode_ink(&ink, &vocab).unwrap();
        // ( b (X Y)+ )*
        let mut i = 0;
        let toks = &seq.0;
        while i < toks.len() {
            prop_assert_eq!(toks[i], Token::BeginStroke);
            i += 1;
            let start = i;
            while i + 1 < toks.len() + 1 && i < toks.len() && matches!(toks[i], Token::X(_)) {
                prop_assert!(matches!(toks.get(i + 1), Some(Token::Y(_))));
                i += 2;
            }
            prop_assert!(i > start);
        }
        let ids = vocab.to_ids(&seq).unwrap();
        prop_assert!(ids.iter().all(|&id| id < vocab.ink_token_count()));
    }

    #[test]
    fn tolerant_decode_is_total(ids in prop::collection::vec(0u32..(451 + 40), 0..200)) {
        let vocab = Vocabulary::default();
        let seq = vocab.from_ids(&ids).unwrap();
        let out = decode_ink::<f64>(&seq, &vocab, &DecodeOptions::default()).unwrap();
        prop_assert!(valid(&out.ink));
        prop_assert!(out.ink.strokes().iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn token_text_round_trip(ids in prop::collection::vec(0u32..(451 + 40), 0..60)) {
        let vocab = Vocabulary::default();
        let seq = vocab.from_ids(&ids).unwrap();
        prop_assert_eq!(TokenSeq::from_text(&seq.to_text()).unwrap(), seq);
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let u = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    (p.0 - a.0 - u * dx).hypot(p.1 - a.1 - u * dy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plain_render_stays_near_the_ink(c in coords(30.0, 3, 6), width in 1.0f64..6.0) {
        let (ink, _) = fit_to_canvas(&ink_from(&c), 40).unwrap();
        let spec = AugmentationSpec::plain(width);
        let img = render(&ink, 48, &spec).unwrap();
        prop_assert_eq!(&img, &render(&ink, 48, &spec).unwrap());
        for y in 0..48u32 {
            for x in 0..48u32 {
                if img.get(x, y) == [255, 255, 255] {
                    continue;
                }
                let p = (x as f64 + 0.5, y as f64 + 0.5);
                let d = ink.strokes().iter().flat_map(|s| {
                    let pts = s.points();
                    let segs: Vec<f64> = if pts.len() == 1 {
                        vec![segment_distance(p, (pts[0].x, pts[0].y), (pts[0].x, pts[0].y))]
                    } else {
                        pts.windows(2).map(|w| segment_distance(p, (w[0].x, w[0].y), (w[1].x, w[1].y))).collect()
                    };
                    segs
                }).fold(f64::INFINITY, f64::min);
                prop_assert!(d <= width / 2.0 + 1.0, "pixel ({x},{y}) is {d} from the ink");
            }
        }
    }

    #[test]
    fn fit_image_maps_content_corners_back(w in 1u32..120, h in 1u32..120, m in 8u32..100) {
        let img = RasterImage::filled(w, h, [9, 9, 9]).unwrap();
        let (out, t) = fit_image(&img, m).unwrap();
        prop_assert_eq!((out.width(), out.height()), (m, m));
        let inv = t.inverse();
        let (cx0, cy0) = t.apply(0.0, 0.0);
        let (cx1, cy1) = t.apply(w as f64, h as f64);
        let (x0, y0) = inv.apply(cx0, cy0);
        let (x1, y1) = inv.apply(cx1, cy1);
        prop_assert!(x0.abs() <= 0.5 && y0.abs() <= 0.5);
        prop_assert!((x1 - w as f64).abs() <= 0.5 && (y1 - h as f64).abs() <= 0.5);
        prop_assert!(cx0 >= -1e-9 && cy0 >= -1e-9 && cx1 <= m as f64 + 1e-9 && cy1 <= m as f64 + 1e-9);
    }

    #[test]
    fn thinning_is_idempotent_and_keeps_components(
        bits in prop::collection::vec(prop::bool::weighted(0.45), 24 * 24),
    ) {
        let mut img = BinaryImage::new(24, 24);
        for (i, &b) in bits.iter().enumerate() {
            img.set(i as u32 % 24, i as u32 / 24, b);
        }
        let skel = skeletonize(&img);
        prop_assert_eq!(skel.components(), img.components());
        prop_assert_eq!(&skeletonize(&skel), &skel);
        prop_assert!(skel.iter_foreground().all(|(x, y)| img.get(x as i64, y as i64)));
    }

    #[test]
    fn traversal_walks_every_edge_once(
        bits in prop::collection::vec(prop::bool::weighted(0.45), 24 * 24),
    ) {
        let mut img = BinaryImage::new(24, 24);
        for (i, &b) in bits.iter().enumerate() {
            img.set(i as u32 % 24, i as u32 / 24, b);
        }
        let skel = skeletonize(&img);
        let g = build_graph(&skel);
        let mut covered = std::collections::BTreeSet::new();
        for e in &g.edges {
            covered.extend(e.pixels.iter().copied());
        }
        for n in &g.nodes {
            covered.extend(n.pixels.iter().copied());
        }
        let all: std::collections::BTreeSet<(u32, u32)> = skel.iter_foreground().collect();
        prop_assert_eq!(covered, all);
        let mut seen = vec![0; g.edges.len()];
        let mut dots = 0;
        for w in plan_traversal(&g) {
            match w {
                Walk::Path(steps) => steps.iter().for_each(|&(e, _)| seen[e] += 1),
                Walk::Dot(_) => dots += 1,
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(dots, g.nodes.iter().filter(|n| n.kind == inkforge::geo::NodeKind::Isolated).count());
    }
}

fn char_boxes(max: usize) -> impl Strategy<Value = Vec<CharBox<f64>>> {
    prop::collection::vec((0.0f64..60.0, 0.0f64..60.0, 2.0f64..30.0, 2.0f64..30.0, 0usize..3), 0..=max).prop_map(|v| {
        v.into_iter()
            .map(|(x, y, w, h, c)| CharBox::new(BBox::new(x, y, x + w, y + h).unwrap(), ['a', 'b', 'c'][c]))
            .collect()
    })
}

proptest! {
    #[test]
    fn f1_is_symmetric(pred in char_boxes(6), truth in char_boxes(6), thr in 0.1f64..0.9) {
        let ab = char_f1(&pred, &truth, thr).unwrap();
        let ba = char_f1(&truth, &pred, thr).unwrap();
        prop_assert_eq!(ab.matches.len(), ba.matches.len());
        prop_assert_eq!(ab.precision, ba.recall);
        prop_assert_eq!(ab.recall, ba.precision);
        prop_assert_eq!(ab.f1, ba.f1);
    }

    #[test]
    fn spurious_boxes_never_raise_precision(pred in char_boxes(6), truth in char_boxes(6), x in 0.0f64..60.0) {
        let before = char_f1(&pred, &truth, 0.5).unwrap();
        let mut more = pred.clone();
        more.push(CharBox::new(BBox::new(x, x, x + 10.0, x + 10.0).unwrap(), 'z'));
        let after = char_f1(&more, &truth, 0.5).unwrap();
        prop_assert!(after.precision <= before.precision || pred.is_empty() && truth.is_empty());
        prop_assert!((0.0..=1.0).contains(&after.f1));
    }

    #[test]
    fn chamfer_is_symmetric_and_zero_on_self(a in coords(50.0, 3, 6), b in coords(50.0, 3, 6)) {
        let (a, b) = (ink_from(&a), ink_from(&b));
        let ab = chamfer(&a, &b, 0.5).unwrap();
        prop_assert!((ab - chamfer(&b, &a, 0.5).unwrap()).abs() <= 1e-9);
        prop_assert_eq!(chamfer(&a, &a, 0.5).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
    }
}
