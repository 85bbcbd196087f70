use hopc::eval::{
    benchmark_naive_vs_fast, cmr, count_correct, similarity_curve, surface_image, sweep_border_margin,
    sweep_template_sizes, write_surface_csv,
};
use hopc::pipeline::{detect_interest_points, InterestPointConfig};
use hopc::similarity::{MatchConfig, MatchResult, MetricKind};
use hopc::synth::{
    gaussian_centers, intensity_multiplier, make_synthetic_pair, noise_samples, piecewise_linear_intensity_map,
    procedural_texture, SyntheticParams,
};
use hopc::{Error, GrayImage, Point2};
use proptest::prelude::*;

#[test]
fn noise_stream_statistics() {
    let var = 0.2;
    let n = 1_000_000;
    let s = noise_samples(n, var, 42);
    let mean = s.iter().sum::<f64>() / n as f64;
    let v = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() < 0.01, "{mean}");
    assert!((v - var).abs() < 0.05 * var, "{v}");
}

#[test]
fn multiplier_far_and_near() {
    let far = [Point2::new(1000.0, 1000.0)];
    assert!((intensity_multiplier(Point2::new(600.0, 1000.0), &far, 80.0, 0.1) - 0.1).abs() < 1e-5);
    let c = [Point2::new(10.0, 20.0)];
    assert_eq!(intensity_multiplier(c[0], &c, 80.0, 0.1), 1.1);
    let three = [Point2::new(0.0, 0.0), Point2::new(5000.0, 0.0), Point2::new(0.0, 5000.0)];
    assert!((intensity_multiplier(three[0], &three, 80.0, 0.1) - (0.1 + 1.0 / 3.0)).abs() < 1e-12);
}

#[test]
fn pair_is_seeded_and_radiometrically_distinct() {
    let base = procedural_texture::<f64>(256, 256, 1);
    let params = SyntheticParams {
        seed: 7,
        ..Default::default()
    };
    let a = make_synthetic_pair(&base, &params).unwrap();
    let b = make_synthetic_pair(&base, &params).unwrap();
    assert_eq!(a.master, b.master);
    assert_eq!(a.slave, b.slave);
    assert_eq!(a.centers, gaussian_centers(256, 256, 3, 7));
    let diff = a
        .master
        .data()
        .iter()
        .zip(a.slave.data())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / a.master.data().len() as f64;
    assert!(diff > 0.05, "{diff}");
    let p = Point2::new(12.5, 99.0);
    assert_eq!(a.ground_truth(p), p);
    let other = make_synthetic_pair(&base, &SyntheticParams { seed: 8, ..params }).unwrap();
    assert_ne!(other.slave, a.slave);
}

#[test]
fn identical_images_give_full_cmr() {
    let img = procedural_texture::<f64>(192, 192, 5);
    let base = MatchConfig {
        search_radius: 5,
        ..Default::default()
    };
    let sizes = [20, 36];
    let pts = detect_interest_points(&img, &InterestPointConfig::default(), sweep_border_margin(&sizes, &base));
    assert!(!pts.is_empty());
    let rep = sweep_template_sizes(&img, &img, |p| p, &pts, &MetricKind::ALL, &sizes, &base, 0.5).unwrap();
    assert_eq!(rep.rows.len(), 8);
    for r in &rep.rows {
        assert_eq!(r.matched, pts.len());
        assert_eq!(r.cmr, Some(1.0), "{} {}", r.metric, r.template);
    }
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "metric,template,C,CM,cmr,seconds");
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn curve_export_shape() {
    let img = procedural_texture::<f64>(128, 128, 6);
    let cfg = MatchConfig {
        metric: MetricKind::Ncc,
        template: 36,
        search_radius: 8,
        ..Default::default()
    };
    let s = similarity_curve(&img, &img, (64, 64), &cfg).unwrap();
    let raster = surface_image(&s);
    assert_eq!(raster.dims(), (17, 17));
    assert_eq!(raster.get(8, 8), 1.0);
    let mut csv = Vec::new();
    write_surface_csv(&mut csv, &s).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "dx,dy,score");
    assert_eq!(text.lines().count(), 17 * 17 + 1);
}

#[test]
fn benchmark_schemes_agree() {
    let base = procedural_texture::<f64>(160, 160, 9);
    let pair = make_synthetic_pair(&base, &SyntheticParams::default()).unwrap();
    let cfg = MatchConfig::default();
    let pts = detect_interest_points(&pair.master, &InterestPointConfig::default(), sweep_border_margin(&[52], &cfg));
    let rows = benchmark_naive_vs_fast(&pair.master, &pair.slave, &pts[..10], &[36, 52], &[4], &cfg).unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r.max_score_diff < 1e-9);
        assert!(r.same_argmax);
        assert!(r.max_subpixel_diff < 1e-9);
        assert_eq!(r.points, 10);
    }
}

#[test]
fn cmr_needs_matches() {
    assert!(matches!(cmr(&[], |p| p, 0.5), Err(Error::NoMatches)));
}

fn matches_from(offsets: &[(f64, f64)]) -> Vec<MatchResult> {
    offsets
        .iter()
        .enumerate()
        .map(|(i, &(dx, dy))| {
            let m = Point2::new(i as f64, 2.0 * i as f64);
            MatchResult {
                master: m,
                slave: Point2::new(m.x + dx, m.y + dy),
                score: 0.5,
                offset: (0, 0),
                at_boundary: false,
                refined: true,
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn cmr_bounded_and_monotone(offsets in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..60), t in 0.01f64..3.0, shrink in 0.0f64..1.0) {
        let ms = matches_from(&offsets);
        let loose = cmr(&ms, |p| p, t).unwrap();
        let tight = cmr(&ms, |p| p, t * shrink).unwrap();
        prop_assert!((0.0..=1.0).contains(&loose));
        prop_assert!(tight <= loose);
        let c = count_correct(&ms, |p| p, t);
        prop_assert!(c.correct <= c.matched);
    }

    #[test]
    fn monotone_map_preserves_order(a in 0.0f64..1.0, b in 0.0f64..1.0, y1 in 0.05f64..0.45, y2 in 0.55f64..0.95) {
        let img = GrayImage::new(2, 1, vec![a, b]).unwrap();
        let out = piecewise_linear_intensity_map(&img, &[(0.0, 0.0), (0.3, y1), (0.7, y2), (1.0, 1.0)]).unwrap();
        let (oa, ob) = (out.get(0, 0), out.get(1, 0));
        if a < b { prop_assert!(oa < ob) } else if a > b { prop_assert!(oa > ob) } else { prop_assert_eq!(oa, ob) }
    }
}
