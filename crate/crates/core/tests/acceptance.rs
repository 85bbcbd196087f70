//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use common::{oracle_block, oracle_template};
use hopc::descriptor::{
    block_descriptor, compute_feature_field, dense_block_field, template_descriptor, DescriptorGeometry,
    FeatureField, FeatureMode, FeatureParams,
};
use hopc::eval::{benchmark_naive_vs_fast, sweep_border_margin, sweep_template_sizes, BenchRow, EvalReport};
use hopc::phasecong::{build_log_gabor_bank, fold_degrees, phase_features, FilterBankParams, PCParams};
use hopc::pipeline::{
    detect_interest_points, iterative_refine, register, warp_homography, ControlPoint,
    InterestPointConfig, RefineConfig, RegisterConfig,
};
use hopc::similarity::{
    descriptor_ncc, mi, naive_similarity_surface, ncc, resolve_match, similarity_surface, MatchConfig, MatchResult,
    MetricKind, PreparedImage,
};
use hopc::synth::{
    add_gaussian_noise, gaussian_intensity_field, make_synthetic_pair, procedural_texture, SyntheticPair,
    SyntheticParams,
};
use hopc::{GrayImage, Homography, Point2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

const SIDE: usize = 512;
const SWEEP_SIZES: [usize; 5] = [20, 36, 52, 68, 100];
const SWEEP_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const THREADS: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn synthetic_pair(seed: u64) -> SyntheticPair<f64> {
    let base = procedural_texture::<f64>(SIDE, SIDE, seed);
    make_synthetic_pair(&base, &SyntheticParams { seed, ..Default::default() }).expect("synthetic pair")
}

fn anchors(points: &[Point2]) -> Vec<(isize, isize)> {
    points.iter().map(|p| (p.x.round() as isize, p.y.round() as isize)).collect()
}

// ---- criterion 1 ----

struct Equivalence {
    max_score_diff: f64,
    argmax_mismatches: usize,
    subpixel_mismatches: usize,
    max_subpixel_diff: f64,
    failures_differ: usize,
    surfaces: usize,
    fingerprint: Vec<u64>,
}

fn fast_scheme_equivalence(pair: &SyntheticPair<f64>) -> Equivalence {
    let templates = [36, 68, 100];
    let base = MatchConfig {
        metric: MetricKind::HopcNcc,
        search_radius: 10,
        ..Default::default()
    };
    let margin = sweep_border_margin(&templates, &base);
    let mut pts = detect_interest_points(&pair.master, &InterestPointConfig::default(), margin);
    pts.truncate(50);
    let pm = PreparedImage::new(pair.master.clone(), &base).unwrap();
    let ps = PreparedImage::new(pair.slave.clone(), &base).unwrap();
    let mut eq = Equivalence {
        max_score_diff: 0.0,
        argmax_mismatches: 0,
        subpixel_mismatches: 0,
        max_subpixel_diff: 0.0,
        failures_differ: 0,
        surfaces: 0,
        fingerprint: Vec::new(),
    };
    for template in templates {
        let cfg = MatchConfig { template, ..base };
        for &p in &anchors(&pts) {
            let fast = similarity_surface(&pm, &ps, p, &cfg).unwrap();
            let naive = naive_similarity_surface(&pm, &ps, p, &cfg).unwrap();
            eq.surfaces += 1;
            for (a, b) in fast.scores.iter().zip(&naive.scores) {
                eq.max_score_diff = eq.max_score_diff.max((a - b).abs());
            }
            eq.fingerprint.extend(fast.scores.iter().map(|v| v.to_bits()));
            match (resolve_match(p, &fast), resolve_match(p, &naive)) {
                (Ok(a), Ok(b)) => {
                    if a.offset != b.offset {
                        eq.argmax_mismatches += 1;
                    }
                    let d = a.slave.distance(b.slave);
                    eq.max_subpixel_diff = eq.max_subpixel_diff.max(d);
                    if d > 1e-9 || a.refined != b.refined {
                        eq.subpixel_mismatches += 1;
                    }
                }
                (Err(_), Err(_)) => {}
                _ => eq.failures_differ += 1,
            }
        }
    }
    eq
}

fn criterion_1(eq: &Equivalence, elapsed: Duration) -> Outcome {
    let pass = eq.surfaces == 150
        && eq.max_score_diff <= 1e-9
        && eq.argmax_mismatches == 0
        && eq.subpixel_mismatches == 0
        && eq.failures_differ == 0
        && elapsed < Duration::from_secs(300);
    Outcome::new(
        pass,
        format!(
            "{} surfaces, max |naive - fast| = {:.2e}, argmax mismatches {}, max subpixel diff {:.2e} px, \
             subpixel mismatches {}, {:.1}s",
            eq.surfaces,
            eq.max_score_diff,
            eq.argmax_mismatches,
            eq.max_subpixel_diff,
            eq.subpixel_mismatches + eq.failures_differ,
            elapsed.as_secs_f64()
        ),
    )
}

// ---- criterion 2 ----

fn speed_rows(pair: &SyntheticPair<f64>) -> Vec<BenchRow> {
    let templates = [36, 68, 100];
    let base = MatchConfig::default();
    let margin = sweep_border_margin(&templates, &base);
    let mut pts = detect_interest_points(&pair.master, &InterestPointConfig::default(), margin);
    pts.truncate(200);
    benchmark_naive_vs_fast(&pair.master, &pair.slave, &pts, &templates, &[10], &base).unwrap()
}

fn criterion_2(rows: &[BenchRow]) -> Outcome {
    let row = |t: usize| rows.iter().find(|r| r.template == t).unwrap();
    let (r36, r68, r100) = (row(36), row(68), row(100));
    let pass = r68.points == 200 && r68.fast_seconds < r68.naive_seconds && r100.ratio > r36.ratio;
    Outcome::new(
        pass,
        format!(
            "{} points; naive/fast = {:.1}x @36, {:.1}x @68 ({:.2}s vs {:.2}s), {:.1}x @100",
            r68.points, r36.ratio, r68.ratio, r68.naive_seconds, r68.fast_seconds, r100.ratio
        ),
    )
}

// ---- criterion 3 ----

fn sweep_seed(seed: u64) -> EvalReport {
    let pair = synthetic_pair(seed);
    let base = MatchConfig::default();
    let margin = sweep_border_margin(&SWEEP_SIZES, &base);
    let mut pts = detect_interest_points(&pair.master, &InterestPointConfig::default(), margin);
    pts.truncate(200);
    let metrics = [MetricKind::HopcNcc, MetricKind::Mi, MetricKind::Ncc];
    let mut rep =
        sweep_template_sizes(&pair.master, &pair.slave, |p| pair.ground_truth(p), &pts, &metrics, &SWEEP_SIZES, &base, 0.5)
            .unwrap();
    rep.rows.iter_mut().for_each(|r| r.seconds = 0.0);
    rep
}

fn mean_cmr(reports: &[EvalReport], metric: MetricKind, size: usize) -> f64 {
    let v: Vec<f64> = reports
        .iter()
        .map(|r| r.get(metric, size).and_then(|row| row.cmr).unwrap_or(0.0))
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criterion_3(reports: &[EvalReport], points: usize, elapsed: Duration) -> Outcome {
    let mut pass = points == 200 && elapsed < Duration::from_secs(900);
    let mut cells = Vec::new();
    for size in SWEEP_SIZES {
        let h = mean_cmr(reports, MetricKind::HopcNcc, size);
        let m = mean_cmr(reports, MetricKind::Mi, size);
        let n = mean_cmr(reports, MetricKind::Ncc, size);
        pass &= h >= m && h >= n;
        cells.push(format!("{size}: hopc {h:.3} mi {m:.3} ncc {n:.3}"));
    }
    pass &= mean_cmr(reports, MetricKind::HopcNcc, 100) >= mean_cmr(reports, MetricKind::HopcNcc, 20);
    Outcome::new(
        pass,
        format!("mean CMR over {} seeds [{}], {:.0}s", reports.len(), cells.join("; "), elapsed.as_secs_f64()),
    )
}

// ---- criterion 4 ----

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut ncc_err: f64 = 0.0;
    let mut mi_asym: f64 = 0.0;
    let mut mi_const: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(16..400);
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let alpha = if rng.random::<bool>() { 1.0 } else { -1.0 } * rng.random_range(0.05..5.0);
        let beta = rng.random_range(-3.0..3.0);
        let t: Vec<f64> = a.iter().map(|v| alpha * v + beta).collect();
        ncc_err = ncc_err.max((ncc(&a, &t).unwrap().score - f64::signum(alpha)).abs());
        let bins = rng.random_range(2..64);
        mi_asym = mi_asym.max((mi(&a, &b, bins).unwrap() - mi(&b, &a, bins).unwrap()).abs());
        let c = vec![rng.random::<f64>(); n];
        mi_const = mi_const.max(mi(&a, &c, bins).unwrap().abs());
    }

    let img = procedural_texture::<f64>(256, 256, 44);
    let other = procedural_texture::<f64>(256, 256, 45);
    let inverted = img.map(|v| 1.0 - v);
    let g = DescriptorGeometry::default();
    let blocks = |i: &GrayImage| dense_block_field(&hopc_field(i), &g).unwrap();
    let (bi, bo, bv) = (blocks(&img), blocks(&other), blocks(&inverted));
    let mut out_of_range = 0;
    let mut inv_err: f64 = 0.0;
    for _ in 0..100 {
        let c = (rng.random_range(60..196) as isize, rng.random_range(60..196) as isize);
        let d = (c.0 + rng.random_range(-10..=10) as isize, c.1 + rng.random_range(-10..=10) as isize);
        let a = template_descriptor(&bi, c, 68, &g).unwrap();
        for s in [
            descriptor_ncc(&a, &template_descriptor(&bo, d, 68, &g).unwrap()).unwrap().score,
            descriptor_ncc(&a, &template_descriptor(&bi, d, 68, &g).unwrap()).unwrap().score,
        ] {
            if !(-1.0..=1.0).contains(&s) {
                out_of_range += 1;
            }
        }
        let v = template_descriptor(&bv, c, 68, &g).unwrap();
        for (x, y) in a.values.iter().zip(&v.values) {
            inv_err = inv_err.max((x - y).abs());
        }
    }
    let pass = ncc_err <= 1e-9 && mi_asym <= 1e-12 && mi_const == 0.0 && out_of_range == 0 && inv_err <= 1e-6;
    Outcome::new(
        pass,
        format!(
            "ncc affine err {ncc_err:.1e}, mi asymmetry {mi_asym:.1e}, mi(a, const) {mi_const:.1e}, \
             scores out of [-1,1] {out_of_range}, inversion err {inv_err:.1e}"
        ),
    )
}

// ---- criterion 5 ----

fn pc_maps(img: &GrayImage) -> (GrayImage, GrayImage) {
    let (w, h) = img.dims();
    let bank = build_log_gabor_bank(w, h, &FilterBankParams::default()).unwrap();
    let (pc, orient) = phase_features(img, &bank, &PCParams::default()).unwrap();
    (pc.amplitude, orient.folded())
}

fn criterion_5() -> Outcome {
    let mut range_ok = true;
    let mut contrast: f64 = 0.0;
    for seed in 0..3 {
        let img = procedural_texture::<f64>(256, 256, 50 + seed);
        let (a, _) = pc_maps(&img);
        let (b, _) = pc_maps(&img.map(|v| 0.5 * v + 0.2));
        range_ok &= a.data().iter().chain(b.data()).all(|v| (0.0..=1.0).contains(v));
        let d = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.data().len() as f64;
        contrast = contrast.max(d);
    }
    let (flat, _) = pc_maps(&GrayImage::filled(128, 128, 0.6));
    let constant_zero = flat.data().iter().all(|&v| v == 0.0);

    let (w, h) = (128, 96);
    let (step, step_orient) = pc_maps(&GrayImage::from_fn(w, h, |x, _| if x < 64 { 0.25 } else { 0.75 }));
    let margin = FilterBankParams::default().border_margin();
    let mut step_ok = true;
    for y in 0..h {
        let row = step.row(y);
        let best = (margin..w - margin).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        let o = step_orient.get(best, y);
        step_ok &= (best == 63 || best == 64) && o.min(180.0 - o) < 10.0;
    }

    let n = 160;
    let c = (n as f64 - 1.0) / 2.0;
    let disk = GrayImage::from_fn(n, n, |x, y| {
        let r = (x as f64 - c).hypot(y as f64 - c);
        0.5 + 0.35 * ((45.0 - r) / 1.5).tanh() + 0.05 * ((x as f64 + 2.0 * y as f64) / 23.0).sin()
    });
    let (pc, orient) = pc_maps(&disk);
    let (mut checked, mut worst) = (0, 0.0f64);
    for y in 0..n {
        for x in 0..n {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            if pc.get(x, y) < 0.5 || (dx.hypot(dy) - 45.0).abs() > 3.0 {
                continue;
            }
            let oracle = fold_degrees(dy.atan2(dx).to_degrees());
            let d = (oracle - orient.get(x, y)).abs();
            worst = worst.max(d.min(180.0 - d));
            checked += 1;
        }
    }
    let pass = range_ok && constant_zero && contrast < 0.05 && step_ok && checked > 100 && worst <= 10.0;
    Outcome::new(
        pass,
        format!(
            "range ok {range_ok}, constant -> 0 {constant_zero}, contrast |dPC| {contrast:.4}, \
             step peak ok {step_ok}, orientation err max {worst:.2} deg over {checked} px"
        ),
    )
}

// ---- criterion 6 ----

fn hopc_field(img: &GrayImage) -> FeatureField<f64> {
    compute_feature_field(img, FeatureMode::PhaseCongruency, &FeatureParams::default()).unwrap()
}

fn criterion_6() -> Outcome {
    let img = procedural_texture::<f64>(SIDE, SIDE, 66);
    let field = hopc_field(&img);
    let g = DescriptorGeometry::default();
    let dense = dense_block_field(&field, &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let half = (g.block_width() / 2) as i64;
    let (mut block_err, mut oracle_err, mut max_norm) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let cx = rng.random_range(half..SIDE as i64 - half) as isize;
        let cy = rng.random_range(half..SIDE as i64 - half) as isize;
        let fast = dense.descriptor_at(cx, cy).unwrap();
        let naive = block_descriptor(&field, cx, cy, &g).unwrap();
        let oracle = oracle_block(&field, cx, cy, &g);
        for ((f, n), o) in fast.iter().zip(&naive).zip(&oracle) {
            block_err = block_err.max((f - n).abs());
            oracle_err = oracle_err.max((f - o).abs());
        }
        max_norm = max_norm.max(fast.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let mut template_err = 0.0f64;
    for size in SWEEP_SIZES {
        for _ in 0..4 {
            let lo = (size / 2 + 1) as i64;
            let c = (
                rng.random_range(lo..SIDE as i64 - lo) as isize,
                rng.random_range(lo..SIDE as i64 - lo) as isize,
            );
            let t = template_descriptor(&dense, c, size, &g).unwrap();
            let o = oracle_template(&field, c, size, &g);
            for (a, b) in t.values.iter().zip(&o) {
                template_err = template_err.max((a - b).abs());
            }
        }
    }
    let pass = block_err <= 1e-9 && oracle_err <= 1e-9 && template_err <= 1e-9 && max_norm <= 1.0 + 1e-9;
    Outcome::new(
        pass,
        format!(
            "dense vs naive {block_err:.1e}, dense vs definition {oracle_err:.1e}, \
             template vs whole window {template_err:.1e}, max block norm {max_norm:.6}"
        ),
    )
}

// ---- criterion 7 ----

fn recovery_homography() -> Homography {
    Homography::from_row_major([1.005, 0.004, 2.0, -0.003, 0.997, -1.5, 3.0e-6, -2.0e-6, 1.0]).unwrap()
}

struct Recovery {
    corner_displacement: f64,
    refined: usize,
    fit_rmse: f64,
    check_rmse: f64,
    error: Option<String>,
    fingerprint: Vec<u64>,
}

fn pipeline_recovery() -> Recovery {
    let h = recovery_homography();
    let corners = [(0.0, 0.0), (511.0, 0.0), (0.0, 511.0), (511.0, 511.0)];
    let corner_displacement = corners
        .iter()
        .map(|&(x, y)| {
            let p = Point2::new(x, y);
            h.apply(p).unwrap().distance(p)
        })
        .fold(0.0, f64::max);
    let master = procedural_texture::<f64>(SIDE, SIDE, 7);
    let moved = warp_homography(&master, &h.inverse().unwrap(), (SIDE, SIDE));
    let params = SyntheticParams {
        seed: 7,
        noise_variance: 0.05,
        ..Default::default()
    };
    let lit = gaussian_intensity_field(&moved, &params).unwrap();
    let slave = add_gaussian_noise(&lit, 0.05, 7).unwrap();
    let cfg = RegisterConfig::default();
    match register(&master, &slave, &cfg) {
        Ok(r) => {
            let check: Vec<Point2> = (0..20)
                .flat_map(|j| (0..20).map(move |i| Point2::new(64.0 + i as f64 * 20.0, 64.0 + j as f64 * 20.0)))
                .collect();
            let sq: f64 = check
                .iter()
                .map(|&p| {
                    let d = r.transform.apply(p).unwrap().distance(h.apply(p).unwrap());
                    d * d
                })
                .sum();
            let mut fingerprint: Vec<u64> = r.report.homography.iter().map(|v| v.to_bits()).collect();
            fingerprint.extend(r.warped.data().iter().map(|v| v.to_bits()));
            fingerprint.extend(r.control_points.iter().flat_map(|c| [c.slave().x.to_bits(), c.slave().y.to_bits()]));
            Recovery {
                corner_displacement,
                refined: r.report.counts.refined,
                fit_rmse: r.report.rmse,
                check_rmse: (sq / check.len() as f64).sqrt(),
                error: None,
                fingerprint,
            }
        }
        Err(e) => Recovery {
            corner_displacement,
            refined: 0,
            fit_rmse: f64::NAN,
            check_rmse: f64::INFINITY,
            error: Some(e.to_string()),
            fingerprint: Vec::new(),
        },
    }
}

fn criterion_7(r: &Recovery, elapsed: Duration) -> Outcome {
    let pass = r.error.is_none()
        && r.corner_displacement <= 8.0
        && r.refined >= 6
        && r.check_rmse < 0.5
        && elapsed < Duration::from_secs(600);
    let status = r.error.clone().unwrap_or_else(|| "registered".into());
    Outcome::new(
        pass,
        format!(
            "{status}; corner displacement {:.2} px, {} CPs, fit RMSE {:.3}, check-point RMSE {:.3} px, {:.0}s",
            r.corner_displacement,
            r.refined,
            r.fit_rmse,
            r.check_rmse,
            elapsed.as_secs_f64()
        ),
    )
}

// ---- criterion 8 ----

struct RefineCase {
    dropped: Vec<Point2>,
    outlier: Point2,
    kept: usize,
    rmse: f64,
    fingerprint: Vec<u64>,
}

fn refine_case() -> RefineCase {
    let h = Homography::from_row_major([1.01, 0.02, 3.0, -0.015, 0.99, -2.0, 2e-5, -1e-5, 1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut cps: Vec<ControlPoint> = (0..20)
        .map(|_| {
            let m = Point2::new(rng.random_range(20.0..490.0), rng.random_range(20.0..490.0));
            ControlPoint::new(MatchResult {
                master: m,
                slave: h.apply(m).unwrap(),
                score: 1.0,
                offset: (0, 0),
                at_boundary: false,
                refined: true,
            })
        })
        .collect();
    let outlier = cps[11].master();
    cps[11].matched.slave = cps[11].matched.slave + Point2::new(-12.0, 16.0);
    let out = iterative_refine(&cps, &RefineConfig::default()).unwrap();
    let dropped = out.culled.iter().chain(&out.removed).map(|c| c.master()).collect();
    let mut fingerprint: Vec<u64> = out.homography.to_row_major().iter().map(|v| v.to_bits()).collect();
    fingerprint.push(out.rmse.to_bits());
    RefineCase {
        dropped,
        outlier,
        kept: out.kept.len(),
        rmse: out.rmse,
        fingerprint,
    }
}

fn criterion_8(c: &RefineCase) -> Outcome {
    let pass = c.dropped == [c.outlier] && c.kept == 19 && c.rmse < 1.0;
    Outcome::new(
        pass,
        format!("dropped {} point(s), outlier dropped {}, {} kept, RMSE {:.2e} px", c.dropped.len(), c.dropped.contains(&c.outlier), c.kept, c.rmse),
    )
}

// ---- criterion 9 ----

fn criterion_9(
    first: (&Equivalence, &[EvalReport], &Recovery, &RefineCase),
    threads: usize,
) -> Outcome {
    let pair = synthetic_pair(1);
    let (eq, reports, rec, refine) = first;
    let again = in_pool(1, || {
        (
            fast_scheme_equivalence(&pair).fingerprint,
            sweep_seed(SWEEP_SEEDS[0]),
            pipeline_recovery().fingerprint,
            refine_case().fingerprint,
        )
    });
    let features = |n| {
        in_pool(n, || {
            let f = hopc_field(&pair.slave);
            f.amplitude.data().iter().chain(f.orientation.data()).map(|v| v.to_bits()).collect::<Vec<_>>()
        })
    };
    let checks = [
        ("surfaces", again.0 == eq.fingerprint),
        ("sweep", again.1 == reports[0]),
        ("registration", again.2 == rec.fingerprint),
        ("refinement", again.3 == refine.fingerprint),
        ("features", features(1) == features(threads)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Outcome::new(
        failed.is_empty(),
        format!(
            "reruns on 1 thread vs {threads}: {}",
            if failed.is_empty() { "all bit-identical".to_string() } else { format!("differ in {}", failed.join(", ")) }
        ),
    )
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

fn main() -> ExitCode {
    let names = [
        "fast-scheme equivalence",
        "fast-scheme speed",
        "synthetic metric ordering",
        "metric properties",
        "phase congruency",
        "descriptor oracle",
        "pipeline recovery",
        "refinement contract",
        "determinism",
    ];
    let report = |n: usize, o: &Outcome| {
        println!(
            "{} criterion {n} ({}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            names[n - 1],
            o.detail
        );
        o.pass
    };
    let mut all = true;

    let pair = synthetic_pair(1);
    let (eq, t1) = timed(|| in_pool(THREADS, || fast_scheme_equivalence(&pair)));
    all &= report(1, &criterion_1(&eq, t1));

    let rows = in_pool(THREADS, || speed_rows(&pair));
    all &= report(2, &criterion_2(&rows));

    let (reports, t3) = timed(|| in_pool(THREADS, || SWEEP_SEEDS.iter().map(|&s| sweep_seed(s)).collect::<Vec<_>>()));
    let pts_200 = {
        let base = MatchConfig::default();
        detect_interest_points(&pair.master, &InterestPointConfig::default(), sweep_border_margin(&SWEEP_SIZES, &base))
            .len()
            .min(200)
    };
    all &= report(3, &criterion_3(&reports, pts_200, t3));

    all &= report(4, &in_pool(THREADS, criterion_4));
    all &= report(5, &in_pool(THREADS, criterion_5));
    all &= report(6, &in_pool(THREADS, criterion_6));

    let (rec, t7) = timed(|| in_pool(THREADS, pipeline_recovery));
    all &= report(7, &criterion_7(&rec, t7));

    let refine = in_pool(THREADS, refine_case);
    all &= report(8, &criterion_8(&refine));

    all &= report(9, &criterion_9((&eq, &reports, &rec, &refine), THREADS));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
