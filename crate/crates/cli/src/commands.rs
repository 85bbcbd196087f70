use crate::config::RunConfig;
use crate::{CurveArgs, DescrArgs, Failure, MatchArgs, PairArgs, PcArgs, RegisterArgs, SweepArgs, SynthArgs, TimingArgs};
use anyhow::{anyhow, Context};
use hopc::descriptor::{compute_feature_field, dense_block_field, template_descriptor};
use hopc::eval::{
    benchmark_naive_vs_fast, surface_image, sweep_border_margin, sweep_template_sizes, write_bench_csv,
    write_surface_csv,
};
use hopc::phasecong::{build_log_gabor_bank, phase_features};
use hopc::pipeline::{default_border_margin, detect_interest_points, register as run_register, write_control_point_set};
use hopc::raster::io::{load_image_auto, save_image, save_preview, write_control_points, ControlPointRecord};
use hopc::raster::ImageFormat;
use hopc::similarity::{
    naive_similarity_surface, resolve_match, similarity_surface, MatchConfig, MetricKind, PreparedImage,
};
use hopc::synth::{make_synthetic_pair, procedural_texture};
use hopc::{GrayImage, Point2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct Sidecar<'a, A: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: &'a A,
    config: &'a RunConfig,
    outputs: Vec<String>,
    result: R,
}

fn write_sidecar<A: Serialize, R: Serialize>(
    path: &Path,
    command: &'static str,
    args: &A,
    config: &RunConfig,
    outputs: &[PathBuf],
    result: R,
) -> anyhow::Result<()> {
    let sidecar = Sidecar {
        tool: "hopc",
        version: env!("CARGO_PKG_VERSION"),
        command,
        args,
        config,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        result,
    };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn extension(format: ImageFormat) -> &'static str {
    match format {
        ImageFormat::Pgm8 | ImageFormat::Pgm16 => "pgm",
        ImageFormat::F32raw => "f32raw",
    }
}

fn load(path: &Path) -> anyhow::Result<GrayImage> {
    load_image_auto(path).with_context(|| format!("loading {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn checked(cfg: RunConfig) -> Result<RunConfig, Failure> {
    cfg.validate().map_err(|e| Failure::Usage(e.into()))?;
    Ok(cfg)
}

fn anchor(p: Point2) -> (isize, isize) {
    (p.x.round() as isize, p.y.round() as isize)
}

pub fn pc(a: &PcArgs, cfg: RunConfig) -> Result<(), Failure> {
    let cfg = checked(cfg)?;
    let img = load(&a.input)?;
    let (w, h) = img.dims();
    let bank = build_log_gabor_bank::<f64>(w, h, &cfg.bank)?;
    let (pc, orient) = phase_features(&img, &bank, &cfg.pc)?;
    let outputs = vec![
        with_suffix(&a.out, ".pc.f32raw"),
        with_suffix(&a.out, ".orient.f32raw"),
        with_suffix(&a.out, ".pc.pgm"),
    ];
    save_image(&pc.amplitude, &outputs[0], ImageFormat::F32raw)?;
    save_image(&orient.phi, &outputs[1], ImageFormat::F32raw)?;
    save_preview(&pc.amplitude, &outputs[2])?;
    write_sidecar(&with_suffix(&a.out, ".json"), "pc", a, &cfg, &outputs, ())?;
    Ok(())
}

pub fn descr(a: &DescrArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    if let Some(t) = a.template {
        cfg.matching.template = t;
    }
    cfg.matching.metric = a.metric;
    let cfg = checked(cfg)?;
    let mc = cfg.match_config();
    let mode = mc
        .feature_mode()
        .ok_or_else(|| Failure::Usage(anyhow!("descr needs a descriptor metric (hogncc or hopcncc)")))?;
    let img = load(&a.input)?;
    let field = compute_feature_field(&img, mode, &mc.features)?;
    let blocks = dense_block_field(&field, &mc.geometry)?;
    let d = template_descriptor(&blocks, (a.x, a.y), mc.template, &mc.geometry)?;

    #[derive(Serialize)]
    struct Row {
        block_x: usize,
        block_y: usize,
        cell_x: usize,
        cell_y: usize,
        bin: usize,
        value: f64,
    }
    let g = mc.geometry;
    let (m, bins) = (g.cells_per_block, g.bins);
    let mut wtr = csv::Writer::from_writer(create(&a.out)?);
    for (i, v) in d.values.iter().enumerate() {
        let block = i / g.block_len();
        let within = i % g.block_len();
        wtr.serialize(Row {
            block_x: block % d.blocks_per_axis,
            block_y: block / d.blocks_per_axis,
            cell_x: (within / bins) % m,
            cell_y: (within / bins) / m,
            bin: within % bins,
            value: *v,
        })?;
    }
    wtr.flush()?;
    write_sidecar(
        &with_suffix(&a.out, ".json"),
        "descr",
        a,
        &cfg,
        &[a.out.clone()],
        serde_json::json!({ "length": d.values.len(), "blocks_per_axis": d.blocks_per_axis }),
    )?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
}

fn read_points(path: &Path) -> anyhow::Result<Vec<Point2>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    rdr.deserialize::<PointRow>()
        .map(|r| Ok(r.map(|p| Point2::new(p.x, p.y))?))
        .collect()
}

fn apply_match_overrides(
    cfg: &mut RunConfig,
    metric: Option<MetricKind>,
    template: Option<usize>,
    radius: Option<usize>,
) {
    if let Some(m) = metric {
        cfg.matching.metric = m;
    }
    if let Some(t) = template {
        cfg.matching.template = t;
    }
    if let Some(r) = radius {
        cfg.matching.search_radius = r;
    }
}

pub fn match_cmd(a: &MatchArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    apply_match_overrides(&mut cfg, a.metric, a.template, a.search_radius);
    let cfg = checked(cfg)?;
    let mc = cfg.match_config();
    let master = load(&a.master)?;
    let slave = load(&a.slave)?;
    let points = if a.points == "auto" {
        detect_interest_points(&master, &cfg.interest, default_border_margin(&mc))
    } else {
        read_points(Path::new(&a.points)).map_err(Failure::Usage)?
    };
    let (pm, ps) = if a.naive {
        (
            PreparedImage::features_only(master, &mc)?,
            PreparedImage::features_only(slave, &mc)?,
        )
    } else {
        (PreparedImage::new(master, &mc)?, PreparedImage::new(slave, &mc)?)
    };
    if let Some(dir) = &a.dump_surface {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut records = Vec::new();
    let mut outputs = vec![a.out.clone()];
    let mut skipped = 0usize;
    let results: Vec<_> = points
        .par_iter()
        .map(|&p| {
            let q = anchor(p);
            let surface = if a.naive {
                naive_similarity_surface(&pm, &ps, q, &mc)
            } else {
                similarity_surface(&pm, &ps, q, &mc)
            };
            (q, surface.and_then(|s| Ok((resolve_match(q, &s)?, s))))
        })
        .collect();
    for (i, (q, m)) in results.into_iter().enumerate() {
        match m {
            Ok((m, s)) => {
                if let Some(dir) = &a.dump_surface {
                    let path = dir.join(format!("surface_{i:04}.f32raw"));
                    save_image(&surface_image(&s), &path, ImageFormat::F32raw)?;
                    outputs.push(path);
                }
                records.push(ControlPointRecord {
                    x_master: m.master.x,
                    y_master: m.master.y,
                    x_slave: m.slave.x,
                    y_slave: m.slave.y,
                    score: m.score,
                });
            }
            Err(e) => {
                log::debug!("point ({}, {}) skipped: {e}", q.0, q.1);
                skipped += 1;
            }
        }
    }
    write_control_points(create(&a.out)?, &records)?;
    write_sidecar(
        &with_suffix(&a.out, ".json"),
        "match",
        a,
        &cfg,
        &outputs,
        serde_json::json!({ "points": points.len(), "matched": records.len(), "skipped": skipped }),
    )?;
    Ok(())
}

pub fn register(a: &RegisterArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    apply_match_overrides(&mut cfg, a.metric, a.template, a.search_radius);
    if let Some(g) = a.grid {
        cfg.interest.grid_blocks = g;
    }
    if let Some(k) = a.points_per_block {
        cfg.register.points_per_block = k;
    }
    if let Some(t) = a.rmse_threshold {
        cfg.refine.rmse_threshold = t;
    }
    let cfg = checked(cfg)?;
    let master = load(&a.master)?;
    let slave = load(&a.slave)?;
    let reg = run_register(&master, &slave, &cfg.register_config())?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let warped = a.out_dir.join(format!("warped.{}", extension(a.format)));
    let cps = a.out_dir.join("control_points.csv");
    save_image(&reg.warped, &warped, a.format)?;
    write_control_point_set(create(&cps)?, &reg.control_points)?;
    write_sidecar(
        &a.out_dir.join("report.json"),
        "register",
        a,
        &cfg,
        &[warped, cps],
        &reg.report,
    )?;
    println!("rmse {:.4} px, {} control points", reg.report.rmse, reg.report.counts.refined);
    Ok(())
}

fn synth_base(base: &str, size: usize, seed: u64) -> anyhow::Result<GrayImage> {
    if base == "procedural" {
        Ok(procedural_texture(size, size, seed))
    } else {
        Ok(load(Path::new(base))?.normalize_to_unit())
    }
}

pub fn synth(a: &SynthArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    if let Some(s) = a.seed {
        cfg.synth.seed = s;
    }
    if let Some(k) = a.k {
        cfg.synth.k = k;
    }
    if let Some(v) = a.noise_var {
        cfg.synth.noise_variance = v;
    }
    let cfg = checked(cfg)?;
    let base = synth_base(&a.base, a.size, cfg.synth.seed)?;
    let pair = make_synthetic_pair(&base, &cfg.synth)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let ext = extension(a.format);
    let master = a.out_dir.join(format!("master.{ext}"));
    let slave = a.out_dir.join(format!("slave.{ext}"));
    save_image(&pair.master, &master, a.format)?;
    save_image(&pair.slave, &slave, a.format)?;
    write_sidecar(
        &a.out_dir.join("synth.json"),
        "synth",
        a,
        &cfg,
        &[master, slave],
        serde_json::json!({ "centers": pair.centers, "breakpoints": pair.breakpoints }),
    )?;
    Ok(())
}

fn load_pair(p: &PairArgs, cfg: &mut RunConfig) -> anyhow::Result<(GrayImage, GrayImage)> {
    if let Some(s) = p.seed {
        cfg.synth.seed = s;
    }
    match (&p.master, &p.slave) {
        (Some(m), Some(s)) => Ok((load(m)?, load(s)?)),
        _ => {
            let base = procedural_texture(p.size, p.size, cfg.synth.seed);
            let pair = make_synthetic_pair(&base, &cfg.synth)?;
            Ok((pair.master, pair.slave))
        }
    }
}

pub fn timing(a: &TimingArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    if let Some(n) = a.points {
        cfg.eval.bench_points = n;
    }
    if let Some(t) = &a.templates {
        cfg.eval.bench_templates = t.clone();
    }
    if let Some(r) = &a.radii {
        cfg.eval.bench_radii = r.clone();
    }
    if !cfg.matching.metric.uses_descriptor() {
        cfg.matching.metric = MetricKind::HopcNcc;
    }
    let mut cfg = checked(cfg)?;
    let (master, slave) = load_pair(&a.pair, &mut cfg)?;
    let mc = cfg.match_config();
    let margin = sweep_border_margin(&cfg.eval.bench_templates, &MatchConfig {
        search_radius: cfg.eval.bench_radii.iter().copied().max().unwrap_or(mc.search_radius),
        ..mc
    });
    let mut points = detect_interest_points(&master, &cfg.interest, margin);
    points.truncate(cfg.eval.bench_points);
    let rows = benchmark_naive_vs_fast(&master, &slave, &points, &cfg.eval.bench_templates, &cfg.eval.bench_radii, &mc)?;
    write_bench_csv(create(&a.out)?, &rows)?;
    write_sidecar(&with_suffix(&a.out, ".json"), "bench timing", a, &cfg, &[a.out.clone()], &rows)?;
    Ok(())
}

pub fn sweep(a: &SweepArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    if let Some(m) = &a.metrics {
        cfg.eval.metrics = m.clone();
    }
    if let Some(s) = &a.sizes {
        cfg.eval.sizes = s.clone();
    }
    if let Some(t) = a.threshold {
        cfg.eval.threshold = t;
    }
    let mut cfg = checked(cfg)?;
    let (master, slave) = load_pair(&a.pair, &mut cfg)?;
    let mc = cfg.match_config();
    let points = detect_interest_points(&master, &cfg.interest, sweep_border_margin(&cfg.eval.sizes, &mc));
    let report = sweep_template_sizes(
        &master,
        &slave,
        |p| p,
        &points,
        &cfg.eval.metrics,
        &cfg.eval.sizes,
        &mc,
        cfg.eval.threshold,
    )?;
    report.write_csv(create(&a.out)?)?;
    write_sidecar(&with_suffix(&a.out, ".json"), "bench sweep", a, &cfg, &[a.out.clone()], &report)?;
    Ok(())
}

pub fn curve(a: &CurveArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    apply_match_overrides(&mut cfg, a.metric, a.template, a.search_radius);
    let mut cfg = checked(cfg)?;
    let (master, slave) = load_pair(&a.pair, &mut cfg)?;
    let mc = cfg.match_config();
    let surface = hopc::eval::similarity_curve(&master, &slave, (a.x, a.y), &mc)?;
    let raw = with_suffix(&a.out, ".f32raw");
    let csv = with_suffix(&a.out, ".csv");
    save_image(&surface_image(&surface), &raw, ImageFormat::F32raw)?;
    write_surface_csv(create(&csv)?, &surface)?;
    let peak = surface.argmax()?;
    write_sidecar(
        &with_suffix(&a.out, ".json"),
        "bench curve",
        a,
        &cfg,
        &[raw, csv],
        serde_json::json!({ "peak": [peak.dx, peak.dy], "score": surface.get(peak.dx, peak.dy) }),
    )?;
    Ok(())
}
