//! Command-line front end: scene simulation, the detection/AoA pipeline,
//! and spectrogram rendering.
//!
//! Every flag can also come from the environment (`RFSIFT_*`) or from a
//! TOML config file given with `--config`; an explicit flag (or env var)
//! always wins over the config file. Exit codes: 0 success, 1 usage error,
//! 2 validation error, 3 I/O error.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use rfsift::aoa::AoaConfig;
use rfsift::capture::{CaptureReader, CaptureWriter};
use rfsift::detect::DetectorConfig;
use rfsift::pipeline::{run_pipeline, PipelineConfig, SampleSource};
use rfsift::render::{overlay_boxes, render_psd, write_pgm, GrayImage};
use rfsift::sim::{capture_meta, preset_names, preset_scene, synthesize_chunks, Scene};
use rfsift::stft::{psd, stft_forward};
use rfsift::switching::switch_time;
use rfsift::{Error, Result};

#[derive(Parser)]
#[command(name = "rfsift", version, about = "RF spectrum separation and AoA toolkit")]
struct Cli {
    /// TOML config file supplying defaults for any flag.
    #[arg(long, global = true, env = "RFSIFT_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a capture from a scene file or preset name.
    Simulate(SimArgs),
    /// Detect, invert, and estimate AoA over a capture; emits JSONL.
    Pipeline(PipeArgs),
    /// Render a capture spectrogram to PGM with detection overlays.
    Render(RenderArgs),
    /// List built-in scene presets.
    Presets,
}

#[derive(Args)]
struct SimArgs {
    /// Scene TOML path or a preset name (see `presets`).
    #[arg(long, env = "RFSIFT_SCENE")]
    scene: Option<String>,
    /// Output capture data file; the sidecar and ground-truth log are
    /// written alongside.
    #[arg(long, env = "RFSIFT_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "RFSIFT_SEED")]
    seed: Option<u64>,
    /// Override the plan's dwell-time multiplier.
    #[arg(long, env = "RFSIFT_K")]
    k: Option<u32>,
    /// Override the switch dwell time directly, microseconds.
    #[arg(long = "tsw-us", env = "RFSIFT_TSW_US")]
    tsw_us: Option<f64>,
    /// Override the plan's switch events per frame.
    #[arg(long, env = "RFSIFT_P")]
    p: Option<u32>,
    /// Override the FFT size (must be reachable for the dwell time).
    #[arg(long, env = "RFSIFT_NFFT")]
    nfft: Option<usize>,
    #[arg(long, env = "RFSIFT_BLANK_SAMPLES")]
    blank_samples: Option<u32>,
}

#[derive(Args)]
struct PipeArgs {
    /// Input capture data file.
    #[arg(long = "in", env = "RFSIFT_IN")]
    input: Option<PathBuf>,
    /// Output JSONL path; stdout when omitted.
    #[arg(long, env = "RFSIFT_OUT")]
    out: Option<PathBuf>,
    #[arg(long = "delta-db", env = "RFSIFT_DELTA_DB")]
    delta_db: Option<f64>,
    #[arg(long, env = "RFSIFT_ENSEMBLE")]
    ensemble: Option<usize>,
    #[arg(long = "min-area", env = "RFSIFT_MIN_AREA")]
    min_area: Option<usize>,
    #[arg(long = "grid-step-deg", env = "RFSIFT_GRID_STEP_DEG")]
    grid_step_deg: Option<f64>,
    #[arg(long = "chunk-hops", env = "RFSIFT_CHUNK_HOPS")]
    chunk_hops: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long = "in", env = "RFSIFT_IN")]
    input: Option<PathBuf>,
    /// Output PGM path.
    #[arg(long, env = "RFSIFT_OUT")]
    out: Option<PathBuf>,
    #[arg(long = "render-floor-db", env = "RFSIFT_RENDER_FLOOR_DB")]
    render_floor_db: Option<f64>,
    #[arg(long = "render-ceil-db", env = "RFSIFT_RENDER_CEIL_DB")]
    render_ceil_db: Option<f64>,
    #[arg(long = "delta-db", env = "RFSIFT_DELTA_DB")]
    delta_db: Option<f64>,
    #[arg(long = "chunk-hops", env = "RFSIFT_CHUNK_HOPS")]
    chunk_hops: Option<usize>,
}

/// Config-file equivalents of every flag; a flag or env var wins.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scene: Option<String>,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    k: Option<u32>,
    tsw_us: Option<f64>,
    p: Option<u32>,
    nfft: Option<usize>,
    blank_samples: Option<u32>,
    delta_db: Option<f64>,
    ensemble: Option<usize>,
    min_area: Option<usize>,
    grid_step_deg: Option<f64>,
    chunk_hops: Option<usize>,
    render_floor_db: Option<f64>,
    render_ceil_db: Option<f64>,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text)
                .map_err(|e| Error::Validation(format!("config {}: {e}", p.display())))
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage_ok = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if usage_ok { 0 } else { 1 });
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(match err {
            Error::Io(_) => 3,
            _ => 2,
        });
    }
}

fn run(cli: Cli) -> Result<()> {
    let file_cfg = load_config(&cli.config)?;
    match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args, &file_cfg),
        Cmd::Pipeline(args) => cmd_pipeline(args, &file_cfg),
        Cmd::Render(args) => cmd_render(args, &file_cfg),
        Cmd::Presets => {
            for name in preset_names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn required<T>(flag: Option<T>, cfg: Option<T>, name: &str) -> Result<T> {
    flag.or(cfg)
        .ok_or_else(|| Error::Parameter(format!("--{name} is required (flag, env, or config)")))
}

fn load_scene(spec: &str) -> Result<Scene> {
    let path = Path::new(spec);
    if path.exists() {
        return Scene::from_toml(&std::fs::read_to_string(path)?);
    }
    preset_scene(spec).ok_or_else(|| {
        Error::Validation(format!(
            "'{spec}' is neither a scene file nor a preset; presets: {}",
            preset_names().join(", ")
        ))
    })
}

fn cmd_simulate(args: SimArgs, cfg: &FileConfig) -> Result<()> {
    let scene_spec = required(args.scene, cfg.scene.clone(), "scene")?;
    let out = required(args.out, cfg.out.clone(), "out")?;
    let mut scene = load_scene(&scene_spec)?;

    if let Some(seed) = args.seed.or(cfg.seed) {
        scene.seed = seed;
    }
    if let Some(blank) = args.blank_samples.or(cfg.blank_samples) {
        scene.plan.blank_samples = blank;
    }
    if let Some(k) = args.k.or(cfg.k) {
        scene.plan.k = k;
    }
    if let Some(tsw_us) = args.tsw_us.or(cfg.tsw_us) {
        let t1 = switch_time(scene.radio.f_refclk_hz, scene.radio.f_s_hz, 1)?;
        let k = (tsw_us * 1e-6 / t1).round();
        if k < 1.0 || (k * t1 - tsw_us * 1e-6).abs() > t1 * 1e-6 {
            return Err(Error::Validation(format!(
                "t_sw {tsw_us} us is not an integer multiple of the base dwell {:.6} us",
                t1 * 1e6
            )));
        }
        scene.plan.k = k as u32;
    }
    if let Some(p) = args.p.or(cfg.p) {
        scene.plan.p = p;
    }
    if let Some(nfft) = args.nfft.or(cfg.nfft) {
        let t = switch_time(scene.radio.f_refclk_hz, scene.radio.f_s_hz, scene.plan.k)?;
        let spsw = (t * scene.radio.f_s_hz as f64).round() as usize;
        if spsw == 0 || nfft % spsw != 0 {
            return Err(Error::Validation(format!(
                "nfft {nfft} is not a multiple of the {spsw}-sample dwell"
            )));
        }
        scene.plan.p = (nfft / spsw) as u32;
    }
    scene.validate()?;

    let mut writer = CaptureWriter::create(&out)?;
    let truth = synthesize_chunks(&scene, &mut |r, s| writer.write_chunk(r, s))?;
    let frames = writer.finish(&capture_meta(&scene)?)?;

    let truth_path = truth_log_path(&out);
    let json = serde_json::to_string_pretty(&truth)
        .map_err(|e| Error::Validation(format!("ground truth serialization: {e}")))?;
    std::fs::write(&truth_path, json)?;
    eprintln!(
        "wrote {frames} samples to {}, {} packets logged in {}",
        out.display(),
        truth.packets.len(),
        truth_path.display()
    );
    Ok(())
}

/// Ground-truth log path for a capture data file.
pub fn truth_log_path(data_path: &Path) -> PathBuf {
    let mut os = data_path.as_os_str().to_owned();
    os.push(".truth.json");
    PathBuf::from(os)
}

fn build_pipeline_config(
    delta_db: Option<f64>,
    ensemble: Option<usize>,
    min_area: Option<usize>,
    grid_step_deg: Option<f64>,
    chunk_hops: Option<usize>,
) -> PipelineConfig {
    let det_defaults = DetectorConfig::default();
    let aoa_defaults = AoaConfig::default();
    PipelineConfig {
        detector: DetectorConfig {
            delta_db: delta_db.unwrap_or(det_defaults.delta_db),
            ensemble: ensemble.unwrap_or(det_defaults.ensemble),
            min_area: min_area.unwrap_or(det_defaults.min_area),
            ..det_defaults
        },
        aoa: AoaConfig {
            grid_step_deg: grid_step_deg.unwrap_or(aoa_defaults.grid_step_deg),
            ..aoa_defaults
        },
        chunk_hops: chunk_hops.unwrap_or(64),
    }
}

fn cmd_pipeline(args: PipeArgs, cfg: &FileConfig) -> Result<()> {
    let input = required(args.input, cfg.input.clone(), "in")?;
    let pcfg = build_pipeline_config(
        args.delta_db.or(cfg.delta_db),
        args.ensemble.or(cfg.ensemble),
        args.min_area.or(cfg.min_area),
        args.grid_step_deg.or(cfg.grid_step_deg),
        args.chunk_hops.or(cfg.chunk_hops),
    );
    let mut source = CaptureReader::open(&input)?;
    let annotations = run_pipeline(&mut source, &pcfg)?;

    let mut sink: Box<dyn std::io::Write> = match args.out.or(cfg.out.clone()) {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    for ann in &annotations {
        let line = serde_json::to_string(ann)
            .map_err(|e| Error::Validation(format!("annotation serialization: {e}")))?;
        writeln!(sink, "{line}")?;
    }
    sink.flush()?;
    Ok(())
}

fn cmd_render(args: RenderArgs, cfg: &FileConfig) -> Result<()> {
    let input = required(args.input, cfg.input.clone(), "in")?;
    let out = required(args.out, cfg.out.clone(), "out")?;
    let floor_db = args.render_floor_db.or(cfg.render_floor_db).unwrap_or(-5.0);
    let ceil_db = args.render_ceil_db.or(cfg.render_ceil_db).unwrap_or(30.0);
    if floor_db >= ceil_db {
        return Err(Error::Parameter(format!(
            "render floor {floor_db} dB must lie below ceiling {ceil_db} dB"
        )));
    }

    let pcfg = build_pipeline_config(
        args.delta_db.or(cfg.delta_db),
        None,
        None,
        None,
        args.chunk_hops.or(cfg.chunk_hops),
    );
    let mut source = CaptureReader::open(&input)?;
    let annotations = run_pipeline(&mut source, &pcfg)?;

    let nfft = source.meta.plan.nfft;
    let hop = nfft / 2;
    let n = source.n_samples as usize;
    let m_total = ((n - nfft) / hop) + 1;
    let mut img = GrayImage { width: m_total, height: nfft, data: vec![0; m_total * nfft] };
    let mut m0 = 0usize;
    while m0 < m_total {
        let m1 = (m0 + pcfg.chunk_hops).min(m_total);
        let len = (m1 - m0 - 1) * hop + nfft;
        let (ref_iq, _) = SampleSource::read_range(&mut source, (m0 * hop) as u64, len)?;
        let spec = stft_forward(&ref_iq, nfft)?;
        let block = render_psd(&psd(&spec), floor_db, ceil_db)?;
        for y in 0..nfft {
            for x in 0..(m1 - m0) {
                img.data[y * m_total + m0 + x] = block.at(x, y);
            }
        }
        m0 = m1;
    }
    let boxes: Vec<_> = annotations.iter().map(|a| a.detection.clone()).collect();
    overlay_boxes(&mut img, &boxes);
    write_pgm(&out, &img)?;
    eprintln!(
        "wrote {}x{} spectrogram with {} boxes to {}",
        img.width,
        img.height,
        boxes.len(),
        out.display()
    );
    Ok(())
}
