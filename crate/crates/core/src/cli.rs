//! Subcommand surface: `denoise`, `segment`, `eval`, `synth` and `bench`.
//!
//! Every command writes into `--output-dir`. If a stage fails, files the
//! command already wrote are removed and a nonzero code is returned.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::bench::{run_bench, write_bench_csv, DEFAULT_SIDES};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::{ap_curve, rmse, write_ap_csv, DEFAULT_AP_ALPHAS};
use crate::io::{
    fmt_f64, load_field, load_label_mask, object_summaries, save_gray16, save_label_mask, write_matrix_csv,
    ObjectSummary,
};
use crate::kernels::KernelFamily;
use crate::segmentation::segment_pipeline;
use crate::synthetic::{
    add_noise, branin_field, diffusion_field, phantom_cells, BraninParams, DiffusionConfig, ObjectShape,
    PhantomConfig,
};
use crate::tiling::{denoise, make_layout, TileLayout};

#[derive(Debug, Parser)]
#[command(name = "gpseg", version, about = "Gaussian-process denoising and unsupervised cell segmentation")]
pub struct Cli {
    /// Emit structured JSON log lines on stderr.
    #[arg(long, global = true)]
    pub json_log: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the GP on the calibration tile and write predictive mean and variance.
    Denoise(DenoiseArgs),
    /// Full pipeline: denoise, threshold, watershed, size filter.
    Segment(SegmentArgs),
    /// Average precision between label masks, and optionally RMSE between fields.
    Eval(EvalArgs),
    /// Write synthetic test images with their ground truth.
    Synth(SynthArgs),
    /// Time fast versus direct likelihood evaluation.
    Bench(BenchArgs),
}

/// Flags shared by the pipeline commands. Unset flags fall back to the
/// config file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineFlags {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tile_side: Option<usize>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long = "alpha-grid", value_name = "M")]
    pub alpha_grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Matern52,
    Exp,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Matern52 => KernelFamily::Matern52,
            KernelArg::Exp => KernelFamily::Exponential,
        }
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted label mask.
    #[arg(long, requires = "truth")]
    pub input: Option<PathBuf>,
    /// Ground-truth label mask.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Denoised field (image or CSV matrix) for RMSE.
    #[arg(long, requires = "reference")]
    pub estimate: Option<PathBuf>,
    /// Noise-free field for RMSE.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// IoU thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Cells,
    Branin,
    Diffusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Disc,
    Blob,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "cells")]
    pub kind: SynthKind,
    /// Image rows (ignored for diffusion, which uses `--steps`).
    #[arg(long, default_value_t = 100)]
    pub rows: usize,
    #[arg(long, default_value_t = 100)]
    pub cols: usize,
    #[arg(long, default_value_t = 12)]
    pub objects: usize,
    #[arg(long, value_enum, default_value = "blob")]
    pub shape: ShapeArg,
    /// Noise standard deviation added to the clean field.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Time levels stored by the diffusion solver.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Square image sides; `N` is the side squared.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIDES)]
    pub sides: Vec<usize>,
    /// Restrict to one kernel family; both by default.
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

/// Defaults, then the config file, then explicit flags.
pub fn resolve_config(flags: &PipelineFlags) -> Result<PipelineConfig> {
    let mut cfg = match &flags.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = flags.tile_side {
        cfg.tile_side = v;
    }
    if let Some(k) = flags.kernel {
        cfg.kernel = k.into();
    }
    if let Some(m) = flags.alpha_grid {
        cfg.alpha_grid = m;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Files written so far; removed again unless the command succeeds.
struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            done: false,
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        serde_json::to_writer_pretty(self.create(name)?, value)?;
        Ok(())
    }

    fn finish(mut self) {
        self.done = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.written {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

#[derive(Serialize)]
struct DenoiseSummary<'a> {
    input: &'a Path,
    config: &'a PipelineConfig,
    layout: &'a TileLayout,
    calibration_tile: usize,
    range1: f64,
    range2: f64,
    eta: f64,
    loglik: f64,
    /// `variance.png` holds variance divided by this value.
    variance_scale: f64,
}

pub fn cmd_denoise(args: &DenoiseArgs) -> Result<()> {
    let cfg = resolve_config(&args.pipeline)?;
    let image = load_field(&args.input)?;
    let (n1, n2) = image.shape();
    let layout = make_layout(n1, n2, cfg.tile_side);
    let result = denoise(&image, &layout, cfg.kernel, true)?;
    let mean = result.mean();
    let var = result
        .variance()
        .ok_or_else(|| Error::Numerical("variance was not computed".into()))?;
    let scale = var.max().max(f64::MIN_POSITIVE);

    let mut out = Outputs::new(&args.output_dir)?;
    save_gray16(&mean, &out.path("mean.png"))?;
    save_gray16(&(&var / scale), &out.path("variance.png"))?;
    write_matrix_csv(out.create("mean.csv")?, &mean)?;
    write_matrix_csv(out.create("variance.csv")?, &var)?;
    out.json(
        "denoise.json",
        &DenoiseSummary {
            input: &args.input,
            config: &cfg,
            layout: &result.layout,
            calibration_tile: result.calibration_tile,
            range1: result.kernel1.range,
            range2: result.kernel2.range,
            eta: result.eta,
            loglik: result.fit.loglik,
            variance_scale: scale,
        },
    )?;
    out.finish();
    Ok(())
}

#[derive(Serialize)]
struct SegmentSummary<'a> {
    input: &'a Path,
    config: &'a PipelineConfig,
    layout: &'a TileLayout,
    eta: f64,
    tiles: Vec<TileSummary>,
    objects: Vec<ObjectSummary>,
}

#[derive(Serialize)]
struct TileSummary {
    index: usize,
    alpha_star: f64,
    objects: usize,
    flags: Vec<String>,
}

pub fn cmd_segment(args: &SegmentArgs) -> Result<()> {
    let cfg = resolve_config(&args.pipeline)?;
    let image = load_field(&args.input)?;
    let seg = segment_pipeline(&image, &cfg)?;

    let mut out = Outputs::new(&args.output_dir)?;
    save_label_mask(&seg.labels, &out.path("labels.png"))?;
    for t in &seg.thresholds {
        t.trace.write_csv(out.create(&format!("threshold_tile{:03}.csv", t.tile.index))?)?;
    }
    let tiles = seg
        .thresholds
        .iter()
        .map(|t| TileSummary {
            index: t.tile.index,
            alpha_star: t.trace.alpha_star,
            objects: t.objects,
            flags: t.trace.flags.iter().map(|f| format!("{f:?}")).collect(),
        })
        .collect();
    out.json(
        "objects.json",
        &SegmentSummary {
            input: &args.input,
            config: &cfg,
            layout: &seg.denoised.layout,
            eta: seg.denoised.eta,
            tiles,
            objects: object_summaries(&seg.labels),
        },
    )?;
    out.finish();
    tracing::info!(objects = seg.labels.num_objects(), "segmentation written");
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "image".to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    if args.input.is_none() && args.estimate.is_none() {
        return Err(Error::Input("nothing to evaluate: pass --input/--truth or --estimate/--reference".into()));
    }
    let mut out = Outputs::new(&args.output_dir)?;
    if let (Some(pred), Some(truth)) = (&args.input, &args.truth) {
        let p = load_label_mask(pred)?;
        let g = load_label_mask(truth)?;
        let alphas = args.alphas.clone().unwrap_or_else(|| DEFAULT_AP_ALPHAS.to_vec());
        let curve = ap_curve(&g, &p, &alphas)?;
        write_ap_csv(out.create("ap.csv")?, &[(stem(pred), curve)])?;
    }
    if let (Some(est), Some(reference)) = (&args.estimate, &args.reference) {
        let e = load_field(est)?;
        let r = load_field(reference)?;
        let v = rmse(&e, &r)?;
        let mut w = csv::Writer::from_writer(out.create("rmse.csv")?);
        w.write_record(["image", "rmse"])?;
        w.write_record([stem(est), fmt_f64(v)])?;
        w.flush()?;
    }
    out.finish();
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mut out = Outputs::new(&args.output_dir)?;
    match args.kind {
        SynthKind::Cells => {
            let shape = match args.shape {
                ShapeArg::Disc => ObjectShape::Disc,
                ShapeArg::Blob => ObjectShape::Blob,
            };
            let ph = phantom_cells(&PhantomConfig::new(args.rows, args.cols, args.objects, shape, args.seed))?;
            let noisy = add_noise(&ph.image, args.noise, args.seed.wrapping_add(1))?;
            save_gray16(&ph.image, &out.path("clean.png"))?;
            save_gray16(&noisy, &out.path("image.png"))?;
            save_label_mask(&ph.labels, &out.path("truth.png"))?;
        }
        SynthKind::Branin | SynthKind::Diffusion => {
            let clean: DMatrix<f64> = if args.kind == SynthKind::Branin {
                branin_field(&BraninParams::default(), args.rows, args.cols)?
            } else {
                diffusion_field(&DiffusionConfig {
                    nx: args.cols,
                    nt: args.steps,
                    ..DiffusionConfig::default()
                })?
            };
            let noisy = add_noise(&clean, args.noise, args.seed)?;
            write_matrix_csv(out.create("clean.csv")?, &clean)?;
            write_matrix_csv(out.create("image.csv")?, &noisy)?;
        }
    }
    out.finish();
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let families = match args.kernel {
        Some(k) => vec![k.into()],
        None => vec![KernelFamily::Matern52, KernelFamily::Exponential],
    };
    let rows = run_bench(&args.sides, &families, args.repeats, args.seed)?;
    let mut out = Outputs::new(&args.output_dir)?;
    write_bench_csv(out.create("bench.csv")?, &rows)?;
    out.finish();
    Ok(())
}

fn init_logging(json: bool) {
    let builder = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(tracing::Level::INFO);
    // A second initialisation (several commands in one process) is harmless.
    let _ = if json { builder.json().try_init() } else { builder.try_init() };
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Denoise(a) => cmd_denoise(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging(cli.json_log);
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gpseg: {e}");
            1
        }
    }
}
