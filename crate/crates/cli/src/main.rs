use std::path::{Path, PathBuf};
use std::process::ExitCode;

use baryflow::composite::{composite_sequence, CompositeJob, Formula, Manipulator, ManipulatorChain};
use baryflow::filters::DitherSpec;
use baryflow::image::BitDepth;
use baryflow::manifest::{manifest_path, PassName};
use baryflow::pipeline::{run_pipeline, PassStatus, PipelineOptions};
use baryflow::render::{render_sequence, FrameRange, PassKind, RenderJob, DEFAULT_LIGHT_SAMPLES};
use baryflow::scene::{load_scene, Scene};
use baryflow::testscene::{generate, TestScene};
use baryflow::{Error, Result};
use clap::{Args, Parser, Subcommand};

/// Render proxy-scene passes and composite them into animated paintings.
#[derive(Parser, Debug)]
#[command(name = "baryflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render one pass (or all three) of a scene into a frame sequence.
    Render(RenderArgs),
    /// Composite rendered t0/t1/w sequences.
    Composite(CompositeArgs),
    /// Render all passes (reusing up-to-date ones) and composite.
    Pipeline(PipelineArgs),
    /// Write a procedural test scene.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Output root; defaults to the scene's `passes.output_dir`.
    #[arg(long, env = "BARYFLOW_OUT")]
    out: Option<PathBuf>,
    /// Worker threads. Never changes the output bytes.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the PNG bit depth (8 or 16).
    #[arg(long, value_parser = parse_bitdepth)]
    bitdepth: Option<BitDepth>,
}

#[derive(Args, Debug)]
struct RenderOptions {
    /// Frame range `first..last` (inclusive); defaults to the whole timeline.
    #[arg(long)]
    frames: Option<FrameRange>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Area-light samples per shading point.
    #[arg(long, default_value_t = DEFAULT_LIGHT_SAMPLES)]
    samples: u32,
}

#[derive(Args, Debug)]
struct ChainOptions {
    /// Hue rotation of the weight image, in degrees.
    #[arg(long, allow_negative_numbers = true)]
    hue: Option<f64>,
    /// Saturation factor of the weight image.
    #[arg(long)]
    saturation: Option<f64>,
    /// Gaussian blur of the weight image.
    #[arg(long)]
    blur_sigma: Option<f64>,
    /// Quantize the weight image: `levels[:method]`.
    #[arg(long)]
    dither: Option<DitherSpec>,
    #[arg(long, default_value_t = Formula::Barycentric)]
    formula: Formula,
}

impl ChainOptions {
    /// Flags map to steps in a fixed order: hue, saturation, blur, dither.
    fn chain(&self) -> Result<ManipulatorChain> {
        let mut steps = Vec::new();
        if let Some(degrees) = self.hue {
            steps.push(Manipulator::HueShift { degrees });
        }
        if let Some(factor) = self.saturation {
            steps.push(Manipulator::Saturate { factor });
        }
        if let Some(sigma) = self.blur_sigma {
            steps.push(Manipulator::GaussianBlur { sigma });
        }
        if let Some(spec) = self.dither {
            steps.push(Manipulator::Dither(spec));
        }
        ManipulatorChain::new(steps)
    }
}

#[derive(Args, Debug)]
struct RenderArgs {
    scene: PathBuf,
    /// `t0`, `t1`, `w` or `all`.
    #[arg(long, default_value = "all", value_parser = parse_passes)]
    pass: PassSelection,
    #[command(flatten)]
    render: RenderOptions,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CompositeArgs {
    /// Directory holding the three input manifests; defaults to the output root.
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long)]
    t0: Option<PathBuf>,
    #[arg(long)]
    t1: Option<PathBuf>,
    #[arg(long)]
    w: Option<PathBuf>,
    #[command(flatten)]
    chain: ChainOptions,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    scene: PathBuf,
    #[command(flatten)]
    render: RenderOptions,
    #[command(flatten)]
    chain: ChainOptions,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// `pond`, `mirrorbox` or `registration`.
    name: String,
    /// Target directory; defaults to `./<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Square render size in pixels.
    #[arg(long)]
    size: Option<usize>,
}

#[derive(Clone, Debug)]
struct PassSelection(Vec<PassKind>);

fn parse_passes(s: &str) -> std::result::Result<PassSelection, String> {
    if s == "all" {
        return Ok(PassSelection(PassKind::ALL.to_vec()));
    }
    s.parse::<PassKind>()
        .map(|k| PassSelection(vec![k]))
        .map_err(|_| format!("unknown pass `{s}` (expected t0, t1, w or all)"))
}

fn parse_bitdepth(s: &str) -> std::result::Result<BitDepth, String> {
    match s {
        "8" => Ok(BitDepth::Eight),
        "16" => Ok(BitDepth::Sixteen),
        _ => Err(format!("bit depth must be 8 or 16, got `{s}`")),
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(Error::InvalidArgument("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {n} workers: {e}")))?
            .install(f),
    }
}

fn output_root(common: &Common, scene: Option<&Scene>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| scene.map(|s| s.output.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn frames_for(scene: &Scene, frames: Option<FrameRange>) -> FrameRange {
    frames.unwrap_or_else(|| FrameRange::all(scene.timeline().frame_count()))
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    let out = output_root(&args.common, Some(&scene));
    let frames = frames_for(&scene, args.render.frames);
    for &kind in &args.pass.0 {
        let job = RenderJob {
            kind,
            frames,
            light_samples: args.render.samples,
            seed: args.render.seed,
            output_dir: out.clone(),
            bitdepth: args.common.bitdepth.unwrap_or(scene.output.bitdepth),
        };
        with_jobs(args.common.jobs, || render_sequence(&scene, &job))?;
        eprintln!("rendered {kind} frames {frames} into {}", out.display());
    }
    Ok(())
}

fn cmd_composite(args: &CompositeArgs) -> Result<()> {
    let out = output_root(&args.common, None);
    let from = args.from.clone().unwrap_or_else(|| out.clone());
    let input = |explicit: &Option<PathBuf>, pass| explicit.clone().unwrap_or_else(|| manifest_path(&from, pass));
    let job = CompositeJob {
        t0: input(&args.t0, PassName::T0),
        t1: input(&args.t1, PassName::T1),
        w: input(&args.w, PassName::W),
        chain: args.chain.chain()?,
        formula: args.chain.formula,
        output_dir: out.clone(),
        bitdepth: args.common.bitdepth.unwrap_or_default(),
    };
    let manifest = with_jobs(args.common.jobs, || composite_sequence(&job))?;
    eprintln!("composited frames {} into {}", manifest.range(), out.display());
    Ok(())
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    let opts = PipelineOptions {
        frames: Some(frames_for(&scene, args.render.frames)),
        seed: args.render.seed,
        light_samples: args.render.samples,
        chain: args.chain.chain()?,
        formula: args.chain.formula,
        output_dir: output_root(&args.common, Some(&scene)),
        bitdepth: args.common.bitdepth.unwrap_or(scene.output.bitdepth),
    };
    let report = with_jobs(args.common.jobs, || run_pipeline(&scene, &opts))?;
    for (kind, status) in &report.passes {
        let verb = match status {
            PassStatus::Rendered => "rendered",
            PassStatus::Reused => "reused",
        };
        eprintln!("{kind}: {verb}");
    }
    eprintln!(
        "composited frames {} into {} ({} pass frames rendered)",
        report.frames,
        opts.output_dir.display(),
        report.rendered_frames()
    );
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let scene: TestScene = args.name.parse()?;
    let dir = args.out.clone().unwrap_or_else(|| Path::new(".").join(scene.name()));
    let path = generate(scene, &dir, args.size)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Render(args) => cmd_render(args),
        Command::Composite(args) => cmd_composite(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("baryflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
