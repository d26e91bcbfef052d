//! Subcommand implementations and the flag surface.
//!
//! Exit codes: 1 for I/O problems, 2 for invalid arguments (including
//! out-of-domain boxes), 3 for internal failures. Errors go to stderr
//! as one JSON object {"error": ..., "code": ...}.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zoomgrid::{
    assemble, axis_maps, control_grid, crop_image, crop_size, make_search_patch,
    make_uniform_patch, map_box_forward, map_box_reverse, score_grid, solve, target_size_stats,
    warp, Box as GeoBox, Error as CoreError, GridFile, HyperParams, Image, ResizeMode,
    SequenceRecord, ZoomParams,
};

use crate::ppm;

pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "zoomgrid",
    version,
    about = "Non-uniform image resizing with explicit zoom control"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Crop around a reference box and resize with target-area magnification
    Resize(ResizeArgs),
    /// Map a box through an exported grid, forward or reverse
    MapBox(MapBoxArgs),
    /// Mapped target-size statistics over a JSONL sequence
    Stats(StatsArgs),
    /// Time the solver and resampling stages
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
pub struct TuningArgs {
    /// Output patch side in pixels
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// Context factor for the crop extent
    #[arg(long, default_value_t = 5.0)]
    pub context_factor: f64,
    /// Zoom factor for the important area
    #[arg(long, default_value_t = 1.5)]
    pub gamma: f64,
    /// Importance bandwidth
    #[arg(long, default_value_t = 64.0)]
    pub beta: f64,
    /// Rigidity weight
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Importance score floor
    #[arg(long, default_value_t = 1e-2)]
    pub epsilon: f64,
    /// Control grid intervals per axis
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
}

impl TuningArgs {
    fn hyper_params(&self) -> HyperParams {
        HyperParams {
            search_size: self.size,
            context_factor: self.context_factor,
            grid_size: self.grid,
            beta: self.beta,
            gamma: self.gamma,
            lambda: self.lambda,
            epsilon: self.epsilon,
            ..HyperParams::default()
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Zoom,
    Uniform,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum StatsModeArg {
    Zoom,
    Uniform,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Args)]
pub struct ResizeArgs {
    /// Input image (PPM/PGM; PNG with the `png` feature)
    #[arg(long)]
    pub input: PathBuf,
    /// Output image path
    #[arg(long)]
    pub output: PathBuf,
    /// Reference box as cx,cy,w,h in input-image pixels
    #[arg(long, value_parser = parse_box)]
    pub prev_box: GeoBox,
    #[arg(long, value_enum, default_value_t = Mode::Zoom)]
    pub mode: Mode,
    /// Also write the sampling grid as JSON
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    /// Accepted for interface stability; resizing is deterministic
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Args)]
pub struct MapBoxArgs {
    /// Grid JSON written by `resize --grid-out`
    #[arg(long)]
    pub grid: PathBuf,
    /// Box as cx,cy,w,h
    #[arg(long, value_parser = parse_box_allow_degenerate)]
    pub r#box: GeoBox,
    #[arg(long, value_enum)]
    pub direction: Direction,
}

#[derive(Args)]
pub struct StatsArgs {
    /// JSONL sequence file, one record per line
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = StatsModeArg::Both)]
    pub mode: StatsModeArg,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Timing iterations per stage
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[command(flatten)]
    pub tuning: TuningArgs,
}

pub struct CmdError {
    pub code: i32,
    pub message: String,
}

impl CmdError {
    fn new(code: i32, message: impl Into<String>) -> CmdError {
        CmdError {
            code,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> CmdError {
        let code = match e {
            CoreError::InvalidArgument(_) | CoreError::OutOfDomain { .. } => EXIT_INVALID,
            CoreError::SolverFailure(_) | CoreError::DegenerateDeformation { .. } => EXIT_INTERNAL,
        };
        CmdError::new(code, e.to_string())
    }
}

impl From<ppm::IoError> for CmdError {
    fn from(e: ppm::IoError) -> CmdError {
        CmdError::new(EXIT_IO, e.to_string())
    }
}

pub fn emit_error(message: &str, code: i32) {
    let msg = serde_json::to_string(message).unwrap_or_else(|_| "\"error\"".into());
    eprintln!("{{\"error\":{msg},\"code\":{code}}}");
}

fn parse_box(s: &str) -> Result<GeoBox, String> {
    let b = parse_box_allow_degenerate(s)?;
    b.validate().map_err(|e| e.to_string())?;
    Ok(b)
}

fn parse_box_allow_degenerate(s: &str) -> Result<GeoBox, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected cx,cy,w,h, got {s:?}"));
    }
    let mut vals = [0.0f64; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p
            .trim()
            .parse()
            .map_err(|_| format!("bad number {p:?} in box {s:?}"))?;
    }
    Ok(GeoBox {
        cx: vals[0],
        cy: vals[1],
        w: vals[2],
        h: vals[3],
    })
}

pub fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.cmd {
        Cmd::Resize(args) => run_resize(args),
        Cmd::MapBox(args) => run_map_box(args),
        Cmd::Stats(args) => run_stats(args),
        Cmd::Bench(args) => run_bench(args),
    }
}

fn run_resize(args: ResizeArgs) -> Result<(), CmdError> {
    let frame = ppm::read_image(&args.input)?;
    let hp = args.tuning.hyper_params();
    let result = match args.mode {
        Mode::Zoom => make_search_patch(&frame, &args.prev_box, &hp)?,
        Mode::Uniform => make_uniform_patch(&frame, &args.prev_box, &hp)?,
    };
    ppm::write_image(&args.output, &result.patch)?;
    if let Some(grid_path) = args.grid_out {
        let json = serde_json::to_string(&GridFile::from_axis_map(&result.axis_map))
            .map_err(|e| CmdError::new(EXIT_INTERNAL, e.to_string()))?;
        fs::write(&grid_path, json + "\n")
            .map_err(|e| CmdError::new(EXIT_IO, format!("{}: {e}", grid_path.display())))?;
    }
    Ok(())
}

fn run_map_box(args: MapBoxArgs) -> Result<(), CmdError> {
    let raw = fs::read_to_string(&args.grid)
        .map_err(|e| CmdError::new(EXIT_IO, format!("{}: {e}", args.grid.display())))?;
    let file: GridFile = serde_json::from_str(&raw)
        .map_err(|e| CmdError::new(EXIT_INVALID, format!("{}: {e}", args.grid.display())))?;
    let am = file.into_axis_map()?;
    let mapped = match args.direction {
        Direction::Forward => map_box_forward(&args.r#box, &am)?,
        Direction::Reverse => map_box_reverse(&args.r#box, &am)?,
    };
    println!(
        "[{:.6},{:.6},{:.6},{:.6}]",
        mapped.cx, mapped.cy, mapped.w, mapped.h
    );
    Ok(())
}

fn run_stats(args: StatsArgs) -> Result<(), CmdError> {
    let file = fs::File::open(&args.input)
        .map_err(|e| CmdError::new(EXIT_IO, format!("{}: {e}", args.input.display())))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line
            .map_err(|e| CmdError::new(EXIT_IO, format!("{}: {e}", args.input.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SequenceRecord = serde_json::from_str(&line).map_err(|e| {
            CmdError::new(
                EXIT_IO,
                format!("{}: line {}: {e}", args.input.display(), lineno + 1),
            )
        })?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(CmdError::new(EXIT_IO, "empty sequence"));
    }

    let hp = args.tuning.hyper_params();
    let modes: &[(&str, ResizeMode)] = match args.mode {
        StatsModeArg::Zoom => &[("zoom", ResizeMode::Zoom)],
        StatsModeArg::Uniform => &[("uniform", ResizeMode::Uniform)],
        StatsModeArg::Both => &[("zoom", ResizeMode::Zoom), ("uniform", ResizeMode::Uniform)],
    };
    for (name, mode) in modes {
        let stats = target_size_stats(&records, &hp, *mode)
            .map_err(|e| CmdError::new(EXIT_IO, e.to_string()))?;
        println!(
            "{{\"mode\":\"{}\",\"avg\":{:.6},\"std\":{:.6},\"n\":{}}}",
            name, stats.avg, stats.std, stats.n
        );
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), CmdError> {
    if args.iters == 0 {
        return Err(CmdError::new(EXIT_INVALID, "iterations must be positive"));
    }
    let hp = args.tuning.hyper_params();

    // 640x640 synthetic frame with the reference box sized so the crop
    // covers the whole frame
    let frame = Image::from_fn(640, 640, 3, |x, y, c| match c {
        0 => x as f64 / 639.0,
        1 => y as f64 / 639.0,
        _ => ((x / 8 + y / 8) % 2) as f64,
    })
    .expect("synthetic frame is valid");
    let prev = GeoBox::new(320.0, 320.0, 128.0, 128.0).expect("valid box");

    let (crop_w, crop_h) = crop_size(&prev, hp.context_factor, hp.context_mode)?;
    let (crop, prior) = crop_image(&frame, &prev, crop_w, crop_h, 0.0)?;
    let zp = ZoomParams::new(hp.gamma, hp.lambda)?;
    let size = hp.search_size as f64;

    let solve_chain = || -> Result<zoomgrid::AxisMap, CoreError> {
        let scores = score_grid(
            &prior,
            crop_w,
            crop_h,
            hp.grid_size,
            hp.grid_size,
            hp.beta,
            hp.epsilon,
        )?;
        let d = solve(&assemble(&scores, crop_w, crop_h, &zp))?;
        axis_maps(&control_grid(&d, crop_w, crop_h)?, size, size)
    };

    let am = solve_chain()?;

    // warmup
    for _ in 0..3.min(args.iters) {
        let _ = solve_chain()?;
        let _ = warp(&crop, &am);
    }

    let mut qp_ms = Vec::with_capacity(args.iters);
    let mut warp_ms = Vec::with_capacity(args.iters);
    let mut total_ms = Vec::with_capacity(args.iters);
    for _ in 0..args.iters {
        let t = Instant::now();
        let am = solve_chain()?;
        qp_ms.push(t.elapsed().as_secs_f64() * 1e3);

        let t = Instant::now();
        let out = warp(&crop, &am);
        warp_ms.push(t.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(&out);

        let t = Instant::now();
        let am = solve_chain()?;
        let out = warp(&crop, &am);
        total_ms.push(t.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(&out);
    }

    for (stage, samples) in [("qp", &mut qp_ms), ("warp", &mut warp_ms), ("total", &mut total_ms)]
    {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = samples[samples.len() / 2];
        let p95 = samples[(samples.len() * 95 / 100).min(samples.len() - 1)];
        println!(
            "{{\"stage\":\"{}\",\"median_ms\":{:.6},\"p95_ms\":{:.6}}}",
            stage, median, p95
        );
    }
    Ok(())
}
