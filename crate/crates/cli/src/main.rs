use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use das_cli::commands::{self, BaselineMethod};
use das_cli::config::PipelineConfig;
use das_cli::render::Colormap;
use das_cli::stage::{Stage, StageContext, StageError};

#[derive(Parser)]
#[command(name = "das", version, about = "DAS traffic waterfall toolkit")]
struct Cli {
    /// Pipeline configuration document (JSON). Subcommand flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scene RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output artifacts.
    #[arg(long = "out-dir", global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hough,
    Radon,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColormapArg {
    Grayscale,
    Heat,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated numbers".into());
    }
    let a = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let b = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a waterfall and its ground truth from a scene JSON.
    Sim {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value = "waterfall.dasw")]
        out: PathBuf,
        #[arg(long, default_value = "truth.csv")]
        truth: PathBuf,
    },
    /// Normalize and wavelet-denoise a waterfall.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mix: Option<f64>,
        #[arg(long)]
        wavelet: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// MSE / PSNR / SSIM of a test waterfall against a reference.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect vehicle entry events on the fiber-start column.
    Detect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long = "min-height")]
        min_height: Option<f64>,
        #[arg(long = "entry-col")]
        entry_col: Option<usize>,
        #[arg(long, default_value = "events.csv")]
        out: PathBuf,
    },
    /// Grow trajectories from entry events by line-by-line matching.
    Track {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        vmin: Option<f64>,
        #[arg(long)]
        vmax: Option<f64>,
        #[arg(long)]
        cof: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value = "trajectories.csv")]
        out: PathBuf,
        #[arg(long, default_value = "trajectories.json")]
        summary: PathBuf,
    },
    /// Traffic flow / density / speed statistics from trajectories.
    Stats {
        #[arg(long)]
        trajectories: PathBuf,
        /// Profile position, meters.
        #[arg(long)]
        profile: Option<f64>,
        /// Observation window "start,end" in seconds.
        #[arg(long, value_parser = parse_pair)]
        window: Option<(f64, f64)>,
        /// Segment "start,end" in meters.
        #[arg(long, value_parser = parse_pair)]
        segment: Option<(f64, f64)>,
        /// Observation instant, seconds.
        #[arg(long)]
        at: Option<f64>,
        /// Refit order for rebuilding fitted paths from the CSV.
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a waterfall to a binary PPM, optionally with overlays.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        trajectories: Option<PathBuf>,
        #[arg(long)]
        colormap: Option<ColormapArg>,
        #[arg(long = "no-overlay")]
        no_overlay: bool,
        #[arg(long)]
        scale: Option<usize>,
        #[arg(long, default_value = "render.ppm")]
        out: PathBuf,
    },
    /// Hough / Radon line extraction, optionally scored against truth.
    Baseline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        method: MethodArg,
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Probe the full angle range instead of the 30-200 km/h band.
        #[arg(long = "full-range")]
        full_range: bool,
        #[arg(long, default_value = "candidates.csv")]
        out: PathBuf,
        #[arg(long = "score-out", default_value = "score.json")]
        score_out: PathBuf,
    },
    /// preprocess -> detect -> track -> stats -> render in one run.
    Pipeline {
        /// Waterfall file, or a scene JSON to simulate first.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), StageError> {
    let base = match &cli.config {
        Some(path) => PipelineConfig::load(path).stage(Stage::Config)?,
        None => PipelineConfig::default(),
    };
    let out_dir = &cli.out_dir;
    match cli.cmd {
        Cmd::Sim { scene, out, truth } => {
            commands::cmd_sim(&scene, &out, &truth, cli.seed, out_dir)
        }
        Cmd::Preprocess {
            input,
            out,
            lambda,
            mix,
            wavelet,
            levels,
        } => commands::cmd_preprocess(
            &input,
            &out,
            lambda,
            mix,
            wavelet.as_deref(),
            levels,
            &base,
            out_dir,
        ),
        Cmd::Metrics {
            reference,
            test,
            out,
        } => commands::cmd_metrics(&reference, &test, out.as_deref(), out_dir),
        Cmd::Detect {
            input,
            order,
            cutoff,
            min_height,
            entry_col,
            out,
        } => commands::cmd_detect(
            &input, order, cutoff, min_height, entry_col, &out, &base, out_dir,
        ),
        Cmd::Track {
            input,
            events,
            vmin,
            vmax,
            cof,
            order,
            out,
            summary,
        } => commands::cmd_track(
            &input, &events, vmin, vmax, cof, order, &out, &summary, &base, out_dir,
        ),
        Cmd::Stats {
            trajectories,
            profile,
            window,
            segment,
            at,
            order,
            out,
        } => commands::cmd_stats(
            &trajectories,
            profile,
            window,
            segment,
            at,
            order,
            out.as_deref(),
            out_dir,
        ),
        Cmd::Render {
            input,
            trajectories,
            colormap,
            no_overlay,
            scale,
            out,
        } => commands::cmd_render(
            &input,
            trajectories.as_deref(),
            colormap.map(|c| match c {
                ColormapArg::Grayscale => Colormap::Grayscale,
                ColormapArg::Heat => Colormap::Heat,
            }),
            no_overlay,
            scale,
            &out,
            &base,
            out_dir,
        ),
        Cmd::Baseline {
            input,
            method,
            truth,
            full_range,
            out,
            score_out,
        } => commands::cmd_baseline(
            &input,
            match method {
                MethodArg::Hough => BaselineMethod::Hough,
                MethodArg::Radon => BaselineMethod::Radon,
            },
            truth.as_deref(),
            full_range,
            &out,
            &score_out,
            &base,
            out_dir,
        ),
        Cmd::Pipeline { input } => commands::cmd_pipeline(&input, cli.seed, &base, out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error {e}");
            ExitCode::from(e.stage.exit_code())
        }
    }
}
