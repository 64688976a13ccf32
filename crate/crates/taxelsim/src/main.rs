//! Command-line driver: validate scenes, run simulations, and post-process
//! traces into forces, noisy signals, smoothed signals, and heat maps.
//!
//! Exit codes are stable API for scripting: 0 success, 1 I/O or parse
//! failure, 2 validation failure, 3 simulation failure. Diagnostics go to
//! stderr; stdout carries only requested data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use taxelsim::io::{
    self, Scaling, SceneError, TRACE_MAGIC, TraceFormat, decode_trace, export_heatmap,
    trace_from_csv,
};
use taxelsim::signals::{self, ForceMode, NoiseSpec};
use taxelsim::solver::{self, SimError};
use taxelsim::{Trace, World};

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_SIMULATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "taxelsim",
    version,
    about = "Quasi-static tactile skin simulator"
)]
struct Cli {
    /// Worker threads for the solver (default: all cores).
    #[arg(long, global = true, env = "TAXELSIM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Binary,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scene file against every model invariant.
    Validate {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Simulate a scene and write the displacement trace.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trace encoding for the output file.
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Convert a displacement trace to contact forces.
    Forces {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep the raw spring + damper sum instead of clamping at zero.
        #[arg(long)]
        no_clamp: bool,
    },
    /// Add seeded zero-mean Gaussian noise to a trace.
    Noise {
        #[arg(long)]
        trace: PathBuf,
        /// Standard deviation in the trace's units.
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply Gaussian spatial smoothing over each patch.
    Smooth {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Smoothing length scale (m).
        #[arg(long)]
        sigma_s: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render one patch at one instant as a PGM heat map.
    Heatmap {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        patch: String,
        /// Instant to render (s); snaps to the nearest step.
        #[arg(long)]
        time: f64,
        #[arg(long)]
        out: PathBuf,
        /// Lower bound of fixed scaling (default: frame min/max).
        #[arg(long, requires = "hi")]
        lo: Option<f64>,
        /// Upper bound of fixed scaling.
        #[arg(long, requires = "lo")]
        hi: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                EXIT_IO
            }
        },
        None => run(cli.command),
    };
    ExitCode::from(code)
}

fn run(command: Command) -> u8 {
    match command {
        Command::Validate { scene } => cmd_validate(&scene),
        Command::Simulate { scene, out, format } => cmd_simulate(&scene, &out, format),
        Command::Forces {
            scene,
            trace,
            out,
            no_clamp,
        } => cmd_forces(&scene, &trace, &out, no_clamp),
        Command::Noise {
            trace,
            sigma,
            seed,
            out,
        } => cmd_noise(&trace, sigma, seed, &out),
        Command::Smooth {
            scene,
            trace,
            sigma_s,
            out,
        } => cmd_smooth(&scene, &trace, sigma_s, &out),
        Command::Heatmap {
            scene,
            trace,
            patch,
            time,
            out,
            lo,
            hi,
        } => cmd_heatmap(&scene, &trace, &patch, time, &out, lo, hi),
    }
}

fn cmd_validate(scene: &Path) -> u8 {
    let text = match fs::read_to_string(scene) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", scene.display());
            return EXIT_IO;
        }
    };
    match io::parse_scene(&text) {
        Ok(_) => {
            println!("OK");
            0
        }
        Err(SceneError::Invalid(violations)) => {
            for violation in violations {
                println!("{violation}");
            }
            EXIT_VALIDATION
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

/// Load a scene, mapping failures onto the exit-code contract.
fn load_world(scene: &Path) -> Result<World, u8> {
    let text = fs::read_to_string(scene).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", scene.display());
        EXIT_IO
    })?;
    io::parse_scene(&text).map_err(|e| match e {
        SceneError::Invalid(violations) => {
            eprintln!("error: scene is invalid:");
            for violation in violations {
                eprintln!("  {violation}");
            }
            EXIT_VALIDATION
        }
        other => {
            eprintln!("error: {other}");
            EXIT_IO
        }
    })
}

/// Load a trace, remembering which encoding the file used.
fn load_trace(path: &Path) -> Result<(Trace, TraceFormat), u8> {
    let bytes = fs::read(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO
    })?;
    if bytes.starts_with(&TRACE_MAGIC) {
        let trace = decode_trace(&bytes).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            EXIT_IO
        })?;
        Ok((trace, TraceFormat::Binary))
    } else {
        let text = String::from_utf8(bytes).map_err(|_| {
            eprintln!(
                "error: {}: neither binary trace nor UTF-8 CSV",
                path.display()
            );
            EXIT_IO
        })?;
        let trace = trace_from_csv(&text).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            EXIT_IO
        })?;
        Ok((trace, TraceFormat::Csv))
    }
}

fn store_trace(trace: &Trace, out: &Path, format: TraceFormat) -> Result<(), u8> {
    io::write_trace(trace, out, format).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", out.display());
        EXIT_IO
    })
}

fn cmd_simulate(scene: &Path, out: &Path, format: FormatArg) -> u8 {
    let world = match load_world(scene) {
        Ok(world) => world,
        Err(code) => return code,
    };
    let start = Instant::now();
    let trace = match solver::simulate(&world) {
        Ok(trace) => trace,
        Err(SimError::InvalidWorld(violations)) => {
            eprintln!("error: scene is invalid:");
            for violation in violations {
                eprintln!("  {violation}");
            }
            return EXIT_VALIDATION;
        }
        Err(e @ (SimError::Unsupported { .. } | SimError::ZeroGravity { .. })) => {
            eprintln!("error: {e}");
            return EXIT_SIMULATION;
        }
    };
    let wall = start.elapsed();
    let format = match format {
        FormatArg::Binary => TraceFormat::Binary,
        FormatArg::Csv => TraceFormat::Csv,
    };
    if let Err(code) = store_trace(&trace, out, format) {
        return code;
    }
    eprintln!(
        "steps: {}  taxels: {}  wall: {:.3} s  saturated: {}",
        trace.n_steps(),
        trace.n_taxels(),
        wall.as_secs_f64(),
        trace.saturation.len()
    );
    0
}

fn cmd_forces(scene: &Path, trace: &Path, out: &Path, no_clamp: bool) -> u8 {
    let world = match load_world(scene) {
        Ok(world) => world,
        Err(code) => return code,
    };
    let (trace, format) = match load_trace(trace) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let mode = if no_clamp {
        ForceMode::Unclamped
    } else {
        ForceMode::Clamped
    };
    let forces = match signals::displacements_to_forces(&trace, &world, mode) {
        Ok(forces) => forces,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    match store_trace(&forces, out, format) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn cmd_noise(trace: &Path, sigma: f64, seed: u64, out: &Path) -> u8 {
    if !(sigma.is_finite() && sigma >= 0.0) {
        eprintln!("error: --sigma must be finite and >= 0, got {sigma}");
        return EXIT_VALIDATION;
    }
    let (trace, format) = match load_trace(trace) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let noisy = signals::add_noise(&trace, &NoiseSpec { sigma, seed });
    match store_trace(&noisy, out, format) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn cmd_smooth(scene: &Path, trace: &Path, sigma_s: f64, out: &Path) -> u8 {
    let world = match load_world(scene) {
        Ok(world) => world,
        Err(code) => return code,
    };
    let (trace, format) = match load_trace(trace) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let smoothed = match signals::smooth_trace(&trace, &world, sigma_s) {
        Ok(smoothed) => smoothed,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    match store_trace(&smoothed, out, format) {
        Ok(()) => 0,
        Err(code) => code,
    }
}

fn cmd_heatmap(
    scene: &Path,
    trace: &Path,
    patch_id: &str,
    time: f64,
    out: &Path,
    lo: Option<f64>,
    hi: Option<f64>,
) -> u8 {
    let world = match load_world(scene) {
        Ok(world) => world,
        Err(code) => return code,
    };
    let (trace, _) = match load_trace(trace) {
        Ok(loaded) => loaded,
        Err(code) => return code,
    };
    let frame = match signals::extract_frame(&trace, patch_id, time) {
        Ok(frame) => frame,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let Some(patch) = world.patch(patch_id) else {
        eprintln!("error: scene has no patch `{patch_id}`");
        return EXIT_VALIDATION;
    };
    let scaling = match (lo, hi) {
        (Some(lo), Some(hi)) => Scaling::Fixed { lo, hi },
        _ => Scaling::MinMax,
    };
    let pgm = match export_heatmap(&frame, patch, scaling) {
        Ok(pgm) => pgm,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    match fs::write(out, pgm) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", out.display());
            EXIT_IO
        }
    }
}
