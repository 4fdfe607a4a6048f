//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::admissibility::analyze;
use crate::error::{Error, Result};
use crate::frames::{
    frame_bounds, reconstruct_cone, select_truncation, synthesize_exact_window, synthesize_tight_window, FrameSampling,
    SystemParams, WindowSpec,
};
use crate::generators::parse_generator;
use crate::grid::GridMeta;
use crate::io::{read_json, read_sf2d, write_csv, write_cv1, write_json, write_sf2d};
use crate::radon::{
    default_u_grid, make_gaussian_field, make_line_singularity, projection_slice_check, radon_with_limit, Cutoff,
    LineSingularity, MAX_SLOPE,
};
use crate::wavefront::{wavefront_map, WavefrontGrids, DEFAULT_FLOOR, DEFAULT_THRESHOLD};
use crate::xform::{
    cone_project, dual_cone_transform_strided, log_scale_grid, shearlet_transform_strided, uniform_shear_grid, ConeSpec,
    Orientation,
};

#[derive(Parser, Debug, Clone)]
#[command(name = "shearscope", version, about = "Continuous shearlet analysis on 2-D grids")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "SHEARSCOPE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Admissibility constant, moment integrals and decay orders of a generator.
    Analyze {
        generator: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shearlet coefficients of a field as a CV1 volume.
    Transform {
        field: PathBuf,
        generator: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scales: ScaleArgs,
        #[arg(long, default_value_t = 1)]
        t_stride: usize,
        #[arg(long, value_enum, default_value_t = ChartArg::Horizontal)]
        chart: ChartArg,
    },
    /// Frame bounds of a truncated cone-adapted system.
    FrameCheck {
        generator: String,
        #[command(flatten)]
        system: SystemArgs,
        /// Only sample slopes with |ξ2/ξ1| up to this fraction of v.
        #[arg(long, default_value_t = 1.0)]
        interior: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest (Γ, Ξ) whose truncation tails stay below the slack.
    AutoTruncate {
        generator: String,
        #[arg(long)]
        slack: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        u: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        v: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tight window |Ŵ|² = C_ψ χ − Δ on a field's frequency grid.
    TightWindow {
        generator: String,
        params: PathBuf,
        /// Field whose grid the window is sampled on.
        #[arg(long)]
        like: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep negative values instead of clamping.
        #[arg(long)]
        exact: bool,
    },
    /// Cone reconstruction through the window and shearlet multipliers.
    Reconstruct {
        field: PathBuf,
        generator: String,
        params: PathBuf,
        #[arg(long)]
        window: Option<PathBuf>,
        /// Synthesize an unclamped window when none is given.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Shear-parametrized Radon profile as CSV (u, re, im).
    Radon {
        field: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        slope: f64,
        #[arg(long, default_value_t = MAX_SLOPE)]
        max_slope: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Projection-slice discrepancy for one slope.
    SliceCheck {
        field: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        slope: f64,
    },
    /// Wavefront map as CSV plus a PGM of the smallest slope per translation.
    Wavefront {
        field: PathBuf,
        generator: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pgm: Option<PathBuf>,
        #[command(flatten)]
        scales: ScaleArgs,
        #[arg(long, default_value_t = 1)]
        t_stride: usize,
        /// Scale range of the slope fits (defaults to the whole scale grid).
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        fit: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_FLOOR)]
        floor: f64,
    },
    /// Synthetic test fields.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand, Debug, Clone)]
pub enum SynthCommand {
    /// Gaussian ridge along x1 + s0·x2 = u0.
    Line {
        #[arg(long, allow_negative_numbers = true)]
        s0: f64,
        #[arg(long, allow_negative_numbers = true)]
        u0: f64,
        #[arg(long)]
        width: f64,
        #[arg(long, num_args = 2, value_names = ["C1", "C2"], allow_negative_numbers = true)]
        cutoff_center: Option<Vec<f64>>,
        #[arg(long)]
        cutoff_radius: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// e^{−π|x − c|²/σ²}.
    Gaussian {
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, num_args = 2, value_names = ["C1", "C2"], allow_negative_numbers = true)]
        center: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    pub spacing: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub xi: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub u: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub v: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ScaleArgs {
    /// Smallest scale (defaults to four squared grid spacings).
    #[arg(long)]
    pub a_min: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub a_max: f64,
    #[arg(long, default_value_t = 8)]
    pub per_octave: usize,
    #[arg(long, default_value_t = 0.125)]
    pub s_step: f64,
    /// Shears run over [−xi, xi].
    #[arg(long, default_value_t = 2.0)]
    pub xi: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartArg {
    Horizontal,
    Vertical,
}

/// Parsed and range-checked command line.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub command: Command,
}

fn need(cond: bool, flag: &str, range: &str, value: impl std::fmt::Display) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(format!("--{flag} = {value} is out of range; expected {range}")))
    }
}

/// Γ, Ξ, u and v as a horizontal-cone system.
pub fn system_from_args(s: &SystemArgs) -> Result<SystemParams> {
    need(s.gamma > 0.0 && s.gamma.is_finite(), "gamma", "gamma > 0", s.gamma)?;
    need(s.xi > 0.0 && s.xi.is_finite(), "xi", "xi > 0", s.xi)?;
    need(s.u >= 0.0 && s.u.is_finite(), "u", "u >= 0", s.u)?;
    need(s.v > 0.0, "v", "v > 0", s.v)?;
    SystemParams::new(s.gamma, s.xi, ConeSpec::new(s.u, s.v, Orientation::Horizontal)?)
}

fn check_scales(s: &ScaleArgs) -> Result<()> {
    if let Some(a) = s.a_min {
        need(a > 0.0, "a-min", "a-min > 0", a)?;
    }
    need(s.a_max > 0.0, "a-max", "a-max > 0", s.a_max)?;
    need(s.per_octave >= 1, "per-octave", "at least 1", s.per_octave)?;
    need(s.s_step > 0.0, "s-step", "s-step > 0", s.s_step)?;
    need(s.xi >= 0.0, "xi", "xi >= 0", s.xi)
}

fn check_grid(g: &GridArgs) -> Result<()> {
    need(g.n >= 8 && g.n % 2 == 0, "n", "an even size of at least 8", g.n)?;
    need(g.spacing > 0.0 && g.spacing.is_finite(), "spacing", "spacing > 0", g.spacing)
}

/// Parses and validates arguments; defaults follow the documented grids.
pub fn validate_config<I, T>(args: I) -> std::result::Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(RunConfig { threads: cli.threads, command: cli.command })
}

/// Range checks that clap cannot express.
pub fn check_config(cfg: &RunConfig) -> Result<()> {
    if let Some(t) = cfg.threads {
        need(t >= 1, "threads", "at least 1", t)?;
    }
    match &cfg.command {
        Command::Transform { scales, t_stride, .. } => {
            check_scales(scales)?;
            need(*t_stride >= 1, "t-stride", "at least 1", t_stride)
        }
        Command::FrameCheck { system, interior, .. } => {
            system_from_args(system)?;
            need(*interior > 0.0 && *interior <= 1.0, "interior", "(0, 1]", interior)
        }
        Command::AutoTruncate { slack, u, v, .. } => {
            need(*slack > 0.0 && *slack < 1.0, "slack", "(0, 1)", slack)?;
            need(*u >= 0.0, "u", "u >= 0", u)?;
            need(*v > 0.0, "v", "v > 0", v)
        }
        Command::Radon { max_slope, .. } => need(*max_slope > 0.0, "max-slope", "max-slope > 0", max_slope),
        Command::Wavefront { scales, t_stride, threshold, floor, fit, .. } => {
            check_scales(scales)?;
            need(*t_stride >= 1, "t-stride", "at least 1", t_stride)?;
            need(*threshold > 0.0, "threshold", "threshold > 0", threshold)?;
            need(*floor >= 0.0 && *floor < 1.0, "floor", "[0, 1)", floor)?;
            if let Some(f) = fit {
                need(f[0] > 0.0 && f[1] > f[0], "fit", "0 < LO < HI", format!("{} {}", f[0], f[1]))?;
            }
            Ok(())
        }
        Command::Synth(SynthCommand::Line { width, grid, cutoff_radius, .. }) => {
            check_grid(grid)?;
            need(*width > 0.0, "width", "width > 0", width)?;
            if let Some(r) = cutoff_radius {
                need(*r > 0.0, "cutoff-radius", "radius > 0", r)?;
            }
            Ok(())
        }
        Command::Synth(SynthCommand::Gaussian { sigma, grid, .. }) => {
            check_grid(grid)?;
            need(*sigma > 0.0, "sigma", "sigma > 0", sigma)
        }
        _ => Ok(()),
    }
}

fn scale_grids(s: &ScaleArgs, meta: &GridMeta) -> Result<(Vec<f64>, Vec<f64>)> {
    let a_min = s.a_min.unwrap_or(4.0 * meta.spacing * meta.spacing);
    Ok((log_scale_grid(a_min, s.a_max, s.per_octave)?, uniform_shear_grid(s.xi, s.s_step)?))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            let s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
            let mut o = std::io::stdout().lock();
            writeln!(o, "{s}")?;
            Ok(())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WindowFile {
    #[serde(flatten)]
    spec: WindowSpec,
    /// SF2D file holding |Ŵ|², relative to this file.
    payload: String,
}

pub fn save_window(path: &Path, w: &WindowSpec) -> Result<()> {
    let payload = path.with_extension("sf2d");
    let name = payload
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid("window path needs a file name"))?
        .to_string();
    write_sf2d(&payload, &w.payload())?;
    write_json(path, &WindowFile { spec: w.clone(), payload: name })
}

pub fn load_window(path: &Path) -> Result<WindowSpec> {
    let f: WindowFile = read_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let payload = read_sf2d(&dir.join(&f.payload))?;
    f.spec.with_payload(&payload)
}

#[derive(Serialize)]
struct ReconstructionReport {
    relative_l2_error: f64,
    window_provenance: String,
    max_clamp: f64,
    c_psi: f64,
}

#[derive(Serialize)]
struct SliceReport {
    slope: f64,
    error: f64,
}

fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a pool that is already built (for example by an earlier call) keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Executes one validated command, writing its artifacts.
pub fn run(cfg: &RunConfig) -> Result<()> {
    check_config(cfg)?;
    configure_threads(cfg.threads);
    match &cfg.command {
        Command::Analyze { generator, out } => emit(&analyze(&parse_generator(generator)?)?, out.as_deref()),
        Command::Transform { field, generator, out, scales, t_stride, chart } => {
            let f = read_sf2d(field)?;
            let spec = parse_generator(generator)?;
            let (a, s) = scale_grids(scales, &f.meta)?;
            let vol = match chart {
                ChartArg::Horizontal => shearlet_transform_strided(&f, &spec, &a, &s, *t_stride)?,
                ChartArg::Vertical => dual_cone_transform_strided(&f, &spec, &a, &s, *t_stride)?,
            };
            for w in &vol.warnings {
                eprintln!("warning: {w}");
            }
            write_cv1(out, &vol)
        }
        Command::FrameCheck { generator, system, interior, out } => {
            let spec = parse_generator(generator)?;
            let params = system_from_args(system)?;
            let res = FrameSampling { max_slope_fraction: *interior, ..FrameSampling::default() };
            emit(&frame_bounds(&spec, &params, &res)?, out.as_deref())
        }
        Command::AutoTruncate { generator, slack, u, v, out } => {
            let spec = parse_generator(generator)?;
            let cone = ConeSpec::new(*u, *v, Orientation::Horizontal)?;
            emit(&select_truncation(&spec, &cone, *slack)?, out.as_deref())
        }
        Command::TightWindow { generator, params, like, out, exact } => {
            let spec = parse_generator(generator)?;
            let p: SystemParams = read_json(params)?;
            let meta = read_sf2d(like)?.meta;
            let w = if *exact {
                synthesize_exact_window(&spec, &p, &meta)?
            } else {
                synthesize_tight_window(&spec, &p, &meta)?
            };
            save_window(out, &w)
        }
        Command::Reconstruct { field, generator, params, window, exact, out, report } => {
            let f = read_sf2d(field)?;
            let spec = parse_generator(generator)?;
            let p: SystemParams = read_json(params)?;
            let w = match window {
                Some(path) => load_window(path)?,
                None if *exact => synthesize_exact_window(&spec, &p, &f.meta)?,
                None => synthesize_tight_window(&spec, &p, &f.meta)?,
            };
            let rec = reconstruct_cone(&f, &spec, &p, &w)?;
            let target = cone_project(&f, &p.cone)?;
            write_sf2d(out, &rec)?;
            let r = ReconstructionReport {
                relative_l2_error: rec.rel_l2_error(&target),
                window_provenance: w.provenance.clone(),
                max_clamp: w.max_clamp,
                c_psi: w.c_psi,
            };
            emit(&r, report.as_deref())
        }
        Command::Radon { field, slope, max_slope, out } => {
            let f = read_sf2d(field)?;
            let prof = radon_with_limit(&f, *slope, &default_u_grid(&f.meta), *max_slope)?;
            let rows = prof
                .u_grid
                .iter()
                .zip(&prof.values)
                .map(|(u, v)| vec![format!("{u}"), format!("{}", v.re), format!("{}", v.im)]);
            match out {
                Some(p) => write_csv(p, &["u", "re", "im"], rows),
                None => {
                    let mut o = std::io::stdout().lock();
                    writeln!(o, "u,re,im")?;
                    for r in rows {
                        writeln!(o, "{}", r.join(","))?;
                    }
                    Ok(())
                }
            }
        }
        Command::SliceCheck { field, slope } => {
            let f = read_sf2d(field)?;
            emit(&SliceReport { slope: *slope, error: projection_slice_check(&f, *slope)? }, None)
        }
        Command::Wavefront { field, generator, out, pgm, scales, t_stride, fit, threshold, floor } => {
            let f = read_sf2d(field)?;
            let spec = parse_generator(generator)?;
            let (a, s) = scale_grids(scales, &f.meta)?;
            let fit_range = match fit {
                Some(v) => [v[0], v[1]],
                None => [a[0], a[a.len() - 1]],
            };
            let grids = WavefrontGrids { a_grid: a, s_grid: s, t_stride: *t_stride, fit_range, floor_rel: *floor };
            let map = wavefront_map(&f, &spec, &grids, *threshold)?;
            map.write_csv(out)?;
            if let Some(p) = pgm {
                map.write_pgm(p)?;
            }
            Ok(())
        }
        Command::Synth(SynthCommand::Line { s0, u0, width, cutoff_center, cutoff_radius, grid }) => {
            let meta = GridMeta::centered(grid.n, grid.n, grid.spacing)?;
            let cutoff = cutoff_radius.map(|radius| Cutoff {
                center: cutoff_center.as_ref().map(|c| [c[0], c[1]]).unwrap_or([0.0, 0.0]),
                radius,
            });
            let ls = LineSingularity { s0: *s0, u0: *u0, width: *width, cutoff };
            let out = make_line_singularity(&ls, &meta)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            write_sf2d(&grid.out, &out.field)
        }
        Command::Synth(SynthCommand::Gaussian { sigma, center, grid }) => {
            let meta = GridMeta::centered(grid.n, grid.n, grid.spacing)?;
            let c = center.as_ref().map(|c| [c[0], c[1]]).unwrap_or([0.0, 0.0]);
            write_sf2d(&grid.out, &make_gaussian_field(&meta, c, *sigma)?)
        }
    }
}

/// Machine-readable error line for stderr.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() } })
        .to_string()
}

/// Full entry point: parse, run, report. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match validate_config(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = Error::invalid(e.to_string().trim().to_string());
            eprintln!("{}", error_json(&err));
            return err.exit_code();
        }
    };
    match run(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}
