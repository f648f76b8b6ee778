//! `isoops` command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 I/O error.
//! `ISOOPS_THREADS` caps the worker pool.

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use isoops::stencils::StencilWeight;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "isoops", version, about = "Discrete spherical means, isotropic stencils and their applications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Harmonic,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    Dx,
    Dy,
    Lap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Explicit,
    Sharpened,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StaggeringArg {
    Average,
    Isotropic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean-value weights for a direction set, as CSV on stdout.
    ///
    /// Examples:
    ///   isoops weights --angles 0,45,90,135          (four rows, weight 0.25)
    ///   isoops weights --angles 0,30,100             (unequal planar gaps)
    ///   isoops weights --points octahedron.csv --dim 2 --degree 2 --kind full
    #[command(verbatim_doc_comment)]
    Weights {
        /// Planar angles in degrees, sorted, in [0, 180).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "points", required_unless_present = "points")]
        angles: Option<Vec<String>>,
        /// CSV of unit points on S^n, one point per row.
        #[arg(long, requires = "dim")]
        points: Option<PathBuf>,
        /// Sphere dimension n (points have n+1 coordinates).
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, value_enum, default_value_t = KindArg::Harmonic)]
        kind: KindArg,
    },
    /// Polynomial basis of the Veronese map as CSV on stdout.
    ///
    /// Examples:
    ///   isoops basis --dim 1 --degree 2                (x0^2 - x1^2 and x0 x1)
    ///   isoops basis --dim 2 --degree 2                (five harmonic quadratics)
    ///   isoops basis --dim 2 --degree 2 --kind full    (six monomials)
    #[command(verbatim_doc_comment)]
    Basis {
        /// Sphere dimension n.
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        degree: u32,
        #[arg(long, value_enum, default_value_t = KindArg::Harmonic)]
        kind: KindArg,
    },
    /// 3x3 stencil coefficients (prefactor applied) as CSV.
    ///
    /// Examples:
    ///   isoops stencil --op dx --w 2 --h 1     (Sobel, scale 1/8)
    ///   isoops stencil --op lap --w 4 --h 1    (1/6 [1 4 1; 4 -20 4; 1 4 1])
    ///   isoops stencil --op lap --w inf --h 0.5
    #[command(verbatim_doc_comment)]
    Stencil {
        #[arg(long, value_enum)]
        op: OpArg,
        /// Axis weight: a number, a fraction such as 10/3, or inf.
        #[arg(long, allow_negative_numbers = true)]
        w: StencilWeight,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perona-Malik filtering of a PGM image.
    ///
    /// Examples:
    ///   isoops diffuse --in a.pgm --out b.pgm --lambda 0.05 --steps 50
    ///   isoops diffuse --in a.pgm --out b.pgm --lambda inf --alpha 1 --beta 0
    ///   isoops diffuse --in a.pgm --out b.pgm --lambda 0.1 --dt 0.1 --mass-log mass.csv
    #[command(verbatim_doc_comment)]
    Diffuse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Contrast parameter in intensity units; inf gives linear diffusion.
        #[arg(long, default_value = "0.1")]
        lambda: String,
        /// Time step in pixel units; defaults to the stability bound.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 2.0 / 3.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0 / 3.0, allow_negative_numbers = true)]
        beta: f64,
        /// Axis weight of the gradient stencil used for the diffusivity.
        #[arg(long, default_value = "4")]
        gradient_w: StencilWeight,
        #[arg(long, value_enum, default_value_t = StaggeringArg::Average)]
        staggering: StaggeringArg,
        /// Accept a time step above the stability bound.
        #[arg(long)]
        allow_unstable: bool,
        #[arg(long)]
        mass_log: Option<PathBuf>,
    },
    /// One-ring mean curvature H and RMS curvature R of an OBJ mesh.
    ///
    /// Examples:
    ///   isoops curvature --in sphere.obj --out curv.csv
    ///   isoops curvature --in sphere.obj --out curv.csv --render-h h.ppm --render-r r.ppm
    ///   isoops curvature --in plane.obj --out flat.csv   (valid rows are 0)
    #[command(verbatim_doc_comment)]
    Curvature {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        render_h: Option<PathBuf>,
        #[arg(long)]
        render_r: Option<PathBuf>,
        /// Edge length in pixels of the renders.
        #[arg(long, default_value_t = 512)]
        render_size: usize,
    },
    /// Frequency response of the derivative schemes.
    ///
    /// Examples:
    ///   isoops freq --w 4,10/3,2 --omega-max 2 --samples 201 --out resp.csv
    ///   isoops freq --w 4,inf --omega-max 3.14159 --samples 50 --out resp.csv --scheme explicit
    ///   isoops freq --w 10/3 --omega-max 1 --samples 11 --out resp.csv
    #[command(verbatim_doc_comment)]
    Freq {
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        w: Vec<StencilWeight>,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        omega_max: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemeArg::Sharpened)]
        scheme: SchemeArg,
    },
    /// Anisotropy metric A(w) and Taylor-order fits on the Gaussian.
    ///
    /// Examples:
    ///   isoops laptest --w 4,2,0,inf --h 0.05 --out aniso.csv
    ///   isoops laptest --w 4 --h 0.1,0.05,0.025 --out fits.csv
    ///   isoops laptest --w 10/3,4 --h 0.1,0.05 --out aniso.csv
    #[command(verbatim_doc_comment)]
    Laptest {
        #[arg(long, value_delimiter = ',', default_value = "4,2,0,inf", allow_negative_numbers = true)]
        w: Vec<StencilWeight>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        h: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn configure_threads() -> Result<(), commands::CliError> {
    let Ok(raw) = std::env::var("ISOOPS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| commands::CliError::Usage(format!("ISOOPS_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| commands::CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|()| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("isoops: {e}");
            ExitCode::from(e.code())
        }
    }
}
