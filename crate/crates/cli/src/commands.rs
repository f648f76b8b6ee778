use crate::{Command, KindArg, OpArg, SchemeArg, StaggeringArg};
use isoops::analysis::{anisotropy, richardson_slopes, taylor_residual, AnisotropyProbe, TaylorOperator};
use isoops::curvature::mesh_curvature;
use isoops::diffusion::{self, DiffusionConfig, DiffusionError, Staggering};
use isoops::io::{self, IoError};
use isoops::spectral::{emit_response_table, omega_grid, Scheme};
use isoops::stencils::{dx_stencil, dy_stencil, laplacian_stencil, StencilError, StencilWeight};
use isoops::veronese::{full_basis, harmonic_basis, BasisKind};
use isoops::weights::{circular_weights, veronese_weights, WeightError};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<StencilError> for CliError {
    fn from(e: StencilError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<DiffusionError> for CliError {
    fn from(e: DiffusionError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn show(path: &Option<PathBuf>) -> String {
    path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// `# isoops <command>` followed by one `# key=value` line per setting; also
/// echoed to stderr.
fn config_header(command: &str, pairs: &[(&str, String)]) -> String {
    let text = format!("# isoops {command}\n{}", io::header(pairs));
    eprint!("{text}");
    text
}

fn basis_kind(kind: KindArg) -> BasisKind {
    match kind {
        KindArg::Harmonic => BasisKind::Harmonic,
        KindArg::Full => BasisKind::Full,
    }
}

fn parse_points(text: &str, path: &Path, coords: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut points = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| CliError::Io(format!("{}:{}: not a numeric row", path.display(), k + 1)))?;
        if row.len() != coords {
            return Err(CliError::Io(format!(
                "{}:{}: expected {coords} coordinates, got {}",
                path.display(),
                k + 1,
                row.len()
            )));
        }
        points.push(row);
    }
    Ok(points)
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Weights { angles, points, dim, degree, kind } => {
            weights(angles, points, dim, degree, kind)
        }
        Command::Basis { dim, degree, kind } => {
            let head = config_header(
                "basis",
                &[("dim", dim.to_string()), ("degree", degree.to_string()), ("kind", format!("{kind:?}").to_lowercase())],
            );
            let basis = match kind {
                KindArg::Harmonic => harmonic_basis(dim + 1, degree),
                KindArg::Full => full_basis(dim + 1, degree),
            };
            print!("{head}{}", io::basis_csv(&basis));
            Ok(())
        }
        Command::Stencil { op, w, h, out } => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Usage(format!("--h must be positive, got {h}")));
            }
            let head = config_header(
                "stencil",
                &[("op", format!("{op:?}").to_lowercase()), ("w", w.to_string()), ("h", h.to_string()), ("out", show(&out))],
            );
            let s = match op {
                OpArg::Dx => dx_stencil(w, h)?,
                OpArg::Dy => dy_stencil(w, h)?,
                OpArg::Lap => laplacian_stencil(w, h)?,
            };
            let text = format!("{head}{}", io::stencil_csv(&s));
            match out {
                Some(p) => write(&p, text.as_bytes()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Diffuse {
            input,
            out,
            lambda,
            dt,
            steps,
            alpha,
            beta,
            gradient_w,
            staggering,
            allow_unstable,
            mass_log,
        } => {
            let lambda = match lambda.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" => f64::INFINITY,
                other => other
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("--lambda: bad value '{lambda}'")))?,
            };
            let cfg = DiffusionConfig {
                lambda,
                dt,
                steps,
                alpha,
                beta,
                gradient_w,
                staggering: match staggering {
                    StaggeringArg::Average => Staggering::Average,
                    StaggeringArg::Isotropic => Staggering::Isotropic,
                },
                allow_unstable,
                ..DiffusionConfig::default()
            };
            let bytes = read(&input)?;
            let img = io::read_pgm(&bytes)?;
            let used_dt = cfg.time_step(img.field.h)?;
            let head = config_header(
                "diffuse",
                &[
                    ("in", input.display().to_string()),
                    ("out", out.display().to_string()),
                    ("size", format!("{}x{}", img.field.width, img.field.height)),
                    ("maxval", img.maxval.to_string()),
                    ("lambda", lambda.to_string()),
                    ("dt", used_dt.to_string()),
                    ("steps", steps.to_string()),
                    ("alpha", alpha.to_string()),
                    ("beta", beta.to_string()),
                    ("gradient_w", gradient_w.to_string()),
                    ("staggering", format!("{staggering:?}").to_lowercase()),
                    ("boundary", "mirror-neumann".into()),
                ],
            );
            let result = diffusion::run(&img.field, &cfg)?;
            let binary = bytes[1] == b'5';
            write(&out, &io::write_pgm(&result.field, img.maxval, binary))?;
            if let Some(p) = mass_log {
                write(&p, format!("{head}{}", io::mass_log_csv(&result.log)).as_bytes())?;
            }
            Ok(())
        }
        Command::Curvature { input, out, render_h, render_r, render_size } => {
            let text = String::from_utf8(read(&input)?)
                .map_err(|_| CliError::Io(format!("{}: not UTF-8 text", input.display())))?;
            let mesh = io::read_obj(&text)?;
            let (per, summary) = mesh_curvature(&mesh);
            let head = config_header(
                "curvature",
                &[
                    ("in", input.display().to_string()),
                    ("out", out.display().to_string()),
                    ("render_h", show(&render_h)),
                    ("render_r", show(&render_r)),
                    ("render_size", render_size.to_string()),
                    ("vertices", summary.vertices.to_string()),
                    ("valid", summary.valid.to_string()),
                    ("fallback", summary.fallback.to_string()),
                    ("median_h", format!("{:.10e}", summary.median_h)),
                    ("median_r", format!("{:.10e}", summary.median_r)),
                ],
            );
            write(&out, format!("{head}{}", io::curvature_csv(&per)).as_bytes())?;
            let values = |f: fn(&isoops::curvature::VertexCurvature) -> f64| -> Vec<f64> {
                per.iter().map(|c| if c.valid { f(c) } else { f64::NAN }).collect()
            };
            if let Some(p) = render_h {
                write(&p, &io::render_mesh_ppm(&mesh, &values(|c| c.h), render_size))?;
            }
            if let Some(p) = render_r {
                write(&p, &io::render_mesh_ppm(&mesh, &values(|c| c.r), render_size))?;
            }
            Ok(())
        }
        Command::Freq { w, omega_max, samples, out, scheme } => {
            if !(omega_max > 0.0 && omega_max.is_finite()) || samples < 2 {
                return Err(CliError::Usage("need --omega-max > 0 and --samples >= 2".into()));
            }
            for &wk in &w {
                wk.validate()?;
            }
            let head = config_header(
                "freq",
                &[
                    ("w", join(&w)),
                    ("omega_max", omega_max.to_string()),
                    ("samples", samples.to_string()),
                    ("scheme", format!("{scheme:?}").to_lowercase()),
                    ("out", out.display().to_string()),
                ],
            );
            let scheme = match scheme {
                SchemeArg::Explicit => Scheme::Explicit,
                SchemeArg::Sharpened => Scheme::Sharpened,
            };
            let table = emit_response_table(scheme, &w, &omega_grid(omega_max, samples));
            write(&out, format!("{head}{table}").as_bytes())
        }
        Command::Laptest { w, h, out } => laptest(&w, &h, &out),
    }
}

fn weights(
    angles: Option<Vec<String>>,
    points: Option<PathBuf>,
    dim: Option<usize>,
    degree: u32,
    kind: KindArg,
) -> Result<(), CliError> {
    if let Some(angles) = angles {
        let deg: Vec<f64> = angles
            .iter()
            .map(|a| a.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| CliError::Usage(format!("--angles: malformed list '{}'", angles.join(","))))?;
        let rad: Vec<f64> = deg.iter().map(|d| d.to_radians()).collect();
        let set = circular_weights(&rad).map_err(|e| match e {
            WeightError::InvalidAngles(_) | WeightError::TooFewDirections(_) => CliError::Usage(e.to_string()),
            other => other.into(),
        })?;
        let head = config_header(
            "weights",
            &[
                ("angles_deg", join(&deg)),
                ("circular_residual", format!("{:.3e}", set.circular_residual().unwrap_or(f64::NAN))),
            ],
        );
        print!("{head}{}", io::direction_set_csv(&set));
        return Ok(());
    }
    let path = points.ok_or_else(|| CliError::Usage("need --angles or --points".into()))?;
    let n = dim.ok_or_else(|| CliError::Usage("--points needs --dim".into()))?;
    let text = String::from_utf8(read(&path)?).map_err(|_| CliError::Io(format!("{}: not UTF-8 text", path.display())))?;
    let pts = parse_points(&text, &path, n + 1)?;
    let set = veronese_weights(&pts, degree, basis_kind(kind))?;
    let head = config_header(
        "weights",
        &[
            ("points", path.display().to_string()),
            ("dim", n.to_string()),
            ("degree", degree.to_string()),
            ("kind", format!("{kind:?}").to_lowercase()),
        ],
    );
    print!("{head}{}", io::direction_set_csv(&set));
    Ok(())
}

fn laptest(ws: &[StencilWeight], hs: &[f64], out: &Path) -> Result<(), CliError> {
    if ws.is_empty() || hs.is_empty() {
        return Err(CliError::Usage("--w and --h need at least one value".into()));
    }
    if let Some(h) = hs.iter().find(|h| !(**h > 0.0 && **h <= 0.25)) {
        return Err(CliError::Usage(format!("--h values must lie in (0, 0.25], got {h}")));
    }
    for &w in ws {
        w.validate()?;
    }
    let probe = AnisotropyProbe::default();
    let mut text = config_header(
        "laptest",
        &[
            ("w", join(ws)),
            ("h", join(hs)),
            ("out", out.display().to_string()),
            ("function", "exp(-(x^2+y^2)) on [-2,2]^2".into()),
            ("radii", format!("{}..{} x {}", probe.r_min, probe.r_max, probe.radii)),
            ("angles", probe.angles.to_string()),
        ],
    );
    text.push_str("quantity,w,h,value\n");
    for &w in ws {
        for &h in hs {
            let a = anisotropy(w, h, probe)?;
            let _ = writeln!(text, "anisotropy,{w},{h},{a:.10e}");
        }
    }
    let fits = [
        ("grad4_minus_h2_over_12", TaylorOperator::Gradient, 1.0 / 12.0),
        ("grad4_minus_h2_over_6", TaylorOperator::Gradient, 1.0 / 6.0),
        ("lap4_minus_h2_over_12", TaylorOperator::Laplacian, 1.0 / 12.0),
    ];
    for (name, op, c) in fits {
        let errors: Vec<f64> = hs.iter().map(|&h| taylor_residual(op, c, h)).collect();
        for (h, e) in hs.iter().zip(&errors) {
            let _ = writeln!(text, "{name}_residual,4,{h},{e:.10e}");
        }
        for (pair, s) in hs.windows(2).zip(richardson_slopes(hs, &errors)) {
            let _ = writeln!(text, "{name}_slope,4,{},{s:.6}", pair[1]);
        }
    }
    write(out, text.as_bytes())
}
