//! Command-line front end for `rifclark`.
//!
//! Every subcommand produces one artifact (JSON or CSV). It goes to `--out`
//! when given, with a short human summary on stdout; otherwise the artifact is
//! printed on stdout and the summary on stderr.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use rifclark::io::{self, to_canonical_json};
use rifclark::quadrature::random_interior_points;
use rifclark::{clark, contact, embedding, levelset, polydisk, Rif};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rifclark::Error),

    #[error("{what} = {value:e} exceeds tolerance {tol:e}")]
    ToleranceExceeded { what: String, value: f64, tol: f64 },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::ToleranceExceeded { .. } => "ToleranceExceeded",
        }
    }

    /// `{"error": kind, "message": text}` on one line.
    pub fn to_json(&self) -> String {
        let v = json!({ "error": self.kind(), "message": self.to_string() });
        to_canonical_json(&v).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}\n", self.kind()))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "rifclark", version, about = "Clark measures of rational inner functions")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the Clark measure at one parameter and write it as JSON.
    Analyze {
        #[command(flatten)]
        source: PolySource,
        #[arg(long, value_parser = parse_alpha, allow_hyphen_values = true)]
        alpha: C64,
        #[arg(long = "grid", default_value_t = 4096, value_parser = parse_grid)]
        grid_n: usize,
        /// Allowed deviation of the total mass from its closed form.
        #[arg(long, default_value_t = 1e-8)]
        mass_tol: f64,
        #[arg(long = "out")]
        output_path: Option<PathBuf>,
    },
    /// Trace the level set and write the branch samples as CSV.
    Levelset {
        #[command(flatten)]
        source: PolySource,
        #[arg(long, value_parser = parse_alpha, allow_hyphen_values = true)]
        alpha: C64,
        #[arg(long = "grid", default_value_t = 1024, value_parser = parse_grid)]
        grid_n: usize,
        #[arg(long = "out")]
        output_path: Option<PathBuf>,
    },
    /// Check the Poisson identity of a stored measure at random interior points.
    Verify {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.7)]
        radius: f64,
        #[arg(long = "out")]
        output_path: Option<PathBuf>,
    },
    /// Vanishing and contact orders at boundary singularities.
    Contact {
        #[command(flatten)]
        source: PolySource,
        /// Parameters to fit (repeatable).
        #[arg(long = "alpha", value_parser = parse_alpha, allow_hyphen_values = true,
              default_values = ["1", "i", "exp:0.3333333333333333"])]
        alphas: Vec<C64>,
        /// Singular point, one coordinate per flag; searched for when omitted.
        #[arg(long = "point", value_parser = parse_alpha, allow_hyphen_values = true)]
        point: Vec<C64>,
        #[arg(long = "out")]
        output_path: Option<PathBuf>,
    },
    /// Gram isometry and density of the conjugate coordinates.
    Embed {
        #[command(flatten)]
        source: PolySource,
        #[arg(long, value_parser = parse_alpha, allow_hyphen_values = true)]
        alpha: C64,
        #[arg(long = "grid", default_value_t = 2048, value_parser = parse_grid)]
        grid_n: usize,
        #[arg(long, default_value_t = 16)]
        max_degree: usize,
        #[arg(long, default_value_t = 10)]
        kernels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the density curve as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long = "out")]
        output_path: Option<PathBuf>,
    },
    /// Closed-form level surface and weight of the three-variable family.
    #[command(group(clap::ArgGroup::new("mode").required(true).args(["diagonal", "surface", "poisson"])))]
    Tridisk {
        #[arg(long, default_value_t = 3.0)]
        s: f64,
        #[arg(long, value_parser = parse_alpha, allow_hyphen_values = true)]
        alpha: C64,
        /// Weight along `(e^{it}, e^{-it})` against `1 + 1/(1 - cos t)` (CSV).
        #[arg(long)]
        diagonal: bool,
        /// `(theta1, theta2, arg psi)` samples (CSV).
        #[arg(long)]
        surface: bool,
        /// Poisson identity at random interior points (JSON).
        #[arg(long)]
        poisson: bool,
        #[arg(long = "grid", default_value_t = 256, value_parser = parse_grid)]
        grid_n: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        refinement: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "out")]
        output_path: Option<PathBuf>,
    },
    /// Rebuild the function from the moments of a stored measure.
    Reconstruct {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 32)]
        degree: usize,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long = "out")]
        output_path: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PolySource {
    /// Denominator polynomial as JSON `{"degrees": [..], "coeffs": [[re, im], ..]}`.
    #[arg(long = "poly")]
    pub poly_path: Option<PathBuf>,
    /// Built-in example (`favard`, `favard_squared`, `tridisk:3`, ...).
    #[arg(long)]
    pub corpus: Option<String>,
}

impl PolySource {
    fn name(&self) -> String {
        match (&self.corpus, &self.poly_path) {
            (Some(n), _) => n.clone(),
            (None, Some(p)) => p.file_stem().map_or("poly".into(), |s| s.to_string_lossy().into_owned()),
            (None, None) => "poly".into(),
        }
    }

    /// Load and certify stability of the denominator.
    fn load(&self) -> CliResult<Rif> {
        let p = match (&self.corpus, &self.poly_path) {
            (Some(n), _) => rifclark::corpus::by_name(n)
                .ok_or_else(|| rifclark::Error::InvalidArgument(format!("unknown corpus function {n:?}")))?
                .p()
                .clone(),
            (None, Some(path)) => io::read_poly(path)?,
            (None, None) => return Err(rifclark::Error::InvalidArgument("no polynomial given".into()).into()),
        };
        let grid = if p.nvars() >= 3 { 16 } else { 64 };
        Ok(Rif::certified(p, grid)?)
    }
}

/// Parse `1`, `-1`, `i`, `-i`, `exp:t` (angle `t * pi`) or `re,im`, and
/// project onto the unit circle.
pub fn parse_alpha(s: &str) -> std::result::Result<C64, String> {
    let s = s.trim();
    let z = match s {
        "i" | "+i" => C64::new(0.0, 1.0),
        "-i" => C64::new(0.0, -1.0),
        _ => {
            if let Some(t) = s.strip_prefix("exp:") {
                let t: f64 = t.trim().parse().map_err(|_| format!("bad angle in {s:?}"))?;
                C64::from_polar(1.0, t * PI)
            } else if let Some((a, b)) = s.split_once(',') {
                let a: f64 = a.trim().parse().map_err(|_| format!("bad real part in {s:?}"))?;
                let b: f64 = b.trim().parse().map_err(|_| format!("bad imaginary part in {s:?}"))?;
                C64::new(a, b)
            } else {
                C64::new(s.parse().map_err(|_| format!("cannot parse {s:?} as a unimodular number"))?, 0.0)
            }
        }
    };
    let r = z.norm();
    if !(r.is_finite() && r > 0.0) {
        return Err(format!("{s:?} has no direction on the unit circle"));
    }
    Ok(z / r)
}

pub fn parse_grid(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("bad grid size {s:?}"))?;
    if n.is_power_of_two() {
        Ok(n)
    } else {
        Err(format!("grid size {n} is not a power of two"))
    }
}

/// Size the global rayon pool from `RIFCLARK_THREADS`, if set.
pub fn init_threads() {
    if let Some(n) = std::env::var("RIFCLARK_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// What a run produced: the artifact text and a human summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    pub summary: String,
    pub output_path: Option<PathBuf>,
}

impl Outcome {
    /// Write the artifact to `output_path` if one was given.
    pub fn persist(&self) -> CliResult<()> {
        if let Some(p) = &self.output_path {
            io::write_text(p, &self.artifact)?;
        }
        Ok(())
    }
}

fn c(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{}{sign}{}i", io::g17(z.re), io::g17(z.im))
}

fn json_text(v: &impl serde::Serialize) -> CliResult<String> {
    Ok(to_canonical_json(v)?)
}

fn check(what: &str, value: f64, tol: f64) -> CliResult<()> {
    if value.is_finite() && value <= tol {
        Ok(())
    } else {
        Err(CliError::ToleranceExceeded { what: what.into(), value, tol })
    }
}

fn read_measure(path: &Path) -> CliResult<(clark::ClarkMeasure, Rif)> {
    Ok(io::measure_from_json(&io::read_text(path)?)?)
}

/// Execute one command. Tolerance failures still persist the artifact before
/// the error is returned.
pub fn run(config: &RunConfig) -> CliResult<Outcome> {
    let (outcome, verdict) = execute(&config.command)?;
    outcome.persist()?;
    verdict?;
    Ok(outcome)
}

type Executed = (Outcome, CliResult<()>);

fn execute(cmd: &Command) -> CliResult<Executed> {
    match cmd {
        Command::Analyze { source, alpha, grid_n, mass_tol, output_path } => {
            let rif = source.load()?;
            let mu = clark::build_measure(&rif, *alpha, *grid_n)?;
            let mass = clark::total_mass(&mu);
            let expected = clark::expected_mass(&rif, *alpha);
            let artifact = io::measure_to_json(&mu, &rif)?;
            let summary = format!(
                "{} alpha={} N={} {} branches={} lines={} mass={} expected={}\n",
                source.name(),
                c(*alpha),
                grid_n,
                if mu.is_exceptional() { "exceptional" } else { "generic" },
                mu.branches.len(),
                mu.lines.len(),
                io::g17(mass),
                io::g17(expected)
            );
            let verdict = check("mass defect", (mass - expected).abs(), *mass_tol);
            Ok((Outcome { artifact, summary, output_path: output_path.clone() }, verdict))
        }
        Command::Levelset { source, alpha, grid_n, output_path } => {
            let rif = source.load()?;
            let class = levelset::classify_alpha(&rif, *alpha)?;
            let lines: Vec<C64> = class
                .lines
                .iter()
                .filter(|l| l.axis == levelset::FrozenAxis::First)
                .map(|l| l.tau)
                .collect();
            let branches = levelset::trace_adaptive(&rif, *alpha, *grid_n, &lines)?;
            let residual = branches.iter().map(|b| b.max_residual(&rif)).fold(0.0, f64::max);
            let artifact = io::branches_csv(&source.name(), *alpha, &branches);
            let summary = format!(
                "{} alpha={} {:?} branches={} lines={} max_residual={}\n",
                source.name(),
                c(*alpha),
                class.kind,
                branches.len(),
                class.lines.len(),
                io::g17(residual)
            );
            Ok((Outcome { artifact, summary, output_path: output_path.clone() }, Ok(())))
        }
        Command::Verify { measure, points, tol, seed, radius, output_path } => {
            if !(*radius > 0.0 && *radius < 1.0) {
                return Err(rifclark::Error::InvalidArgument("radius must lie in (0, 1)".into()).into());
            }
            let (mu, rif) = read_measure(measure)?;
            let pts = random_interior_points(*seed, *points, 2, *radius);
            let report = clark::verify_poisson(&mu, &rif, &pts)?;
            let worst = report.max_rel_error();
            let artifact = json_text(&json!({
                "alpha": mu.alpha,
                "grid_n": mu.grid_n,
                "seed": seed,
                "tol": tol,
                "max_rel_error": worst,
                "report": report,
            }))?;
            let summary = format!(
                "poisson identity at {} points: max relative error {} (tol {})\n",
                points,
                io::g17(worst),
                io::g17(*tol)
            );
            let verdict = check("max relative Poisson error", worst, *tol);
            Ok((Outcome { artifact, summary, output_path: output_path.clone() }, verdict))
        }
        Command::Contact { source, alphas, point, output_path } => {
            let rif = source.load()?;
            let mut summary = String::new();
            let reports: Vec<Value> = if rif.nvars() == 2 {
                let sings = match point.len() {
                    0 => levelset::find_singularities(&rif)?,
                    2 => vec![[point[0], point[1]]],
                    n => return Err(rifclark::Error::DimensionMismatch { expected: 2, got: n }.into()),
                };
                let mut out = Vec::new();
                for s in sings {
                    let r = contact::analyze_singularity(&rif, s, alphas)?;
                    let orders: Vec<String> = r.branch_orders.iter().map(|b| b.fit.order.to_string()).collect();
                    summary.push_str(&format!(
                        "singularity ({}, {}): value {} orders [{}] flagged {}\n",
                        c(s[0]),
                        c(s[1]),
                        c(r.nontangential_value),
                        orders.join(", "),
                        r.flagged_alphas.len()
                    ));
                    out.push(serde_json::to_value(&r).map_err(|e| rifclark::Error::Parse(e.to_string()))?);
                }
                if out.is_empty() {
                    summary.push_str("no boundary singularities\n");
                }
                out
            } else {
                if point.len() != rif.nvars() {
                    return Err(rifclark::Error::DimensionMismatch { expected: rif.nvars(), got: point.len() }.into());
                }
                let v = contact::nontangential_value(&rif, point)?;
                summary.push_str(&format!("nontangential value {}\n", c(v)));
                vec![json!({ "location": point, "nontangential_value": v })]
            };
            let artifact = json_text(&reports)?;
            Ok((Outcome { artifact, summary, output_path: output_path.clone() }, Ok(())))
        }
        Command::Embed { source, alpha, grid_n, max_degree, kernels, seed, csv, output_path } => {
            let rif = source.load()?;
            let mu = clark::build_measure(&rif, *alpha, *grid_n)?;
            let ws: Vec<[C64; 2]> = random_interior_points(*seed, *kernels, 2, 0.6)
                .into_iter()
                .map(|v| [v[0], v[1]])
                .collect();
            let gram = embedding::gram_isometry_check(&rif, *alpha, &ws, &mu)?;
            let degrees: Vec<usize> = (1..=*max_degree).collect();
            let curve = embedding::density_curve(&mu, &degrees)?;
            if let Some(p) = csv {
                io::write_text(p, &io::density_csv(&curve))?;
            }
            let artifact = json_text(&json!({ "gram": gram, "density": curve }))?;
            let mut summary = format!(
                "{} alpha={} gram max error {}\n",
                source.name(),
                c(*alpha),
                io::g17(gram.max_abs_error)
            );
            if let Some(last) = curve.last() {
                summary.push_str(&format!(
                    "density distance at degree {}: {} ({:?})\n",
                    last.degree,
                    io::g17(last.distance()),
                    last.verdict
                ));
            }
            Ok((Outcome { artifact, summary, output_path: output_path.clone() }, Ok(())))
        }
        Command::Tridisk {
            s,
            alpha,
            diagonal,
            surface,
            poisson,
            grid_n,
            samples,
            points,
            refinement,
            tol,
            seed,
            output_path,
        } => {
            let out = output_path.clone();
            if *diagonal {
                if *s != 3.0 || *alpha != C64::new(-1.0, 0.0) {
                    return Err(rifclark::Error::InvalidArgument(
                        "the diagonal closed form holds for s = 3 and alpha = -1".into(),
                    )
                    .into());
                }
                let rows: Vec<(f64, f64, f64)> = (1..=*samples)
                    .map(|k| {
                        let t = PI * k as f64 / *samples as f64;
                        Ok((t, polydisk::diagonal_weight(t)?, polydisk::diagonal_weight_reference(t)))
                    })
                    .collect::<rifclark::Result<_>>()?;
                let worst = rows.iter().map(|(_, w, r)| (w - r).abs() / r).fold(0.0, f64::max);
                let summary = format!("diagonal weight: {} samples, max relative error {}\n", samples, io::g17(worst));
                let verdict = check("diagonal relative error", worst, 1e-8);
                Ok((Outcome { artifact: io::diagonal_csv(&rows), summary, output_path: out }, verdict))
            } else if *surface {
                let rows = polydisk::tridisk_level_surface(*s, *alpha, *grid_n)?;
                let summary = format!("level surface: {} samples\n", rows.len());
                Ok((Outcome { artifact: io::level_surface_csv(&rows), summary, output_path: out }, Ok(())))
            } else {
                debug_assert!(*poisson);
                let pts = random_interior_points(*seed, *points, 3, 0.7);
                let reports: Vec<polydisk::PoissonReportD> = pts
                    .iter()
                    .map(|z| polydisk::verify_poisson_d(*s, *alpha, &[z[0], z[1], z[2]], *grid_n, *refinement))
                    .collect::<rifclark::Result<_>>()?;
                let worst = reports.iter().map(|r| r.rel_error).fold(0.0, f64::max);
                let artifact = json_text(&json!({ "s": s, "alpha": alpha, "grid_n": grid_n, "max_rel_error": worst, "reports": reports }))?;
                let summary = format!("poisson identity (3 variables): max relative error {}\n", io::g17(worst));
                let verdict = check("max relative Poisson error", worst, *tol);
                Ok((Outcome { artifact, summary, output_path: out }, verdict))
            }
        }
        Command::Reconstruct { measure, degree, radius, tol, output_path } => {
            if !(*radius >= 0.0 && *radius < 1.0) {
                return Err(rifclark::Error::InvalidArgument("radius must lie in [0, 1)".into()).into());
            }
            let (mu, rif) = read_measure(measure)?;
            let h = clark::herglotz_reconstruct(&mu, *degree)?;
            // the reconstruction is conj(alpha) phi
            let mut coord = vec![C64::new(0.0, 0.0)];
            for r in [0.5, 1.0] {
                for k in 0..8 {
                    coord.push(C64::from_polar(r * radius, PI * k as f64 / 4.0));
                }
            }
            let mut worst: f64 = 0.0;
            for &a in &coord {
                for &b in &coord {
                    let want = mu.alpha.conj() * rif.eval(&[a, b])?;
                    worst = worst.max((h.eval(&[a, b]) - want).norm());
                }
            }
            let artifact = json_text(&json!({
                "alpha": mu.alpha,
                "degree": degree,
                "radius": radius,
                "sup_error": worst,
                "moments": h.moments,
            }))?;
            let summary = format!(
                "herglotz reconstruction at degree {}: sup error {} on |z| <= {}\n",
                degree,
                io::g17(worst),
                io::g17(*radius)
            );
            let verdict = check("reconstruction sup error", worst, *tol);
            Ok((Outcome { artifact, summary, output_path: output_path.clone() }, verdict))
        }
    }
}
