use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use radproj::analysis::{theory_exponents, Family};
use radproj::reporting::{exit_code, fmt_float, fmt_short, run, ExperimentKind, RawConfig, RunRecord};
use radproj::Error;

#[derive(Parser, Debug)]
#[command(version, about = "Lattice-point projection experiments on star bodies", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted lattice count at a single radius.
    Count(Common),
    /// Residual series over a geometric radius grid, with an envelope fit.
    Converge(Common),
    /// Mean |residual| over Haar-random lattice rotations.
    RotateAverage(Common),
    /// Decay of surface or shell Fourier transforms along directions.
    FourierDecay(Common),
    /// Monte Carlo body integral against the radial quadrature formula.
    VerifyIdentity(Common),
    /// Print predicted exponents.
    Theory {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// positive-curvature, superellipsoid, polygon-rational or polygon-algebraic
        #[arg(long, default_value = "positive-curvature")]
        family: String,
        #[arg(long)]
        k: Option<u32>,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Body spec, e.g. "ball", "superellipsoid k=2", "square".
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    axes: Option<String>,
    #[arg(long)]
    normals: Option<String>,
    #[arg(long)]
    offsets: Option<String>,
    /// Density id for density bodies.
    #[arg(long)]
    density: Option<String>,
    /// Test function id.
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    rho_start: Option<String>,
    #[arg(long)]
    rho_stop: Option<String>,
    #[arg(long)]
    per_octave: Option<String>,
    #[arg(long)]
    jitter: Option<String>,
    #[arg(long)]
    rotations: Option<String>,
    #[arg(long)]
    angle: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    sigmas: Option<String>,
    #[arg(long)]
    r_start: Option<String>,
    #[arg(long)]
    r_stop: Option<String>,
    #[arg(long)]
    r_step: Option<String>,
    /// Direction angles in radians, e.g. "[0, 1]".
    #[arg(long)]
    directions: Option<String>,
    /// surface or shell
    #[arg(long)]
    transform: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    fit_start: Option<String>,
    #[arg(long)]
    fit_stop: Option<String>,
    /// Extra key=value settings.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn raw(&self, kind: &str) -> Result<RawConfig, Error> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        raw.set("kind", kind)?;
        let flags = [
            ("body", &self.body),
            ("dim", &self.dim),
            ("k", &self.k),
            ("axes", &self.axes),
            ("normals", &self.normals),
            ("offsets", &self.offsets),
            ("density", &self.density),
            ("f", &self.f),
            ("rho", &self.rho),
            ("rho-start", &self.rho_start),
            ("rho-stop", &self.rho_stop),
            ("per-octave", &self.per_octave),
            ("jitter", &self.jitter),
            ("rotations", &self.rotations),
            ("angle", &self.angle),
            ("seed", &self.seed),
            ("out", &self.out),
            ("workers", &self.workers),
            ("samples", &self.samples),
            ("sigmas", &self.sigmas),
            ("r-start", &self.r_start),
            ("r-stop", &self.r_stop),
            ("r-step", &self.r_step),
            ("directions", &self.directions),
            ("transform", &self.transform),
            ("budget", &self.budget),
            ("fit-start", &self.fit_start),
            ("fit-stop", &self.fit_stop),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v.as_str())?;
            }
        }
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config { field: "--set".into(), message: format!("expected key=value, got '{pair}'") })?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }
}

fn report(record: &RunRecord) {
    let t = &record.tables;
    match record.config.kind {
        ExperimentKind::Count => {
            let r = &t.residuals[0].records[0];
            println!(
                "rho {} count {} points {} discrete {} target {} residual {} boundary_hits {}",
                r.rho,
                r.weighted_count,
                r.point_count,
                fmt_float(r.discrete_value),
                fmt_float(r.target),
                fmt_float(r.residual),
                r.boundary_hits
            );
        }
        ExperimentKind::Converge | ExperimentKind::RotateAverage => {
            let points = t.means.len().max(t.residuals.first().map_or(0, |s| s.records.len()));
            println!("{} radii, {} rotation(s)", points, t.residuals.len());
            match &t.fit {
                Some(fit) => println!("envelope slope {} (r^2 {})", fmt_short(fit.slope), fmt_short(fit.r_squared)),
                None => println!("envelope slope: not fitted"),
            }
            if let Some(th) = &t.theory {
                println!("predicted {}", fmt_short(th.predicted));
            }
        }
        ExperimentKind::FourierDecay => {
            for p in &t.decay {
                println!(
                    "direction ({}, {}) {}: slope {} on {} maxima",
                    fmt_short(p.direction[0]),
                    fmt_short(p.direction[1]),
                    p.kind.as_str(),
                    fmt_short(p.fitted_slope),
                    p.maxima_used
                );
            }
        }
        ExperimentKind::VerifyIdentity => {
            if let Some(c) = &t.identity {
                println!(
                    "lhs {} ± {} rhs {} discrepancy {:.3e} ({:.2} sigma): {}",
                    fmt_float(c.lhs),
                    fmt_float(c.lhs_std_error),
                    fmt_float(c.rhs),
                    c.rel_discrepancy,
                    c.sigmas,
                    if record.passed == Some(true) { "pass" } else { "FAIL" }
                );
            }
        }
    }
    for w in &record.warnings {
        eprintln!("note: {w}");
    }
}

fn theory(dim: usize, family: &str, k: Option<u32>, json: bool) -> Result<(), Error> {
    let family: Family = family.parse()?;
    let t = theory_exponents(dim, family, k)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&t)?);
        return Ok(());
    }
    println!("n = {}", t.n);
    println!("B = {}", fmt_short(t.b));
    println!("positive curvature exponent = {}", fmt_short(t.positive_curvature_exp));
    if let (Some(a), Some(k)) = (t.a, t.k) {
        println!("k = {k}");
        println!("A = {}", fmt_short(a));
        println!("superellipsoid exponent = {}", fmt_short(t.superellipsoid_exp.unwrap_or(f64::NAN)));
        println!("beta = {}", fmt_short(t.beta.unwrap_or(f64::NAN)));
        for (j, alpha) in t.alpha.iter().enumerate() {
            println!("alpha_{j} = {}", fmt_short(*alpha));
        }
        println!("best possible = {}", t.best_possible == Some(true));
    }
    println!("predicted {}", fmt_short(t.predicted));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Count(c) => ("count", c),
        Command::Converge(c) => ("converge", c),
        Command::RotateAverage(c) => ("rotate-average", c),
        Command::FourierDecay(c) => ("fourier-decay", c),
        Command::VerifyIdentity(c) => ("verify-identity", c),
        Command::Theory { dim, family, k, json } => {
            return match theory(*dim, family, *k, *json) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e) as u8)
                }
            };
        }
    };
    let result = common.raw(kind).and_then(RawConfig::into_config).and_then(|cfg| run(&cfg));
    match result {
        Ok(record) => {
            report(&record);
            if record.passed == Some(false) {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
