use std::time::Instant;

use super::config::{BodySpec, ExperimentConfig, ExperimentKind};
use super::output::write_outputs;
use crate::analysis::{
    fit_envelope_exponent, geometric_grid, residual_series, rotation_average, theory_exponents, ExponentFit,
    Family, FitMethod, MeanRecord, ResidualSeries, SeriesOptions, TheoryExponents,
};
use crate::exec::{with_workers, Exec};
use crate::fourier::{decay_sweep, linear_grid, DecayProfile};
use crate::geometry::{Rotation, Smoothness, SphereField, StarBody, MEMBERSHIP_TOL};
use crate::lattice::BOUNDARY_BAND;
use crate::quadrature::{sphere_integral, verify_identity, IdentityCheck, QuadratureRule};
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Required accuracy of the target integral.
const QUADRATURE_REQUIRED: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Tolerances {
    pub membership_rel: f64,
    pub boundary_band_rel: f64,
    pub quadrature_required: f64,
    /// `|target(rule) − target(refined rule)|`, when a target was computed.
    pub quadrature_error: Option<f64>,
    pub fit_floor_rel: f64,
    pub fourier_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            membership_rel: MEMBERSHIP_TOL,
            boundary_band_rel: BOUNDARY_BAND,
            quadrature_required: QUADRATURE_REQUIRED,
            quadrature_error: None,
            fit_floor_rel: 1e-13,
            fourier_rel: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct Tables {
    /// One series per rotation (a single one outside ensembles).
    pub residuals: Vec<ResidualSeries>,
    pub means: Vec<MeanRecord>,
    pub fit: Option<ExponentFit>,
    pub theory: Option<TheoryExponents>,
    pub identity: Option<IdentityCheck>,
    pub decay: Vec<DecayProfile>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub tool_version: &'static str,
    pub wall_time_s: f64,
    pub tolerances: Tolerances,
    pub warnings: Vec<String>,
    pub tables: Tables,
    /// Threshold verdict, for `verify-identity`.
    pub passed: Option<bool>,
}

/// Process exit status for an error: 2 for configuration and input
/// problems, 3 for budget overruns, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Budget { .. } | Error::FrequencyBudget { .. } => 3,
        Error::Io(_) | Error::Json(_) => 1,
        _ => 2,
    }
}

/// Run an experiment, writing its files when `out` is set.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let mut record = with_workers(config.workers, || compute(config))?;
    record.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(dir) = &config.out {
        write_outputs(&record, dir)?;
    }
    Ok(record)
}

fn compute(config: &ExperimentConfig) -> Result<RunRecord> {
    let body = config.body.build(config.dim)?;
    let f = SphereField::builtin(&config.f)?.with_dim(config.dim);
    let opts = SeriesOptions {
        exec: Exec::Parallel,
        budget: config.budget,
    };
    let mut record = RunRecord {
        config: config.clone(),
        tool_version: TOOL_VERSION,
        wall_time_s: 0.0,
        tolerances: Tolerances::default(),
        warnings: Vec::new(),
        tables: Tables::default(),
        passed: None,
    };
    let window = config.fit_window.unwrap_or((config.rho_start, config.rho_stop));
    match config.kind {
        ExperimentKind::Count | ExperimentKind::Converge => {
            let grid = match config.kind {
                ExperimentKind::Count => vec![config.rho.expect("validated")],
                _ => rho_grid(config)?,
            };
            let rotation = config.angle.map(Rotation::planar);
            let series = residual_series(&body, &f, &grid, rotation.as_ref(), opts)?;
            check_quadrature(&mut record, &body, &f)?;
            if config.kind == ExperimentKind::Converge {
                record.tables.fit = fit_or_warn(&mut record.warnings, fit_envelope_exponent(&series, window, FitMethod::DyadicEnvelope));
            }
            note_boundary(&mut record.warnings, &series);
            record.tables.residuals.push(series);
            record.tables.theory = theory_for(config, &body);
        }
        ExperimentKind::RotateAverage => {
            let grid = rho_grid(config)?;
            let avg = rotation_average(&body, &f, &grid, config.rotations, config.seed, opts)?;
            check_quadrature(&mut record, &body, &f)?;
            record.tables.fit = fit_or_warn(&mut record.warnings, avg.fit(window, FitMethod::DyadicEnvelope));
            for s in &avg.series {
                note_boundary(&mut record.warnings, s);
            }
            record.tables.residuals = avg.series;
            record.tables.means = avg.means;
            record.tables.theory = theory_for(config, &body);
        }
        ExperimentKind::FourierDecay => {
            let grid = linear_grid(config.r_start, config.r_stop, config.r_step)?;
            let dirs: Vec<[f64; 2]> = config.directions.iter().map(|t| [t.cos(), t.sin()]).collect();
            record.tables.decay = decay_sweep(&body, &f, &dirs, &grid, config.transform, Exec::Parallel)?;
            record.tables.theory = theory_for(config, &body);
        }
        ExperimentKind::VerifyIdentity => {
            let m = match &config.body {
                BodySpec::DensityBody { expr } => SphereField::builtin(expr)?,
                _ => body.density(),
            };
            let check = verify_identity(&f, &m, config.dim, config.samples, config.seed, Exec::Parallel)?;
            record.passed = Some(check.within(config.sigmas));
            record.tables.identity = Some(check);
        }
    }
    Ok(record)
}

fn rho_grid(config: &ExperimentConfig) -> Result<Vec<f64>> {
    let seed = config.jitter.then_some(config.seed);
    geometric_grid(config.rho_start, config.rho_stop, config.per_octave, seed)
}

fn fit_or_warn(warnings: &mut Vec<String>, fit: Result<ExponentFit>) -> Option<ExponentFit> {
    match fit {
        Ok(fit) => Some(fit),
        Err(e) => {
            warnings.push(format!("no envelope fit: {e}"));
            None
        }
    }
}

fn note_boundary(warnings: &mut Vec<String>, series: &ResidualSeries) {
    let flagged = series.flagged();
    if flagged > 0 {
        let rotation = series.records.first().map_or("", |r| r.rotation_id.as_str());
        warnings.push(format!("{flagged} radii with boundary hits (rotation {rotation})"));
    }
}

fn check_quadrature(record: &mut RunRecord, body: &StarBody, f: &SphereField) -> Result<()> {
    let m = body.density();
    let coarse = sphere_integral(f, &m, &QuadratureRule::for_body(body))?;
    let fine = sphere_integral(f, &m, &QuadratureRule::refined_for_body(body))?;
    let err = (coarse - fine).abs();
    record.tolerances.quadrature_error = Some(err);
    if err > QUADRATURE_REQUIRED {
        record
            .warnings
            .push(format!("target quadrature error estimate {err:e} exceeds {QUADRATURE_REQUIRED:e}"));
    }
    Ok(())
}

/// Largest denominator accepted when deciding that a slope is rational.
const RATIONAL_DENOMINATOR: i64 = 1000;

fn is_rational_slope(v: [f64; 2]) -> bool {
    let (a, b) = (v[0].abs(), v[1].abs());
    if a.min(b) <= 1e-12 * a.max(b) {
        return true;
    }
    let x = a.min(b) / a.max(b);
    (1..=RATIONAL_DENOMINATOR).any(|q| {
        let p = (x * q as f64).round();
        (x * q as f64 - p).abs() <= 1e-9 * q as f64
    })
}

/// The prediction for this body, or `None` when no theorem covers it.
pub fn theory_for(config: &ExperimentConfig, body: &StarBody) -> Option<TheoryExponents> {
    let n = config.dim;
    let family = match &config.body {
        BodySpec::Ball { .. } | BodySpec::Ellipsoid { .. } => Family::PositiveCurvature,
        BodySpec::Superellipsoid { k: 1 } => Family::PositiveCurvature,
        BodySpec::Superellipsoid { k } => return theory_exponents(n, Family::Superellipsoid, Some(*k)).ok(),
        BodySpec::DensityBody { .. } => {
            if body.radial_field().smoothness() == Smoothness::Smooth && body.is_convex() {
                Family::PositiveCurvature
            } else {
                return None;
            }
        }
        BodySpec::Polygon { .. } | BodySpec::Square => {
            let normals: Vec<[f64; 2]> = match body.family() {
                crate::BodyFamily::Polygon(p) => p.normals().to_vec(),
                _ => return None,
            };
            let angle = match config.kind {
                ExperimentKind::RotateAverage => return theory_exponents(n, Family::PolygonAlgebraic, None).ok(),
                _ => config.angle.unwrap_or(0.0),
            };
            let (s, c) = angle.sin_cos();
            // The rotated body's normals are the lattice-frame normals rotated back.
            let rational = normals.iter().any(|a| is_rational_slope([c * a[0] + s * a[1], -s * a[0] + c * a[1]]));
            if rational {
                Family::PolygonRational
            } else {
                Family::PolygonAlgebraic
            }
        }
    };
    theory_exponents(n, family, None).ok()
}
