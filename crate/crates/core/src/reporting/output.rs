use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentKind;
use super::run::RunRecord;
use crate::analysis::{fit_power_law, ExponentFit, Family, FitMethod, TheoryExponents};
use crate::fourier::{local_maxima, DecayProfile, TransformKind};
use crate::{Error, Result};

pub const RESIDUAL_HEADER: &str = "rho,rotation_id,count,discrete_value,target,residual,boundary_hits";

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Up to four decimals, trailing zeros trimmed: `0.75`, `0.6667`, `-1.25`.
pub fn fmt_short(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write the run's CSV tables, `run.json` and plot data into `dir`.
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    let t = &record.tables;
    if !t.residuals.is_empty() {
        let mut csv = format!("{RESIDUAL_HEADER}\n");
        for series in &t.residuals {
            for r in &series.records {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    fmt_float(r.rho),
                    csv_field(&r.rotation_id),
                    fmt_float(r.weighted_count),
                    fmt_float(r.discrete_value),
                    fmt_float(r.target),
                    fmt_float(r.residual),
                    r.boundary_hits
                );
            }
        }
        put("residuals.csv", csv)?;
    }
    if !t.means.is_empty() {
        let mut csv = String::from("rho,mean_abs_residual,std_error,min_abs_residual,max_abs_residual\n");
        for m in &t.means {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_float(m.rho),
                fmt_float(m.mean_abs),
                fmt_float(m.std_error),
                fmt_float(m.min_abs),
                fmt_float(m.max_abs)
            );
        }
        put("mean_residuals.csv", csv)?;
    }
    if !t.decay.is_empty() {
        let mut csv = String::from("direction_index,phi_x,phi_y,transform,r,magnitude\n");
        let mut fits = String::from("direction_index,phi_x,phi_y,transform,fitted_slope,maxima_used,j_vanishing,lambda_max\n");
        for (i, p) in t.decay.iter().enumerate() {
            let (dx, dy) = (fmt_float(p.direction[0]), fmt_float(p.direction[1]));
            for (r, m) in p.r_grid.iter().zip(&p.magnitudes) {
                let _ = writeln!(csv, "{i},{dx},{dy},{},{},{}", p.kind.as_str(), fmt_float(*r), fmt_float(*m));
            }
            let _ = writeln!(
                fits,
                "{i},{dx},{dy},{},{},{},{},{}",
                p.kind.as_str(),
                fmt_float(p.fitted_slope),
                p.maxima_used,
                p.j_vanishing,
                fmt_float(p.lambda_max)
            );
        }
        put("decay.csv", csv)?;
        put("decay_fit.csv", fits)?;
    }
    if let Some(c) = &t.identity {
        let csv = format!(
            "f,m,samples,lhs,lhs_std_error,rhs,rel_discrepancy,sigmas,passed\n{},{},{},{},{},{},{},{},{}\n",
            csv_field(&c.f),
            csv_field(&c.m),
            record.config.samples,
            fmt_float(c.lhs),
            fmt_float(c.lhs_std_error),
            fmt_float(c.rhs),
            fmt_float(c.rel_discrepancy),
            fmt_float(c.sigmas),
            record.passed.unwrap_or(false)
        );
        put("identity.csv", csv)?;
    }
    put("run.json", serde_json::to_string_pretty(record)?)?;
    if !t.residuals.is_empty() || !t.decay.is_empty() {
        let plots = emit_plot_data(record, dir)?;
        written.extend(plots.data);
        written.extend(plots.fit);
        written.push(plots.summary);
    }
    Ok(written)
}

/// Files written by [`emit_plot_data`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    /// Two-column `log10 x, log10 y` files.
    pub data: Vec<PathBuf>,
    /// Two-point fitted-line overlays.
    pub fit: Vec<PathBuf>,
    pub summary: PathBuf,
    /// Points left out because their value was zero.
    pub dropped: usize,
}

fn log_lines(points: &[(f64, f64)]) -> (String, usize) {
    let mut text = String::new();
    let mut dropped = 0;
    for &(x, y) in points {
        if y > 0.0 {
            let _ = writeln!(text, "{} {}", fmt_float(x.log10()), fmt_float(y.log10()));
        } else {
            dropped += 1;
        }
    }
    (text, dropped)
}

fn fit_line(lo: f64, hi: f64, slope: f64, ln_intercept: f64) -> String {
    let mut text = String::new();
    for x in [lo, hi] {
        let y = (ln_intercept + slope * x.ln()) / std::f64::consts::LN_10;
        let _ = writeln!(text, "{} {}", fmt_float(x.log10()), fmt_float(y));
    }
    text
}

fn theory_line(t: &TheoryExponents) -> String {
    match t.family {
        Family::Superellipsoid => format!(
            "theory: superellipsoid k={} n={}: A = {}, B = {}, predicted {}{}",
            t.k.unwrap_or(0),
            t.n,
            fmt_short(t.a.unwrap_or(f64::NAN)),
            fmt_short(t.b),
            fmt_short(t.predicted),
            if t.best_possible == Some(true) { " (best possible, A > B)" } else { " (A ≤ B, not known to be sharp)" }
        ),
        Family::PositiveCurvature => format!("theory: positive curvature n={}: predicted {}", t.n, fmt_short(t.predicted)),
        Family::PolygonRational => format!(
            "theory: polygon with a rational normal n={}: predicted {} (boundary term of order rho^(n-1))",
            t.n,
            fmt_short(t.predicted)
        ),
        Family::PolygonAlgebraic => format!(
            "theory: polygon in generic position n={}: predicted {} + epsilon",
            t.n,
            fmt_short(t.predicted)
        ),
    }
}

/// Predicted decay slope of a transform along `p`'s direction.
fn predicted_decay(theory: Option<&TheoryExponents>, p: &DecayProfile) -> Option<f64> {
    let t = theory?;
    let alpha = match t.family {
        Family::Superellipsoid => *t.alpha.get(p.j_vanishing)?,
        Family::PositiveCurvature => (t.n as f64 - 1.0) / 2.0,
        _ => return None,
    };
    Some(match p.kind {
        TransformKind::Surface => -alpha,
        TransformKind::Shell => -alpha - 1.0,
    })
}

fn fit_summary(fit: &ExponentFit, what: &str) -> String {
    format!(
        "fit: {} of {what}: slope {} (r^2 {}) over [{}, {}], {} points used, {} below floor",
        match fit.method {
            FitMethod::AllPoints => "all points",
            FitMethod::DyadicEnvelope => "dyadic envelope",
        },
        fmt_short(fit.slope),
        fmt_short(fit.r_squared),
        fit.window.0,
        fit.window.1,
        fit.points_used,
        fit.floor_dropped
    )
}

/// Log-log data, fitted-line overlays and a plain-text summary.
pub fn emit_plot_data(record: &RunRecord, dir: &Path) -> Result<PlotFiles> {
    fs::create_dir_all(dir)?;
    let t = &record.tables;
    let cfg = &record.config;
    let mut summary = format!(
        "experiment: {}\nbody: {} (dim {})\nf: {}\n",
        serde_json::to_value(cfg.kind)?.as_str().unwrap_or("?"),
        t.residuals.first().map_or_else(|| format!("{:?}", cfg.body), |s| s.body.clone()),
        cfg.dim,
        cfg.f
    );
    let mut files = PlotFiles {
        data: Vec::new(),
        fit: Vec::new(),
        summary: dir.join("summary.txt"),
        dropped: 0,
    };
    if !t.decay.is_empty() {
        for (i, p) in t.decay.iter().enumerate() {
            let points: Vec<(f64, f64)> = p.r_grid.iter().copied().zip(p.magnitudes.iter().copied()).collect();
            let (text, dropped) = log_lines(&points);
            files.dropped += dropped;
            let path = dir.join(format!("decay_{i}_log10.dat"));
            fs::write(&path, text)?;
            files.data.push(path);
            let maxima = local_maxima(&p.r_grid, &p.magnitudes);
            let (lo, hi) = (maxima.first().map_or(p.r_grid[0], |m| m.0), maxima.last().map_or(p.r_grid[0], |m| m.0));
            let path = dir.join(format!("decay_{i}_fit.dat"));
            fs::write(&path, fit_line(lo, hi, p.fitted_slope, p.fitted_intercept))?;
            files.fit.push(path);
            let _ = write!(
                summary,
                "direction {i} ({}, {}), {} transform: fitted slope {} on {} local maxima, {} vanishing coordinates, max r^1.5|psi| {}",
                fmt_short(p.direction[0]),
                fmt_short(p.direction[1]),
                p.kind.as_str(),
                fmt_short(p.fitted_slope),
                p.maxima_used,
                p.j_vanishing,
                fmt_short(p.lambda_max)
            );
            match predicted_decay(t.theory.as_ref(), p) {
                Some(pred) => {
                    let _ = writeln!(summary, ", predicted {}", fmt_short(pred));
                }
                None => summary.push('\n'),
            }
        }
    } else {
        let (points, what): (Vec<(f64, f64)>, &str) = if !t.means.is_empty() {
            (t.means.iter().map(|m| (m.rho, m.mean_abs)).collect(), "mean |R| over rotations")
        } else {
            (
                t.residuals.iter().flat_map(|s| s.records.iter().map(|r| (r.rho, r.residual.abs()))).collect(),
                "|R|",
            )
        };
        if points.is_empty() {
            return Err(Error::invalid("nothing to plot: the series is empty"));
        }
        let (text, dropped) = log_lines(&points);
        files.dropped = dropped;
        let path = dir.join("residual_log10.dat");
        fs::write(&path, text)?;
        files.data.push(path);
        let _ = writeln!(summary, "points: {} ({} with R = 0 left out of the log files)", points.len(), dropped);
        let fit = match &t.fit {
            Some(fit) => Some(fit.clone()),
            None if points.len() >= 8 => fit_power_law(&points, (f64::MIN_POSITIVE, f64::INFINITY), FitMethod::DyadicEnvelope, 0.0).ok(),
            None => None,
        };
        match fit {
            Some(fit) => {
                let path = dir.join("fit_line.dat");
                let lo = points.iter().map(|p| p.0).filter(|r| *r >= fit.window.0).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p.0).filter(|r| *r <= fit.window.1).fold(0.0, f64::max);
                fs::write(&path, fit_line(lo, hi, fit.slope, fit.intercept))?;
                files.fit.push(path);
                let _ = writeln!(summary, "{}", fit_summary(&fit, what));
            }
            None => summary.push_str("fit: none (too few points)\n"),
        }
        if cfg.kind == ExperimentKind::RotateAverage {
            let _ = writeln!(summary, "rotations: {} Haar-random, seed {}", cfg.rotations, cfg.seed);
        }
    }
    match &t.theory {
        Some(th) => {
            let _ = writeln!(summary, "{}", theory_line(th));
        }
        None => summary.push_str("theory: no prediction for this body\n"),
    }
    if let Some(q) = record.tolerances.quadrature_error {
        let _ = writeln!(summary, "target quadrature error estimate: {q:.1e}");
    }
    for w in &record.warnings {
        let _ = writeln!(summary, "note: {w}");
    }
    fs::write(&files.summary, summary)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reporting::{run, ExperimentConfig};

    #[test]
    fn short_numbers() {
        assert_eq!(fmt_short(0.75), "0.75");
        assert_eq!(fmt_short(2.0 / 3.0), "0.6667");
        assert_eq!(fmt_short(-1.25), "-1.25");
        assert_eq!(fmt_short(-2.0), "-2");
        assert_eq!(fmt_short(-0.00001), "0");
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn sixteen_points_give_sixteen_lines() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::parse("kind=converge\nbody=ball\nrho-start=8\nrho-stop=64\nper-octave=5\njitter=false").unwrap();
        let mut rec = run(&cfg).unwrap();
        assert_eq!(rec.tables.residuals[0].records.len(), 16);
        rec.tables.residuals[0].records[4].residual = 0.0;
        let files = emit_plot_data(&rec, dir.path()).unwrap();
        assert_eq!(files.dropped, 1);
        assert_eq!(fs::read_to_string(&files.data[0]).unwrap().lines().count(), 15);
        assert_eq!(fs::read_to_string(&files.fit[0]).unwrap().lines().count(), 2);
        let summary = fs::read_to_string(&files.summary).unwrap();
        assert!(summary.contains("1 with R = 0"), "{summary}");
        rec.tables.residuals[0].records[4].residual = 1e-3;
        let files = emit_plot_data(&rec, dir.path()).unwrap();
        assert_eq!(fs::read_to_string(&files.data[0]).unwrap().lines().count(), 16);
    }

    #[test]
    fn superellipse_summary_names_prediction() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::parse("kind=converge\nbody=superellipsoid k=2\nrho-start=8\nrho-stop=128").unwrap();
        let rec = run(&cfg).unwrap();
        let files = emit_plot_data(&rec, dir.path()).unwrap();
        let summary = fs::read_to_string(files.summary).unwrap();
        for needle in ["A = 0.75", "B = 0.6667", "predicted -1.25"] {
            assert!(summary.contains(needle), "{summary}");
        }
    }

    #[test]
    fn empty_series_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::parse("kind=count\nrho=2").unwrap();
        let mut rec = run(&cfg).unwrap();
        rec.tables.residuals[0].records.clear();
        assert!(emit_plot_data(&rec, dir.path()).is_err());
    }
}
