//! Fourier transforms of planar boundary curves and shells, and their decay
//! along rays `y = r·φ`.
//!
//! Both transforms are reduced to a single angular sum over `θ`:
//!
//! * surface: `Ψ(y) = ∫ g(θ) e^{2πi x(θ)·y} Φ(θ) dθ`, with `x(θ) = r(θ)θ`
//!   and `Φ = ds/dθ`;
//! * shell `{½ ≤ gauge ≤ 1}`: `Ψ(y) = ∫ f(θ) r(θ)² ∫_{½}^{1} s e^{iβs} ds dθ`
//!   with `β = 2π x(θ)·y`; the inner integral is taken in closed form.
//!
//! Smooth curves use the periodic trapezoid rule, polygons Gauss–Legendre per
//! edge. Node counts scale with `|y|` so every oscillation period gets at
//! least [`NODES_PER_PERIOD`] nodes.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;

use crate::analysis::least_squares;
use crate::exec::{map_slice, Exec};
use crate::geometry::{norm, SphereField, StarBody};
use crate::quadrature::gauss_legendre;
use crate::sum::KahanSum;
use crate::{Error, Result};

/// Largest `|y|` accepted.
pub const MAX_FREQUENCY: f64 = 512.0;
pub const NODES_PER_PERIOD: usize = 64;
const MIN_NODES: usize = 256;
/// Below this `|β|` the shell's radial integral uses its Taylor series.
const TAYLOR_BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    Surface,
    Shell,
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surface" => Ok(Self::Surface),
            "shell" => Ok(Self::Shell),
            other => Err(Error::invalid(format!("unknown transform '{other}'"))),
        }
    }
}

impl TransformKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Surface => "surface",
            Self::Shell => "shell",
        }
    }
}

/// A transform value with its node-doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub value: Complex64,
    /// `|Ψ_2N − Ψ_N|` between the reported rule and one with half the nodes.
    pub error_estimate: f64,
    /// `∫ |integrand| dθ`, the scale relative errors are measured against.
    pub scale: f64,
    pub nodes: usize,
}

impl Transform {
    pub fn relative_error(&self) -> f64 {
        self.error_estimate / self.scale
    }
}

/// Angular nodes with precomputed boundary points and weights.
#[derive(Debug, Clone)]
struct AngularRule {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl AngularRule {
    /// `angles` with quadrature weights `dθ`; the integrand's amplitude is
    /// folded into the weights.
    fn build(body: &StarBody, g: &SphereField, kind: TransformKind, nodes: &[(f64, f64)]) -> Result<Self> {
        let mut points = Vec::with_capacity(nodes.len());
        let mut weights = Vec::with_capacity(nodes.len());
        for &(t, w) in nodes {
            let u = [t.cos(), t.sin()];
            let r = body.radial(&u);
            let amp = match kind {
                TransformKind::Surface => body.radon_nikodym(&u)?,
                TransformKind::Shell => r * r,
            };
            points.push([r * u[0], r * u[1]]);
            weights.push(w * amp * g.eval(&u));
        }
        Ok(Self { points, weights })
    }

    fn scale(&self, kind: TransformKind) -> f64 {
        let radial = match kind {
            TransformKind::Surface => 1.0,
            TransformKind::Shell => 0.375,
        };
        radial * self.weights.iter().map(|w| w.abs()).sum::<f64>()
    }

    fn eval(&self, kind: TransformKind, y: [f64; 2]) -> Complex64 {
        let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
        for (p, w) in self.points.iter().zip(&self.weights) {
            let beta = 2.0 * PI * (p[0] * y[0] + p[1] * y[1]);
            let v = match kind {
                TransformKind::Surface => Complex64::from_polar(1.0, beta),
                TransformKind::Shell => shell_radial(beta),
            };
            re.add(w * v.re);
            im.add(w * v.im);
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Grid points per exact resynchronization of the stepped phasors.
const STEP_CHUNK: usize = 32;

impl AngularRule {
    /// `Ψ(r·φ)` for every `r` in a uniformly spaced grid.
    ///
    /// Each chunk of [`STEP_CHUNK`] radii evaluates its first phasors exactly
    /// and advances them by multiplication with `e^{iΔq}`, so the cost per
    /// radius is a complex product per node instead of a `sincos`.
    fn ray_uniform(&self, kind: TransformKind, phi: [f64; 2], r_grid: &[f64], exec: Exec) -> Vec<Complex64> {
        let q: Vec<f64> = self.points.iter().map(|p| 2.0 * PI * (p[0] * phi[0] + p[1] * phi[1])).collect();
        let step = (r_grid[r_grid.len() - 1] - r_grid[0]) / (r_grid.len() - 1) as f64;
        let chunks: Vec<usize> = (0..r_grid.len()).step_by(STEP_CHUNK).collect();
        let blocks = map_slice(exec, &chunks, |&start| {
            let radii = &r_grid[start..(start + STEP_CHUNK).min(r_grid.len())];
            // Half-angle phasors e^{i r q / 2}; the full phasor is their square.
            let mut half: Vec<Complex64> = q.iter().map(|q| Complex64::from_polar(1.0, 0.5 * radii[0] * q)).collect();
            let advance: Vec<Complex64> = q.iter().map(|q| Complex64::from_polar(1.0, 0.5 * step * q)).collect();
            let mut out = Vec::with_capacity(radii.len());
            for (j, &r) in radii.iter().enumerate() {
                if j > 0 {
                    for (z, a) in half.iter_mut().zip(&advance) {
                        *z *= a;
                    }
                }
                let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
                for ((zh, w), qi) in half.iter().zip(&self.weights).zip(&q) {
                    let z = zh * zh;
                    let v = match kind {
                        TransformKind::Surface => z,
                        TransformKind::Shell => {
                            let beta = r * qi;
                            if beta.abs() < TAYLOR_BETA {
                                shell_radial(beta)
                            } else {
                                let (b1, b2) = (1.0 / beta, 1.0 / (beta * beta));
                                z * Complex64::new(b2, -b1) - zh * Complex64::new(b2, -0.5 * b1)
                            }
                        }
                    };
                    re.add(w * v.re);
                    im.add(w * v.im);
                }
                out.push(Complex64::new(re.value(), im.value()));
            }
            out
        });
        blocks.into_iter().flatten().collect()
    }
}

fn is_uniform(r_grid: &[f64]) -> bool {
    let step = (r_grid[r_grid.len() - 1] - r_grid[0]) / (r_grid.len() - 1) as f64;
    r_grid.iter().enumerate().all(|(i, r)| (r - (r_grid[0] + step * i as f64)).abs() <= 1e-9 * step)
}

/// `∫_{1/2}^{1} s e^{iβs} ds`.
pub fn shell_radial(beta: f64) -> Complex64 {
    if beta.abs() < TAYLOR_BETA {
        // Σ_k (iβ)^k/k! · (1 − 2^{−(k+2)})/(k+2)
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..30 {
            let kf = k as f64;
            sum += term * ((1.0 - 0.5f64.powi(k + 2)) / (kf + 2.0));
            term *= Complex64::new(0.0, beta) / (kf + 1.0);
        }
        return sum;
    }
    let antiderivative = |s: f64| Complex64::from_polar(1.0, beta * s) * Complex64::new(1.0 / (beta * beta), -s / beta);
    antiderivative(1.0) - antiderivative(0.5)
}

/// Same integral by Gauss–Legendre in `s`, for cross-checks.
pub fn shell_radial_gl(beta: f64, order: usize) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    x.iter()
        .zip(&w)
        .map(|(x, w)| {
            let s = 0.75 + 0.25 * x;
            Complex64::from_polar(0.25 * w * s, beta * s)
        })
        .sum()
}

fn check_planar(body: &StarBody) -> Result<()> {
    if body.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: body.dim(),
        });
    }
    Ok(())
}

fn check_frequency(y: &[f64]) -> Result<f64> {
    if y.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: y.len() });
    }
    let size = norm(y);
    if !(size <= MAX_FREQUENCY) {
        return Err(Error::FrequencyBudget {
            norm: size,
            limit: MAX_FREQUENCY,
        });
    }
    Ok(size)
}

/// Trapezoid node count giving [`NODES_PER_PERIOD`] nodes per period at
/// frequency `|y|·diam(D)`.
fn trapezoid_count(body: &StarBody, freq: f64) -> usize {
    let periods = (2.0 * body.circumradius() * freq).ceil() as usize;
    MIN_NODES.max(NODES_PER_PERIOD * periods)
}

fn trapezoid_nodes(count: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * PI / count as f64;
    (0..count).map(|i| (w * i as f64, w)).collect()
}

fn arc_nodes(breaks: &[f64], per_arc: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(per_arc);
    let mut out = Vec::with_capacity(breaks.len() * per_arc);
    for (i, &a) in breaks.iter().enumerate() {
        let b = breaks.get(i + 1).copied().unwrap_or(breaks[0] + 2.0 * PI);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        out.extend(gx.iter().zip(&gw).map(|(x, w)| (mid + half * x, half * w)));
    }
    out
}

/// Coarse and fine rules for frequency `freq`.
fn rule_pair(body: &StarBody, g: &SphereField, kind: TransformKind, freq: f64) -> Result<(AngularRule, AngularRule)> {
    let breaks = body.breakpoints();
    let (coarse, fine) = if breaks.is_empty() {
        let n = trapezoid_count(body, freq);
        (trapezoid_nodes(n), trapezoid_nodes(2 * n))
    } else {
        let per_arc = (trapezoid_count(body, freq) / breaks.len()).max(32);
        (arc_nodes(&breaks, per_arc), arc_nodes(&breaks, 2 * per_arc))
    };
    Ok((AngularRule::build(body, g, kind, &coarse)?, AngularRule::build(body, g, kind, &fine)?))
}

fn transform(body: &StarBody, g: &SphereField, y: &[f64], kind: TransformKind) -> Result<Transform> {
    check_planar(body)?;
    let freq = check_frequency(y)?;
    let (coarse, fine) = rule_pair(body, g, kind, freq)?;
    let yv = [y[0], y[1]];
    let value = fine.eval(kind, yv);
    Ok(Transform {
        value,
        error_estimate: (value - coarse.eval(kind, yv)).norm(),
        scale: fine.scale(kind),
        nodes: fine.points.len(),
    })
}

/// `∫_{∂D} g(x/|x|) e^{2πi x·y} ds(x)` for a planar body.
pub fn surface_transform(body: &StarBody, g: &SphereField, y: &[f64]) -> Result<Transform> {
    transform(body, g, y, TransformKind::Surface)
}

/// `∫_{D − ½D} F(x) e^{2πi x·y} dx` for a planar body.
pub fn shell_transform(body: &StarBody, f: &SphereField, y: &[f64]) -> Result<Transform> {
    transform(body, f, y, TransformKind::Shell)
}

/// Shell transform with the radial integral done by Gauss–Legendre instead
/// of in closed form. Slow; used to cross-check [`shell_transform`].
pub fn shell_transform_gl(body: &StarBody, f: &SphereField, y: &[f64], radial_order: usize) -> Result<Complex64> {
    check_planar(body)?;
    let freq = check_frequency(y)?;
    let (_, fine) = rule_pair(body, f, TransformKind::Shell, freq)?;
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (p, w) in fine.points.iter().zip(&fine.weights) {
        let v = shell_radial_gl(2.0 * PI * (p[0] * y[0] + p[1] * y[1]), radial_order);
        re.add(w * v.re);
        im.add(w * v.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// `|Ψ(r·φ)|` along one direction, with a decay exponent fitted on the
/// interior local maxima.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DecayProfile {
    pub direction: [f64; 2],
    pub kind: TransformKind,
    pub r_grid: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Slope of `ln|Ψ|` against `ln r` over the local maxima.
    pub fitted_slope: f64,
    /// Natural-log intercept of the same fit.
    pub fitted_intercept: f64,
    pub maxima_used: usize,
    /// Coordinates of `φ` that vanish.
    pub j_vanishing: usize,
    /// `max_r r^{3/2}|Ψ(r, φ)|`.
    pub lambda_max: f64,
}

/// Interior local maxima `(r, |Ψ|)` of a sampled profile.
pub fn local_maxima(r: &[f64], mags: &[f64]) -> Vec<(f64, f64)> {
    (1..mags.len().saturating_sub(1))
        .filter(|&i| mags[i] > mags[i - 1] && mags[i] >= mags[i + 1])
        .map(|i| (r[i], mags[i]))
        .collect()
}

/// Decay profiles of the transform of `g` along each direction.
pub fn decay_sweep(
    body: &StarBody,
    g: &SphereField,
    directions: &[[f64; 2]],
    r_grid: &[f64],
    kind: TransformKind,
    exec: Exec,
) -> Result<Vec<DecayProfile>> {
    check_planar(body)?;
    if r_grid.len() < 3 || r_grid.windows(2).any(|w| w[1] <= w[0]) || !(r_grid[0] > 0.0) {
        return Err(Error::invalid("r grid must be positive, strictly increasing, with ≥ 3 points"));
    }
    let r_max = *r_grid.last().unwrap();
    check_frequency(&[r_max, 0.0])?;
    let (rule, _) = rule_pair(body, g, kind, r_max)?;
    let uniform = is_uniform(r_grid);
    directions
        .iter()
        .map(|dir| {
            let len = norm(dir);
            if !(len > 0.0) {
                return Err(Error::invalid("zero direction"));
            }
            let phi = [dir[0] / len, dir[1] / len];
            let magnitudes: Vec<f64> = if uniform {
                rule.ray_uniform(kind, phi, r_grid, exec).iter().map(|v| v.norm()).collect()
            } else {
                map_slice(exec, r_grid, |&r| rule.eval(kind, [r * phi[0], r * phi[1]]).norm())
            };
            let maxima = local_maxima(r_grid, &magnitudes);
            let usable: Vec<(f64, f64)> = maxima.into_iter().filter(|(_, m)| *m > 0.0).collect();
            if usable.len() < 8 {
                return Err(Error::TooFewPoints { got: usable.len(), need: 8 });
            }
            let xs: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
            let ys: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
            let (slope, intercept, _) = least_squares(&xs, &ys);
            let lambda_max = r_grid.iter().zip(&magnitudes).map(|(r, m)| r.powf(1.5) * m).fold(0.0, f64::max);
            Ok(DecayProfile {
                direction: phi,
                kind,
                r_grid: r_grid.to_vec(),
                magnitudes,
                fitted_slope: slope,
                fitted_intercept: intercept,
                maxima_used: usable.len(),
                j_vanishing: phi.iter().filter(|v| v.abs() < 1e-12).count(),
                lambda_max,
            })
        })
        .collect()
}

/// Uniform grid `start, start + step, …` up to `stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop > start) || !(start > 0.0) {
        return Err(Error::invalid(format!("bad r grid {start}..{stop} step {step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + step * i as f64).collect())
}
