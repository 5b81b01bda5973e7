use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fit::{fit_power_law, ExponentFit, FitMethod, FLOOR_REL};
use crate::exec::{map_slice, Exec};
use crate::geometry::{homogeneous_extension, Rotation, SphereField, StarBody};
use crate::lattice::{discrete_measure_value, weighted_count, CountRequest, DEFAULT_BUDGET};
use crate::quadrature::target_integral;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesOptions {
    pub exec: Exec,
    pub budget: u64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            exec: Exec::default(),
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualRecord {
    pub rho: f64,
    pub rotation_id: String,
    pub weighted_count: f64,
    pub point_count: u64,
    pub discrete_value: f64,
    pub target: f64,
    /// `target − discrete_value`.
    pub residual: f64,
    pub boundary_hits: u64,
    /// Set when some lattice point sits within the boundary band at this ρ.
    pub boundary_flag: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualSeries {
    pub body: String,
    pub f: String,
    pub m: String,
    pub dim: usize,
    pub records: Vec<ResidualRecord>,
}

impl ResidualSeries {
    pub fn target(&self) -> Option<f64> {
        self.records.first().map(|r| r.target)
    }

    pub fn flagged(&self) -> usize {
        self.records.iter().filter(|r| r.boundary_flag).count()
    }
}

/// Geometric grid `g_j = start·2^{j/per_octave}` up to `stop`.
///
/// With a seed, each node is pushed forward by `0.5·u_j·(g_{j+1} − g_j)`
/// with `u_j` uniform in `[0, 1)` from a seeded stream, which keeps the grid
/// strictly increasing and away from integers and other special radii.
pub fn geometric_grid(start: f64, stop: f64, per_octave: u32, jitter_seed: Option<u64>) -> Result<Vec<f64>> {
    if !(start > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::config("rho-start", format!("need 0 < start, got {start}")));
    }
    if !(stop > start) {
        return Err(Error::config("rho-stop", format!("rho start {start} must be < stop {stop}")));
    }
    if per_octave == 0 {
        return Err(Error::config("per-octave", "must be at least 1"));
    }
    let step = 2f64.powf(1.0 / per_octave as f64);
    let mut rng = jitter_seed.map(ChaCha8Rng::seed_from_u64);
    let mut grid = Vec::new();
    for j in 0.. {
        let g = start * 2f64.powf(j as f64 / per_octave as f64);
        let rho = match rng.as_mut() {
            Some(rng) => g + 0.5 * rng.random::<f64>() * g * (step - 1.0),
            None => g,
        };
        if rho > stop * (1.0 + 1e-12) {
            break;
        }
        grid.push(rho.min(stop));
    }
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("empty rho grid"));
    }
    if let Some(bad) = grid.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::invalid(format!("rho values must be positive and finite, got {bad}")));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("rho grid not increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

/// `R(ρ) = ∫ f m dθ − (n/ρ^n)·Σ F(γN)` along `grid`, with `m` the body's density.
pub fn residual_series(
    body: &StarBody,
    f: &SphereField,
    grid: &[f64],
    rotation: Option<&Rotation>,
    opts: SeriesOptions,
) -> Result<ResidualSeries> {
    check_grid(grid)?;
    if let Some(rot) = rotation {
        if rot.dim() != body.dim() {
            return Err(Error::DimensionMismatch {
                expected: body.dim(),
                got: rot.dim(),
            });
        }
    }
    let n = body.dim();
    let target = target_integral(body, f)?;
    let weight = homogeneous_extension(f);
    let counts = map_slice(opts.exec, grid, |&rho| {
        let mut req = CountRequest::new(body, rho).weight(&weight).exec(opts.exec).budget(opts.budget);
        if let Some(rot) = rotation {
            req = req.rotation(rot);
        }
        weighted_count(&req)
    });
    let mut records = Vec::with_capacity(grid.len());
    for count in counts {
        let count = count?;
        let discrete_value = discrete_measure_value(&count, n)?;
        records.push(ResidualRecord {
            rho: count.rho,
            rotation_id: count.rotation_id,
            weighted_count: count.weighted_count,
            point_count: count.point_count,
            discrete_value,
            target,
            residual: target - discrete_value,
            boundary_hits: count.boundary_hits,
            boundary_flag: count.boundary_hits > 0,
        });
    }
    Ok(ResidualSeries {
        body: body.label().to_string(),
        f: f.label().to_string(),
        m: body.density().label().to_string(),
        dim: n,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MeanRecord {
    pub rho: f64,
    pub mean_abs: f64,
    /// Standard error of the mean of `|R|` over the ensemble.
    pub std_error: f64,
    pub min_abs: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RotationAverage {
    pub seed: u64,
    /// One series per rotation, in draw order.
    pub series: Vec<ResidualSeries>,
    pub means: Vec<MeanRecord>,
}

impl RotationAverage {
    pub fn target(&self) -> f64 {
        self.series[0].records[0].target
    }

    /// Envelope fit on the per-ρ mean `|R|`.
    pub fn fit(&self, window: (f64, f64), method: FitMethod) -> Result<ExponentFit> {
        let points: Vec<(f64, f64)> = self.means.iter().map(|m| (m.rho, m.mean_abs)).collect();
        fit_power_law(&points, window, method, FLOOR_REL * self.target().abs())
    }
}

/// The `count` Haar rotations drawn for `seed`, with ids `haar-{seed}-{i}`.
pub fn haar_rotations(n: usize, count: usize, seed: u64) -> Result<Vec<Rotation>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| Rotation::haar(n, &mut rng, format!("haar-{seed}-{i}"))).collect()
}

/// Mean `|R(ρ, γ)|` over `num_rotations` Haar-random `γ`.
pub fn rotation_average(
    body: &StarBody,
    f: &SphereField,
    grid: &[f64],
    num_rotations: usize,
    seed: u64,
    opts: SeriesOptions,
) -> Result<RotationAverage> {
    if num_rotations == 0 {
        return Err(Error::config("rotations", "need at least one rotation"));
    }
    check_grid(grid)?;
    let rotations = haar_rotations(body.dim(), num_rotations, seed)?;
    let series = map_slice(opts.exec, &rotations, |rot| residual_series(body, f, grid, Some(rot), opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let k = num_rotations as f64;
    let means = (0..grid.len())
        .map(|j| {
            let values: Vec<f64> = series.iter().map(|s| s.records[j].residual.abs()).collect();
            let mean = values.iter().sum::<f64>() / k;
            let var = if num_rotations > 1 {
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            MeanRecord {
                rho: grid[j],
                mean_abs: mean,
                std_error: (var / k).sqrt(),
                min_abs: values.iter().copied().fold(f64::INFINITY, f64::min),
                max_abs: values.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(RotationAverage { seed, series, means })
}
