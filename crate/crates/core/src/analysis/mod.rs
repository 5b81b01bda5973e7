//! Residual series, rotation averages, exponent fits and theoretical rates.

mod fit;
mod residual;
mod theory;

pub use fit::{fit_envelope_exponent, fit_power_law, least_squares, ExponentFit, FitMethod};
pub use residual::{
    geometric_grid, haar_rotations, residual_series, rotation_average, MeanRecord, ResidualRecord, ResidualSeries,
    RotationAverage, SeriesOptions,
};
pub use theory::{theory_exponents, Family, TheoryExponents};
