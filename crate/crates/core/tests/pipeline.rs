use std::fs;

use radproj::analysis::{geometric_grid, residual_series, rotation_average, SeriesOptions};
use radproj::exec::Exec;
use radproj::reporting::{run, RawConfig};
use radproj::{SphereField, StarBody};

#[test]
fn sequential_and_parallel_series_agree_bitwise() {
    let grid = geometric_grid(16.0, 512.0, 8, Some(3)).unwrap();
    let body = StarBody::superellipsoid(2, 3).unwrap();
    let f = SphereField::builtin("cos2").unwrap();
    let seq = SeriesOptions { exec: Exec::Sequential, ..Default::default() };
    let par = SeriesOptions { exec: Exec::Parallel, ..Default::default() };
    let a = residual_series(&body, &f, &grid, None, seq).unwrap();
    let b = residual_series(&body, &f, &grid, None, par).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.residual.to_bits(), y.residual.to_bits());
        assert_eq!(x.weighted_count.to_bits(), y.weighted_count.to_bits());
    }
    let a = rotation_average(&StarBody::square(), &SphereField::one(), &grid, 4, 9, seq).unwrap();
    let b = rotation_average(&StarBody::square(), &SphereField::one(), &grid, 4, 9, par).unwrap();
    for (x, y) in a.means.iter().zip(&b.means) {
        assert_eq!(x.mean_abs.to_bits(), y.mean_abs.to_bits());
    }
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, workers) in [1, 2].into_iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let text = format!(
            "kind = rotate-average\nbody = square\nrho-start = 16\nrho-stop = 256\nrotations = 4\nseed = 5\nworkers = {workers}\nout = {}\n",
            out.display()
        );
        let record = run(&RawConfig::parse(&text).unwrap().into_config().unwrap()).unwrap();
        assert!(record.tables.fit.is_some());
        outputs.push(out);
    }
    for name in ["residuals.csv", "mean_residuals.csv", "residual_log10.dat"] {
        let a = fs::read(outputs[0].join(name)).unwrap();
        let b = fs::read(outputs[1].join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name}");
    }
}
