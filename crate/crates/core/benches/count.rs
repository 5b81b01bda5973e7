use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use radproj::analysis::{geometric_grid, residual_series, rotation_average, SeriesOptions};
use radproj::exec::Exec;
use radproj::lattice::{weighted_count, CountRequest};
use radproj::{Rotation, SphereField, StarBody};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn disk_count(c: &mut Criterion) {
    let disk = StarBody::unit_ball(2).unwrap();
    let mut group = c.benchmark_group("disk_count");
    for rho in [1e3, 3e4] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, rho), &rho, |b, &rho| {
                b.iter(|| weighted_count(&CountRequest::new(&disk, rho).exec(exec)).unwrap())
            });
        }
    }
    group.finish();
}

fn weighted_rotated_square(c: &mut Criterion) {
    let square = StarBody::square();
    let rot = Rotation::planar(0.61);
    let f = SphereField::builtin("cos2").unwrap();
    let weight = radproj::geometry::homogeneous_extension(&f);
    let mut group = c.benchmark_group("weighted_square");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| weighted_count(&CountRequest::new(&square, 400.0).rotation(&rot).weight(&weight).exec(exec)).unwrap())
        });
    }
    group.finish();
}

fn ball_3d(c: &mut Criterion) {
    let ball = StarBody::unit_ball(3).unwrap();
    let mut group = c.benchmark_group("ball_3d");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| weighted_count(&CountRequest::new(&ball, 200.0).exec(exec)).unwrap()));
    }
    group.finish();
}

fn pipelines(c: &mut Criterion) {
    let one = SphereField::one();
    let disk = StarBody::unit_ball(2).unwrap();
    let square = StarBody::square();
    let grid = geometric_grid(64.0, 8192.0, 8, Some(1)).unwrap();
    let small = geometric_grid(16.0, 512.0, 8, Some(2)).unwrap();
    let mut group = c.benchmark_group("pipelines");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = SeriesOptions { exec, ..Default::default() };
        group.bench_function(BenchmarkId::new("converge_disk", name), |b| {
            b.iter(|| residual_series(&disk, &one, &grid, None, opts).unwrap())
        });
        group.bench_function(BenchmarkId::new("rotate_square", name), |b| {
            b.iter(|| rotation_average(&square, &one, &small, 16, 7, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, disk_count, weighted_rotated_square, ball_3d, pipelines);
criterion_main!(benches);
