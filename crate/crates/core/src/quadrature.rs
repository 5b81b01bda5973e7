//! Integrals over the sphere and over star bodies.
//!
//! The target `∫ f(θ) m(θ) dθ` uses a periodic trapezoid rule on the circle
//! (split at corners for polygons), a Gauss–Legendre × trapezoid product
//! rule on `S²`, and a nested product on `S³`. Body integrals `∫_D F dx` are
//! estimated by seeded Monte Carlo so the radial identity
//! `∫_D F dx = (1/n) ∫ f m dθ` can be checked from two independent routes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{map_range, Exec};
use crate::geometry::{body_from_density, homogeneous_extension, HomogeneousExtension, SphereField, StarBody};
use crate::sum::{pairwise_sum, KahanSum};
use crate::{Error, Result};

/// Trapezoid nodes on the circle by default.
pub const DEFAULT_CIRCLE_NODES: usize = 4096;
/// Gauss–Legendre nodes per smooth arc of a piecewise-smooth planar body.
pub const DEFAULT_ARC_NODES: usize = 96;
pub const DEFAULT_POLAR_NODES: usize = 128;
pub const DEFAULT_AZIMUTH_NODES: usize = 256;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if order == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Nodes on `S^{n-1}` (flat, stride `n`) with positive weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order_tag: String,
}

impl QuadratureRule {
    /// Periodic trapezoid rule with `count` equally spaced nodes.
    pub fn circle_trapezoid(count: usize) -> Self {
        let w = 2.0 * PI / count as f64;
        let mut nodes = Vec::with_capacity(2 * count);
        for i in 0..count {
            let t = w * i as f64;
            nodes.extend([t.cos(), t.sin()]);
        }
        Self {
            dim: 2,
            nodes,
            weights: vec![w; count],
            order_tag: format!("trapezoid-{count}"),
        }
    }

    /// Composite Gauss–Legendre over the arcs between sorted break angles.
    pub fn circle_arcs(breaks: &[f64], per_arc: usize) -> Self {
        if breaks.is_empty() {
            return Self::circle_trapezoid(per_arc.max(8) * 8);
        }
        let (gx, gw) = gauss_legendre(per_arc);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (i, &a) in breaks.iter().enumerate() {
            let b = if i + 1 < breaks.len() { breaks[i + 1] } else { breaks[0] + 2.0 * PI };
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gx.iter().zip(&gw) {
                let t = mid + half * x;
                nodes.extend([t.cos(), t.sin()]);
                weights.push(half * w);
            }
        }
        Self {
            dim: 2,
            nodes,
            weights,
            order_tag: format!("gl-arcs-{}x{per_arc}", breaks.len()),
        }
    }

    /// Gauss–Legendre in `cos(polar)` × trapezoid in azimuth on `S²`.
    pub fn sphere_product(polar: usize, azimuth: usize) -> Self {
        let (zs, zw) = gauss_legendre(polar);
        let dphi = 2.0 * PI / azimuth as f64;
        let mut nodes = Vec::with_capacity(3 * polar * azimuth);
        let mut weights = Vec::with_capacity(polar * azimuth);
        for (z, wz) in zs.iter().zip(&zw) {
            let s = (1.0 - z * z).sqrt();
            for j in 0..azimuth {
                let phi = dphi * j as f64;
                nodes.extend([s * phi.cos(), s * phi.sin(), *z]);
                weights.push(wz * dphi);
            }
        }
        Self {
            dim: 3,
            nodes,
            weights,
            order_tag: format!("gl{polar}xtrap{azimuth}"),
        }
    }

    /// `u = (sin ψ · v, cos ψ)` with Gauss–Legendre in `ψ` and an `S²`
    /// product rule for `v`.
    pub fn s3_product(psi: usize, polar: usize, azimuth: usize) -> Self {
        let (xs, xw) = gauss_legendre(psi);
        let inner = Self::sphere_product(polar, azimuth);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (x, w) in xs.iter().zip(&xw) {
            let angle = 0.5 * PI * (x + 1.0);
            let (s, c) = angle.sin_cos();
            let wpsi = 0.5 * PI * w * s * s;
            for (v, wv) in inner.nodes.chunks_exact(3).zip(&inner.weights) {
                nodes.extend([s * v[0], s * v[1], s * v[2], c]);
                weights.push(wpsi * wv);
            }
        }
        Self {
            dim: 4,
            nodes,
            weights,
            order_tag: format!("gl{psi}x{}", inner.order_tag),
        }
    }

    /// The default rule for integrating against a body's density.
    pub fn for_body(body: &StarBody) -> Self {
        match body.dim() {
            2 => {
                let breaks = body.breakpoints();
                if breaks.is_empty() {
                    Self::circle_trapezoid(DEFAULT_CIRCLE_NODES)
                } else {
                    Self::circle_arcs(&breaks, DEFAULT_ARC_NODES)
                }
            }
            3 => Self::sphere_product(DEFAULT_POLAR_NODES, DEFAULT_AZIMUTH_NODES),
            _ => Self::s3_product(64, 64, 128),
        }
    }

    /// Same family with roughly twice the nodes, for convergence checks.
    pub fn refined_for_body(body: &StarBody) -> Self {
        match body.dim() {
            2 => {
                let breaks = body.breakpoints();
                if breaks.is_empty() {
                    Self::circle_trapezoid(2 * DEFAULT_CIRCLE_NODES)
                } else {
                    Self::circle_arcs(&breaks, 2 * DEFAULT_ARC_NODES)
                }
            }
            3 => Self::sphere_product(2 * DEFAULT_POLAR_NODES, 2 * DEFAULT_AZIMUTH_NODES),
            _ => Self::s3_product(96, 96, 192),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn order_tag(&self) -> &str {
        &self.order_tag
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    /// `Σ w_i g(u_i)` with compensated accumulation.
    pub fn integrate(&self, g: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes()
            .zip(&self.weights)
            .map(|(u, w)| w * g(u))
            .collect::<KahanSum>()
            .value()
    }
}

/// `∫_{S^{n-1}} f(θ) m(θ) dθ`.
pub fn sphere_integral(f: &SphereField, m: &SphereField, rule: &QuadratureRule) -> Result<f64> {
    for field in [f, m] {
        if let Some(d) = field.dim() {
            if d != rule.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rule.dim(),
                    got: d,
                });
            }
        }
    }
    Ok(rule.integrate(|u| f.eval(u) * m.eval(u)))
}

/// `∫ f m dθ` for the body's own density, with the body's default rule.
pub fn target_integral(body: &StarBody, f: &SphereField) -> Result<f64> {
    sphere_integral(f, &body.density(), &QuadratureRule::for_body(body))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 1 << 16;

/// `∫_D F(x) dx` by uniform sampling of the bounding cube `[-R, R]^n`.
///
/// Chunk `c` draws from a ChaCha stream selected by `c`, so the estimate is
/// a pure function of `(seed, samples)`.
pub fn body_integral(
    weight: &HomogeneousExtension,
    body: &StarBody,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one sample"));
    }
    let n = body.dim();
    let half = body.circumradius();
    let volume = (2.0 * half).powi(n as i32);
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials = map_range(exec, 0..chunks as i64, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = MC_CHUNK.min(samples - c as u64 * MC_CHUNK);
        let (mut s, mut ss) = (KahanSum::new(), KahanSum::new());
        let mut x = [0.0f64; 4];
        for _ in 0..count {
            for v in x[..n].iter_mut() {
                *v = rng.random_range(-half..half);
            }
            let pt = &x[..n];
            if body.gauge(pt) <= 1.0 && pt.iter().any(|v| *v != 0.0) {
                let val = weight.eval_nonzero(pt);
                s.add(val);
                ss.add(val * val);
            }
        }
        (s.value(), ss.value())
    });
    let sum = pairwise_sum(&partials.iter().map(|p| p.0).collect::<Vec<_>>());
    let sum_sq = pairwise_sum(&partials.iter().map(|p| p.1).collect::<Vec<_>>());
    let nf = samples as f64;
    let mean = sum / nf;
    let var = if samples > 1 {
        ((sum_sq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        value: volume * mean,
        std_error: volume * (var / nf).sqrt(),
        samples,
    })
}

/// `(1/n) ∫ f m dθ`, the radial evaluation of `∫_D F dx`.
pub fn body_integral_radial(f: &SphereField, body: &StarBody) -> Result<f64> {
    Ok(target_integral(body, f)? / body.dim() as f64)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IdentityCheck {
    pub f: String,
    pub m: String,
    pub lhs: f64,
    pub lhs_std_error: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / |rhs|`.
    pub rel_discrepancy: f64,
    /// `|lhs − rhs|` in units of the Monte Carlo standard error.
    pub sigmas: f64,
}

impl IdentityCheck {
    pub fn within(&self, sigmas: f64) -> bool {
        self.sigmas <= sigmas
    }
}

/// Compare the Monte Carlo body integral of `F` over the body of `m` with
/// `(1/n)·∫ f m dθ` from quadrature.
pub fn verify_identity(
    f: &SphereField,
    m: &SphereField,
    n: usize,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<IdentityCheck> {
    let body = body_from_density(m, n)?;
    let lhs = body_integral(&homogeneous_extension(f), &body, samples, seed, exec)?;
    let rule = QuadratureRule::for_body(&body);
    let rhs = sphere_integral(f, m, &rule)? / n as f64;
    let diff = (lhs.value - rhs).abs();
    let sigmas = if lhs.std_error > 0.0 {
        diff / lhs.std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(IdentityCheck {
        f: f.label().to_string(),
        m: m.label().to_string(),
        lhs: lhs.value,
        lhs_std_error: lhs.std_error,
        rhs,
        rel_discrepancy: if rhs != 0.0 { diff / rhs.abs() } else { diff },
        sigmas,
    })
}

/// `(f, m)` pairs from the built-in catalog used for identity checks.
pub const IDENTITY_CATALOG: [(&str, &str); 5] = [
    ("one", "one"),
    ("cos2", "cos-bump"),
    ("exp-cos", "two-lobe"),
    ("u1u2", "tilt-wave"),
    ("cos", "exp-bump"),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for order in [1, 2, 5, 16, 64, 200] {
            let (x, w) = gauss_legendre(order);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
            let deg = 2 * order - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((approx - exact).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn rule_weights_sum_to_sphere_area() {
        let rules = [
            (QuadratureRule::circle_trapezoid(4096), 2.0 * PI),
            (QuadratureRule::circle_arcs(&StarBody::square().breakpoints(), 96), 2.0 * PI),
            (QuadratureRule::sphere_product(128, 256), 4.0 * PI),
            (QuadratureRule::s3_product(32, 32, 64), 2.0 * PI * PI),
        ];
        for (rule, area) in rules {
            let total: f64 = rule.weights().iter().sum();
            assert!((total - area).abs() <= 1e-10 * area, "{}", rule.order_tag());
            for u in rule.nodes() {
                let r: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((r - 1.0).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn constant_sphere_integrals() {
        let one = SphereField::one();
        let i2 = sphere_integral(&one, &one, &QuadratureRule::circle_trapezoid(4096)).unwrap();
        assert!((i2 - 2.0 * PI).abs() < 1e-12);
        let i3 = sphere_integral(&one, &one, &QuadratureRule::sphere_product(128, 256)).unwrap();
        assert!((i3 - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn cos_squared_against_riemann_sum() {
        // Independent midpoint Riemann sum with 10^6 cells.
        let cells = 1_000_000;
        let h = 2.0 * PI / cells as f64;
        let riemann: f64 = (0..cells).map(|i| ((i as f64 + 0.5) * h).cos().powi(2) * h).sum();
        assert!((riemann - PI).abs() < 1e-9);
        let f = SphereField::builtin("cos2").unwrap();
        let val = sphere_integral(&f, &SphereField::one(), &QuadratureRule::circle_trapezoid(4096)).unwrap();
        assert!((val - riemann).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_exact_for_trig_polynomials() {
        let rule = QuadratureRule::circle_trapezoid(32);
        let g = |u: &[f64]| {
            let t = u[1].atan2(u[0]);
            1.0 + (3.0 * t).cos() + 0.5 * (8.0 * t).sin() + 0.25 * (7.0 * t).cos() * (t).cos()
        };
        assert!((rule.integrate(g) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = SphereField::one().with_dim(3);
        let r = QuadratureRule::circle_trapezoid(16);
        assert!(matches!(
            sphere_integral(&f, &SphereField::one(), &r),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn polygon_target_is_twice_area() {
        let sq = StarBody::square();
        let t = target_integral(&sq, &SphereField::one()).unwrap();
        assert!((t - 8.0).abs() < 1e-12);
        let tri = StarBody::polygon(vec![[1.0, 1.0], [-1.0, 0.5], [0.1, -1.0]], vec![1.0, 0.7, 0.9]).unwrap();
        let crate::geometry::BodyFamily::Polygon(poly) = tri.family() else { unreachable!() };
        let vs = poly.vertices();
        let v = 0.5
            * (0..vs.len())
                .map(|i| {
                    let (a, b) = (vs[i], vs[(i + 1) % vs.len()]);
                    a[0] * b[1] - a[1] * b[0]
                })
                .sum::<f64>();
        let t = target_integral(&tri, &SphereField::one()).unwrap();
        assert!((t - 2.0 * v).abs() < 1e-12);
    }

    #[test]
    fn body_integral_routes() {
        let one = SphereField::one();
        let disk = StarBody::unit_ball(2).unwrap();
        let mc = body_integral(&homogeneous_extension(&one), &disk, 200_000, 1, Exec::Parallel).unwrap();
        assert!((mc.value - PI).abs() < 4.0 * mc.std_error);
        assert!((body_integral_radial(&one, &disk).unwrap() - PI).abs() < 1e-12);

        let two = body_from_density(&SphereField::constant(4.0), 2).unwrap();
        assert!((body_integral_radial(&one, &two).unwrap() - 4.0 * PI).abs() < 1e-12);

        let cos2 = SphereField::builtin("cos2").unwrap();
        assert!((body_integral_radial(&cos2, &disk).unwrap() - PI / 2.0).abs() < 1e-12);
        assert!(body_integral(&homogeneous_extension(&one), &disk, 0, 1, Exec::Parallel).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let disk = StarBody::unit_ball(2).unwrap();
        let w = homogeneous_extension(&SphereField::builtin("cos2").unwrap());
        let a = body_integral(&w, &disk, 300_001, 9, Exec::Parallel).unwrap();
        let b = body_integral(&w, &disk, 300_001, 9, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        let c = body_integral(&w, &disk, 300_001, 10, Exec::Parallel).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn identity_holds_for_constants() {
        let one = SphereField::one();
        let chk = verify_identity(&one, &one, 2, 1_000_000, 3, Exec::Parallel).unwrap();
        assert!((chk.rhs - PI).abs() < 1e-12);
        assert!(chk.within(3.0), "{chk:?}");
        let four = SphereField::constant(4.0);
        let chk = verify_identity(&one, &four, 2, 1_000_000, 3, Exec::Parallel).unwrap();
        assert!((chk.rhs - 4.0 * PI).abs() < 1e-12);
        assert!(chk.within(3.0), "{chk:?}");
    }

    #[test]
    fn identity_holds_in_three_dimensions() {
        let f = SphereField::builtin("cos2").unwrap();
        let m = SphereField::builtin("two-lobe").unwrap();
        let chk = verify_identity(&f, &m, 3, 2_000_000, 4, Exec::Parallel).unwrap();
        assert!(chk.within(3.0), "{chk:?}");
    }
}
