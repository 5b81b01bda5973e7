use std::f64::consts::PI;

use super::field::{Smoothness, SphereField};
use super::mesh::DirectionMesh;
use super::{dot, norm};
use crate::{Error, Result};

/// Relative slack in the membership test `gauge(x) ≤ ρ(1 + tol)`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Convex polygon `{x : a_i·x ≤ h_i}` given by outward direction numbers
/// `a_i` and positive offsets `h_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    normals: Vec<[f64; 2]>,
    offsets: Vec<f64>,
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(normals: Vec<[f64; 2]>, offsets: Vec<f64>) -> Result<Self> {
        if normals.len() != offsets.len() {
            return Err(Error::invalid(format!(
                "polygon has {} normals but {} offsets",
                normals.len(),
                offsets.len()
            )));
        }
        if normals.len() < 3 {
            return Err(Error::invalid("polygon needs at least 3 facets"));
        }
        if let Some(h) = offsets.iter().find(|h| !(**h > 0.0)) {
            return Err(Error::invalid(format!(
                "polygon offset {h} is not positive (origin must be interior)"
            )));
        }
        if normals.iter().any(|a| a[0] == 0.0 && a[1] == 0.0) {
            return Err(Error::invalid("polygon normal is the zero vector"));
        }
        // Order facets counterclockwise by normal angle.
        let mut order: Vec<usize> = (0..normals.len()).collect();
        order.sort_by(|&i, &j| {
            let ai = normals[i][1].atan2(normals[i][0]);
            let aj = normals[j][1].atan2(normals[j][0]);
            ai.total_cmp(&aj)
        });
        let normals: Vec<[f64; 2]> = order.iter().map(|&i| normals[i]).collect();
        let offsets: Vec<f64> = order.iter().map(|&i| offsets[i]).collect();

        let m = normals.len();
        let mut vertices = Vec::with_capacity(m);
        for i in 0..m {
            let (a, b) = (normals[i], normals[(i + 1) % m]);
            let ang = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
            if !(ang > 0.0 && ang < PI) {
                return Err(Error::invalid(
                    "polygon normals do not bound a region (consecutive normals must turn by less than π)",
                ));
            }
            let det = a[0] * b[1] - a[1] * b[0];
            let (ha, hb) = (offsets[i], offsets[(i + 1) % m]);
            vertices.push([(ha * b[1] - hb * a[1]) / det, (a[0] * hb - b[0] * ha) / det]);
        }
        let poly = Self {
            normals,
            offsets,
            vertices,
        };
        for v in &poly.vertices {
            if poly.gauge(v) > 1.0 + 1e-9 {
                return Err(Error::invalid("polygon has a redundant facet"));
            }
        }
        Ok(poly)
    }

    /// Axis-aligned square `[-1, 1]^2`.
    pub fn square() -> Self {
        Self::new(
            vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            vec![1.0; 4],
        )
        .expect("square is a valid polygon")
    }

    pub fn normals(&self) -> &[[f64; 2]] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Max over facet functionals `a_i·x / h_i`.
    #[inline]
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, h)| (a[0] * x[0] + a[1] * x[1]) / h)
            .fold(0.0f64, f64::max)
    }

    fn active_facet(&self, x: &[f64]) -> Result<usize> {
        let mut vals: Vec<(f64, usize)> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .enumerate()
            .map(|(i, (a, h))| ((a[0] * x[0] + a[1] * x[1]) / h, i))
            .collect();
        vals.sort_by(|p, q| q.0.total_cmp(&p.0));
        if vals[0].0 - vals[1].0 <= 1e-12 * vals[0].0.abs().max(1.0) {
            return Err(Error::VertexDirection(x.to_vec()));
        }
        Ok(vals[0].1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyFamily {
    Ball { radius: f64 },
    Ellipsoid { axes: Vec<f64> },
    Superellipsoid { k: u32 },
    Polygon(Polygon),
    /// Body defined by an arbitrary positive radial function.
    Custom { convex: bool },
}

/// Compact body containing the origin in its interior, described by a
/// positive radial function on `S^{n-1}`.
#[derive(Debug, Clone)]
pub struct StarBody {
    dim: usize,
    family: BodyFamily,
    radial: SphereField,
    circumradius: f64,
    label: String,
}

impl StarBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > 0.0) {
            return Err(Error::invalid(format!("ball radius {radius} is not positive")));
        }
        let radial = SphereField::constant(radius).with_dim(dim);
        Ok(Self {
            dim,
            family: BodyFamily::Ball { radius },
            radial,
            circumradius: radius,
            label: if radius == 1.0 {
                "ball".into()
            } else {
                format!("ball radius={radius}")
            },
        })
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(dim, 1.0)
    }

    pub fn ellipsoid(axes: Vec<f64>) -> Result<Self> {
        let dim = axes.len();
        check_dim(dim)?;
        if axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::invalid("ellipsoid axes must be positive"));
        }
        let inv: Vec<f64> = axes.iter().map(|a| 1.0 / a).collect();
        let radial = SphereField::new("ellipsoid-radial", move |u| {
            let s: f64 = u.iter().zip(&inv).map(|(x, ia)| (x * ia) * (x * ia)).sum();
            1.0 / s.sqrt()
        })
        .with_dim(dim);
        let circumradius = axes.iter().cloned().fold(0.0, f64::max);
        let label = format!(
            "ellipsoid axes=[{}]",
            axes.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
        );
        Ok(Self {
            dim,
            family: BodyFamily::Ellipsoid { axes },
            radial,
            circumradius,
            label,
        })
    }

    /// `{x : Σ x_i^{2k} ≤ 1}`.
    pub fn superellipsoid(dim: usize, k: u32) -> Result<Self> {
        check_dim(dim)?;
        if k == 0 {
            return Err(Error::invalid("superellipsoid exponent k must be ≥ 1"));
        }
        let radial = SphereField::new(format!("superellipsoid-radial:{k}"), move |u| {
            1.0 / power_mean_gauge(u, k)
        })
        .with_dim(dim);
        let circumradius = (dim as f64).powf(0.5 - 0.5 / k as f64);
        Ok(Self {
            dim,
            family: BodyFamily::Superellipsoid { k },
            radial,
            circumradius,
            label: format!("superellipsoid k={k}"),
        })
    }

    pub fn polygon(normals: Vec<[f64; 2]>, offsets: Vec<f64>) -> Result<Self> {
        Self::from_polygon(Polygon::new(normals, offsets)?)
    }

    pub fn square() -> Self {
        Self::from_polygon(Polygon::square()).expect("square body")
    }

    fn from_polygon(poly: Polygon) -> Result<Self> {
        let circumradius = poly.vertices().iter().map(|v| norm(v)).fold(0.0, f64::max);
        let p = poly.clone();
        let radial = SphereField::new("polygon-radial", move |u| 1.0 / p.gauge(u))
            .with_dim(2)
            .with_smoothness(Smoothness::PiecewiseSmooth);
        let label = if poly == Polygon::square() {
            "polygon square".to_string()
        } else {
            format!(
                "polygon normals=[{}] offsets=[{}]",
                poly.normals()
                    .iter()
                    .map(|a| format!("{},{}", a[0], a[1]))
                    .collect::<Vec<_>>()
                    .join(";"),
                poly.offsets().iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")
            )
        };
        Ok(Self {
            dim: 2,
            family: BodyFamily::Polygon(poly),
            radial,
            circumradius,
            label,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &BodyFamily {
        &self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Radius of a ball about the origin containing the body.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn is_convex(&self) -> bool {
        match self.family {
            BodyFamily::Custom { convex } => convex,
            _ => true,
        }
    }

    /// Radial boundary distance `r(u)` for a unit vector `u`.
    #[inline]
    pub fn radial(&self, u: &[f64]) -> f64 {
        self.radial.eval(u)
    }

    pub fn radial_field(&self) -> &SphereField {
        &self.radial
    }

    /// The density `m = r^n` whose body this is.
    pub fn density(&self) -> SphereField {
        let n = self.dim as i32;
        if let BodyFamily::Ball { radius } = self.family {
            return SphereField::constant(radius.powi(n))
                .with_dim(self.dim)
                .with_label(format!("density({})", self.label));
        }
        let radial = self.radial.clone();
        SphereField::new(format!("density({})", self.label), move |u| radial.eval(u).powi(n))
            .with_dim(self.dim)
            .with_smoothness(self.radial.smoothness())
    }

    /// Minkowski functional: `x ∈ ρD` iff `gauge(x) ≤ ρ`.
    #[inline]
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match &self.family {
            BodyFamily::Ball { radius } => norm(x) / radius,
            BodyFamily::Ellipsoid { axes } => x
                .iter()
                .zip(axes)
                .map(|(v, a)| (v / a) * (v / a))
                .sum::<f64>()
                .sqrt(),
            BodyFamily::Superellipsoid { k } => power_mean_gauge(x, *k),
            BodyFamily::Polygon(p) => p.gauge(x),
            BodyFamily::Custom { .. } => {
                let r = norm(x);
                if r == 0.0 {
                    return 0.0;
                }
                let mut u = [0.0f64; 8];
                for (d, s) in u[..self.dim].iter_mut().zip(x) {
                    *d = s / r;
                }
                r / self.radial.eval(&u[..self.dim])
            }
        }
    }

    /// Membership in `ρD` with the library's relative tolerance.
    #[inline]
    pub fn contains(&self, x: &[f64], rho: f64) -> bool {
        self.gauge(x) <= rho * (1.0 + MEMBERSHIP_TOL)
    }

    /// Gradient of the gauge at `x ≠ 0`.
    pub fn gauge_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let g = self.gauge(x);
        let grad = match &self.family {
            BodyFamily::Ball { radius } => x.iter().map(|v| v / (g * radius * radius)).collect(),
            BodyFamily::Ellipsoid { axes } => {
                x.iter().zip(axes).map(|(v, a)| v / (a * a * g)).collect()
            }
            BodyFamily::Superellipsoid { k } => {
                let p = 2 * *k as i32 - 1;
                x.iter().map(|v| (v / g).powi(p)).collect()
            }
            BodyFamily::Polygon(poly) => {
                let i = poly.active_facet(x)?;
                let (a, h) = (poly.normals[i], poly.offsets[i]);
                vec![a[0] / h, a[1] / h]
            }
            BodyFamily::Custom { .. } => {
                let h = 1e-6 * norm(x);
                let mut grad = vec![0.0; n];
                let mut xp = x.to_vec();
                for i in 0..n {
                    xp[i] = x[i] + h;
                    let up = self.gauge(&xp);
                    xp[i] = x[i] - h;
                    let dn = self.gauge(&xp);
                    xp[i] = x[i];
                    grad[i] = (up - dn) / (2.0 * h);
                }
                grad
            }
        };
        Ok(grad)
    }

    /// Outward unit normal at the boundary point `x`.
    pub fn outward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let grad = self.gauge_gradient(x)?;
        let len = norm(&grad);
        Ok(grad.into_iter().map(|g| g / len).collect())
    }

    /// Surface-to-sphere measure ratio `ds/dθ = |x|^n / (x·n(x))` at the
    /// boundary point over the unit direction `theta`.
    pub fn radon_nikodym(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        let r = self.radial(theta);
        let x: Vec<f64> = theta.iter().map(|t| r * t).collect();
        let normal = self.outward_normal(&x)?;
        Ok(r.powi(self.dim as i32) / dot(&x, &normal))
    }

    /// Polar angles of the corners of a planar body, sorted in `[0, 2π)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            BodyFamily::Polygon(p) => {
                let mut angles: Vec<f64> = p
                    .vertices()
                    .iter()
                    .map(|v| v[1].atan2(v[0]).rem_euclid(2.0 * PI))
                    .collect();
                angles.sort_by(f64::total_cmp);
                angles
            }
            _ => Vec::new(),
        }
    }

    /// Real interval of `t` with `gauge(p + t·d) ≤ thr`, for a unit vector
    /// `d`, or `None` when the line misses `thr·D`. Only meaningful for
    /// convex bodies; the result is a float approximation that callers
    /// refine against the exact membership test.
    pub fn line_interval(&self, p: &[f64], d: &[f64], thr: f64) -> Option<(f64, f64)> {
        match &self.family {
            BodyFamily::Ball { radius } => {
                let r = thr * radius;
                solve_quadratic_le(dot(d, d), 2.0 * dot(p, d), dot(p, p) - r * r)
            }
            BodyFamily::Ellipsoid { axes } => {
                let (mut a, mut b, mut c) = (0.0, 0.0, -thr * thr);
                for ((pi, di), ax) in p.iter().zip(d).zip(axes) {
                    let (pa, da) = (pi / ax, di / ax);
                    a += da * da;
                    b += 2.0 * pa * da;
                    c += pa * pa;
                }
                solve_quadratic_le(a, b, c)
            }
            BodyFamily::Polygon(poly) => {
                let r = thr * self.circumradius;
                let (mut lo, mut hi) = solve_quadratic_le(1.0, 2.0 * dot(p, d), dot(p, p) - r * r)?;
                for (a, h) in poly.normals.iter().zip(&poly.offsets) {
                    let ap = a[0] * p[0] + a[1] * p[1];
                    let ad = a[0] * d[0] + a[1] * d[1];
                    let rhs = h * thr - ap;
                    if ad > 0.0 {
                        hi = hi.min(rhs / ad);
                    } else if ad < 0.0 {
                        lo = lo.max(rhs / ad);
                    } else if rhs < 0.0 {
                        return None;
                    }
                }
                (lo <= hi).then_some((lo, hi))
            }
            BodyFamily::Superellipsoid { k } => match axis_of(d) {
                Some((axis, sign)) => {
                    let two_k = 2 * *k as i32;
                    let scale = thr;
                    let rest: f64 = 1.0
                        - p.iter()
                            .enumerate()
                            .filter(|(i, _)| *i != axis)
                            .map(|(_, v)| (v / scale).powi(two_k))
                            .sum::<f64>();
                    if rest < 0.0 {
                        return None;
                    }
                    let half = scale * rest.powf(1.0 / two_k as f64);
                    let c = -p[axis] * sign;
                    Some((c - half, c + half))
                }
                None => self.generic_line_interval(p, d, thr),
            },
            BodyFamily::Custom { .. } => self.generic_line_interval(p, d, thr),
        }
    }

    /// Golden-section search for the gauge minimum along the line, then
    /// bisection for each end of the sublevel interval.
    fn generic_line_interval(&self, p: &[f64], d: &[f64], thr: f64) -> Option<(f64, f64)> {
        let r = thr * self.circumradius;
        let (lo0, hi0) = solve_quadratic_le(dot(d, d), 2.0 * dot(p, d), dot(p, p) - r * r)?;
        let n = self.dim;
        let g = |t: f64| {
            let mut x = [0.0f64; 8];
            for i in 0..n {
                x[i] = p[i] + t * d[i];
            }
            self.gauge(&x[..n])
        };
        let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo0, hi0);
        let mut c = b - inv_phi * (b - a);
        let mut e = a + inv_phi * (b - a);
        let (mut gc, mut ge) = (g(c), g(e));
        for _ in 0..200 {
            if (b - a).abs() <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if gc < ge {
                b = e;
                e = c;
                ge = gc;
                c = b - inv_phi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = e;
                gc = ge;
                e = a + inv_phi * (b - a);
                ge = g(e);
            }
        }
        let (tmin, gmin) = if gc < ge { (c, gc) } else { (e, ge) };
        if gmin > thr {
            return None;
        }
        let bisect = |mut inside: f64, mut outside: f64| {
            for _ in 0..64 {
                let mid = 0.5 * (inside + outside);
                if mid == inside || mid == outside {
                    break;
                }
                if g(mid) <= thr {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        let lo = if g(lo0) <= thr { lo0 } else { bisect(tmin, lo0) };
        let hi = if g(hi0) <= thr { hi0 } else { bisect(tmin, hi0) };
        Some((lo, hi))
    }
}

/// Star body whose boundary is `r = m(θ)^{1/n}`.
pub fn body_from_density(m: &SphereField, n: usize) -> Result<StarBody> {
    check_dim(n)?;
    let m = m.clone().require_positive(n)?;
    if let Some(c) = m.constant_value() {
        let mut body = StarBody::ball(n, c.powf(1.0 / n as f64))?;
        body.label = format!("density-body expr={}", m.label());
        return Ok(body);
    }
    let inv_n = 1.0 / n as f64;
    let mm = m.clone();
    let radial = SphereField::new(format!("radial({})", m.label()), move |u| mm.eval(u).powf(inv_n))
        .with_dim(n)
        .with_smoothness(m.smoothness());
    let mesh = DirectionMesh::standard(n);
    let max_r = mesh.iter().map(|u| radial.eval(u)).fold(0.0, f64::max);
    let convex = n == 2 && mesh_polygon_is_convex(&radial, &mesh);
    Ok(StarBody {
        dim: n,
        family: BodyFamily::Custom { convex },
        radial,
        circumradius: max_r * 1.02,
        label: format!("density-body expr={}", m.label()),
    })
}

fn mesh_polygon_is_convex(radial: &SphereField, mesh: &DirectionMesh) -> bool {
    let pts: Vec<[f64; 2]> = mesh
        .iter()
        .map(|u| {
            let r = radial.eval(u);
            [r * u[0], r * u[1]]
        })
        .collect();
    let m = pts.len();
    (0..m).all(|i| {
        let (a, b, c) = (pts[i], pts[(i + 1) % m], pts[(i + 2) % m]);
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        cross > 0.0
    })
}

fn check_dim(n: usize) -> Result<()> {
    if (2..=4).contains(&n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension {n} outside supported range 2..=4")))
    }
}

/// `(Σ |x_i|^{2k})^{1/(2k)}`, scaled by the max coordinate to avoid overflow.
#[inline]
fn power_mean_gauge(x: &[f64], k: u32) -> f64 {
    let mx = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if mx == 0.0 {
        return 0.0;
    }
    let two_k = 2 * k as i32;
    let s: f64 = x.iter().map(|v| (v / mx).powi(two_k)).sum();
    mx * s.powf(1.0 / two_k as f64)
}

/// Interval where `a t² + b t + c ≤ 0` for `a > 0`.
fn solve_quadratic_le(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Cancellation-free roots.
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    Some((r1.min(r2), r1.max(r2)))
}

fn axis_of(d: &[f64]) -> Option<(usize, f64)> {
    let mut found = None;
    for (i, v) in d.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        if found.is_some() || v.abs() != 1.0 {
            return None;
        }
        found = Some((i, *v));
    }
    found
}
