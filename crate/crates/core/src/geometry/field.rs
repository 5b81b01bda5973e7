use std::fmt;
use std::sync::Arc;

use super::mesh::DirectionMesh;
use super::norm;
use crate::{Error, Result};

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Smooth,
    PiecewiseSmooth,
}

/// A real function on the unit sphere `S^{n-1}`, used both as a density `m`
/// and as a test function `f`.
///
/// Evaluators must be pure; fields are cloned freely and shared across
/// workers.
#[derive(Clone)]
pub struct SphereField {
    eval: Evaluator,
    label: String,
    smoothness: Smoothness,
    positive: bool,
    constant: Option<f64>,
    dim: Option<usize>,
}

impl fmt::Debug for SphereField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereField")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .field("positive", &self.positive)
            .field("constant", &self.constant)
            .finish()
    }
}

impl SphereField {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            label: label.into(),
            smoothness: Smoothness::Smooth,
            positive: false,
            constant: None,
            dim: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut field = Self::new(format!("const:{c}"), move |_| c);
        field.constant = Some(c);
        field.positive = c > 0.0;
        field
    }

    pub fn one() -> Self {
        let mut field = Self::constant(1.0);
        field.label = "one".into();
        field
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn with_dim(mut self, n: usize) -> Self {
        self.dim = Some(n);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn eval(&self, u: &[f64]) -> f64 {
        (self.eval)(u)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// `Some(c)` when the field is known to be identically `c`.
    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Check positivity on the standard direction mesh for dimension `n`
    /// and mark the field positive.
    pub fn require_positive(mut self, n: usize) -> Result<Self> {
        if let Some(d) = self.dim {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, got: d });
            }
        }
        let mesh = DirectionMesh::standard(n);
        for u in mesh.iter() {
            let v = self.eval(u);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveDensity {
                    direction: u.to_vec(),
                    value: v,
                });
            }
        }
        self.positive = true;
        Ok(self)
    }

    /// Minimum over the standard mesh for dimension `n`.
    pub fn mesh_min(&self, n: usize) -> f64 {
        DirectionMesh::standard(n)
            .iter()
            .map(|u| self.eval(u))
            .fold(f64::INFINITY, f64::min)
    }

    /// Pointwise `a·self + b`.
    pub fn affine(&self, a: f64, b: f64, label: impl Into<String>) -> Self {
        let inner = self.eval.clone();
        let mut field = Self::new(label, move |u| a * inner(u) + b);
        field.smoothness = self.smoothness;
        field.dim = self.dim;
        field.constant = self.constant.map(|c| a * c + b);
        field
    }

    /// Look up a field from the built-in catalog.
    ///
    /// Ids: `one`, `zero`, `four`, `const:<c>`, `cos` (u₁), `cos2` (u₁²),
    /// `sin2` (u₂²), `u1u2`, `exp-cos` (e^{u₁}), `cos-bump` (1 + u₁/2),
    /// `two-lobe` (1 + 0.3(u₁² − u₂²)), `tilt-wave` (1.5 + u₁u₂/2),
    /// `exp-bump` (e^{u₁/2}), `square` (density whose body is the cube
    /// `[-1,1]^n`), `superellipse:<k>` (density of `Σ x_i^{2k} ≤ 1`).
    pub fn builtin(id: &str) -> Result<Self> {
        let id = id.trim();
        if let Some(rest) = id.strip_prefix("const:") {
            let c: f64 = rest
                .parse()
                .map_err(|_| Error::invalid(format!("bad constant in field id '{id}'")))?;
            return Ok(Self::constant(c).with_label(id));
        }
        if let Some(rest) = id.strip_prefix("superellipse:") {
            let k: i32 = rest
                .parse()
                .ok()
                .filter(|k| *k >= 1)
                .ok_or_else(|| Error::invalid(format!("bad exponent in field id '{id}'")))?;
            let field = Self::new(id, move |u| {
                let n = u.len() as f64;
                let s: f64 = u.iter().map(|x| x.powi(2 * k)).sum();
                s.powf(-n / (2.0 * k as f64))
            });
            return Ok(field);
        }
        let field = match id {
            "one" => Self::one(),
            "zero" => Self::constant(0.0).with_label("zero"),
            "four" => Self::constant(4.0).with_label("four"),
            "cos" => Self::new(id, |u| u[0]),
            "cos2" => Self::new(id, |u| u[0] * u[0]),
            "sin2" => Self::new(id, |u| u[1] * u[1]),
            "u1u2" => Self::new(id, |u| u[0] * u[1]),
            "exp-cos" => Self::new(id, |u| u[0].exp()),
            "cos-bump" => Self::new(id, |u| 1.0 + 0.5 * u[0]),
            "two-lobe" => Self::new(id, |u| 1.0 + 0.3 * (u[0] * u[0] - u[1] * u[1])),
            "tilt-wave" => Self::new(id, |u| 1.5 + 0.5 * u[0] * u[1]),
            "exp-bump" => Self::new(id, |u| (0.5 * u[0]).exp()),
            "square" => Self::new(id, |u| {
                let n = u.len() as i32;
                let mx = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                mx.powi(-n)
            })
            .with_smoothness(Smoothness::PiecewiseSmooth),
            _ => return Err(Error::invalid(format!("unknown field id '{id}'"))),
        };
        Ok(field)
    }
}

/// Weight-zero homogeneous extension `F(x) = f(x/|x|)` of a sphere field.
#[derive(Debug, Clone)]
pub struct HomogeneousExtension {
    field: SphereField,
}

pub fn homogeneous_extension(f: &SphereField) -> HomogeneousExtension {
    HomogeneousExtension { field: f.clone() }
}

impl HomogeneousExtension {
    pub fn field(&self) -> &SphereField {
        &self.field
    }

    /// `F(x)`; the origin is rejected.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::invalid("homogeneous extension evaluated at the origin"));
        }
        Ok(self.eval_nonzero(x))
    }

    /// `F(x)` for `x ≠ 0`; callers guarantee the precondition.
    #[inline]
    pub fn eval_nonzero(&self, x: &[f64]) -> f64 {
        if let Some(c) = self.field.constant_value() {
            return c;
        }
        let r = norm(x);
        let mut u = [0.0f64; 8];
        let n = x.len();
        for (dst, src) in u[..n].iter_mut().zip(x) {
            *dst = src / r;
        }
        self.field.eval(&u[..n])
    }
}

/// `f = plus − minus` with both parts strictly positive.
#[derive(Debug, Clone)]
pub struct PositiveParts {
    pub plus: SphereField,
    pub minus: SphereField,
    pub shift: f64,
}

/// Split `f` into `f + c` and the constant `c`, with `c = |min f| + 1` taken
/// over the standard direction mesh.
pub fn positive_decomposition(f: &SphereField, n: usize) -> PositiveParts {
    let shift = f.mesh_min(n).abs() + 1.0;
    let plus = f.affine(1.0, shift, format!("{}+{shift}", f.label()));
    let minus = SphereField::constant(shift);
    PositiveParts { plus, minus, shift }
}
