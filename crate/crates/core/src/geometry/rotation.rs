use std::f64::consts::PI;

use rand::Rng;

use crate::{Error, Result};

const ORTHO_TOL: f64 = 1e-12;

/// Element of SO(n) acting on the integer lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    n: usize,
    /// Row-major `n × n`.
    matrix: Vec<f64>,
    id: String,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            matrix[i * n + i] = 1.0;
        }
        Self {
            n,
            matrix,
            id: "identity".into(),
        }
    }

    /// Planar rotation by `angle` radians.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            n: 2,
            matrix: vec![c, -s, s, c],
            id: format!("angle={angle}"),
        }
    }

    /// Rotation of R³ from a (not necessarily normalized) quaternion `w + xi + yj + zk`.
    pub fn from_quaternion(q: [f64; 4], id: impl Into<String>) -> Result<Self> {
        let len = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(len > 0.0) {
            return Err(Error::invalid("zero quaternion"));
        }
        let [w, x, y, z] = q.map(|v| v / len);
        let matrix = vec![
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ];
        Self::from_matrix(3, matrix, id)
    }

    /// Validates orthogonality and unit determinant.
    pub fn from_matrix(n: usize, matrix: Vec<f64>, id: impl Into<String>) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: matrix.len(),
            });
        }
        let rot = Self {
            n,
            matrix,
            id: id.into(),
        };
        let residual = rot.orthogonality_residual();
        if residual > ORTHO_TOL {
            return Err(Error::invalid(format!(
                "matrix is not orthogonal (residual {residual:e})"
            )));
        }
        let det = rot.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::invalid(format!("rotation determinant is {det}, not +1")));
        }
        Ok(rot)
    }

    /// Haar-distributed rotation: uniform angle for `n = 2`, uniform unit
    /// quaternion (Marsaglia) for `n = 3`.
    pub fn haar<R: Rng>(n: usize, rng: &mut R, id: impl Into<String>) -> Result<Self> {
        match n {
            2 => {
                let angle = rng.random_range(0.0..2.0 * PI);
                let mut rot = Self::planar(angle);
                rot.id = id.into();
                Ok(rot)
            }
            3 => {
                let (x1, x2, s1) = unit_disk_point(rng);
                let (x3, x4, s2) = unit_disk_point(rng);
                let scale = ((1.0 - s1) / s2).sqrt();
                Self::from_quaternion([x1, x2, x3 * scale, x4 * scale], id)
            }
            _ => Err(Error::invalid(format!(
                "Haar sampling is implemented for n = 2, 3 (got {n})"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| self.matrix[i * n + j] == if i == j { 1.0 } else { 0.0 }))
    }

    /// `out = R·x`.
    #[inline]
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.matrix[i * n..(i + 1) * n];
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.matrix[i * self.n + j]).collect()
    }

    /// Max entry of `|RᵀR − I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| self.matrix[k * n + i] * self.matrix[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.matrix.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
                .unwrap_or(col);
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let factor = a[row * n + col] / p;
                for k in col..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
            }
        }
        det
    }
}

fn unit_disk_point<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let s = x * x + y * y;
        if s < 1.0 && s > 0.0 {
            return (x, y, s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_rotations_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [2, 3] {
            for i in 0..200 {
                let rot = Rotation::haar(n, &mut rng, format!("r{i}")).unwrap();
                assert!(rot.orthogonality_residual() <= 1e-12);
                assert!((rot.determinant() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_reflection_and_skew() {
        assert!(Rotation::from_matrix(2, vec![1.0, 0.0, 0.0, -1.0], "refl").is_err());
        assert!(Rotation::from_matrix(2, vec![1.0, 0.1, 0.0, 1.0], "skew").is_err());
        assert!(Rotation::from_matrix(2, vec![1.0, 0.0, 0.0], "short").is_err());
        assert!(Rotation::haar(4, &mut ChaCha8Rng::seed_from_u64(0), "x").is_err());
    }

    #[test]
    fn planar_rotation_apply() {
        let rot = Rotation::planar(PI / 2.0);
        let mut out = [0.0; 2];
        rot.apply(&[1.0, 0.0], &mut out);
        assert!((out[0]).abs() < 1e-15 && (out[1] - 1.0).abs() < 1e-15);
        assert!(Rotation::identity(3).is_identity());
        assert!(!rot.is_identity());
    }

    #[test]
    fn quaternion_about_z() {
        let half = PI / 8.0;
        let rot = Rotation::from_quaternion([half.cos(), 0.0, 0.0, half.sin()], "qz").unwrap();
        let planar = Rotation::planar(PI / 4.0);
        assert!((rot.matrix()[0] - planar.matrix()[0]).abs() < 1e-15);
        assert!((rot.matrix()[1] - planar.matrix()[1]).abs() < 1e-15);
        assert_eq!(rot.matrix()[8], 1.0);
    }
}
