use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Quasi-uniform set of unit directions, stored flat with stride `n`.
#[derive(Debug, Clone)]
pub struct DirectionMesh {
    n: usize,
    coords: Vec<f64>,
}

impl DirectionMesh {
    /// 4096 equally spaced directions for `n = 2`, a 16384-point Fibonacci
    /// lattice for `n = 3`, and 16384 seeded Gaussian directions otherwise.
    pub fn standard(n: usize) -> Self {
        match n {
            2 => Self::circle(4096),
            3 => Self::fibonacci(16384),
            _ => Self::gaussian(n, 16384, 0x5eed),
        }
    }

    pub fn circle(count: usize) -> Self {
        let mut coords = Vec::with_capacity(2 * count);
        for i in 0..count {
            let t = 2.0 * PI * i as f64 / count as f64;
            coords.extend([t.cos(), t.sin()]);
        }
        Self { n: 2, coords }
    }

    pub fn fibonacci(count: usize) -> Self {
        let golden = PI * (3.0 - 5.0f64.sqrt());
        let mut coords = Vec::with_capacity(3 * count);
        for i in 0..count {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            coords.extend([r * phi.cos(), r * phi.sin(), z]);
        }
        Self { n: 3, coords }
    }

    pub fn gaussian(n: usize, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords = Vec::with_capacity(n * count);
        let mut v = vec![0.0; n];
        for _ in 0..count {
            loop {
                for x in v.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                let r = super::norm(&v);
                if r > 1e-6 {
                    coords.extend(v.iter().map(|x| x / r));
                    break;
                }
            }
        }
        Self { n, coords }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meshes_are_unit_length() {
        for n in 2..=4 {
            let mesh = DirectionMesh::standard(n);
            assert!(mesh.len() >= 4096);
            for u in mesh.iter() {
                assert!((super::super::norm(u) - 1.0).abs() < 1e-14);
            }
        }
    }
}
