//! Weighted counts of nonzero integer points in dilates `ρD`, optionally
//! after rotating the lattice.
//!
//! The outer lattice coordinate is split into slabs. Inside a slab, every
//! line parallel to the last coordinate axis is clipped against the body and
//! only the clipped interval is visited; for constant weights only its
//! endpoints are. Endpoints are always settled with the same membership test
//! a naive scan would use, so inclusion decisions are identical to brute
//! force. Per-slab sums are compensated and the slab totals are combined by a
//! pairwise tree over the fixed outer-index range.

use std::collections::BTreeMap;
use std::ops::Range;

use num_bigint::BigUint;

use crate::exec::{map_range, Exec};
use crate::geometry::{BodyFamily, HomogeneousExtension, Rotation, StarBody, MEMBERSHIP_TOL};
use crate::sum::{pairwise_sum, KahanSum};
use crate::{Error, Result};

/// Relative half-width of the band in which a point counts as a boundary hit.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Default cap on enumeration work (rows for constant weights, points otherwise).
pub const DEFAULT_BUDGET: u64 = 4_000_000_000;

#[derive(Debug, Clone)]
pub struct CountRequest<'a> {
    pub body: &'a StarBody,
    pub rho: f64,
    pub rotation: Option<&'a Rotation>,
    pub weight: Option<&'a HomogeneousExtension>,
    pub exec: Exec,
    pub budget: u64,
}

impl<'a> CountRequest<'a> {
    pub fn new(body: &'a StarBody, rho: f64) -> Self {
        Self {
            body,
            rho,
            rotation: None,
            weight: None,
            exec: Exec::default(),
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn rotation(mut self, rotation: &'a Rotation) -> Self {
        self.rotation = Some(rotation);
        self
    }

    pub fn weight(mut self, weight: &'a HomogeneousExtension) -> Self {
        self.weight = Some(weight);
        self
    }

    pub fn exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    fn rotation_id(&self) -> String {
        self.rotation.map_or_else(|| "identity".to_string(), |r| r.id().to_string())
    }

    /// Outer-coordinate range covering the bounding box of `ρD`.
    pub fn outer_range(&self) -> Range<i64> {
        let extent = self.extent();
        -extent..extent + 1
    }

    fn extent(&self) -> i64 {
        (self.rho * self.body.circumradius() * (1.0 + 1e-6)).ceil() as i64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CountResult {
    pub rho: f64,
    pub rotation_id: String,
    /// Sum of `F(γN)` over nonzero included points.
    pub weighted_count: f64,
    pub point_count: u64,
    /// Lattice points with `|gauge − ρ| ≤ 1e-9·ρ`, inside or outside.
    pub boundary_hits: u64,
}

/// Sum over a single outer index.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OuterSum {
    pub weighted: KahanSum,
    pub count: u64,
    pub hits: u64,
}

/// Partial result over a set of outer indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlabPartial {
    entries: BTreeMap<i64, OuterSum>,
}

impl SlabPartial {
    /// Union of two partials over disjoint outer indices.
    pub fn merge(mut self, other: SlabPartial) -> Result<Self> {
        for (k, v) in other.entries {
            if self.entries.insert(k, v).is_some() {
                return Err(Error::OverlappingSlabs(k));
            }
        }
        Ok(self)
    }

    pub fn point_count(&self) -> u64 {
        self.entries.values().map(|e| e.count).sum()
    }

    /// `(outer index, points in that slice)` for every nonempty slice.
    pub fn outer_counts(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.entries.iter().filter(|(_, e)| e.count > 0).map(|(i, e)| (*i, e.count))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Weighted count of nonzero lattice points `N` with `γN ∈ ρD`.
pub fn weighted_count(req: &CountRequest<'_>) -> Result<CountResult> {
    let partial = enumerate_slab(req, req.outer_range())?;
    finish(req, &partial)
}

/// `(n/ρ^n)·weighted_count`.
pub fn discrete_measure_value(result: &CountResult, n: usize) -> Result<f64> {
    if !(result.rho > 0.0) {
        return Err(Error::invalid("discrete measure needs rho > 0"));
    }
    Ok(n as f64 / result.rho.powi(n as i32) * result.weighted_count)
}

/// Enumerate the outer indices in `slab` (clipped to the bounding box).
pub fn enumerate_slab(req: &CountRequest<'_>, slab: Range<i64>) -> Result<SlabPartial> {
    let plan = Plan::new(req)?;
    let full = req.outer_range();
    let lo = slab.start.max(full.start);
    let hi = slab.end.min(full.end);
    if lo >= hi {
        return Ok(SlabPartial::default());
    }
    let sums = map_range(req.exec, lo..hi, |i| plan.outer(i));
    let entries = (lo..hi).zip(sums).filter(|(_, s)| *s != OuterSum::default()).collect();
    Ok(SlabPartial { entries })
}

/// Enumerate several slabs, rejecting any overlap.
pub fn enumerate_slabs(req: &CountRequest<'_>, slabs: &[Range<i64>]) -> Result<SlabPartial> {
    let mut sorted: Vec<&Range<i64>> = slabs.iter().filter(|s| s.start < s.end).collect();
    sorted.sort_by_key(|s| s.start);
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::OverlappingSlabs(pair[1].start));
        }
    }
    slabs.iter().try_fold(SlabPartial::default(), |acc, s| acc.merge(enumerate_slab(req, s.clone())?))
}

/// Combine a partial into the final count with the fixed reduction order.
pub fn finish(req: &CountRequest<'_>, partial: &SlabPartial) -> Result<CountResult> {
    let point_count = partial.point_count();
    let boundary_hits = partial.entries.values().map(|e| e.hits).sum();
    let weighted_count = match constant_weight(req) {
        Some(c) => c * point_count as f64,
        None => {
            let values: Vec<f64> = req
                .outer_range()
                .map(|i| partial.entries.get(&i).map_or(0.0, |e| e.weighted.value()))
                .collect();
            pairwise_sum(&values)
        }
    };
    Ok(CountResult {
        rho: req.rho,
        rotation_id: req.rotation_id(),
        weighted_count,
        point_count,
        boundary_hits,
    })
}

fn constant_weight(req: &CountRequest<'_>) -> Option<f64> {
    match req.weight {
        None => Some(1.0),
        Some(w) => w.field().constant_value(),
    }
}

/// Exact test `Σ N_i^{2k} ≤ ⌊ρ^{2k}⌋` for unrotated superellipsoids.
#[derive(Debug, Clone, Copy)]
struct IntegerPredicate {
    two_k: u32,
    limit: u128,
}

impl IntegerPredicate {
    fn new(rho: f64, k: u32) -> Option<Self> {
        let two_k = 2 * k;
        if rho.powi(two_k as i32) >= 2f64.powi(125) {
            return None;
        }
        let limit = floor_pow(rho, two_k)?;
        if limit >= (1u128 << 126) {
            return None;
        }
        Some(Self { two_k, limit })
    }

    #[inline]
    fn contains(&self, point: &[i64]) -> bool {
        let mut acc: u128 = 0;
        for &v in point {
            let Some(p) = (v.unsigned_abs() as u128).checked_pow(self.two_k) else {
                return false;
            };
            acc = match acc.checked_add(p) {
                Some(a) => a,
                None => return false,
            };
            if acc > self.limit {
                return false;
            }
        }
        true
    }
}

/// `⌊x^e⌋` computed exactly from the binary expansion of `x ≥ 0`.
fn floor_pow(x: f64, e: u32) -> Option<u128> {
    if !(x >= 0.0) || !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(0);
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    // x = mantissa · 2^exp, so x^e = mantissa^e · 2^{e·exp}.
    let big = BigUint::from(mantissa).pow(e);
    let shift = exp * e as i64;
    let value = if shift >= 0 {
        big << (shift as u64)
    } else {
        big >> ((-shift) as u64)
    };
    u128::try_from(value).ok()
}

struct Plan<'a> {
    body: &'a StarBody,
    rotation: Option<&'a Rotation>,
    weight: Option<&'a HomogeneousExtension>,
    constant_weight: bool,
    n: usize,
    rho: f64,
    include_thr: f64,
    search_thr: f64,
    band_lo: f64,
    band_hi: f64,
    extent: i64,
    int_pred: Option<IntegerPredicate>,
    row_dir: [f64; 4],
}

impl<'a> Plan<'a> {
    fn new(req: &CountRequest<'a>) -> Result<Self> {
        let n = req.body.dim();
        if !(2..=4).contains(&n) {
            return Err(Error::invalid(format!("dimension {n} outside 2..=4")));
        }
        if !(req.rho >= 0.0) || !req.rho.is_finite() {
            return Err(Error::invalid(format!("rho = {} must be finite and ≥ 0", req.rho)));
        }
        if let Some(r) = req.rotation {
            if r.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.dim() });
            }
        }
        let rotation = req.rotation.filter(|r| !r.is_identity());
        let constant_weight = constant_weight(req).is_some();
        let extent = req.extent();
        let side = 2 * extent as u128 + 1;
        let rows = side.pow(n as u32 - 1);
        let work = if constant_weight { rows } else { rows * side };
        if work > req.budget as u128 || extent > (1i64 << 40) {
            return Err(Error::Budget {
                rho: req.rho,
                needed: work,
                budget: req.budget,
            });
        }
        let int_pred = match (req.body.family(), rotation) {
            (BodyFamily::Superellipsoid { k }, None) => IntegerPredicate::new(req.rho, *k),
            _ => None,
        };
        let mut row_dir = [0.0; 4];
        match rotation {
            Some(r) => row_dir[..n].copy_from_slice(&r.column(n - 1)),
            None => row_dir[n - 1] = 1.0,
        }
        Ok(Self {
            body: req.body,
            rotation,
            weight: req.weight,
            constant_weight,
            n,
            rho: req.rho,
            include_thr: req.rho * (1.0 + MEMBERSHIP_TOL),
            search_thr: req.rho * (1.0 + 4.0 * BOUNDARY_BAND),
            band_lo: req.rho * (1.0 - BOUNDARY_BAND),
            band_hi: req.rho * (1.0 + BOUNDARY_BAND),
            extent,
            int_pred,
            row_dir,
        })
    }

    #[inline]
    fn to_body(&self, point: &[i64], out: &mut [f64; 4]) {
        let mut x = [0.0f64; 4];
        for (d, s) in x.iter_mut().zip(point) {
            *d = *s as f64;
        }
        match self.rotation {
            Some(r) => r.apply(&x[..self.n], &mut out[..self.n]),
            None => out[..self.n].copy_from_slice(&x[..self.n]),
        }
    }

    #[inline]
    fn gauge_at(&self, point: &[i64]) -> f64 {
        let mut y = [0.0f64; 4];
        self.to_body(point, &mut y);
        self.body.gauge(&y[..self.n])
    }

    #[inline]
    fn included(&self, point: &[i64], gauge: f64) -> bool {
        match &self.int_pred {
            Some(p) => p.contains(point),
            None => gauge <= self.include_thr,
        }
    }

    /// All rows with first coordinate `i`.
    fn outer(&self, i: i64) -> OuterSum {
        let mut acc = OuterSum::default();
        let mut point = [0i64; 4];
        point[0] = i;
        let e = self.extent;
        match self.n {
            2 => self.row(&mut point, &mut acc),
            3 => {
                for j in -e..=e {
                    point[1] = j;
                    self.row(&mut point, &mut acc);
                }
            }
            _ => {
                for j in -e..=e {
                    point[1] = j;
                    for l in -e..=e {
                        point[2] = l;
                        self.row(&mut point, &mut acc);
                    }
                }
            }
        }
        acc
    }

    fn row(&self, point: &mut [i64; 4], acc: &mut OuterSum) {
        let n = self.n;
        let last = n - 1;
        let e = self.extent;
        let Some((c_lo, c_hi)) = self.candidates(point) else {
            return;
        };
        let origin_row = point[..last].iter().all(|v| *v == 0);

        if !self.body.is_convex() {
            for t in c_lo..=c_hi {
                point[last] = t;
                if origin_row && t == 0 {
                    continue;
                }
                let g = self.gauge_at(&point[..n]);
                if (g - self.rho).abs() <= BOUNDARY_BAND * self.rho {
                    acc.hits += 1;
                }
                if self.included(&point[..n], g) {
                    acc.count += 1;
                    self.add_weight(&point[..n], acc);
                }
            }
            return;
        }

        // Descend from the top candidate through the boundary band.
        let (mut jl, mut jh) = (None, None);
        let mut top_stop = None;
        let mut t = c_hi;
        while t >= c_lo {
            point[last] = t;
            let g = self.gauge_at(&point[..n]);
            if g < self.band_lo {
                jh.get_or_insert(t);
                top_stop = Some(t);
                break;
            }
            if g <= self.band_hi {
                acc.hits += 1;
            }
            if self.included(&point[..n], g) {
                jh.get_or_insert(t);
                jl = Some(t);
            }
            t -= 1;
        }
        if let Some(stop) = top_stop {
            jl = None;
            let mut t = c_lo;
            while t < stop {
                point[last] = t;
                let g = self.gauge_at(&point[..n]);
                if g < self.band_lo {
                    jl.get_or_insert(t);
                    break;
                }
                if g <= self.band_hi {
                    acc.hits += 1;
                }
                if self.included(&point[..n], g) {
                    jl.get_or_insert(t);
                }
                t += 1;
            }
            jl.get_or_insert(stop);
        }
        let (Some(jl), Some(jh)) = (jl, jh) else {
            return;
        };
        debug_assert!(jl >= -e && jh <= e);
        let has_origin = origin_row && jl <= 0 && 0 <= jh;
        acc.count += (jh - jl + 1) as u64 - has_origin as u64;
        if !self.constant_weight {
            for t in jl..=jh {
                if origin_row && t == 0 {
                    continue;
                }
                point[last] = t;
                self.add_weight(&point[..n], acc);
            }
        }
    }

    #[inline]
    fn add_weight(&self, point: &[i64], acc: &mut OuterSum) {
        if let Some(w) = self.weight {
            if !self.constant_weight {
                let mut y = [0.0f64; 4];
                self.to_body(point, &mut y);
                acc.weighted.add(w.eval_nonzero(&y[..self.n]));
            }
        }
    }

    /// Integer range along the row that may hold points with gauge up to the
    /// top of the boundary band.
    fn candidates(&self, point: &mut [i64; 4]) -> Option<(i64, i64)> {
        let n = self.n;
        let last = n - 1;
        let e = self.extent;
        point[last] = 0;
        let mut base = [0.0f64; 4];
        self.to_body(&point[..n], &mut base);
        let d = &self.row_dir[..n];

        let (lo, hi) = if self.body.is_convex() {
            self.body.line_interval(&base[..n], d, self.search_thr)?
        } else {
            let r = self.search_thr * self.body.circumradius();
            let pd: f64 = base[..n].iter().zip(d).map(|(a, b)| a * b).sum();
            let pp: f64 = base[..n].iter().map(|a| a * a).sum();
            let disc = pd * pd - (pp - r * r);
            if disc < 0.0 {
                return None;
            }
            (-pd - disc.sqrt(), -pd + disc.sqrt())
        };
        let mut c_lo = (lo.ceil().max(-e as f64)) as i64;
        let mut c_hi = (hi.floor().min(e as f64)) as i64;
        if self.body.is_convex() {
            while c_hi < e && {
                point[last] = c_hi + 1;
                self.gauge_at(&point[..n]) <= self.band_hi
            } {
                c_hi += 1;
            }
            while c_lo > -e && {
                point[last] = c_lo - 1;
                self.gauge_at(&point[..n]) <= self.band_hi
            } {
                c_lo -= 1;
            }
        }
        (c_lo <= c_hi).then_some((c_lo, c_hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{body_from_density, homogeneous_extension, SphereField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Naive scan of the full bounding box using the public membership test.
    fn brute(body: &StarBody, rho: f64, rot: &Rotation) -> u64 {
        let n = body.dim();
        let e = (rho * body.circumradius()).ceil() as i64 + 2;
        let mut count = 0;
        let mut y = vec![0.0; n];
        let mut visit = |pt: &[f64]| {
            if pt.iter().all(|v| *v == 0.0) {
                return;
            }
            rot.apply(pt, &mut y);
            if body.contains(&y, rho) {
                count += 1;
            }
        };
        for i in -e..=e {
            for j in -e..=e {
                if n == 2 {
                    visit(&[i as f64, j as f64]);
                } else {
                    for l in -e..=e {
                        visit(&[i as f64, j as f64, l as f64]);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn disk_counts_match_double_loop() {
        let disk = StarBody::unit_ball(2).unwrap();
        for (rho, expected) in [(5.0, 80u64), (10.0, 316)] {
            let mut oracle = 0;
            let r = rho as i64;
            for x in -r..=r {
                for y in -r..=r {
                    if (x, y) != (0, 0) && x * x + y * y <= r * r {
                        oracle += 1;
                    }
                }
            }
            assert_eq!(oracle, expected);
            let res = weighted_count(&CountRequest::new(&disk, rho)).unwrap();
            assert_eq!(res.point_count, expected);
            assert_eq!(res.weighted_count, expected as f64);
        }
    }

    #[test]
    fn superellipse_count_at_two() {
        let se = StarBody::superellipsoid(2, 2).unwrap();
        let res = weighted_count(&CountRequest::new(&se, 2.0)).unwrap();
        assert_eq!(res.point_count, 12);
    }

    #[test]
    fn boundary_hits_on_integer_circle() {
        let disk = StarBody::unit_ball(2).unwrap();
        // x² + y² = 25 has 12 integer solutions.
        let res = weighted_count(&CountRequest::new(&disk, 5.0)).unwrap();
        assert_eq!(res.boundary_hits, 12);
        let res = weighted_count(&CountRequest::new(&disk, 5.37)).unwrap();
        assert_eq!(res.boundary_hits, 0);
    }

    #[test]
    fn matches_brute_force_with_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let bodies = vec![
            StarBody::unit_ball(2).unwrap(),
            StarBody::ellipsoid(vec![1.7, 0.6]).unwrap(),
            StarBody::superellipsoid(2, 3).unwrap(),
            StarBody::square(),
            body_from_density(&SphereField::builtin("two-lobe").unwrap(), 2).unwrap(),
            StarBody::unit_ball(3).unwrap(),
            StarBody::superellipsoid(3, 2).unwrap(),
        ];
        for body in &bodies {
            let n = body.dim();
            let mut rots = vec![Rotation::identity(n)];
            for i in 0..2 {
                rots.push(Rotation::haar(n, &mut rng, format!("h{i}")).unwrap());
            }
            for rot in &rots {
                for rho in [1.5, 4.0, 7.25] {
                    let res = weighted_count(&CountRequest::new(body, rho).rotation(rot)).unwrap();
                    assert_eq!(res.point_count, brute(body, rho, rot), "{} {rho} {}", body.label(), rot.id());
                }
            }
        }
    }

    #[test]
    fn four_dimensional_ball() {
        // r4(k) summed for k ≤ 4: 8 + 24 + 32 + 24 = 88.
        let ball = StarBody::unit_ball(4).unwrap();
        let res = weighted_count(&CountRequest::new(&ball, 2.0)).unwrap();
        assert_eq!(res.point_count, 88);
    }

    #[test]
    fn weighted_sum_and_zero_weight() {
        let disk = StarBody::unit_ball(2).unwrap();
        let f = homogeneous_extension(&SphereField::builtin("cos2").unwrap());
        let g = homogeneous_extension(&SphereField::builtin("sin2").unwrap());
        let a = weighted_count(&CountRequest::new(&disk, 10.0).weight(&f)).unwrap();
        let b = weighted_count(&CountRequest::new(&disk, 10.0).weight(&g)).unwrap();
        // cos² + sin² = 1 and the disk is symmetric under swapping axes.
        assert!((a.weighted_count - b.weighted_count).abs() < 1e-9);
        assert!((a.weighted_count + b.weighted_count - 316.0).abs() < 1e-9);
        let zero = homogeneous_extension(&SphereField::constant(0.0));
        let z = weighted_count(&CountRequest::new(&disk, 10.0).weight(&zero)).unwrap();
        assert_eq!(z.weighted_count, 0.0);
        assert_eq!(discrete_measure_value(&z, 2).unwrap(), 0.0);
    }

    #[test]
    fn discrete_value_examples() {
        let disk = StarBody::unit_ball(2).unwrap();
        let r10 = weighted_count(&CountRequest::new(&disk, 10.0)).unwrap();
        assert!((discrete_measure_value(&r10, 2).unwrap() - 6.32).abs() < 1e-15);
        let r5 = weighted_count(&CountRequest::new(&disk, 5.0)).unwrap();
        assert!((discrete_measure_value(&r5, 2).unwrap() - 6.4).abs() < 1e-15);
        let mut zero = r5.clone();
        zero.rho = 0.0;
        assert!(discrete_measure_value(&zero, 2).is_err());
    }

    #[test]
    fn slabs_combine_bitwise() {
        let body = StarBody::ellipsoid(vec![1.3, 0.8]).unwrap();
        let f = homogeneous_extension(&SphereField::builtin("exp-cos").unwrap());
        let rot = Rotation::planar(0.4);
        let req = CountRequest::new(&body, 23.5).weight(&f).rotation(&rot);
        let total = weighted_count(&req).unwrap();
        let single = finish(&req, &enumerate_slab(&req, req.outer_range()).unwrap()).unwrap();
        assert_eq!(total.weighted_count.to_bits(), single.weighted_count.to_bits());
        let split = enumerate_slabs(&req, &[-100..3, 3..100]).unwrap();
        let two = finish(&req, &split).unwrap();
        assert_eq!(total.weighted_count.to_bits(), two.weighted_count.to_bits());
        assert_eq!(total.point_count, two.point_count);
        assert!(enumerate_slab(&req, 5..5).unwrap().is_empty());
        assert!(matches!(
            enumerate_slabs(&req, &[-10..2, 1..10]),
            Err(Error::OverlappingSlabs(_))
        ));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let body = StarBody::superellipsoid(2, 2).unwrap();
        let f = homogeneous_extension(&SphereField::builtin("u1u2").unwrap());
        let rot = Rotation::planar(1.1);
        let a = weighted_count(&CountRequest::new(&body, 60.3).weight(&f).rotation(&rot).exec(Exec::Sequential)).unwrap();
        let b = weighted_count(&CountRequest::new(&body, 60.3).weight(&f).rotation(&rot).exec(Exec::Parallel)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_is_explicit() {
        let disk = StarBody::unit_ball(2).unwrap();
        let f = homogeneous_extension(&SphereField::builtin("cos2").unwrap());
        let err = weighted_count(&CountRequest::new(&disk, 1e6).weight(&f)).unwrap_err();
        assert!(err.is_budget());
        assert!(weighted_count(&CountRequest::new(&disk, 100.0).budget(10)).unwrap_err().is_budget());
        assert!(weighted_count(&CountRequest::new(&disk, -1.0)).is_err());
    }

    #[test]
    fn floor_pow_is_exact() {
        assert_eq!(floor_pow(5.0, 4), Some(625));
        assert_eq!(floor_pow(2.5, 4), Some(39)); // 39.0625
        assert_eq!(floor_pow(65536.0, 4), Some(1u128 << 64));
        assert_eq!(floor_pow(1.5, 2), Some(2));
    }

    #[test]
    fn integer_fast_path_at_large_rho() {
        let se = StarBody::superellipsoid(2, 2).unwrap();
        let rho = 3000.0;
        let fast = weighted_count(&CountRequest::new(&se, rho)).unwrap();
        // Independent exact row count: for each x, the largest y with y⁴ ≤ ρ⁴ − x⁴.
        let limit: i128 = 3000i128.pow(4);
        let mut total: i128 = 0;
        for x in -3000i128..=3000 {
            let rest = limit - x.pow(4);
            let mut y = (rest as f64).powf(0.25) as i128;
            while (y + 1).pow(4) <= rest {
                y += 1;
            }
            while y.pow(4) > rest {
                y -= 1;
            }
            total += 2 * y + 1;
        }
        assert_eq!(fast.point_count as i128, total - 1);
    }
}
