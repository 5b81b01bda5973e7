use crate::{Error, Result};

/// Boundary class used to pick the predicted residual exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PositiveCurvature,
    Superellipsoid,
    /// Polygon with a rational facet normal.
    PolygonRational,
    /// Polygon whose normal slopes are algebraic of degree ≥ 2.
    PolygonAlgebraic,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive-curvature" => Ok(Family::PositiveCurvature),
            "superellipsoid" => Ok(Family::Superellipsoid),
            "polygon-rational" => Ok(Family::PolygonRational),
            "polygon-algebraic" => Ok(Family::PolygonAlgebraic),
            other => Err(Error::invalid(format!("unknown family '{other}'"))),
        }
    }
}

/// Predicted exponents `e` in `R = O(ρ^e)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TheoryExponents {
    pub n: usize,
    pub family: Family,
    pub k: Option<u32>,
    /// `(2k−1)(n−1)/(2k)`.
    pub a: Option<f64>,
    /// `n(n−1)/(n+1)`.
    pub b: f64,
    /// `−2n/(n+1)`.
    pub positive_curvature_exp: f64,
    /// `A − n`.
    pub superellipsoid_exp: Option<f64>,
    /// `max(A, B) − n`, the classical rate without the `A > B` proviso.
    pub classical_exp: Option<f64>,
    /// `α_j = j/(2k) + (n−j−1)/2` for `j = 0..n−1`.
    pub alpha: Vec<f64>,
    /// `(k−1)/(2k−1)`.
    pub beta: Option<f64>,
    /// `A > B`, where the superellipsoid rate is sharp.
    pub best_possible: Option<bool>,
    /// The exponent the family's theorem predicts.
    pub predicted: f64,
}

pub fn theory_exponents(n: usize, family: Family, k: Option<u32>) -> Result<TheoryExponents> {
    if n < 2 {
        return Err(Error::invalid(format!("dimension {n} < 2")));
    }
    let nf = n as f64;
    let b = nf * (nf - 1.0) / (nf + 1.0);
    let positive_curvature_exp = -2.0 * nf / (nf + 1.0);
    let mut out = TheoryExponents {
        n,
        family,
        k: None,
        a: None,
        b,
        positive_curvature_exp,
        superellipsoid_exp: None,
        classical_exp: None,
        alpha: Vec::new(),
        beta: None,
        best_possible: None,
        predicted: positive_curvature_exp,
    };
    match family {
        Family::PositiveCurvature => {}
        Family::Superellipsoid => {
            let k = k.ok_or_else(|| Error::invalid("superellipsoid exponents need k"))?;
            if k == 0 {
                return Err(Error::invalid("k must be ≥ 1"));
            }
            let kf = k as f64;
            let a = (2.0 * kf - 1.0) * (nf - 1.0) / (2.0 * kf);
            // A > B  ⇔  (2k−1)(n+1) > 2kn, decided in integers.
            let best = (2 * k as u64 - 1) * (n as u64 + 1) > 2 * k as u64 * n as u64;
            out.k = Some(k);
            out.a = Some(a);
            out.superellipsoid_exp = Some(a - nf);
            out.classical_exp = Some(a.max(b) - nf);
            out.alpha = (0..n).map(|j| j as f64 / (2.0 * kf) + (nf - j as f64 - 1.0) / 2.0).collect();
            out.beta = Some((kf - 1.0) / (2.0 * kf - 1.0));
            out.best_possible = Some(best);
            out.predicted = a - nf;
        }
        Family::PolygonRational => out.predicted = (nf - 1.0) - nf,
        Family::PolygonAlgebraic => out.predicted = -nf,
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_curvature_rates() {
        let t2 = theory_exponents(2, Family::PositiveCurvature, None).unwrap();
        assert!((t2.predicted + 4.0 / 3.0).abs() < 1e-15);
        let t3 = theory_exponents(3, Family::PositiveCurvature, None).unwrap();
        assert!((t3.predicted + 1.5).abs() < 1e-15);
    }

    #[test]
    fn superellipse_k2() {
        let t = theory_exponents(2, Family::Superellipsoid, Some(2)).unwrap();
        assert_eq!(t.a, Some(0.75));
        assert!((t.b - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.superellipsoid_exp, Some(-1.25));
        assert_eq!(t.best_possible, Some(true));
        assert_eq!(t.alpha, vec![0.5, 0.25]);
        assert!((t.beta.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn best_possible_flag_matches_formulas() {
        for k in 1..=8u32 {
            for n in 2..=4usize {
                let t = theory_exponents(n, Family::Superellipsoid, Some(k)).unwrap();
                let (kf, nf) = (k as f64, n as f64);
                let a = (2.0 * kf - 1.0) * (nf - 1.0) / (2.0 * kf);
                let b = nf * (nf - 1.0) / (nf + 1.0);
                // Cross-multiplied comparison of the two rationals.
                let lhs = (2 * k as i64 - 1) * (n as i64 - 1) * (n as i64 + 1);
                let rhs = 2 * k as i64 * n as i64 * (n as i64 - 1);
                assert_eq!(t.best_possible, Some(lhs > rhs), "k={k} n={n}");
                assert_eq!(lhs > rhs, a > b + 1e-12 || (a > b && (a - b).abs() > 1e-15));
            }
        }
    }

    #[test]
    fn polygon_rates_and_missing_k() {
        assert_eq!(theory_exponents(2, Family::PolygonRational, None).unwrap().predicted, -1.0);
        assert_eq!(theory_exponents(2, Family::PolygonAlgebraic, None).unwrap().predicted, -2.0);
        assert!(theory_exponents(2, Family::Superellipsoid, None).is_err());
    }
}
