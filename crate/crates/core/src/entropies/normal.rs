//! Standard normal CDF and quantile.
//!
//! The CDF is evaluated through a rational-approximation `erfc` accurate to
//! roughly machine precision; the quantile is obtained by bisection on the
//! CDF, so the pair satisfies `|Φ(Φ⁻¹(p)) − p| ≤ 1e-10` across the open unit
//! interval.

use crate::error::{Error, Result};

const A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];
const SQRPI: f64 = 5.6418958354775628695e-1;

/// `erf(x)` for small arguments (|x| ≤ 0.46875).
fn erf_small(x: f64) -> f64 {
    let z = x * x;
    let mut num = A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + A[i]) * z;
        den = (den + B[i]) * z;
    }
    x * (num + A[3]) / (den + B[3])
}

/// `erfc(y)·exp(y²)` for 0.46875 < y ≤ 4.
fn erfcx_mid(y: f64) -> f64 {
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    (num + C[7]) / (den + D[7])
}

/// `erfc(y)·exp(y²)` for y > 4.
fn erfcx_tail(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    (SQRPI - r) / y
}

/// Splits `exp(−y²)` to keep precision for large arguments.
fn exp_neg_sq(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= 0.46875 {
        return 1.0 - erf_small(x);
    } else if y <= 4.0 {
        exp_neg_sq(y) * erfcx_mid(y)
    } else if y < 26.6 {
        exp_neg_sq(y) * erfcx_tail(y)
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.abs() <= 0.46875 {
        erf_small(x)
    } else {
        1.0 - erfc(x)
    }
}

/// Standard normal CDF `Φ`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile `Φ⁻¹`, by bisection on the CDF.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "quantile argument {p} outside [0, 1]"
        )));
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let mut lo = -40.0f64;
    let mut hi = 40.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_reference_values() {
        // Cross-checks against independently tabulated values.
        let cases = [
            (0.0, 0.0),
            (0.1, 0.1124629160182849),
            (0.5, 0.5204998778130465),
            (1.0, 0.8427007929497149),
            (2.0, 0.9953222650189527),
            (-1.0, -0.8427007929497149),
        ];
        for (x, want) in cases {
            assert!((erf(x) - want).abs() < 1e-12, "erf({x})");
        }
        assert!((erfc(3.0) - 2.209049699858544e-5).abs() < 1e-17);
        assert!((erfc(5.0) - 1.5374597944280349e-12).abs() < 1e-24);
    }

    #[test]
    fn cdf_reference_values() {
        let cases = [
            (0.0, 0.5),
            (1.0, 0.8413447460685429),
            (2.0, 0.9772498680518208),
            (3.0, 0.9986501019683699),
            (-1.0, 0.15865525393145707),
            (-2.0, 0.022750131948179212),
        ];
        for (x, want) in cases {
            assert!((normal_cdf(x) - want).abs() < 1e-12, "Phi({x})");
        }
    }

    #[test]
    fn cdf_symmetry_and_monotonicity() {
        for i in 0..100 {
            let x = -5.0 + 0.1 * i as f64;
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-13);
            assert!(normal_cdf(x + 0.1) > normal_cdf(x));
        }
    }

    #[test]
    fn quantile_reference_values() {
        let cases = [
            (0.5, 0.0),
            (0.975, 1.959963984540054),
            (0.1, -1.2815515655446004),
            (0.9, 1.2815515655446004),
            (0.25, -0.6744897501960817),
        ];
        for (p, want) in cases {
            assert!(
                (normal_quantile(p).unwrap() - want).abs() < 1e-9,
                "quantile({p})"
            );
        }
    }

    #[test]
    fn quantile_roundtrip_within_1e10() {
        let mut ps = vec![1e-6, 1e-4, 1e-2, 0.999999];
        for i in 1..100 {
            ps.push(i as f64 / 100.0);
        }
        for p in ps {
            let x = normal_quantile(p).unwrap();
            assert!(
                (normal_cdf(x) - p).abs() <= 1e-10,
                "roundtrip failed at p={p}"
            );
        }
    }

    #[test]
    fn quantile_edges() {
        assert_eq!(normal_quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(normal_quantile(1.0).unwrap(), f64::INFINITY);
        assert!(normal_quantile(-0.1).is_err());
        assert!(normal_quantile(1.1).is_err());
    }
}
