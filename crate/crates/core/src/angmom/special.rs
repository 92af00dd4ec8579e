use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("numerator parameter a={0} must be a non-positive integer")]
    NotTerminating(i64),
    #[error("(c)_k vanishes at k={k} before the series terminates")]
    PoleInC { k: usize },
}

/// Jacobi polynomial `P_n^{(alpha, beta)}(x)` by the three-term recurrence.
pub fn jacobi_polynomial(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let ab = alpha + beta;
    let mut p_prev = 1.0;
    let mut p = (alpha + 1.0) + 0.5 * (ab + 2.0) * (x - 1.0);
    for k in 2..=n {
        let kf = k as f64;
        let two_k_ab = 2.0 * kf + ab;
        let a1 = 2.0 * kf * (kf + ab) * (two_k_ab - 2.0);
        let a2 = (two_k_ab - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (two_k_ab - 2.0) * (two_k_ab - 1.0) * two_k_ab;
        let a4 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * two_k_ab;
        let next = ((a2 + a3 * x) * p - a4 * p_prev) / a1;
        p_prev = p;
        p = next;
    }
    p
}

/// `2F1(a, b; c; z)` for a non-positive integer `a`, where the series is a
/// polynomial of degree `-a`.
pub fn hypergeom_2f1_terminating(a: i64, b: f64, c: f64, z: f64) -> Result<f64, SpecialError> {
    if a > 0 {
        return Err(SpecialError::NotTerminating(a));
    }
    let terms = (-a) as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..terms {
        let kf = k as f64;
        if c + kf == 0.0 {
            return Err(SpecialError::PoleInC { k });
        }
        term *= (a as f64 + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
    }
    Ok(sum)
}

/// Exact-rational counterpart of [`hypergeom_2f1_terminating`].
pub fn hypergeom_2f1_terminating_exact(
    a: i64,
    b: &BigRational,
    c: &BigRational,
    z: &BigRational,
) -> Result<BigRational, SpecialError> {
    if a > 0 {
        return Err(SpecialError::NotTerminating(a));
    }
    let terms = (-a) as usize;
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    for k in 0..terms {
        let kq = BigRational::from_integer(BigInt::from(k));
        let denom = c + &kq;
        if denom.is_zero() {
            return Err(SpecialError::PoleInC { k });
        }
        let aq = BigRational::from_integer(BigInt::from(a)) + &kq;
        term = term * aq * (b + &kq) * z / (denom * (kq + BigRational::one()));
        sum += &term;
    }
    Ok(sum)
}
