//! Angular-momentum special functions.
//!
//! All half-integer quantities are carried as doubled integers (`two_j`,
//! `two_m`). Rotations follow `R(beta) = exp(-i beta J_y)` with Condon-Shortley
//! phases, which makes every Wigner small-d element real.

mod quadrature;
mod special;

use std::sync::OnceLock;

use thiserror::Error;

use crate::config::MAX_TWO_J;
use crate::lalg::DenseMatrix;

pub use quadrature::{gauss_legendre, gauss_legendre_on, legendre_with_derivative, QuadratureRule};
pub use special::{
    hypergeom_2f1_terminating, hypergeom_2f1_terminating_exact, jacobi_polynomial, SpecialError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngMomError {
    #[error("invalid angular-momentum label 2j={two_j}, 2m={two_m}")]
    InvalidLabel { two_j: i64, two_m: i64 },
    #[error("2j={0} exceeds the supported maximum")]
    TooLarge(u32),
}

/// A state label `|j m>` stored as `(2j, 2m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngMomLabel {
    two_j: u32,
    two_m: i32,
}

impl AngMomLabel {
    pub fn new(two_j: u32, two_m: i32) -> Result<Self, AngMomError> {
        let invalid = AngMomError::InvalidLabel { two_j: two_j as i64, two_m: two_m as i64 };
        if two_m.unsigned_abs() > two_j || (two_j as i64 - two_m as i64).rem_euclid(2) != 0 {
            return Err(invalid);
        }
        if two_j > MAX_TWO_J {
            return Err(AngMomError::TooLarge(two_j));
        }
        Ok(Self { two_j, two_m })
    }

    pub fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn two_m(self) -> i32 {
        self.two_m
    }

    pub fn j(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn m(self) -> f64 {
        self.two_m as f64 / 2.0
    }

    /// `j + m`, always a non-negative integer.
    pub fn j_plus_m(self) -> u32 {
        ((self.two_j as i32 + self.two_m) / 2) as u32
    }

    /// `j - m`, always a non-negative integer.
    pub fn j_minus_m(self) -> u32 {
        ((self.two_j as i32 - self.two_m) / 2) as u32
    }
}

impl std::fmt::Display for AngMomLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn half(v: i64) -> String {
            if v % 2 == 0 {
                format!("{}", v / 2)
            } else {
                format!("{v}/2")
            }
        }
        write!(f, "|{}, {}>", half(self.two_j as i64), half(self.two_m as i64))
    }
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let len = 2 * MAX_TWO_J as usize + 4;
        let mut table = Vec::with_capacity(len);
        let mut prod = 1.0_f64;
        let mut acc = 0.0_f64;
        table.push(0.0);
        for k in 1..len {
            // exact products while they stay finite, log sums beyond
            if k <= 170 {
                prod *= k as f64;
                table.push(prod.ln());
            } else {
                if k == 171 {
                    acc = table[170];
                }
                acc += (k as f64).ln();
                table.push(acc);
            }
        }
        table
    })
}

/// `ln(n!)` from the shared table.
pub fn ln_factorial(n: u32) -> f64 {
    let table = ln_factorial_table();
    assert!((n as usize) < table.len(), "ln_factorial({n}) beyond table");
    table[n as usize]
}

fn sign_of(exponent: i64) -> f64 {
    if exponent.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `d^j_{m'm}(beta) = <j m'| exp(-i beta J_y) |j m>`.
pub fn wigner_small_d(two_j: u32, two_mp: i32, two_m: i32, beta: f64) -> Result<f64, AngMomError> {
    let bra = AngMomLabel::new(two_j, two_mp)?;
    let ket = AngMomLabel::new(two_j, two_m)?;
    Ok(wigner_small_d_unchecked(bra, ket, beta))
}

pub(crate) fn wigner_small_d_unchecked(bra: AngMomLabel, ket: AngMomLabel, beta: f64) -> f64 {
    debug_assert_eq!(bra.two_j, ket.two_j);
    let (jpmp, jmmp) = (bra.j_plus_m() as i64, bra.j_minus_m() as i64);
    let (jpm, jmm) = (ket.j_plus_m() as i64, ket.j_minus_m() as i64);
    let two_j = bra.two_j as i64;
    // m - m' as an integer
    let dm = (ket.two_m as i64 - bra.two_m as i64) / 2;
    let half = 0.5 * beta;
    let (c, s) = (half.cos(), half.sin());
    let prefactor = 0.5
        * (ln_factorial(jpmp as u32)
            + ln_factorial(jmmp as u32)
            + ln_factorial(jpm as u32)
            + ln_factorial(jmm as u32));

    let k_lo = 0.max(dm);
    let k_hi = jpm.min(jmmp);
    let mut sum = 0.0;
    for k in k_lo..=k_hi {
        let denom = ln_factorial((jpm - k) as u32)
            + ln_factorial(k as u32)
            + ln_factorial((jmmp - k) as u32)
            + ln_factorial((k - dm) as u32);
        let cos_pow = (two_j + dm - 2 * k) as i32;
        let sin_pow = (2 * k - dm) as i32;
        sum += sign_of(k - dm) * (prefactor - denom).exp() * c.powi(cos_pow) * s.powi(sin_pow);
    }
    sum
}

/// Full `(2j+1) x (2j+1)` small-d matrix, rows/columns ordered by `m = j, j-1, .., -j`.
pub fn wigner_small_d_matrix(two_j: u32, beta: f64) -> Result<DenseMatrix, AngMomError> {
    let labels: Vec<AngMomLabel> = (0..=two_j)
        .map(|k| AngMomLabel::new(two_j, two_j as i32 - 2 * k as i32))
        .collect::<Result<_, _>>()?;
    let n = labels.len();
    Ok(DenseMatrix::from_fn(n, n, |a, b| wigner_small_d_unchecked(labels[a], labels[b], beta)))
}

/// Matrix of `exp(-i beta J_y)` between single-particle states; states in
/// different shells (or with different `j`) do not mix.
pub fn rotation_matrix<S: PartialEq>(orbitals: &[(S, AngMomLabel)], beta: f64) -> DenseMatrix {
    let n = orbitals.len();
    DenseMatrix::from_fn(n, n, |a, b| {
        let (sa, la) = &orbitals[a];
        let (sb, lb) = &orbitals[b];
        if sa == sb && la.two_j == lb.two_j {
            wigner_small_d_unchecked(*la, *lb, beta)
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

/// `J_+-|j m> = sqrt((j -+ m)(j +- m + 1)) |j m+-1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderResult {
    pub coefficient: f64,
    /// `None` when the state is annihilated.
    pub label: Option<AngMomLabel>,
}

impl LadderResult {
    pub fn annihilated(&self) -> bool {
        self.label.is_none()
    }
}

pub fn ladder_apply(direction: Ladder, state: AngMomLabel) -> LadderResult {
    let (two_j, two_m) = (state.two_j as i64, state.two_m as i64);
    let (factor, new_m) = match direction {
        Ladder::Raise => ((two_j - two_m) * (two_j + two_m + 2), two_m + 2),
        Ladder::Lower => ((two_j + two_m) * (two_j - two_m + 2), two_m - 2),
    };
    if factor == 0 {
        return LadderResult { coefficient: 0.0, label: None };
    }
    LadderResult {
        coefficient: (factor as f64 / 4.0).sqrt(),
        label: Some(AngMomLabel { two_j: state.two_j, two_m: new_m as i32 }),
    }
}

/// Dense `J_+` on the `2j+1` states of one multiplet, ordered by `m = j, .., -j`.
pub fn raising_matrix(two_j: u32) -> DenseMatrix {
    let dim = two_j as usize + 1;
    let mut m = DenseMatrix::zeros(dim, dim);
    for col in 1..dim {
        let two_m = two_j as i32 - 2 * col as i32;
        let res = ladder_apply(Ladder::Raise, AngMomLabel { two_j, two_m });
        m[(col - 1, col)] = res.coefficient;
    }
    m
}

/// `<j1 m1 j2 m2 | J M>` by the Racah sum.
pub fn clebsch_gordan(
    two_j1: u32,
    two_m1: i32,
    two_j2: u32,
    two_m2: i32,
    two_j: u32,
    two_m: i32,
) -> Result<f64, AngMomError> {
    let l1 = AngMomLabel::new(two_j1, two_m1)?;
    let l2 = AngMomLabel::new(two_j2, two_m2)?;
    let lj = AngMomLabel::new(two_j, two_m)?;
    if two_m1 + two_m2 != two_m {
        return Ok(0.0);
    }
    let (a, b, c) = (two_j1 as i64, two_j2 as i64, two_j as i64);
    if c < (a - b).abs() || c > a + b || (a + b + c) % 2 != 0 {
        return Ok(0.0);
    }
    // integer combinations of j1, j2, J
    let j1j2_j = (a + b - c) / 2;
    let j1_j2j = (a - b + c) / 2;
    let jj2_j1 = (-a + b + c) / 2;
    let sum_all = (a + b + c) / 2;

    let ln_pre = 0.5
        * ((c as f64 + 1.0).ln() + ln_factorial(j1_j2j as u32) + ln_factorial(jj2_j1 as u32)
            + ln_factorial(j1j2_j as u32)
            - ln_factorial(sum_all as u32 + 1)
            + ln_factorial(lj.j_plus_m())
            + ln_factorial(lj.j_minus_m())
            + ln_factorial(l1.j_minus_m())
            + ln_factorial(l1.j_plus_m())
            + ln_factorial(l2.j_minus_m())
            + ln_factorial(l2.j_plus_m()));

    let j1mm1 = l1.j_minus_m() as i64;
    let j2pm2 = l2.j_plus_m() as i64;
    // J - j2 + m1 and J - j1 - m2
    let t4 = (c - b + two_m1 as i64) / 2;
    let t5 = (c - a - two_m2 as i64) / 2;
    let k_lo = 0.max(-t4).max(-t5);
    let k_hi = j1j2_j.min(j1mm1).min(j2pm2);
    let mut sum = 0.0;
    for k in k_lo..=k_hi {
        let ln_den = ln_factorial(k as u32)
            + ln_factorial((j1j2_j - k) as u32)
            + ln_factorial((j1mm1 - k) as u32)
            + ln_factorial((j2pm2 - k) as u32)
            + ln_factorial((t4 + k) as u32)
            + ln_factorial((t5 + k) as u32);
        sum += sign_of(k) * (ln_pre - ln_den).exp();
    }
    Ok(sum)
}
