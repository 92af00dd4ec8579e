//! Infinitesimal projection operators.
//!
//! Both projectors are series in products of ladder operators, `(a+)^k a^k`
//! for the oscillator and `J_-^k J_+^k` for angular momentum. Each product is
//! diagonal in the basis it acts on, so a projector reduces to one scalar per
//! basis level and the series truncates structurally on a finite basis.
//!
//! The angular-momentum projector also has a representation as an integral
//! over the unit disk of `exp(-conj(z) J_-) exp(z J_+)` weighted by a Jacobi
//! polynomial; [`integral_projector_matrix`] evaluates it by quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::angmom::{
    gauss_legendre_on, jacobi_polynomial, ladder_apply, ln_factorial, AngMomLabel, Ladder,
};
use crate::config::{DISK_LEAK_TOL, INTEGRAL_PROJECTOR_TOL};
use crate::lalg::DenseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectorError {
    #[error("level {n} outside the stored range 0..={n_max}")]
    LevelOutOfRange { n: usize, n_max: usize },
    #[error("state carries 2m={state}, projector targets 2m={target}")]
    LabelMismatch { state: i32, target: i32 },
    #[error("invalid projector target 2j={two_j}, 2m={two_m}")]
    InvalidTarget { two_j: u32, two_m: i32 },
    #[error("truncation 2j_max={two_j_max} is below the target 2j={two_j}")]
    TruncationTooSmall { two_j: u32, two_j_max: u32 },
    #[error("the integral representation needs m >= 0, got 2m={0}")]
    NegativeProjection(i32),
    #[error("disk quadrature needs at least one radial and one angular node")]
    EmptyQuadrature,
    #[error("integral projector has vanishing weight on the target state")]
    NormalizationVanishes,
}

/// Oscillator state `sum_n C_n |n>` truncated at `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    coefficients: Vec<f64>,
}

impl FockVector {
    pub fn new(coefficients: Vec<f64>) -> Self {
        assert!(!coefficients.is_empty(), "FockVector needs at least |0>");
        assert!(coefficients.iter().all(|c| c.is_finite()), "non-finite coefficient");
        Self { coefficients }
    }

    pub fn n_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// State `sum_j C_j |j m>` at fixed `m`, truncated at `j_max`.
///
/// Slot `k` holds `2j = |2m| + 2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialStateVector {
    two_m: i32,
    coefficients: Vec<f64>,
}

impl AxialStateVector {
    pub fn new(two_m: i32, two_j_max: u32, coefficients: Vec<f64>) -> Result<Self, ProjectorError> {
        let lo = two_m.unsigned_abs();
        if two_j_max < lo || !(two_j_max - lo).is_multiple_of(2) {
            return Err(ProjectorError::TruncationTooSmall { two_j: lo, two_j_max });
        }
        let len = ((two_j_max - lo) / 2 + 1) as usize;
        if coefficients.len() != len || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(ProjectorError::InvalidTarget { two_j: two_j_max, two_m });
        }
        Ok(Self { two_m, coefficients })
    }

    pub fn zeros(two_m: i32, two_j_max: u32) -> Result<Self, ProjectorError> {
        let lo = two_m.unsigned_abs();
        let len = if two_j_max >= lo { ((two_j_max - lo) / 2 + 1) as usize } else { 0 };
        Self::new(two_m, two_j_max, vec![0.0; len])
    }

    /// Pure `|j m>`.
    pub fn basis_state(two_j: u32, two_m: i32, two_j_max: u32) -> Result<Self, ProjectorError> {
        let mut v = Self::zeros(two_m, two_j_max)?;
        let slot = v.slot(two_j).ok_or(ProjectorError::InvalidTarget { two_j, two_m })?;
        v.coefficients[slot] = 1.0;
        Ok(v)
    }

    pub fn two_m(&self) -> i32 {
        self.two_m
    }

    pub fn two_j_max(&self) -> u32 {
        self.two_m.unsigned_abs() + 2 * (self.coefficients.len() as u32 - 1)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn two_j_values(&self) -> impl Iterator<Item = u32> + '_ {
        let lo = self.two_m.unsigned_abs();
        (0..self.coefficients.len() as u32).map(move |k| lo + 2 * k)
    }

    pub fn slot(&self, two_j: u32) -> Option<usize> {
        let lo = self.two_m.unsigned_abs();
        if two_j < lo || !(two_j - lo).is_multiple_of(2) {
            return None;
        }
        let k = ((two_j - lo) / 2) as usize;
        (k < self.coefficients.len()).then_some(k)
    }

    pub fn coefficient(&self, two_j: u32) -> f64 {
        self.slot(two_j).map_or(0.0, |k| self.coefficients[k])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.coefficients.len(), other.coefficients.len());
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaBase {
    Oscillator { n: usize },
    AngularMomentum { two_j: u32, two_m: i32 },
}

/// Series coefficients `gamma_0 = 1, gamma_1, ..` of a ladder-operator projector.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSeries {
    base: GammaBase,
    coefficients: Vec<f64>,
}

impl GammaSeries {
    pub fn base(&self) -> GammaBase {
        self.base
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn get(&self, r: usize) -> f64 {
        self.coefficients[r]
    }
}

/// `1/k!` by iterated division.
fn inv_factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc / i as f64)
}

/// `C(n, k)` by multiplicative recurrence; exact in f64 for moderate `n`.
fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Scaled coefficients `g_i = gamma_i * i!` of the oscillator system.
///
/// Dividing `p_j(gamma) = sum_i gamma_i (n+j)!/(j-i)!` by `(n+j)!/j!` turns
/// it into `sum_i g_i C(j, i) = 0`, an integer recurrence.
fn ho_scaled_gammas(r_max: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(r_max + 1);
    g.push(1.0);
    for j in 1..=r_max {
        let acc: f64 = (0..j).map(|i| g[i] * binomial(j, i)).sum();
        g.push(-acc);
    }
    g
}

/// Forward substitution of the triangular oscillator system with `gamma_0 = 1`.
pub fn ho_gamma_triangular_solve(n: usize, r_max: usize) -> GammaSeries {
    let coefficients = ho_scaled_gammas(r_max)
        .into_iter()
        .enumerate()
        .map(|(i, g)| g * inv_factorial(i))
        .collect();
    GammaSeries { base: GammaBase::Oscillator { n }, coefficients }
}

/// Eigenvalue of `p_n = (1/n!) sum_i gamma_i (a+)^{n+i} a^{n+i}` on `|level>`.
///
/// `(a+)^k a^k |N> = N!/(N-k)! |N>`; grouped with `1/n!` and `gamma_i` the
/// term is `g_i C(N, n) C(N-n, i)`, a product of integers.
fn ho_projector_diagonal(n: usize, level: usize, scaled: &[f64]) -> f64 {
    if level < n {
        return 0.0;
    }
    let outer = binomial(level, n);
    let span = level - n;
    (0..=span).map(|i| scaled[i] * binomial(span, i)).sum::<f64>() * outer
}

/// `p_n |phi>` using the operator series.
pub fn ho_projector_apply(n: usize, phi: &FockVector) -> Result<FockVector, ProjectorError> {
    let n_max = phi.n_max();
    if n > n_max {
        return Err(ProjectorError::LevelOutOfRange { n, n_max });
    }
    // a^{n+i} annihilates everything once n + i > n_max
    let scaled = ho_scaled_gammas(n_max - n);
    let coefficients = phi
        .coefficients
        .iter()
        .enumerate()
        .map(|(level, c)| c * ho_projector_diagonal(n, level, &scaled))
        .collect();
    Ok(FockVector { coefficients })
}

/// `sum_i gamma_i z^i (a+)^{n+i} a^{n+i}` on `|n + j>`, as a scalar.
pub fn ho_series_z_weighted(n: usize, j: usize, z: f64) -> f64 {
    let gammas = ho_gamma_triangular_solve(n, j);
    let mut falling = 1.0;
    // (n+j)!/(j-i)! built up from i = j downwards
    let mut terms = vec![0.0; j + 1];
    for i in (0..=j).rev() {
        if i == j {
            falling = (j + 1..=n + j).fold(1.0, |acc, v| acc * v as f64)
                * (1..=j).fold(1.0, |acc, v| acc * v as f64);
        } else {
            falling /= (j - i) as f64;
        }
        terms[i] = gammas.get(i) * z.powi(i as i32) * falling;
    }
    terms.iter().sum()
}

/// `gamma_r = (-1)^r (2j+1)! / (r! (2j+r+1)!)` by the term-ratio recurrence.
pub fn lowdin_gamma(two_j: u32, r: usize) -> f64 {
    let mut gamma = 1.0;
    for s in 0..r {
        gamma *= -1.0 / ((s as f64 + 1.0) * (two_j as f64 + s as f64 + 2.0));
    }
    gamma
}

pub fn lowdin_gamma_series(two_j: u32, two_m: i32, r_max: usize) -> GammaSeries {
    let mut coefficients = Vec::with_capacity(r_max + 1);
    let mut gamma = 1.0;
    coefficients.push(gamma);
    for s in 0..r_max {
        gamma *= -1.0 / ((s as f64 + 1.0) * (two_j as f64 + s as f64 + 2.0));
        coefficients.push(gamma);
    }
    GammaSeries { base: GammaBase::AngularMomentum { two_j, two_m }, coefficients }
}

fn validate_target(two_j: u32, two_m: i32) -> Result<AngMomLabel, ProjectorError> {
    AngMomLabel::new(two_j, two_m).map_err(|_| ProjectorError::InvalidTarget { two_j, two_m })
}

/// Eigenvalue of `J_-^k J_+^k` on `|l m>`: `(l-m)!(l+m+k)! / ((l-m-k)!(l+m)!)`.
fn ladder_pair_diagonal(state: AngMomLabel, k: u32) -> f64 {
    let lmm = state.j_minus_m();
    if k > lmm {
        return 0.0;
    }
    let lpm = state.j_plus_m();
    (0..k).fold(1.0, |acc, s| acc * (lmm - s) as f64 * (lpm + s + 1) as f64)
}

/// Scalar by which the z-weighted projector series acts on `|l m>`:
/// `N sum_r gamma_r z^r <J_-^{j-m+r} J_+^{j-m+r}>`, with
/// `N = (2j+1)(j+m)!/((j-m)!(2j+1)!)`. At `z = 1` this is the projector.
pub fn lowdin_series_diagonal_z(
    two_j: u32,
    two_m: i32,
    two_l: u32,
    z: f64,
) -> Result<f64, ProjectorError> {
    // the m < 0 projector is the rotated image of the m > 0 one
    let two_m = two_m.abs();
    let target = validate_target(two_j, two_m)?;
    let state = AngMomLabel::new(two_l, two_m)
        .map_err(|_| ProjectorError::InvalidTarget { two_j: two_l, two_m })?;
    if two_l < two_j {
        return Ok(0.0);
    }
    let p = target.j_minus_m();
    let norm = (ln_factorial(target.j_plus_m()) - ln_factorial(p) - ln_factorial(two_j)).exp();
    // J_+^k kills |l m> once k > l - m
    let r_max = (state.j_minus_m() - p) as usize;
    let gammas = lowdin_gamma_series(two_j, two_m, r_max);
    let sum: f64 = (0..=r_max)
        .map(|r| gammas.get(r) * z.powi(r as i32) * ladder_pair_diagonal(state, p + r as u32))
        .sum();
    Ok(norm * sum)
}

/// Scalar action of the series projector `P_{jm}` on `|l m>`: 1 for `l = j`, 0 otherwise.
pub fn lowdin_series_diagonal(two_j_target: u32, two_m: i32, two_l: u32) -> Result<f64, ProjectorError> {
    lowdin_series_diagonal_z(two_j_target, two_m, two_l, 1.0)
}

/// `P_{jm} |phi>` on the truncated axial space of `phi`.
pub fn lowdin_apply(
    two_j: u32,
    two_m: i32,
    phi: &AxialStateVector,
) -> Result<AxialStateVector, ProjectorError> {
    if phi.two_m != two_m {
        return Err(ProjectorError::LabelMismatch { state: phi.two_m, target: two_m });
    }
    validate_target(two_j, two_m)?;
    if two_j > phi.two_j_max() {
        return Err(ProjectorError::TruncationTooSmall { two_j, two_j_max: phi.two_j_max() });
    }
    let coefficients = phi
        .two_j_values()
        .zip(&phi.coefficients)
        .map(|(two_l, c)| Ok(c * lowdin_series_diagonal(two_j, two_m, two_l)?))
        .collect::<Result<_, ProjectorError>>()?;
    Ok(AxialStateVector { two_m, coefficients })
}

/// Series projector as a matrix on `{|l m> : |m| <= l <= l_max}`.
pub fn lowdin_projector_matrix(two_j: u32, two_m: i32, two_j_max: u32) -> Result<DenseMatrix, ProjectorError> {
    let space = AxialStateVector::zeros(two_m, two_j_max)?;
    let values: Vec<u32> = space.two_j_values().collect();
    let diag = values
        .iter()
        .map(|&two_l| lowdin_series_diagonal(two_j, two_m, two_l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DenseMatrix::diagonal(&diag))
}

/// `int_0^1 t^i/(i!)^2 (1-t)^{2m} P^{(0,2m)}_{j-m}(1-2t) dt` with `i = j - m + r`.
pub fn radial_moment(two_j: u32, two_m: i32, r: usize, points: usize) -> Result<f64, ProjectorError> {
    if two_m < 0 {
        return Err(ProjectorError::NegativeProjection(two_m));
    }
    let target = validate_target(two_j, two_m)?;
    let p = target.j_minus_m() as usize;
    let i = p + r;
    let rule = gauss_legendre_on(points, 0.0, 1.0);
    let inv_sq = inv_factorial(i) * inv_factorial(i);
    Ok(rule.integrate(|t| {
        t.powi(i as i32)
            * inv_sq
            * (1.0 - t).powi(two_m)
            * jacobi_polynomial(p, 0.0, two_m as f64, 1.0 - 2.0 * t)
    }))
}

/// `1 / (r! (2j+r+1)!)`.
pub fn radial_moment_target(two_j: u32, r: usize) -> f64 {
    (-(ln_factorial(r as u32) + ln_factorial(two_j + r as u32 + 1))).exp()
}

/// Factor that turns [`radial_moment`] into [`radial_moment_target`]:
/// `(-1)^{j-m} (j-m)! / (j+m)!`.
pub fn radial_moment_normalization(two_j: u32, two_m: i32) -> Result<f64, ProjectorError> {
    let target = validate_target(two_j, two_m)?;
    let sign = if target.j_minus_m() % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * (ln_factorial(target.j_minus_m()) - ln_factorial(target.j_plus_m())).exp())
}

/// Result of the disk-integral representation on the axial space `{|l m>}`.
#[derive(Debug, Clone)]
pub struct DiskProjector {
    pub two_j: u32,
    pub two_m: i32,
    pub two_j_max: u32,
    /// Diagonal of the integrated operator on `|l m>`, before normalization.
    pub raw: DenseMatrix,
    /// `raw[j, j]`, the constant relating the integral to the series projector.
    pub normalization: f64,
    pub normalized: DenseMatrix,
    /// Largest imaginary or off-`m` component that should have integrated to zero.
    pub leakage: f64,
    /// `max |normalized - series|`.
    pub series_deviation: f64,
}

impl DiskProjector {
    pub fn passes(&self) -> bool {
        self.leakage < DISK_LEAK_TOL && self.series_deviation <= INTEGRAL_PROJECTOR_TOL
    }
}

/// Sign in front of `conj(z) J_-` in the disk integrand.
///
/// The alternating choice reproduces the `(-1)^r` of the series; the other
/// sign is kept for comparison in tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoweringSign {
    Alternating,
    Positive,
}

/// `<l, m_a| J_lower^{a-c}|l, m_c> / (a-c)!` style ladder powers, rows and
/// columns indexed by `m = l, l-1, .., -l`.
fn scaled_ladder_power(state: AngMomLabel, k: usize, dir: Ladder) -> f64 {
    let mut coeff = 1.0;
    let mut current = state;
    for s in 0..k {
        let res = ladder_apply(dir, current);
        match res.label {
            Some(next) => {
                coeff *= res.coefficient / (s as f64 + 1.0);
                current = next;
            }
            None => return 0.0,
        }
    }
    coeff
}

/// Integrates `P^{(0,2m)}_{j-m}(1-2t) (1-t)^{2m} exp(-conj(z) J_-) exp(z J_+)`
/// over the unit disk, `z = rho e^{-i phi}`, `t = rho^2`, on the truncated
/// space `|m| <= l <= l_max`.
pub fn integral_projector_matrix(
    two_j: u32,
    two_m: i32,
    two_j_max: u32,
    radial_points: usize,
    angular_points: usize,
) -> Result<DiskProjector, ProjectorError> {
    disk_integral(two_j, two_m, two_j_max, radial_points, angular_points, LoweringSign::Alternating)
}

pub fn disk_integral(
    two_j: u32,
    two_m: i32,
    two_j_max: u32,
    radial_points: usize,
    angular_points: usize,
    sign: LoweringSign,
) -> Result<DiskProjector, ProjectorError> {
    if two_m < 0 {
        return Err(ProjectorError::NegativeProjection(two_m));
    }
    let target = validate_target(two_j, two_m)?;
    if two_j_max < two_j {
        return Err(ProjectorError::TruncationTooSmall { two_j, two_j_max });
    }
    if radial_points == 0 || angular_points == 0 {
        return Err(ProjectorError::EmptyQuadrature);
    }
    let space = AxialStateVector::zeros(two_m, two_j_max)?;
    let levels: Vec<u32> = space.two_j_values().collect();
    let p = target.j_minus_m() as usize;
    let lower_sign = match sign {
        LoweringSign::Alternating => -1.0,
        LoweringSign::Positive => 1.0,
    };

    let radial = gauss_legendre_on(radial_points, 0.0, 1.0);
    let dphi = 2.0 * PI / angular_points as f64;
    let phases: Vec<f64> = (0..angular_points).map(|q| q as f64 * dphi).collect();

    let mut raw_diag = Vec::with_capacity(levels.len());
    let mut leakage: f64 = 0.0;

    for &two_l in &levels {
        let dim = two_l as usize + 1;
        let labels: Vec<AngMomLabel> = (0..dim)
            .map(|a| AngMomLabel::new(two_l, two_l as i32 - 2 * a as i32).expect("valid label"))
            .collect();
        // column of the projected state |l m>
        let col = ((two_l as i32 - two_m) / 2) as usize;
        // exp(z J_+)|l m>: component on row c <= col is z^{col-c} up[c]
        let up: Vec<f64> = (0..=col).map(|c| scaled_ladder_power(labels[col], col - c, Ladder::Raise)).collect();
        // exp(s conj(z) J_-) row a from column c >= .. : (s conj z)^{a-c} down[a][c]
        let down: Vec<Vec<f64>> = (0..dim)
            .map(|a| (0..=a.min(col)).map(|c| scaled_ladder_power(labels[c], a - c, Ladder::Lower)).collect())
            .collect();

        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        for (t, wt) in radial.iter() {
            let rho = t.sqrt();
            // dx dy = rho d(rho) d(phi) = dt d(phi) / 2
            let weight = 0.5 * wt * jacobi_polynomial(p, 0.0, two_m as f64, 1.0 - 2.0 * t) * (1.0 - t).powi(two_m);
            for &phi in &phases {
                let z = Complex64::from_polar(rho, -phi);
                let zbar = z.conj() * lower_sign;
                for (a, slot) in acc.iter_mut().enumerate() {
                    let mut entry = Complex64::new(0.0, 0.0);
                    for c in 0..=a.min(col) {
                        entry += zbar.powu((a - c) as u32) * down[a][c] * z.powu((col - c) as u32) * up[c];
                    }
                    *slot += entry * weight * dphi;
                }
            }
        }
        for (a, v) in acc.iter().enumerate() {
            if a == col {
                leakage = leakage.max(v.im.abs());
            } else {
                leakage = leakage.max(v.norm());
            }
        }
        raw_diag.push(acc[col].re);
    }

    let raw = DenseMatrix::diagonal(&raw_diag);
    let target_slot = space.slot(two_j).expect("target inside truncation");
    let normalization = raw_diag[target_slot];
    if normalization.abs() < f64::MIN_POSITIVE.sqrt() {
        return Err(ProjectorError::NormalizationVanishes);
    }
    let normalized = DenseMatrix::diagonal(&raw_diag.iter().map(|v| v / normalization).collect::<Vec<_>>());
    let series = lowdin_projector_matrix(two_j, two_m, two_j_max)?;
    let series_deviation = normalized.max_abs_diff(&series);
    Ok(DiskProjector { two_j, two_m, two_j_max, raw, normalization, normalized, leakage, series_deviation })
}
