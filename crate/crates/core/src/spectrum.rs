//! Projected energies `E_J` of a Slater determinant.
//!
//! Both the norm kernel and the energy kernels are integrals over the polar
//! angle of `d^J_{MM}(beta) sin(beta)` times a rotated matrix element. One
//! kernel sample is built per quadrature node and shared by every `J`.
//!
//! Two energy routes are available:
//!
//! - `Lowdin`: `<Phi|H R|Phi>` from the one- and two-body kernels.
//! - `Brillouin`: `E_HF <Phi|R|Phi>` plus the 2p-2h kernels only. This is exact
//!   only when the particle-hole matrix elements of `H` vanish.

use rayon::prelude::*;
use thiserror::Error;

use crate::angmom::{gauss_legendre, wigner_small_d};
use crate::config::{BRILLOUIN_TOL, MIN_QUADRATURE_POINTS, NORM_THRESHOLD_RELATIVE};
use crate::manybody::{
    brillouin_check, hf_energy, lowdin_one_body, lowdin_two_body, overlap_kernel, two_ph_energy_kernel,
    ManyBodyError, Model,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("2J={two_j} is not reachable from 2M={two_m}")]
    InvalidJ { two_j: u32, two_m: i32 },
    #[error("no J values requested")]
    EmptyJList,
    #[error("{points} quadrature points requested, at least {min} needed")]
    TooFewPoints { points: usize, min: usize },
    #[error("every norm kernel is below the reporting threshold")]
    AllNormsVanish,
    #[error(transparent)]
    ManyBody(#[from] ManyBodyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Brillouin,
    Lowdin,
    Both,
}

impl Route {
    fn brillouin(self) -> bool {
        matches!(self, Route::Brillouin | Route::Both)
    }

    fn lowdin(self) -> bool {
        matches!(self, Route::Lowdin | Route::Both)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumRequest<'a> {
    pub model: &'a Model,
    pub two_m: i32,
    pub two_js: Vec<u32>,
    pub points: usize,
    pub route: Route,
}

/// `2J = |2M|, |2M|+2, .., sum of occupied 2j`.
pub fn allowed_two_js(model: &Model) -> Vec<u32> {
    let lo = model.state.total_two_m().unsigned_abs();
    (lo..=model.state.max_two_j()).step_by(2).collect()
}

impl<'a> SpectrumRequest<'a> {
    /// `two_js = None` requests every allowed `J`.
    pub fn new(model: &'a Model, two_js: Option<Vec<u32>>, points: usize, route: Route) -> Result<Self, SpectrumError> {
        let two_m = model.state.total_two_m();
        let two_js = two_js.unwrap_or_else(|| allowed_two_js(model));
        if two_js.is_empty() {
            return Err(SpectrumError::EmptyJList);
        }
        if let Some(&two_j) = two_js
            .iter()
            .find(|&&tj| tj < two_m.unsigned_abs() || (tj as i64 - two_m as i64) % 2 != 0)
        {
            return Err(SpectrumError::InvalidJ { two_j, two_m });
        }
        if points < MIN_QUADRATURE_POINTS {
            return Err(SpectrumError::TooFewPoints { points, min: MIN_QUADRATURE_POINTS });
        }
        Ok(Self { model, two_m, two_js, points, route })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumLine {
    pub two_j: u32,
    /// `n_J = int d^J_{MM}(beta) <Phi|R(beta)|Phi> sin(beta) dbeta`.
    pub norm_kernel: f64,
    /// `(2J+1)/2 n_J`, the probability of `J` in the intrinsic state.
    pub weight: f64,
    pub energy_brillouin: Option<f64>,
    pub energy_lowdin: Option<f64>,
}

impl SpectrumLine {
    /// `n_J` passed the reporting threshold.
    pub fn present(&self) -> bool {
        self.energy_brillouin.is_some() || self.energy_lowdin.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub route: Route,
    pub two_m: i32,
    pub hf_energy: f64,
    pub brillouin_residual_max: f64,
    pub lines: Vec<SpectrumLine>,
    pub warnings: Vec<String>,
}

impl SpectrumResult {
    pub fn line(&self, two_j: u32) -> Option<&SpectrumLine> {
        self.lines.iter().find(|l| l.two_j == two_j)
    }
}

#[derive(Debug, Clone, Copy)]
struct NodeValues {
    overlap: f64,
    hamiltonian: f64,
    two_ph: f64,
}

/// Kernel values at every node, in node order.
fn evaluate_nodes(
    req: &SpectrumRequest<'_>,
    with_lowdin: bool,
    with_brillouin: bool,
) -> Result<Vec<(f64, f64, NodeValues)>, SpectrumError> {
    let rule = gauss_legendre(req.points);
    let model = req.model;
    let nodes: Vec<(f64, f64)> = rule.iter().collect();
    let values = nodes
        .par_iter()
        .map(|&(beta, w)| {
            let sample = overlap_kernel(&model.state, beta)?;
            let hamiltonian = if with_lowdin {
                lowdin_one_body(&sample, &model.one_body)? + lowdin_two_body(&sample, &model.two_body)?
            } else {
                0.0
            };
            let two_ph = if with_brillouin { two_ph_energy_kernel(&sample, &model.two_body)? } else { 0.0 };
            Ok((beta, w, NodeValues { overlap: sample.overlap(), hamiltonian, two_ph }))
        })
        .collect::<Result<Vec<_>, ManyBodyError>>()?;
    Ok(values)
}

struct Integrals {
    norm: f64,
    hamiltonian: f64,
    two_ph: f64,
}

/// Node-ordered sums, so results do not depend on thread scheduling.
fn integrate(req: &SpectrumRequest<'_>, two_j: u32, nodes: &[(f64, f64, NodeValues)]) -> Integrals {
    let mut acc = Integrals { norm: 0.0, hamiltonian: 0.0, two_ph: 0.0 };
    for &(beta, w, v) in nodes {
        let d = wigner_small_d(two_j, req.two_m, req.two_m, beta).expect("validated J");
        let weight = w * beta.sin() * d;
        acc.norm += weight * v.overlap;
        acc.hamiltonian += weight * v.hamiltonian;
        acc.two_ph += weight * v.two_ph;
    }
    acc
}

/// `n_J` for every requested `J`.
pub fn norm_kernel(req: &SpectrumRequest<'_>) -> Result<Vec<f64>, SpectrumError> {
    let nodes = evaluate_nodes(req, false, false)?;
    Ok(req.two_js.iter().map(|&tj| integrate(req, tj, &nodes).norm).collect())
}

pub fn energy_spectrum(req: &SpectrumRequest<'_>) -> Result<SpectrumResult, SpectrumError> {
    let model = req.model;
    let e_hf = hf_energy(&model.state, &model.one_body, &model.two_body)?;
    let residual_max = brillouin_check(&model.state, &model.one_body, &model.two_body)?
        .iter()
        .fold(0.0_f64, |acc, r| acc.max(r.value.abs()));
    let nodes = evaluate_nodes(req, req.route.lowdin(), req.route.brillouin())?;
    let integrals: Vec<Integrals> = req.two_js.iter().map(|&tj| integrate(req, tj, &nodes)).collect();
    // the threshold refers to the dominant J, requested or not
    let max_norm = allowed_two_js(model)
        .into_iter()
        .map(|tj| integrate(req, tj, &nodes).norm)
        .chain(integrals.iter().map(|i| i.norm))
        .fold(0.0_f64, f64::max);
    let threshold = NORM_THRESHOLD_RELATIVE * max_norm;
    if integrals.iter().all(|i| i.norm <= threshold) {
        return Err(SpectrumError::AllNormsVanish);
    }
    let mut warnings = Vec::new();
    if req.route.brillouin() && residual_max > BRILLOUIN_TOL {
        warnings.push(format!(
            "Brillouin residual {residual_max:.3e} exceeds {BRILLOUIN_TOL:.0e}; the 2p-2h energies are not exact"
        ));
    }
    let lines = req
        .two_js
        .iter()
        .zip(&integrals)
        .map(|(&two_j, i)| {
            let present = i.norm > threshold;
            SpectrumLine {
                two_j,
                norm_kernel: i.norm,
                weight: 0.5 * (two_j as f64 + 1.0) * i.norm,
                energy_brillouin: (present && req.route.brillouin()).then(|| e_hf + i.two_ph / i.norm),
                energy_lowdin: (present && req.route.lowdin()).then(|| i.hamiltonian / i.norm),
            }
        })
        .collect();
    Ok(SpectrumResult {
        route: req.route,
        two_m: req.two_m,
        hf_energy: e_hf,
        brillouin_residual_max: residual_max,
        lines,
        warnings,
    })
}

pub fn energy_spectrum_brillouin(req: &SpectrumRequest<'_>) -> Result<SpectrumResult, SpectrumError> {
    energy_spectrum(&SpectrumRequest { route: Route::Brillouin, ..req.clone() })
}

pub fn energy_spectrum_lowdin(req: &SpectrumRequest<'_>) -> Result<SpectrumResult, SpectrumError> {
    energy_spectrum(&SpectrumRequest { route: Route::Lowdin, ..req.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison {
    /// `|E_brillouin - E_lowdin|` per requested `2J`; `None` when `J` is absent.
    pub deltas: Vec<(u32, Option<f64>)>,
    pub brillouin_residual_max: f64,
    pub warnings: Vec<String>,
}

impl RouteComparison {
    pub fn max_delta(&self) -> Option<f64> {
        self.deltas.iter().filter_map(|(_, d)| *d).reduce(f64::max)
    }
}

pub fn compare_routes(req: &SpectrumRequest<'_>) -> Result<RouteComparison, SpectrumError> {
    let result = energy_spectrum(&SpectrumRequest { route: Route::Both, ..req.clone() })?;
    let deltas = result
        .lines
        .iter()
        .map(|l| (l.two_j, l.energy_brillouin.zip(l.energy_lowdin).map(|(b, w)| (b - w).abs())))
        .collect();
    Ok(RouteComparison { deltas, brillouin_residual_max: result.brillouin_residual_max, warnings: result.warnings })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::config::DEFAULT_QUADRATURE_POINTS;
    use crate::fixtures::{two_shell_cg_oracle, two_shell_model};
    use crate::manybody::{Basis, OneBodyOperator, SlaterState, TwoBodyOperator};

    fn bare_model(shells: &[(&str, u32)], occupied: &[(&str, i32)]) -> Model {
        let basis = Arc::new(Basis::from_shells(shells));
        let occ = occupied.iter().map(|(s, m)| basis.find(s, *m).unwrap()).collect();
        let n = basis.len();
        let diag: Vec<_> = (0..n).map(|i| (i, i, 0.3 + 0.1 * i as f64)).collect();
        Model::new(
            SlaterState::new(basis, occ).unwrap(),
            OneBodyOperator::from_entries(n, &diag).unwrap(),
            TwoBodyOperator::zeros(n),
        )
        .unwrap()
    }

    #[test]
    fn single_orbital_norm() {
        let model = bare_model(&[("a", 5)], &[("a", 5)]);
        let req = SpectrumRequest::new(&model, Some(vec![5, 7, 9]), DEFAULT_QUADRATURE_POINTS, Route::Both).unwrap();
        let n = norm_kernel(&req).unwrap();
        assert!((n[0] - 2.0 / 6.0).abs() < 1e-12);
        assert!(n[1].abs() < 1e-12 && n[2].abs() < 1e-12);
        let res = energy_spectrum(&req).unwrap();
        assert!(res.lines[0].present() && !res.lines[1].present());
        assert!((res.lines[0].energy_lowdin.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn stretched_pair_has_single_j() {
        let model = bare_model(&[("a", 3), ("b", 1)], &[("a", 3), ("b", 1)]);
        assert_eq!(allowed_two_js(&model), vec![4]);
        let req = SpectrumRequest::new(&model, Some(vec![2, 4]), 32, Route::Lowdin);
        assert!(matches!(req, Err(SpectrumError::InvalidJ { two_j: 2, two_m: 4 })));
        let req = SpectrumRequest::new(&model, None, 32, Route::Lowdin).unwrap();
        let res = energy_spectrum(&req).unwrap();
        assert!((res.lines[0].weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_shell_norms_are_cg_weights() {
        let model = two_shell_model();
        let req = SpectrumRequest::new(&model, None, DEFAULT_QUADRATURE_POINTS, Route::Both).unwrap();
        assert_eq!(req.two_js, vec![2, 4]);
        let res = energy_spectrum(&req).unwrap();
        for (line, oracle) in res.lines.iter().zip(two_shell_cg_oracle()) {
            assert!((line.weight - oracle.weight).abs() < 1e-12);
            assert!((line.energy_lowdin.unwrap() - oracle.energy).abs() < 1e-10, "{line:?}");
            assert!((line.energy_brillouin.unwrap() - oracle.energy).abs() < 1e-10, "{line:?}");
        }
        assert!(res.warnings.is_empty());
        assert_eq!(res.brillouin_residual_max, 0.0);
    }

    #[test]
    fn request_validation() {
        let model = two_shell_model();
        assert!(matches!(
            SpectrumRequest::new(&model, Some(vec![3]), 48, Route::Both),
            Err(SpectrumError::InvalidJ { .. })
        ));
        assert_eq!(
            SpectrumRequest::new(&model, Some(vec![]), 48, Route::Both).unwrap_err(),
            SpectrumError::EmptyJList
        );
        assert_eq!(
            SpectrumRequest::new(&model, None, 4, Route::Both).unwrap_err(),
            SpectrumError::TooFewPoints { points: 4, min: 8 }
        );
    }

    #[test]
    fn absent_components_fail() {
        let model = bare_model(&[("a", 1)], &[("a", 1)]);
        let req = SpectrumRequest::new(&model, Some(vec![3, 5]), 16, Route::Lowdin).unwrap();
        assert_eq!(energy_spectrum(&req).unwrap_err(), SpectrumError::AllNormsVanish);
    }
}
