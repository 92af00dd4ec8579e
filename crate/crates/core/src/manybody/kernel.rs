//! Rotation kernels of a Slater determinant.
//!
//! With `A_ij = <a_i|U|a_j>` the overlap is `det A`. The occupied vectors are
//! the columns of `M = A^T`; the right-hand side for orbital `r` is
//! `(v_r)_m = <c_r|U|a_m>`, and `x(r, i) = (M^{-1} v_r)_i`. Every matrix
//! element with particle-hole operators on the left of `U` is then a
//! determinant of `M` with columns replaced by some `v_r`:
//!
//! * `<Phi|a+_i c_r U|Phi> = det(A) x(r, i)`
//! * `<Phi|a+_i a+_j c_s c_r U|Phi> = det(A) |x(r,i) x(r,j); x(s,i) x(s,j)|`
//!
//! When `A` is singular the replaced determinants are evaluated directly, which
//! gives the finite limits of `det(A) * (minor of A^{-1})`.

use crate::config::SINGULAR_PIVOT_RELATIVE;
use crate::lalg::{replaced_determinant, solve_columns, DenseMatrix, LuDecomposition, SolutionTable};

use super::{ManyBodyError, OneBodyOperator, SlaterState, TwoBodyOperator};

/// Weight of the unrestricted four-index sum in the two-body kernels,
/// `<Phi|V U|Phi> = 1/4 sum_{pqrs} <pq|V|rs> <Phi|c+_p c+_q c_s c_r U|Phi>`.
pub const TWO_BODY_PREFACTOR: f64 = 0.25;

/// Everything needed to evaluate kernels at one transformation `U`.
#[derive(Debug, Clone)]
pub struct RotationKernelSample {
    /// Rotation angle; `None` for a general one-body transformation.
    pub beta: Option<f64>,
    state: SlaterState,
    transformation: DenseMatrix,
    lu: LuDecomposition,
    overlap: f64,
    /// Row `r` holds `x(r, .)` for basis orbital `r`; absent when `A` is singular.
    table: Option<SolutionTable>,
}

impl RotationKernelSample {
    fn build(state: &SlaterState, transformation: DenseMatrix, beta: Option<f64>) -> Result<Self, ManyBodyError> {
        let occ = state.occupied();
        let n = occ.len();
        let m = DenseMatrix::from_fn(n, n, |row, col| transformation[(occ[col], occ[row])]);
        let lu = LuDecomposition::new(&m)?;
        // transformations are unitary on the basis, so pivots are also
        // compared against the unit scale, not only against max|A|
        let singular = lu.is_singular() || lu.min_pivot() < SINGULAR_PIVOT_RELATIVE * m.max_abs().max(1.0);
        let overlap = if singular { 0.0 } else { lu.determinant() };
        let table = if singular {
            None
        } else {
            let rhs: Vec<Vec<f64>> = (0..state.basis().len())
                .map(|r| occ.iter().map(|&a| transformation[(r, a)]).collect())
                .collect();
            Some(solve_columns(&lu, &rhs)?)
        };
        Ok(Self { beta, state: state.clone(), transformation, lu, overlap, table })
    }

    /// `det A` from the factorization; 0 when flagged singular, which is the
    /// value a singular node contributes to quadrature.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    pub fn is_singular(&self) -> bool {
        self.table.is_none()
    }

    pub fn lu(&self) -> &LuDecomposition {
        &self.lu
    }

    pub fn ph_table(&self) -> Option<&SolutionTable> {
        self.table.as_ref()
    }

    pub fn state(&self) -> &SlaterState {
        &self.state
    }

    pub fn transformation(&self) -> &DenseMatrix {
        &self.transformation
    }

    /// `M` with column `pos[b]` replaced by `v_{ids[b]}`, by a fresh factorization.
    fn direct_replaced(&self, positions: &[usize], ids: &[usize]) -> f64 {
        let occ = self.state.occupied();
        let n = occ.len();
        let u = &self.transformation;
        let m = DenseMatrix::from_fn(n, n, |row, col| match positions.iter().position(|&p| p == col) {
            Some(b) => u[(ids[b], occ[row])],
            None => u[(occ[col], occ[row])],
        });
        LuDecomposition::new(&m).map(|lu| lu.raw_determinant()).unwrap_or(0.0)
    }

    /// `<Phi|a+_i c_r U|Phi>` for occupied position `i`.
    pub(crate) fn one_ph(&self, r: usize, i: usize) -> f64 {
        match &self.table {
            Some(x) => self.overlap * x.get(r, i),
            None => self.direct_replaced(&[i], &[r]),
        }
    }

    /// `<Phi|a+_i a+_j c_s c_r U|Phi>` for occupied positions `i, j`.
    pub(crate) fn pair(&self, i: usize, j: usize, r: usize, s: usize) -> f64 {
        if i == j || r == s {
            return 0.0;
        }
        match &self.table {
            Some(x) => replaced_determinant(self.overlap, x, &[r, s], &[i, j]).expect("indices validated"),
            None => self.direct_replaced(&[i, j], &[r, s]),
        }
    }

    fn occupied_position(&self, id: usize) -> Result<usize, ManyBodyError> {
        self.check_id(id)?;
        self.state.position(id).ok_or(ManyBodyError::NotOccupied(id))
    }

    fn check_unoccupied(&self, id: usize) -> Result<(), ManyBodyError> {
        self.check_id(id)?;
        if self.state.is_occupied(id) {
            return Err(ManyBodyError::NotUnoccupied(id));
        }
        Ok(())
    }

    fn check_id(&self, id: usize) -> Result<(), ManyBodyError> {
        let len = self.state.basis().len();
        if id >= len {
            return Err(ManyBodyError::UnknownOrbital { id, len });
        }
        Ok(())
    }
}

/// Factors the occupied block of `exp(-i beta J_y)` and tabulates `x(r, i)`.
pub fn overlap_kernel(phi: &SlaterState, beta: f64) -> Result<RotationKernelSample, ManyBodyError> {
    RotationKernelSample::build(phi, phi.basis().rotation(beta), Some(beta))
}

/// Same as [`overlap_kernel`] for an arbitrary single-particle transformation.
pub fn transformation_kernel(phi: &SlaterState, u: &DenseMatrix) -> Result<RotationKernelSample, ManyBodyError> {
    let n = phi.basis().len();
    if u.rows() != n || u.cols() != n {
        return Err(ManyBodyError::DimensionMismatch(format!(
            "transformation is {}x{}, basis has {n} orbitals",
            u.rows(),
            u.cols()
        )));
    }
    RotationKernelSample::build(phi, u.clone(), None)
}

/// `x(k, i) = <Phi|a+_i c_k U|Phi> / <Phi|U|Phi>`.
///
/// For occupied `k` this is `delta_{ki}` up to rounding.
pub fn ph_amplitude(sample: &RotationKernelSample, k: usize, i: usize) -> Result<f64, ManyBodyError> {
    let pos = sample.occupied_position(i)?;
    sample.check_id(k)?;
    match sample.ph_table() {
        Some(x) => Ok(x.get(k, pos)),
        None => Err(ManyBodyError::VanishingOverlap),
    }
}

/// `<Phi|a+_i a+_j b_l b_k U|Phi>` for occupied `i, j` and unoccupied `k, l`.
pub fn two_ph_kernel(
    sample: &RotationKernelSample,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<f64, ManyBodyError> {
    let (pi, pj) = (sample.occupied_position(i)?, sample.occupied_position(j)?);
    sample.check_unoccupied(k)?;
    sample.check_unoccupied(l)?;
    Ok(sample.pair(pi, pj, k, l))
}

/// [`two_ph_kernel`] by factoring the doubly replaced determinant from scratch.
pub fn two_ph_kernel_direct(
    sample: &RotationKernelSample,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<f64, ManyBodyError> {
    let (pi, pj) = (sample.occupied_position(i)?, sample.occupied_position(j)?);
    sample.check_unoccupied(k)?;
    sample.check_unoccupied(l)?;
    if pi == pj || k == l {
        return Ok(0.0);
    }
    Ok(sample.direct_replaced(&[pi, pj], &[k, l]))
}

/// `<Phi|T U|Phi> = sum_ij <a_i|T U|a_j> adj(A)_ji`.
pub fn lowdin_one_body(sample: &RotationKernelSample, t: &OneBodyOperator) -> Result<f64, ManyBodyError> {
    let n_basis = sample.state.basis().len();
    if t.dim() != n_basis {
        return Err(ManyBodyError::DimensionMismatch(format!(
            "one-body operator acts on {}, basis has {n_basis}",
            t.dim()
        )));
    }
    let occ = sample.state.occupied();
    let mut total = 0.0;
    for (i, &a) in occ.iter().enumerate() {
        for q in 0..n_basis {
            let tq = t.get(a, q);
            if tq != 0.0 {
                total += tq * sample.one_ph(q, i);
            }
        }
    }
    Ok(total)
}

/// `<Phi|V U|Phi>`: rotated two-body elements contracted with `det(A)` times
/// 2x2 minors of `A^{-1}`.
pub fn lowdin_two_body(sample: &RotationKernelSample, v: &TwoBodyOperator) -> Result<f64, ManyBodyError> {
    check_two_body_dim(sample, v)?;
    let state = &sample.state;
    let mut total = 0.0;
    for ([p, q, r, s], value) in v.iter_full() {
        if let (Some(i), Some(j)) = (state.position(p), state.position(q)) {
            total += value * sample.pair(i, j, r, s);
        }
    }
    Ok(TWO_BODY_PREFACTOR * total)
}

/// `1/4 sum <ij|V|kl> <Phi|a+_i a+_j b_l b_k U|Phi>` over occupied `i, j` and
/// unoccupied `k, l`: the 2p-2h part of `<Phi|H U|Phi>`.
pub fn two_ph_energy_kernel(sample: &RotationKernelSample, v: &TwoBodyOperator) -> Result<f64, ManyBodyError> {
    check_two_body_dim(sample, v)?;
    let state = &sample.state;
    let mut total = 0.0;
    for ([p, q, r, s], value) in v.iter_full() {
        if state.is_occupied(r) || state.is_occupied(s) {
            continue;
        }
        if let (Some(i), Some(j)) = (state.position(p), state.position(q)) {
            total += value * sample.pair(i, j, r, s);
        }
    }
    Ok(TWO_BODY_PREFACTOR * total)
}

/// All `two_ph_kernel(i, j, k, l)` with `i < j` occupied positions and `k < l`
/// unoccupied, in lexicographic order.
pub fn all_two_ph_kernels(sample: &RotationKernelSample) -> Vec<f64> {
    let unocc = sample.state.unoccupied();
    let n = sample.state.particle_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for (a, &k) in unocc.iter().enumerate() {
                for &l in &unocc[a + 1..] {
                    out.push(sample.pair(i, j, k, l));
                }
            }
        }
    }
    out
}

/// [`all_two_ph_kernels`] with one full factorization per kernel.
pub fn all_two_ph_kernels_direct(sample: &RotationKernelSample) -> Vec<f64> {
    let unocc = sample.state.unoccupied();
    let n = sample.state.particle_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for (a, &k) in unocc.iter().enumerate() {
                for &l in &unocc[a + 1..] {
                    out.push(sample.direct_replaced(&[i, j], &[k, l]));
                }
            }
        }
    }
    out
}

fn check_two_body_dim(sample: &RotationKernelSample, v: &TwoBodyOperator) -> Result<(), ManyBodyError> {
    let n_basis = sample.state.basis().len();
    if v.dim() != n_basis {
        return Err(ManyBodyError::DimensionMismatch(format!(
            "two-body operator acts on {}, basis has {n_basis}",
            v.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::angmom::{wigner_small_d_matrix, AngMomLabel};
    use crate::manybody::{fock_oracle, hf_energy, Basis, FockOperator, Orbital};

    fn single_shell(two_j: u32, occupied: Vec<usize>) -> SlaterState {
        SlaterState::new(Arc::new(Basis::from_shells(&[("a", two_j)])), occupied).unwrap()
    }

    #[test]
    fn identity_limits() {
        let phi = single_shell(3, vec![0, 2]);
        let s = overlap_kernel(&phi, 0.0).unwrap();
        assert_eq!(s.overlap(), 1.0);
        for k in phi.unoccupied() {
            assert_eq!(ph_amplitude(&s, k, 0).unwrap(), 0.0);
        }
        assert_eq!(ph_amplitude(&s, 2, 2).unwrap(), 1.0);
        assert_eq!(two_ph_kernel(&s, 0, 2, 1, 3).unwrap(), 0.0);
        assert_eq!(two_ph_kernel(&s, 0, 0, 1, 3).unwrap(), 0.0);
        assert_eq!(two_ph_kernel(&s, 0, 2, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn single_particle_overlap() {
        let phi = single_shell(1, vec![0]);
        for &beta in &[0.1, 1.0, 2.5, PI] {
            let s = overlap_kernel(&phi, beta).unwrap();
            assert!((s.overlap() - (beta / 2.0).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn two_particle_overlap_is_d_block() {
        let phi = single_shell(3, vec![0, 1]);
        let s = overlap_kernel(&phi, PI / 2.0).unwrap();
        let d = wigner_small_d_matrix(3, PI / 2.0).unwrap();
        let block = d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)];
        assert!((s.overlap() - block).abs() < 1e-14);
    }

    #[test]
    fn index_errors() {
        let phi = single_shell(3, vec![0, 1]);
        let s = overlap_kernel(&phi, 0.3).unwrap();
        assert_eq!(two_ph_kernel(&s, 2, 1, 2, 3), Err(ManyBodyError::NotOccupied(2)));
        assert_eq!(two_ph_kernel(&s, 0, 1, 1, 3), Err(ManyBodyError::NotUnoccupied(1)));
        assert_eq!(ph_amplitude(&s, 9, 0), Err(ManyBodyError::UnknownOrbital { id: 9, len: 4 }));
        assert_eq!(ph_amplitude(&s, 2, 3), Err(ManyBodyError::NotOccupied(3)));
    }

    #[test]
    fn singular_overlap_has_finite_kernels() {
        // |1/2, 1/2> rotated by pi is orthogonal to itself
        let basis = Arc::new(Basis::new(vec![
            Orbital::new("a", AngMomLabel::new(1, 1).unwrap()),
            Orbital::new("a", AngMomLabel::new(1, -1).unwrap()),
            Orbital::new("b", AngMomLabel::new(1, 1).unwrap()),
            Orbital::new("b", AngMomLabel::new(1, -1).unwrap()),
        ]));
        let phi = SlaterState::new(basis, vec![0, 2]).unwrap();
        let s = overlap_kernel(&phi, PI).unwrap();
        assert!(s.is_singular());
        assert_eq!(s.overlap(), 0.0);
        assert_eq!(ph_amplitude(&s, 1, 0), Err(ManyBodyError::VanishingOverlap));
        let k = two_ph_kernel(&s, 0, 2, 1, 3).unwrap();
        let oracle = fock_oracle(
            &phi,
            s.transformation(),
            &FockOperator::String(&[
                crate::manybody::FockOp::Create(0),
                crate::manybody::FockOp::Create(2),
                crate::manybody::FockOp::Annihilate(3),
                crate::manybody::FockOp::Annihilate(1),
            ]),
        )
        .unwrap();
        assert!((k - oracle).abs() < 1e-14, "{k} vs {oracle}");
        assert!((k.abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn beta_zero_gives_hf_pieces() {
        let phi = single_shell(5, vec![0, 3, 4]);
        let t = OneBodyOperator::from_entries(6, &[(0, 0, 1.5), (3, 3, -0.5), (4, 4, 0.25), (0, 3, 0.7), (1, 1, 9.0)]).unwrap();
        let v = TwoBodyOperator::from_entries(6, &[([0, 3, 0, 3], -1.0), ([3, 4, 3, 4], 0.5), ([0, 4, 1, 2], 2.0)]).unwrap();
        let s = overlap_kernel(&phi, 0.0).unwrap();
        let one = lowdin_one_body(&s, &t).unwrap();
        let two = lowdin_two_body(&s, &v).unwrap();
        assert!((one - 1.25).abs() < 1e-12);
        assert!((two - (-0.5)).abs() < 1e-12);
        assert!((one + two - hf_energy(&phi, &t, &v).unwrap()).abs() < 1e-12);
        let ident = OneBodyOperator::from_entries(6, &(0..6).map(|i| (i, i, 1.0)).collect::<Vec<_>>()).unwrap();
        let s = overlap_kernel(&phi, 0.9).unwrap();
        assert!((lowdin_one_body(&s, &ident).unwrap() - 3.0 * s.overlap()).abs() < 1e-12);
        assert_eq!(lowdin_two_body(&s, &TwoBodyOperator::zeros(6)).unwrap(), 0.0);
    }

    #[test]
    fn prefactor_is_frozen() {
        assert_eq!(TWO_BODY_PREFACTOR, 0.25);
    }

    #[test]
    fn direct_and_cramer_kernels_agree() {
        let basis = Arc::new(Basis::from_shells(&[("a", 5), ("b", 3), ("c", 1)]));
        let phi = SlaterState::new(basis, vec![0, 2, 6, 10, 7]).unwrap();
        let s = overlap_kernel(&phi, 1.1).unwrap();
        let fast = all_two_ph_kernels(&s);
        let slow = all_two_ph_kernels_direct(&s);
        assert_eq!(fast.len(), 10 * 21);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
