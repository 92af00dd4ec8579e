//! Slater determinants in second quantization.
//!
//! Orbitals are labelled by a shell tag and `|j m>`; the rotation
//! `exp(-i beta J_y)` mixes orbitals of the same shell only. Operators are
//! real: a symmetric one-body matrix and an antisymmetrized two-body table
//! `<pq|V|rs>` with `V = 1/4 sum <pq|V|rs> c+_p c+_q c_s c_r`.
//!
//! The model basis is treated as the complete single-particle space, so the
//! one-body kernel's completeness sum runs over the basis only.

mod fock;
mod hf;
mod kernel;
mod thouless;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::angmom::{rotation_matrix, AngMomLabel};
use crate::lalg::{DenseMatrix, LalgError};

pub use fock::{fock_oracle, FockOp, FockOperator, FockState};
pub use hf::{brillouin_check, hf_energy, BrillouinResidual};
pub use kernel::{
    all_two_ph_kernels, all_two_ph_kernels_direct, lowdin_one_body, lowdin_two_body, overlap_kernel,
    ph_amplitude, transformation_kernel, two_ph_energy_kernel, two_ph_kernel, two_ph_kernel_direct,
    RotationKernelSample, TWO_BODY_PREFACTOR,
};
pub use thouless::{thouless_expand, ThoulessExpansion};

/// Entries differing by more than this are reported as conflicting duplicates.
const ENTRY_CONFLICT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManyBodyError {
    #[error("orbital {id} does not exist (basis has {len})")]
    UnknownOrbital { id: usize, len: usize },
    #[error("orbital {0} is occupied twice")]
    DuplicateOccupied(usize),
    #[error("a Slater determinant needs at least one particle")]
    EmptyState,
    #[error("orbital {0} is not occupied")]
    NotOccupied(usize),
    #[error("orbital {0} is occupied")]
    NotUnoccupied(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("one-body matrix is not symmetric at ({i}, {k})")]
    NotSymmetric { i: usize, k: usize },
    #[error("conflicting values for element {key:?}: {first} vs {second}")]
    ConflictingEntry { key: Vec<usize>, first: f64, second: f64 },
    #[error("two-body element {0:?} repeats an index in a pair and must vanish")]
    RepeatedPairIndex([usize; 4]),
    #[error("non-finite matrix element")]
    NonFinite,
    #[error("overlap <Phi|U|Phi> vanishes")]
    VanishingOverlap,
    #[error("Fock space over {n} modes exceeds the oracle limit of {max}")]
    SizeLimitExceeded { n: usize, max: usize },
    #[error(transparent)]
    Lalg(#[from] LalgError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbital {
    pub shell: String,
    pub label: AngMomLabel,
}

impl Orbital {
    pub fn new(shell: impl Into<String>, label: AngMomLabel) -> Self {
        Self { shell: shell.into(), label }
    }
}

/// Ordered single-particle basis; an orbital's id is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    orbitals: Vec<Orbital>,
}

impl Basis {
    pub fn new(orbitals: Vec<Orbital>) -> Self {
        Self { orbitals }
    }

    /// All `2j+1` states of each `(shell, 2j)` in turn, `m` descending.
    pub fn from_shells<S: AsRef<str>>(shells: &[(S, u32)]) -> Self {
        let orbitals = shells
            .iter()
            .flat_map(|(name, two_j)| {
                let two_j = *two_j;
                (0..=two_j).map(move |k| {
                    let label = AngMomLabel::new(two_j, two_j as i32 - 2 * k as i32).expect("valid label");
                    Orbital::new(name.as_ref(), label)
                })
            })
            .collect();
        Self { orbitals }
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }

    pub fn orbitals(&self) -> &[Orbital] {
        &self.orbitals
    }

    pub fn orbital(&self, id: usize) -> &Orbital {
        &self.orbitals[id]
    }

    /// `<c_p| exp(-i beta J_y) |c_q>` over the whole basis.
    pub fn rotation(&self, beta: f64) -> DenseMatrix {
        let tagged: Vec<(&str, AngMomLabel)> =
            self.orbitals.iter().map(|o| (o.shell.as_str(), o.label)).collect();
        rotation_matrix(&tagged, beta)
    }

    /// Basis id with the given shell and `2m`, if present.
    pub fn find(&self, shell: &str, two_m: i32) -> Option<usize> {
        self.orbitals.iter().position(|o| o.shell == shell && o.label.two_m() == two_m)
    }
}

/// `a+_1 .. a+_n |0>` with `a_1` leftmost.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterState {
    basis: Arc<Basis>,
    occupied: Vec<usize>,
}

impl SlaterState {
    pub fn new(basis: Arc<Basis>, occupied: Vec<usize>) -> Result<Self, ManyBodyError> {
        if occupied.is_empty() {
            return Err(ManyBodyError::EmptyState);
        }
        for (idx, &id) in occupied.iter().enumerate() {
            if id >= basis.len() {
                return Err(ManyBodyError::UnknownOrbital { id, len: basis.len() });
            }
            if occupied[..idx].contains(&id) {
                return Err(ManyBodyError::DuplicateOccupied(id));
            }
        }
        Ok(Self { basis, occupied })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn particle_count(&self) -> usize {
        self.occupied.len()
    }

    /// Unoccupied ids in ascending order.
    pub fn unoccupied(&self) -> Vec<usize> {
        (0..self.basis.len()).filter(|id| !self.occupied.contains(id)).collect()
    }

    /// Position of `id` in the occupied list.
    pub fn position(&self, id: usize) -> Option<usize> {
        self.occupied.iter().position(|&o| o == id)
    }

    pub fn is_occupied(&self, id: usize) -> bool {
        self.occupied.contains(&id)
    }

    /// Doubled total `M`.
    pub fn total_two_m(&self) -> i32 {
        self.occupied.iter().map(|&id| self.basis.orbital(id).label.two_m()).sum()
    }

    /// Doubled sum of occupied `j`, the largest reachable `2J`.
    pub fn max_two_j(&self) -> u32 {
        self.occupied.iter().map(|&id| self.basis.orbital(id).label.two_j()).sum()
    }
}

/// Real symmetric `<c_p|T|c_q>`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyOperator {
    matrix: DenseMatrix,
}

impl OneBodyOperator {
    pub fn new(matrix: DenseMatrix) -> Result<Self, ManyBodyError> {
        if !matrix.is_square() {
            return Err(ManyBodyError::DimensionMismatch(format!(
                "one-body matrix is {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let n = matrix.rows();
        let scale = matrix.max_abs().max(1.0);
        for i in 0..n {
            for k in 0..i {
                if (matrix[(i, k)] - matrix[(k, i)]).abs() > ENTRY_CONFLICT_TOL * scale {
                    return Err(ManyBodyError::NotSymmetric { i: k, k: i });
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DenseMatrix::zeros(dim, dim) }
    }

    /// Builds the matrix from `(i, k, value)` triples, filling `(k, i)` too.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self, ManyBodyError> {
        let mut set: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, k, v) in entries {
            for id in [i, k] {
                if id >= dim {
                    return Err(ManyBodyError::UnknownOrbital { id, len: dim });
                }
            }
            if !v.is_finite() {
                return Err(ManyBodyError::NonFinite);
            }
            let key = (i.min(k), i.max(k));
            if let Some(&prev) = set.get(&key) {
                if (prev - v).abs() > ENTRY_CONFLICT_TOL * prev.abs().max(1.0) {
                    return Err(ManyBodyError::ConflictingEntry { key: vec![i, k], first: prev, second: v });
                }
            }
            set.insert(key, v);
        }
        let mut matrix = DenseMatrix::zeros(dim, dim);
        for ((i, k), v) in set {
            matrix[(i, k)] = v;
            matrix[(k, i)] = v;
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.matrix[(p, q)]
    }

    /// Upper-triangle nonzero entries.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for k in i..n {
                if self.matrix[(i, k)] != 0.0 {
                    out.push((i, k, self.matrix[(i, k)]));
                }
            }
        }
        out
    }

    /// `T + c * 1`.
    pub fn shifted(&self, c: f64) -> Self {
        let n = self.dim();
        let matrix = DenseMatrix::from_fn(n, n, |i, k| self.matrix[(i, k)] + if i == k { c } else { 0.0 });
        Self { matrix }
    }
}

/// Antisymmetrized `<pq|V|rs>`, stored once per canonical key `p<q, r<s`.
///
/// Both a key and its Hermitian partner `(r, s, p, q)` are present.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoBodyOperator {
    dim: usize,
    table: BTreeMap<[usize; 4], f64>,
}

fn canonical(key: [usize; 4], value: f64) -> Option<([usize; 4], f64)> {
    let [mut p, mut q, mut r, mut s] = key;
    let mut v = value;
    if p == q || r == s {
        return None;
    }
    if p > q {
        std::mem::swap(&mut p, &mut q);
        v = -v;
    }
    if r > s {
        std::mem::swap(&mut r, &mut s);
        v = -v;
    }
    Some(([p, q, r, s], v))
}

impl TwoBodyOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, table: BTreeMap::new() }
    }

    /// Applies the antisymmetry and Hermiticity closures. Entries that imply
    /// different values for the same element are rejected.
    pub fn from_entries(dim: usize, entries: &[([usize; 4], f64)]) -> Result<Self, ManyBodyError> {
        let mut table: BTreeMap<[usize; 4], f64> = BTreeMap::new();
        for &(key, value) in entries {
            if let Some(&id) = key.iter().find(|&&id| id >= dim) {
                return Err(ManyBodyError::UnknownOrbital { id, len: dim });
            }
            if !value.is_finite() {
                return Err(ManyBodyError::NonFinite);
            }
            let Some((ck, cv)) = canonical(key, value) else {
                if value != 0.0 {
                    return Err(ManyBodyError::RepeatedPairIndex(key));
                }
                continue;
            };
            let partner = [ck[2], ck[3], ck[0], ck[1]];
            for k in [ck, partner] {
                if let Some(&prev) = table.get(&k) {
                    if (prev - cv).abs() > ENTRY_CONFLICT_TOL * prev.abs().max(1.0) {
                        return Err(ManyBodyError::ConflictingEntry { key: key.to_vec(), first: prev, second: cv });
                    }
                }
                table.insert(k, cv);
            }
        }
        table.retain(|_, v| *v != 0.0);
        Ok(Self { dim, table })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Number of stored canonical elements.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        match canonical([p, q, r, s], 1.0) {
            Some((key, sign)) => self.table.get(&key).map_or(0.0, |v| sign * v),
            None => 0.0,
        }
    }

    /// Canonical elements `p<q, r<s`, each key once.
    pub fn iter_canonical(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        self.table.iter().map(|(k, v)| (*k, *v))
    }

    /// Every nonzero `<pq|V|rs>` including the antisymmetric images.
    pub fn iter_full(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        self.table.iter().flat_map(|(&[p, q, r, s], &v)| {
            [([p, q, r, s], v), ([q, p, r, s], -v), ([p, q, s, r], -v), ([q, p, s, r], v)]
        })
    }
}

/// A Slater determinant together with its Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub state: SlaterState,
    pub one_body: OneBodyOperator,
    pub two_body: TwoBodyOperator,
}

impl Model {
    pub fn new(
        state: SlaterState,
        one_body: OneBodyOperator,
        two_body: TwoBodyOperator,
    ) -> Result<Self, ManyBodyError> {
        let n = state.basis().len();
        if one_body.dim() != n || two_body.dim() != n {
            return Err(ManyBodyError::DimensionMismatch(format!(
                "basis has {n} orbitals, operators act on {} and {}",
                one_body.dim(),
                two_body.dim()
            )));
        }
        Ok(Self { state, one_body, two_body })
    }

    pub fn basis(&self) -> &Basis {
        self.state.basis()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(two_j: u32, two_m: i32) -> AngMomLabel {
        AngMomLabel::new(two_j, two_m).unwrap()
    }

    #[test]
    fn slater_state_validation() {
        let basis = Arc::new(Basis::from_shells(&[("a", 3)]));
        assert_eq!(basis.len(), 4);
        assert_eq!(basis.orbital(1).label, label(3, 1));
        assert!(SlaterState::new(basis.clone(), vec![0, 2]).is_ok());
        assert_eq!(SlaterState::new(basis.clone(), vec![0, 0]), Err(ManyBodyError::DuplicateOccupied(0)));
        assert_eq!(SlaterState::new(basis.clone(), vec![4]), Err(ManyBodyError::UnknownOrbital { id: 4, len: 4 }));
        assert_eq!(SlaterState::new(basis.clone(), vec![]), Err(ManyBodyError::EmptyState));
        let s = SlaterState::new(basis, vec![3, 1]).unwrap();
        assert_eq!(s.unoccupied(), vec![0, 2]);
        assert_eq!(s.position(1), Some(1));
        assert_eq!(s.total_two_m(), -2);
        assert_eq!(s.max_two_j(), 6);
    }

    #[test]
    fn one_body_closure() {
        let t = OneBodyOperator::from_entries(3, &[(0, 1, 0.5), (2, 2, -1.0), (1, 0, 0.5)]).unwrap();
        assert_eq!(t.get(1, 0), 0.5);
        assert_eq!(t.get(0, 1), 0.5);
        assert_eq!(t.entries(), vec![(0, 1, 0.5), (2, 2, -1.0)]);
        assert!(matches!(
            OneBodyOperator::from_entries(3, &[(0, 1, 0.5), (1, 0, 0.6)]),
            Err(ManyBodyError::ConflictingEntry { .. })
        ));
        let asym = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(OneBodyOperator::new(asym), Err(ManyBodyError::NotSymmetric { .. })));
    }

    #[test]
    fn two_body_closure() {
        let v = TwoBodyOperator::from_entries(4, &[([1, 0, 2, 3], 0.7)]).unwrap();
        assert_eq!(v.get(0, 1, 2, 3), -0.7);
        assert_eq!(v.get(1, 0, 2, 3), 0.7);
        assert_eq!(v.get(1, 0, 3, 2), -0.7);
        assert_eq!(v.get(2, 3, 0, 1), -0.7);
        assert_eq!(v.get(0, 0, 2, 3), 0.0);
        assert_eq!(v.len(), 2);
        assert_eq!(v.iter_full().count(), 8);
        assert!(matches!(
            TwoBodyOperator::from_entries(4, &[([0, 1, 2, 3], 0.7), ([2, 3, 1, 0], 0.7)]),
            Err(ManyBodyError::ConflictingEntry { .. })
        ));
        assert_eq!(
            TwoBodyOperator::from_entries(4, &[([1, 1, 2, 3], 0.2)]),
            Err(ManyBodyError::RepeatedPairIndex([1, 1, 2, 3]))
        );
        assert!(TwoBodyOperator::from_entries(4, &[([0, 1, 2, 3], 0.7), ([3, 2, 1, 0], 0.7)]).is_ok());
    }

    #[test]
    fn rotation_mixes_within_shell() {
        let basis = Basis::new(vec![
            Orbital::new("a", label(1, 1)),
            Orbital::new("b", label(1, -1)),
            Orbital::new("a", label(1, -1)),
        ]);
        let r = basis.rotation(0.4);
        assert_eq!(r[(0, 1)], 0.0);
        assert!((r[(0, 2)] + (0.2f64).sin()).abs() < 1e-15);
        assert!((r[(1, 1)] - (0.2f64).cos()).abs() < 1e-15);
    }
}
