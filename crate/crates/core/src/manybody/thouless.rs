use crate::lalg::{DenseMatrix, SolutionTable};

use super::kernel::transformation_kernel;
use super::{ManyBodyError, SlaterState};

/// `U|Phi> = c0 exp(sum_{k,i} x(k,i) b+_k a_i) |Phi>`.
#[derive(Debug, Clone)]
pub struct ThoulessExpansion {
    pub c0: f64,
    occupied: Vec<usize>,
    unoccupied: Vec<usize>,
    /// Rows follow `unoccupied`, columns follow `occupied`.
    x: SolutionTable,
}

impl ThoulessExpansion {
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn unoccupied(&self) -> &[usize] {
        &self.unoccupied
    }

    pub fn table(&self) -> &SolutionTable {
        &self.x
    }

    /// `x(k, i)` by basis ids; `None` unless `k` is unoccupied and `i` occupied.
    pub fn amplitude(&self, k: usize, i: usize) -> Option<f64> {
        let row = self.unoccupied.iter().position(|&u| u == k)?;
        let col = self.occupied.iter().position(|&o| o == i)?;
        Some(self.x.get(row, col))
    }
}

/// Thouless parameters of `U|Phi>`: `c0 = <Phi|U|Phi>` and
/// `x(k, i) = sum_j <b_k|U|a_j> (A^{-1})_{ji}`.
pub fn thouless_expand(phi: &SlaterState, u: &DenseMatrix) -> Result<ThoulessExpansion, ManyBodyError> {
    let sample = transformation_kernel(phi, u)?;
    let Some(full) = sample.ph_table() else {
        return Err(ManyBodyError::VanishingOverlap);
    };
    let unoccupied = phi.unoccupied();
    let x = full.select_rows(&unoccupied);
    Ok(ThoulessExpansion { c0: sample.overlap(), occupied: phi.occupied().to_vec(), unoccupied, x })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::manybody::{overlap_kernel, ph_amplitude, Basis};

    #[test]
    fn identity_expansion() {
        let phi = SlaterState::new(Arc::new(Basis::from_shells(&[("a", 3)])), vec![0, 1]).unwrap();
        let t = thouless_expand(&phi, &DenseMatrix::identity(4)).unwrap();
        assert_eq!(t.c0, 1.0);
        assert_eq!(t.table().max_abs(), 0.0);
        assert_eq!(t.amplitude(0, 1), None);
    }

    #[test]
    fn rotation_matches_ph_amplitudes() {
        let phi = SlaterState::new(Arc::new(Basis::from_shells(&[("a", 3), ("b", 1)])), vec![1, 4]).unwrap();
        let beta = 0.05;
        let sample = overlap_kernel(&phi, beta).unwrap();
        let t = thouless_expand(&phi, &phi.basis().rotation(beta)).unwrap();
        assert_eq!(t.c0, sample.overlap());
        for &k in t.unoccupied() {
            for &i in t.occupied() {
                let want = ph_amplitude(&sample, k, i).unwrap();
                assert!((t.amplitude(k, i).unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_block_is_rejected() {
        let phi = SlaterState::new(Arc::new(Basis::from_shells(&[("a", 1)])), vec![0]).unwrap();
        let swap = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(thouless_expand(&phi, &swap), Err(ManyBodyError::VanishingOverlap)));
    }
}
