use super::{ManyBodyError, SlaterState, OneBodyOperator, TwoBodyOperator};

/// `<Phi|H b+_k a_i|Phi>` for one particle-hole pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrillouinResidual {
    pub hole: usize,
    pub particle: usize,
    pub value: f64,
}

fn check_dims(phi: &SlaterState, t: &OneBodyOperator, v: &TwoBodyOperator) -> Result<(), ManyBodyError> {
    let n = phi.basis().len();
    if t.dim() != n || v.dim() != n {
        return Err(ManyBodyError::DimensionMismatch(format!(
            "basis has {n} orbitals, operators act on {} and {}",
            t.dim(),
            v.dim()
        )));
    }
    Ok(())
}

/// `sum_occ T_ii + 1/2 sum_{ij occ} <ij|V|ij>`.
pub fn hf_energy(phi: &SlaterState, t: &OneBodyOperator, v: &TwoBodyOperator) -> Result<f64, ManyBodyError> {
    check_dims(phi, t, v)?;
    let occ = phi.occupied();
    let one: f64 = occ.iter().map(|&a| t.get(a, a)).sum();
    let mut two = 0.0;
    for &a in occ {
        for &b in occ {
            two += v.get(a, b, a, b);
        }
    }
    Ok(one + 0.5 * two)
}

/// Matrix elements `<Phi|H b+_k a_i|Phi> = T_ik + sum_{j occ} <ij|V|kj>`, one per
/// occupied `i` and unoccupied `k`, holes outer.
pub fn brillouin_check(
    phi: &SlaterState,
    t: &OneBodyOperator,
    v: &TwoBodyOperator,
) -> Result<Vec<BrillouinResidual>, ManyBodyError> {
    check_dims(phi, t, v)?;
    let occ = phi.occupied();
    let unocc = phi.unoccupied();
    let mut out = Vec::with_capacity(occ.len() * unocc.len());
    for &i in occ {
        for &k in &unocc {
            let value = t.get(i, k) + occ.iter().map(|&j| v.get(i, j, k, j)).sum::<f64>();
            out.push(BrillouinResidual { hole: i, particle: k, value });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lalg::DenseMatrix;
    use crate::manybody::{fock_oracle, Basis, FockOp, FockOperator};

    #[test]
    fn diagonal_one_body_is_stable() {
        let phi = SlaterState::new(Arc::new(Basis::from_shells(&[("a", 3)])), vec![0, 1]).unwrap();
        let t = OneBodyOperator::from_entries(4, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0), (3, 3, 4.0)]).unwrap();
        let v = TwoBodyOperator::zeros(4);
        assert!(brillouin_check(&phi, &t, &v).unwrap().iter().all(|r| r.value == 0.0));
        assert_eq!(hf_energy(&phi, &t, &v).unwrap(), 3.0);
    }

    #[test]
    fn residual_matches_fock_space() {
        let phi = SlaterState::new(Arc::new(Basis::from_shells(&[("a", 3), ("b", 1)])), vec![1, 4, 0]).unwrap();
        let t = OneBodyOperator::from_entries(6, &[(1, 2, 0.3), (4, 5, -0.8), (0, 0, 1.1), (0, 3, 0.2)]).unwrap();
        let v = TwoBodyOperator::from_entries(
            6,
            &[([1, 4, 2, 4], 0.6), ([0, 1, 0, 3], -0.4), ([0, 4, 5, 1], 0.9), ([0, 1, 0, 1], 2.0)],
        )
        .unwrap();
        let id = DenseMatrix::identity(6);
        let residuals = brillouin_check(&phi, &t, &v).unwrap();
        assert!(residuals.iter().any(|r| r.value.abs() > 0.1));
        for r in residuals {
            let ops = [FockOp::Create(r.particle), FockOp::Annihilate(r.hole)];
            let bra = crate::manybody::FockState::slater(&phi).unwrap();
            let ket = bra.apply_string(&ops);
            let oracle = bra.dot(&ket.apply(&FockOperator::Hamiltonian(&t, &v)));
            assert!((r.value - oracle).abs() < 1e-14, "{r:?} vs {oracle}");
        }
        let e = hf_energy(&phi, &t, &v).unwrap();
        let oracle = fock_oracle(&phi, &id, &FockOperator::Hamiltonian(&t, &v)).unwrap();
        assert!((e - oracle).abs() < 1e-12);
    }
}
