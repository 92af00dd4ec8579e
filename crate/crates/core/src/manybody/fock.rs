//! Brute-force Fock space over at most [`FOCK_MAX_MODES`] orbitals.
//!
//! Basis states are occupation bit patterns; `c+_p` picks up the sign
//! `(-1)^(number of occupied modes below p)`. Test-only machinery.

use crate::config::FOCK_MAX_MODES;
use crate::lalg::DenseMatrix;

use super::{ManyBodyError, OneBodyOperator, SlaterState, TwoBodyOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockOp {
    Create(usize),
    Annihilate(usize),
}

/// Operator `X` in `<Phi|X U|Phi>`.
#[derive(Debug, Clone, Copy)]
pub enum FockOperator<'a> {
    Identity,
    /// Product of ladder operators, leftmost applied last.
    String(&'a [FockOp]),
    OneBody(&'a OneBodyOperator),
    TwoBody(&'a TwoBodyOperator),
    Hamiltonian(&'a OneBodyOperator, &'a TwoBodyOperator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    modes: usize,
    amplitudes: Vec<f64>,
}

impl FockState {
    pub fn vacuum(modes: usize) -> Result<Self, ManyBodyError> {
        if modes > FOCK_MAX_MODES {
            return Err(ManyBodyError::SizeLimitExceeded { n: modes, max: FOCK_MAX_MODES });
        }
        let mut amplitudes = vec![0.0; 1 << modes];
        amplitudes[0] = 1.0;
        Ok(Self { modes, amplitudes })
    }

    pub fn zeros(modes: usize) -> Result<Self, ManyBodyError> {
        let mut s = Self::vacuum(modes)?;
        s.amplitudes[0] = 0.0;
        Ok(s)
    }

    /// Dense vector of the given amplitudes; length must be `2^modes`.
    pub fn from_amplitudes(modes: usize, amplitudes: Vec<f64>) -> Result<Self, ManyBodyError> {
        let s = Self::zeros(modes)?;
        if amplitudes.len() != s.amplitudes.len() {
            return Err(ManyBodyError::DimensionMismatch(format!(
                "{} amplitudes for {} modes",
                amplitudes.len(),
                modes
            )));
        }
        Ok(Self { modes, amplitudes })
    }

    /// `a+_1 .. a+_n |0>`.
    pub fn slater(phi: &SlaterState) -> Result<Self, ManyBodyError> {
        let mut s = Self::vacuum(phi.basis().len())?;
        for &a in phi.occupied().iter().rev() {
            s = s.create(a);
        }
        Ok(s)
    }

    /// `U a+_1 .. a+_n |0> = prod_i (sum_p U_{p a_i} c+_p) |0>`.
    pub fn transformed_slater(phi: &SlaterState, u: &DenseMatrix) -> Result<Self, ManyBodyError> {
        let modes = phi.basis().len();
        if u.rows() != modes || u.cols() != modes {
            return Err(ManyBodyError::DimensionMismatch(format!("transformation is {}x{}", u.rows(), u.cols())));
        }
        let mut s = Self::vacuum(modes)?;
        for &a in phi.occupied().iter().rev() {
            let mut next = Self::zeros(modes)?;
            for p in 0..modes {
                let w = u[(p, a)];
                if w != 0.0 {
                    next.add_scaled(w, &s.create(p));
                }
            }
            s = next;
        }
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, pattern: usize) -> f64 {
        self.amplitudes[pattern]
    }

    fn sign_below(pattern: usize, p: usize) -> f64 {
        if (pattern & ((1 << p) - 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn create(&self, p: usize) -> Self {
        assert!(p < self.modes, "mode {p} out of range");
        let mut out = vec![0.0; self.amplitudes.len()];
        for (pattern, &amp) in self.amplitudes.iter().enumerate() {
            if amp != 0.0 && pattern & (1 << p) == 0 {
                out[pattern | (1 << p)] += Self::sign_below(pattern, p) * amp;
            }
        }
        Self { modes: self.modes, amplitudes: out }
    }

    pub fn annihilate(&self, p: usize) -> Self {
        assert!(p < self.modes, "mode {p} out of range");
        let mut out = vec![0.0; self.amplitudes.len()];
        for (pattern, &amp) in self.amplitudes.iter().enumerate() {
            if amp != 0.0 && pattern & (1 << p) != 0 {
                out[pattern & !(1 << p)] += Self::sign_below(pattern, p) * amp;
            }
        }
        Self { modes: self.modes, amplitudes: out }
    }

    /// Applies `ops[0] ops[1] .. ops[last]`, rightmost first.
    pub fn apply_string(&self, ops: &[FockOp]) -> Self {
        ops.iter().rev().fold(self.clone(), |s, op| match *op {
            FockOp::Create(p) => s.create(p),
            FockOp::Annihilate(p) => s.annihilate(p),
        })
    }

    pub fn add_scaled(&mut self, w: f64, other: &Self) {
        assert_eq!(self.modes, other.modes);
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += w * b;
        }
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self { modes: self.modes, amplitudes: self.amplitudes.iter().map(|a| w * a).collect() }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// `sum_pq T_pq c+_p c_q |self>`.
    pub fn apply_one_body(&self, t: &OneBodyOperator) -> Self {
        let mut out = self.scaled(0.0);
        for q in 0..self.modes {
            let lowered = self.annihilate(q);
            for p in 0..self.modes {
                let w = t.get(p, q);
                if w != 0.0 {
                    out.add_scaled(w, &lowered.create(p));
                }
            }
        }
        out
    }

    /// `sum_{p<q, r<s} <pq|V|rs> c+_p c+_q c_s c_r |self>`.
    pub fn apply_two_body(&self, v: &TwoBodyOperator) -> Self {
        let mut out = self.scaled(0.0);
        for ([p, q, r, s], w) in v.iter_canonical() {
            let term = self.annihilate(r).annihilate(s).create(q).create(p);
            out.add_scaled(w, &term);
        }
        out
    }

    pub fn apply(&self, x: &FockOperator<'_>) -> Self {
        match *x {
            FockOperator::Identity => self.clone(),
            FockOperator::String(ops) => self.apply_string(ops),
            FockOperator::OneBody(t) => self.apply_one_body(t),
            FockOperator::TwoBody(v) => self.apply_two_body(v),
            FockOperator::Hamiltonian(t, v) => {
                let mut out = self.apply_one_body(t);
                out.add_scaled(1.0, &self.apply_two_body(v));
                out
            }
        }
    }
}

/// `<Phi|X U|Phi>` by explicit Fock-space vectors.
pub fn fock_oracle(phi: &SlaterState, u: &DenseMatrix, x: &FockOperator<'_>) -> Result<f64, ManyBodyError> {
    let modes = phi.basis().len();
    if let FockOperator::OneBody(t) | FockOperator::Hamiltonian(t, _) = x {
        if t.dim() != modes {
            return Err(ManyBodyError::DimensionMismatch(format!("one-body operator acts on {}", t.dim())));
        }
    }
    if let FockOperator::TwoBody(v) | FockOperator::Hamiltonian(_, v) = x {
        if v.dim() != modes {
            return Err(ManyBodyError::DimensionMismatch(format!("two-body operator acts on {}", v.dim())));
        }
    }
    if let FockOperator::String(ops) = x {
        if let Some(p) = ops.iter().map(|op| match *op {
            FockOp::Create(p) | FockOp::Annihilate(p) => p,
        }).find(|&p| p >= modes)
        {
            return Err(ManyBodyError::UnknownOrbital { id: p, len: modes });
        }
    }
    let bra = FockState::slater(phi)?;
    let ket = FockState::transformed_slater(phi, u)?;
    Ok(bra.dot(&ket.apply(x)))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::manybody::Basis;

    #[test]
    fn overlap_at_identity() {
        let phi = SlaterState::new(Arc::new(Basis::from_shells(&[("a", 3), ("b", 1)])), vec![4, 1, 2]).unwrap();
        let u = DenseMatrix::identity(6);
        assert!((fock_oracle(&phi, &u, &FockOperator::Identity).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn anticommutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let modes = 5;
        let v = FockState::from_amplitudes(modes, (0..1 << modes).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        for i in 0..modes {
            for j in 0..modes {
                let mut lhs = v.apply_string(&[FockOp::Create(i), FockOp::Annihilate(j)]);
                lhs.add_scaled(1.0, &v.apply_string(&[FockOp::Annihilate(j), FockOp::Create(i)]));
                let want = if i == j { v.clone() } else { v.scaled(0.0) };
                assert!(lhs.max_abs_diff(&want) < 1e-15, "i={i} j={j}");
                let mut cc = v.apply_string(&[FockOp::Create(i), FockOp::Create(j)]);
                cc.add_scaled(1.0, &v.apply_string(&[FockOp::Create(j), FockOp::Create(i)]));
                assert!(cc.amplitudes().iter().all(|a| a.abs() < 1e-15));
            }
        }
    }

    #[test]
    fn size_limit() {
        assert_eq!(FockState::vacuum(13), Err(ManyBodyError::SizeLimitExceeded { n: 13, max: 12 }));
    }

    #[test]
    fn slater_sign_follows_creation_order() {
        let basis = Arc::new(Basis::from_shells(&[("a", 1), ("b", 1)]));
        let forward = FockState::slater(&SlaterState::new(basis.clone(), vec![0, 2]).unwrap()).unwrap();
        let backward = FockState::slater(&SlaterState::new(basis, vec![2, 0]).unwrap()).unwrap();
        assert_eq!(forward.amplitude(0b101), 1.0);
        assert_eq!(backward.amplitude(0b101), -1.0);
    }
}
