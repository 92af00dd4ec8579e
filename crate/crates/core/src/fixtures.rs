//! Reproducible models for tests, benchmarks and the acceptance suite.
//!
//! Randomness comes from a ChaCha stream seeded by `PROJECT_SEED` when set.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angmom::clebsch_gordan;
use crate::lalg::DenseMatrix;
use crate::manybody::{
    Basis, FockOperator, FockState, Model, OneBodyOperator, SlaterState, TwoBodyOperator,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// `PROJECT_SEED` if it parses as an integer, else [`DEFAULT_SEED`].
pub fn seed() -> u64 {
    std::env::var("PROJECT_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// Independent generator per test stream.
pub fn rng(stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy)]
pub struct RandomModelSpec {
    pub max_basis: usize,
    pub max_particles: usize,
    /// Restrict `T` and `V` to elements that conserve `J_z`.
    pub jz_conserving: bool,
    /// Probability that a given canonical two-body element is nonzero.
    pub two_body_density: f64,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        Self { max_basis: 8, max_particles: 4, jz_conserving: false, two_body_density: 0.3 }
    }
}

/// Full shells with `2j` drawn from {1, 3, 5} until the basis is full.
fn random_basis(rng: &mut impl Rng, max_basis: usize) -> Basis {
    let mut shells: Vec<(String, u32)> = Vec::new();
    let mut size = 0;
    loop {
        let fits: Vec<u32> = [1u32, 3, 5].into_iter().filter(|t| size + (*t as usize) < max_basis).collect();
        if fits.is_empty() || (size >= 4 && rng.gen_bool(0.3)) {
            break;
        }
        let two_j = *fits.choose(rng).expect("non-empty");
        shells.push((format!("s{}", shells.len()), two_j));
        size += two_j as usize + 1;
    }
    Basis::from_shells(&shells)
}

pub fn random_model(rng: &mut impl Rng, spec: RandomModelSpec) -> Model {
    let basis = Arc::new(random_basis(rng, spec.max_basis));
    let n_basis = basis.len();
    let n = rng.gen_range(1..=spec.max_particles.min(n_basis - 1));
    let mut ids: Vec<usize> = (0..n_basis).collect();
    ids.shuffle(rng);
    let state = SlaterState::new(basis.clone(), ids[..n].to_vec()).expect("valid occupation");
    let two_m = |id: usize| basis.orbital(id).label.two_m();

    let mut one = Vec::new();
    for i in 0..n_basis {
        for k in i..n_basis {
            if spec.jz_conserving && two_m(i) != two_m(k) {
                continue;
            }
            if i == k || rng.gen_bool(0.5) {
                one.push((i, k, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    let mut two = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..n_basis).flat_map(|p| (p + 1..n_basis).map(move |q| (p, q))).collect();
    for (a, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[a..] {
            if spec.jz_conserving && two_m(p) + two_m(q) != two_m(r) + two_m(s) {
                continue;
            }
            if rng.gen_bool(spec.two_body_density) {
                two.push(([p, q, r, s], rng.gen_range(-1.0..1.0)));
            }
        }
    }
    Model::new(
        state,
        OneBodyOperator::from_entries(n_basis, &one).expect("closed by construction"),
        TwoBodyOperator::from_entries(n_basis, &two).expect("closed by construction"),
    )
    .expect("consistent dimensions")
}

/// Random angle strictly inside `(0, pi)`.
pub fn random_beta(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.05..PI - 0.05)
}

/// `1 + 0.6 * noise`, kept away from singular occupied blocks by the diagonal.
pub fn random_invertible(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, k| if i == k { 1.0 } else { 0.0 } + 0.6 * rng.gen_range(-1.0..1.0))
}

/// Single-particle energies of the two-shell fixture.
pub const TWO_SHELL_EPSILON_A: f64 = 1.0;
pub const TWO_SHELL_EPSILON_B: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairConfig {
    AA,
    AB,
    BB,
}

/// `(2J, bra, ket, G)`: strength of `|bra; JM><ket; JM|` summed over `M`.
const TWO_SHELL_COUPLINGS: [(u32, PairConfig, PairConfig, f64); 7] = [
    (2, PairConfig::AB, PairConfig::AB, -1.3),
    (4, PairConfig::AB, PairConfig::AB, 0.7),
    (4, PairConfig::AA, PairConfig::AB, 0.4),
    (4, PairConfig::AA, PairConfig::AA, 0.2),
    (0, PairConfig::AA, PairConfig::AA, -2.0),
    (0, PairConfig::AA, PairConfig::BB, 0.3),
    (0, PairConfig::BB, PairConfig::BB, -1.0),
];

fn two_shell_basis() -> Arc<Basis> {
    Arc::new(Basis::from_shells(&[("A", 3), ("B", 1)]))
}

/// Normalized `|cfg; J M>` in the Fock space of the two-shell basis.
fn coupled_pair(basis: &Basis, cfg: PairConfig, two_j: u32, two_m: i32) -> FockState {
    let (s1, j1, s2, j2, identical) = match cfg {
        PairConfig::AA => ("A", 3, "A", 3, true),
        PairConfig::AB => ("A", 3, "B", 1, false),
        PairConfig::BB => ("B", 1, "B", 1, true),
    };
    let vacuum = FockState::vacuum(basis.len()).expect("small basis");
    let mut out = FockState::zeros(basis.len()).expect("small basis");
    for m1 in (-(j1 as i32)..=j1 as i32).step_by(2) {
        for m2 in (-(j2 as i32)..=j2 as i32).step_by(2) {
            let cg = clebsch_gordan(j1, m1, j2, m2, two_j, two_m).unwrap_or(0.0);
            if cg == 0.0 {
                continue;
            }
            let (p, q) = (basis.find(s1, m1).expect("in basis"), basis.find(s2, m2).expect("in basis"));
            out.add_scaled(cg, &vacuum.create(q).create(p));
        }
    }
    if identical {
        out = out.scaled(std::f64::consts::FRAC_1_SQRT_2);
    }
    out
}

/// `<0| c_q c_p |psi>`.
fn pair_amplitude(psi: &FockState, p: usize, q: usize) -> f64 {
    psi.annihilate(p).annihilate(q).amplitude(0)
}

/// Rotationally invariant two-shell model: `j = 3/2` shell `A`, `j = 1/2`
/// shell `B`, one particle in each with `m = 1/2` (`M = 1`).
pub fn two_shell_model() -> Model {
    let basis = two_shell_basis();
    let n = basis.len();
    let one: Vec<(usize, usize, f64)> = (0..n)
        .map(|i| {
            let eps = if basis.orbital(i).shell == "A" { TWO_SHELL_EPSILON_A } else { TWO_SHELL_EPSILON_B };
            (i, i, eps)
        })
        .collect();
    let mut two = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            for r in 0..n {
                for s in r + 1..n {
                    let mut value = 0.0;
                    for &(two_j, bra, ket, g) in &TWO_SHELL_COUPLINGS {
                        for two_m in (-(two_j as i32)..=two_j as i32).step_by(2) {
                            let b = coupled_pair(&basis, bra, two_j, two_m);
                            let k = coupled_pair(&basis, ket, two_j, two_m);
                            value += g * pair_amplitude(&b, p, q) * pair_amplitude(&k, r, s);
                            if bra != ket {
                                value += g * pair_amplitude(&k, p, q) * pair_amplitude(&b, r, s);
                            }
                        }
                    }
                    if value.abs() > 1e-15 {
                        two.push(([p, q, r, s], value));
                    }
                }
            }
        }
    }
    let occupied = vec![basis.find("A", 1).expect("in basis"), basis.find("B", 1).expect("in basis")];
    Model::new(
        SlaterState::new(basis, occupied).expect("valid"),
        OneBodyOperator::from_entries(n, &one).expect("diagonal"),
        // the pair amplitudes are Hermitian by construction up to rounding
        TwoBodyOperator::from_entries(n, &symmetrize(two)).expect("hermitian"),
    )
    .expect("consistent")
}

fn symmetrize(entries: Vec<([usize; 4], f64)>) -> Vec<([usize; 4], f64)> {
    use std::collections::BTreeMap;
    let table: BTreeMap<[usize; 4], f64> = entries.iter().copied().collect();
    entries
        .into_iter()
        .filter(|([p, q, r, s], _)| (p, q) <= (r, s))
        .map(|([p, q, r, s], v)| {
            let partner = table.get(&[r, s, p, q]).copied().unwrap_or(0.0);
            ([p, q, r, s], 0.5 * (v + partner))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgComponent {
    pub two_j: u32,
    /// `|<j_A m_A j_B m_B | J M>|^2`, the weight of `J` in the intrinsic state.
    pub weight: f64,
    /// `<J M|H|J M>` of the normalized coupled state.
    pub energy: f64,
}

/// Angular-momentum decomposition of the two-shell intrinsic state by
/// Clebsch-Gordan coupling, with energies from Fock-space expectation values.
pub fn two_shell_cg_oracle() -> Vec<CgComponent> {
    let model = two_shell_model();
    let basis = model.basis();
    [2u32, 4]
        .into_iter()
        .map(|two_j| {
            let cg = clebsch_gordan(3, 1, 1, 1, two_j, 2).expect("valid coupling");
            let psi = coupled_pair(basis, PairConfig::AB, two_j, 2);
            let h = psi.apply(&FockOperator::Hamiltonian(&model.one_body, &model.two_body));
            CgComponent { two_j, weight: cg * cg, energy: psi.dot(&h) / psi.dot(&psi) }
        })
        .collect()
}

/// Energies the two-shell couplings were chosen to produce for `J = 1, 2`.
pub const TWO_SHELL_ENERGIES: [(u32, f64); 2] = [(2, 0.2), (4, 2.2)];

/// 20 orbitals (`j = 7/2, 5/2, 3/2, 1/2`), 8 particles in the low-`|m|` states.
pub fn twenty_orbital_model(rng: &mut impl Rng) -> Model {
    let basis = Arc::new(Basis::from_shells(&[("g", 7), ("d", 5), ("p", 3), ("s", 1)]));
    let mut occupied = Vec::new();
    for (shell, ms) in [("g", &[1, -1, 3, -3][..]), ("d", &[1, -1][..]), ("p", &[1, -1][..])] {
        for &m in ms {
            occupied.push(basis.find(shell, m).expect("in basis"));
        }
    }
    let n_basis = basis.len();
    let state = SlaterState::new(basis, occupied).expect("valid");
    let one: Vec<_> = (0..n_basis).map(|i| (i, i, rng.gen_range(-1.0..1.0))).collect();
    let mut table = std::collections::BTreeMap::new();
    while table.len() < 400 {
        let mut idx: Vec<usize> = (0..n_basis).collect();
        idx.shuffle(rng);
        let (pq, rs) = ((idx[0].min(idx[1]), idx[0].max(idx[1])), (idx[2].min(idx[3]), idx[2].max(idx[3])));
        let (lo, hi) = (pq.min(rs), pq.max(rs));
        table.insert([lo.0, lo.1, hi.0, hi.1], rng.gen_range(-1.0..1.0));
    }
    let two: Vec<_> = table.into_iter().collect();
    let two = TwoBodyOperator::from_entries(n_basis, &two).expect("distinct canonical keys");
    Model::new(state, OneBodyOperator::from_entries(n_basis, &one).expect("diagonal"), two).expect("consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::brillouin_check;

    #[test]
    fn coupled_pairs_are_normalized() {
        let basis = two_shell_basis();
        for (cfg, two_js) in [(PairConfig::AA, &[0u32, 4][..]), (PairConfig::AB, &[2, 4][..]), (PairConfig::BB, &[0][..])] {
            for &two_j in two_js {
                let psi = coupled_pair(&basis, cfg, two_j, 0.min(two_j as i32));
                assert!((psi.dot(&psi) - 1.0).abs() < 1e-14, "{cfg:?} 2J={two_j}");
            }
        }
    }

    #[test]
    fn two_shell_oracle_energies() {
        let oracle = two_shell_cg_oracle();
        for (comp, (two_j, e)) in oracle.iter().zip(TWO_SHELL_ENERGIES) {
            assert_eq!(comp.two_j, two_j);
            assert!((comp.energy - e).abs() < 1e-12, "{comp:?}");
        }
        assert!((oracle[0].weight - 0.25).abs() < 1e-14);
        assert!((oracle[1].weight - 0.75).abs() < 1e-14);
    }

    #[test]
    fn two_shell_model_is_stable() {
        let m = two_shell_model();
        assert_eq!(m.state.total_two_m(), 2);
        let residuals = brillouin_check(&m.state, &m.one_body, &m.two_body).unwrap();
        assert!(residuals.iter().all(|r| r.value == 0.0));
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let a: f64 = rng(3).gen();
        let b: f64 = rng(3).gen();
        let c: f64 = rng(4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn twenty_orbital_shape() {
        let m = twenty_orbital_model(&mut rng(1));
        assert_eq!(m.basis().len(), 20);
        assert_eq!(m.state.particle_count(), 8);
        assert_eq!(m.state.total_two_m(), 0);
    }
}
