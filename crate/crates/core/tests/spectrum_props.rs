use std::sync::Arc;

use rand::Rng;

use projection_core::fixtures::{random_model, rng, two_shell_model, RandomModelSpec};
use projection_core::manybody::{Basis, Model, OneBodyOperator, SlaterState, TwoBodyOperator};
use projection_core::spectrum::{
    compare_routes, energy_spectrum, norm_kernel, Route, SpectrumRequest,
};

fn weights_sum(model: &Model, points: usize) -> f64 {
    let req = SpectrumRequest::new(model, None, points, Route::Both).unwrap();
    req.two_js.iter().zip(norm_kernel(&req).unwrap()).map(|(&tj, n)| 0.5 * (tj as f64 + 1.0) * n).sum()
}

#[test]
fn weights_are_complete() {
    assert!((weights_sum(&two_shell_model(), 48) - 1.0).abs() < 1e-9);
    let mut r = rng(30);
    for _ in 0..20 {
        let model = random_model(&mut r, RandomModelSpec::default());
        let sum = weights_sum(&model, 48);
        assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
    }
}

#[test]
fn quadrature_is_converged() {
    let mut r = rng(31);
    for _ in 0..10 {
        let model = random_model(&mut r, RandomModelSpec { jz_conserving: true, ..Default::default() });
        let coarse = energy_spectrum(&SpectrumRequest::new(&model, None, 32, Route::Lowdin).unwrap()).unwrap();
        let fine = energy_spectrum(&SpectrumRequest::new(&model, None, 64, Route::Lowdin).unwrap()).unwrap();
        for (a, b) in coarse.lines.iter().zip(&fine.lines) {
            assert!((a.norm_kernel - b.norm_kernel).abs() < 1e-10);
            if let (Some(x), Some(y)) = (a.energy_lowdin, b.energy_lowdin) {
                assert!((x - y).abs() < 1e-10 * x.abs().max(1.0), "2J={} {x} vs {y}", a.two_j);
            }
        }
    }
}

#[test]
fn constant_shift_moves_every_energy() {
    let model = two_shell_model();
    let c = 0.37;
    let shifted = Model::new(model.state.clone(), model.one_body.shifted(c), model.two_body.clone()).unwrap();
    let req = |m| SpectrumRequest::new(m, None, 48, Route::Both).unwrap();
    let base = energy_spectrum(&req(&model)).unwrap();
    let moved = energy_spectrum(&req(&shifted)).unwrap();
    let n = model.state.particle_count() as f64;
    for (a, b) in base.lines.iter().zip(&moved.lines) {
        assert_eq!(a.present(), b.present());
        if a.present() {
            assert!((b.energy_lowdin.unwrap() - a.energy_lowdin.unwrap() - c * n).abs() < 1e-10);
            assert!((b.energy_brillouin.unwrap() - a.energy_brillouin.unwrap() - c * n).abs() < 1e-10);
        }
    }
}

/// Rotation-invariant single-particle energies: every projected energy is `E_HF`.
#[test]
fn shell_energies_only_agree_across_routes() {
    let mut r = rng(32);
    for _ in 0..10 {
        let shells: Vec<(String, u32)> = (0..3).map(|s| (format!("s{s}"), [1u32, 3, 5][r.gen_range(0..3)])).collect();
        let basis = Arc::new(Basis::from_shells(&shells));
        let n = basis.len();
        let eps: Vec<f64> = (0..shells.len()).map(|_| r.gen_range(-2.0..2.0)).collect();
        let diag: Vec<_> = (0..n)
            .map(|id| {
                let shell = shells.iter().position(|(name, _)| *name == basis.orbital(id).shell).unwrap();
                (id, id, eps[shell])
            })
            .collect();
        let particles = r.gen_range(1..n.min(5));
        let occupied: Vec<usize> = rand::seq::index::sample(&mut r, n, particles).into_vec();
        let model = Model::new(
            SlaterState::new(basis, occupied).unwrap(),
            OneBodyOperator::from_entries(n, &diag).unwrap(),
            TwoBodyOperator::zeros(n),
        )
        .unwrap();
        let req = SpectrumRequest::new(&model, None, 48, Route::Both).unwrap();
        let cmp = compare_routes(&req).unwrap();
        assert!(cmp.warnings.is_empty());
        assert!(cmp.max_delta().unwrap() < 1e-12);
    }
}

#[test]
fn unstable_determinant_warns() {
    let mut r = rng(33);
    let model = random_model(&mut r, RandomModelSpec::default());
    let req = SpectrumRequest::new(&model, None, 48, Route::Both).unwrap();
    let res = energy_spectrum(&req).unwrap();
    assert!(res.brillouin_residual_max > 1e-6);
    assert!(!res.warnings.is_empty());
    let lowdin_only = energy_spectrum(&SpectrumRequest { route: Route::Lowdin, ..req.clone() }).unwrap();
    assert!(lowdin_only.warnings.is_empty());
}

#[test]
fn norm_kernel_does_not_depend_on_route() {
    let model = two_shell_model();
    let norms: Vec<Vec<f64>> = [Route::Brillouin, Route::Lowdin, Route::Both]
        .into_iter()
        .map(|route| {
            let res = energy_spectrum(&SpectrumRequest::new(&model, None, 48, route).unwrap()).unwrap();
            res.lines.iter().map(|l| l.norm_kernel).collect()
        })
        .collect();
    assert_eq!(norms[0], norms[1]);
    assert_eq!(norms[1], norms[2]);
}
