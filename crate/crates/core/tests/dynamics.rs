mod common;

use common::*;
use proptest::prelude::*;
use qutrit_core::ed::{build_hamiltonian, time_evolve, PropagationOptions, SectorBasis, SectorState};
use qutrit_core::effective::{Boundary, LatticeModel};
use std::sync::Arc;

#[test]
fn single_photon_matches_three_site_oracle() {
    for alpha in [0.0, 0.7, 1.9] {
        let m = LatticeModel { alpha, ..LatticeModel::chain(3, Boundary::Open) };
        let b = Arc::new(SectorBasis::new(3, 1).unwrap());
        let h = build_hamiltonian(&m, &b).unwrap();
        let s0 = SectorState::fock(b, &[0, 1, 0]).unwrap();
        let times = time_grid(5.0, 0.1);
        // force the Krylov path too
        for dense_threshold in [usize::MAX, 0] {
            let opts = PropagationOptions { dense_threshold, ..PropagationOptions::for_model(&m) };
            let tr = time_evolve(&s0, &h, &times, &opts).unwrap();
            for (t, n) in times.iter().zip(&tr.density) {
                let o = three_site_oracle(1.0, *t);
                for j in 0..3 {
                    assert!((n[j] - o[j]).abs() < 1e-9, "t={t} j={j}: {} vs {}", n[j], o[j]);
                }
            }
        }
    }
}

#[test]
fn superfluid_light_cone_and_conservation() {
    let v = single_particle_front_speed(1.0) * std::f64::consts::SQRT_2;
    let tr = quench(&dyn_model(1.0, 0.0), &time_grid(6.0, 0.05));
    assert!(outside_cone(&tr, v) < 1e-3);
    for (norm, n) in tr.norm.iter().zip(&tr.total_number) {
        assert!((norm - 1.0).abs() < 1e-8 && (n - 4.0).abs() < 1e-8);
    }
}

#[test]
fn pair_hopping_spreads_pairs_faster() {
    let times = time_grid(6.0, 0.05);
    let sf = first_pair_arrival(&quench(&dyn_model(1.0, 0.0), &times)).expect("SF pairs arrive");
    let psf = first_pair_arrival(&quench(&dyn_model(1.0, 3.0), &times)).expect("PSF pairs arrive");
    assert!(psf < sf, "{psf} vs {sf}");
}

#[test]
fn front_speed_of_free_particle() {
    // group velocity max |dε/dk| = 2J, approached from below by a threshold front
    let v = single_particle_front_speed(1.0);
    assert!((v - 2.0).abs() < 0.1, "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn norm_and_number_conserved(alpha in 0.0f64..2.0, p in -2.0f64..2.0, delta in -3.0f64..3.0, dw in -1.0f64..1.0) {
        let m = LatticeModel { alpha, p_hop: p, delta, dw2: dw, ..LatticeModel::chain(8, Boundary::Periodic) };
        let b = Arc::new(SectorBasis::new(8, 5).unwrap());
        let h = build_hamiltonian(&m, &b).unwrap();
        let s0 = SectorState::fock(b, &[0, 1, 2, 1, 0, 1, 0, 0]).unwrap();
        let tr = time_evolve(&s0, &h, &time_grid(2.0, 0.5), &PropagationOptions::for_model(&m)).unwrap();
        for (norm, n) in tr.norm.iter().zip(&tr.total_number) {
            prop_assert!((norm - 1.0).abs() < 1e-8);
            prop_assert!((n - 5.0).abs() < 1e-8);
        }
    }
}
