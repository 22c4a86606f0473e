mod common;

use common::*;
use proptest::prelude::*;
use qutrit_core::ed::{
    alpha0_ground_sector, build_hamiltonian, correlators, lowest_eigenpair, solve_ground_state, stability_check,
    sublattice_gauge_check, EigenOptions, HamiltonianOperator, MatrixFreeHamiltonian, SectorBasis,
};
use qutrit_core::effective::{Boundary, LatticeModel};
use qutrit_core::linalg::eigvalsh_sorted;
use rand::{Rng, SeedableRng};

use rand_chacha::ChaCha8Rng;

fn alpha0(l: usize) -> LatticeModel {
    LatticeModel { alpha: 0.0, ..ring(l) }
}

#[test]
fn alpha_zero_energies_match_closed_form() {
    let (l, n) = (12, 4);
    let mut seen = std::collections::BTreeSet::new();
    for k in 0..20 {
        let delta = -5.5 + 4.0 * k as f64 / 19.0;
        let g = solve_ground_state(&LatticeModel { delta, ..alpha0(l) }, n, &EigenOptions::default()).unwrap();
        let exact = alpha0_ground_sector(n, l, delta, 1.0).unwrap();
        assert!((g.energy - exact.energy).abs() < 1e-10, "Δ = {delta}: {} vs {}", g.energy, exact.energy);
        let np = g.state.mean_pair_number();
        assert!((np - np.round()).abs() < 1e-8 && np.round() as usize == exact.n_pairs);
        seen.insert(exact.n_pairs);
    }
    assert_eq!(seen.len(), 3, "sweep should visit all pair numbers");
}

#[test]
fn paired_cluster_correlator_small() {
    // pairs bind into one block when mobile singles push them together:
    // L⟨n_p(0)n_p(r)⟩ = Np, Np − 1, ..., 0
    for (n, np) in [(4, 1), (6, 2)] {
        let delta = delta_for_pairs(n, 12, np);
        let (_, c) = ground_correlators(&LatticeModel { delta, ..alpha0(12) }, n);
        for (r, v) in c.pair_density.iter().enumerate() {
            let expect = np.saturating_sub(r) as f64;
            assert!((v - expect).abs() < 1e-8, "N = {n}, r = {r}: {v}");
        }
    }
}

#[test]
#[ignore = "L = 24 sector has 5.6M states; minutes and ~1.5 GB"]
fn paired_cluster_correlator_full_size() {
    let m = LatticeModel { delta: -3.7, ..alpha0(24) };
    let (_, c) = ground_correlators(&m, 8);
    for (r, v) in c.pair_density.iter().enumerate() {
        let expect = 3usize.saturating_sub(r) as f64;
        assert!((v - expect).abs() < 1e-6, "r = {r}: {v}");
    }
}

#[test]
fn iterative_matches_dense_on_small_sectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lanczos_only = EigenOptions { dense_threshold: 0, ..Default::default() };
    for _ in 0..25 {
        let l = rng.gen_range(1..=6);
        let m = random_model(&mut rng, l);
        for n in 0..=4.min(2 * l) {
            let b = SectorBasis::new(l, n).unwrap();
            let h = build_hamiltonian(&m, &b).unwrap();
            let dense = eigvalsh_sorted(h.to_dense())[0];
            let sparse = lowest_eigenpair(&h, &lanczos_only).unwrap().value;
            assert!((dense - sparse).abs() < 1e-10, "L={l} N={n}: {dense} vs {sparse} for {m:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn hamiltonian_is_symmetric(seed in any::<u64>(), l in 2usize..8, n in 1usize..6) {
        prop_assume!(n <= 2 * l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, l);
        let b = SectorBasis::new(l, n).unwrap();
        let h = build_hamiltonian(&m, &b).unwrap();
        let d = b.dim();
        let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut hu, mut hv) = (vec![0.0; d], vec![0.0; d]);
        h.apply(&u, &mut hu);
        h.apply(&v, &mut hv);
        let lhs: f64 = u.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let rhs: f64 = hu.iter().zip(&v).map(|(a, b)| a * b).sum();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * nu * nv * h.norm_bound().max(1.0));
        let mf = MatrixFreeHamiltonian::new(&m, &b).unwrap();
        let mut hv2 = vec![0.0; d];
        mf.apply(&v, &mut hv2);
        prop_assert!(hv.iter().zip(&hv2).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn stability_signs() {
    let opts = EigenOptions::default();
    let separated = stability_check(&LatticeModel { delta: -3.7, ..alpha0(12) }, 4, &opts).unwrap();
    assert!(separated < 0.0, "{separated}");
    let sf = stability_check(&ring(12), 4, &opts).unwrap();
    assert!(sf > 0.0, "{sf}");
}

#[test]
fn gauge_equivalences() {
    let m = LatticeModel { alpha: 1.3, p_hop: 0.5, ..LatticeModel::chain(6, Boundary::Open) };
    let r = sublattice_gauge_check(&m, 3).unwrap();
    assert!(r.hop_spectrum_deviation < 1e-10 && r.hop_map_defect < 1e-12);
    assert!(r.pair_spectrum_deviation < 1e-10 && r.pair_map_defect < 1e-12);
    let even = LatticeModel { alpha: 0.7, p_hop: -1.1, delta: 0.3, dw2: 0.4, ..ring(8) };
    assert!(sublattice_gauge_check(&even, 4).unwrap().max_deviation() < 1e-10);
    assert!(sublattice_gauge_check(&ring(5), 2).is_err());
}

#[test]
fn ground_state_regimes() {
    // Mott: flat density correlations at unit filling
    let (_, c) = ground_correlators(&LatticeModel { delta: 20.0, ..ring(10) }, 10);
    assert!(c.density_density[1..].iter().all(|v| (v - 1.0).abs() < 5e-2));
    // cluster regime decays, superfluid plateaus near n
    let n = 4.0 / 12.0;
    let (_, cl) = ground_correlators(&LatticeModel { alpha: 1.5, ..ring(12) }, 4);
    let (_, sf) = ground_correlators(&ring(12), 4);
    assert!(cl.density_density.last().unwrap() / n < 0.5 * n);
    assert!(sf.density_density.last().unwrap() / n > 0.5 * n);
    // strong pair hopping: pair coherence exceeds single-particle coherence
    let (_, psf) = ground_correlators(&LatticeModel { p_hop: 10.0, ..ring(12) }, 4);
    assert!(psf.g1_pair[1] > psf.g1[1] && psf.g1_pair[3] > 10.0 * psf.g1[3]);
}

#[test]
fn negative_pair_hopping_staggering() {
    let stagger = |p: f64| {
        let (_, c) = ground_correlators(&LatticeModel { p_hop: p, ..ring(12) }, 4);
        c.g1_pair[1..].windows(2).all(|w| w[0] * w[1] < 0.0)
    };
    assert!(stagger(-2.0));
    assert!(!stagger(-1.8));
}

#[test]
fn translation_averaging_is_reference_independent() {
    // an open chain built as a ring without the closing bond breaks the averaging;
    // a ring state gives the same answer for every reference site
    let m = LatticeModel { alpha: 1.2, p_hop: 0.3, ..ring(7) };
    let g = solve_ground_state(&m, 3, &EigenOptions::default()).unwrap();
    let c = correlators(&g.state, Boundary::Periodic);
    let dens = g.state.density();
    assert!(dens.iter().all(|d| (d - 3.0 / 7.0).abs() < 1e-8));
    assert!((c.g1[0] - 3.0 / 7.0).abs() < 1e-8);
}
