mod common;

use common::*;
use num_complex::Complex64;
use vortexcert::clifford::{MajoranaIndex, Polynomial};
use vortexcert::fock::{generator_matrix, to_matrix};
use vortexcert::lattice::{build_lattice, default_plane, reflection_data, Boundary};
use vortexcert::model::{build_hamiltonian, vortex_operator};

fn idx(v: &[usize]) -> Vec<MajoranaIndex> {
    v.iter().map(|&i| MajoranaIndex(i as u32)).collect()
}

#[test]
fn generators_match_kronecker_construction() {
    for modes in 1..=4 {
        for i in 0..2 * modes {
            let ours = generator_matrix(MajoranaIndex(i as u32), modes)
                .unwrap()
                .to_dense()
                .unwrap();
            assert!(
                max_abs_diff(&ours, &majorana(i, modes)) == 0.0,
                "c_{i} on {modes} modes"
            );
        }
    }
}

#[test]
fn diamond_geometry_matches_hand_layout() {
    let lat = build_lattice(3, 3, Boundary::Open).unwrap();
    let corners: Vec<[usize; 4]> = (0..4).map(|i| lat.corners(i).unwrap().map(|m| m.get())).collect();
    assert_eq!(corners, DIAMOND_ISLANDS);
    let mut bonds: Vec<(usize, usize)> = lat.bonds().iter().map(|b| (b.from.get(), b.to.get())).collect();
    bonds.sort();
    let mut expected = DIAMOND_BONDS.to_vec();
    expected.sort();
    assert_eq!(bonds, expected);
    assert_eq!(lat.octet(&lat.octagons()[0]).map(|m| m.get()), DIAMOND_OCTET);
    let r = reflection_data(&lat, default_plane(&lat)).unwrap();
    let sigma: Vec<usize> = r.map.sigma().iter().map(|m| m.get()).collect();
    assert_eq!(sigma, DIAMOND_SIGMA);
}

#[test]
fn hamiltonian_matches_oracle() {
    let lat = build_lattice(3, 3, Boundary::Open).unwrap();
    for lambda in [0.0, 0.1, 0.5] {
        let h = build_hamiltonian(&lat, Complex64::new(lambda, 0.0));
        let ours = to_matrix(&h, 8).unwrap().to_dense().unwrap();
        assert!(max_abs_diff(&ours, &diamond_hamiltonian(lambda)) < 1e-15);
    }
}

#[test]
fn loop_operator_matches_oracle() {
    let lat = build_lattice(3, 3, Boundary::Open).unwrap();
    let v = vortex_operator::<Complex64>(&lat, &lat.octagons()[0], None).unwrap();
    let ours = to_matrix(&v.w, 8).unwrap().to_dense().unwrap();
    assert_eq!(max_abs_diff(&ours, &diamond_loop()), 0.0);
}

#[test]
fn reflection_matches_oracle() {
    let lat = build_lattice(3, 3, Boundary::Open).unwrap();
    let r = reflection_data(&lat, default_plane(&lat)).unwrap();
    let coef = Complex64::new(0.3, -0.7);
    for support in [vec![0usize, 1], vec![2, 3, 4, 7], vec![0, 8, 11], vec![1, 4]] {
        let a = Polynomial::monomial(&idx(&support), coef);
        let ours = to_matrix(&a.reflect(&r.map).unwrap(), 8).unwrap().to_dense().unwrap();
        let oracle = reflected_monomial(coef, &support, &DIAMOND_SIGMA, 8);
        assert!(max_abs_diff(&ours, &oracle) < 1e-15, "{support:?}");
    }
}

#[test]
fn single_island_spectrum_from_oracle() {
    let oracle = eigh(&(product(&[0, 1, 2, 3], 2) * c(-1.0, 0.0)));
    for (e, x) in oracle.values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert!((e - x).abs() < 1e-14);
    }
    let ours = Polynomial::monomial(&idx(&[0, 1, 2, 3]), Complex64::new(-1.0, 0.0));
    let s = vortexcert::spectral::dense_spectrum(&to_matrix(&ours, 2).unwrap()).unwrap();
    for (a, b) in s.eigenvalues.iter().zip(&oracle.values) {
        assert!((a - b).abs() < 1e-14);
    }
}
