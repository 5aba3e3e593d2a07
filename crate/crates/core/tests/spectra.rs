mod common;

use common::{dense_eigen, random_integrals, sum_matrix};
use gonogo_core::fermion::{fock_space_trace_mean, jordan_wigner, MolecularIntegrals, SpinOrbitalConvention};
use gonogo_core::hchain::{solve_hchain, ScfOptions};
use gonogo_core::pauli::{apply_sum, expectation, Pauli, PauliSum, PauliWord, StateVector};
use gonogo_core::spectra::{exact_overlap, ground_state, max_energy, LanczosOptions, Sector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn jw(ints: &MolecularIntegrals) -> PauliSum {
    jordan_wigner(ints, &SpinOrbitalConvention::interleaved(ints.n_orb())).unwrap()
}

fn random_sum(n: usize, terms: usize, seed: u64) -> PauliSum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut h = PauliSum::new(n).unwrap();
    for _ in 0..terms {
        let pairs: Vec<(usize, Pauli)> =
            (0..n).map(|q| (q, letters[rng.gen_range(0..4)])).filter(|(_, p)| *p != Pauli::I).collect();
        h.push(rng.gen_range(-1.0..1.0), PauliWord::from_letters(n, &pairs).unwrap()).unwrap();
    }
    h.simplify()
}

fn residual(h: &PauliSum, v: &StateVector, e: f64) -> f64 {
    let hv = apply_sum(h, v).unwrap();
    hv.amplitudes().iter().zip(v.amplitudes()).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt()
}

fn check_against_dense(h: &PauliSum) {
    let (vals, _) = dense_eigen(&sum_matrix(h));
    let opts = LanczosOptions::default();
    let lo = ground_state(h, &opts).unwrap();
    let hi = max_energy(h, &opts).unwrap();
    assert!(lo.converged && hi.converged);
    assert!((lo.value - vals[0]).abs() < 1e-9, "E0 {} vs {}", lo.value, vals[0]);
    assert!((hi.value - vals[vals.len() - 1]).abs() < 1e-9);
    let v = lo.vector.as_ref().unwrap();
    assert!(residual(h, v, lo.value) < opts.residual_tol);
    assert!((expectation(h, v).unwrap() - lo.value).abs() < 1e-9);
    let mean = h.trace_mean();
    assert!(lo.value <= mean + 1e-12 && mean <= hi.value + 1e-12);
}

#[test]
fn one_qubit_examples() {
    let z = PauliSum::from_terms(1, vec![(1.0, PauliWord::from_letters(1, &[(0, Pauli::Z)]).unwrap())]).unwrap();
    let r = ground_state(&z, &LanczosOptions::default()).unwrap();
    assert!((r.value + 1.0).abs() < 1e-12);
    assert!(
        (exact_overlap(r.vector.as_ref().unwrap(), &StateVector::basis(1, 1).unwrap()).unwrap() - 1.0).abs() < 1e-12
    );
    assert!((max_energy(&z, &LanczosOptions::default()).unwrap().value - 1.0).abs() < 1e-12);

    let x = PauliSum::from_terms(1, vec![(1.0, PauliWord::from_letters(1, &[(0, Pauli::X)]).unwrap())]).unwrap();
    let r = ground_state(&x, &LanczosOptions::default()).unwrap();
    let minus = StateVector::from_amplitudes(1, vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]).unwrap();
    assert!((exact_overlap(r.vector.as_ref().unwrap(), &minus).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn molecular_hamiltonians_match_dense() {
    for (n, spacing) in [(2, 1.4), (4, 1.8)] {
        check_against_dense(&jw(&solve_hchain(n, spacing, &ScfOptions::default()).unwrap().integrals));
    }
}

#[test]
fn random_hamiltonians_up_to_ten_qubits_match_dense() {
    for seed in 0..6 {
        check_against_dense(&random_sum(4, 12, seed));
    }
    check_against_dense(&random_sum(7, 40, 99));
    for (n_orb, seed) in [(3, 1), (4, 2), (5, 3)] {
        check_against_dense(&jw(&random_integrals(n_orb, 2, seed)));
    }
}

#[test]
fn values_are_seed_invariant() {
    let h = jw(&solve_hchain(4, 1.8, &ScfOptions::default()).unwrap().integrals);
    let a = ground_state(&h, &LanczosOptions { seed: 1, ..Default::default() }).unwrap();
    let b = ground_state(&h, &LanczosOptions { seed: 12345, ..Default::default() }).unwrap();
    assert!((a.value - b.value).abs() < 1e-9);
    let a = max_energy(&h, &LanczosOptions { seed: 1, ..Default::default() }).unwrap();
    let b = max_energy(&h, &LanczosOptions { seed: 9, ..Default::default() }).unwrap();
    assert!((a.value - b.value).abs() < 1e-9);
}

#[test]
fn same_seed_is_bitwise_reproducible() {
    let h = random_sum(6, 30, 4);
    let a = ground_state(&h, &LanczosOptions::default()).unwrap();
    let b = ground_state(&h, &LanczosOptions::default()).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.vector, b.vector);
}

#[test]
fn sector_restricted_ground_state() {
    let ints = solve_hchain(4, 1.8, &ScfOptions::default()).unwrap().integrals;
    let h = jw(&ints);
    let conv = SpinOrbitalConvention::interleaved(4);
    let m = sum_matrix(&h);
    let sector = Sector::closed_shell(&conv, 4);
    let idx: Vec<usize> = (0..256).filter(|&i| sector.contains(i)).collect();
    assert_eq!(idx.len(), 36);
    let sub = nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
    let (vals, _) = dense_eigen(&sub);
    let hf = StateVector::determinant(8, &conv.determinant_qubits(&[0, 1])).unwrap();
    let r = ground_state(&h, &LanczosOptions { start: Some(hf), sector: Some(sector), ..Default::default() }).unwrap();
    assert!((r.value - vals[0]).abs() < 1e-9);
    let v = r.vector.unwrap();
    assert!(v.amplitudes().iter().enumerate().all(|(i, a)| sector.contains(i) || a.norm() == 0.0));
}

#[test]
fn h2_hf_overlap_and_ordering() {
    let ints = solve_hchain(2, 1.4, &ScfOptions::default()).unwrap().integrals;
    let h = jw(&ints);
    let (vals, vecs) = dense_eigen(&sum_matrix(&h));
    let omega_dense = vecs.column(0)[12].norm_sqr();
    let r = ground_state(&h, &LanczosOptions::default()).unwrap();
    let hf = StateVector::basis(4, 12).unwrap();
    let omega = exact_overlap(r.vector.as_ref().unwrap(), &hf).unwrap();
    assert!((omega - omega_dense).abs() < 1e-9);
    assert!((0.98..=1.0).contains(&omega), "{omega}");
    let e_inf = fock_space_trace_mean(&ints);
    let e_max = max_energy(&h, &LanczosOptions::default()).unwrap().value;
    assert!(vals[0] < e_inf && e_inf < e_max);
    assert_eq!(exact_overlap(&hf, &hf).unwrap(), 1.0);
    assert_eq!(exact_overlap(&hf, &StateVector::basis(4, 3).unwrap()).unwrap(), 0.0);
}
