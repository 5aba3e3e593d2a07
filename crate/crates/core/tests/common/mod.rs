//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use gonogo_core::fermion::MolecularIntegrals;
use gonogo_core::pauli::{Pauli, PauliSum, PauliWord, StateVector};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_matrix(p: Pauli) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match p {
        Pauli::I => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product with qubit 0 as the leftmost factor.
pub fn word_matrix(w: &PauliWord) -> CMat {
    let mut m = CMat::from_element(1, 1, c(1.0, 0.0));
    for p in w.letters() {
        m = m.kronecker(&pauli_matrix(p));
    }
    m
}

pub fn sum_matrix(h: &PauliSum) -> CMat {
    let dim = 1usize << h.n_qubits();
    let mut m = CMat::zeros(dim, dim);
    for (coef, w) in h.terms() {
        m += word_matrix(w) * c(*coef, 0.0);
    }
    m
}

pub fn state_column(s: &StateVector) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(s.amplitudes())
}

/// Ascending eigenvalues and eigenvectors (columns) of a Hermitian matrix.
pub fn dense_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

/// Fermionic annihilation on spin-orbital `j` of a basis index; the
/// occupation of mode `j` sits at bit `n - 1 - j` and the sign counts
/// occupied modes below `j`.
fn annihilate(n: usize, j: usize, b: usize) -> Option<(usize, f64)> {
    let bit = 1usize << (n - 1 - j);
    if b & bit == 0 {
        return None;
    }
    let below = (0..j).filter(|&k| b & (1usize << (n - 1 - k)) != 0).count();
    Some((b ^ bit, if below % 2 == 0 { 1.0 } else { -1.0 }))
}

fn create(n: usize, j: usize, b: usize) -> Option<(usize, f64)> {
    let bit = 1usize << (n - 1 - j);
    if b & bit != 0 {
        return None;
    }
    let below = (0..j).filter(|&k| b & (1usize << (n - 1 - k)) != 0).count();
    Some((b | bit, if below % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Applies a string of ladder operators, rightmost first.
fn apply_ops(n: usize, ops: &[(usize, bool)], b: usize) -> Option<(usize, f64)> {
    let mut state = b;
    let mut sign = 1.0;
    for &(j, dagger) in ops.iter().rev() {
        let (s, f) = if dagger { create(n, j, state)? } else { annihilate(n, j, state)? };
        state = s;
        sign *= f;
    }
    Some((state, sign))
}

/// Second-quantized Hamiltonian built directly in the occupation-number
/// basis with interleaved spin orbitals (`2p` alpha, `2p + 1` beta).
pub fn fock_hamiltonian(ints: &MolecularIntegrals) -> DMatrix<f64> {
    let no = ints.n_orb();
    let n = 2 * no;
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        m[(b, b)] += ints.e_core();
        for p in 0..no {
            for q in 0..no {
                let hpq = ints.h(p, q);
                if hpq == 0.0 {
                    continue;
                }
                for s in 0..2 {
                    if let Some((out, sign)) = apply_ops(n, &[(2 * p + s, true), (2 * q + s, false)], b) {
                        m[(out, b)] += hpq * sign;
                    }
                }
            }
        }
        for p in 0..no {
            for q in 0..no {
                for r in 0..no {
                    for t in 0..no {
                        let v = ints.eri(p, q, r, t);
                        if v == 0.0 {
                            continue;
                        }
                        for s1 in 0..2 {
                            for s2 in 0..2 {
                                let ops =
                                    [(2 * p + s1, true), (2 * r + s2, true), (2 * t + s2, false), (2 * q + s1, false)];
                                if let Some((out, sign)) = apply_ops(n, &ops, b) {
                                    m[(out, b)] += 0.5 * v * sign;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    m
}

/// Integrals with the full 8-fold symmetry and random entries in [-1, 1].
pub fn random_integrals(n_orb: usize, n_elec: usize, seed: u64) -> MolecularIntegrals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ints = MolecularIntegrals::zeros(n_orb, n_elec).unwrap();
    ints.set_e_core(rng.gen_range(-1.0..1.0));
    for p in 0..n_orb {
        for q in 0..=p {
            ints.set_h(p, q, rng.gen_range(-1.0..1.0));
        }
    }
    for p in 0..n_orb {
        for q in 0..n_orb {
            for r in 0..n_orb {
                for s in 0..n_orb {
                    // visit each symmetry class once through its canonical member
                    let pq = p * (p + 1) / 2 + q;
                    let rs = r * (r + 1) / 2 + s;
                    if q <= p && s <= r && rs <= pq {
                        ints.set_eri(p, q, r, s, rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
    }
    ints
}

/// Composite Simpson rule on `[a, b]` with an even number of panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
