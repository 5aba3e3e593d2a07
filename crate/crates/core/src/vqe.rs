//! Statevector VQE with a single Trotter layer of UCCSD Pauli rotations,
//! and the analytic global-depolarizing noise model.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{ladder_product, Spin, SpinOrbitalConvention};
use crate::itevo::overlap_index;
use crate::pauli::{apply_word, energy_and_variance, PauliSum, PauliWord, StateVector};
use crate::spectra::exact_overlap;

/// One factor `exp(-i * weight * theta[param] * word / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub word: PauliWord,
    pub param: usize,
    pub weight: f64,
}

/// Fermionic excitation behind one parameter, as spin-orbital qubit indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Excitation {
    Single { from: usize, to: usize },
    Double { from: [usize; 2], to: [usize; 2] },
}

/// Reference determinant plus an ordered product of Pauli rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub n_qubits: usize,
    /// Occupied qubits of the reference determinant.
    pub reference: Vec<usize>,
    pub rotations: Vec<Rotation>,
    pub excitations: Vec<Excitation>,
    pub n_params: usize,
}

/// One-layer UCCSD for a closed-shell reference.
///
/// Each spin-conserving single `a+_a a_i` and double `a+_a a+_b a_j a_i`
/// gives an anti-Hermitian generator `T - T+ = i sum_k g_k P_k`; the factor
/// `exp(theta (T - T+))` is Trotterized into `exp(i theta g_k P_k)` over its
/// words in canonical order, all sharing one parameter. Singles come before
/// doubles; within each class excitations are ordered by occupied then
/// virtual indices.
pub fn build_uccsd(n_orb: usize, n_elec: usize, convention: &SpinOrbitalConvention) -> Result<Ansatz> {
    if !n_elec.is_multiple_of(2) {
        return Err(Error::OpenShell(n_elec));
    }
    if n_elec > 2 * n_orb {
        return Err(Error::InvalidInput(format!("{n_elec} electrons exceed {n_orb} orbitals")));
    }
    if convention.n_orb() != n_orb {
        return Err(Error::InvalidConvention(format!(
            "convention covers {} orbitals, ansatz needs {n_orb}",
            convention.n_orb()
        )));
    }
    let n_qubits = 2 * n_orb;
    let n_occ = n_elec / 2;
    let occupied: Vec<usize> = (0..n_occ).collect();
    let reference = convention.determinant_qubits(&occupied);

    let spin_orbitals = |range: std::ops::Range<usize>| -> Vec<(usize, Spin)> {
        range.flat_map(|p| [(p, Spin::Alpha), (p, Spin::Beta)]).collect()
    };
    let occ_so = spin_orbitals(0..n_occ);
    let virt_so = spin_orbitals(n_occ..n_orb);
    let q = |(p, s): (usize, Spin)| convention.qubit(p, s);

    let mut excitations = Vec::new();
    for &i in &occ_so {
        for &a in &virt_so {
            if i.1 == a.1 {
                excitations.push(Excitation::Single { from: q(i), to: q(a) });
            }
        }
    }
    for x in 0..occ_so.len() {
        for y in x + 1..occ_so.len() {
            for u in 0..virt_so.len() {
                for w in u + 1..virt_so.len() {
                    let (i, j, a, b) = (occ_so[x], occ_so[y], virt_so[u], virt_so[w]);
                    let alpha = |s: Spin| usize::from(s == Spin::Alpha);
                    if alpha(i.1) + alpha(j.1) == alpha(a.1) + alpha(b.1) {
                        excitations.push(Excitation::Double { from: [q(i), q(j)], to: [q(a), q(b)] });
                    }
                }
            }
        }
    }

    let mut rotations = Vec::new();
    for (param, exc) in excitations.iter().enumerate() {
        let ops: Vec<(usize, bool)> = match exc {
            Excitation::Single { from, to } => vec![(*to, true), (*from, false)],
            Excitation::Double { from, to } => {
                vec![(to[0], true), (to[1], true), (from[1], false), (from[0], false)]
            }
        };
        let mut gen: BTreeMap<PauliWord, Complex64> = BTreeMap::new();
        for (w, c) in ladder_product(n_qubits, &ops, 1.0) {
            *gen.entry(w).or_default() += c;
        }
        // subtract the adjoint: (c P)^dagger = conj(c) P for Hermitian words
        for c in gen.values_mut() {
            *c -= c.conj();
        }
        for (word, c) in gen {
            if c.norm() < 1e-14 {
                continue;
            }
            debug_assert!(c.re.abs() < 1e-14, "generator coefficient {c} not imaginary");
            // exp(i theta g P) = exp(-i (-2 g theta) P / 2)
            rotations.push(Rotation { word, param, weight: -2.0 * c.im });
        }
    }
    Ok(Ansatz { n_qubits, reference, rotations, n_params: excitations.len(), excitations })
}

/// In-place `exp(-i angle P / 2)`.
fn rotate(state: &mut StateVector, word: &PauliWord, angle: f64) -> Result<()> {
    let p = apply_word(word, state)?;
    let (s, c) = (0.5 * angle).sin_cos();
    let mis = Complex64::new(0.0, -s);
    for (a, b) in state.amplitudes_mut().iter_mut().zip(p.amplitudes()) {
        *a = *a * c + b * mis;
    }
    Ok(())
}

impl Ansatz {
    pub fn reference_state(&self) -> Result<StateVector> {
        StateVector::determinant(self.n_qubits, &self.reference)
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::InvalidInput(format!("expected {} parameters, got {}", self.n_params, theta.len())));
        }
        Ok(())
    }
}

/// Reference determinant with all rotations applied in order.
pub fn prepare_state(ansatz: &Ansatz, theta: &[f64]) -> Result<StateVector> {
    ansatz.check_params(theta)?;
    let mut state = ansatz.reference_state()?;
    for r in &ansatz.rotations {
        rotate(&mut state, &r.word, r.weight * theta[r.param])?;
    }
    Ok(state)
}

/// Energy and its exact gradient by reverse-mode (adjoint) differentiation.
///
/// With `s_j` the state after rotation `j` and `l_j` the back-propagated
/// `H psi`, `dE/d angle_j = Im <l_j|P_j|s_j>`; shared parameters sum their
/// rotations' contributions times `weight`.
pub fn energy_and_gradient(h: &PauliSum, ansatz: &Ansatz, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut state = prepare_state(ansatz, theta)?;
    let mut lambda = crate::pauli::apply_sum(h, &state)?;
    let energy = state.inner(&lambda)?.re;
    let mut grad = vec![0.0; ansatz.n_params];
    for r in ansatz.rotations.iter().rev() {
        let p_state = apply_word(&r.word, &state)?;
        grad[r.param] += r.weight * lambda.inner(&p_state)?.im;
        let angle = -r.weight * theta[r.param];
        rotate(&mut state, &r.word, angle)?;
        rotate(&mut lambda, &r.word, angle)?;
    }
    Ok((energy, grad))
}

/// Two-qubit gate count under the CNOT-ladder decomposition: `2 (w - 1)` per
/// rotation of weight `w >= 2`.
pub fn gate_count(ansatz: &Ansatz) -> u64 {
    ansatz
        .rotations
        .iter()
        .map(|r| {
            let w = r.word.weight() as u64;
            if w >= 2 {
                2 * (w - 1)
            } else {
                0
            }
        })
        .sum()
}

/// Descent settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_steps: usize,
    /// Stop when the gradient norm drops below this (Ha/rad).
    pub g_tol: f64,
    pub armijo_c: f64,
    pub shrink: f64,
    pub initial_step: f64,
    pub max_backtracks: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_steps: 500, g_tol: 1e-6, armijo_c: 1e-4, shrink: 0.5, initial_step: 1.0, max_backtracks: 60 }
    }
}

/// Exact ground-state data used to annotate a trajectory.
#[derive(Debug, Clone, Default)]
pub struct GroundReference {
    pub e0: Option<f64>,
    pub vector: Option<StateVector>,
}

/// One logged optimizer iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeStep {
    pub step: usize,
    pub theta: Vec<f64>,
    pub e_v: f64,
    pub sigma_v: f64,
    pub grad_norm: f64,
    pub i_omega: Option<f64>,
    pub omega_exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeTrajectory {
    pub steps: Vec<VqeStep>,
    pub converged: bool,
}

impl VqeTrajectory {
    pub fn last(&self) -> &VqeStep {
        self.steps.last().expect("trajectory has at least the initial step")
    }

    /// CSV with header `step,E_V,sigma_V,I_Omega,Omega_exact`; absent values
    /// are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,E_V,sigma_V,I_Omega,Omega_exact\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.15e}")).unwrap_or_default();
        for s in &self.steps {
            let _ =
                writeln!(out, "{},{:.15e},{:.15e},{},{}", s.step, s.e_v, s.sigma_v, opt(s.i_omega), opt(s.omega_exact));
        }
        out
    }
}

/// Error from [`optimize`] that keeps the steps logged so far.
#[derive(Debug)]
pub struct OptimizeFailure {
    pub error: Error,
    pub partial: VqeTrajectory,
}

fn log_step(
    h: &PauliSum,
    ansatz: &Ansatz,
    theta: &[f64],
    step: usize,
    grad_norm: f64,
    reference: &GroundReference,
) -> Result<VqeStep> {
    let state = prepare_state(ansatz, theta)?;
    let (e_v, var) = energy_and_variance(h, &state)?;
    let i_omega = match reference.e0 {
        // rounding can put a converged E_V a hair below E_0
        Some(e0) => Some(overlap_index(e_v.max(e0), var, e0)?),
        None => None,
    };
    let omega_exact = match &reference.vector {
        Some(v) => Some(exact_overlap(v, &state)?),
        None => None,
    };
    Ok(VqeStep { step, theta: theta.to_vec(), e_v, sigma_v: var.sqrt(), grad_norm, i_omega, omega_exact })
}

/// Steepest descent with Armijo backtracking from `theta = 0`.
///
/// The trial step starts at twice the last accepted step (initially
/// `initial_step`) and shrinks until sufficient decrease holds. Every
/// iterate, including the start, is logged.
pub fn optimize(
    h: &PauliSum,
    ansatz: &Ansatz,
    config: &OptimizerConfig,
    reference: &GroundReference,
) -> std::result::Result<VqeTrajectory, OptimizeFailure> {
    let mut traj = VqeTrajectory { steps: Vec::new(), converged: false };
    let fail = |error: Error, traj: &VqeTrajectory| OptimizeFailure { error, partial: traj.clone() };
    if h.n_qubits() != ansatz.n_qubits {
        return Err(fail(Error::QubitMismatch { expected: ansatz.n_qubits, found: h.n_qubits() }, &traj));
    }
    let mut theta = vec![0.0; ansatz.n_params];
    let mut step_size = config.initial_step;
    for step in 0..=config.max_steps {
        let (energy, grad) = energy_and_gradient(h, ansatz, &theta).map_err(|e| fail(e, &traj))?;
        if !energy.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(fail(Error::Diverged { step }, &traj));
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let gnorm = g2.sqrt();
        let entry = log_step(h, ansatz, &theta, step, gnorm, reference).map_err(|e| fail(e, &traj))?;
        traj.steps.push(entry);
        if gnorm < config.g_tol {
            traj.converged = true;
            break;
        }
        if step == config.max_steps {
            break;
        }
        let mut alpha = (2.0 * step_size).min(1e3);
        let mut accepted = None;
        for _ in 0..config.max_backtracks {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - alpha * g).collect();
            let e_trial = energy_at(h, ansatz, &trial).map_err(|e| fail(e, &traj))?;
            if !e_trial.is_finite() {
                return Err(fail(Error::Diverged { step }, &traj));
            }
            if e_trial <= energy - config.armijo_c * alpha * g2 {
                accepted = Some(trial);
                break;
            }
            alpha *= config.shrink;
        }
        match accepted {
            Some(t) => {
                theta = t;
                step_size = alpha;
            }
            // no decrease representable at this gradient scale
            None => break,
        }
    }
    Ok(traj)
}

fn energy_at(h: &PauliSum, ansatz: &Ansatz, theta: &[f64]) -> Result<f64> {
    let state = prepare_state(ansatz, theta)?;
    crate::pauli::expectation(h, &state)
}

/// `F = exp(-eps * n_g)`.
pub fn fidelity(eps: f64, n_g: f64) -> Result<f64> {
    if !(eps >= 0.0) || !(n_g >= 0.0) {
        return Err(Error::InvalidInput(format!("need eps >= 0 and n_g >= 0 (got {eps}, {n_g})")));
    }
    Ok((-eps * n_g).exp())
}

/// Energy measured under global depolarizing noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyEnergy {
    pub energy: f64,
    pub delta_e: f64,
}

/// `delta_e = (1 - f) (e_noise - e_v)` and `energy = e_v + delta_e`.
pub fn noisy_energy(e_v: f64, e_noise: f64, f: f64) -> Result<NoisyEnergy> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidInput(format!("fidelity {f} outside [0, 1]")));
    }
    let delta_e = (1.0 - f) * (e_noise - e_v);
    let energy = if f == 0.0 { e_noise } else { e_v + delta_e };
    Ok(NoisyEnergy { energy, delta_e })
}

/// Shots for statistical error `eta`: `ceil((sigma / eta)^2)`, at least one.
pub fn shots_required(sigma: f64, eta: f64) -> Result<u64> {
    if !(sigma >= 0.0) || !(eta > 0.0) {
        return Err(Error::InvalidInput(format!("need sigma >= 0 and eta > 0 (got {sigma}, {eta})")));
    }
    let x = (sigma / eta).powi(2);
    // absorb rounding in the ratio before taking the ceiling
    let n = (x * (1.0 - 1e-12)).ceil();
    Ok((n as u64).max(1))
}
