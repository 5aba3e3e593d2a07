//! Matrix-free Lanczos for extremal eigenpairs of a Pauli sum.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fermion::{Spin, SpinOrbitalConvention};
use crate::pauli::{apply_sum, PauliSum, StateVector};

/// Subspace of basis states with fixed populations on two qubit groups.
///
/// A basis index `b` belongs to the sector when `popcount(b & mask_a)`
/// equals `count_a` and likewise for `b`. Masks are in amplitude-index bit
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    mask_a: usize,
    count_a: u32,
    mask_b: usize,
    count_b: u32,
}

impl Sector {
    /// Fixed total particle number.
    pub fn particles(n_qubits: usize, n: usize) -> Self {
        Self { mask_a: (1usize << n_qubits) - 1, count_a: n as u32, mask_b: 0, count_b: 0 }
    }

    /// Fixed alpha and beta electron counts under a spin-orbital convention.
    pub fn spin_resolved(convention: &SpinOrbitalConvention, n_alpha: usize, n_beta: usize) -> Self {
        let n_qubits = 2 * convention.n_orb();
        let mut mask_a = 0usize;
        let mut mask_b = 0usize;
        for p in 0..convention.n_orb() {
            mask_a |= 1usize << (n_qubits - 1 - convention.qubit(p, Spin::Alpha));
            mask_b |= 1usize << (n_qubits - 1 - convention.qubit(p, Spin::Beta));
        }
        Self { mask_a, count_a: n_alpha as u32, mask_b, count_b: n_beta as u32 }
    }

    /// Neutral closed-shell sector (`n_elec / 2` of each spin).
    pub fn closed_shell(convention: &SpinOrbitalConvention, n_elec: usize) -> Self {
        Self::spin_resolved(convention, n_elec / 2, n_elec - n_elec / 2)
    }

    #[inline]
    pub fn contains(&self, index: usize) -> bool {
        (index & self.mask_a).count_ones() == self.count_a && (index & self.mask_b).count_ones() == self.count_b
    }

    fn project(&self, v: &mut [Complex64]) {
        for (i, a) in v.iter_mut().enumerate() {
            if !self.contains(i) {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Lanczos settings.
#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Krylov dimension before an explicit restart.
    pub max_krylov: usize,
    /// Convergence threshold on `||H v - theta v||`.
    pub residual_tol: f64,
    pub reorthogonalize: bool,
    /// Seed for the pseudo-random start vector.
    pub seed: u64,
    pub max_restarts: usize,
    /// Start vector; replaces the random one when set.
    pub start: Option<StateVector>,
    /// Restricts the iteration to a symmetry sector.
    pub sector: Option<Sector>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_krylov: 200,
            residual_tol: 1e-9,
            reorthogonalize: true,
            seed: 7,
            max_restarts: 30,
            start: None,
            sector: None,
        }
    }
}

impl LanczosOptions {
    fn validate(&self) -> Result<()> {
        if self.max_krylov < 2 {
            return Err(Error::InvalidInput("max_krylov must be at least 2".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidInput("residual_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Extremal eigenpair estimate.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub value: f64,
    pub vector: Option<StateVector>,
    /// `||H v - value v||` recomputed from the stored pair.
    pub residual: f64,
    pub converged: bool,
    /// Total Lanczos steps over all restarts.
    pub iterations: usize,
}

/// Lowest eigenvalue and eigenvector of `h`.
pub fn ground_state(h: &PauliSum, opts: &LanczosOptions) -> Result<SpectralResult> {
    lanczos_lowest(h, 1.0, opts)
}

/// Highest eigenvalue: the ground state of `-h`, negated back.
pub fn max_energy(h: &PauliSum, opts: &LanczosOptions) -> Result<SpectralResult> {
    let mut r = lanczos_lowest(h, -1.0, opts)?;
    r.value = -r.value;
    Ok(r)
}

/// `|<a|b>|^2`, clamped to `[0, 1]`.
pub fn exact_overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn random_start(n_qubits: usize, opts: &LanczosOptions) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..1usize << n_qubits)
        .map(|i| {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            match &opts.sector {
                Some(s) if !s.contains(i) => Complex64::new(0.0, 0.0),
                _ => z,
            }
        })
        .collect()
}

/// `sign * H v`, projected onto the sector when one is set.
fn matvec(h: &PauliSum, sign: f64, v: &[Complex64], opts: &LanczosOptions) -> Result<Vec<Complex64>> {
    let state = StateVector::from_raw(h.n_qubits(), v.to_vec())?;
    let mut w = apply_sum(h, &state)?.into_amplitudes();
    if sign != 1.0 {
        for x in &mut w {
            *x *= sign;
        }
    }
    if let Some(s) = &opts.sector {
        s.project(&mut w);
    }
    Ok(w)
}

/// Rayleigh quotient and residual of a unit vector under `sign * H`.
fn rayleigh(h: &PauliSum, sign: f64, y: &[Complex64], opts: &LanczosOptions) -> Result<(f64, f64)> {
    let hy = matvec(h, sign, y, opts)?;
    let theta = dot(y, &hy).re;
    let res = hy.iter().zip(y).map(|(a, b)| (a - b * theta).norm_sqr()).sum::<f64>().sqrt();
    Ok((theta, res))
}

fn lanczos_lowest(h: &PauliSum, sign: f64, opts: &LanczosOptions) -> Result<SpectralResult> {
    opts.validate()?;
    let n_qubits = h.n_qubits();
    let dim = 1usize << n_qubits;
    // dimension guard
    StateVector::zero(n_qubits)?;
    let mut start = match &opts.start {
        Some(s) => {
            if s.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch { expected: n_qubits, found: s.n_qubits() });
            }
            s.amplitudes().to_vec()
        }
        None => random_start(n_qubits, opts),
    };
    if let Some(s) = &opts.sector {
        s.project(&mut start);
    }
    let n0 = norm(&start);
    if !(n0 > 0.0) {
        return Err(Error::InvalidInput("Lanczos start vector is zero in the chosen sector".into()));
    }
    for x in &mut start {
        *x /= n0;
    }

    let krylov_cap = opts.max_krylov.min(dim);
    let scale = h.one_norm().max(1.0);
    let mut total_steps = 0;
    let mut best: Option<(f64, f64, Vec<Complex64>)> = None;

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut ritz: Option<(f64, Vec<f64>)> = None;

        for j in 0..krylov_cap {
            total_steps += 1;
            let mut w = matvec(h, sign, &basis[j], opts)?;
            let alpha = dot(&basis[j], &w).re;
            for (x, v) in w.iter_mut().zip(&basis[j]) {
                *x -= v * alpha;
            }
            if j > 0 {
                let b = betas[j - 1];
                for (x, v) in w.iter_mut().zip(&basis[j - 1]) {
                    *x -= v * b;
                }
            }
            if opts.reorthogonalize {
                for _ in 0..2 {
                    for v in &basis {
                        let c = dot(v, &w);
                        for (x, vv) in w.iter_mut().zip(v) {
                            *x -= vv * c;
                        }
                    }
                }
            }
            alphas.push(alpha);
            let beta = norm(&w);
            let exhausted = beta < 1e-14 * scale || j + 1 == krylov_cap;
            let check = exhausted || j % 4 == 3;
            if check {
                let (theta, s) = lowest_tridiagonal(&alphas, &betas);
                let estimate = beta * s.last().map_or(0.0, |x| x.abs());
                ritz = Some((theta, s));
                if exhausted || estimate < 0.1 * opts.residual_tol {
                    break;
                }
            }
            betas.push(beta);
            for x in &mut w {
                *x /= beta;
            }
            basis.push(w);
        }

        let (_, s) = ritz.expect("at least one Ritz evaluation");
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        for (coef, v) in s.iter().zip(&basis) {
            for (yy, vv) in y.iter_mut().zip(v) {
                *yy += vv * *coef;
            }
        }
        let ny = norm(&y);
        for x in &mut y {
            *x /= ny;
        }
        let (theta, res) = rayleigh(h, sign, &y, opts)?;
        let better = best.as_ref().is_none_or(|(_, r, _)| res < *r);
        if better {
            best = Some((theta, res, y.clone()));
        }
        if res < opts.residual_tol {
            break;
        }
        start = y;
    }

    let (value, residual, vector) = best.expect("at least one restart");
    Ok(SpectralResult {
        value,
        vector: Some(StateVector::from_raw(n_qubits, vector)?),
        residual,
        converged: residual < opts.residual_tol,
        iterations: total_steps,
    })
}

/// Lowest eigenpair of the symmetric tridiagonal matrix.
fn lowest_tridiagonal(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let k = eig.eigenvalues.imin();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect())
}
