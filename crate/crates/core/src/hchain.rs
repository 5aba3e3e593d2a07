//! Hydrogen-chain front end: contracted s-Gaussian integrals, closed-shell
//! Hartree-Fock and the atomic-to-molecular orbital transformation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fermion::{aufbau_occupation, determinant_variance, fock_space_trace_mean, pair, quad, MolecularIntegrals};

/// Shipped STO-3G hydrogen contraction.
pub const STO3G_DATA: &str = include_str!("../data/sto-3g.basis");

/// Default nearest-neighbour spacing for chains, in bohr.
pub const DEFAULT_SPACING: f64 = 1.8;

const MIN_SEPARATION: f64 = 1e-6;
const MIN_OVERLAP_EIGENVALUE: f64 = 1e-8;

/// Nuclear positions (bohr) and charges.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub positions: Vec<[f64; 3]>,
    pub charges: Vec<f64>,
}

impl Geometry {
    pub fn new(positions: Vec<[f64; 3]>, charges: Vec<f64>) -> Result<Self> {
        if positions.len() != charges.len() {
            return Err(Error::InvalidInput("one charge per atom required".into()));
        }
        let geom = Self { positions, charges };
        geom.validate()?;
        Ok(geom)
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.positions.len() {
            for j in 0..i {
                if dist2(&self.positions[i], &self.positions[j]).sqrt() <= MIN_SEPARATION {
                    return Err(Error::DegenerateGeometry(j, i));
                }
            }
        }
        Ok(())
    }

    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    /// Electron count of the neutral system.
    pub fn neutral_electrons(&self) -> usize {
        self.charges.iter().sum::<f64>().round() as usize
    }

    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for i in 0..self.positions.len() {
            for j in 0..i {
                e += self.charges[i] * self.charges[j] / dist2(&self.positions[i], &self.positions[j]).sqrt();
            }
        }
        e
    }

    pub fn translated(&self, shift: [f64; 3]) -> Geometry {
        let positions = self.positions.iter().map(|p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]]).collect();
        Geometry { positions, charges: self.charges.clone() }
    }
}

/// Collinear chain along x, first atom at the origin.
pub fn build_hchain(n_atoms: usize, spacing: f64) -> Result<Geometry> {
    if n_atoms == 0 || !(spacing > 0.0) {
        return Err(Error::InvalidInput(format!(
            "chain needs n_atoms >= 1 and spacing > 0 (got {n_atoms}, {spacing})"
        )));
    }
    let positions = (0..n_atoms).map(|i| [i as f64 * spacing, 0.0, 0.0]).collect();
    Ok(Geometry { positions, charges: vec![1.0; n_atoms] })
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Contraction of one s-type shell: exponents and raw coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl Contraction {
    /// Reads the first `[<label>]` section of a basis data file.
    pub fn parse(text: &str, label: &str) -> Result<Self> {
        let mut in_section = false;
        let mut exponents = Vec::new();
        let mut coefficients = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if in_section {
                    break;
                }
                in_section = line.trim_matches(|c| c == '[' || c == ']').trim() == label;
                continue;
            }
            if !in_section {
                continue;
            }
            let perr = |m: String| Error::Parse { line: i + 1, message: m };
            let mut it = line.split_whitespace();
            let mut next = || -> Result<f64> {
                let tok = it.next().ok_or_else(|| perr("expected `exponent coefficient`".into()))?;
                tok.parse().map_err(|_| perr(format!("bad number `{tok}`")))
            };
            let (a, d) = (next()?, next()?);
            if !(a > 0.0) {
                return Err(perr(format!("exponent must be positive, got {a}")));
            }
            exponents.push(a);
            coefficients.push(d);
        }
        if exponents.is_empty() {
            return Err(Error::Parse { line: 0, message: format!("no `[{label}]` section found") });
        }
        Ok(Self { exponents, coefficients })
    }

    pub fn sto3g_hydrogen() -> Self {
        Self::parse(STO3G_DATA, "H STO-3G").expect("shipped basis data parses")
    }
}

/// Normalized contracted s-shell on a center.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedShell {
    pub exponents: Vec<f64>,
    /// Coefficients including primitive normalization, scaled so `<s|s> = 1`.
    pub coefficients: Vec<f64>,
    pub center: [f64; 3],
}

impl ContractedShell {
    pub fn new(contraction: &Contraction, center: [f64; 3]) -> Self {
        let coefficients = contraction
            .exponents
            .iter()
            .zip(&contraction.coefficients)
            .map(|(&a, &d)| d * (2.0 * a / PI).powf(0.75))
            .collect();
        let mut shell = Self { exponents: contraction.exponents.clone(), coefficients, center };
        let norm = overlap(&shell, &shell).sqrt();
        for c in &mut shell.coefficients {
            *c /= norm;
        }
        shell
    }

    fn primitives(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.exponents.iter().copied().zip(self.coefficients.iter().copied())
    }
}

/// Boys function of order zero, `F0(x) = int_0^1 exp(-x t^2) dt`.
pub fn boys_f0(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::InvalidInput(format!("boys_f0 needs x >= 0, got {x}")));
    }
    Ok(boys_f0_unchecked(x))
}

/// Series below this argument, closed form above.
const BOYS_SERIES_CUTOFF: f64 = 0.5;

#[inline]
fn boys_f0_unchecked(x: f64) -> f64 {
    if x < BOYS_SERIES_CUTOFF {
        // sum_k (-x)^k / (k! (2k+1))
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= -x / k as f64;
            let t = term / (2 * k + 1) as f64;
            sum += t;
            if t.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let r = x.sqrt();
        0.5 * (PI / x).sqrt() * libm::erf(r)
    }
}

fn overlap(a: &ContractedShell, b: &ContractedShell) -> f64 {
    let r2 = dist2(&a.center, &b.center);
    let mut s = 0.0;
    for (al, ca) in a.primitives() {
        for (be, cb) in b.primitives() {
            let p = al + be;
            s += ca * cb * (PI / p).powf(1.5) * (-al * be / p * r2).exp();
        }
    }
    s
}

fn kinetic(a: &ContractedShell, b: &ContractedShell) -> f64 {
    let r2 = dist2(&a.center, &b.center);
    let mut t = 0.0;
    for (al, ca) in a.primitives() {
        for (be, cb) in b.primitives() {
            let p = al + be;
            let mu = al * be / p;
            t += ca * cb * mu * (3.0 - 2.0 * mu * r2) * (PI / p).powf(1.5) * (-mu * r2).exp();
        }
    }
    t
}

fn nuclear(a: &ContractedShell, b: &ContractedShell, geom: &Geometry) -> f64 {
    let r2 = dist2(&a.center, &b.center);
    let mut v = 0.0;
    for (al, ca) in a.primitives() {
        for (be, cb) in b.primitives() {
            let p = al + be;
            let pc = gaussian_product_center(al, &a.center, be, &b.center);
            let pre = -2.0 * PI / p * (-al * be / p * r2).exp();
            for (pos, z) in geom.positions.iter().zip(&geom.charges) {
                v += ca * cb * pre * z * boys_f0_unchecked(p * dist2(&pc, pos));
            }
        }
    }
    v
}

fn repulsion(a: &ContractedShell, b: &ContractedShell, c: &ContractedShell, d: &ContractedShell) -> f64 {
    let rab = dist2(&a.center, &b.center);
    let rcd = dist2(&c.center, &d.center);
    let mut g = 0.0;
    for (al, ca) in a.primitives() {
        for (be, cb) in b.primitives() {
            let p = al + be;
            let pc = gaussian_product_center(al, &a.center, be, &b.center);
            let kab = (-al * be / p * rab).exp();
            for (ga, cc) in c.primitives() {
                for (de, cd) in d.primitives() {
                    let q = ga + de;
                    let qc = gaussian_product_center(ga, &c.center, de, &d.center);
                    let kcd = (-ga * de / q * rcd).exp();
                    let pre = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
                    let t = p * q / (p + q) * dist2(&pc, &qc);
                    g += ca * cb * cc * cd * pre * kab * kcd * boys_f0_unchecked(t);
                }
            }
        }
    }
    g
}

#[inline]
fn gaussian_product_center(a: f64, ra: &[f64; 3], b: f64, rb: &[f64; 3]) -> [f64; 3] {
    let p = a + b;
    [(a * ra[0] + b * rb[0]) / p, (a * ra[1] + b * rb[1]) / p, (a * ra[2] + b * rb[2]) / p]
}

/// Atomic-orbital integrals over one contracted s-shell per atom.
#[derive(Debug, Clone)]
pub struct AOIntegrals {
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    /// Packed `(mu nu|lam sig)` with 8-fold symmetry.
    eri: Vec<f64>,
    pub e_nuc: f64,
}

impl AOIntegrals {
    /// Assembles from explicit tensors; `eri` is dense `n^4` and must carry
    /// the 8-fold symmetry.
    pub fn from_parts(
        overlap: DMatrix<f64>,
        kinetic: DMatrix<f64>,
        nuclear: DMatrix<f64>,
        eri_dense: &[f64],
        e_nuc: f64,
    ) -> Result<Self> {
        let n = overlap.nrows();
        let shapes_ok = [&overlap, &kinetic, &nuclear].iter().all(|m| m.nrows() == n && m.ncols() == n);
        if !shapes_ok || eri_dense.len() != n * n * n * n {
            return Err(Error::InvalidInput("AO tensor shapes disagree".into()));
        }
        let npair = n * (n + 1) / 2;
        let mut eri = vec![0.0; npair * (npair + 1) / 2];
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        if pair(p, q) >= pair(r, s) {
                            eri[quad(p, q, r, s)] = eri_dense[((p * n + q) * n + r) * n + s];
                        }
                    }
                }
            }
        }
        Ok(Self { overlap, kinetic, nuclear, eri, e_nuc })
    }

    pub fn n_basis(&self) -> usize {
        self.overlap.nrows()
    }

    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri[quad(p, q, r, s)]
    }

    pub fn core_hamiltonian(&self) -> DMatrix<f64> {
        &self.kinetic + &self.nuclear
    }

    fn eri_dense(&self) -> Vec<f64> {
        let n = self.n_basis();
        let mut out = vec![0.0; n * n * n * n];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        out[((p * n + q) * n + r) * n + s] = self.eri(p, q, r, s);
                    }
                }
            }
        }
        out
    }
}

/// Overlap, kinetic, nuclear-attraction and repulsion integrals, one
/// `contraction` shell per atom.
pub fn ao_integrals(geom: &Geometry, contraction: &Contraction) -> Result<AOIntegrals> {
    geom.validate()?;
    let shells: Vec<ContractedShell> = geom.positions.iter().map(|&c| ContractedShell::new(contraction, c)).collect();
    let n = shells.len();
    let mut s = DMatrix::zeros(n, n);
    let mut t = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (sij, tij, vij) = (
                overlap(&shells[i], &shells[j]),
                kinetic(&shells[i], &shells[j]),
                nuclear(&shells[i], &shells[j], geom),
            );
            s[(i, j)] = sij;
            s[(j, i)] = sij;
            t[(i, j)] = tij;
            t[(j, i)] = tij;
            v[(i, j)] = vij;
            v[(j, i)] = vij;
        }
    }
    let npair = n * (n + 1) / 2;
    // one representative per symmetry class, laid out in packed order
    let eri: Vec<f64> = (0..npair * (npair + 1) / 2)
        .into_par_iter()
        .map(|idx| {
            let (ij, kl) = pairs_at(idx);
            let ((i, j), (k, l)) = (pairs_at(ij), pairs_at(kl));
            repulsion(&shells[i], &shells[j], &shells[k], &shells[l])
        })
        .collect();
    Ok(AOIntegrals { overlap: s, kinetic: t, nuclear: v, eri, e_nuc: geom.nuclear_repulsion() })
}

/// Largest `r` with `r (r + 1) / 2 <= idx`, correcting a float estimate.
fn fix_triangular_root(idx: usize, mut r: usize) -> usize {
    while r * (r + 1) / 2 > idx {
        r -= 1;
    }
    while (r + 1) * (r + 2) / 2 <= idx {
        r += 1;
    }
    r
}

/// Inverse of the packed pair index `i (i + 1) / 2 + j`, `i >= j`.
fn pairs_at(ij: usize) -> (usize, usize) {
    let i = fix_triangular_root(ij, ((((8 * ij + 1) as f64).sqrt() as usize).saturating_sub(1)) / 2);
    (i, ij - i * (i + 1) / 2)
}

/// Thresholds for the closed-shell SCF loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    pub e_tol: f64,
    pub d_tol: f64,
    pub max_iter: usize,
    pub diis_window: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self { e_tol: 1e-10, d_tol: 1e-8, max_iter: 200, diis_window: 8 }
    }
}

/// Converged (or best-effort) restricted Hartree-Fock solution.
#[derive(Debug, Clone)]
pub struct ScfResult {
    /// Total energy including nuclear repulsion.
    pub energy: f64,
    pub coefficients: DMatrix<f64>,
    /// Ascending.
    pub orbital_energies: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
}

/// Restricted closed-shell Hartree-Fock with symmetric orthogonalization,
/// core-Hamiltonian guess and DIIS extrapolation from the third iteration.
pub fn rhf(ao: &AOIntegrals, n_elec: usize, opts: &ScfOptions) -> Result<ScfResult> {
    let n = ao.n_basis();
    if !n_elec.is_multiple_of(2) {
        return Err(Error::OpenShell(n_elec));
    }
    let n_occ = n_elec / 2;
    if n_occ > n {
        return Err(Error::InvalidInput(format!("{n_elec} electrons exceed {n} basis functions")));
    }
    let s_eig = SymmetricEigen::new(ao.overlap.clone());
    let min_eig = s_eig.eigenvalues.min();
    if min_eig < MIN_OVERLAP_EIGENVALUE {
        return Err(Error::SingularOverlap(min_eig));
    }
    let inv_sqrt = DVector::from_iterator(n, s_eig.eigenvalues.iter().map(|&l| 1.0 / l.sqrt()));
    let x = &s_eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * s_eig.eigenvectors.transpose();

    let hcore = ao.core_hamiltonian();
    let (mut c, mut eps) = diagonalize_fock(&hcore, &x);
    let mut density = density_matrix(&c, n_occ);
    let mut energy = electronic_energy(&density, &hcore, &(&hcore + two_electron(ao, &density))) + ao.e_nuc;

    let mut fock_history: Vec<DMatrix<f64>> = Vec::new();
    let mut error_history: Vec<DMatrix<f64>> = Vec::new();
    let mut energy_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let fock = &hcore + two_electron(ao, &density);
        let e_new = electronic_energy(&density, &hcore, &fock) + ao.e_nuc;

        let err = x.transpose() * (&fock * &density * &ao.overlap - &ao.overlap * &density * &fock) * &x;
        fock_history.push(fock.clone());
        error_history.push(err);
        if fock_history.len() > opts.diis_window {
            fock_history.remove(0);
            error_history.remove(0);
        }
        let fock_use = if iter >= 2 && fock_history.len() >= 2 {
            diis_extrapolate(&fock_history, &error_history).unwrap_or(fock)
        } else {
            fock
        };

        let (c_new, eps_new) = diagonalize_fock(&fock_use, &x);
        let d_new = density_matrix(&c_new, n_occ);
        let d_change = (&d_new - &density).abs().max();
        let e_change = (e_new - energy).abs();
        energy_history.push(e_new);
        c = c_new;
        eps = eps_new;
        density = d_new;
        energy = e_new;
        if d_change < opts.d_tol && e_change < opts.e_tol {
            converged = true;
            break;
        }
    }
    // energy of the final density
    let fock = &hcore + two_electron(ao, &density);
    energy = electronic_energy(&density, &hcore, &fock) + ao.e_nuc;
    Ok(ScfResult { energy, coefficients: c, orbital_energies: eps, converged, iterations, energy_history })
}

fn diagonalize_fock(fock: &DMatrix<f64>, x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let fp = x.transpose() * fock * x;
    let eig = SymmetricEigen::new(fp);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut cp = DMatrix::zeros(n, n);
    let mut eps = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // fix the sign so the largest component is positive
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        cp.set_column(k, &col);
        eps.push(eig.eigenvalues[src]);
    }
    (x * cp, eps)
}

/// Closed-shell density `D = 2 C_occ C_occ^T`.
fn density_matrix(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    2.0 * &occ * occ.transpose()
}

fn two_electron(ao: &AOIntegrals, density: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ao.n_basis();
    let mut g = DMatrix::zeros(n, n);
    for m in 0..n {
        for v in 0..=m {
            let mut acc = 0.0;
            for l in 0..n {
                for s in 0..n {
                    acc += density[(l, s)] * (ao.eri(m, v, l, s) - 0.5 * ao.eri(m, l, v, s));
                }
            }
            g[(m, v)] = acc;
            g[(v, m)] = acc;
        }
    }
    g
}

fn electronic_energy(density: &DMatrix<f64>, hcore: &DMatrix<f64>, fock: &DMatrix<f64>) -> f64 {
    0.5 * density.component_mul(&(hcore + fock)).sum()
}

/// Largest DIIS coefficient magnitude accepted before the oldest vectors
/// are dropped.
const DIIS_MAX_COEFFICIENT: f64 = 10.0;

/// Pulay extrapolation; shrinks the subspace from the old end while the
/// error overlap matrix is too ill-conditioned to give bounded coefficients.
fn diis_extrapolate(focks: &[DMatrix<f64>], errors: &[DMatrix<f64>]) -> Option<DMatrix<f64>> {
    let total = focks.len();
    for start in 0..total.saturating_sub(1) {
        let (fs, es) = (&focks[start..], &errors[start..]);
        let m = fs.len();
        let mut b = DMatrix::zeros(m + 1, m + 1);
        let mut scale: f64 = 0.0;
        for i in 0..m {
            for j in 0..=i {
                let v = es[i].dot(&es[j]);
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
            scale = scale.max(b[(i, i)]);
        }
        if scale == 0.0 {
            return None;
        }
        for i in 0..m {
            for j in 0..m {
                b[(i, j)] /= scale;
            }
            b[(i, m)] = -1.0;
            b[(m, i)] = -1.0;
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs[m] = -1.0;
        let Some(coeffs) = b.lu().solve(&rhs) else { continue };
        if coeffs.iter().take(m).any(|c| !c.is_finite() || c.abs() > DIIS_MAX_COEFFICIENT) {
            continue;
        }
        let mut f = DMatrix::zeros(fs[0].nrows(), fs[0].ncols());
        for (k, fk) in fs.iter().enumerate() {
            f += coeffs[k] * fk;
        }
        return Some(f);
    }
    None
}

/// Transforms AO integrals into the orbital basis spanned by the columns of
/// `c`: `h = C^T (T + V) C` and four staged quarter-transformations of the
/// repulsion tensor, `O(N^5)` overall.
pub fn mo_transform(ao: &AOIntegrals, c: &DMatrix<f64>, n_elec: usize) -> Result<MolecularIntegrals> {
    let n = ao.n_basis();
    if c.nrows() != n || c.ncols() == 0 || c.ncols() > n {
        return Err(Error::InvalidInput(format!(
            "coefficient matrix is {}x{}, basis has {n} functions",
            c.nrows(),
            c.ncols()
        )));
    }
    let m = c.ncols();
    let h_mo = c.transpose() * ao.core_hamiltonian() * c;
    let eri = quarter_transform(&ao.eri_dense(), n, c);
    let h_flat: Vec<f64> = (0..m * m).map(|k| h_mo[(k / m, k % m)]).collect();
    MolecularIntegrals::from_dense(m, n_elec, ao.e_nuc, &h_flat, &eri)
}

/// Applies `c` to each index of a dense `n^4` tensor in turn.
pub(crate) fn quarter_transform(eri: &[f64], n: usize, c: &DMatrix<f64>) -> Vec<f64> {
    let m = c.ncols();
    // (pq|rs) -> (pq|rl)
    let mut t1 = vec![0.0; n * n * n * m];
    t1.par_chunks_mut(n * m).enumerate().for_each(|(pq, out)| {
        for r in 0..n {
            let src = &eri[(pq * n + r) * n..(pq * n + r + 1) * n];
            for l in 0..m {
                out[r * m + l] = src.iter().enumerate().map(|(s, v)| v * c[(s, l)]).sum();
            }
        }
    });
    // (pq|rl) -> (pq|kl)
    let mut t2 = vec![0.0; n * n * m * m];
    t2.par_chunks_mut(m * m).enumerate().for_each(|(pq, out)| {
        let src = &t1[pq * n * m..(pq + 1) * n * m];
        for k in 0..m {
            for l in 0..m {
                out[k * m + l] = (0..n).map(|r| c[(r, k)] * src[r * m + l]).sum();
            }
        }
    });
    drop(t1);
    // (pq|kl) -> (pj|kl)
    let mut t3 = vec![0.0; n * m * m * m];
    t3.par_chunks_mut(m * m * m).enumerate().for_each(|(p, out)| {
        for j in 0..m {
            for kl in 0..m * m {
                out[j * m * m + kl] = (0..n).map(|q| c[(q, j)] * t2[(p * n + q) * m * m + kl]).sum();
            }
        }
    });
    drop(t2);
    // (pj|kl) -> (ij|kl)
    let mut t4 = vec![0.0; m * m * m * m];
    t4.par_chunks_mut(m * m * m).enumerate().for_each(|(i, out)| {
        for jkl in 0..m * m * m {
            out[jkl] = (0..n).map(|p| c[(p, i)] * t3[p * m * m * m + jkl]).sum();
        }
    });
    t4
}

/// One row of a chain scan, energies in hartree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub n_atoms: usize,
    pub e_hf: f64,
    pub var_hf: f64,
    pub e_inf: f64,
}

/// Everything the pipeline needs for one neutral chain.
#[derive(Debug, Clone)]
pub struct ChainSolution {
    pub geometry: Geometry,
    pub scf: ScfResult,
    pub integrals: MolecularIntegrals,
}

/// SCF plus MO integrals for a neutral closed-shell chain.
pub fn solve_hchain(n_atoms: usize, spacing: f64, opts: &ScfOptions) -> Result<ChainSolution> {
    if !n_atoms.is_multiple_of(2) {
        return Err(Error::OpenShell(n_atoms));
    }
    let geometry = build_hchain(n_atoms, spacing)?;
    let ao = ao_integrals(&geometry, &Contraction::sto3g_hydrogen())?;
    let scf = rhf(&ao, n_atoms, opts)?;
    if !scf.converged {
        return Err(Error::ScfNotConverged { iterations: scf.iterations });
    }
    let integrals = mo_transform(&ao, &scf.coefficients, n_atoms)?;
    Ok(ChainSolution { geometry, scf, integrals })
}

/// `(N, E_HF, var_HF, E_inf)` for each even chain length.
pub fn hchain_scan(n_list: &[usize], spacing: f64) -> Result<Vec<ScanRow>> {
    if let Some(&odd) = n_list.iter().find(|&&n| n % 2 != 0) {
        return Err(Error::OpenShell(odd));
    }
    n_list
        .iter()
        .map(|&n| {
            let sol = solve_hchain(n, spacing, &ScfOptions::default())?;
            let occ = aufbau_occupation(n)?;
            Ok(ScanRow {
                n_atoms: n,
                e_hf: sol.scf.energy,
                var_hf: determinant_variance(&sol.integrals, &occ)?,
                e_inf: fock_space_trace_mean(&sol.integrals),
            })
        })
        .collect()
}

/// CSV with header `N,E_HF,var_HF,E_inf`.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("N,E_HF,var_HF,E_inf\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.12e},{:.12e},{:.12e}", r.n_atoms, r.e_hf, r.var_hf, r.e_inf);
    }
    out
}
