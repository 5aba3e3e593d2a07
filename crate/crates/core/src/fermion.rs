//! Molecular integrals, FCIDUMP I/O and the Jordan-Wigner qubit mapping.
//!
//! Integrals are spin-free and stored over spatial orbitals; spin enters at
//! mapping time through a [`SpinOrbitalConvention`]. Two-body integrals use
//! chemists' notation `(pq|rs)` and are packed with their 8-fold symmetry.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliWord, MAX_WORD_QUBITS};

const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[inline]
pub(crate) fn pair(i: usize, j: usize) -> usize {
    if i >= j {
        i * (i + 1) / 2 + j
    } else {
        j * (j + 1) / 2 + i
    }
}

#[inline]
pub(crate) fn quad(p: usize, q: usize, r: usize, s: usize) -> usize {
    pair(pair(p, q), pair(r, s))
}

/// One- and two-body integrals of a molecular Hamiltonian in an orthonormal
/// spatial-orbital basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    n_orb: usize,
    n_elec: usize,
    e_core: f64,
    h: Vec<f64>,
    eri: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn zeros(n_orb: usize, n_elec: usize) -> Result<Self> {
        if n_orb == 0 {
            return Err(Error::InvalidInput("at least one orbital required".into()));
        }
        if n_elec > 2 * n_orb {
            return Err(Error::InvalidInput(format!("{n_elec} electrons do not fit in {n_orb} spatial orbitals")));
        }
        let npair = n_orb * (n_orb + 1) / 2;
        Ok(Self { n_orb, n_elec, e_core: 0.0, h: vec![0.0; n_orb * n_orb], eri: vec![0.0; npair * (npair + 1) / 2] })
    }

    /// Builds from a dense `h` (row-major `n x n`) and dense `eri`
    /// (`n^4`, index `((p*n+q)*n+r)*n+s`), checking all symmetries.
    pub fn from_dense(n_orb: usize, n_elec: usize, e_core: f64, h: &[f64], eri: &[f64]) -> Result<Self> {
        let n = n_orb;
        if h.len() != n * n || eri.len() != n * n * n * n {
            return Err(Error::InvalidInput("dense integral shapes do not match n_orb".into()));
        }
        let mut ints = Self::zeros(n_orb, n_elec)?;
        ints.e_core = e_core;
        for p in 0..n {
            for q in 0..n {
                if (h[p * n + q] - h[q * n + p]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidInput(format!("h not symmetric at ({p},{q})")));
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                ints.h[p * n + q] = 0.5 * (h[p * n + q] + h[q * n + p]);
                ints.h[q * n + p] = ints.h[p * n + q];
            }
        }
        let at = |p: usize, q: usize, r: usize, s: usize| eri[((p * n + q) * n + r) * n + s];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = at(p, q, r, s);
                        let images = [at(q, p, r, s), at(p, q, s, r), at(r, s, p, q), at(s, r, q, p)];
                        if images.iter().any(|w| (w - v).abs() > SYMMETRY_TOLERANCE) {
                            return Err(Error::InvalidInput(format!("eri lacks 8-fold symmetry at ({p}{q}|{r}{s})")));
                        }
                        if p >= q && r >= s && pair(p, q) >= pair(r, s) {
                            ints.eri[quad(p, q, r, s)] = v;
                        }
                    }
                }
            }
        }
        Ok(ints)
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn n_elec(&self) -> usize {
        self.n_elec
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    pub fn set_e_core(&mut self, value: f64) {
        self.e_core = value;
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_orb + q]
    }

    /// Sets `h_pq` and `h_qp`.
    pub fn set_h(&mut self, p: usize, q: usize, value: f64) {
        self.h[p * self.n_orb + q] = value;
        self.h[q * self.n_orb + p] = value;
    }

    /// `(pq|rs)` in chemists' notation.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri[quad(p, q, r, s)]
    }

    /// Sets the whole symmetry class of `(pq|rs)`.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        self.eri[quad(p, q, r, s)] = value;
    }

    /// Dense `n^4` copy of the two-body tensor.
    pub fn eri_dense(&self) -> Vec<f64> {
        let n = self.n_orb;
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

    /// Largest absolute difference over all stored integrals.
    pub fn max_abs_diff(&self, other: &MolecularIntegrals) -> f64 {
        if self.n_orb != other.n_orb {
            return f64::INFINITY;
        }
        let core = (self.e_core - other.e_core).abs();
        let h = self.h.iter().zip(&other.h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let g = self.eri.iter().zip(&other.eri).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        core.max(h).max(g)
    }

    fn check_closed_shell(&self, occupied: &[usize]) -> Result<()> {
        if !self.n_elec.is_multiple_of(2) {
            return Err(Error::OpenShell(self.n_elec));
        }
        if occupied.len() != self.n_elec / 2 {
            return Err(Error::InvalidInput(format!(
                "{} occupied orbitals given for {} electrons",
                occupied.len(),
                self.n_elec
            )));
        }
        let mut seen = vec![false; self.n_orb];
        for &i in occupied {
            if i >= self.n_orb || seen[i] {
                return Err(Error::InvalidInput(format!("bad occupied orbital {i}")));
            }
            seen[i] = true;
        }
        Ok(())
    }
}

/// Aufbau occupation `{0, .., n_elec/2 - 1}` of a closed-shell determinant.
pub fn aufbau_occupation(n_elec: usize) -> Result<Vec<usize>> {
    if !n_elec.is_multiple_of(2) {
        return Err(Error::OpenShell(n_elec));
    }
    Ok((0..n_elec / 2).collect())
}

/// Spin of a spin-orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Alpha,
    Beta,
}

/// Bijection from `(spatial orbital, spin)` to qubit index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinOrbitalConvention {
    /// `qubits[2p + s]` is the qubit of orbital `p` with spin `s` (0 = alpha).
    qubits: Vec<usize>,
}

impl SpinOrbitalConvention {
    /// Qubit `2p` is `(p, alpha)`, qubit `2p+1` is `(p, beta)`.
    pub fn interleaved(n_orb: usize) -> Self {
        Self { qubits: (0..2 * n_orb).collect() }
    }

    /// All alpha orbitals first, then all beta orbitals.
    pub fn blocked(n_orb: usize) -> Self {
        let mut qubits = vec![0; 2 * n_orb];
        for p in 0..n_orb {
            qubits[2 * p] = p;
            qubits[2 * p + 1] = n_orb + p;
        }
        Self { qubits }
    }

    /// Interleaved with alpha and beta labels exchanged.
    pub fn interleaved_swapped(n_orb: usize) -> Self {
        let mut qubits = vec![0; 2 * n_orb];
        for p in 0..n_orb {
            qubits[2 * p] = 2 * p + 1;
            qubits[2 * p + 1] = 2 * p;
        }
        Self { qubits }
    }

    /// Arbitrary table, `qubits[2p + s]`; must be a permutation of `0..2n`.
    pub fn custom(qubits: Vec<usize>) -> Result<Self> {
        let n = qubits.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidConvention(format!("table length {n} is not 2*n_orb")));
        }
        let mut seen = vec![false; n];
        for &q in &qubits {
            if q >= n || seen[q] {
                return Err(Error::InvalidConvention(format!("qubit {q} repeated or out of range")));
            }
            seen[q] = true;
        }
        Ok(Self { qubits })
    }

    pub fn n_orb(&self) -> usize {
        self.qubits.len() / 2
    }

    pub fn qubit(&self, orbital: usize, spin: Spin) -> usize {
        self.qubits[2 * orbital + usize::from(spin == Spin::Beta)]
    }

    /// Qubits occupied by a closed-shell determinant.
    pub fn determinant_qubits(&self, occupied_spatial: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> =
            occupied_spatial.iter().flat_map(|&p| [self.qubit(p, Spin::Alpha), self.qubit(p, Spin::Beta)]).collect();
        out.sort_unstable();
        out
    }
}

type Expansion = Vec<(Complex64, PauliWord)>;

/// `a_q = Z_{<q} (X_q + i Y_q) / 2` and `a_q^dagger = Z_{<q} (X_q - i Y_q) / 2`.
fn ladder(n_qubits: usize, q: usize, dagger: bool) -> Expansion {
    let parity: u128 = (1u128 << q) - 1;
    let bit = 1u128 << q;
    let x_word = PauliWord::from_masks(n_qubits, bit, parity);
    let y_word = PauliWord::from_masks(n_qubits, bit, parity | bit);
    let sign = if dagger { -1.0 } else { 1.0 };
    vec![(Complex64::new(0.5, 0.0), x_word), (Complex64::new(0.0, 0.5 * sign), y_word)]
}

fn accumulate(acc: &mut HashMap<PauliWord, Complex64>, scale: f64, ops: &[&Expansion]) {
    let n_qubits = ops[0][0].1.n_qubits();
    let mut current = vec![(Complex64::new(scale, 0.0), PauliWord::from_masks(n_qubits, 0, 0))];
    for op in ops {
        let mut next = Vec::with_capacity(current.len() * op.len());
        for (c1, w1) in &current {
            for (c2, w2) in op.iter() {
                let (k, w) = w1.product(w2);
                let phase = match k {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                next.push((c1 * c2 * phase, w));
            }
        }
        current = next;
    }
    for (c, w) in current {
        *acc.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
    }
}

/// Jordan-Wigner image of `scale * op_1 op_2 ...`, each factor `(qubit,
/// dagger)`, as unsimplified complex-weighted words.
pub(crate) fn ladder_product(n_qubits: usize, ops: &[(usize, bool)], scale: f64) -> HashMap<PauliWord, Complex64> {
    let expansions: Vec<Expansion> = ops.iter().map(|&(q, d)| ladder(n_qubits, q, d)).collect();
    let refs: Vec<&Expansion> = expansions.iter().collect();
    let mut acc = HashMap::new();
    accumulate(&mut acc, scale, &refs);
    acc
}

/// Jordan-Wigner image of the second-quantized Hamiltonian
/// `e_core + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q`.
pub fn jordan_wigner(ints: &MolecularIntegrals, convention: &SpinOrbitalConvention) -> Result<PauliSum> {
    let n = ints.n_orb;
    if convention.n_orb() != n {
        return Err(Error::InvalidConvention(format!(
            "convention covers {} orbitals, integrals have {n}",
            convention.n_orb()
        )));
    }
    let n_qubits = 2 * n;
    if n_qubits > MAX_WORD_QUBITS {
        return Err(Error::WordTooWide { n_qubits, limit: MAX_WORD_QUBITS });
    }
    let spins = [Spin::Alpha, Spin::Beta];
    let mut create = vec![Vec::new(); n_qubits];
    let mut annihilate = vec![Vec::new(); n_qubits];
    for q in 0..n_qubits {
        create[q] = ladder(n_qubits, q, true);
        annihilate[q] = ladder(n_qubits, q, false);
    }
    let mut acc: HashMap<PauliWord, Complex64> = HashMap::new();
    acc.insert(PauliWord::identity(n_qubits)?, Complex64::new(ints.e_core, 0.0));

    for p in 0..n {
        for q in 0..n {
            let v = ints.h(p, q);
            if v == 0.0 {
                continue;
            }
            for s in spins {
                let (qp, qq) = (convention.qubit(p, s), convention.qubit(q, s));
                accumulate(&mut acc, v, &[&create[qp], &annihilate[qq]]);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.eri(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for sig in spins {
                        for tau in spins {
                            let (qp, qq) = (convention.qubit(p, sig), convention.qubit(q, sig));
                            let (qr, qs) = (convention.qubit(r, tau), convention.qubit(s, tau));
                            if qp == qr || qs == qq {
                                continue;
                            }
                            accumulate(
                                &mut acc,
                                0.5 * v,
                                &[&create[qp], &create[qr], &annihilate[qs], &annihilate[qq]],
                            );
                        }
                    }
                }
            }
        }
    }

    let mut terms: Vec<(f64, PauliWord)> = Vec::with_capacity(acc.len());
    for (w, c) in acc {
        // Hermitian input gives real coefficients up to rounding.
        debug_assert!(c.im.abs() < 1e-8, "imaginary JW coefficient {c} on {w}");
        terms.push((c.re, w));
    }
    Ok(PauliSum::from_terms(n_qubits, terms)?.simplify())
}

/// Infinite-temperature mean energy `Tr(H) / 2^n` over the full Fock space,
/// straight from the integrals.
///
/// With `Tr(a+_i a_j)/2^n = delta_ij / 2` and
/// `Tr(a+_i a+_k a_l a_j)/2^n = (delta_ij delta_kl - delta_il delta_kj) / 4`
/// for `i != k`, the spin sums collapse to
///
/// `E_inf = e_core + sum_p h_pp + 1/2 sum_pr (pp|rr) - 1/4 sum_pq (pq|qp)`.
pub fn fock_space_trace_mean(ints: &MolecularIntegrals) -> f64 {
    let n = ints.n_orb;
    let one: f64 = (0..n).map(|p| ints.h(p, p)).sum();
    let mut coulomb = 0.0;
    let mut exchange = 0.0;
    for p in 0..n {
        for q in 0..n {
            coulomb += ints.eri(p, p, q, q);
            exchange += ints.eri(p, q, q, p);
        }
    }
    ints.e_core + one + 0.5 * coulomb - 0.25 * exchange
}

/// Closed-shell determinant energy in the integrals' orbital basis.
pub fn determinant_energy(ints: &MolecularIntegrals, occupied: &[usize]) -> Result<f64> {
    ints.check_closed_shell(occupied)?;
    let mut e = ints.e_core;
    for &i in occupied {
        e += 2.0 * ints.h(i, i);
        for &j in occupied {
            e += 2.0 * ints.eri(i, i, j, j) - ints.eri(i, j, j, i);
        }
    }
    Ok(e)
}

/// Exact energy variance `<H^2> - <H>^2` of a closed-shell determinant:
/// the squared single-excitation Fock couplings plus the squared
/// antisymmetrized double-excitation elements, over spin-orbitals.
pub fn determinant_variance(ints: &MolecularIntegrals, occupied: &[usize]) -> Result<f64> {
    ints.check_closed_shell(occupied)?;
    let n = ints.n_orb;
    let mut is_occ = vec![false; n];
    for &i in occupied {
        is_occ[i] = true;
    }
    let virt: Vec<usize> = (0..n).filter(|&p| !is_occ[p]).collect();

    let mut singles = 0.0;
    for &a in &virt {
        for &i in occupied {
            let mut f = ints.h(a, i);
            for &j in occupied {
                f += 2.0 * ints.eri(a, i, j, j) - ints.eri(a, j, j, i);
            }
            singles += f * f;
        }
    }
    // both spins contribute identically
    singles *= 2.0;

    // spin-orbitals as (spatial, spin) with spin 0/1
    let occ_so: Vec<(usize, u8)> = occupied.iter().flat_map(|&i| [(i, 0u8), (i, 1u8)]).collect();
    let virt_so: Vec<(usize, u8)> = virt.iter().flat_map(|&a| [(a, 0u8), (a, 1u8)]).collect();
    // <ij|ab> = (ia|jb) with spin conservation on each electron
    let phys = |i: (usize, u8), j: (usize, u8), a: (usize, u8), b: (usize, u8)| -> f64 {
        if i.1 == a.1 && j.1 == b.1 {
            ints.eri(i.0, a.0, j.0, b.0)
        } else {
            0.0
        }
    };
    let mut doubles = 0.0;
    for x in 0..occ_so.len() {
        for y in x + 1..occ_so.len() {
            let (i, j) = (occ_so[x], occ_so[y]);
            for u in 0..virt_so.len() {
                for w in u + 1..virt_so.len() {
                    let (a, b) = (virt_so[u], virt_so[w]);
                    let g = phys(i, j, a, b) - phys(i, j, b, a);
                    doubles += g * g;
                }
            }
        }
    }
    Ok(singles + doubles)
}

/// Parses FCIDUMP text (1-based indices, chemists' notation).
///
/// Lines of the form `value i 0 0 0` (orbital energies written by some
/// producers) are accepted and ignored.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals> {
    let mut header = String::new();
    let mut body_start = None;
    let mut in_header = false;
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if !in_header {
            if t.is_empty() {
                continue;
            }
            if !t.to_ascii_uppercase().starts_with("&FCI") {
                return Err(Error::Parse { line: idx + 1, message: "expected `&FCI` header".into() });
            }
            in_header = true;
            header.push_str(&t[4..]);
            header.push(' ');
        } else {
            header.push_str(t);
            header.push(' ');
        }
        let upper = t.to_ascii_uppercase();
        if upper.ends_with("&END") || upper.ends_with('/') || upper == "&END" || upper == "/" {
            body_start = Some(idx + 1);
            break;
        }
    }
    let body_start = body_start.ok_or(Error::Parse { line: 0, message: "unterminated FCIDUMP header".into() })?;
    let header = header.replace("&END", "").replace("&end", "").replace('/', " ");
    let fields = parse_namelist(&header);
    let get = |key: &str| -> Result<usize> {
        let v = fields.get(key).ok_or_else(|| Error::Parse { line: 1, message: format!("missing {key} in header") })?;
        v.first()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Parse { line: 1, message: format!("bad {key} value") })
    };
    let n_orb = get("NORB")?;
    let n_elec = get("NELEC")?;
    let mut ints =
        MolecularIntegrals::zeros(n_orb, n_elec).map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;

    let npair = n_orb * (n_orb + 1) / 2;
    let mut seen_eri = vec![false; npair * (npair + 1) / 2];
    let mut seen_h = vec![false; npair];
    let mut seen_core = false;

    for (idx, line) in text.lines().enumerate().skip(body_start) {
        let line_no = idx + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse { line: line_no, message };
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(perr(format!("expected 5 fields, found {}", toks.len())));
        }
        let value: f64 =
            toks[0].replace(['D', 'd'], "e").parse().map_err(|_| perr(format!("bad value `{}`", toks[0])))?;
        let mut idx4 = [0usize; 4];
        for (k, tok) in toks[1..].iter().enumerate() {
            let v: usize = tok.parse().map_err(|_| perr(format!("bad index `{tok}`")))?;
            if v > n_orb {
                return Err(perr(format!("index {v} out of range [0..{n_orb}]")));
            }
            idx4[k] = v;
        }
        let check = |slot: &mut bool, old: f64| -> Result<()> {
            if *slot && (old - value).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("inconsistent duplicate entry ({old} vs {value})"),
                });
            }
            *slot = true;
            Ok(())
        };
        match idx4 {
            [0, 0, 0, 0] => {
                check(&mut seen_core, ints.e_core)?;
                ints.e_core = value;
            }
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (p, q) = (i - 1, j - 1);
                check(&mut seen_h[pair(p, q)], ints.h(p, q))?;
                ints.set_h(p, q, value);
            }
            [i, 0, 0, 0] if i > 0 => {}
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                let slot = quad(p, q, r, s);
                check(&mut seen_eri[slot], ints.eri[slot])?;
                ints.eri[slot] = value;
            }
            _ => return Err(perr(format!("unsupported index pattern {idx4:?}"))),
        }
    }
    Ok(ints)
}

fn parse_namelist(header: &str) -> HashMap<String, Vec<String>> {
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    let mut key: Option<String> = None;
    for raw in header.split(|c: char| c == ',' || c.is_whitespace()) {
        let tok = raw.trim();
        if tok.is_empty() {
            continue;
        }
        if let Some((k, v)) = tok.split_once('=') {
            let k = k.trim().to_ascii_uppercase();
            let entry = out.entry(k.clone()).or_default();
            if !v.trim().is_empty() {
                entry.push(v.trim().to_string());
            }
            key = Some(k);
        } else if let Some(k) = &key {
            out.entry(k.clone()).or_default().push(tok.to_string());
        }
    }
    out
}

/// Canonical FCIDUMP: one representative per symmetry class with
/// `i >= j`, `k >= l`, `ij >= kl`, sorted, 17 significant digits, zero
/// entries omitted, core line last.
pub fn write_fcidump(ints: &MolecularIntegrals) -> String {
    let n = ints.n_orb;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(out, "&FCI NORB={n},NELEC={},MS2=0,", ints.n_elec);
    let _ = writeln!(out, "  ORBSYM={orbsym},");
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, "&END");
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if pair(i, j) < pair(k, l) {
                        continue;
                    }
                    let v = ints.eri(i, j, k, l);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:.16e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = ints.h(i, j);
            if v != 0.0 {
                let _ = writeln!(out, "{v:.16e} {} {} 0 0", i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.16e} 0 0 0 0", ints.e_core);
    out
}
