//! Pauli words, real-weighted Pauli sums and matrix-free statevector kernels.
//!
//! Basis indices are big-endian in qubit occupation: qubit 0 is the most
//! significant bit of the amplitude index. A word stores its letters as two
//! bit masks in qubit order (bit `q` refers to qubit `q`), with
//! `P = i^{|x & z|} X^x Z^z`, so a set bit in both masks is a `Y`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Widest Pauli word representable (two `u128` masks).
pub const MAX_WORD_QUBITS: usize = 128;

/// Hard ceiling on statevector size.
pub const MAX_STATE_QUBITS: usize = 26;

/// Terms with smaller magnitude are dropped by [`PauliSum::simplify`].
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Imaginary residue above which an expectation is rejected.
const HERMITIAN_TOLERANCE: f64 = 1e-8;

/// Below this dimension the kernels run single-threaded.
const PARALLEL_MIN_DIM: usize = 1 << 12;

const I_POW: [Complex64; 4] =
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Pauli letters, without coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n_qubits: usize,
    x: u128,
    z: u128,
}

impl PauliWord {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_word_width(n_qubits)?;
        Ok(Self { n_qubits, x: 0, z: 0 })
    }

    /// Builds a word from `(qubit, letter)` pairs; unlisted qubits are `I`.
    pub fn from_letters(n_qubits: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut word = Self::identity(n_qubits)?;
        for &(q, p) in letters {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            let bit = 1u128 << q;
            if (word.x | word.z) & bit != 0 {
                return Err(Error::InvalidInput(format!("qubit {q} listed twice in word")));
            }
            let (bx, bz) = p.bits();
            if bx {
                word.x |= bit;
            }
            if bz {
                word.z |= bit;
            }
        }
        Ok(word)
    }

    pub(crate) fn from_masks(n_qubits: usize, x: u128, z: u128) -> Self {
        debug_assert!(n_qubits <= MAX_WORD_QUBITS);
        Self { n_qubits, x, z }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u128 {
        self.x
    }

    pub fn z_mask(&self) -> u128 {
        self.z
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        let bit = 1u128 << qubit;
        Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n_qubits).map(|q| self.letter(q))
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn y_count(&self) -> usize {
        (self.x & self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Word product `self * other = i^k * word`, returning `(k mod 4, word)`.
    pub(crate) fn product(&self, other: &PauliWord) -> (u8, PauliWord) {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y1 = (self.x & self.z).count_ones() as i64;
        let y2 = (other.x & other.z).count_ones() as i64;
        let y3 = (x & z).count_ones() as i64;
        let swaps = (self.z & other.x).count_ones() as i64;
        let k = (y1 + y2 - y3 + 2 * swaps).rem_euclid(4) as u8;
        (k, PauliWord { n_qubits: self.n_qubits, x, z })
    }

    /// Masks translated to amplitude-index bit positions.
    fn index_masks(&self) -> (usize, usize) {
        (to_index_mask(self.x, self.n_qubits), to_index_mask(self.z, self.n_qubits))
    }
}

/// Lexicographic over letters, qubit 0 first, with `I < X < Y < Z`.
impl Ord for PauliWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            let diff = (self.x ^ other.x) | (self.z ^ other.z);
            if diff == 0 {
                return Ordering::Equal;
            }
            let q = diff.trailing_zeros() as usize;
            self.letter(q).cmp(&other.letter(q))
        })
    }
}

impl PartialOrd for PauliWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in 0..self.n_qubits {
            let p = self.letter(q);
            if p == Pauli::I {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.symbol(), q)?;
            first = false;
        }
        Ok(())
    }
}

fn check_word_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidInput("pauli word needs at least one qubit".into()));
    }
    if n_qubits > MAX_WORD_QUBITS {
        return Err(Error::WordTooWide { n_qubits, limit: MAX_WORD_QUBITS });
    }
    Ok(())
}

fn to_index_mask(mask: u128, n_qubits: usize) -> usize {
    let mut out = 0usize;
    let mut m = mask;
    while m != 0 {
        let q = m.trailing_zeros() as usize;
        out |= 1usize << (n_qubits - 1 - q);
        m &= m - 1;
    }
    out
}

/// Normalized complex amplitudes over `2^n_qubits` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero basis state `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_state_width(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidInput(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational-basis state with the listed qubits set to `|1>`.
    pub fn determinant(n_qubits: usize, occupied: &[usize]) -> Result<Self> {
        check_state_width(n_qubits)?;
        let mut index = 0usize;
        for &q in occupied {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            index |= 1usize << (n_qubits - 1 - q);
        }
        Self::basis(n_qubits, index)
    }

    /// Wraps and normalizes raw amplitudes.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::from_raw(n_qubits, amplitudes)?;
        let norm = state.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput("state has zero or non-finite norm".into()));
        }
        state.scale(1.0 / norm);
        Ok(state)
    }

    /// Wraps raw amplitudes without normalizing them.
    pub fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_state_width(n_qubits)?;
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::InvalidInput(format!(
                "expected {} amplitudes for {n_qubits} qubits, got {}",
                1usize << n_qubits,
                amplitudes.len()
            )));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        Ok(())
    }
}

fn check_state_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidInput("statevector needs at least one qubit".into()));
    }
    if n_qubits > MAX_STATE_QUBITS {
        return Err(Error::TooManyQubits { n_qubits, limit: MAX_STATE_QUBITS });
    }
    Ok(())
}

/// Real-weighted sum of Pauli words on a fixed qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliWord)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_word_width(n_qubits)?;
        Ok(Self { n_qubits, terms: Vec::new() })
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<(f64, PauliWord)>) -> Result<Self> {
        let mut sum = Self::new(n_qubits)?;
        for (c, w) in terms {
            sum.push(c, w)?;
        }
        Ok(sum)
    }

    pub fn push(&mut self, coefficient: f64, word: PauliWord) -> Result<()> {
        if word.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, found: word.n_qubits });
        }
        self.terms.push((coefficient, word));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliWord)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges duplicate words, drops terms below [`DROP_TOLERANCE`] and sorts
    /// into canonical word order.
    pub fn simplify(&self) -> PauliSum {
        let mut merged: BTreeMap<PauliWord, f64> = BTreeMap::new();
        for &(c, w) in &self.terms {
            *merged.entry(w).or_insert(0.0) += c;
        }
        let terms = merged.into_iter().filter(|(_, c)| c.abs() >= DROP_TOLERANCE).map(|(w, c)| (c, w)).collect();
        PauliSum { n_qubits: self.n_qubits, terms }
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        PauliSum { n_qubits: self.n_qubits, terms: self.terms.iter().map(|&(c, w)| (c * factor, w)).collect() }
    }

    /// Concatenation `self + other`, not simplified.
    pub fn plus(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(PauliSum { n_qubits: self.n_qubits, terms })
    }

    /// Coefficient of the all-identity word, i.e. `Tr(H) / 2^n`.
    ///
    /// Every non-identity word is traceless, so only identity terms survive.
    /// Summing them also makes the result correct on unsimplified sums.
    pub fn trace_mean(&self) -> f64 {
        self.terms.iter().filter(|(_, w)| w.is_identity()).map(|(c, _)| c).sum()
    }

    /// Sum of absolute coefficients, an upper bound on the spectral radius.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits: {}\n", self.n_qubits);
        for (c, w) in &self.terms {
            out.push_str(&format!("{c:e} {w}\n"));
        }
        out
    }
}

impl FromStr for PauliSum {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut sum: Option<PauliSum> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line: line_no, message };
            let Some(current) = sum.as_mut() else {
                let rest = line.strip_prefix("qubits:").ok_or_else(|| perr("expected header `qubits: <n>`".into()))?;
                let n: usize = rest.trim().parse().map_err(|_| perr(format!("bad qubit count `{}`", rest.trim())))?;
                sum = Some(PauliSum::new(n).map_err(|e| perr(e.to_string()))?);
                continue;
            };
            let mut tokens = line.split_whitespace();
            let coef_tok = tokens.next().unwrap_or_default();
            let coef: f64 = coef_tok.parse().map_err(|_| perr(format!("bad coefficient `{coef_tok}`")))?;
            let rest: Vec<&str> = tokens.collect();
            if rest.is_empty() {
                return Err(perr("missing pauli word".into()));
            }
            let word = if rest == ["I"] {
                PauliWord::identity(current.n_qubits).map_err(|e| perr(e.to_string()))?
            } else {
                let mut letters = Vec::with_capacity(rest.len());
                for tok in rest {
                    let mut chars = tok.chars();
                    let p = match chars.next() {
                        Some('X') => Pauli::X,
                        Some('Y') => Pauli::Y,
                        Some('Z') => Pauli::Z,
                        _ => return Err(perr(format!("bad pauli token `{tok}`"))),
                    };
                    let q: usize = chars.as_str().parse().map_err(|_| perr(format!("bad qubit index in `{tok}`")))?;
                    letters.push((q, p));
                }
                PauliWord::from_letters(current.n_qubits, &letters).map_err(|e| perr(e.to_string()))?
            };
            current.push(coef, word).map_err(|e| perr(e.to_string()))?;
        }
        sum.ok_or(Error::Parse { line: 0, message: "missing `qubits: <n>` header".into() })
    }
}

/// Returns `P|psi>`.
pub fn apply_word(word: &PauliWord, state: &StateVector) -> Result<StateVector> {
    if word.n_qubits != state.n_qubits {
        return Err(Error::QubitMismatch { expected: state.n_qubits, found: word.n_qubits });
    }
    let (x, z) = word.index_masks();
    let phase = I_POW[word.y_count() % 4];
    let src = &state.amplitudes;
    let amplitudes = (0..src.len())
        .map(|c| {
            let b = c ^ x;
            let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            phase * src[b] * sign
        })
        .collect();
    Ok(StateVector { n_qubits: state.n_qubits, amplitudes })
}

/// Terms grouped by their X mask, in index-bit space.
struct CompiledSum {
    groups: Vec<(usize, Vec<(usize, Complex64)>)>,
}

impl CompiledSum {
    fn new(h: &PauliSum) -> Self {
        let mut by_x: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
        for (c, w) in &h.terms {
            let (x, z) = w.index_masks();
            by_x.entry(x).or_default().push((z, I_POW[w.y_count() % 4] * *c));
        }
        Self { groups: by_x.into_iter().collect() }
    }

    #[inline]
    fn row(&self, c: usize, src: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, zs) in &self.groups {
            let b = c ^ x;
            let mut weight = Complex64::new(0.0, 0.0);
            for &(z, ph) in zs {
                if (b & z).count_ones().is_multiple_of(2) {
                    weight += ph;
                } else {
                    weight -= ph;
                }
            }
            acc += weight * src[b];
        }
        acc
    }
}

/// Returns the unnormalized vector `H|psi>`.
///
/// Each output amplitude is accumulated in a fixed term order, so results
/// are bitwise identical for any thread count.
pub fn apply_sum(h: &PauliSum, state: &StateVector) -> Result<StateVector> {
    if h.n_qubits != state.n_qubits {
        return Err(Error::QubitMismatch { expected: state.n_qubits, found: h.n_qubits });
    }
    let compiled = CompiledSum::new(h);
    let src = &state.amplitudes;
    let amplitudes: Vec<Complex64> = if src.len() >= PARALLEL_MIN_DIM {
        (0..src.len()).into_par_iter().map(|c| compiled.row(c, src)).collect()
    } else {
        (0..src.len()).map(|c| compiled.row(c, src)).collect()
    };
    Ok(StateVector { n_qubits: state.n_qubits, amplitudes })
}

/// `<psi|H|psi>`; rejects a non-negligible imaginary part.
pub fn expectation(h: &PauliSum, state: &StateVector) -> Result<f64> {
    let hpsi = apply_sum(h, state)?;
    real_part(state.inner(&hpsi)?)
}

/// `<H^2> - <H>^2`, with `<H^2>` taken as `||H psi||^2`.
pub fn variance(h: &PauliSum, state: &StateVector) -> Result<f64> {
    Ok(energy_and_variance(h, state)?.1)
}

/// Energy and variance from a single application of `H`.
pub fn energy_and_variance(h: &PauliSum, state: &StateVector) -> Result<(f64, f64)> {
    let hpsi = apply_sum(h, state)?;
    let e = real_part(state.inner(&hpsi)?)?;
    let var = (hpsi.norm_sqr() - e * e).max(0.0);
    Ok((e, var))
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { imag: z.im });
    }
    Ok(z.re)
}

/// Free-function form of [`PauliSum::trace_mean`].
pub fn trace_mean(h: &PauliSum) -> f64 {
    h.trace_mean()
}

/// Free-function form of [`PauliSum::simplify`].
pub fn simplify(h: &PauliSum) -> PauliSum {
    h.simplify()
}
