//! Aaronson–Gottesman stabiliser tableau.
//!
//! Rows `0..n` are destabilisers, rows `n..2n` stabilisers and row `2n` is
//! scratch space for deterministic measurements. Each row is stored as packed
//! `x`/`z` words so that single- and two-qubit conjugations touch one word per row.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::pauli::{row_product_phase, words_for, Pauli, PauliString};

/// Rotation axis of a single-qubit rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// Named Clifford gates understood by [`StabilizerTableau::apply_clifford`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    /// `exp(-i θ/2 P)` on one qubit; `θ` must be a multiple of π/2.
    Rotation(Axis, f64, usize),
    /// `exp(-i θ/2 X⊗X)`; `θ` must be a multiple of π/2.
    Ms(f64, usize, usize),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TableauError {
    #[error("rotation angle {0} requires dense backend")]
    NonClifford(f64),
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate targets must be distinct (got {0} twice)")]
    DuplicateTarget(usize),
    #[error("pauli string acts on {found} qubits, tableau has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("tableau invariant violated: {0}")]
    Invariant(&'static str),
}

/// Number of quarter turns (mod 4) if `theta` is a multiple of π/2.
pub fn clifford_quarter_turns(theta: f64) -> Option<u8> {
    let k = libm::round(theta / FRAC_PI_2);
    if libm::fabs(theta - k * FRAC_PI_2) < 1e-9 {
        Some((k as i64).rem_euclid(4) as u8)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    w: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

impl StabilizerTableau {
    /// The all-zeros state `|0...0⟩`.
    pub fn new(n: usize) -> Self {
        let w = words_for(n);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            w,
            xs: vec![0; rows * w],
            zs: vec![0; rows * w],
            signs: vec![false; rows],
        };
        t.reset_all();
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Returns to `|0...0⟩` without reallocating.
    pub fn reset_all(&mut self) {
        self.xs.fill(0);
        self.zs.fill(0);
        self.signs.fill(false);
        for q in 0..self.n {
            self.xs[q * self.w + q / 64] |= 1 << (q % 64);
            self.zs[(q + self.n) * self.w + q / 64] |= 1 << (q % 64);
        }
    }

    fn check(&self, q: usize) -> Result<(), TableauError> {
        if q < self.n {
            Ok(())
        } else {
            Err(TableauError::QubitOutOfRange { qubit: q, n: self.n })
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), TableauError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(TableauError::DuplicateTarget(a));
        }
        Ok(())
    }

    #[inline]
    fn bit(words: &[u64], row: usize, w: usize, q: usize) -> bool {
        (words[row * w + q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn x(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.xs, row, self.w, q)
    }

    #[inline]
    fn z(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.zs, row, self.w, q)
    }

    fn row_x(&self, row: usize) -> &[u64] {
        &self.xs[row * self.w..(row + 1) * self.w]
    }

    fn row_z(&self, row: usize) -> &[u64] {
        &self.zs[row * self.w..(row + 1) * self.w]
    }

    /// The stabiliser generator `i` as a signed Pauli string.
    pub fn stabilizer(&self, i: usize) -> PauliString {
        self.row_string(self.n + i)
    }

    /// The destabiliser generator `i` as a signed Pauli string.
    pub fn destabilizer(&self, i: usize) -> PauliString {
        self.row_string(i)
    }

    fn row_string(&self, row: usize) -> PauliString {
        let mut s = PauliString::identity(self.n);
        for q in 0..self.n {
            s.set(q, Pauli::from_bits(self.x(row, q), self.z(row, q)));
        }
        if self.signs[row] {
            s.set_phase(crate::pauli::Phase::MinusOne);
        }
        s
    }

    fn h(&mut self, q: usize) {
        let (wi, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let i = r * self.w + wi;
            let (x, z) = (self.xs[i] & m, self.zs[i] & m);
            self.signs[r] ^= x != 0 && z != 0;
            self.xs[i] = (self.xs[i] & !m) | z;
            self.zs[i] = (self.zs[i] & !m) | x;
        }
    }

    fn s(&mut self, q: usize) {
        let (wi, m) = (q / 64, 1u64 << (q % 64));
        for r in 0..2 * self.n {
            let i = r * self.w + wi;
            let (x, z) = (self.xs[i] & m, self.zs[i] & m);
            self.signs[r] ^= x != 0 && z != 0;
            self.zs[i] ^= x;
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (wc, mc) = (c / 64, 1u64 << (c % 64));
        let (wt, mt) = (t / 64, 1u64 << (t % 64));
        for r in 0..2 * self.n {
            let b = r * self.w;
            let xc = self.xs[b + wc] & mc != 0;
            let zc = self.zs[b + wc] & mc != 0;
            let xt = self.xs[b + wt] & mt != 0;
            let zt = self.zs[b + wt] & mt != 0;
            self.signs[r] ^= xc && zt && (xt == zc);
            if xc {
                self.xs[b + wt] ^= mt;
            }
            if zt {
                self.zs[b + wc] ^= mc;
            }
        }
    }

    fn pauli_sign_flip(&mut self, q: usize, p: Pauli) {
        let (px, pz) = p.bits();
        for r in 0..2 * self.n {
            let anti = (px && self.z(r, q)) ^ (pz && self.x(r, q));
            self.signs[r] ^= anti;
        }
    }

    /// Applies a named Clifford gate by conjugation.
    pub fn apply_clifford(&mut self, gate: CliffordGate) -> Result<(), TableauError> {
        match gate {
            CliffordGate::H(q) => {
                self.check(q)?;
                self.h(q);
            }
            CliffordGate::S(q) => {
                self.check(q)?;
                self.s(q);
            }
            CliffordGate::Sdg(q) => {
                self.check(q)?;
                self.s(q);
                self.pauli_sign_flip(q, Pauli::Z);
            }
            CliffordGate::X(q) => {
                self.check(q)?;
                self.pauli_sign_flip(q, Pauli::X);
            }
            CliffordGate::Y(q) => {
                self.check(q)?;
                self.pauli_sign_flip(q, Pauli::Y);
            }
            CliffordGate::Z(q) => {
                self.check(q)?;
                self.pauli_sign_flip(q, Pauli::Z);
            }
            CliffordGate::Cnot(c, t) => {
                self.check_pair(c, t)?;
                self.cnot(c, t);
            }
            CliffordGate::Cz(a, b) => {
                self.check_pair(a, b)?;
                self.h(b);
                self.cnot(a, b);
                self.h(b);
            }
            CliffordGate::Rotation(axis, theta, q) => {
                self.check(q)?;
                let k = clifford_quarter_turns(theta).ok_or(TableauError::NonClifford(theta))?;
                self.rotate_sparse(&[(q, axis.pauli())], k);
            }
            CliffordGate::Ms(theta, a, b) => {
                self.check_pair(a, b)?;
                let k = clifford_quarter_turns(theta).ok_or(TableauError::NonClifford(theta))?;
                self.rotate_sparse(&[(a, Pauli::X), (b, Pauli::X)], k);
            }
        }
        Ok(())
    }

    /// Applies `exp(-i θ/2 P)` for a Hermitian Pauli product `P` given sparsely.
    pub fn apply_pauli_rotation(&mut self, terms: &[(usize, Pauli)], theta: f64) -> Result<(), TableauError> {
        for (i, &(q, _)) in terms.iter().enumerate() {
            self.check(q)?;
            if terms[..i].iter().any(|&(p, _)| p == q) {
                return Err(TableauError::DuplicateTarget(q));
            }
        }
        let k = clifford_quarter_turns(theta).ok_or(TableauError::NonClifford(theta))?;
        self.rotate_sparse(terms, k);
        Ok(())
    }

    fn rotate_sparse(&mut self, terms: &[(usize, Pauli)], k: u8) {
        if k == 0 {
            return;
        }
        let mut px = vec![0u64; self.w];
        let mut pz = vec![0u64; self.w];
        for &(q, p) in terms {
            let (bx, bz) = p.bits();
            px[q / 64] |= (bx as u64) << (q % 64);
            pz[q / 64] |= (bz as u64) << (q % 64);
        }
        for r in 0..2 * self.n {
            let b = r * self.w;
            let mut anti = 0u32;
            for w in 0..self.w {
                anti ^= ((px[w] & self.zs[b + w]) ^ (pz[w] & self.xs[b + w])).count_ones() & 1;
            }
            if anti == 0 {
                continue;
            }
            if k == 2 {
                self.signs[r] ^= true;
                continue;
            }
            // Q -> c P Q with c = -i for a quarter turn and +i for three.
            let g = row_product_phase(&px, &pz, &self.xs[b..b + self.w], &self.zs[b..b + self.w]);
            let c = if k == 1 { 3 } else { 1 };
            let e = (2 * self.signs[r] as u32 + g + c) % 4;
            debug_assert!(e % 2 == 0);
            self.signs[r] = e == 2;
            for w in 0..self.w {
                self.xs[b + w] ^= px[w];
                self.zs[b + w] ^= pz[w];
            }
        }
    }

    /// Applies a Pauli fault: flips the sign of every anticommuting generator.
    pub fn apply_pauli_fault(&mut self, p: &PauliString) -> Result<(), TableauError> {
        if p.num_qubits() != self.n {
            return Err(TableauError::SizeMismatch {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        let (px, pz) = (p.x_words(), p.z_words());
        for r in 0..2 * self.n {
            let b = r * self.w;
            let mut anti = 0u32;
            for w in 0..self.w {
                anti ^= ((px[w] & self.zs[b + w]) ^ (pz[w] & self.xs[b + w])).count_ones() & 1;
            }
            self.signs[r] ^= anti == 1;
        }
        Ok(())
    }

    /// Single-qubit Pauli fault without building a full string.
    pub fn apply_pauli_1q(&mut self, q: usize, p: Pauli) -> Result<(), TableauError> {
        self.check(q)?;
        if p != Pauli::I {
            self.pauli_sign_flip(q, p);
        }
        Ok(())
    }

    /// Row `h` becomes `row_i * row_h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.w;
        let g = row_product_phase(
            &self.xs[i * w..(i + 1) * w],
            &self.zs[i * w..(i + 1) * w],
            &self.xs[h * w..(h + 1) * w],
            &self.zs[h * w..(h + 1) * w],
        );
        let e = (2 * self.signs[h] as u32 + 2 * self.signs[i] as u32 + g) % 4;
        self.signs[h] = e >= 2;
        for k in 0..w {
            self.xs[h * w + k] ^= self.xs[i * w + k];
            self.zs[h * w + k] ^= self.zs[i * w + k];
        }
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.w;
        for k in 0..w {
            self.xs[dst * w + k] = self.xs[src * w + k];
            self.zs[dst * w + k] = self.zs[src * w + k];
        }
        self.signs[dst] = self.signs[src];
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.w;
        self.xs[row * w..(row + 1) * w].fill(0);
        self.zs[row * w..(row + 1) * w].fill(0);
        self.signs[row] = false;
    }

    /// Outcome of a Z measurement on `q` if it is deterministic; the state is not changed.
    pub fn peek_z(&mut self, q: usize) -> Result<Option<bool>, TableauError> {
        self.check(q)?;
        if (self.n..2 * self.n).any(|r| self.x(r, q)) {
            return Ok(None);
        }
        Ok(Some(self.deterministic_outcome(q)))
    }

    fn deterministic_outcome(&mut self, q: usize) -> bool {
        let scratch = 2 * self.n;
        self.clear_row(scratch);
        for i in 0..self.n {
            if self.x(i, q) {
                self.rowsum(scratch, i + self.n);
            }
        }
        self.signs[scratch]
    }

    /// Projective Z measurement; random outcomes are drawn from `rng`.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, TableauError> {
        self.check(q)?;
        match (self.n..2 * self.n).find(|&r| self.x(r, q)) {
            None => Ok(self.deterministic_outcome(q)),
            Some(p) => {
                let outcome: bool = rng.gen();
                self.collapse(q, p, outcome);
                Ok(outcome)
            }
        }
    }

    /// Forces the outcome of a Z measurement. Fails if that outcome has zero probability.
    pub fn project_z(&mut self, q: usize, outcome: bool) -> Result<(), TableauError> {
        self.check(q)?;
        match (self.n..2 * self.n).find(|&r| self.x(r, q)) {
            None => {
                if self.deterministic_outcome(q) == outcome {
                    Ok(())
                } else {
                    Err(TableauError::Invariant("forced projection onto zero-probability outcome"))
                }
            }
            Some(p) => {
                self.collapse(q, p, outcome);
                Ok(())
            }
        }
    }

    fn collapse(&mut self, q: usize, p: usize, outcome: bool) {
        for r in 0..2 * self.n {
            if r != p && self.x(r, q) {
                self.rowsum(r, p);
            }
        }
        self.copy_row(p - self.n, p);
        self.clear_row(p);
        self.zs[p * self.w + q / 64] |= 1 << (q % 64);
        self.signs[p] = outcome;
    }

    /// Measures `q` and flips it back to `|0⟩`.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), TableauError> {
        if self.measure_z(q, rng)? {
            self.pauli_sign_flip(q, Pauli::X);
        }
        Ok(())
    }

    /// Expectation value of a Hermitian Pauli `p`: `Some(±1)` if `±p` stabilises the state, `Some(0)` otherwise.
    pub fn expectation(&mut self, p: &PauliString) -> Result<i8, TableauError> {
        if p.num_qubits() != self.n {
            return Err(TableauError::SizeMismatch {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        let (px, pz) = (p.x_words().to_vec(), p.z_words().to_vec());
        let anti = |t: &Self, r: usize| {
            let mut a = 0u32;
            for w in 0..t.w {
                a ^= ((px[w] & t.row_z(r)[w]) ^ (pz[w] & t.row_x(r)[w])).count_ones() & 1;
            }
            a == 1
        };
        if (self.n..2 * self.n).any(|r| anti(self, r)) {
            return Ok(0);
        }
        let scratch = 2 * self.n;
        self.clear_row(scratch);
        for i in 0..self.n {
            if anti(self, i) {
                self.rowsum(scratch, i + self.n);
            }
        }
        debug_assert!(self.row_x(scratch) == px.as_slice() && self.row_z(scratch) == pz.as_slice());
        let prod_phase = if self.signs[scratch] { 2 } else { 0 };
        let rel = (prod_phase + 4 - p.phase().exponent()) % 4;
        match rel {
            0 => Ok(1),
            2 => Ok(-1),
            _ => Err(TableauError::Invariant("expectation of non-Hermitian operator")),
        }
    }

    /// Checks commutation structure and full rank of the generator matrix.
    pub fn validate(&self) -> Result<(), TableauError> {
        let n = self.n;
        let anti = |a: usize, b: usize| {
            let mut s = 0u32;
            for w in 0..self.w {
                s ^= ((self.row_x(a)[w] & self.row_z(b)[w]) ^ (self.row_z(a)[w] & self.row_x(b)[w])).count_ones() & 1;
            }
            s == 1
        };
        for i in 0..n {
            for j in 0..n {
                if anti(n + i, n + j) {
                    return Err(TableauError::Invariant("stabilisers do not commute"));
                }
                if anti(i, n + j) != (i == j) {
                    return Err(TableauError::Invariant("destabiliser pairing broken"));
                }
            }
        }
        // Gaussian elimination over GF(2) on the 2n x 2n matrix [x | z].
        let mut rows: Vec<Vec<u64>> = (0..2 * n)
            .map(|r| {
                let mut v = self.row_x(r).to_vec();
                v.extend_from_slice(self.row_z(r));
                v
            })
            .collect();
        let cols = 2 * self.w * 64;
        let mut rank = 0;
        for c in 0..cols {
            let (cw, cm) = (c / 64, 1u64 << (c % 64));
            if let Some(piv) = (rank..rows.len()).find(|&r| rows[r][cw] & cm != 0) {
                rows.swap(rank, piv);
                for r in 0..rows.len() {
                    if r != rank && rows[r][cw] & cm != 0 {
                        let src = rows[rank].clone();
                        for (a, b) in rows[r].iter_mut().zip(&src) {
                            *a ^= b;
                        }
                    }
                }
                rank += 1;
            }
        }
        if rank != 2 * n {
            return Err(TableauError::Invariant("generators are not independent"));
        }
        Ok(())
    }
}
