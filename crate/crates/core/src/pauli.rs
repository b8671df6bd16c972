//! Pauli operators and multi-qubit Pauli strings with exact phase tracking.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// Builds a Pauli from its symplectic bits (`Y` is `x = z = 1`).
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn has_x(self) -> bool {
        self.bits().0
    }

    pub fn has_z(self) -> bool {
        self.bits().1
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        (x1 & z2) ^ (z1 & x2)
    }

    /// Product up to phase.
    pub fn times(self, other: Pauli) -> Pauli {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        Pauli::from_bits(x1 ^ x2, z1 ^ z2)
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Word-parallel phase exponent (mod 4) for the product of two Pauli rows.
#[inline]
pub(crate) fn row_product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    // Count +1 and -1 contributions separately per word.
    let mut plus: u32 = 0;
    let mut minus: u32 = 0;
    for w in 0..x1.len() {
        let (a, b, c, d) = (x1[w], z1[w], x2[w], z2[w]);
        // Y * Z = i X, Y * X = -i Z, X * Y = i Z, X * Z = -i Y, Z * X = i Y, Z * Y = -i X
        let y1 = a & b;
        let xo = a & !b;
        let zo = !a & b;
        let y2 = c & d;
        let x2o = c & !d;
        let z2o = !c & d;
        plus += (y1 & z2o).count_ones() + (xo & y2).count_ones() + (zo & x2o).count_ones();
        minus += (y1 & x2o).count_ones() + (xo & z2o).count_ones() + (zo & y2).count_ones();
    }
    (plus + 3 * minus) % 4
}

/// Global phase of a Pauli string, one of `{+1, +i, -1, -i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u32) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }
}

/// Error for mismatched Pauli string sizes.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("pauli string acts on {found} qubits, expected {expected}")]
pub struct SizeMismatch {
    pub expected: usize,
    pub found: usize,
}

/// An `n`-qubit Pauli operator `i^phase * P_0 ⊗ ... ⊗ P_{n-1}` with Hermitian factors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    /// Builds a string from `(qubit, pauli)` pairs; later entries multiply onto earlier ones up to phase.
    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)]) -> Self {
        let mut s = Self::identity(n);
        for &(q, p) in terms {
            let cur = s.get(q);
            s.set(q, cur.times(p));
        }
        s
    }

    pub fn from_paulis(ps: &[Pauli]) -> Self {
        let mut s = Self::identity(ps.len());
        for (q, &p) in ps.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Parses strings like `"+XIZY"`, `"-iZZ"`; the leading sign is optional.
    pub fn parse(text: &str) -> Option<Self> {
        let (phase, body) = if let Some(r) = text.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = text.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = text.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = text.strip_prefix('+') {
            (0, r)
        } else {
            (0, text)
        };
        let ps: Option<Vec<Pauli>> = body.chars().map(Pauli::from_char).collect();
        let mut s = Self::from_paulis(&ps?);
        s.phase = phase;
        Some(s)
    }

    /// Builds from packed symplectic masks; only valid for `n <= 64`.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= 64, "mask constructor supports at most 64 qubits");
        let mut s = Self::identity(n);
        let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        s.x[0] = x & keep;
        s.z[0] = z & keep;
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn phase(&self) -> Phase {
        Phase::from_exponent(self.phase as u32)
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase.exponent() as u8;
    }

    pub fn get(&self, q: usize) -> Pauli {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (px, pz) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((px as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((pz as u64) << b);
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Qubits acted on non-trivially, with their Pauli.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        (0..self.n)
            .filter_map(|q| match self.get(q) {
                Pauli::I => None,
                p => Some((q, p)),
            })
            .collect()
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len().min(other.x.len()) {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        parity == 0
    }

    /// Exact product `self * other`.
    pub fn try_mul(&self, other: &PauliString) -> Result<PauliString, SizeMismatch> {
        if self.n != other.n {
            return Err(SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let k = row_product_phase(&self.x, &self.z, &other.x, &other.z);
        let phase = ((self.phase as u32 + other.phase as u32 + k) % 4) as u8;
        Ok(PauliString {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            phase,
        })
    }

    /// Same operator with the phase forgotten (set to `+1`).
    pub fn unsigned(&self) -> PauliString {
        let mut s = self.clone();
        s.phase = 0;
        s
    }
}

impl core::ops::Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        self.try_mul(rhs).expect("pauli strings of different sizes")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase() {
            Phase::PlusOne => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        f.write_str(sign)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Power of `i` picked up when multiplying two Hermitian single-qubit Paulis
    /// given by symplectic bits, i.e. `P1 P2 = i^g (P1 P2 up to phase)`.
    fn product_phase_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
            (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
        }
    }

    #[test]
    fn single_qubit_products() {
        let x = PauliString::parse("X").unwrap();
        let y = PauliString::parse("Y").unwrap();
        let z = PauliString::parse("Z").unwrap();
        assert_eq!(&x * &y, PauliString::parse("+iZ").unwrap());
        assert_eq!(&y * &x, PauliString::parse("-iZ").unwrap());
        assert_eq!(&z * &x, PauliString::parse("+iY").unwrap());
        assert_eq!(&y * &z, PauliString::parse("+iX").unwrap());
        assert_eq!(&x * &x, PauliString::parse("I").unwrap());
    }

    #[test]
    fn scalar_phase_exponent_agrees_with_word_version() {
        for a in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
            for b in [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z] {
                let (x1, z1) = a.bits();
                let (x2, z2) = b.bits();
                let g = product_phase_exponent(x1, z1, x2, z2).rem_euclid(4) as u32;
                let w = row_product_phase(&[x1 as u64], &[z1 as u64], &[x2 as u64], &[z2 as u64]);
                assert_eq!(g, w, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["+XIZY", "-ZZ", "+iI", "-iYYX"] {
            assert_eq!(PauliString::parse(s).unwrap().to_string(), s);
        }
        assert!(PauliString::parse("XQ").is_none());
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let a = PauliString::identity(3);
        let b = PauliString::identity(4);
        assert_eq!(
            a.try_mul(&b),
            Err(SizeMismatch {
                expected: 3,
                found: 4
            })
        );
    }

    fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(|(v, ph)| {
            let ps: Vec<Pauli> = v
                .into_iter()
                .map(|k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize])
                .collect();
            let mut s = PauliString::from_paulis(&ps);
            s.set_phase(Phase::from_exponent(ph as u32));
            s
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in pauli_strategy(70), b in pauli_strategy(70), c in pauli_strategy(70)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn commutation_matches_product_order(a in pauli_strategy(9), b in pauli_strategy(9)) {
            let ab = &a * &b;
            let ba = &b * &a;
            if a.commutes(&b) {
                prop_assert_eq!(ab, ba);
            } else {
                let mut neg = ba.clone();
                neg.set_phase(Phase::from_exponent(ba.phase().exponent() + 2));
                prop_assert_eq!(ab, neg);
            }
        }

        #[test]
        fn hermitian_strings_square_to_identity(a in pauli_strategy(12)) {
            let h = a.unsigned();
            prop_assert!((&h * &h) == PauliString::identity(12));
        }
    }
}
