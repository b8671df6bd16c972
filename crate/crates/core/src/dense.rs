//! State-vector simulator for coherent noise and branch-probability extraction.
//!
//! Qubit `0` is the least-significant bit of the amplitude index.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::pauli::{Pauli, PauliString};
use crate::tableau::Axis;

pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DenseError {
    #[error("dense simulation supports at most {MAX_DENSE_QUBITS} qubits, got {0}")]
    TooManyQubits(usize),
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate targets must be distinct (got {0} twice)")]
    DuplicateTarget(usize),
    #[error("gate and neighbour qubit sets overlap at {0}")]
    OverlappingSets(usize),
    #[error("cannot project qubit {qubit} onto outcome {outcome}: branch has zero probability")]
    ZeroProbabilityBranch { qubit: usize, outcome: bool },
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

const ZERO_PROBABILITY: f64 = 1e-15;

impl DenseState {
    pub fn new(n: usize) -> Result<Self, DenseError> {
        if n > MAX_DENSE_QUBITS {
            return Err(DenseError::TooManyQubits(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, DenseError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(DenseError::BadLength(len));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_DENSE_QUBITS {
            return Err(DenseError::TooManyQubits(n));
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn reset_all(&mut self) {
        self.amps.fill(Complex64::new(0.0, 0.0));
        self.amps[0] = Complex64::new(1.0, 0.0);
    }

    fn check(&self, q: usize) -> Result<(), DenseError> {
        if q < self.n {
            Ok(())
        } else {
            Err(DenseError::QubitOutOfRange { qubit: q, n: self.n })
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &DenseState) -> f64 {
        let ip: Complex64 = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        ip.norm_sqr()
    }

    /// Applies `exp(-i θ/2 P)` for the Hermitian Pauli product given by `terms`.
    pub fn apply_pauli_rotation(&mut self, terms: &[(usize, Pauli)], theta: f64) -> Result<(), DenseError> {
        let (xm, zm, ny) = self.masks(terms)?;
        let c = libm::cos(theta / 2.0);
        let s = libm::sin(theta / 2.0);
        // P|b⟩ = i^{#Y} (-1)^{|b & z|} |b ^ x⟩
        let k = Complex64::new(0.0, -s) * i_pow(ny);
        let coeff = [k, -k];
        if xm == 0 {
            let diag = [Complex64::new(c, 0.0) + k, Complex64::new(c, 0.0) - k];
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= diag[parity(b & zm)];
            }
            return Ok(());
        }
        let pivot = 1usize << (usize::BITS - 1 - xm.leading_zeros());
        for b in 0..self.amps.len() {
            if b & pivot != 0 {
                continue;
            }
            let b2 = b ^ xm;
            let (a1, a2) = (self.amps[b], self.amps[b2]);
            // (P ψ)[b] = coeff(b2) ψ[b2]
            self.amps[b] = a1 * c + coeff[parity(b2 & zm)] * a2;
            self.amps[b2] = a2 * c + coeff[parity(b & zm)] * a1;
        }
        Ok(())
    }

    fn masks(&self, terms: &[(usize, Pauli)]) -> Result<(usize, usize, u32), DenseError> {
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u32);
        for &(q, p) in terms {
            self.check(q)?;
            if (xm | zm) & (1 << q) != 0 {
                return Err(DenseError::DuplicateTarget(q));
            }
            let (x, z) = p.bits();
            xm |= (x as usize) << q;
            zm |= (z as usize) << q;
            ny += (x && z) as u32;
        }
        Ok((xm, zm, ny))
    }

    /// Multiplies the state by the Pauli product (a sampled Kraus branch).
    pub fn apply_pauli(&mut self, terms: &[(usize, Pauli)]) -> Result<(), DenseError> {
        let (xm, zm, ny) = self.masks(terms)?;
        let iy = i_pow(ny);
        let coeff = [iy, -iy];
        if xm == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= coeff[parity(b & zm)];
            }
            return Ok(());
        }
        let pivot = 1usize << (usize::BITS - 1 - xm.leading_zeros());
        for b in 0..self.amps.len() {
            if b & pivot != 0 {
                continue;
            }
            let b2 = b ^ xm;
            let (a1, a2) = (self.amps[b], self.amps[b2]);
            self.amps[b2] = a1 * coeff[parity(b & zm)];
            self.amps[b] = a2 * coeff[parity(b2 & zm)];
        }
        Ok(())
    }

    pub fn apply_pauli_string(&mut self, p: &PauliString) -> Result<(), DenseError> {
        if p.num_qubits() != self.n {
            return Err(DenseError::QubitOutOfRange { qubit: p.num_qubits(), n: self.n });
        }
        self.apply_pauli(&p.support())?;
        let ph = i_pow(p.phase().exponent());
        for a in &mut self.amps {
            *a *= ph;
        }
        Ok(())
    }

    /// `exp(-i θ/2 P_q)` for `P ∈ {X, Y, Z}`.
    pub fn apply_rotation(&mut self, axis: Axis, theta: f64, q: usize) -> Result<(), DenseError> {
        self.apply_pauli_rotation(&[(q, axis.pauli())], theta)
    }

    /// Mølmer–Sørensen interaction `exp(-i θ/2 X_{q1} X_{q2})`.
    pub fn apply_xx(&mut self, theta: f64, q1: usize, q2: usize) -> Result<(), DenseError> {
        self.apply_pauli_rotation(&[(q1, Pauli::X), (q2, Pauli::X)], theta)
    }

    /// Applies `exp(-i ε θ/2 X_g X_n)` for every gate/neighbour pair, doubling the
    /// angle for neighbours listed in `doubled`.
    pub fn apply_crosstalk_unitary(
        &mut self,
        eps_ct: f64,
        theta: f64,
        gate_qubits: &[usize],
        neighbor_qubits: &[usize],
        doubled: &[usize],
    ) -> Result<(), DenseError> {
        if let Some(&q) = gate_qubits.iter().find(|q| neighbor_qubits.contains(q)) {
            return Err(DenseError::OverlappingSets(q));
        }
        for &g in gate_qubits {
            for &nq in neighbor_qubits {
                let factor = if doubled.contains(&nq) { 2.0 } else { 1.0 };
                self.apply_pauli_rotation(&[(g, Pauli::X), (nq, Pauli::X)], factor * eps_ct * theta)?;
            }
        }
        Ok(())
    }

    /// Applies `exp(-i μ π/4 Z_n)` to each neighbour.
    pub fn apply_stark_unitary(&mut self, mu: f64, neighbor_qubits: &[usize]) -> Result<(), DenseError> {
        for &nq in neighbor_qubits {
            self.apply_pauli_rotation(&[(nq, Pauli::Z)], mu * core::f64::consts::FRAC_PI_2)?;
        }
        Ok(())
    }

    /// Exact probabilities `(p0, p1)` of a Z measurement on `q`.
    pub fn branch_probs(&self, q: usize) -> Result<(f64, f64), DenseError> {
        self.check(q)?;
        let m = 1usize << q;
        let (mut p0, mut p1) = (0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            if b & m == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        Ok((p0, p1))
    }

    /// Projects onto `outcome` and renormalises, returning the branch probability.
    pub fn project(&mut self, q: usize, outcome: bool) -> Result<f64, DenseError> {
        let (p0, p1) = self.branch_probs(q)?;
        let p = if outcome { p1 } else { p0 };
        if p <= ZERO_PROBABILITY {
            return Err(DenseError::ZeroProbabilityBranch { qubit: q, outcome });
        }
        let m = 1usize << q;
        let scale = 1.0 / libm::sqrt(p);
        for (b, a) in self.amps.iter_mut().enumerate() {
            if ((b & m) != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, DenseError> {
        let (_, p1) = self.branch_probs(q)?;
        let u: f64 = rng.gen();
        let outcome = u < p1;
        self.project(q, outcome)?;
        Ok(outcome)
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), DenseError> {
        if self.measure_z(q, rng)? {
            self.apply_pauli(&[(q, Pauli::X)])?;
        }
        Ok(())
    }

    /// Expectation value `⟨ψ|P|ψ⟩` of a Hermitian Pauli string.
    pub fn expectation(&self, p: &PauliString) -> Result<f64, DenseError> {
        let mut other = self.clone();
        other.apply_pauli_string(p)?;
        let ip: Complex64 = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(ip.re)
    }
}

fn parity(mut v: usize) -> usize {
    v ^= v >> 32;
    v ^= v >> 16;
    v ^= v >> 8;
    v ^= v >> 4;
    (0x6996 >> (v & 0xf)) & 1
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}
