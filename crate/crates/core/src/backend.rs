//! Simulator backends driven by the executor.

use rand::Rng;

use crate::dense::{DenseError, DenseState};
use crate::pauli::Pauli;
use crate::tableau::{clifford_quarter_turns, StabilizerTableau, TableauError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error("{0}")]
    Unsupported(&'static str),
}

/// Operations the executor needs from a quantum state.
pub trait Backend {
    fn num_qubits(&self) -> usize;

    /// Whether arbitrary-angle rotations are exact.
    fn supports_coherent(&self) -> bool;

    fn reset_all(&mut self);

    /// `exp(-i θ/2 P)` for a Hermitian Pauli product on at most two qubits.
    fn rotate(&mut self, terms: &[(usize, Pauli)], theta: f64) -> Result<(), SimError>;

    fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<(), SimError>;

    fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, SimError>;

    fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), SimError> {
        if self.measure(q, rng)? {
            self.apply_pauli(q, Pauli::X)?;
        }
        Ok(())
    }

    /// True if `q` is deterministically `|0⟩`.
    fn is_ground(&mut self, q: usize) -> Result<bool, SimError>;

    /// False while `q` is inside an unfinished non-Clifford rotation that a
    /// collapse would have to cut through.
    fn can_collapse(&self, _q: usize) -> bool {
        true
    }

    /// Completes deferred work; errors if a non-Clifford remainder is left.
    fn finish(&mut self) -> Result<(), SimError> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pending {
    terms: [(usize, Pauli); 2],
    len: usize,
    theta: f64,
}

impl Pending {
    fn terms(&self) -> &[(usize, Pauli)] {
        &self.terms[..self.len]
    }

    fn same_operator(&self, terms: &[(usize, Pauli)]) -> bool {
        terms.len() == self.len && terms.iter().all(|t| self.terms().contains(t))
    }

    fn anticommutes(&self, terms: &[(usize, Pauli)]) -> bool {
        let mut parity = false;
        for &(q, p) in terms {
            for &(r, s) in self.terms() {
                if q == r && p.anticommutes(s) {
                    parity = !parity;
                }
            }
        }
        parity
    }

    fn touches(&self, q: usize) -> bool {
        self.terms().iter().any(|&(r, _)| r == q)
    }
}

/// Stabiliser backend. A single non-Clifford Pauli rotation may be held back
/// until later rotations about the same operator complete it to a Clifford
/// angle; this makes refocussed half gates exact.
#[derive(Clone, Debug)]
pub struct TableauBackend {
    tableau: StabilizerTableau,
    pending: Option<Pending>,
}

impl TableauBackend {
    pub fn new(n: usize) -> Self {
        Self {
            tableau: StabilizerTableau::new(n),
            pending: None,
        }
    }

    pub fn tableau(&self) -> &StabilizerTableau {
        &self.tableau
    }

    pub fn tableau_mut(&mut self) -> Result<&mut StabilizerTableau, SimError> {
        self.flush()?;
        Ok(&mut self.tableau)
    }

    fn flush(&mut self) -> Result<(), SimError> {
        if let Some(p) = self.pending.take() {
            self.tableau.apply_pauli_rotation(p.terms(), p.theta)?;
        }
        Ok(())
    }

    fn flush_if_touching(&mut self, q: usize) -> Result<(), SimError> {
        if self.pending.is_some_and(|p| p.touches(q)) {
            self.flush()?;
        }
        Ok(())
    }
}

impl Backend for TableauBackend {
    fn num_qubits(&self) -> usize {
        self.tableau.num_qubits()
    }

    fn supports_coherent(&self) -> bool {
        false
    }

    fn reset_all(&mut self) {
        self.pending = None;
        self.tableau.reset_all();
    }

    fn rotate(&mut self, terms: &[(usize, Pauli)], theta: f64) -> Result<(), SimError> {
        if terms.len() > 2 {
            return Err(SimError::Unsupported("rotations act on at most two qubits"));
        }
        let clifford = clifford_quarter_turns(theta).is_some();
        if let Some(mut p) = self.pending {
            if p.same_operator(terms) {
                p.theta += theta;
                if clifford_quarter_turns(p.theta).is_some() {
                    self.pending = None;
                    self.tableau.apply_pauli_rotation(p.terms(), p.theta)?;
                } else {
                    self.pending = Some(p);
                }
                return Ok(());
            }
            if !p.anticommutes(terms) {
                if clifford {
                    self.tableau.apply_pauli_rotation(terms, theta)?;
                    return Ok(());
                }
                return Err(TableauError::NonClifford(theta).into());
            }
            self.flush()?;
        }
        if clifford {
            self.tableau.apply_pauli_rotation(terms, theta)?;
        } else {
            let mut t = [(0, Pauli::I); 2];
            t[..terms.len()].copy_from_slice(terms);
            self.pending = Some(Pending {
                terms: t,
                len: terms.len(),
                theta,
            });
        }
        Ok(())
    }

    fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<(), SimError> {
        if let Some(pend) = self.pending.as_mut() {
            // P R(θ) = R(-θ) P when P anticommutes with the rotation axis.
            if pend.anticommutes(&[(q, p)]) {
                pend.theta = -pend.theta;
            }
        }
        self.tableau.apply_pauli_1q(q, p)?;
        Ok(())
    }

    fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, SimError> {
        self.flush_if_touching(q)?;
        Ok(self.tableau.measure_z(q, rng)?)
    }

    fn is_ground(&mut self, q: usize) -> Result<bool, SimError> {
        self.flush_if_touching(q)?;
        Ok(self.tableau.peek_z(q)? == Some(false))
    }

    fn can_collapse(&self, q: usize) -> bool {
        !self.pending.is_some_and(|p| p.touches(q))
    }

    fn finish(&mut self) -> Result<(), SimError> {
        self.flush()
    }
}

/// State-vector backend; every operation is exact.
#[derive(Clone, Debug)]
pub struct DenseBackend {
    state: DenseState,
}

impl DenseBackend {
    pub fn new(n: usize) -> Result<Self, SimError> {
        Ok(Self {
            state: DenseState::new(n)?,
        })
    }

    pub fn state(&self) -> &DenseState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut DenseState {
        &mut self.state
    }

    pub fn into_state(self) -> DenseState {
        self.state
    }
}

impl Backend for DenseBackend {
    fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    fn supports_coherent(&self) -> bool {
        true
    }

    fn reset_all(&mut self) {
        self.state.reset_all();
    }

    fn rotate(&mut self, terms: &[(usize, Pauli)], theta: f64) -> Result<(), SimError> {
        Ok(self.state.apply_pauli_rotation(terms, theta)?)
    }

    fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<(), SimError> {
        if p == Pauli::I {
            return Ok(());
        }
        Ok(self.state.apply_pauli(&[(q, p)])?)
    }

    fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, SimError> {
        Ok(self.state.measure_z(q, rng)?)
    }

    fn is_ground(&mut self, q: usize) -> Result<bool, SimError> {
        Ok(self.state.branch_probs(q)?.1 < 1e-12)
    }
}

/// Backend without a state: accepts every operation and always measures `0`.
/// Used to sample noise histories without simulating them.
#[derive(Clone, Copy, Debug, Default)]
pub struct NullBackend {
    pub n: usize,
}

impl Backend for NullBackend {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn supports_coherent(&self) -> bool {
        true
    }

    fn reset_all(&mut self) {}

    fn rotate(&mut self, _terms: &[(usize, Pauli)], _theta: f64) -> Result<(), SimError> {
        Ok(())
    }

    fn apply_pauli(&mut self, _q: usize, _p: Pauli) -> Result<(), SimError> {
        Ok(())
    }

    fn measure<R: Rng + ?Sized>(&mut self, _q: usize, _rng: &mut R) -> Result<bool, SimError> {
        Ok(false)
    }

    fn is_ground(&mut self, _q: usize) -> Result<bool, SimError> {
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use crate::rng::trial_rng;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const XX: [(usize, Pauli); 2] = [(0, Pauli::X), (1, Pauli::X)];

    #[test]
    fn half_gates_compose_exactly() {
        let mut b = TableauBackend::new(3);
        b.rotate(&XX, FRAC_PI_4).unwrap();
        assert!(!b.can_collapse(0));
        assert!(b.can_collapse(2));
        b.rotate(&[(2, Pauli::Z)], PI).unwrap();
        b.rotate(&XX, FRAC_PI_4).unwrap();
        assert!(b.can_collapse(0));
        let mut r = TableauBackend::new(3);
        r.rotate(&XX, FRAC_PI_2).unwrap();
        r.rotate(&[(2, Pauli::Z)], PI).unwrap();
        assert_eq!(b.tableau(), r.tableau());
    }

    #[test]
    fn anticommuting_fault_between_halves_cancels_the_gate() {
        // R(π/4) Z R(π/4) = Z R(-π/4) R(π/4) = Z
        let mut b = TableauBackend::new(2);
        b.rotate(&XX, FRAC_PI_4).unwrap();
        b.apply_pauli(0, Pauli::Z).unwrap();
        b.rotate(&XX, FRAC_PI_4).unwrap();
        b.finish().unwrap();
        let mut want = StabilizerTableau::new(2);
        want.apply_pauli_fault(&PauliString::parse("ZI").unwrap()).unwrap();
        assert_eq!(b.tableau(), &want);
    }

    #[test]
    fn dangling_half_gate_is_an_error() {
        let mut b = TableauBackend::new(2);
        b.rotate(&XX, FRAC_PI_4).unwrap();
        let mut rng = trial_rng(0, 0);
        assert!(b.measure(0, &mut rng).is_err());
        let mut b = TableauBackend::new(2);
        b.rotate(&XX, 0.1).unwrap();
        let e = b.rotate(&[(0, Pauli::X), (2 - 1, Pauli::Z)], 0.1).unwrap_err();
        assert!(e.to_string().contains("requires dense backend"));
    }

    #[test]
    fn tableau_and_dense_agree_on_half_gate_circuit() {
        let mut t = TableauBackend::new(3);
        let mut d = DenseBackend::new(3).unwrap();
        let ops: [(&[(usize, Pauli)], f64); 6] = [
            (&[(0, Pauli::Y)], FRAC_PI_2),
            (&XX, FRAC_PI_4),
            (&[(2, Pauli::Z)], PI),
            (&XX, FRAC_PI_4),
            (&[(1, Pauli::X)], -FRAC_PI_2),
            (&[(1, Pauli::X), (2, Pauli::X)], FRAC_PI_2),
        ];
        for (terms, th) in ops {
            t.rotate(terms, th).unwrap();
            d.rotate(terms, th).unwrap();
        }
        t.finish().unwrap();
        for s in ["ZZI", "XXI", "IZZ", "YXX", "ZIZ", "XYZ"] {
            let p = PauliString::parse(s).unwrap();
            let te = t.tableau_mut().unwrap().expectation(&p).unwrap() as f64;
            let de = d.state().expectation(&p).unwrap();
            assert!((te - de).abs() < 1e-12, "{s}: {te} vs {de}");
        }
    }
}
