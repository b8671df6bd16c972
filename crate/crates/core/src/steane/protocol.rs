//! One noisy QEC round: flagged preparation with restart, repumping, the two
//! flagged groups, the unflagged round on a trigger, decoding and readout.

use alloc::vec::Vec;

use rand::Rng;

use crate::backend::{Backend, SimError};
use crate::circuit::{DurationTable, IonLayout, Op};
use crate::executor::{Injection, NoisyExecutor, PreparedCircuit, TrialState};
use crate::noise::{NoiseError, NoiseParams};
use crate::pauli::Pauli;

use super::circuits::{data, flagged_group_circuit, prep_circuit, readout_circuit, repump_circuit, unflagged_circuit, Group, Orderings, Target, NUM_IONS};
use super::code::decode_readout;
use super::decoder::{build_decode_table, Correction, DecodeTable, FtError, NativeCircuits};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("circuits are not fault tolerant: {0}")]
    Ft(#[from] FtError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Result of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub logical_failure: bool,
    /// Some ancilla of a flagged group reported `1`.
    pub flags_raised: bool,
    /// 1, or 2 when the unflagged round ran.
    pub rounds_run: u8,
    pub prep_restarts: u32,
}

/// State after the correction step, before readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attempt {
    /// Verification flagged; the preparation must be repeated.
    Restart,
    Corrected {
        trigger: Option<(Group, u8, u8)>,
        correction: Correction,
    },
}

/// Counts of an executor-level single-fault sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FaultSweep {
    pub locations: usize,
    pub faults: usize,
    pub restarts: usize,
    pub triggered: usize,
    pub failures: usize,
}

#[derive(Clone, Debug)]
pub struct Protocol {
    executor: NoisyExecutor,
    orderings: Orderings,
    prep: [PreparedCircuit; 2],
    repump: PreparedCircuit,
    groups: [PreparedCircuit; 2],
    unflagged: PreparedCircuit,
    readout: [PreparedCircuit; 2],
    table: DecodeTable,
    max_restarts: u32,
}

fn tix(t: Target) -> usize {
    match t {
        Target::Plus => 0,
        Target::Zero => 1,
    }
}

fn bits_of(b: &[bool]) -> u8 {
    b.iter().enumerate().fold(0u8, |m, (i, &v)| m | ((v as u8) << i))
}

impl Protocol {
    pub fn new(params: NoiseParams, durations: DurationTable) -> Result<Self, ProtocolError> {
        Self::with_orderings(params, durations, Orderings::default())
    }

    pub fn with_orderings(params: NoiseParams, durations: DurationTable, orderings: Orderings) -> Result<Self, ProtocolError> {
        let table = build_decode_table(&NativeCircuits::new(&orderings))?;
        let ex = NoisyExecutor::new(params, IonLayout::steane(), durations)?;
        let p = |c| ex.prepare(&c);
        Ok(Self {
            prep: [p(prep_circuit(Target::Plus, &orderings))?, p(prep_circuit(Target::Zero, &orderings))?],
            repump: p(repump_circuit())?,
            groups: [p(flagged_group_circuit(Group::A, &orderings))?, p(flagged_group_circuit(Group::B, &orderings))?],
            unflagged: p(unflagged_circuit())?,
            readout: [p(readout_circuit(Target::Plus))?, p(readout_circuit(Target::Zero))?],
            executor: ex,
            orderings,
            table,
            max_restarts: 10_000,
        })
    }

    pub const NUM_IONS: usize = NUM_IONS;

    pub fn executor(&self) -> &NoisyExecutor {
        &self.executor
    }

    pub fn params(&self) -> &NoiseParams {
        self.executor.params()
    }

    pub fn table(&self) -> &DecodeTable {
        &self.table
    }

    pub fn orderings(&self) -> &Orderings {
        &self.orderings
    }

    /// Executable circuits in protocol order: preparation, repump, groups A
    /// and B, unflagged round, readout.
    pub fn circuits(&self, target: Target) -> [(&'static str, &PreparedCircuit); 6] {
        [
            ("prep", &self.prep[tix(target)]),
            ("repump", &self.repump),
            ("group_a", &self.groups[0]),
            ("group_b", &self.groups[1]),
            ("unflagged", &self.unflagged),
            ("readout", &self.readout[tix(target)]),
        ]
    }

    /// Runs preparation through correction once.
    pub fn run_attempt<B: Backend, R: Rng + ?Sized>(&self, target: Target, st: &mut TrialState<B>, rng: &mut R) -> Result<Attempt, SimError> {
        let ex = &self.executor;
        if ex.run(&self.prep[tix(target)], st, rng)?[0] {
            return Ok(Attempt::Restart);
        }
        ex.run(&self.repump, st, rng)?;
        let mut trigger = None;
        for g in Group::BOTH {
            let bits = bits_of(&ex.run(&self.groups[g.index()], st, rng)?);
            if bits != 0 {
                ex.run(&self.repump, st, rng)?;
                let s = bits_of(&ex.run(&self.unflagged, st, rng)?);
                trigger = Some((g, bits, s));
                break;
            }
        }
        let correction = match trigger {
            Some((g, bits, s)) => self.table.lookup(g, bits, s),
            None => Correction::default(),
        };
        for k in 1..=7u8 {
            let p = Pauli::from_bits(correction.x >> (k - 1) & 1 == 1, correction.z >> (k - 1) & 1 == 1);
            if p != Pauli::I {
                st.backend.apply_pauli(data(k), p)?;
            }
        }
        Ok(Attempt::Corrected { trigger, correction })
    }

    /// Transversal readout; returns whether the decoded logical value is wrong.
    pub fn readout<B: Backend, R: Rng + ?Sized>(&self, target: Target, st: &mut TrialState<B>, rng: &mut R) -> Result<bool, SimError> {
        let bits = bits_of(&self.executor.run(&self.readout[tix(target)], st, rng)?);
        Ok(decode_readout(bits))
    }

    /// Full round with restarts.
    pub fn run_trial<B: Backend, R: Rng + ?Sized>(&self, target: Target, st: &mut TrialState<B>, rng: &mut R) -> Result<TrialOutcome, SimError> {
        let mut restarts = 0;
        loop {
            st.backend.reset_all();
            st.leaks.clear_all();
            match self.run_attempt(target, st, rng)? {
                Attempt::Restart => {
                    restarts += 1;
                    if restarts > self.max_restarts {
                        return Err(SimError::Unsupported("preparation never accepted"));
                    }
                }
                Attempt::Corrected { trigger, .. } => {
                    let logical_failure = self.readout(target, st, rng)?;
                    return Ok(TrialOutcome {
                        logical_failure,
                        flags_raised: trigger.is_some(),
                        rounds_run: 1 + trigger.is_some() as u8,
                        prep_restarts: restarts,
                    });
                }
            }
        }
    }

    /// Injects every single Pauli fault at every location of a fault-free run
    /// and counts logical failures. Requires a noiseless protocol and a
    /// Clifford backend factory.
    pub fn single_fault_sweep<B: Backend, F: Fn() -> B>(&self, target: Target, make: F) -> Result<FaultSweep, SimError> {
        let mut rng = crate::rng::trial_rng(0, 0);
        let mut st = TrialState::new(make()).with_trace();
        self.run_trial(target, &mut st, &mut rng)?;
        let trace = st.trace.take().unwrap_or_default();
        let mut out = FaultSweep {
            locations: trace.len(),
            ..FaultSweep::default()
        };
        for (k, op) in trace.iter().enumerate() {
            for faults in fault_patterns(k, op) {
                out.faults += 1;
                let mut st = TrialState::new(make()).with_injections(faults);
                let r = self.run_trial(target, &mut st, &mut rng)?;
                out.restarts += (r.prep_restarts > 0) as usize;
                out.triggered += r.flags_raised as usize;
                out.failures += r.logical_failure as usize;
            }
        }
        Ok(out)
    }
}

/// Single faults at event `k`: single-qubit Paulis before the event on each of
/// its ions, and every non-identity Pauli on its ions after it (not after
/// measurements).
fn fault_patterns(k: usize, op: &Op) -> Vec<Vec<Injection>> {
    let (ions, n) = op.ions();
    let ions = &ions[..n];
    let mut out = Vec::new();
    for &q in ions {
        for p in Pauli::NON_IDENTITY {
            out.push(alloc::vec![Injection {
                event: k,
                ion: q,
                pauli: p,
                before: true
            }]);
        }
    }
    if matches!(op, Op::MeasureZ { .. }) {
        return out;
    }
    let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let after = |ion, pauli| Injection {
        event: k,
        ion,
        pauli,
        before: false,
    };
    match ions {
        [q] => {
            for p in Pauli::NON_IDENTITY {
                out.push(alloc::vec![after(*q, p)]);
            }
        }
        [a, b] => {
            for pa in all {
                for pb in all {
                    if pa != Pauli::I || pb != Pauli::I {
                        out.push(alloc::vec![after(*a, pa), after(*b, pb)]);
                    }
                }
            }
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::TableauBackend;
    use crate::rng::trial_rng;

    fn noiseless() -> Protocol {
        Protocol::new(NoiseParams::noiseless(), DurationTable::default()).unwrap()
    }

    #[test]
    fn noiseless_trials_never_fail() {
        let p = noiseless();
        for target in Target::BOTH {
            for t in 0..20 {
                let mut st = TrialState::new(TableauBackend::new(NUM_IONS));
                let r = p.run_trial(target, &mut st, &mut trial_rng(1, t)).unwrap();
                assert_eq!(
                    r,
                    TrialOutcome {
                        logical_failure: false,
                        flags_raised: false,
                        rounds_run: 1,
                        prep_restarts: 0
                    }
                );
            }
        }
    }

    #[test]
    fn every_single_fault_is_corrected() {
        let p = noiseless();
        for target in Target::BOTH {
            let s = p.single_fault_sweep(target, || TableauBackend::new(NUM_IONS)).unwrap();
            assert_eq!(s.failures, 0, "{target:?}: {s:?}");
            assert!(s.faults > 1500 && s.restarts > 0 && s.triggered > 0, "{s:?}");
        }
    }

    #[test]
    fn injected_hook_error_is_caught() {
        // X₆X₇ straight after preparation, before the repump.
        let p = noiseless();
        let mut st = TrialState::new(TableauBackend::new(NUM_IONS)).with_trace();
        p.run_trial(Target::Zero, &mut st, &mut trial_rng(0, 0)).unwrap();
        let prep_len = p.circuits(Target::Zero)[0].1.circuit().len();
        let inj = [6, 7].map(|k| Injection {
            event: prep_len,
            ion: data(k),
            pauli: Pauli::X,
            before: true,
        });
        let mut st = TrialState::new(TableauBackend::new(NUM_IONS)).with_injections(inj.to_vec());
        let r = p.run_trial(Target::Zero, &mut st, &mut trial_rng(0, 1)).unwrap();
        // A weight-2 data error is beyond the code; it must at least be detected.
        assert!(r.flags_raised);
    }
}
