//! Noisy execution of native circuits on a [`Backend`].
//!
//! Noise is inserted per event: depolarising faults after single-qubit gates,
//! a two-qubit Pauli channel once per completed MS rotation, crosstalk onto
//! the spectators of every MS gate, SPAM flips, repump faults and idle
//! dephasing/decay from the schedule.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::backend::{Backend, SimError};
use crate::circuit::{insert_refocussing, lower_cnots, merge_rotations, schedule, Circuit, DurationTable, IonLayout, Op, Schedule, Spectator};
use crate::noise::{
    crosstalk_fraction, sample_depolarizing, sample_idle, sample_ms, sample_repump, stark_mu, CrosstalkMode, Decay, LeakRegistry,
    NoiseError, NoiseParams, RepumpOutcome,
};
use crate::pauli::Pauli;
use crate::rng::bernoulli;

/// A Pauli placed relative to an event. Used both to inject faults and to
/// record the faults a trial sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Injection {
    /// Global event index within the trial.
    pub event: usize,
    pub ion: usize,
    pub pauli: Pauli,
    /// Apply before the event instead of after it.
    pub before: bool,
}

/// A circuit ready for repeated execution.
#[derive(Clone, Debug)]
pub struct PreparedCircuit {
    circuit: Circuit,
    schedule: Schedule,
    /// `(before_event, ion, p_dephase, p_decay)`; `before_event == len` for trailing idles.
    idle: Vec<(usize, usize, f64, f64)>,
    spectators: Vec<Vec<Spectator>>,
    num_bits: usize,
}

impl PreparedCircuit {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }
}

#[derive(Clone, Copy, Debug)]
struct TwirlEntry {
    terms: [(usize, Pauli); 2],
    len: usize,
    angle: f64,
}

/// Net crosstalk rotation per operator across the halves of one MS gate,
/// applied as a Pauli with probability `sin²(angle/2)` when the gate ends.
#[derive(Clone, Debug, Default)]
struct Twirl {
    gate: (usize, usize),
    spectators: u128,
    entries: Vec<TwirlEntry>,
}

impl Twirl {
    fn add(&mut self, terms: &[(usize, Pauli)], angle: f64) {
        if let Some(e) = self
            .entries
            .iter_mut()
            .find(|e| e.len == terms.len() && e.terms[..e.len] == *terms)
        {
            e.angle += angle;
            return;
        }
        let mut t = [(0, Pauli::I); 2];
        t[..terms.len()].copy_from_slice(terms);
        self.entries.push(TwirlEntry {
            terms: t,
            len: terms.len(),
            angle,
        });
    }

    fn conjugate(&mut self, ion: usize, p: Pauli) {
        for e in &mut self.entries {
            let anti = e.terms[..e.len]
                .iter()
                .filter(|&&(q, s)| q == ion && s.anticommutes(p))
                .count()
                % 2
                == 1;
            if anti {
                e.angle = -e.angle;
            }
        }
    }

    fn continues_with(&self, op: &Op) -> bool {
        match *op {
            Op::Ms { a, b, .. } => (a, b) == self.gate || (b, a) == self.gate,
            Op::Rotation { theta, ion, .. } => {
                self.spectators & (1u128 << ion) != 0 && libm::fabs(libm::fabs(libm::remainder(theta, 2.0 * PI)) - PI) < 1e-9
            }
            Op::Barrier => true,
            _ => false,
        }
    }
}

/// Mutable state of one trial, carried across the circuit segments of a protocol.
#[derive(Clone, Debug)]
pub struct TrialState<B> {
    pub backend: B,
    pub leaks: LeakRegistry,
    twirl: Option<Twirl>,
    ms_acc: Option<(usize, usize, f64)>,
    deferred_decays: Vec<(usize, Decay)>,
    clock: usize,
    injections: Vec<Injection>,
    /// Every executed event in order, when enabled.
    pub trace: Option<Vec<Op>>,
    /// Every sampled Pauli fault, when enabled.
    pub fault_log: Option<Vec<Injection>>,
}

impl<B: Backend> TrialState<B> {
    pub fn new(backend: B) -> Self {
        let n = backend.num_qubits();
        Self {
            backend,
            leaks: LeakRegistry::new(n),
            twirl: None,
            ms_acc: None,
            deferred_decays: Vec::new(),
            clock: 0,
            injections: Vec::new(),
            trace: None,
            fault_log: None,
        }
    }

    pub fn with_injections(mut self, mut injections: Vec<Injection>) -> Self {
        injections.sort_by_key(|i| (i.event, !i.before));
        self.injections = injections;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn with_fault_log(mut self) -> Self {
        self.fault_log = Some(Vec::new());
        self
    }

    /// Number of events executed so far.
    pub fn clock(&self) -> usize {
        self.clock
    }

    fn apply_fault(&mut self, ion: usize, p: Pauli, before: bool) -> Result<(), SimError> {
        if p == Pauli::I {
            return Ok(());
        }
        if let Some(t) = self.twirl.as_mut() {
            t.conjugate(ion, p);
        }
        self.backend.apply_pauli(ion, p)?;
        if let Some(log) = self.fault_log.as_mut() {
            log.push(Injection {
                event: self.clock,
                ion,
                pauli: p,
                before,
            });
        }
        Ok(())
    }

    fn apply_injections(&mut self, before: bool) -> Result<(), SimError> {
        while let Some(&inj) = self.injections.first() {
            if inj.event < self.clock || (inj.event == self.clock && inj.before && !before) {
                // Missed (the event never ran); drop it.
                self.injections.remove(0);
                continue;
            }
            if inj.event != self.clock || inj.before != before {
                break;
            }
            self.injections.remove(0);
            if let Some(t) = self.twirl.as_mut() {
                t.conjugate(inj.ion, inj.pauli);
            }
            if inj.pauli != Pauli::I {
                self.backend.apply_pauli(inj.ion, inj.pauli)?;
            }
        }
        Ok(())
    }
}

/// Applies a [`NoiseParams`] error model to circuits on a fixed ion layout.
#[derive(Clone, Debug)]
pub struct NoisyExecutor {
    params: NoiseParams,
    layout: IonLayout,
    durations: DurationTable,
    mode: CrosstalkMode,
    eps: f64,
    mu: f64,
    leak_fraction: f64,
}

impl NoisyExecutor {
    pub fn new(params: NoiseParams, layout: IonLayout, durations: DurationTable) -> Result<Self, NoiseError> {
        params.validate()?;
        Ok(Self {
            params,
            layout,
            durations,
            mode: params.active_crosstalk(),
            eps: crosstalk_fraction(params.p_c),
            mu: stark_mu(params.p_c),
            leak_fraction: params.leak_fraction_of_decays(),
        })
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    pub fn layout(&self) -> &IonLayout {
        &self.layout
    }

    pub fn durations(&self) -> &DurationTable {
        &self.durations
    }

    /// Lowers CNOTs, merges adjacent rotations, inserts refocussing pulses when
    /// enabled and schedules the result.
    pub fn prepare(&self, circuit: &Circuit) -> Result<PreparedCircuit, SimError> {
        let mut c = merge_rotations(&lower_cnots(circuit));
        if self.params.refocussing {
            c = insert_refocussing(&c, &self.layout);
        }
        self.prepare_native(c)
    }

    /// Schedules a circuit that is already in native form, without rewriting it.
    pub fn prepare_native(&self, circuit: Circuit) -> Result<PreparedCircuit, SimError> {
        if circuit.events().iter().any(|e| matches!(e.op, Op::Cnot { .. })) {
            return Err(SimError::Unsupported("circuit contains unlowered CNOT gates"));
        }
        if circuit.num_ions() > self.layout.num_ions() {
            return Err(SimError::Unsupported("circuit has more ions than the layout"));
        }
        circuit.validate()?;
        let sched = schedule(&circuit, &self.durations);
        let n = circuit.len();
        let idle = sched
            .idle
            .iter()
            .map(|iv| {
                (
                    iv.before_event.unwrap_or(n),
                    iv.ion,
                    self.params.dephasing_probability(iv.duration),
                    self.params.decay_probability(iv.duration),
                )
            })
            .collect();
        let spectators = circuit
            .events()
            .iter()
            .map(|e| match e.op {
                Op::Ms { a, b, .. } => self.layout.spectators(a, b),
                _ => Vec::new(),
            })
            .collect();
        Ok(PreparedCircuit {
            num_bits: circuit.num_bits(),
            circuit,
            schedule: sched,
            idle,
            spectators,
        })
    }

    /// Runs one circuit segment and returns its classical bits.
    pub fn run<B: Backend, R: Rng + ?Sized>(
        &self,
        pc: &PreparedCircuit,
        st: &mut TrialState<B>,
        rng: &mut R,
    ) -> Result<Vec<bool>, SimError> {
        if self.mode.is_coherent() && !st.backend.supports_coherent() {
            return Err(SimError::Unsupported("coherent crosstalk requires dense backend"));
        }
        let mut bits = vec![false; pc.num_bits];
        let mut idle_ptr = 0;
        let events = pc.circuit.events();
        for (k, e) in events.iter().enumerate() {
            while idle_ptr < pc.idle.len() && pc.idle[idle_ptr].0 == k {
                let (_, ion, pd, pdec) = pc.idle[idle_ptr];
                self.idle(st, ion, pd, pdec, rng)?;
                idle_ptr += 1;
            }
            if st.twirl.as_ref().is_some_and(|t| !t.continues_with(&e.op)) {
                self.flush_twirl(st, rng)?;
            }
            if let Some((a, b, _)) = st.ms_acc {
                let same = matches!(e.op, Op::Ms { a: x, b: y, .. } if (x, y) == (a, b) || (y, x) == (a, b));
                if !same && (e.op.touches(a) || e.op.touches(b) || matches!(e.op, Op::Ms { .. })) {
                    self.flush_ms(st, rng)?;
                }
            }
            st.apply_injections(true)?;
            if let Some(tr) = st.trace.as_mut() {
                tr.push(e.op);
            }
            self.execute(pc, k, st, &mut bits, rng)?;
            st.apply_injections(false)?;
            st.clock += 1;
            self.retry_deferred(st, rng)?;
        }
        while idle_ptr < pc.idle.len() {
            let (_, ion, pd, pdec) = pc.idle[idle_ptr];
            self.idle(st, ion, pd, pdec, rng)?;
            idle_ptr += 1;
        }
        self.flush_twirl(st, rng)?;
        self.flush_ms(st, rng)?;
        st.apply_injections(true)?;
        st.backend.finish()?;
        self.retry_deferred(st, rng)?;
        Ok(bits)
    }

    fn execute<B: Backend, R: Rng + ?Sized>(
        &self,
        pc: &PreparedCircuit,
        k: usize,
        st: &mut TrialState<B>,
        bits: &mut [bool],
        rng: &mut R,
    ) -> Result<(), SimError> {
        let p = &self.params;
        match pc.circuit.events()[k].op {
            Op::Rotation { axis, theta, ion } => {
                if st.leaks.is_leaked(ion) {
                    return Ok(());
                }
                if let Some(t) = st.twirl.as_mut() {
                    // A π rotation conjugates like the Pauli itself.
                    t.conjugate(ion, axis.pauli());
                }
                st.backend.rotate(&[(ion, axis.pauli())], theta)?;
                if let Some(f) = sample_depolarizing(rng, p.p_1q) {
                    st.apply_fault(ion, f, false)?;
                }
            }
            Op::Ms { theta, a, b } => {
                if st.leaks.is_leaked(a) || st.leaks.is_leaked(b) {
                    return Ok(());
                }
                st.backend.rotate(&[(a, Pauli::X), (b, Pauli::X)], theta)?;
                self.crosstalk(&pc.spectators[k], theta, a, b, st)?;
                let acc = match st.ms_acc {
                    Some((x, y, acc)) if (x, y) == (a, b) || (y, x) == (a, b) => acc + theta,
                    _ => theta,
                };
                st.ms_acc = Some((a, b, acc));
                if libm::fabs(acc) >= FRAC_PI_2 - 1e-9 {
                    self.flush_ms(st, rng)?;
                }
            }
            Op::Prepare0 { ion } => {
                st.leaks.set(ion, false);
                st.backend.reset(ion, rng)?;
                if bernoulli(rng, p.p_sp) {
                    if bernoulli(rng, p.prep_leak_fraction) {
                        st.leaks.set(ion, true);
                    } else {
                        st.apply_fault(ion, Pauli::X, false)?;
                    }
                }
            }
            Op::MeasureZ { ion, bit } => {
                if st.leaks.is_leaked(ion) {
                    st.leaks.set(ion, false);
                    st.backend.reset(ion, rng)?;
                    bits[bit] = false;
                    return Ok(());
                }
                if bernoulli(rng, p.p_m) {
                    st.apply_fault(ion, Pauli::X, true)?;
                }
                bits[bit] = st.backend.measure(ion, rng)?;
            }
            Op::RepumpLeak { ion } => match sample_repump(rng, st.leaks.is_leaked(ion), p.p_sg) {
                RepumpOutcome::Nothing | RepumpOutcome::StayLeaked => {}
                RepumpOutcome::Released { excited } => {
                    st.leaks.set(ion, false);
                    st.backend.reset(ion, rng)?;
                    if excited {
                        st.backend.apply_pauli(ion, Pauli::X)?;
                    }
                }
                RepumpOutcome::Leak => {
                    st.backend.reset(ion, rng)?;
                    st.leaks.set(ion, true);
                }
                RepumpOutcome::Damp => {
                    st.backend.reset(ion, rng)?;
                }
                RepumpOutcome::Dephase { flip } => {
                    if flip {
                        st.apply_fault(ion, Pauli::Z, false)?;
                    }
                }
            },
            Op::Barrier => {}
            Op::Cnot { .. } => return Err(SimError::Unsupported("circuit contains unlowered CNOT gates")),
        }
        Ok(())
    }

    fn crosstalk<B: Backend>(
        &self,
        spectators: &[Spectator],
        theta: f64,
        a: usize,
        b: usize,
        st: &mut TrialState<B>,
    ) -> Result<(), SimError> {
        if self.mode == CrosstalkMode::Off {
            return Ok(());
        }
        let live = spectators.iter().filter(|s| !st.leaks.is_leaked(s.ion));
        match self.mode {
            CrosstalkMode::Off => {}
            CrosstalkMode::EntanglingCoherent => {
                for s in live {
                    let f = if s.doubled { 2.0 } else { 1.0 };
                    for g in [a, b] {
                        st.backend.rotate(&[(g, Pauli::X), (s.ion, Pauli::X)], f * self.eps * theta)?;
                    }
                }
            }
            CrosstalkMode::StarkCoherent => {
                for s in live {
                    st.backend.rotate(&[(s.ion, Pauli::Z)], self.mu * theta)?;
                }
            }
            CrosstalkMode::EntanglingIncoherent | CrosstalkMode::StarkIncoherent => {
                let tw = st.twirl.get_or_insert_with(|| Twirl {
                    gate: (a, b),
                    spectators: spectators.iter().fold(0, |m, s| m | (1u128 << s.ion)),
                    entries: Vec::new(),
                });
                for s in live {
                    if self.mode == CrosstalkMode::StarkIncoherent {
                        tw.add(&[(s.ion, Pauli::Z)], self.mu * theta);
                        continue;
                    }
                    let f = if s.doubled { 2.0 } else { 1.0 };
                    for g in [a, b] {
                        tw.add(&[(g, Pauli::X), (s.ion, Pauli::X)], f * self.eps * theta);
                    }
                }
            }
        }
        Ok(())
    }

    fn flush_twirl<B: Backend, R: Rng + ?Sized>(&self, st: &mut TrialState<B>, rng: &mut R) -> Result<(), SimError> {
        let Some(tw) = st.twirl.take() else {
            return Ok(());
        };
        for e in &tw.entries {
            let s = libm::sin(e.angle / 2.0);
            if bernoulli(rng, s * s) {
                for &(q, p) in &e.terms[..e.len] {
                    st.apply_fault(q, p, true)?;
                }
            }
        }
        Ok(())
    }

    fn flush_ms<B: Backend, R: Rng + ?Sized>(&self, st: &mut TrialState<B>, rng: &mut R) -> Result<(), SimError> {
        let Some((a, b, acc)) = st.ms_acc.take() else {
            return Ok(());
        };
        let scale = (libm::fabs(acc) / FRAC_PI_2).min(1.0);
        if let Some([pa, pb]) = sample_ms(rng, self.params.p_ms * scale) {
            st.apply_fault(a, pa, false)?;
            st.apply_fault(b, pb, false)?;
        }
        Ok(())
    }

    fn idle<B: Backend, R: Rng + ?Sized>(
        &self,
        st: &mut TrialState<B>,
        ion: usize,
        p_dephase: f64,
        p_decay: f64,
        rng: &mut R,
    ) -> Result<(), SimError> {
        if st.leaks.is_leaked(ion) {
            return Ok(());
        }
        let (dephase, decay) = sample_idle(rng, p_dephase, p_decay, self.leak_fraction);
        if dephase {
            st.apply_fault(ion, Pauli::Z, true)?;
        }
        if let Some(d) = decay {
            if st.backend.can_collapse(ion) {
                self.decay(st, ion, d, rng)?;
            } else {
                st.deferred_decays.push((ion, d));
            }
        }
        Ok(())
    }

    fn decay<B: Backend, R: Rng + ?Sized>(&self, st: &mut TrialState<B>, ion: usize, d: Decay, rng: &mut R) -> Result<(), SimError> {
        if st.leaks.is_leaked(ion) {
            return Ok(());
        }
        if st.twirl.as_ref().is_some_and(|t| t.entries.iter().any(|e| e.terms[..e.len].iter().any(|&(q, _)| q == ion))) {
            self.flush_twirl(st, rng)?;
        }
        if st.backend.is_ground(ion)? {
            return Ok(());
        }
        st.backend.reset(ion, rng)?;
        if d == Decay::Leak {
            st.leaks.set(ion, true);
        }
        Ok(())
    }

    fn retry_deferred<B: Backend, R: Rng + ?Sized>(&self, st: &mut TrialState<B>, rng: &mut R) -> Result<(), SimError> {
        let mut i = 0;
        while i < st.deferred_decays.len() {
            let (ion, d) = st.deferred_decays[i];
            if st.backend.can_collapse(ion) {
                st.deferred_decays.swap_remove(i);
                self.decay(st, ion, d, rng)?;
            } else {
                i += 1;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{DenseBackend, NullBackend, TableauBackend};
    use crate::noise::doubled_probability;
    use crate::rng::trial_rng;
    use crate::tableau::Axis;
    use approx::assert_relative_eq;

    fn exec(params: NoiseParams) -> NoisyExecutor {
        NoisyExecutor::new(params, IonLayout::linear(5), DurationTable::default()).unwrap()
    }

    fn bell_circuit() -> Circuit {
        let mut c = Circuit::new(5);
        c.push(Op::Ms {
            theta: FRAC_PI_2,
            a: 1,
            b: 2,
        });
        c
    }

    #[test]
    fn noiseless_cnot_truth_table() {
        let ex = exec(NoiseParams::noiseless());
        for input in 0..4u8 {
            let mut c = Circuit::new(5);
            if input & 1 != 0 {
                c.rotation(Axis::X, PI, 0);
            }
            if input & 2 != 0 {
                c.rotation(Axis::X, PI, 1);
            }
            c.cnot(0, 1);
            c.push(Op::MeasureZ { ion: 0, bit: 0 });
            c.push(Op::MeasureZ { ion: 1, bit: 1 });
            let pc = ex.prepare(&c).unwrap();
            let mut st = TrialState::new(TableauBackend::new(5));
            let bits = ex.run(&pc, &mut st, &mut trial_rng(1, input as u64)).unwrap();
            let c_in = input & 1 != 0;
            let t_in = input & 2 != 0;
            assert_eq!(bits, vec![c_in, t_in ^ c_in]);
        }
    }

    /// Counts how often each spectator pair flips under incoherent crosstalk.
    fn flip_rates(refocus: bool, p_c: f64, trials: u64) -> (f64, f64, f64) {
        let mut params = NoiseParams::crosstalk_only(p_c, CrosstalkMode::EntanglingIncoherent);
        params.refocussing = refocus;
        let ex = exec(params);
        let pc = ex.prepare(&bell_circuit()).unwrap();
        let (mut outer, mut doubled, mut any) = (0usize, 0usize, 0usize);
        for t in 0..trials {
            let mut st = TrialState::new(NullBackend { n: 5 }).with_fault_log();
            ex.run(&pc, &mut st, &mut trial_rng(7, t)).unwrap();
            let log = st.fault_log.unwrap();
            if !log.is_empty() {
                any += 1;
            }
            outer += log.iter().filter(|f| f.ion == 0).count();
            doubled += log.iter().filter(|f| f.ion == 3).count();
        }
        let n = trials as f64;
        (outer as f64 / n, doubled as f64 / n, any as f64 / n)
    }

    #[test]
    fn incoherent_crosstalk_rate_per_neighbour() {
        let p = 0.05;
        let (outer, _, _) = flip_rates(false, p, 40_000);
        // Ion 0 couples to both gate ions of the pair (1, 2).
        assert!((outer - 2.0 * p).abs() < 5.0 * (2.0 * p / 40_000.0f64).sqrt(), "{outer}");
        let (_, _, any) = flip_rates(true, p, 20_000);
        assert_eq!(any, 0.0);
    }

    #[test]
    fn doubled_spectator_uses_sum_angle() {
        // Ion 2 sits between 1 and 3.
        let p = 0.05;
        let mut params = NoiseParams::crosstalk_only(p, CrosstalkMode::EntanglingIncoherent);
        params.refocussing = false;
        let ex = exec(params);
        let mut c = Circuit::new(5);
        c.push(Op::Ms {
            theta: FRAC_PI_2,
            a: 1,
            b: 3,
        });
        let pc = ex.prepare(&c).unwrap();
        let trials = 40_000u64;
        let mut hits = 0;
        for t in 0..trials {
            let mut st = TrialState::new(NullBackend { n: 5 }).with_fault_log();
            ex.run(&pc, &mut st, &mut trial_rng(3, t)).unwrap();
            hits += st.fault_log.unwrap().iter().filter(|f| f.ion == 2).count();
        }
        // Pairs (1,2) and (3,2), each flipping with the doubled probability.
        let rate = hits as f64 / trials as f64;
        let pd = doubled_probability(p);
        assert!((rate - 2.0 * pd).abs() < 5.0 * (2.0 * pd / trials as f64).sqrt(), "{rate}");
    }

    #[test]
    fn refocussed_coherent_crosstalk_is_exact_identity() {
        let mut params = NoiseParams::crosstalk_only(0.01, CrosstalkMode::EntanglingCoherent);
        params.refocussing = true;
        let ex = exec(params);
        let pc = ex.prepare(&bell_circuit()).unwrap();
        let mut st = TrialState::new(DenseBackend::new(5).unwrap());
        ex.run(&pc, &mut st, &mut trial_rng(0, 0)).unwrap();
        let mut ideal = crate::dense::DenseState::new(5).unwrap();
        ideal.apply_xx(FRAC_PI_2, 1, 2).unwrap();
        assert!((st.backend.state().fidelity(&ideal) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unrefocussed_coherent_crosstalk_matches_closed_form() {
        let p = 0.01;
        let ex = exec(NoiseParams::crosstalk_only(p, CrosstalkMode::EntanglingCoherent));
        let pc = ex.prepare(&bell_circuit()).unwrap();
        let mut st = TrialState::new(DenseBackend::new(5).unwrap());
        ex.run(&pc, &mut st, &mut trial_rng(0, 0)).unwrap();
        // Ion 0 is rotated by XX about both gate ions; those commute and
        // each flips it with probability p.
        let (_, p1) = st.backend.state().branch_probs(0).unwrap();
        assert_relative_eq!(p1, 2.0 * p * (1.0 - p), epsilon = 1e-12);
    }

    #[test]
    fn coherent_mode_needs_dense_backend() {
        let ex = exec(NoiseParams::crosstalk_only(0.01, CrosstalkMode::StarkCoherent));
        let pc = ex.prepare(&bell_circuit()).unwrap();
        let mut st = TrialState::new(TableauBackend::new(5));
        let err = ex.run(&pc, &mut st, &mut trial_rng(0, 0)).unwrap_err();
        assert!(err.to_string().contains("dense backend"));
    }

    #[test]
    fn leaked_ion_suppresses_gate_and_reads_zero() {
        let ex = exec(NoiseParams::noiseless());
        let mut c = Circuit::new(5);
        c.rotation(Axis::X, PI, 1);
        c.push(Op::Ms {
            theta: FRAC_PI_2,
            a: 1,
            b: 2,
        });
        c.push(Op::MeasureZ { ion: 1, bit: 0 });
        c.push(Op::MeasureZ { ion: 2, bit: 1 });
        c.push(Op::MeasureZ { ion: 1, bit: 2 });
        let pc = ex.prepare_native(c).unwrap();
        let mut st = TrialState::new(TableauBackend::new(5));
        st.leaks.set(1, true);
        let bits = ex.run(&pc, &mut st, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(bits, vec![false, false, false]);
        assert!(!st.leaks.any());
    }

    #[test]
    fn injection_and_trace() {
        let ex = exec(NoiseParams::noiseless());
        let mut c = Circuit::new(5);
        c.push(Op::Prepare0 { ion: 0 });
        c.push(Op::MeasureZ { ion: 0, bit: 0 });
        let pc = ex.prepare_native(c).unwrap();
        let mut st = TrialState::new(TableauBackend::new(5)).with_trace().with_injections(vec![Injection {
            event: 1,
            ion: 0,
            pauli: Pauli::X,
            before: true,
        }]);
        let bits = ex.run(&pc, &mut st, &mut trial_rng(0, 0)).unwrap();
        assert_eq!(bits, vec![true]);
        assert_eq!(st.trace.as_ref().unwrap().len(), 2);
        assert_eq!(st.clock(), 2);
    }

    #[test]
    fn ms_noise_rate_once_per_gate_with_refocussing() {
        let p = 0.02;
        for refocus in [false, true] {
            let params = NoiseParams {
                p_ms: p,
                refocussing: refocus,
                ..NoiseParams::noiseless()
            };
            let ex = exec(params);
            let pc = ex.prepare(&bell_circuit()).unwrap();
            let trials = 50_000u64;
            let mut hit = 0;
            for t in 0..trials {
                let mut st = TrialState::new(NullBackend { n: 5 }).with_fault_log();
                ex.run(&pc, &mut st, &mut trial_rng(11, t)).unwrap();
                if !st.fault_log.unwrap().is_empty() {
                    hit += 1;
                }
            }
            let rate = hit as f64 / trials as f64;
            assert!((rate - p).abs() < 5.0 * (p / trials as f64).sqrt(), "{refocus}: {rate}");
        }
    }

    #[test]
    fn idle_dephasing_follows_t2() {
        let params = NoiseParams {
            t2: 1e-3,
            ..NoiseParams::noiseless()
        };
        let ex = exec(params);
        let mut c = Circuit::new(2);
        c.push_timed(Op::Rotation { axis: Axis::X, theta: 0.0, ion: 1 }, 500.0);
        c.push(Op::Rotation { axis: Axis::X, theta: 0.0, ion: 0 });
        let pc = ex.prepare_native(c).unwrap();
        let trials = 20_000u64;
        let mut z = 0;
        for t in 0..trials {
            let mut st = TrialState::new(NullBackend { n: 2 }).with_fault_log();
            ex.run(&pc, &mut st, &mut trial_rng(5, t)).unwrap();
            z += st.fault_log.unwrap().iter().filter(|f| f.ion == 0).count();
        }
        let want = 0.5 * (1.0 - (-0.5f64).exp());
        let rate = z as f64 / trials as f64;
        assert!((rate - want).abs() < 0.015, "{rate} vs {want}");
    }

    #[test]
    fn tableau_survives_decay_between_half_gates() {
        let params = NoiseParams {
            t1: 1e-9,
            refocussing: true,
            ..NoiseParams::noiseless()
        };
        let ex = exec(params);
        let mut c = Circuit::new(5);
        c.rotation(Axis::X, FRAC_PI_2, 1);
        c.push(Op::Ms {
            theta: FRAC_PI_2,
            a: 1,
            b: 2,
        });
        let pc = ex.prepare(&c).unwrap();
        for t in 0..50 {
            let mut st = TrialState::new(TableauBackend::new(5));
            ex.run(&pc, &mut st, &mut trial_rng(2, t)).unwrap();
            st.backend.tableau().validate().unwrap();
        }
    }

    #[test]
    fn stark_incoherent_not_refocussed() {
        let p = 0.05;
        let mut params = NoiseParams::crosstalk_only(p, CrosstalkMode::StarkIncoherent);
        params.refocussing = true;
        let ex = exec(params);
        let pc = ex.prepare(&bell_circuit()).unwrap();
        let trials = 40_000u64;
        let mut z = 0;
        for t in 0..trials {
            let mut st = TrialState::new(NullBackend { n: 5 }).with_fault_log();
            ex.run(&pc, &mut st, &mut trial_rng(9, t)).unwrap();
            z += st.fault_log.unwrap().iter().filter(|f| f.ion == 0 && f.pauli == Pauli::Z).count();
        }
        let rate = z as f64 / trials as f64;
        assert!((rate - p).abs() < 5.0 * (p / trials as f64).sqrt(), "{rate}");
    }
}
