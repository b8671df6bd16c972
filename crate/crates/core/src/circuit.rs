//! Circuit IR on a linear ion string: events, durations, CNOT compilation,
//! refocussing and slot scheduling.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::tableau::Axis;

/// Event durations in microseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DurationTable {
    pub ms_gate: f64,
    pub one_qubit: f64,
    pub measurement: f64,
    pub reset: f64,
    pub recool: f64,
    pub repump: f64,
}

impl Default for DurationTable {
    fn default() -> Self {
        Self {
            ms_gate: 15.0,
            one_qubit: 1.0,
            measurement: 30.0,
            reset: 10.0,
            recool: 100.0,
            repump: 20.0,
        }
    }
}

impl DurationTable {
    pub fn is_valid(&self) -> bool {
        [self.ms_gate, self.one_qubit, self.measurement, self.reset, self.recool, self.repump]
            .iter()
            .all(|d| d.is_finite() && *d > 0.0)
    }

    /// Default duration of `op`. MS durations scale with `|θ|/(π/2)`.
    pub fn of(&self, op: &Op) -> f64 {
        match *op {
            Op::Rotation { .. } => self.one_qubit,
            Op::Ms { theta, .. } => {
                let r = libm::fabs(theta) / FRAC_PI_2;
                let half_steps = libm::round(2.0 * r);
                // Snap half and full gates so schedules come out exact.
                let r = if libm::fabs(2.0 * r - half_steps) < 1e-9 { half_steps / 2.0 } else { r };
                self.ms_gate * r
            }
            Op::Prepare0 { .. } => self.reset,
            Op::MeasureZ { .. } => self.measurement,
            Op::RepumpLeak { .. } => self.repump,
            Op::Barrier => 0.0,
            Op::Cnot { .. } => self.ms_gate + 4.0 * self.one_qubit,
        }
    }
}

/// Logical role of an ion in the string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    /// Data qubit `1..=7`.
    Data(u8),
    /// Ancilla `1..=3`.
    Ancilla(u8),
    Spare,
}

/// A neighbour of a gate pair that receives crosstalk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spectator {
    pub ion: usize,
    /// Sits strictly between the two gate ions and is illuminated by both beams.
    pub doubled: bool,
}

/// Ion positions (0-based) and their roles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IonLayout {
    roles: Vec<Role>,
}

impl IonLayout {
    /// Ten ions: `a1, d1..d7, a2, a3`.
    pub fn steane() -> Self {
        let mut roles = vec![Role::Ancilla(1)];
        roles.extend((1..=7).map(Role::Data));
        roles.push(Role::Ancilla(2));
        roles.push(Role::Ancilla(3));
        Self { roles }
    }

    /// A string of `n` unlabelled ions.
    pub fn linear(n: usize) -> Self {
        Self { roles: vec![Role::Spare; n] }
    }

    pub fn num_ions(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, ion: usize) -> Role {
        self.roles[ion]
    }

    pub fn ion_of(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    /// Ion of data qubit `k` (1-based); panics if absent.
    pub fn data(&self, k: u8) -> usize {
        self.ion_of(Role::Data(k)).expect("no such data qubit")
    }

    /// Ion of ancilla `k` (1-based); panics if absent.
    pub fn ancilla(&self, k: u8) -> usize {
        self.ion_of(Role::Ancilla(k)).expect("no such ancilla")
    }

    pub fn neighbors(&self, ion: usize) -> impl Iterator<Item = usize> + '_ {
        [ion.checked_sub(1), Some(ion + 1)]
            .into_iter()
            .flatten()
            .filter(move |&i| i < self.roles.len())
    }

    /// String neighbours of either gate ion, excluding the gate ions.
    pub fn spectators(&self, a: usize, b: usize) -> Vec<Spectator> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut out: Vec<Spectator> = Vec::new();
        for ion in self.neighbors(a).chain(self.neighbors(b)) {
            if ion == a || ion == b || out.iter().any(|s| s.ion == ion) {
                continue;
            }
            out.push(Spectator {
                ion,
                doubled: lo < ion && ion < hi,
            });
        }
        out.sort_by_key(|s| s.ion);
        out
    }
}

/// One circuit operation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    /// `exp(-i θ/2 P)` on one ion.
    Rotation { axis: Axis, theta: f64, ion: usize },
    /// `exp(-i θ/2 X_a X_b)`.
    Ms { theta: f64, a: usize, b: usize },
    Prepare0 { ion: usize },
    MeasureZ { ion: usize, bit: usize },
    RepumpLeak { ion: usize },
    Barrier,
    /// Logical CNOT; must be lowered with [`lower_cnots`] before execution.
    Cnot { control: usize, target: usize },
}

impl Op {
    /// Ions touched by the operation (empty for barriers).
    pub fn ions(&self) -> ([usize; 2], usize) {
        match *self {
            Op::Rotation { ion, .. } | Op::Prepare0 { ion } | Op::MeasureZ { ion, .. } | Op::RepumpLeak { ion } => {
                ([ion, 0], 1)
            }
            Op::Ms { a, b, .. } => ([a, b], 2),
            Op::Cnot { control, target } => ([control, target], 2),
            Op::Barrier => ([0, 0], 0),
        }
    }

    pub fn touches(&self, ion: usize) -> bool {
        let (ions, k) = self.ions();
        ions[..k].contains(&ion)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub op: Op,
    /// Explicit duration in µs; `None` uses the duration table.
    pub duration: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("event {event} references ion {ion} but the circuit has {num_ions} ions")]
    IonOutOfRange { event: usize, ion: usize, num_ions: usize },
    #[error("event {event} uses ion {ion} twice")]
    RepeatedIon { event: usize, ion: usize },
    #[error("event {event} has invalid duration {duration}")]
    BadDuration { event: usize, duration: f64 },
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    num_ions: usize,
    events: Vec<Event>,
}

impl Circuit {
    pub fn new(num_ions: usize) -> Self {
        Self {
            num_ions,
            events: Vec::new(),
        }
    }

    pub fn num_ions(&self) -> usize {
        self.num_ions
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn push(&mut self, op: Op) -> &mut Self {
        self.events.push(Event { op, duration: None });
        self
    }

    pub fn push_timed(&mut self, op: Op, duration: f64) -> &mut Self {
        self.events.push(Event {
            op,
            duration: Some(duration),
        });
        self
    }

    pub fn push_event(&mut self, event: Event) -> &mut Self {
        self.events.push(event);
        self
    }

    pub fn extend(&mut self, other: &Circuit) -> &mut Self {
        self.events.extend_from_slice(&other.events);
        self
    }

    pub fn rotation(&mut self, axis: Axis, theta: f64, ion: usize) -> &mut Self {
        self.push(Op::Rotation { axis, theta, ion })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Op::Cnot { control, target })
    }

    /// One past the highest classical bit written.
    pub fn num_bits(&self) -> usize {
        self.events
            .iter()
            .filter_map(|e| match e.op {
                Op::MeasureZ { bit, .. } => Some(bit + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn ms_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e.op, Op::Ms { .. })).count()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for (i, e) in self.events.iter().enumerate() {
            let (ions, k) = e.op.ions();
            for &ion in &ions[..k] {
                if ion >= self.num_ions {
                    return Err(CircuitError::IonOutOfRange {
                        event: i,
                        ion,
                        num_ions: self.num_ions,
                    });
                }
            }
            if k == 2 && ions[0] == ions[1] {
                return Err(CircuitError::RepeatedIon { event: i, ion: ions[0] });
            }
            if let Some(d) = e.duration {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(CircuitError::BadDuration { event: i, duration: d });
                }
            }
        }
        Ok(())
    }
}

/// Native sequence for a CNOT, in time order:
/// `Ry(π/2)_c, MS(π/2), Rx(-π/2)_c, Rx(-π/2)_t, Ry(-π/2)_c`.
pub fn compile_cnot(control: usize, target: usize) -> [Op; 5] {
    [
        Op::Rotation {
            axis: Axis::Y,
            theta: FRAC_PI_2,
            ion: control,
        },
        Op::Ms {
            theta: FRAC_PI_2,
            a: control,
            b: target,
        },
        Op::Rotation {
            axis: Axis::X,
            theta: -FRAC_PI_2,
            ion: control,
        },
        Op::Rotation {
            axis: Axis::X,
            theta: -FRAC_PI_2,
            ion: target,
        },
        Op::Rotation {
            axis: Axis::Y,
            theta: -FRAC_PI_2,
            ion: control,
        },
    ]
}

/// Replaces every CNOT by its native sequence.
pub fn lower_cnots(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.num_ions);
    for e in &circuit.events {
        match e.op {
            Op::Cnot { control, target } => {
                for op in compile_cnot(control, target) {
                    out.push(op);
                }
            }
            _ => {
                out.push_event(*e);
            }
        }
    }
    out
}

/// Merges rotations about the same axis on the same ion when no event in between
/// touches that ion, and drops rotations that become the identity up to phase.
pub fn merge_rotations(circuit: &Circuit) -> Circuit {
    let mut kept: Vec<Option<Event>> = Vec::with_capacity(circuit.events.len());
    // Index into `kept` of the last event touching each ion.
    let mut last: Vec<Option<usize>> = vec![None; circuit.num_ions];
    for e in &circuit.events {
        if let (Op::Rotation { axis, theta, ion }, None) = (e.op, e.duration) {
            if let Some(j) = last[ion] {
                if let Some(Event {
                    op: Op::Rotation { axis: a2, theta: t2, .. },
                    duration: None,
                }) = kept[j]
                {
                    if a2 == axis {
                        let merged = wrap_angle(theta + t2);
                        if libm::fabs(merged) < 1e-12 {
                            kept[j] = None;
                            last[ion] = None;
                        } else {
                            kept[j] = Some(Event {
                                op: Op::Rotation { axis, theta: merged, ion },
                                duration: None,
                            });
                        }
                        continue;
                    }
                }
            }
        }
        kept.push(Some(*e));
        let (ions, k) = e.op.ions();
        let idx = kept.len() - 1;
        if matches!(e.op, Op::Barrier) {
            last.iter_mut().for_each(|l| *l = None);
        }
        for &ion in &ions[..k] {
            last[ion] = Some(idx);
        }
    }
    Circuit {
        num_ions: circuit.num_ions,
        events: kept.into_iter().flatten().collect(),
    }
}

/// Wraps into `(-2π, 2π]`; rotations are `4π`-periodic, and `2π` is `-1`.
fn wrap_angle(theta: f64) -> f64 {
    let mut t = libm::fmod(theta, 4.0 * PI);
    if t > 2.0 * PI {
        t -= 4.0 * PI;
    } else if t <= -2.0 * PI {
        t += 4.0 * PI;
    }
    // ±2π differ from the identity by a global phase only.
    if libm::fabs(libm::fabs(t) - 2.0 * PI) < 1e-12 {
        0.0
    } else {
        t
    }
}

/// Splits every MS gate into two halves with `Z(π)` pulses on the spectators
/// after each half.
pub fn insert_refocussing(circuit: &Circuit, layout: &IonLayout) -> Circuit {
    let mut out = Circuit::new(circuit.num_ions);
    for e in &circuit.events {
        let Op::Ms { theta, a, b } = e.op else {
            out.push_event(*e);
            continue;
        };
        let half = Event {
            op: Op::Ms { theta: theta / 2.0, a, b },
            duration: e.duration.map(|d| d / 2.0),
        };
        let spectators = layout.spectators(a, b);
        for _ in 0..2 {
            out.push_event(half);
            for s in &spectators {
                out.rotation(Axis::Z, PI, s.ion);
            }
        }
    }
    out
}

/// Slot category for batching.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SlotKind {
    Rotation,
    Ms,
    Prepare,
    Measure,
    Repump,
    Cnot,
}

fn slot_kind(op: &Op) -> Option<SlotKind> {
    match op {
        Op::Rotation { .. } => Some(SlotKind::Rotation),
        Op::Ms { .. } => Some(SlotKind::Ms),
        Op::Prepare0 { .. } => Some(SlotKind::Prepare),
        Op::MeasureZ { .. } => Some(SlotKind::Measure),
        Op::RepumpLeak { .. } => Some(SlotKind::Repump),
        Op::Cnot { .. } => Some(SlotKind::Cnot),
        Op::Barrier => None,
    }
}

/// A period in which an ion is not addressed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdleInterval {
    pub ion: usize,
    pub start: f64,
    pub duration: f64,
    /// Index of the next event on this ion, or `None` if the ion idles until the end.
    pub before_event: Option<usize>,
}

/// Timing of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub starts: Vec<f64>,
    pub durations: Vec<f64>,
    pub total: f64,
    /// Sorted by `before_event`, trailing intervals last.
    pub idle: Vec<IdleInterval>,
}

impl Schedule {
    pub fn idle_total(&self, ion: usize) -> f64 {
        self.idle.iter().filter(|i| i.ion == ion).map(|i| i.duration).sum()
    }
}

/// Greedy slot scheduling in program order.
///
/// MS gates run alone. Consecutive events of the same kind on disjoint ions
/// share a slot, whose length is the longest member.
pub fn schedule(circuit: &Circuit, durations: &DurationTable) -> Schedule {
    let n = circuit.num_ions;
    let mut starts = Vec::with_capacity(circuit.events.len());
    let mut durs = Vec::with_capacity(circuit.events.len());
    let mut slot_start = 0.0;
    let mut slot_len = 0.0f64;
    let mut cur_kind: Option<SlotKind> = None;
    let mut slot_ions: u128 = 0;
    let mut busy_until = vec![0.0f64; n];
    let mut last_event: Vec<Option<usize>> = vec![None; n];
    let mut idle = Vec::new();

    for (i, e) in circuit.events.iter().enumerate() {
        let d = e.duration.unwrap_or_else(|| durations.of(&e.op));
        let kind = slot_kind(&e.op);
        let (ions, k) = e.op.ions();
        let mask = ions[..k].iter().fold(0u128, |m, &q| m | (1u128 << q));
        let joins = matches!(kind, Some(kd) if kd != SlotKind::Ms && kd != SlotKind::Cnot && Some(kd) == cur_kind && slot_ions & mask == 0);
        if joins {
            slot_len = slot_len.max(d);
            slot_ions |= mask;
        } else {
            slot_start += slot_len;
            slot_len = d;
            cur_kind = kind;
            slot_ions = mask;
        }
        if kind.is_none() {
            // A barrier closes the slot.
            slot_start += slot_len;
            slot_len = 0.0;
            cur_kind = None;
            slot_ions = 0;
        }
        starts.push(slot_start);
        durs.push(d);
        for &q in &ions[..k] {
            let gap = slot_start - busy_until[q];
            if gap > 1e-12 {
                idle.push(IdleInterval {
                    ion: q,
                    start: busy_until[q],
                    duration: gap,
                    before_event: Some(i),
                });
            }
            busy_until[q] = slot_start + d;
            last_event[q] = Some(i);
        }
    }
    let total = slot_start + slot_len;
    for (q, &b) in busy_until.iter().enumerate() {
        let gap = total - b;
        if gap > 1e-12 {
            idle.push(IdleInterval {
                ion: q,
                start: b,
                duration: gap,
                before_event: None,
            });
        }
    }
    Schedule {
        starts,
        durations: durs,
        total,
        idle,
    }
}
