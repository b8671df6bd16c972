//! Circuits of one QEC round: flagged preparation, the two parallel flagged
//! syndrome groups, the unflagged re-measurement and transversal readout.
//!
//! Ions: `a1` = 0, data qubit `k` = `k`, `a2` = 8, `a3` = 9.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::circuit::{Circuit, Op};
use crate::tableau::Axis;

use super::code::PLAQUETTES;

pub const NUM_IONS: usize = 10;
pub const A1: usize = 0;
pub const A2: usize = 8;
pub const A3: usize = 9;
pub const ANCILLAS: [usize; 3] = [A1, A2, A3];

/// Ion of data qubit `k` (1..=7).
pub const fn data(k: u8) -> usize {
    k as usize
}

/// Ion mask of the data block.
pub const DATA_MASK: u64 = 0b1111_1110;

/// Logical basis state to prepare and read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    /// `|+⟩_L`, read out in the X basis; exposes logical Z errors.
    Plus,
    /// `|0⟩_L`, read out in the Z basis; exposes logical X errors.
    Zero,
}

impl Target {
    pub const BOTH: [Target; 2] = [Target::Plus, Target::Zero];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Plus => "plus",
            Target::Zero => "zero",
        }
    }
}

impl core::str::FromStr for Target {
    type Err = &'static str;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" | "+" => Ok(Target::Plus),
            "zero" | "0" => Ok(Target::Zero),
            _ => Err("target must be `plus` or `zero`"),
        }
    }
}

/// Which half of the stabilisers an ancilla group measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    /// `a1: X_P1`, `a2: Z_P2`, `a3: Z_P3`.
    A,
    /// `a1: Z_P1`, `a2: X_P2`, `a3: X_P3`.
    B,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::A, Group::B];

    pub fn index(self) -> usize {
        match self {
            Group::A => 0,
            Group::B => 1,
        }
    }

    /// Per ancilla (a1, a2, a3): whether it measures the X-type generator.
    pub fn x_type(self) -> [bool; 3] {
        match self {
            Group::A => [true, false, false],
            Group::B => [false, true, true],
        }
    }
}

/// A CNOT as `(control, target)` ions.
pub type Cnot = (usize, usize);

/// CNOT orders for the flagged circuits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orderings {
    /// Data qubits started in `|+⟩` by the `|0⟩_L` encoder.
    pub pivots: [u8; 3],
    /// Encoder CNOTs for `|0⟩_L` in time order. The `|+⟩_L` encoder is its
    /// transversal-Hadamard dual: the other qubits start in `|+⟩` and every
    /// CNOT is reversed.
    pub encoder: Vec<Cnot>,
    /// Data qubits coupled to the verification ancilla, in order.
    pub verify: Vec<u8>,
    /// Full CNOT list of each flagged group, including the flag CNOTs.
    pub groups: [Vec<Cnot>; 2],
}

const fn d(k: u8) -> usize {
    k as usize
}

impl Default for Orderings {
    /// Orders checked by the single-fault table construction.
    fn default() -> Self {
        Self {
            pivots: [1, 2, 3],
            encoder: vec_of(&[
                (d(1), d(4)),
                (d(1), d(5)),
                (d(1), d(6)),
                (d(2), d(1)),
                (d(1), d(7)),
                (d(3), d(4)),
                (d(4), d(7)),
                (d(7), d(6)),
            ]),
            verify: alloc::vec![1, 3, 6],
            groups: [
                vec_of(&[
                    (A1, A3),
                    (A1, d(4)),
                    (A1, A2),
                    (d(6), A2),
                    (A1, d(3)),
                    (d(6), A3),
                    (A1, d(1)),
                    (d(7), A3),
                    (A1, d(2)),
                    (d(4), A3),
                    (d(5), A2),
                    (d(3), A3),
                    (A1, A3),
                    (d(3), A2),
                    (A1, A2),
                    (d(2), A2),
                ]),
                vec_of(&[
                    (A3, A1),
                    (d(4), A1),
                    (A2, A1),
                    (A2, d(6)),
                    (d(3), A1),
                    (A3, d(6)),
                    (d(1), A1),
                    (A3, d(7)),
                    (d(2), A1),
                    (A3, d(4)),
                    (A2, d(5)),
                    (A3, d(3)),
                    (A3, A1),
                    (A2, d(3)),
                    (A2, A1),
                    (A2, d(2)),
                ]),
            ],
        }
    }
}

fn vec_of(c: &[Cnot]) -> Vec<Cnot> {
    c.to_vec()
}

fn to_plus(c: &mut Circuit, ion: usize) {
    c.rotation(Axis::Y, FRAC_PI_2, ion);
}

fn from_plus(c: &mut Circuit, ion: usize) {
    c.rotation(Axis::Y, -FRAC_PI_2, ion);
}

/// Flagged preparation of `target`; bit 0 is the verification outcome.
pub fn prep_circuit(target: Target, ord: &Orderings) -> Circuit {
    let mut c = Circuit::new(NUM_IONS);
    for k in 1..=7 {
        c.push(Op::Prepare0 { ion: data(k) });
    }
    c.push(Op::Prepare0 { ion: A1 });
    for k in 1..=7u8 {
        let in_plus = match target {
            Target::Plus => !ord.pivots.contains(&k),
            Target::Zero => ord.pivots.contains(&k),
        };
        if in_plus {
            to_plus(&mut c, data(k));
        }
    }
    for &(ctl, tgt) in &ord.encoder {
        match target {
            Target::Plus => c.cnot(tgt, ctl),
            Target::Zero => c.cnot(ctl, tgt),
        };
    }
    match target {
        Target::Plus => {
            to_plus(&mut c, A1);
            for &k in &ord.verify {
                c.cnot(A1, data(k));
            }
            from_plus(&mut c, A1);
        }
        Target::Zero => {
            for &k in &ord.verify {
                c.cnot(data(k), A1);
            }
        }
    }
    c.push(Op::MeasureZ { ion: A1, bit: 0 });
    c
}

/// Repump pulse on every ion.
pub fn repump_circuit() -> Circuit {
    let mut c = Circuit::new(NUM_IONS);
    for ion in 0..NUM_IONS {
        c.push(Op::RepumpLeak { ion });
    }
    c
}

fn open_group(c: &mut Circuit, group: Group) {
    for (i, &a) in ANCILLAS.iter().enumerate() {
        c.push(Op::Prepare0 { ion: a });
        if group.x_type()[i] {
            to_plus(c, a);
        }
    }
}

fn close_group(c: &mut Circuit, group: Group, bits: [usize; 3]) {
    for (i, &a) in ANCILLAS.iter().enumerate() {
        if group.x_type()[i] {
            from_plus(c, a);
        }
    }
    for (i, &a) in ANCILLAS.iter().enumerate() {
        c.push(Op::MeasureZ { ion: a, bit: bits[i] });
    }
}

/// Parallel flagged extraction; bits 0..3 are the outcomes of a1, a2, a3.
pub fn flagged_group_circuit(group: Group, ord: &Orderings) -> Circuit {
    let mut c = Circuit::new(NUM_IONS);
    open_group(&mut c, group);
    for &(ctl, tgt) in &ord.groups[group.index()] {
        c.cnot(ctl, tgt);
    }
    close_group(&mut c, group, [0, 1, 2]);
    c
}

/// Plain syndrome CNOTs of a group in plaquette order.
fn plain_cnots(group: Group) -> Vec<Cnot> {
    let mut v = Vec::new();
    for (i, &a) in ANCILLAS.iter().enumerate() {
        for &k in &PLAQUETTES[i] {
            if group.x_type()[i] {
                v.push((a, data(k)));
            } else {
                v.push((data(k), a));
            }
        }
    }
    v
}

/// Index of the syndrome bit measured by ancilla `i` in `group`: bits 0..3
/// are the X-type generators, bits 3..6 the Z-type ones.
pub fn syndrome_bit(group: Group, i: usize) -> usize {
    if group.x_type()[i] {
        i
    } else {
        3 + i
    }
}

/// Both groups without flag CNOTs; six syndrome bits.
pub fn unflagged_circuit() -> Circuit {
    let mut c = Circuit::new(NUM_IONS);
    for group in Group::BOTH {
        open_group(&mut c, group);
        for (ctl, tgt) in plain_cnots(group) {
            c.cnot(ctl, tgt);
        }
        close_group(
            &mut c,
            group,
            [syndrome_bit(group, 0), syndrome_bit(group, 1), syndrome_bit(group, 2)],
        );
    }
    c
}

/// Transversal measurement of the data block; bit `k - 1` is data qubit `k`.
pub fn readout_circuit(target: Target) -> Circuit {
    let mut c = Circuit::new(NUM_IONS);
    if target == Target::Plus {
        for k in 1..=7 {
            from_plus(&mut c, data(k));
        }
    }
    for k in 1..=7u8 {
        c.push(Op::MeasureZ {
            ion: data(k),
            bit: k as usize - 1,
        });
    }
    c
}
