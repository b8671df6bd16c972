//! Lookup-table decoding built by exhaustive single-fault propagation.

use alloc::vec;
use alloc::vec::Vec;

use crate::backend::SimError;
use crate::circuit::{lower_cnots, merge_rotations, Circuit};
use crate::frame::{fault_sites, propagate_fault, FaultSite, PauliFrame};

use super::circuits::{flagged_group_circuit, prep_circuit, readout_circuit, unflagged_circuit, Group, Orderings, Target, DATA_MASK};
use super::code::{decode_readout, is_correctable, naive_correction};

/// Pauli correction on the data block as 7-bit X and Z masks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Correction {
    pub x: u8,
    pub z: u8,
}

impl Correction {
    /// Minimum-weight correction for a six-bit syndrome (bits 0..3 from the
    /// X-type generators, 3..6 from the Z-type ones).
    pub fn naive(syndrome: u8) -> Self {
        Self {
            x: naive_correction(syndrome >> 3 & 7),
            z: naive_correction(syndrome & 7),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }
}

/// Correction per `(triggering group, its three outcomes, unflagged syndrome)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeTable {
    entries: Vec<Option<Correction>>,
}

fn key(group: Group, bits: u8, syndrome: u8) -> usize {
    (group.index() * 8 + bits as usize) * 64 + syndrome as usize
}

impl DecodeTable {
    /// Table with no learned entries; every lookup is the naive decode.
    pub fn naive() -> Self {
        Self {
            entries: vec![None; 2 * 8 * 64],
        }
    }

    pub fn get(&self, group: Group, bits: u8, syndrome: u8) -> Option<Correction> {
        self.entries[key(group, bits, syndrome)]
    }

    pub fn lookup(&self, group: Group, bits: u8, syndrome: u8) -> Correction {
        self.get(group, bits, syndrome).unwrap_or_else(|| Correction::naive(syndrome))
    }

    /// Number of signatures reached by some single fault.
    pub fn learned(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    /// Learned entries that differ from the naive decode.
    pub fn non_naive(&self) -> Vec<(Group, u8, u8, Correction)> {
        let mut out = Vec::new();
        for g in Group::BOTH {
            for bits in 0..8u8 {
                for s in 0..64u8 {
                    if let Some(c) = self.get(g, bits, s) {
                        if c != Correction::naive(s) {
                            out.push((g, bits, s, c));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Why a set of circuits is not fault tolerant.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FtError {
    #[error("fault at {segment:?} event {event} causes an undetected logical error on {target:?}")]
    Undetected { target: Target, segment: Segment, event: usize },
    #[error("no correction fits signature group {group:?}, outcomes {bits:03b}, syndrome {syndrome:06b}")]
    Collision { group: Group, bits: u8, syndrome: u8 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// A circuit segment of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Segment {
    Prep,
    Group(Group),
    Unflagged,
    Readout,
}

/// Native (lowered, merged) circuits as executed without refocussing.
#[derive(Clone, Debug)]
pub struct NativeCircuits {
    pub prep: [Circuit; 2],
    pub groups: [Circuit; 2],
    pub unflagged: Circuit,
    pub readout: [Circuit; 2],
}

fn native(c: &Circuit) -> Circuit {
    merge_rotations(&lower_cnots(c))
}

fn tix(t: Target) -> usize {
    match t {
        Target::Plus => 0,
        Target::Zero => 1,
    }
}

impl NativeCircuits {
    pub fn new(ord: &Orderings) -> Self {
        Self {
            prep: [native(&prep_circuit(Target::Plus, ord)), native(&prep_circuit(Target::Zero, ord))],
            groups: [native(&flagged_group_circuit(Group::A, ord)), native(&flagged_group_circuit(Group::B, ord))],
            unflagged: native(&unflagged_circuit()),
            readout: [native(&readout_circuit(Target::Plus)), native(&readout_circuit(Target::Zero))],
        }
    }

    pub fn segment(&self, target: Target, seg: Segment) -> &Circuit {
        match seg {
            Segment::Prep => &self.prep[tix(target)],
            Segment::Group(g) => &self.groups[g.index()],
            Segment::Unflagged => &self.unflagged,
            Segment::Readout => &self.readout[tix(target)],
        }
    }
}

fn bits_of(flips: &[bool]) -> u8 {
    flips.iter().enumerate().fold(0u8, |m, (i, &b)| m | ((b as u8) << i))
}

/// Data-block part of a frame as 7-bit masks `(x, z)`.
pub fn data_masks(f: &PauliFrame) -> (u8, u8) {
    (((f.x & DATA_MASK) >> 1) as u8, ((f.z & DATA_MASK) >> 1) as u8)
}

/// Result of a noiseless protocol run carrying at most one fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameOutcome {
    Restart,
    Finished {
        trigger: Option<(Group, u8, u8)>,
        /// Data error before readout, without correction.
        residual: (u8, u8),
        /// Readout failure with the correction of `table`, if one was given.
        failure: bool,
    },
}

/// Runs the protocol on Pauli frames with one optional fault.
pub fn frame_protocol(
    nc: &NativeCircuits,
    target: Target,
    fault: Option<(Segment, FaultSite)>,
    table: Option<&DecodeTable>,
) -> Result<FrameOutcome, SimError> {
    let site = |seg: Segment| fault.filter(|(s, _)| *s == seg).map(|(_, f)| f);
    let (mut frame, flips) = propagate_fault(nc.segment(target, Segment::Prep), PauliFrame::IDENTITY, site(Segment::Prep))?;
    if flips[0] {
        return Ok(FrameOutcome::Restart);
    }
    let mut trigger = None;
    for g in Group::BOTH {
        let (f, flips) = propagate_fault(nc.segment(target, Segment::Group(g)), frame, site(Segment::Group(g)))?;
        frame = f;
        let bits = bits_of(&flips);
        if bits != 0 {
            let (f, flips) = propagate_fault(&nc.unflagged, frame, site(Segment::Unflagged))?;
            frame = f;
            trigger = Some((g, bits, bits_of(&flips)));
            break;
        }
    }
    let residual = data_masks(&frame);
    if let (Some((g, bits, s)), Some(t)) = (trigger, table) {
        let c = t.lookup(g, bits, s);
        frame.x ^= (c.x as u64) << 1;
        frame.z ^= (c.z as u64) << 1;
    }
    let (_, flips) = propagate_fault(nc.segment(target, Segment::Readout), frame, site(Segment::Readout))?;
    Ok(FrameOutcome::Finished {
        trigger,
        residual,
        failure: decode_readout(bits_of(&flips)),
    })
}

/// Segments whose faults a single-fault run can reach.
pub const FAULT_SEGMENTS: [Segment; 4] = [Segment::Prep, Segment::Group(Group::A), Segment::Group(Group::B), Segment::Readout];

/// Builds the table from every single fault and fails if no correction
/// fits some signature or a silent fault flips the logical readout.
pub fn build_decode_table(nc: &NativeCircuits) -> Result<DecodeTable, FtError> {
    build_decode_table_for(nc, &FAULT_SEGMENTS)
}

/// As [`build_decode_table`], enumerating faults in `segments` only.
pub fn build_decode_table_for(nc: &NativeCircuits, segments: &[Segment]) -> Result<DecodeTable, FtError> {
    // Per key: X residuals that must stay correctable (from |0⟩ runs) and Z
    // residuals (from |+⟩ runs).
    let mut xs: Vec<Vec<u8>> = vec![Vec::new(); 2 * 8 * 64];
    let mut zs: Vec<Vec<u8>> = vec![Vec::new(); 2 * 8 * 64];
    let mut seen = vec![false; 2 * 8 * 64];
    // The noiseless run is silent.
    for target in Target::BOTH {
        if frame_protocol(nc, target, None, None)? != (FrameOutcome::Finished { trigger: None, residual: (0, 0), failure: false }) {
            return Err(FtError::Undetected { target, segment: Segment::Prep, event: usize::MAX });
        }
    }
    for target in Target::BOTH {
        for &seg in segments {
            for site in fault_sites(nc.segment(target, seg)) {
                match frame_protocol(nc, target, Some((seg, site)), None)? {
                    FrameOutcome::Restart => {}
                    FrameOutcome::Finished { trigger: None, failure, .. } => {
                        if failure {
                            return Err(FtError::Undetected { target, segment: seg, event: site.event });
                        }
                    }
                    FrameOutcome::Finished {
                        trigger: Some((g, bits, s)),
                        residual: (rx, rz),
                        ..
                    } => {
                        let k = key(g, bits, s);
                        seen[k] = true;
                        match target {
                            Target::Plus => zs[k].push(rz),
                            Target::Zero => xs[k].push(rx),
                        }
                    }
                }
            }
        }
    }
    let mut table = DecodeTable::naive();
    for g in Group::BOTH {
        for bits in 0..8u8 {
            for s in 0..64u8 {
                let k = key(g, bits, s);
                if !seen[k] {
                    continue;
                }
                let naive = Correction::naive(s);
                let x = choose(&xs[k], naive.x).ok_or(FtError::Collision { group: g, bits, syndrome: s })?;
                let z = choose(&zs[k], naive.z).ok_or(FtError::Collision { group: g, bits, syndrome: s })?;
                table.entries[k] = Some(Correction { x, z });
            }
        }
    }
    Ok(table)
}

/// Lowest-weight mask that makes every residual correctable, preferring `naive`.
fn choose(residuals: &[u8], naive: u8) -> Option<u8> {
    let fits = |c: u8| residuals.iter().all(|&r| is_correctable(r ^ c));
    if fits(naive) {
        return Some(naive);
    }
    let mut cands: Vec<u8> = (0..128u8).collect();
    cands.sort_by_key(|c| (c.count_ones(), *c));
    cands.into_iter().find(|&c| fits(c))
}

/// Counts of a frame-level single-fault sweep with the table applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameSweep {
    pub faults: usize,
    pub restarts: usize,
    pub triggered: usize,
    pub failures: usize,
}

pub fn frame_fault_sweep(nc: &NativeCircuits, table: &DecodeTable) -> Result<FrameSweep, SimError> {
    let mut r = FrameSweep::default();
    for target in Target::BOTH {
        for seg in FAULT_SEGMENTS {
            for site in fault_sites(nc.segment(target, seg)) {
                r.faults += 1;
                match frame_protocol(nc, target, Some((seg, site)), Some(table))? {
                    FrameOutcome::Restart => r.restarts += 1,
                    FrameOutcome::Finished { trigger, failure, .. } => {
                        r.triggered += trigger.is_some() as usize;
                        r.failures += failure as usize;
                    }
                }
            }
        }
    }
    Ok(r)
}
