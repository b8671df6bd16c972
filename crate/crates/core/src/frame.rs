//! Pauli-frame propagation through native circuits.
//!
//! Tracks a Pauli error (up to phase) on at most 64 ions through Clifford
//! events and records which measurements it flips.

use alloc::vec;
use alloc::vec::Vec;

use crate::backend::SimError;
use crate::circuit::{lower_cnots, Circuit, Op};
use crate::pauli::Pauli;
use crate::tableau::{clifford_quarter_turns, TableauError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    pub x: u64,
    pub z: u64,
}

impl PauliFrame {
    pub const IDENTITY: PauliFrame = PauliFrame { x: 0, z: 0 };

    pub fn single(q: usize, p: Pauli) -> Self {
        let mut f = Self::IDENTITY;
        f.apply(q, p);
        f
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    /// Multiplies `p` onto ion `q`.
    pub fn apply(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x ^= (x as u64) << q;
        self.z ^= (z as u64) << q;
    }

    pub fn clear(&mut self, q: usize) {
        self.x &= !(1 << q);
        self.z &= !(1 << q);
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Frame restricted to the ions in `mask`.
    pub fn restrict(&self, mask: u64) -> Self {
        Self {
            x: self.x & mask,
            z: self.z & mask,
        }
    }

    /// Conjugates the frame by one native event. Returns the flip of a Z
    /// measurement when the event is one.
    pub fn propagate(&mut self, op: &Op) -> Result<Option<bool>, SimError> {
        match *op {
            Op::Rotation { axis, theta, ion } => {
                let k = clifford_quarter_turns(theta).ok_or(TableauError::NonClifford(theta))?;
                let a = axis.pauli();
                let q = self.get(ion);
                if k % 2 == 1 && q.anticommutes(a) {
                    self.clear(ion);
                    self.apply(ion, a.times(q));
                }
                Ok(None)
            }
            Op::Ms { theta, a, b } => {
                let k = clifford_quarter_turns(theta).ok_or(TableauError::NonClifford(theta))?;
                let anti = ((self.z >> a) ^ (self.z >> b)) & 1 == 1;
                if k % 2 == 1 && anti {
                    self.x ^= (1 << a) | (1 << b);
                }
                Ok(None)
            }
            Op::Prepare0 { ion } => {
                self.clear(ion);
                Ok(None)
            }
            Op::MeasureZ { ion, .. } => Ok(Some(self.x >> ion & 1 == 1)),
            Op::RepumpLeak { .. } | Op::Barrier => Ok(None),
            Op::Cnot { control, target } => {
                if self.x >> control & 1 == 1 {
                    self.x ^= 1 << target;
                }
                if self.z >> target & 1 == 1 {
                    self.z ^= 1 << control;
                }
                Ok(None)
            }
        }
    }
}

/// Where a fault sits relative to an event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FaultSite {
    pub event: usize,
    pub before: bool,
    pub frame: PauliFrame,
}

/// Every single-fault location of a native circuit: all non-identity Paulis on
/// the ions of each gate after it, every single-qubit Pauli on each ion before
/// its event, and a bit flip before each measurement.
pub fn fault_sites(circuit: &Circuit) -> Vec<FaultSite> {
    let mut out = Vec::new();
    for (k, e) in circuit.events().iter().enumerate() {
        let (ions, n) = e.op.ions();
        let ions = &ions[..n];
        for &q in ions {
            for p in Pauli::NON_IDENTITY {
                out.push(FaultSite {
                    event: k,
                    before: true,
                    frame: PauliFrame::single(q, p),
                });
            }
        }
        if matches!(e.op, Op::MeasureZ { .. }) {
            continue;
        }
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        match ions {
            [q] => {
                for p in Pauli::NON_IDENTITY {
                    out.push(FaultSite {
                        event: k,
                        before: false,
                        frame: PauliFrame::single(*q, p),
                    });
                }
            }
            [a, b] => {
                for pa in all {
                    for pb in all {
                        if pa == Pauli::I && pb == Pauli::I {
                            continue;
                        }
                        let mut f = PauliFrame::single(*a, pa);
                        f.apply(*b, pb);
                        out.push(FaultSite {
                            event: k,
                            before: false,
                            frame: f,
                        });
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Propagates `site` through `circuit` and returns the final frame and the
/// flipped measurement bits.
pub fn propagate_fault(circuit: &Circuit, start: PauliFrame, site: Option<FaultSite>) -> Result<(PauliFrame, Vec<bool>), SimError> {
    let circuit = lower_cnots(circuit);
    let mut frame = start;
    let mut flips = vec![false; circuit.num_bits()];
    for (k, e) in circuit.events().iter().enumerate() {
        if let Some(s) = site.filter(|s| s.event == k && s.before) {
            frame.x ^= s.frame.x;
            frame.z ^= s.frame.z;
        }
        if let (Some(flip), Op::MeasureZ { bit, .. }) = (frame.propagate(&e.op)?, e.op) {
            flips[bit] ^= flip;
        }
        if let Some(s) = site.filter(|s| s.event == k && !s.before) {
            frame.x ^= s.frame.x;
            frame.z ^= s.frame.z;
        }
    }
    Ok((frame, flips))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{Backend, TableauBackend};
    use crate::circuit::compile_cnot;
    use crate::pauli::PauliString;
    use crate::rng::trial_rng;
    use crate::tableau::{Axis, StabilizerTableau};
    use core::f64::consts::{FRAC_PI_2, PI};
    use proptest::prelude::*;

    fn frame_string(f: &PauliFrame, n: usize) -> PauliString {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            p.set(q, f.get(q));
        }
        p
    }

    #[test]
    fn cnot_rules() {
        let mut f = PauliFrame::single(0, Pauli::X);
        f.propagate(&Op::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!((f.get(0), f.get(1)), (Pauli::X, Pauli::X));
        let mut f = PauliFrame::single(1, Pauli::Z);
        f.propagate(&Op::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!((f.get(0), f.get(1)), (Pauli::Z, Pauli::Z));
    }

    #[test]
    fn compiled_cnot_propagates_like_cnot() {
        for a in Pauli::NON_IDENTITY.into_iter().chain([Pauli::I]) {
            for b in Pauli::NON_IDENTITY.into_iter().chain([Pauli::I]) {
                let mut f = PauliFrame::single(0, a);
                f.apply(1, b);
                let mut g = f;
                for op in compile_cnot(0, 1) {
                    f.propagate(&op).unwrap();
                }
                g.propagate(&Op::Cnot { control: 0, target: 1 }).unwrap();
                assert_eq!(f, g, "{a:?}{b:?}");
            }
        }
    }

    #[test]
    fn non_clifford_rejected() {
        let mut f = PauliFrame::IDENTITY;
        assert!(f
            .propagate(&Op::Rotation {
                axis: Axis::X,
                theta: 0.3,
                ion: 0
            })
            .is_err());
    }

    fn arb_op(n: usize) -> impl Strategy<Value = Op> {
        let axis = prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)];
        let angle = prop_oneof![Just(FRAC_PI_2), Just(-FRAC_PI_2), Just(PI)];
        prop_oneof![
            (axis, angle.clone(), 0..n).prop_map(|(axis, theta, ion)| Op::Rotation { axis, theta, ion }),
            (angle, 0..n, 1..n).prop_map(move |(theta, a, d)| Op::Ms { theta, a, b: (a + d) % n }),
        ]
    }

    proptest! {
        /// U P U† computed by frame rules matches conjugation on a tableau
        /// whose state is stabilised by P.
        #[test]
        fn frame_matches_tableau_conjugation(ops in proptest::collection::vec(arb_op(4), 1..20), q in 0usize..4, p in 0usize..3) {
            let n = 4;
            let pauli = Pauli::NON_IDENTITY[p];
            // Prepare a state stabilised by `pauli` on q, Z elsewhere.
            let mut b = TableauBackend::new(n);
            match pauli {
                Pauli::X => b.rotate(&[(q, Pauli::Y)], FRAC_PI_2).unwrap(),
                Pauli::Y => b.rotate(&[(q, Pauli::X)], -FRAC_PI_2).unwrap(),
                _ => {}
            }
            let mut f = PauliFrame::single(q, pauli);
            for op in &ops {
                match *op {
                    Op::Rotation { axis, theta, ion } => b.rotate(&[(ion, axis.pauli())], theta).unwrap(),
                    Op::Ms { theta, a, b: c } => b.rotate(&[(a, Pauli::X), (c, Pauli::X)], theta).unwrap(),
                    _ => unreachable!(),
                }
                f.propagate(op).unwrap();
            }
            let t: &mut StabilizerTableau = b.tableau_mut().unwrap();
            let e = t.expectation(&frame_string(&f, n)).unwrap();
            prop_assert!(e == 1 || e == -1);
        }
    }

    #[test]
    fn measurement_flip_matches_tableau() {
        let mut c = Circuit::new(2);
        c.push(Op::Prepare0 { ion: 1 });
        c.cnot(0, 1);
        c.push(Op::MeasureZ { ion: 1, bit: 0 });
        let site = FaultSite {
            event: 0,
            before: false,
            frame: PauliFrame::single(0, Pauli::X),
        };
        let (_, flips) = propagate_fault(&c, PauliFrame::IDENTITY, Some(site)).unwrap();
        assert_eq!(flips, vec![true]);
        let mut b = TableauBackend::new(2);
        b.apply_pauli(0, Pauli::X).unwrap();
        let mut rng = trial_rng(0, 0);
        for op in compile_cnot(0, 1) {
            match op {
                Op::Rotation { axis, theta, ion } => b.rotate(&[(ion, axis.pauli())], theta).unwrap(),
                Op::Ms { theta, a, b: c } => b.rotate(&[(a, Pauli::X), (c, Pauli::X)], theta).unwrap(),
                _ => unreachable!(),
            }
        }
        assert!(b.measure(1, &mut rng).unwrap());
    }

    #[test]
    fn sites_cover_two_qubit_paulis() {
        let mut c = Circuit::new(2);
        c.push(Op::Ms {
            theta: FRAC_PI_2,
            a: 0,
            b: 1,
        });
        c.push(Op::MeasureZ { ion: 0, bit: 0 });
        let sites = fault_sites(&c);
        // 6 before-gate singles, 15 after-gate pairs, 3 before the measurement.
        assert_eq!(sites.len(), 6 + 15 + 3);
    }
}
