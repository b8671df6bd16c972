//! The [[7,1,3]] colour code.
//!
//! Data qubits are numbered 1 to 7. Bit `k - 1` of a 7-bit mask refers to
//! data qubit `k`.

/// Supports of the three plaquettes, shared by the X- and Z-type generators.
pub const PLAQUETTES: [[u8; 4]; 3] = [[1, 2, 3, 4], [2, 3, 5, 6], [3, 4, 6, 7]];

/// Support of the weight-3 logical representatives `X₅X₆X₇` and `Z₅Z₆Z₇`.
pub const LOGICAL: [u8; 3] = [5, 6, 7];

pub const fn mask_of(qubits: &[u8]) -> u8 {
    let mut m = 0u8;
    let mut i = 0;
    while i < qubits.len() {
        m |= 1 << (qubits[i] - 1);
        i += 1;
    }
    m
}

pub const PLAQUETTE_MASKS: [u8; 3] = [mask_of(&PLAQUETTES[0]), mask_of(&PLAQUETTES[1]), mask_of(&PLAQUETTES[2])];
pub const LOGICAL_MASK: u8 = mask_of(&LOGICAL);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SteaneCode {
    pub x_stabilisers: [[u8; 4]; 3],
    pub z_stabilisers: [[u8; 4]; 3],
    pub logical_x: [u8; 3],
    pub logical_z: [u8; 3],
}

pub fn define_code() -> SteaneCode {
    SteaneCode {
        x_stabilisers: PLAQUETTES,
        z_stabilisers: PLAQUETTES,
        logical_x: LOGICAL,
        logical_z: LOGICAL,
    }
}

/// Plaquette parities of a 7-bit mask, bit `j` for plaquette `j + 1`.
pub fn syndrome(mask: u8) -> u8 {
    let mut s = 0;
    for (j, p) in PLAQUETTE_MASKS.iter().enumerate() {
        s |= (((mask & p).count_ones() & 1) as u8) << j;
    }
    s
}

/// The data qubit (1..=7) whose plaquette membership equals `s`, if any.
pub fn qubit_for_syndrome(s: u8) -> Option<u8> {
    (1..=7u8).find(|&k| syndrome(1 << (k - 1)) == s && s != 0)
}

/// Minimum-weight correction mask for a syndrome.
pub fn naive_correction(s: u8) -> u8 {
    qubit_for_syndrome(s).map_or(0, |k| 1 << (k - 1))
}

/// Nearest Hamming codeword of a 7-bit mask.
pub fn hamming_correct(mask: u8) -> u8 {
    mask ^ naive_correction(syndrome(mask))
}

/// Logical parity of a 7-bit readout after classical Hamming correction.
pub fn decode_readout(mask: u8) -> bool {
    (hamming_correct(mask) & LOGICAL_MASK).count_ones() % 2 == 1
}

/// True if a one-type error mask is harmless: it is within distance one of a
/// stabiliser (an even-weight codeword).
pub fn is_correctable(mask: u8) -> bool {
    !decode_readout(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Pauli, PauliString};

    fn generators() -> Vec<PauliString> {
        let code = define_code();
        let mut v = Vec::new();
        for (sup, p) in [(code.x_stabilisers, Pauli::X), (code.z_stabilisers, Pauli::Z)] {
            for s in sup {
                let terms: Vec<_> = s.iter().map(|&k| (k as usize - 1, p)).collect();
                v.push(PauliString::from_sparse(7, &terms));
            }
        }
        v
    }

    fn logical(p: Pauli) -> PauliString {
        let terms: Vec<_> = LOGICAL.iter().map(|&k| (k as usize - 1, p)).collect();
        PauliString::from_sparse(7, &terms)
    }

    #[test]
    fn stabilisers_and_logicals_commute_correctly() {
        let g = generators();
        for a in &g {
            for b in &g {
                assert!(a.commutes(b));
            }
            assert!(a.commutes(&logical(Pauli::X)));
            assert!(a.commutes(&logical(Pauli::Z)));
        }
        assert!(!logical(Pauli::X).commutes(&logical(Pauli::Z)));
    }

    #[test]
    fn distance_is_three() {
        // No Pauli of weight ≤ 2 commutes with every generator while acting
        // nontrivially on the logical qubit.
        let g = generators();
        let lx = logical(Pauli::X);
        let lz = logical(Pauli::Z);
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut checked = 0;
        for i in 0..7 {
            for j in i..7 {
                for &a in &all {
                    for &b in &all {
                        let mut p = PauliString::identity(7);
                        p.set(i, a);
                        if j != i {
                            p.set(j, b);
                        }
                        if p.is_identity() {
                            continue;
                        }
                        checked += 1;
                        let in_normaliser = g.iter().all(|s| s.commutes(&p));
                        if in_normaliser {
                            assert!(p.commutes(&lx) && p.commutes(&lz), "{p}");
                        }
                    }
                }
            }
        }
        assert!(checked > 0);
        // A weight-3 logical exists.
        assert!(g.iter().all(|s| s.commutes(&lx)));
    }

    #[test]
    fn syndromes_of_single_errors() {
        // X on qubit 2 sits in plaquettes 1 and 2.
        assert_eq!(syndrome(mask_of(&[2])), 0b011);
        // Z on qubit 5 sits in plaquette 2 only.
        assert_eq!(syndrome(mask_of(&[5])), 0b010);
        let mut seen = [false; 8];
        for k in 1..=7u8 {
            let s = syndrome(1 << (k - 1));
            assert!(!seen[s as usize] && s != 0);
            seen[s as usize] = true;
            assert_eq!(qubit_for_syndrome(s), Some(k));
        }
    }

    #[test]
    fn hook_error_completes_logical() {
        // X₆X₇ excites only plaquette 2; the naive fix X₅ completes X_L.
        let e = mask_of(&[6, 7]);
        assert_eq!(syndrome(e), 0b010);
        assert_eq!(naive_correction(syndrome(e)), mask_of(&[5]));
        assert_eq!(e ^ naive_correction(syndrome(e)), LOGICAL_MASK);
        assert!(!is_correctable(e));
    }

    #[test]
    fn readout_decoding() {
        assert!(!decode_readout(0));
        assert!(decode_readout(LOGICAL_MASK));
        for k in 0..7 {
            assert!(!decode_readout(1 << k));
            assert!(decode_readout(LOGICAL_MASK ^ (1 << k)));
            assert!(!decode_readout(PLAQUETTE_MASKS[0] ^ (1 << k)));
        }
    }
}
