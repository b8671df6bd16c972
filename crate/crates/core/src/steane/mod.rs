//! Flag-based fault-tolerant error correction with the 7-qubit colour code.

pub mod circuits;
pub mod code;
pub mod decoder;
pub mod protocol;

pub use circuits::{Group, Orderings, Target};
pub use code::{define_code, SteaneCode};
pub use decoder::{build_decode_table, Correction, DecodeTable, FtError, NativeCircuits};
pub use protocol::{Attempt, FaultSweep, Protocol, ProtocolError, TrialOutcome};
