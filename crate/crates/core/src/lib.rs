//! Solovay-Kitaev compilation of SU(2) and SU(d) unitaries into sequences
//! over a finite, inverse-closed instruction set.
//!
//! The pipeline is: parse an [`gates::InstructionSet`], enumerate a
//! [`net::BasicNet`] of short sequences, then run [`engine::Compiler`] which
//! recursively corrects the net's base approximation with balanced group
//! commutators from [`commutator`].

pub mod bench;
pub mod commutator;
pub mod engine;
pub mod error;
pub mod gates;
pub mod kdtree;
pub mod linalg;
pub mod net;
pub mod target;
pub mod verify;

pub use commutator::{GcPair, SkConstants};
pub use engine::{CompileNode, CompileReport, Compiler, DepthMode, EngineConfig};
pub use error::{Error, Result};
pub use gates::{GateSequence, InstructionSet, Order};
pub use linalg::{Hermitian, Unitary};
pub use net::BasicNet;

