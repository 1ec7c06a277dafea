//! Non-linear feedback shift registers in Fibonacci and Galois
//! configuration.
//!
//! * [`anf`]: Boolean polynomials in algebraic normal form.
//! * [`register`]: the register model and its simulation.
//! * [`graph`]: feedback graphs and recurrence derivation.
//! * [`transform`]: shifting product-terms between feedback functions.
//! * [`equivalence`]: deciding output equivalence of two registers.
//! * [`analysis`]: implementation metrics and sequence statistics.
//! * [`cli`]: spec files and the command-line front end.

pub mod analysis;
pub mod anf;
pub mod cli;
pub mod equivalence;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod register;
pub mod transform;

pub use anf::{Anf, Monomial};
pub use error::{Error, Result, ShiftRejection};
pub use graph::{derive_recurrence, reduce_graph, FeedbackGraph, Recurrence};
pub use register::{BitSequence, Nlfsr, State};
pub use transform::{
    apply_shift, fully_shift, is_fully_shifted, is_uniform, terminal_bit, Guard, ShiftMove,
};
