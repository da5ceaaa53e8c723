//! Noise tracking on qudit graph states over finite fields GF(p^m).
//!
//! A graph state is stored as a weighted graph and the noise acting on it as
//! a list of Pauli-diagonal channels, each a distribution over Z-type words.
//! Local complementation, local multiplication, CZ gates and Weyl-basis
//! measurements update the graph and the channels separately, so the cost
//! never involves the exponentially large state vector. The [`oracle`]
//! module holds a small dense simulator used to check that claim.
//!
//! Start with the runnable programs in `examples/`.

pub mod chain;
pub mod cli;
pub mod fidelity;
pub mod gf;
pub mod graph;
pub mod io;
pub mod measure;
pub mod noise;
pub mod oracle;
pub mod prob;
pub mod verify;
