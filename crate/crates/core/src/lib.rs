//! Decoding of binary linear block codes by linear and integer programming:
//! exact GF(2) algebra, channel models, a dense bounded-variable simplex
//! solver, LP decoding with adaptive cut generation and redundant
//! parity-check cuts, branch-and-bound ML decoding, polytope-level analysis
//! (pseudoweights, fundamental cone, graph covers), trellis-based decoding
//! of convolutional and turbo codes, and a Monte Carlo simulation harness.

pub mod channel;
pub mod code;
pub mod gf2;
pub mod lp;
pub mod ml;
pub mod polytope;
pub mod simplex;
pub mod trellis;

pub use channel::{AwgnChannel, BscChannel, LlrVector};
pub use code::{FactorGraph, LinearCode};
pub use gf2::{BitMatrix, BitVec};
pub use lp::{adaptive_lp_decode, adaptive_lp_decode_with_rpc, lp_decode, DecodeResult};
