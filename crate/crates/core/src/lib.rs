//! Concatenated codec for DNA data storage that keeps soft information from
//! reads to bits.
//!
//! Encoding: bytes are chunked, CRC-protected, LDPC-encoded, scrambled, and
//! written as addressed strands, with an interleaved Reed–Solomon code over
//! GF(2^16) across strands. Decoding: reads are assigned to addresses, turned
//! into per-position base posteriors with a profile HMM, fused across reads,
//! converted to bit LLRs, decoded by ordered statistics decoding, and passed to
//! the outer code as received symbols or erasures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod assign;
pub mod codec;
pub mod dna;
pub mod error;
pub mod fasta;
pub mod gf;
pub mod idsim;
pub mod inner;
pub mod outer;
pub mod phmm;
pub mod rng;

pub use error::{Error, Result};
