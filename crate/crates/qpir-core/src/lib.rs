//! Exact simulation and verification toolkit for entanglement-assisted
//! two-server quantum private information retrieval (QPIR).
//!
//! The toolkit covers four layers:
//!
//! - [`linalg`] / [`weyl`]: dense complex linear algebra and the discrete
//!   Weyl operator algebra over `Z_ℓ`, including the generalized Bell basis
//!   used by the decoder.
//! - [`protocol`]: the two-server rate-one retrieval protocol driven by
//!   shared maximal entanglement, plus its multi-round repetition wrapper.
//! - [`secmeasures`]: entropic security audits (error probability, server
//!   secrecy, user secrecy) computed exactly over exhaustive enumeration,
//!   and the malicious-model identities.
//! - [`converse`] / [`baseline`]: Rényi-divergence strong-converse checkers,
//!   the multi-round entropic weak converse, and the classical two-server
//!   PIR baseline with capacity formulas for comparison tables.
//!
//! Everything is computed with explicit amplitudes at desk scale (system
//! dimensions up to a few hundred); all information quantities are in bits.

pub mod baseline;
pub mod converse;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod secmeasures;
pub mod weyl;

pub use error::{Error, Result};
