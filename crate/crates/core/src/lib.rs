//! A conservative plain-LWE key-encapsulation mechanism (`n = 1024`,
//! `q = 1103`, `sigma = 1.4`) with an FO transform and implicit rejection,
//! plus the tooling used to pick its parameters: a decryption-failure
//! analyzer, a core-SVP security estimate and a parallel modulus search.

pub mod error;
pub mod estimator;
pub mod failure;
pub mod hunter;
pub mod hybrid;
pub mod kem;
pub mod params;
pub mod pke;
pub mod rng;

pub use error::*;
pub use params::{derive_sizes, DerivedSizes, ParameterSet, REFERENCE};
