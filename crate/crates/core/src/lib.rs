//! Grid-of-beams beam selection for FDD multi-user massive MIMO downlink.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] places users, draws scattering clusters and produces channel
//!   covariances and Gaussian realizations.
//! * [`codebook`] builds DFT grids of beams and assembles GoB precoders and
//!   combiners from beam indices.
//! * [`training`] covers beam-pilot transmission, LMMSE estimation of the
//!   effective channels, the analytical error covariance and feedback
//!   quantization.
//! * [`precoding`] implements block diagonalization, spectral-efficiency
//!   evaluation and the TDD benchmark.
//! * [`beamsel`] holds the statistical beam-selection machinery: beam-pair
//!   gains, effective covariances, the SE upper bound, GCMD, overhead
//!   accounting and the P1-P4 selection policies.
//! * [`harness`] drives Monte-Carlo campaigns and serializes results.

pub mod beamsel;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod precoding;
pub mod training;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
