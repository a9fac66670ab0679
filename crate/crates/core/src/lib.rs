//! # piclab
//!
//! Principal inertia components (PICs) of finite joint distributions and
//! the estimation-theoretic results built on them.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`dist`] | joint pmfs, channels, entropy, mutual and f-information |
//! | [`pic`] | PIC decomposition, k-correlation, MMSE spectrum, DPI |
//! | [`bounds`] | lower bounds on estimation error and function estimation |
//! | [`boolean`] | Hadamard spectra of additive binary noise, one-bit results |
//! | [`privacy`] | perfect privacy and the privacy funnel |
//! | [`oracle`] | independent numerical cross-checks |
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which every documented
//! tolerance assumes.

pub mod boolean;
pub mod bounds;
pub mod dist;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod pic;
pub mod privacy;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{LogBase, Real};

/// `f64` joint pmf.
pub type JointPmf64 = dist::JointPmf<f64>;
/// `f64` channel.
pub type Channel64 = dist::Channel<f64>;
/// `f64` dense matrix.
pub type Matrix64 = linalg::Matrix<f64>;
/// `f64` PIC decomposition.
pub type PicDecomposition64 = pic::PicDecomposition<f64>;
/// `f64` privacy report.
pub type PrivacyAnalysis64 = privacy::PrivacyAnalysis<f64>;
/// `f64` error bound.
pub type ErrorBound64 = bounds::ErrorBound<f64>;
