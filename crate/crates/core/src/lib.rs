//! Computational toolkit for Möbius disjointness of rank-one systems.
//!
//! * [`numtheory`]: linear sieve for μ, λ and Mertens sums; twisted sums.
//! * [`symbolic`]: building blocks of rank-one systems and their statistics.
//! * [`averages`]: Möbius/Liouville-weighted ergodic averages on orbit models.
//! * [`spectral`]: generalized Riesz products, pseudo-dilations, Hellinger
//!   affinity and singularity diagnostics.
//!
//! Floating-point kernels are generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below fix the scalar to `f64`.

pub mod averages;
pub mod error;
pub mod numtheory;
pub mod scalar;
pub mod spectral;
pub mod symbolic;

pub use error::{Error, Result};
pub use scalar::Real;

pub type AverageSeriesF64 = averages::AverageSeries<f64>;
pub type ObservableF64 = averages::Observable<f64>;
pub type OrbitModelF64 = averages::OrbitModel<f64>;
pub type CoefficientMapF64 = spectral::CoefficientMap<f64>;
pub type GridDensityF64 = spectral::GridDensity<f64>;
pub type SparseSpectrumF64 = spectral::SparseSpectrum<f64>;
pub type TwistedScanF64 = numtheory::TwistedScan<f64>;
