//! Spectral side: sparse Fourier coefficient maps, Riesz products, atomic
//! measures, grid densities and singularity diagnostics.

mod atomic;
mod coeffs;
mod criteria;
mod density;
mod riesz;

pub use atomic::{
    hellinger_atomic, thouvenot_check, wrap, AtomicMeasure, Rational, ThouvenotVerdict,
};
pub use coeffs::{CoefficientMap, Dilated, FourierCoefficients, SparseSpectrum};
pub use criteria::{
    divergence_residue, dkbsz_bound, heights_f64, klemes_reinhold_check, mj_sequence,
    peyriere_diagnostics, DkbszBound, KlemesRecord, KlemesReport, MjReading, PeyriereSeries,
    ResidueSums, SubsequencePlan, DKBSZ_SLACK,
};
pub use density::{
    empirical_spectral_density, empirical_spectral_density_dilated,
    empirical_spectral_density_real, evaluate_density, evaluate_spectrum, hellinger, GridDensity,
};
pub use riesz::{
    factor_square_coeffs, product_coeffs, riesz_factor, riesz_factors, RieszFactor, RieszProduct,
};

/// Coefficients with smaller modulus are dropped from sparse maps.
pub const PRUNE_BELOW: f64 = 1e-15;

/// Default cap on |A|·|B| candidate terms in one convolution.
pub const DEFAULT_COEFF_BUDGET: usize = 10_000_000;
