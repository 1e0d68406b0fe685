//! Spatial and frequency-domain filtering primitives: Gaussian blur,
//! frequency-domain raster filtering, direct and binned fast bilateral
//! filters, and the edge-aware CSF filter built from them.

mod bilateral;
mod dct;
mod fourier;
mod gaussian;

pub use bilateral::{
    bilateral_direct, bilateral_fast, bilateral_fast_multi, bilateral_fast_with_stats,
    edge_aware_csf_filter, edge_aware_csf_filter_with_stats, BilateralParams, FilterStats,
};
pub use fourier::{frequency_filter, Fft2d};
pub use gaussian::gaussian_blur;

pub(crate) use dct::Dct2d as SymmetricFilter;
