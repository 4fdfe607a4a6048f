//! Continuous shearlet transform on periodic 2-D grids.
//!
//! Fields live on uniform grids and are transformed with the convention
//! `f̂(ξ) = ∫ f(x) e^{-2πi x·ξ} dx`, scaled so that discrete sums read as the
//! corresponding integrals. Shearlet coefficients are evaluated as Fourier
//! multipliers, frame quantities as quadratures over scale and shear, and
//! wavefront estimates from the decay of coefficient magnitudes in scale.

pub mod admissibility;
pub mod cli;
pub mod error;
mod fft;
pub mod frames;
pub mod generators;
pub mod grid;
pub mod io;
pub mod radon;
pub mod wavefront;
pub mod xform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
