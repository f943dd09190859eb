//! Bound states and Siegert resonances of symmetric one-dimensional
//! potentials by Riccati-Padé quantization, with transmission spectra,
//! Breit-Wigner comparisons and Siegert-approximation widths.

pub mod cli;
pub mod model;
pub mod mp;
pub mod rpm;
pub mod scattering;
pub mod siegert;
