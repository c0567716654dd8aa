//! Photon statistics of a driven two-level emitter superposed with coherent light.
//!
//! A charged quantum dot in a high-Q micropillar reflects resonant laser light as the
//! interference of two amplitudes: the bare cavity response and the emitter's resonant
//! Rayleigh scattering. Because a single two-level transition can only scatter one photon
//! at a time, that interference sorts the reflected light by photon number; the mean
//! intensity and the two-photon correlations move in opposite directions as the laser is
//! detuned across the line.
//!
//! The crate is organized by physical layer:
//!
//! * [`units`]: energy/time quantities (µeV, ns, ħ), emitter and cavity parameter sets.
//! * [`scatter`]: steady-state reflection amplitudes, spectra, modulation metrics and the
//!   deterministic calibration fit for the cavity background.
//! * [`bloch`]: optical Bloch equations, quantum-regression g²(τ) of the superposed
//!   field, detuning-resolved g² maps, shape classification and field calibration.
//! * [`trajectory`]: quantum-jump Monte Carlo click streams, intensity-correlation
//!   histograms and g²(0) estimation.
//! * [`spin`]: charge/spin telegraph dynamics (Gillespie), polarization-tagged click
//!   correlation, blinking bunching and exponential decay fits.
//! * [`config`] / [`output`]: run configuration, CSV/JSON emission and run manifests.
//!
//! Conventions, fixed crate-wide: energies in µeV, times in ns, rates are angular ns⁻¹,
//! ħ = 0.6582119569 µeV·ns. Linewidth-type energies are half-widths (HWHM) internally;
//! full-widths are accepted at configuration boundaries and halved on ingest.
//!
//! Every stochastic routine takes an explicit seed and is bit-reproducible for a given
//! (parameters, seed) pair, including under parallel sharding.

pub mod bloch;
pub mod config;
mod matexp;
pub mod output;
pub mod scatter;
pub mod spin;
pub mod trajectory;
pub mod units;

mod error;

pub use error::Error;

/// Artifact version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
