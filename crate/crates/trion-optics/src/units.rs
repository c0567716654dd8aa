//! Quantities and parameter sets shared by every physical layer.
//!
//! Unit system, fixed once: energies in µeV, times in ns, rates angular in ns⁻¹, with
//! ħ = 0.6582119569 µeV·ns. An energy-domain half-width Γ₀ maps to the amplitude decay
//! rate Γ₀/ħ, so the population decay of a radiatively broadened line of HWHM Γ₀ is
//! Γ = 2·Γ₀/ħ. Linewidths are half-widths (HWHM) everywhere inside the crate; full-widths
//! are accepted at configuration boundaries and halved on ingest via [`fwhm_to_hwhm`].

use serde::{Deserialize, Serialize};

use crate::Error;

/// Reduced Planck constant in µeV·ns.
pub const HBAR_UEV_NS: f64 = 0.6582119569;

/// An energy (or detuning, or energy-domain linewidth) in µeV. Always finite; may be
/// negative when it represents a detuning.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Energy(f64);

impl Energy {
    pub fn from_uev(value: f64) -> Result<Self, Error> {
        if !value.is_finite() {
            return Err(Error::invalid(format!("energy must be finite, got {value}")));
        }
        Ok(Energy(value))
    }

    pub fn uev(self) -> f64 {
        self.0
    }

    /// Signed angular rate E/ħ in ns⁻¹. Used for detunings, which carry sign; for
    /// linewidth magnitudes prefer [`energy_to_rate`], which enforces non-negativity.
    pub fn angular_rate(self) -> f64 {
        self.0 / HBAR_UEV_NS
    }
}

/// A time in ns. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeNs(f64);

impl TimeNs {
    pub fn from_ns(value: f64) -> Result<Self, Error> {
        if !value.is_finite() {
            return Err(Error::invalid(format!("time must be finite, got {value}")));
        }
        Ok(TimeNs(value))
    }

    /// Microseconds accepted at interface boundaries; stored as ns.
    pub fn from_us(value: f64) -> Result<Self, Error> {
        Self::from_ns(value * 1e3)
    }

    pub fn ns(self) -> f64 {
        self.0
    }
}

/// Energy magnitude (µeV) to angular rate (ns⁻¹). Domain: e ≥ 0.
pub fn energy_to_rate(e: Energy) -> Result<f64, Error> {
    if e.uev() < 0.0 {
        return Err(Error::invalid(format!(
            "energy_to_rate expects a magnitude, got {} ueV; signed detunings go through Energy::angular_rate",
            e.uev()
        )));
    }
    Ok(e.uev() / HBAR_UEV_NS)
}

/// Angular rate (ns⁻¹) to energy magnitude (µeV). Domain: r ≥ 0 and finite.
pub fn rate_to_energy(rate: f64) -> Result<Energy, Error> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::invalid(format!("rate must be finite and >= 0, got {rate}")));
    }
    Energy::from_uev(rate * HBAR_UEV_NS)
}

/// Full-width at half-maximum to half-width. Domain: fwhm ≥ 0.
pub fn fwhm_to_hwhm(fwhm: Energy) -> Result<Energy, Error> {
    if fwhm.uev() < 0.0 {
        return Err(Error::invalid(format!("width must be >= 0, got {} ueV", fwhm.uev())));
    }
    Energy::from_uev(0.5 * fwhm.uev())
}

/// Two-level emitter line parameters.
///
/// `gamma0_hwhm` is the amplitude-Lorentzian half-width of the transition in µeV; `r0`
/// the peak reflectivity contributed by the transition; `rabi_ghz` the drive Rabi
/// frequency as a cyclic frequency in GHz; `beta` the emission fraction funneled into
/// the cavity mode (informational for the steady-state layer, used by coupling guesses).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    pub gamma0_hwhm: Energy,
    pub r0: f64,
    pub rabi_ghz: f64,
    pub beta: f64,
}

impl EmitterParams {
    pub fn new(gamma0_hwhm: Energy, r0: f64, rabi_ghz: f64, beta: f64) -> Result<Self, Error> {
        if gamma0_hwhm.uev() <= 0.0 {
            return Err(Error::invalid(format!(
                "emitter half-width must be > 0, got {} ueV",
                gamma0_hwhm.uev()
            )));
        }
        if !(0.0..=1.0).contains(&r0) || !r0.is_finite() {
            return Err(Error::invalid(format!("r0 must lie in [0, 1], got {r0}")));
        }
        if !rabi_ghz.is_finite() || rabi_ghz < 0.0 {
            return Err(Error::invalid(format!("rabi_ghz must be >= 0, got {rabi_ghz}")));
        }
        if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta must lie in [0, 1], got {beta}")));
        }
        Ok(EmitterParams { gamma0_hwhm, r0, rabi_ghz, beta })
    }

    /// Population decay rate Γ = 2·Γ₀/ħ in ns⁻¹ (angular).
    pub fn gamma_decay(&self) -> f64 {
        2.0 * self.gamma0_hwhm.uev() / HBAR_UEV_NS
    }

    /// Angular Rabi rate Ω = 2π·rabi_ghz in ns⁻¹.
    pub fn omega_angular(&self) -> f64 {
        std::f64::consts::TAU * self.rabi_ghz
    }
}

/// Cavity reflection model: a background level carrying a Lorentzian dip and a global
/// reflection phase.
///
/// R_cavity(Δ) = r_background · (1 − dip_depth · L(Δ − center)) with L a unit-peak
/// Lorentzian of FWHM `kappa_fwhm`. The reflected amplitude is √R_cavity·e^{i·phase_offset};
/// `phase_offset` absorbs the dispersive phase of the cavity response, which the intensity
/// spectrum alone cannot pin down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityModel {
    pub r_background: f64,
    pub dip_depth: f64,
    pub center: Energy,
    pub kappa_fwhm: Energy,
    pub phase_offset: f64,
}

impl CavityModel {
    pub fn new(
        r_background: f64,
        dip_depth: f64,
        center: Energy,
        kappa_fwhm: Energy,
        phase_offset: f64,
    ) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&r_background) || !r_background.is_finite() {
            return Err(Error::invalid(format!("r_background must lie in [0, 1], got {r_background}")));
        }
        // dip_depth > 1 would drive R_cavity negative at the dip center.
        if !(0.0..=1.0).contains(&dip_depth) || !dip_depth.is_finite() {
            return Err(Error::invalid(format!("dip_depth must lie in [0, 1], got {dip_depth}")));
        }
        if kappa_fwhm.uev() <= 0.0 {
            return Err(Error::invalid(format!("kappa_fwhm must be > 0, got {} ueV", kappa_fwhm.uev())));
        }
        if !phase_offset.is_finite() {
            return Err(Error::invalid(format!("phase_offset must be finite, got {phase_offset}")));
        }
        Ok(CavityModel { r_background, dip_depth, center, kappa_fwhm, phase_offset })
    }

    /// Cavity intensity reflectivity at detuning Δ. Lies in [0, r_background] by
    /// construction of the parameter domain.
    pub fn reflectivity(&self, delta: Energy) -> f64 {
        let half_kappa = 0.5 * self.kappa_fwhm.uev();
        let x = delta.uev() - self.center.uev();
        let lorentz = half_kappa * half_kappa / (x * x + half_kappa * half_kappa);
        self.r_background * (1.0 - self.dip_depth * lorentz)
    }
}
