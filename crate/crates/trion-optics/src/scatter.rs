//! Steady-state reflection of a weakly driven emitter-cavity system.
//!
//! The reflected amplitude is the coherent sum of two channels,
//!
//! ```text
//! E_total(Δ) = sqrt(R_cavity(Δ)) · e^{i·phase} + Γ₀ · sqrt(R₀) / (Δ + i·Γ₀),
//! ```
//!
//! a slowly varying cavity background and the emitter's resonant Rayleigh amplitude, a
//! complex Lorentzian of half-width Γ₀. Their interference produces the dispersive
//! enhancement/suppression pattern of the reflectivity when the transition is active
//! (dot charged) versus inactive (dot empty).
//!
//! The intensity spectrum alone does not fix the decomposition: a given
//! enhancement/suppression pair is reproduced by two distinct (background, phase)
//! solutions. [`fit_modulation`] therefore filters candidates by which detuning side
//! carries the enhancement and, among equal-residual solutions, deterministically
//! prefers the largest cavity background (the weakest-emitter reading of the same
//! spectrum, and the branch consistent with the observed photon statistics).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::units::{CavityModel, EmitterParams, Energy};
use crate::Error;

/// Reflected amplitude contributed by the emitter at detuning Δ (energy domain, µeV).
pub fn emitter_field(delta: Energy, p: &EmitterParams) -> Complex64 {
    let g0 = p.gamma0_hwhm.uev();
    let num = g0 * p.r0.sqrt();
    num / Complex64::new(delta.uev(), g0)
}

/// Reflected amplitude of the bare cavity at detuning Δ.
pub fn cavity_field(delta: Energy, c: &CavityModel) -> Complex64 {
    Complex64::from_polar(c.reflectivity(delta).sqrt(), c.phase_offset)
}

/// Total reflectivity |E_total|² with the transition active, or |E_cavity|² with it
/// inactive (empty dot).
pub fn total_reflectivity(delta: Energy, p: &EmitterParams, c: &CavityModel, active: bool) -> f64 {
    let field = if active {
        cavity_field(delta, c) + emitter_field(delta, p)
    } else {
        cavity_field(delta, c)
    };
    field.norm_sqr()
}

/// A real-valued quantity sampled on a strictly increasing detuning grid (µeV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    detunings_uev: Vec<f64>,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(detunings_uev: Vec<f64>, values: Vec<f64>) -> Result<Self, Error> {
        if detunings_uev.is_empty() {
            return Err(Error::grid("detuning grid is empty"));
        }
        if detunings_uev.len() != values.len() {
            return Err(Error::grid(format!(
                "{} detunings vs {} values",
                detunings_uev.len(),
                values.len()
            )));
        }
        if detunings_uev.iter().any(|d| !d.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::grid("spectrum contains non-finite entries"));
        }
        if detunings_uev.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::grid("detuning grid must be strictly increasing"));
        }
        Ok(Spectrum { detunings_uev, values })
    }

    pub fn detunings_uev(&self) -> &[f64] {
        &self.detunings_uev
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evenly spaced detuning grid in µeV.
pub fn detuning_grid(min_uev: f64, max_uev: f64, points: usize) -> Result<Vec<f64>, Error> {
    if !(min_uev.is_finite() && max_uev.is_finite()) || min_uev >= max_uev {
        return Err(Error::grid(format!("bad detuning range [{min_uev}, {max_uev}]")));
    }
    if points < 2 {
        return Err(Error::grid("detuning grid needs at least 2 points"));
    }
    let step = (max_uev - min_uev) / (points - 1) as f64;
    Ok((0..points).map(|i| min_uev + step * i as f64).collect())
}

/// Reflectivity swept over a detuning grid.
pub fn reflectivity_spectrum(
    grid_uev: &[f64],
    p: &EmitterParams,
    c: &CavityModel,
    active: bool,
) -> Result<Spectrum, Error> {
    let values = grid_uev
        .iter()
        .map(|&d| Energy::from_uev(d).map(|e| total_reflectivity(e, p, c, active)))
        .collect::<Result<Vec<_>, _>>()?;
    Spectrum::new(grid_uev.to_vec(), values)
}

/// Real and imaginary parts of the emitter amplitude over a grid. The real part is odd
/// in Δ (dispersive), the imaginary part even and single-signed (absorptive).
pub fn response_components(
    grid_uev: &[f64],
    p: &EmitterParams,
) -> Result<(Spectrum, Spectrum), Error> {
    if grid_uev.is_empty() {
        return Err(Error::grid("detuning grid is empty"));
    }
    let mut re = Vec::with_capacity(grid_uev.len());
    let mut im = Vec::with_capacity(grid_uev.len());
    for &d in grid_uev {
        let f = emitter_field(Energy::from_uev(d)?, p);
        re.push(f.re);
        im.push(f.im);
    }
    Ok((Spectrum::new(grid_uev.to_vec(), re)?, Spectrum::new(grid_uev.to_vec(), im)?))
}

/// Charging-induced modulation of the reflectivity, in percent.
///
/// enhancement = 100·max(active/inactive − 1), suppression = 100·max(1 − active/inactive),
/// both clamped at 0; total is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationMetrics {
    pub enhancement_pct: f64,
    pub suppression_pct: f64,
    pub total_pct: f64,
    /// Detunings (µeV) where the extremes occur.
    pub enhancement_at_uev: f64,
    pub suppression_at_uev: f64,
}

/// Modulation extracted from an active/inactive spectrum pair.
///
/// Points where the inactive reflectivity is exactly zero cannot form a ratio and are
/// excluded; their indices are returned alongside. All points excluded is an error.
pub fn modulation_metrics(
    active: &Spectrum,
    inactive: &Spectrum,
) -> Result<(ModulationMetrics, Vec<usize>), Error> {
    if active.len() != inactive.len() || active.detunings_uev() != inactive.detunings_uev() {
        return Err(Error::grid("active and inactive spectra must share one grid"));
    }
    let mut excluded = Vec::new();
    let mut best_enh = 0.0f64;
    let mut best_sup = 0.0f64;
    let mut at_enh = active.detunings_uev()[0];
    let mut at_sup = active.detunings_uev()[0];
    for (i, ((&a, &b), &d)) in active
        .values()
        .iter()
        .zip(inactive.values())
        .zip(active.detunings_uev())
        .enumerate()
    {
        if b == 0.0 {
            excluded.push(i);
            continue;
        }
        let ratio = a / b;
        if ratio - 1.0 > best_enh {
            best_enh = ratio - 1.0;
            at_enh = d;
        }
        if 1.0 - ratio > best_sup {
            best_sup = 1.0 - ratio;
            at_sup = d;
        }
    }
    if excluded.len() == active.len() {
        return Err(Error::grid("inactive spectrum is zero everywhere; modulation undefined"));
    }
    Ok((
        ModulationMetrics {
            enhancement_pct: 100.0 * best_enh,
            suppression_pct: 100.0 * best_sup,
            total_pct: 100.0 * (best_enh + best_sup),
            enhancement_at_uev: at_enh,
            suppression_at_uev: at_sup,
        },
        excluded,
    ))
}

/// Target modulation for [`fit_modulation`], in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationTargets {
    pub enhancement_pct: f64,
    pub suppression_pct: f64,
    pub total_pct: f64,
}

/// Which detuning side carries the reflectivity enhancement. The intensity spectrum is
/// symmetric under simultaneous mirror of detuning and phase, so the side is a
/// convention choice exposed to the caller rather than hard-coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnhancementSide {
    Negative,
    Positive,
}

/// Enhancement/suppression extremes of the flat-background interference model, from the
/// stationary points of f(x) = (a·x + b)/(x² + 1), x = Δ/Γ₀, a = 2s·cosφ,
/// b = s² − 2s·sinφ, s² = R₀/r_background. Returns (enh, sup, x_enh, x_sup) as ratios.
fn flat_model_extremes(s: f64, phase: f64) -> (f64, f64, f64, f64) {
    let a = 2.0 * s * phase.cos();
    let b = s * s - 2.0 * s * phase.sin();
    if a.abs() < 1e-14 {
        // Pure even response: a single extremum at Δ = 0.
        return if b >= 0.0 { (b, 0.0, 0.0, f64::INFINITY) } else { (0.0, -b, f64::INFINITY, 0.0) };
    }
    let u = b / a;
    let w = (u * u + 1.0).sqrt();
    let x_plus = -u + w;
    let x_minus = -u - w;
    let f_plus = a / (2.0 * (w - u));
    let f_minus = -a / (2.0 * (w + u));
    if a > 0.0 {
        (f_plus, -f_minus, x_plus, x_minus)
    } else {
        (f_minus, -f_plus, x_minus, x_plus)
    }
}

fn modulation_residual(s: f64, phase: f64, t: &ModulationTargets) -> f64 {
    let (enh, sup, _, _) = flat_model_extremes(s, phase);
    let m = [100.0 * enh, 100.0 * sup, 100.0 * (enh + sup)];
    let tg = [t.enhancement_pct, t.suppression_pct, t.total_pct];
    let mut sq = 0.0;
    let mut n = 0usize;
    for (mi, ti) in m.iter().zip(tg) {
        if ti != 0.0 {
            let r = (mi - ti) / ti;
            sq += r * r;
            n += 1;
        }
    }
    (sq / n as f64).sqrt()
}

/// Maximum acceptable rms relative residual for [`fit_modulation`].
pub const MODULATION_FIT_TOLERANCE: f64 = 1e-2;

/// Calibrate a flat cavity background (level and phase) so the active/inactive
/// modulation reproduces the targets.
///
/// Deterministic: a coarse (r_background, phase) grid scan followed by shrinking
/// pattern-search refinement of the side-consistent candidates. Among candidates of
/// equal residual the largest background wins (see module docs). The returned model has
/// `dip_depth = 0`; the dip parameters are inert placeholders.
///
/// Errors: all-zero targets are under-determined; targets that no background reproduces
/// (e.g. suppression ≥ 100 %) report the best residual found.
pub fn fit_modulation(
    targets: &ModulationTargets,
    emitter: &EmitterParams,
    side: EnhancementSide,
) -> Result<CavityModel, Error> {
    for v in [targets.enhancement_pct, targets.suppression_pct, targets.total_pct] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(format!("modulation targets must be finite and >= 0, got {v}")));
        }
    }
    if targets.enhancement_pct == 0.0 && targets.suppression_pct == 0.0 && targets.total_pct == 0.0
    {
        return Err(Error::UnderDetermined(
            "all-zero modulation targets: any dark emitter fits; background level unconstrained"
                .into(),
        ));
    }
    if emitter.r0 == 0.0 {
        return Err(Error::UnderDetermined(
            "r0 = 0: the transition contributes no amplitude; modulation targets unreachable"
                .into(),
        ));
    }

    let side_ok = |phase: f64| match side {
        // Enhancement sits at negative detuning exactly when a = 2s·cosφ < 0.
        EnhancementSide::Negative => phase.cos() < 0.0,
        EnhancementSide::Positive => phase.cos() > 0.0,
    };

    const R_MIN: f64 = 1e-3;
    // Coarse scan.
    let mut candidates: Vec<(f64, f64, f64)> = Vec::new(); // (residual, r_bg, phase)
    for ir in 0..=60 {
        let r_bg = R_MIN + (1.0 - R_MIN) * ir as f64 / 60.0;
        let s = (emitter.r0 / r_bg).sqrt();
        for ip in 0..96 {
            let phase = -std::f64::consts::PI + std::f64::consts::TAU * ip as f64 / 96.0;
            if !side_ok(phase) {
                continue;
            }
            candidates.push((modulation_residual(s, phase, targets), r_bg, phase));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    candidates.truncate(12);

    // Shrinking 5x5 pattern refinement of each surviving candidate.
    let mut refined: Vec<(f64, f64, f64)> = Vec::new();
    for &(_, r0c, p0c) in &candidates {
        let (mut r_c, mut p_c) = (r0c, p0c);
        let mut span_r = 0.03;
        let mut span_p = 0.12;
        let mut best = f64::INFINITY;
        for _ in 0..48 {
            for dr in -2..=2 {
                for dp in -2..=2 {
                    let r_try = (r_c + span_r * dr as f64 / 2.0).clamp(R_MIN, 1.0);
                    let p_try = p_c + span_p * dp as f64 / 2.0;
                    if !side_ok(p_try) {
                        continue;
                    }
                    let res = modulation_residual((emitter.r0 / r_try).sqrt(), p_try, targets);
                    if res < best {
                        best = res;
                        r_c = r_try;
                        p_c = p_try;
                    }
                }
            }
            span_r *= 0.55;
            span_p *= 0.55;
        }
        refined.push((best, r_c, p_c));
    }

    let best_res = refined.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    // Equal-residual tie-break: largest background.
    let mut winner = refined
        .into_iter()
        .filter(|c| c.0 <= best_res + 1e-9)
        .collect::<Vec<_>>();
    winner.sort_by(|x, y| y.1.total_cmp(&x.1));
    let (residual, r_bg, mut phase) = winner[0];

    if residual > MODULATION_FIT_TOLERANCE {
        return Err(Error::Unfittable { residual, threshold: MODULATION_FIT_TOLERANCE });
    }
    // Canonical phase in (-pi, pi].
    if phase <= -std::f64::consts::PI {
        phase += std::f64::consts::TAU;
    } else if phase > std::f64::consts::PI {
        phase -= std::f64::consts::TAU;
    }
    CavityModel::new(
        r_bg,
        0.0,
        Energy::from_uev(0.0)?,
        Energy::from_uev(40.0)?,
        phase,
    )
}
