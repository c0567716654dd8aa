//! Charge and spin telegraph of the emitter and the polarization sorting it imprints
//! on the scattered light.
//!
//! The resident carrier appears and disappears on microsecond scales (probabilistic
//! charging by the non-resonant laser), and while present its spin points in a random
//! direction with no preferred axis. Circular selection rules tie the helicity of the
//! resonantly scattered photons to that spin: with the spin at polar angle θ to the
//! optical axis, a scattered photon is left-circular with probability (1 + cos θ)/2.
//! Detection is treated as back-action-free, so the spin direction is an ensemble
//! variable that only re-randomizes on charging and spin-flip events.
//!
//! Two photons scattered within one orientation epoch share a helicity bias and are
//! correlated; photons from different epochs are not. Averaging u = cos θ over the
//! sphere gives the same-tag pair probability
//!
//! ```text
//! ∫ [((1+u)/2)² + ((1−u)/2)²] du/2 = ⟨(1 + u²)/2⟩ = 2/3,
//! ```
//!
//! hence a degree of polarization correlation (same − cross)/(same + cross) of exactly
//! 1/3 at zero delay, decaying with the orientation reset rate. The same telegraph,
//! viewed without polarization analysis, bunches the total intensity: the light is
//! brighter while charged, so coincidences pile up at delays shorter than the charge
//! correlation time.
//!
//! Everything here is a counting model in detected rates (clicks per ns); the fast
//! emitter dynamics lives in the Bloch and trajectory modules and factorizes from
//! these slow envelopes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::G2Curve;
use crate::trajectory::{ClickStream, GateParams, PolTag};
use crate::Error;

/// Rates of the charge/spin telegraph and the two detected click channels.
/// All rates are per ns; `rrs_rate` flows only while charged, `bg_rate` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeSpinParams {
    /// empty → charged, per ns.
    pub r_charge: f64,
    /// charged → empty, per ns.
    pub r_discharge: f64,
    /// orientation re-randomization while charged, per ns.
    pub r_spinflip: f64,
    /// detected resonance-scattering click rate while charged, per ns.
    pub rrs_rate: f64,
    /// detected unpolarized background click rate, per ns.
    pub bg_rate: f64,
}

impl ChargeSpinParams {
    pub fn new(
        r_charge: f64,
        r_discharge: f64,
        r_spinflip: f64,
        rrs_rate: f64,
        bg_rate: f64,
    ) -> Result<Self, Error> {
        let all = [r_charge, r_discharge, r_spinflip, rrs_rate, bg_rate];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid(format!("rates must be finite and >= 0, got {all:?}")));
        }
        if r_charge + r_discharge <= 0.0 {
            return Err(Error::invalid("r_charge + r_discharge must be > 0"));
        }
        Ok(ChargeSpinParams { r_charge, r_discharge, r_spinflip, rrs_rate, bg_rate })
    }

    /// Stationary charged-state probability r_c/(r_c + r_d).
    pub fn p_charged(&self) -> f64 {
        self.r_charge / (self.r_charge + self.r_discharge)
    }

    /// Orientation reset rate while charged: spin flips plus charge loss.
    pub fn r_reset(&self) -> f64 {
        self.r_spinflip + self.r_discharge
    }

    pub(crate) fn gate(&self) -> Result<GateParams, Error> {
        GateParams::new(self.r_charge, self.r_discharge)
    }
}

/// Spin direction as a point on the unit sphere, stored as (cos θ, φ). Both angles are
/// drawn uniformly on the sphere; only cos θ (the projection on the optical axis)
/// enters the helicity branching, φ is carried for completeness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinOrientation {
    cos_theta: f64,
    phi: f64,
}

impl SpinOrientation {
    pub fn new(cos_theta: f64, phi: f64) -> Result<Self, Error> {
        if !(cos_theta.is_finite() && (-1.0..=1.0).contains(&cos_theta)) {
            return Err(Error::invalid(format!("cos_theta must be in [-1, 1], got {cos_theta}")));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("phi must be finite"));
        }
        Ok(SpinOrientation { cos_theta, phi })
    }

    /// Uniform draw on the sphere: cos θ ~ U[−1, 1], φ ~ U[0, 2π).
    pub fn random(rng: &mut impl Rng) -> Self {
        SpinOrientation {
            cos_theta: rng.gen::<f64>() * 2.0 - 1.0,
            phi: rng.gen::<f64>() * std::f64::consts::TAU,
        }
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Probability a scattered photon is tagged left-circular: (1 + cos θ)/2.
    pub fn p_left(&self) -> f64 {
        0.5 * (1.0 + self.cos_theta)
    }
}

/// One constant-state stretch of the telegraph; `orientation` is None while empty.
/// Consecutive charged segments separated by a spin flip carry fresh orientations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeSegment {
    pub t_start_ns: f64,
    pub t_end_ns: f64,
    pub orientation: Option<SpinOrientation>,
}

/// Piecewise-constant trajectory of the charge/spin Markov chain on [0, duration].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeTrajectory {
    segments: Vec<ChargeSegment>,
    duration_ns: f64,
    seed: u64,
}

impl ChargeTrajectory {
    pub fn segments(&self) -> &[ChargeSegment] {
        &self.segments
    }

    pub fn duration_ns(&self) -> f64 {
        self.duration_ns
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fraction of the duration spent charged.
    pub fn charged_fraction(&self) -> f64 {
        let on: f64 = self
            .segments
            .iter()
            .filter(|s| s.orientation.is_some())
            .map(|s| s.t_end_ns - s.t_start_ns)
            .sum();
        on / self.duration_ns
    }
}

/// Exact continuous-time simulation of the chain over {empty, charged(orientation)}.
/// The initial charge state is a stationary draw (exponential dwells are memoryless,
/// so no burn-in is needed); every charging and spin-flip event draws a fresh uniform
/// orientation.
pub fn gillespie_charge_spin(
    p: &ChargeSpinParams,
    duration_ns: f64,
    seed: u64,
) -> Result<ChargeTrajectory, Error> {
    gillespie_core(p, duration_ns, seed, 0)
}

fn gillespie_core(
    p: &ChargeSpinParams,
    duration_ns: f64,
    seed: u64,
    stream: u64,
) -> Result<ChargeTrajectory, Error> {
    if !(duration_ns.is_finite() && duration_ns > 0.0) {
        return Err(Error::invalid(format!("duration must be > 0, got {duration_ns}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut segments = Vec::new();
    let mut t = 0.0;
    let mut charged = rng.gen::<f64>() < p.p_charged();
    let mut orientation = SpinOrientation::random(&mut rng);
    while t < duration_ns {
        let rate_out = if charged { p.r_discharge + p.r_spinflip } else { p.r_charge };
        let t_next = if rate_out > 0.0 {
            t + -(1.0 - rng.gen::<f64>()).ln() / rate_out
        } else {
            f64::INFINITY
        };
        let t_end = t_next.min(duration_ns);
        segments.push(ChargeSegment {
            t_start_ns: t,
            t_end_ns: t_end,
            orientation: charged.then_some(orientation),
        });
        if t_next >= duration_ns {
            break;
        }
        if charged {
            // Which hazard fired: discharge or spin flip.
            let flip = rng.gen::<f64>() * (p.r_discharge + p.r_spinflip) < p.r_spinflip;
            if !flip {
                charged = false;
            }
            orientation = SpinOrientation::random(&mut rng);
        } else {
            charged = true;
            orientation = SpinOrientation::random(&mut rng);
        }
        t = t_next;
    }
    Ok(ChargeTrajectory { segments, duration_ns, seed })
}

/// Polarization-tagged Poisson clicks of a trajectory: `rrs_rate` clicks while charged,
/// tagged left with probability (1 + cos θ)/2 from the segment's orientation, plus
/// always-on unpolarized `bg_rate` clicks with fair-coin tags. Detection does not act
/// back on the orientation. The emission RNG is independent of the trajectory RNG, so
/// the same trajectory can be re-emitted under a different seed.
pub fn emit_polarized_clicks(
    traj: &ChargeTrajectory,
    p: &ChargeSpinParams,
    seed: u64,
) -> Result<ClickStream, Error> {
    emit_core(traj, p, seed, 1)
}

fn emit_core(
    traj: &ChargeTrajectory,
    p: &ChargeSpinParams,
    seed: u64,
    stream: u64,
) -> Result<ClickStream, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let expect = (p.rrs_rate * traj.charged_fraction() + p.bg_rate) * traj.duration_ns();
    let mut clicks: Vec<(f64, PolTag)> = Vec::with_capacity(expect as usize + 16);
    if p.rrs_rate > 0.0 {
        for seg in traj.segments() {
            let Some(orientation) = seg.orientation else { continue };
            let p_left = orientation.p_left();
            let mut t = seg.t_start_ns;
            loop {
                t += -(1.0 - rng.gen::<f64>()).ln() / p.rrs_rate;
                if t >= seg.t_end_ns {
                    break;
                }
                let tag = if rng.gen::<f64>() < p_left { PolTag::Left } else { PolTag::Right };
                clicks.push((t, tag));
            }
        }
    }
    if p.bg_rate > 0.0 {
        let mut t = 0.0;
        loop {
            t += -(1.0 - rng.gen::<f64>()).ln() / p.bg_rate;
            if t >= traj.duration_ns() {
                break;
            }
            let tag = if rng.gen::<f64>() < 0.5 { PolTag::Left } else { PolTag::Right };
            clicks.push((t, tag));
        }
    }
    clicks.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Exact collisions have measure zero but would violate strict ordering; nudge up.
    for i in 1..clicks.len() {
        if clicks[i].0 <= clicks[i - 1].0 {
            clicks[i].0 = clicks[i - 1].0 * (1.0 + 1e-15) + 1e-300;
        }
    }
    let (times, tags): (Vec<f64>, Vec<PolTag>) = clicks.into_iter().unzip();
    ClickStream::new(times, Some(tags), traj.duration_ns(), seed)
}

/// Coincidences of a tagged stream split by tag agreement; bin k covers
/// (k·Δτ, (k+1)·Δτ] as in the plain coincidence histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolCorrResult {
    bin_width_ns: f64,
    n_same: Vec<u64>,
    n_cross: Vec<u64>,
}

impl PolCorrResult {
    pub fn bin_width_ns(&self) -> f64 {
        self.bin_width_ns
    }

    pub fn n_same(&self) -> &[u64] {
        &self.n_same
    }

    pub fn n_cross(&self) -> &[u64] {
        &self.n_cross
    }

    pub fn len(&self) -> usize {
        self.n_same.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_same.is_empty()
    }

    /// Delay at the center of bin k.
    pub fn tau_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.bin_width_ns
    }

    /// Degree of polarization correlation per bin, (same − cross)/(same + cross);
    /// NaN marks bins with no pairs.
    pub fn degree(&self) -> Vec<f64> {
        self.n_same
            .iter()
            .zip(&self.n_cross)
            .map(|(&s, &x)| {
                let tot = s + x;
                if tot == 0 {
                    f64::NAN
                } else {
                    (s as f64 - x as f64) / tot as f64
                }
            })
            .collect()
    }

    /// Merge results from independent streams by summing counts.
    pub fn merge(mut parts: Vec<PolCorrResult>) -> Result<PolCorrResult, Error> {
        let first = parts.pop().ok_or_else(|| Error::invalid("nothing to merge"))?;
        let mut n_same = first.n_same;
        let mut n_cross = first.n_cross;
        for p in parts {
            if p.bin_width_ns != first.bin_width_ns || p.n_same.len() != n_same.len() {
                return Err(Error::grid("correlation shapes differ, cannot merge"));
            }
            for (a, b) in n_same.iter_mut().zip(&p.n_same) {
                *a += b;
            }
            for (a, b) in n_cross.iter_mut().zip(&p.n_cross) {
                *a += b;
            }
        }
        Ok(PolCorrResult { bin_width_ns: first.bin_width_ns, n_same, n_cross })
    }
}

/// Pair counting as in the coincidence histogram, split by tag agreement.
pub fn pol_correlation(
    s: &ClickStream,
    bin_width_ns: f64,
    tau_max_ns: f64,
) -> Result<PolCorrResult, Error> {
    if s.is_empty() {
        return Err(Error::invalid("empty click stream"));
    }
    let Some(tags) = s.tags() else {
        return Err(Error::invalid("polarization correlation requires a tagged stream"));
    };
    if !(bin_width_ns.is_finite() && bin_width_ns > 0.0) {
        return Err(Error::grid(format!("bin width must be > 0, got {bin_width_ns}")));
    }
    let n_bins_f = tau_max_ns / bin_width_ns;
    let n_bins = n_bins_f.round() as usize;
    if n_bins == 0 || (n_bins_f - n_bins as f64).abs() > 1e-9 * n_bins_f.max(1.0) {
        return Err(Error::grid(format!(
            "tau_max {tau_max_ns} must be a positive multiple of bin width {bin_width_ns}"
        )));
    }
    let tau_max = n_bins as f64 * bin_width_ns;
    let times = s.times_ns();
    let mut n_same = vec![0u64; n_bins];
    let mut n_cross = vec![0u64; n_bins];
    for i in 0..times.len() {
        for j in (i + 1)..times.len() {
            let dt = times[j] - times[i];
            if dt > tau_max {
                break;
            }
            let k = ((dt / bin_width_ns).ceil() as usize - 1).min(n_bins - 1);
            if tags[i] == tags[j] {
                n_same[k] += 1;
            } else {
                n_cross[k] += 1;
            }
        }
    }
    Ok(PolCorrResult { bin_width_ns, n_same, n_cross })
}

/// Sharded polarization-correlation run: per shard, trajectory and emission draw from
/// RNG streams (2·shard, 2·shard + 1) of the same seed, so shard 0 reproduces the
/// plain `gillespie_charge_spin` + `emit_polarized_clicks` pipeline and the merged
/// counts are scheduling-independent.
pub fn pol_correlation_sharded(
    p: &ChargeSpinParams,
    duration_ns: f64,
    seed: u64,
    shards: usize,
    bin_width_ns: f64,
    tau_max_ns: f64,
) -> Result<(PolCorrResult, u64), Error> {
    if shards == 0 {
        return Err(Error::invalid("at least one shard required"));
    }
    let results: Vec<(PolCorrResult, u64)> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let traj = gillespie_core(p, duration_ns, seed, 2 * shard as u64)?;
            let s = emit_core(&traj, p, seed, 2 * shard as u64 + 1)?;
            let r = pol_correlation(&s, bin_width_ns, tau_max_ns)?;
            Ok((r, s.len() as u64))
        })
        .collect::<Result<_, Error>>()?;
    let total: u64 = results.iter().map(|r| r.1).sum();
    let merged = PolCorrResult::merge(results.into_iter().map(|r| r.0).collect())?;
    Ok((merged, total))
}

/// Exact degree of polarization correlation of the counting model at delay τ.
///
/// Pairs contribute (same − cross) = u₁u₂ for two scattering clicks and 0 whenever a
/// background click is involved. Orientations decorrelate at the first reset event
/// (spin flip or discharge, combined hazard r_reset while charged) and ⟨u²⟩ = 1/3 on
/// the sphere, so the pair-rate densities are
///
/// ```text
/// same − cross = (1/3) rrs² p e^(−r_reset τ)
/// same + cross = bg² + 2 bg rrs p + rrs² p (p + q e^(−(r_c + r_d) τ)),   q = 1 − p
/// ```
///
/// with p the stationary charged probability. The ratio reduces to the familiar
/// (1/3)·e^(−r_reset·τ) when the background vanishes and the charge telegraph is slow
/// or fully on (q e^(−(r_c+r_d)τ) ≈ q); the zero-delay value is exactly 1/3 for
/// bg = 0 at any duty cycle because p(p + q) = p.
pub fn analytic_degree(p: &ChargeSpinParams, tau_ns: f64) -> f64 {
    let pc = p.p_charged();
    let q = 1.0 - pc;
    let rrs = p.rrs_rate;
    let bg = p.bg_rate;
    let numer = (1.0 / 3.0) * rrs * rrs * pc * (-p.r_reset() * tau_ns).exp();
    let denom = bg * bg
        + 2.0 * bg * rrs * pc
        + rrs * rrs * pc * (pc + q * (-(p.r_charge + p.r_discharge) * tau_ns).exp());
    if denom <= 0.0 {
        return f64::NAN;
    }
    numer / denom
}

/// Closed-form intensity autocorrelation of the bare charge telegraph, valid when the
/// empty state emits nothing (bg_rate = 0):
///
/// ```text
/// g²(τ) = 1 + (q/p)·e^(−(r_c + r_d)τ),   p = r_c/(r_c + r_d), q = 1 − p.
/// ```
///
/// This is the long-delay bunching envelope of the blinking emitter; a nonzero
/// unpolarized background dilutes it (see [`telegraph_bunching`]).
pub fn blinking_g2(p: &ChargeSpinParams, taus_ns: &[f64]) -> Result<G2Curve, Error> {
    let pc = p.p_charged();
    if pc <= 0.0 {
        return Err(Error::invalid("blinking g2 requires r_charge > 0"));
    }
    let q = 1.0 - pc;
    let rate = p.r_charge + p.r_discharge;
    let values = taus_ns
        .iter()
        .map(|&tau| 1.0 + q / pc * (-rate * tau).exp())
        .collect::<Vec<_>>();
    G2Curve::new(taus_ns.to_vec(), values)
}

/// Telegraph bunching with distinct on/off detected intensities:
///
/// ```text
/// g²(τ) = 1 + p q (I_on − I_off)² / ⟨I⟩² · e^(−(r_c + r_d)τ),  ⟨I⟩ = p I_on + q I_off.
/// ```
///
/// Reduces to [`blinking_g2`] at I_off = 0 and to 1 at I_on = I_off. This is the
/// long-delay envelope of the gated quantum-jump streams, where I_on is the charged
/// steady detected intensity and I_off the bare background intensity.
pub fn telegraph_bunching(
    i_on: f64,
    i_off: f64,
    gate: &GateParams,
    taus_ns: &[f64],
) -> Result<G2Curve, Error> {
    if !(i_on.is_finite() && i_off.is_finite() && i_on >= 0.0 && i_off >= 0.0) {
        return Err(Error::invalid(format!("intensities must be >= 0, got ({i_on}, {i_off})")));
    }
    let p = gate.p_charged();
    let q = 1.0 - p;
    let mean = p * i_on + q * i_off;
    if mean <= 0.0 {
        return Err(Error::DarkField);
    }
    let amp = p * q * (i_on - i_off) * (i_on - i_off) / (mean * mean);
    let rate = gate.r_charge + gate.r_discharge;
    let values = taus_ns.iter().map(|&tau| 1.0 + amp * (-rate * tau).exp()).collect::<Vec<_>>();
    G2Curve::new(taus_ns.to_vec(), values)
}

/// Weighted least-squares fit of A·e^(−τ/T) with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub amplitude: f64,
    pub timescale_ns: f64,
    pub amplitude_stderr: f64,
    pub timescale_stderr: f64,
    /// Set when the data does not constrain a decay (stderr ≥ T, non-positive T, or
    /// a degenerate fit).
    pub unreliable: bool,
}

/// Fit A·e^(−τ/T) to the per-bin degree of a correlation result. Bins without pairs
/// are skipped; binomial errors σ² = (1 − d² + 1/n)/n weight the occupied bins.
pub fn fit_exponential(r: &PolCorrResult) -> Result<ExpFit, Error> {
    let mut taus = Vec::new();
    let mut values = Vec::new();
    let mut sigmas = Vec::new();
    let degree = r.degree();
    for (k, d) in degree.iter().enumerate() {
        let n = (r.n_same[k] + r.n_cross[k]) as f64;
        if n == 0.0 {
            continue;
        }
        taus.push(r.tau_center(k));
        values.push(*d);
        sigmas.push(((1.0 - d * d + 1.0 / n) / n).sqrt());
    }
    fit_exponential_points(&taus, &values, &sigmas)
}

/// Core decaying-exponential fit on explicit points, Gauss-Newton with a log-linear
/// start. Deterministic; exact data is recovered to machine precision.
pub fn fit_exponential_points(
    taus: &[f64],
    values: &[f64],
    sigmas: &[f64],
) -> Result<ExpFit, Error> {
    if taus.len() != values.len() || taus.len() != sigmas.len() {
        return Err(Error::invalid("mismatched fit input lengths"));
    }
    if taus.len() < 5 {
        return Err(Error::UnderDetermined("exponential fit needs at least 5 occupied bins".into()));
    }
    if sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("fit weights must be finite and positive"));
    }
    if taus.iter().any(|t| !t.is_finite()) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit data must be finite"));
    }

    // Log-linear start over bins with positive values; fall back to a crude scale
    // guess when the data never goes positive.
    let span = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - taus.iter().cloned().fold(f64::INFINITY, f64::min);
    let (mut a, mut k) = log_linear_seed(taus, values).unwrap_or_else(|| {
        let peak = values.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        (peak, 1.0 / span.max(1e-9))
    });

    // Gauss-Newton with Levenberg damping on chi² = Σ ((A e^{−kτ} − v)/σ)².
    let chi2 = |a: f64, k: f64| -> f64 {
        taus.iter()
            .zip(values)
            .zip(sigmas)
            .map(|((t, v), s)| {
                let r = (a * (-k * t).exp() - v) / s;
                r * r
            })
            .sum()
    };
    let mut lambda = 1e-3;
    let mut best = chi2(a, k);
    for _ in 0..400 {
        // Normal equations for parameters (A, k).
        let (mut h00, mut h01, mut h11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((t, v), s) in taus.iter().zip(values).zip(sigmas) {
            let e = (-k * t).exp();
            let m = a * e;
            let r = (m - v) / s;
            let j0 = e / s;
            let j1 = -a * t * e / s;
            h00 += j0 * j0;
            h01 += j0 * j1;
            h11 += j1 * j1;
            g0 += j0 * r;
            g1 += j1 * r;
        }
        let d00 = h00 * (1.0 + lambda);
        let d11 = h11 * (1.0 + lambda);
        let det = d00 * d11 - h01 * h01;
        if det.abs() < 1e-300 || !det.is_finite() {
            break;
        }
        let da = -(d11 * g0 - h01 * g1) / det;
        let dk = -(d00 * g1 - h01 * g0) / det;
        let (na, nk) = (a + da, k + dk);
        let trial = chi2(na, nk);
        if trial.is_finite() && trial < best {
            let rel = (best - trial) / best.max(1e-300);
            a = na;
            k = nk;
            best = trial;
            lambda = (lambda * 0.3).max(1e-12);
            if rel < 1e-14 && da.abs() < 1e-12 * a.abs().max(1e-300) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    // Covariance from the undamped normal matrix at the optimum.
    let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
    for (t, s) in taus.iter().zip(sigmas) {
        let e = (-k * t).exp();
        let j0 = e / s;
        let j1 = -a * t * e / s;
        h00 += j0 * j0;
        h01 += j0 * j1;
        h11 += j1 * j1;
    }
    let det = h00 * h11 - h01 * h01;
    let (var_a, var_k) = if det > 0.0 && det.is_finite() {
        (h11 / det, h00 / det)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let timescale = 1.0 / k;
    // sigma_T = sigma_k / k² by propagation through T = 1/k.
    let t_err = var_k.sqrt() / (k * k);
    let unreliable = k.is_nan()
        || k <= 0.0
        || !timescale.is_finite()
        || !t_err.is_finite()
        || t_err >= timescale.abs()
        || var_a <= 0.0;
    Ok(ExpFit {
        amplitude: a,
        timescale_ns: timescale,
        amplitude_stderr: var_a.sqrt(),
        timescale_stderr: t_err.abs(),
        unreliable,
    })
}

/// Weighted regression of ln v on τ over strictly positive values; None with < 2.
fn log_linear_seed(taus: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        taus.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det;
    Some((intercept.exp(), -slope))
}
