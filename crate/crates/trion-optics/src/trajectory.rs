//! Monte Carlo quantum-jump unraveling of the driven transition and coincidence
//! histogramming, the stochastic twin of the deterministic correlation module.
//!
//! The detector monitors the superposed field a = β + c·σ⁻, so the detected jump
//! operator is the displaced lowering operator C₀ = √s·(β + c·σ⁻), where the rate scale
//! s converts field units into clicks per ns. Writing D[C₀] = s·c²·D[σ⁻] − i[H_x, ·]
//! with the displacement compensator H_x = (i·s·c/2)(β*σ⁻ − β σ⁺), the unraveling
//!
//! ```text
//! C₀ = √s (β + c σ⁻)          detected channel (recorded clicks)
//! C₁ = √(Γ − s c²) σ⁻          undetected emitter loss
//! C₂ = √(2 γ_d) |e⟩⟨e|         pure dephasing
//! H  = H_drive − H_x
//! ```
//!
//! reproduces exactly the master equation the Bloch module integrates, provided
//! s·c² ≤ Γ (otherwise the detector would claim more emitter flux than exists, rejected
//! as an overcoupled configuration). Between jumps the unnormalized state follows the
//! non-Hermitian propagator e^{−iH_nh t}, H_nh = H − (i/2)ΣC†C; the squared norm is the
//! no-jump survival probability, strictly non-increasing, so jump times are located by
//! bracket doubling and bisection against a uniform threshold.
//!
//! A charge-gated variant multiplies in the slow telegraph of the emitter's ground-state
//! occupation: while uncharged only the coherent background reaches the detector (a
//! Poisson process), and each charging event restarts the emitter in its ground state.
//!
//! Histogramming follows the stationary-stream convention: ordered pairs with delay in
//! (0, τ_max], normalization N²·Δτ/T per bin, so the normalized histogram estimates
//! g²(τ) and the finite bin width biases the τ = 0 estimate toward 1.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_steady_state, detected_intensity, DriveParams, FieldModel};
use crate::matexp::Propagator2;
use crate::Error;

/// Circular polarization tag attached to clicks by the spin-resolved generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolTag {
    Left,
    Right,
}

/// A detection record: strictly increasing click times on [0, duration], optionally
/// polarization-tagged, together with the seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickStream {
    times_ns: Vec<f64>,
    tags: Option<Vec<PolTag>>,
    duration_ns: f64,
    seed: u64,
}

impl ClickStream {
    pub fn new(
        times_ns: Vec<f64>,
        tags: Option<Vec<PolTag>>,
        duration_ns: f64,
        seed: u64,
    ) -> Result<Self, Error> {
        if !(duration_ns.is_finite() && duration_ns > 0.0) {
            return Err(Error::invalid(format!("duration must be > 0, got {duration_ns}")));
        }
        if times_ns.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > duration_ns) {
            return Err(Error::invalid("click times must lie within [0, duration]"));
        }
        if times_ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("click times must be strictly increasing"));
        }
        if let Some(tags) = &tags {
            if tags.len() != times_ns.len() {
                return Err(Error::invalid("one tag per click required"));
            }
        }
        Ok(ClickStream { times_ns, tags, duration_ns, seed })
    }

    pub fn times_ns(&self) -> &[f64] {
        &self.times_ns
    }

    pub fn tags(&self) -> Option<&[PolTag]> {
        self.tags.as_deref()
    }

    pub fn duration_ns(&self) -> f64 {
        self.duration_ns
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.times_ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_ns.is_empty()
    }

    /// Mean detected rate in clicks per ns.
    pub fn rate(&self) -> f64 {
        self.times_ns.len() as f64 / self.duration_ns
    }
}

/// Click-rate calibration: the scale converting detected field-units intensity
/// ⟨a†a⟩ into clicks per ns is chosen so the stationary stream hits `target_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    /// Stationary detected click rate, clicks per ns.
    pub target_rate: f64,
    pub duration_ns: f64,
    pub seed: u64,
}

impl McParams {
    pub fn new(target_rate: f64, duration_ns: f64, seed: u64) -> Result<Self, Error> {
        if !(target_rate.is_finite() && target_rate > 0.0) {
            return Err(Error::invalid(format!("target_rate must be > 0, got {target_rate}")));
        }
        if !(duration_ns.is_finite() && duration_ns > 0.0) {
            return Err(Error::invalid(format!("duration must be > 0, got {duration_ns}")));
        }
        Ok(McParams { target_rate, duration_ns, seed })
    }
}

/// Rate scale s with s·⟨a†a⟩_ss = target_rate, verified against the overcoupling bound
/// s·c² ≤ Γ.
pub fn rate_scale(f: &FieldModel, d: &DriveParams, target_rate: f64) -> Result<f64, Error> {
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(Error::invalid(format!("target_rate must be > 0, got {target_rate}")));
    }
    let i_ss = detected_intensity(f, &bloch_steady_state(d));
    if i_ss <= 0.0 {
        return Err(Error::DarkField);
    }
    let s = target_rate / i_ss;
    let detected = s * f.coupling * f.coupling;
    if detected > d.gamma * (1.0 + 1e-12) {
        return Err(Error::Overcoupled { detected, gamma: d.gamma });
    }
    Ok(s)
}

/// One-trajectory stochastic engine: non-Hermitian propagation plus collapse.
struct JumpEngine {
    prop: Propagator2,
    beta: Complex64,
    coupling: f64,
    scale: f64,
    /// Γ − s c², the undetected emitter-decay rate.
    gamma_rest: f64,
    gamma_deph: f64,
}

const GROUND: [Complex64; 2] = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

fn norm_sqr(psi: &[Complex64; 2]) -> f64 {
    psi[0].norm_sqr() + psi[1].norm_sqr()
}

impl JumpEngine {
    fn new(f: &FieldModel, d: &DriveParams, scale: f64) -> Result<Self, Error> {
        let detected = scale * f.coupling * f.coupling;
        if detected > d.gamma * (1.0 + 1e-12) {
            return Err(Error::Overcoupled { detected, gamma: d.gamma });
        }
        let gamma_rest = (d.gamma - detected).max(0.0);
        let beta = f.background;
        let c = f.coupling;
        let delta = d.delta.angular_rate();
        let half_omega = 0.5 * d.omega;
        // B = -i H_nh; the compensator cancels the background cross term in B[0][1].
        let b = [
            [
                Complex64::new(-0.5 * (scale * beta.norm_sqr() + d.gamma + 2.0 * d.gamma_deph), delta),
                Complex64::new(0.0, -half_omega),
            ],
            [
                Complex64::new(0.0, -half_omega) - scale * c * beta.conj(),
                Complex64::new(-0.5 * scale * beta.norm_sqr(), 0.0),
            ],
        ];
        Ok(JumpEngine {
            prop: Propagator2::new(b),
            beta,
            coupling: c,
            scale,
            gamma_rest,
            gamma_deph: d.gamma_deph,
        })
    }

    /// Unnormalized detected-channel collapse √s(β + cσ⁻)ψ.
    fn detected_collapse(&self, psi: &[Complex64; 2]) -> [Complex64; 2] {
        let root = self.scale.sqrt();
        [
            root * self.beta * psi[0],
            root * (self.beta * psi[1] + self.coupling * psi[0]),
        ]
    }

    /// Advance from `psi` (normalized) across [t, t_end); push detected clicks at
    /// absolute times ≥ 0 into `out`. Returns the normalized state at t_end.
    fn run_segment(
        &self,
        mut psi: [Complex64; 2],
        mut t: f64,
        t_end: f64,
        rng: &mut ChaCha8Rng,
        out: &mut Vec<f64>,
    ) -> [Complex64; 2] {
        while t < t_end {
            // Uniform survival threshold on (0, 1].
            let r = 1.0 - rng.gen::<f64>();
            let remain = t_end - t;
            let end_state = self.prop.apply(remain, psi);
            if norm_sqr(&end_state) >= r {
                // No jump before the segment ends.
                return normalize(end_state);
            }
            // Bracket the jump time by doubling, then bisect until the survival
            // bracket is tighter than 1e-8. Survival is monotone non-increasing, so
            // the bracket is valid and the loop terminates.
            let mut hi = remain.min(1.0);
            let mut lo = 0.0;
            let mut s_lo = 1.0;
            let mut s_hi = norm_sqr(&self.prop.apply(hi, psi));
            while s_hi > r {
                lo = hi;
                s_lo = s_hi;
                hi = (hi * 2.0).min(remain);
                s_hi = norm_sqr(&self.prop.apply(hi, psi));
            }
            for _ in 0..90 {
                if s_lo - s_hi <= 1e-8 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let s_mid = norm_sqr(&self.prop.apply(mid, psi));
                if s_mid > r {
                    lo = mid;
                    s_lo = s_mid;
                } else {
                    hi = mid;
                    s_hi = s_mid;
                }
            }
            let dt = 0.5 * (lo + hi);
            let at_jump = self.prop.apply(dt, psi);
            t += dt;

            let w_detected = norm_sqr(&self.detected_collapse(&at_jump));
            let pe = at_jump[0].norm_sqr();
            let w_rest = self.gamma_rest * pe;
            let w_deph = 2.0 * self.gamma_deph * pe;
            let total = w_detected + w_rest + w_deph;
            debug_assert!(total > 0.0);
            let pick = rng.gen::<f64>() * total;
            psi = if pick < w_detected {
                if t >= 0.0 && t < t_end {
                    out.push(t);
                }
                normalize(self.detected_collapse(&at_jump))
            } else if pick < w_detected + w_rest {
                // Undetected decay projects onto the ground state.
                GROUND
            } else {
                // Dephasing projects onto the excited state.
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
            };
        }
        psi
    }
}

fn normalize(psi: [Complex64; 2]) -> [Complex64; 2] {
    let n = norm_sqr(&psi).sqrt();
    debug_assert!(n > 0.0);
    [psi[0] / n, psi[1] / n]
}

/// Burn-in discarded before recording, in units of emitter lifetimes.
const BURN_IN_LIFETIMES: f64 = 20.0;

/// Quantum-jump click stream of the superposed field. Deterministic for fixed
/// (parameters, seed); the first 20/Γ is simulated and discarded. Equals shard 0 of
/// the sharded runner.
pub fn mc_jump_clicks(f: &FieldModel, d: &DriveParams, mc: &McParams) -> Result<ClickStream, Error> {
    mc_jump_clicks_stream(f, d, mc, 0)
}

/// Telegraph gate for the charge-occupation blinking: while uncharged the emitter is
/// absent and only the coherent background reaches the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    /// empty → charged rate, per ns.
    pub r_charge: f64,
    /// charged → empty rate, per ns.
    pub r_discharge: f64,
}

impl GateParams {
    pub fn new(r_charge: f64, r_discharge: f64) -> Result<Self, Error> {
        if !(r_charge.is_finite() && r_charge > 0.0 && r_discharge.is_finite() && r_discharge > 0.0)
        {
            return Err(Error::invalid(format!(
                "gate rates must be > 0, got ({r_charge}, {r_discharge})"
            )));
        }
        Ok(GateParams { r_charge, r_discharge })
    }

    /// Stationary probability of the charged state.
    pub fn p_charged(&self) -> f64 {
        self.r_charge / (self.r_charge + self.r_discharge)
    }
}

/// Quantum-jump stream gated by the charge telegraph. `target_rate` is the stationary
/// detected rate averaged over charged and uncharged periods; each charging event
/// restarts the emitter in its ground state. Equals shard 0 of the sharded runner.
pub fn mc_gated_clicks(
    f: &FieldModel,
    d: &DriveParams,
    gate: &GateParams,
    mc: &McParams,
) -> Result<ClickStream, Error> {
    mc_gated_clicks_stream(f, d, gate, mc, 0)
}

/// Coincidence histogram over positive delays: bin k covers (k·Δτ, (k+1)·Δτ].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbtHistogram {
    bin_width_ns: f64,
    counts: Vec<u64>,
    /// Expected ordered-pair count per bin for uncorrelated light: N²·Δτ/T.
    normalization: f64,
}

impl HbtHistogram {
    pub fn bin_width_ns(&self) -> f64 {
        self.bin_width_ns
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Delay at the center of bin k.
    pub fn tau_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.bin_width_ns
    }

    /// Normalized histogram estimating g²(τ) at the bin centers.
    pub fn g2(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.normalization).collect()
    }

    /// Merge histograms from independent streams: counts and expected counts add.
    pub fn merge(mut parts: Vec<HbtHistogram>) -> Result<HbtHistogram, Error> {
        let first = parts.pop().ok_or_else(|| Error::invalid("nothing to merge"))?;
        let mut counts = first.counts;
        let mut normalization = first.normalization;
        for p in parts {
            if p.bin_width_ns != first.bin_width_ns || p.counts.len() != counts.len() {
                return Err(Error::grid("histogram shapes differ, cannot merge"));
            }
            for (a, b) in counts.iter_mut().zip(&p.counts) {
                *a += b;
            }
            normalization += p.normalization;
        }
        Ok(HbtHistogram { bin_width_ns: first.bin_width_ns, counts, normalization })
    }
}

/// Count ordered click pairs with delays in (0, τ_max] into uniform bins, two-pointer
/// sliding window. The stationary normalization N²·Δτ/T makes counts/normalization an
/// estimate of g²; delays mirror to negative τ by symmetry, so only τ > 0 is stored.
pub fn hbt_histogram(s: &ClickStream, bin_width_ns: f64, tau_max_ns: f64) -> Result<HbtHistogram, Error> {
    if s.is_empty() {
        return Err(Error::invalid("empty click stream"));
    }
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
    let mut counts = vec![0u64; n_bins];
    for i in 0..times.len() {
        for j in (i + 1)..times.len() {
            let dt = times[j] - times[i];
            if dt > tau_max {
                break;
            }
            // dt > 0 by strict ordering; bin (k·w, (k+1)·w] via ceil.
            let k = (dt / bin_width_ns).ceil() as usize - 1;
            counts[k.min(n_bins - 1)] += 1;
        }
    }
    let n = times.len() as f64;
    let normalization = n * n * bin_width_ns / s.duration_ns();
    Ok(HbtHistogram { bin_width_ns, counts, normalization })
}

/// g² estimate from the first positive-delay bin with its Poisson standard error.
/// The finite bin width averages g² over (0, Δτ], biasing the estimate toward 1;
/// halving the width moves it monotonically toward the true g²(0).
pub fn g2_zero_estimate(h: &HbtHistogram) -> Result<(f64, f64), Error> {
    if h.normalization <= 0.0 {
        return Err(Error::Numerics("zero histogram normalization".into()));
    }
    let c = *h.counts.first().ok_or_else(|| Error::grid("histogram has no bins"))? as f64;
    Ok((c / h.normalization, c.sqrt().max(1.0) / h.normalization))
}

/// Sharded Monte Carlo coincidence run: `shards` independent streams with derived seeds
/// (seed, shard index), each `duration_ns` long, histogrammed separately and merged.
/// The result depends only on the parameters, never on scheduling.
pub fn hbt_sharded(
    f: &FieldModel,
    d: &DriveParams,
    gate: Option<&GateParams>,
    mc: &McParams,
    shards: usize,
    bin_width_ns: f64,
    tau_max_ns: f64,
) -> Result<(HbtHistogram, u64), Error> {
    if shards == 0 {
        return Err(Error::invalid("at least one shard required"));
    }
    let results: Vec<(HbtHistogram, u64)> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let stream = match gate {
                Some(g) => mc_gated_clicks_stream(f, d, g, mc, shard as u64)?,
                None => mc_jump_clicks_stream(f, d, mc, shard as u64)?,
            };
            let h = hbt_histogram(&stream, bin_width_ns, tau_max_ns)?;
            Ok((h, stream.len() as u64))
        })
        .collect::<Result<_, Error>>()?;
    let total: u64 = results.iter().map(|r| r.1).sum();
    let merged = HbtHistogram::merge(results.into_iter().map(|r| r.0).collect())?;
    Ok((merged, total))
}

/// Core generator: same seed, independent counter-mode RNG stream per shard, so shards
/// decorrelate without reseeding and shard 0 reproduces the unsharded stream.
fn mc_jump_clicks_stream(
    f: &FieldModel,
    d: &DriveParams,
    mc: &McParams,
    stream: u64,
) -> Result<ClickStream, Error> {
    let scale = rate_scale(f, d, mc.target_rate)?;
    let engine = JumpEngine::new(f, d, scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream(stream);
    let mut clicks = Vec::with_capacity((mc.target_rate * mc.duration_ns * 1.1) as usize + 16);
    let burn = BURN_IN_LIFETIMES / d.gamma;
    let psi = engine.run_segment(GROUND, -burn, 0.0, &mut rng, &mut Vec::new());
    engine.run_segment(psi, 0.0, mc.duration_ns, &mut rng, &mut clicks);
    ClickStream::new(clicks, None, mc.duration_ns, mc.seed)
}

fn mc_gated_clicks_stream(
    f: &FieldModel,
    d: &DriveParams,
    gate: &GateParams,
    mc: &McParams,
    stream: u64,
) -> Result<ClickStream, Error> {
    let i_on = detected_intensity(f, &bloch_steady_state(d));
    let i_off = f.background.norm_sqr();
    let p_on = gate.p_charged();
    let i_mean = p_on * i_on + (1.0 - p_on) * i_off;
    if i_mean <= 0.0 {
        return Err(Error::DarkField);
    }
    let scale = mc.target_rate / i_mean;
    let engine = JumpEngine::new(f, d, scale)?;
    let bg_rate = scale * i_off;
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream(stream);
    let mut clicks = Vec::with_capacity((mc.target_rate * mc.duration_ns * 1.1) as usize + 16);
    let burn = BURN_IN_LIFETIMES / d.gamma;
    let mut t = -burn;
    let mut charged = rng.gen::<f64>() < p_on;
    let mut psi = GROUND;
    while t < mc.duration_ns {
        let rate_out = if charged { gate.r_discharge } else { gate.r_charge };
        let dwell = -(1.0 - rng.gen::<f64>()).ln() / rate_out;
        let seg_end = (t + dwell).min(mc.duration_ns);
        if charged {
            psi = engine.run_segment(psi, t, seg_end, &mut rng, &mut clicks);
        } else if bg_rate > 0.0 {
            let mut tc = t;
            loop {
                tc += -(1.0 - rng.gen::<f64>()).ln() / bg_rate;
                if tc >= seg_end {
                    break;
                }
                if tc >= 0.0 {
                    clicks.push(tc);
                }
            }
        }
        t = seg_end;
        charged = !charged;
        if charged {
            psi = GROUND;
        }
    }
    ClickStream::new(clicks, None, mc.duration_ns, mc.seed)
}

/// Binned autocorrelation for long delays: the stream is gridded into bins of width
/// `bin_width_ns` and count products are accumulated at lags 1..=max_lag. Equivalent to
/// pair counting with both endpoints binned; O(M·K) instead of O(N·k), suited to slow
/// envelopes such as charge blinking. Lag k estimates g² at τ = k·Δτ.
pub fn binned_autocorrelation(
    s: &ClickStream,
    bin_width_ns: f64,
    max_lag: usize,
) -> Result<HbtHistogram, Error> {
    if s.is_empty() {
        return Err(Error::invalid("empty click stream"));
    }
    if !(bin_width_ns.is_finite() && bin_width_ns > 0.0) {
        return Err(Error::grid(format!("bin width must be > 0, got {bin_width_ns}")));
    }
    let m = (s.duration_ns() / bin_width_ns).floor() as usize;
    if max_lag == 0 || max_lag >= m {
        return Err(Error::grid(format!(
            "max_lag must lie in [1, {}) for this duration and bin width",
            m
        )));
    }
    let mut occupancy = vec![0.0f64; m];
    for &t in s.times_ns() {
        let k = ((t / bin_width_ns) as usize).min(m - 1);
        occupancy[k] += 1.0;
    }
    let n_used: f64 = occupancy.iter().sum();
    let mean = n_used / m as f64;
    // Expected product sum at lag k for uncorrelated bins is (m - k) mean^2; it shrinks
    // with k, while the histogram carries one normalization for all bins. Rescale each
    // lag's product sum to the k = 1 expectation so counts/normalization stays an
    // unbiased g2 estimate at every lag (rounding error < 1 count).
    let norm0 = (m - 1) as f64 * mean * mean;
    let mut counts = vec![0u64; max_lag];
    for (lag, slot) in counts.iter_mut().enumerate() {
        let k = lag + 1;
        let mut acc = 0.0;
        for i in 0..(m - k) {
            acc += occupancy[i] * occupancy[i + k];
        }
        *slot = (acc * (m - 1) as f64 / (m - k) as f64).round() as u64;
    }
    Ok(HbtHistogram { bin_width_ns, counts, normalization: norm0 })
}

/// Kolmogorov-Smirnov statistic of sorted samples against a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic KS critical value c(α)/√n with c(α) = √(ln(2/α)/2); α = 0.01 gives
/// 1.628/√n.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
