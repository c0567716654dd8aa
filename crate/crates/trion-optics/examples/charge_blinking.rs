//! Charge blinking: the slow intensity telegraph on top of the fast antibunching.
//!
//! The dot randomly loses and recaptures its resident charge. While empty there is no
//! trion transition, so the resonance scattering vanishes and only the coherent
//! background reaches the detector; while charged the full superposed field is emitted.
//! Gating the quantum-jump unraveling with this two-state telegraph imprints bunching
//! on the coincidence histogram at delays of the charge correlation time, orders of
//! magnitude slower than the radiative antibunching dip.

use trion_optics::bloch::{bloch_steady_state, detected_intensity};
use trion_optics::config::Config;
use trion_optics::spin::{gillespie_charge_spin, telegraph_bunching};
use trion_optics::trajectory::{binned_autocorrelation, mc_gated_clicks, McParams};

fn main() {
    let config = Config::default();
    let field = config.hbt_field().unwrap();
    let drive = config.drive().unwrap();
    let gate = config.gate().unwrap();
    let charge_spin = config.charge_spin().unwrap();

    // Dwell statistics of the bare telegraph, against the configured rates.
    let traj = gillespie_charge_spin(&charge_spin, 2.0e7, 3).unwrap();
    let mut on_dwell = Vec::new();
    let mut off_dwell = Vec::new();
    let mut t_on = 0.0;
    for s in traj.segments() {
        let len = s.t_end_ns - s.t_start_ns;
        if s.orientation.is_some() {
            // Consecutive charged segments are one charge dwell split by spin flips.
            t_on += len;
        } else {
            if t_on > 0.0 {
                on_dwell.push(t_on);
                t_on = 0.0;
            }
            off_dwell.push(len);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("telegraph over {:.0} ms (seed 3):", traj.duration_ns() / 1e6);
    println!(
        "  charged fraction {:.4} (stationary {:.4})",
        traj.charged_fraction(),
        charge_spin.p_charged()
    );
    println!(
        "  mean charged dwell {:.0} ns (1/r_discharge = {:.0}), mean empty dwell {:.0} ns (1/r_charge = {:.0})",
        mean(&on_dwell),
        1.0 / charge_spin.r_discharge,
        mean(&off_dwell),
        1.0 / charge_spin.r_charge
    );

    // Gated click stream. The telegraph is far slower than the emission dynamics, so
    // the detected rate just alternates between the on-state and background values.
    // The window must cover many telegraph correlation times: the g2 estimator
    // normalizes by the realized mean rate, and a short window biases the long-delay
    // histogram by the square of the window's own intensity fluctuation.
    let duration_ns = 1.2e7;
    let mc = McParams::new(0.15, duration_ns, 17).unwrap();
    let stream = mc_gated_clicks(&field, &drive, &gate, &mc).unwrap();
    println!();
    println!(
        "gated stream: {} clicks over {:.1} ms, mean rate {:.3}/ns",
        stream.len(),
        duration_ns / 1e6,
        stream.rate()
    );

    // Long-delay histogram vs the closed-form telegraph bunching. Intensities come
    // from the same field model the stream was generated with.
    let i_on = detected_intensity(&field, &bloch_steady_state(&drive));
    let i_off = field.background.norm_sqr();
    let bin = 2000.0;
    let hist = binned_autocorrelation(&stream, bin, 60).unwrap();
    let centers: Vec<f64> = (0..hist.counts().len()).map(|k| hist.tau_center(k)).collect();
    let analytic = telegraph_bunching(i_on, i_off, &gate, &centers).unwrap();
    let mc_g2 = hist.g2();
    println!();
    println!(
        "long-delay bunching, correlation time 1/(r_c + r_d) = {:.1} us ({:.0} in window):",
        1e-3 / (gate.r_charge + gate.r_discharge),
        duration_ns * (gate.r_charge + gate.r_discharge)
    );
    println!("{:>10} {:>10} {:>10}", "tau_us", "mc", "analytic");
    for k in (0..centers.len()).step_by(6) {
        println!("{:>10.1} {:>10.4} {:>10.4}", centers[k] / 1e3, mc_g2[k], analytic.values()[k]);
    }
    println!();
    println!(
        "zero-delay limit of the envelope: {:.4}; intensity contrast i_on/i_off = {:.1}",
        analytic.values()[0],
        i_on / i_off
    );
}
