//! Bridge between the driven Bloch dynamics and the linear scattering amplitude.
//!
//! In the weak-drive limit the two-level emitter responds linearly: the steady-state
//! coherence of the optical Bloch equations is proportional to the elastic scattering
//! amplitude, so the detuning profile of |rho_eg|^2 must trace the squared magnitude of
//! the linear emitter response. This example scans the detuning at Omega = Gamma/100
//! and reports the worst relative deviation between the two lineshapes, then pushes the
//! drive up to show where the linear picture breaks: power broadening of the scanned
//! line and saturation of the excited-state population toward 1/2.

use trion_optics::bloch::{bloch_steady_state, DriveParams};
use trion_optics::config::Config;
use trion_optics::scatter::emitter_field;
use trion_optics::units::Energy;

fn main() {
    let config = Config::default();
    let p = config.emitter().unwrap();
    let gamma = p.gamma_decay();
    let hwhm = p.gamma0_hwhm.uev();

    // Weak drive: scan five halfwidths either side of the line.
    let omega_weak = gamma / 100.0;
    let mut worst = 0.0f64;
    let mut worst_delta = 0.0;
    println!("weak drive, Omega = Gamma/100: Bloch coherence vs linear amplitude");
    println!("{:>12} {:>14} {:>14} {:>10}", "delta_ueV", "|rho_eg|^2", "linear", "rel_dev");
    let n = 81;
    for k in 0..n {
        let d_uev = -5.0 * hwhm + 10.0 * hwhm * k as f64 / (n - 1) as f64;
        let delta = Energy::from_uev(d_uev).unwrap();
        let drive = DriveParams::new(omega_weak, delta, gamma, 0.0).unwrap();
        let rho = bloch_steady_state(&drive);
        let bloch_shape = rho.eg().norm_sqr();
        // Same normalization: scale the linear lineshape to match on resonance.
        let lin = emitter_field(delta, &p).norm_sqr();
        let lin0 = emitter_field(Energy::from_uev(0.0).unwrap(), &p).norm_sqr();
        let bloch0 = {
            let d0 = DriveParams::new(omega_weak, Energy::from_uev(0.0).unwrap(), gamma, 0.0).unwrap();
            bloch_steady_state(&d0).eg().norm_sqr()
        };
        let scaled = lin / lin0 * bloch0;
        let dev = (bloch_shape / scaled - 1.0).abs();
        if dev > worst {
            worst = dev;
            worst_delta = d_uev;
        }
        if k % 10 == 0 {
            println!("{:>12.3} {:>14.6e} {:>14.6e} {:>10.2e}", d_uev, bloch_shape, scaled, dev);
        }
    }
    println!("worst relative deviation {:.3e} at {:+.2} ueV", worst, worst_delta);

    // Strong drive: the scanned population profile broadens and the peak saturates.
    println!();
    println!("saturation: resonant steady-state quantities vs drive strength");
    println!("{:>12} {:>10} {:>12} {:>12}", "Omega/Gamma", "rho_ee", "|rho_eg|", "fwhm/Gamma0");
    for om in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let omega = om * gamma;
        let d0 = DriveParams::new(omega, Energy::from_uev(0.0).unwrap(), gamma, 0.0).unwrap();
        let rho = bloch_steady_state(&d0);
        // Scan for the half-maximum points of the population profile.
        let peak = rho.ee();
        let mut hw = 0.0;
        let mut d_uev = 0.0;
        while hw == 0.0 && d_uev < 400.0 {
            d_uev += 0.005;
            let d = DriveParams::new(omega, Energy::from_uev(d_uev).unwrap(), gamma, 0.0).unwrap();
            if bloch_steady_state(&d).ee() < 0.5 * peak {
                hw = d_uev;
            }
        }
        println!(
            "{:>12.2} {:>10.5} {:>12.5} {:>12.4}",
            om,
            rho.ee(),
            rho.eg().norm(),
            2.0 * hw / (2.0 * hwhm)
        );
    }
    println!();
    println!("rho_ee -> 1/2, coherence falls off, and the line broadens as sqrt(1 + 2 Omega^2/Gamma^2).");
}
