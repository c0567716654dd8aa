//! Command-line front end: loads a TOML config, layers `--set`/`--seed`/`--out`
//! overrides on top, runs one command from the library, and writes CSV data files, a
//! JSON summary, the resolved config, and a checksummed run manifest.
//!
//! Every command is a pure function of (config, seed): re-running with the same
//! resolved configuration reproduces each data file byte for byte. Exit codes: 0 on
//! success, 2 for configuration errors, 3 for numerical or fit failures, 4 for I/O
//! errors.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use trion_optics::bloch::{
    bloch_steady_state, classify_g2_shape, detected_intensity, fit_g2_map, g2_map, G2Curve,
    G2Shape, SHAPE_EPSILON,
};
use trion_optics::config::{CavitySection, Config, FieldSection};
use trion_optics::output::{
    click_stream_csv, degree_overlay_csv, g2_curve_csv, g2_map_csv, hbt_histogram_csv,
    pol_correlation_csv, spectrum_csv, OutputDir,
};
use trion_optics::scatter::{
    fit_modulation, modulation_metrics, reflectivity_spectrum, response_components,
    ModulationMetrics,
};
use trion_optics::spin::{
    analytic_degree, fit_exponential, pol_correlation_sharded, telegraph_bunching, ExpFit,
};
use trion_optics::trajectory::{
    binned_autocorrelation, g2_zero_estimate, hbt_sharded, mc_gated_clicks, mc_jump_clicks,
};
use trion_optics::Error;

#[derive(Parser)]
#[command(
    name = "trion-optics",
    version,
    about = "Resonance fluorescence of a driven charged quantum dot interfering with \
             coherent cavity light: reflectivity spectra, photon statistics, quantum-jump \
             photon counting, and spin-tagged polarization correlations.",
    after_help = "All outputs are CSV/JSON data files plus a checksummed manifest in the \
                  output directory. Commands are deterministic given the resolved \
                  configuration and seed."
)]
struct Cli {
    /// TOML configuration file; defaults apply for every key it omits
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,

    /// Override the random seed from [run]
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override the output directory from [run]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,

    /// Override one config value, TOML literal syntax (repeatable)
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflectivity spectra with the emitter active and inactive, the emitter response
    /// components, and the charging-induced modulation metrics
    #[command(name = "spectrum")]
    Spectrum {
        /// Hold the dot uncharged: the active spectrum collapses onto the inactive one
        #[arg(long)]
        no_charge: bool,
    },

    /// Photon statistics g2(tau) of the superposed emitter + background field at one
    /// detuning, with a shape classification
    #[command(name = "g2")]
    G2 {
        /// Detuning on the map axis, ueV
        #[arg(long, value_name = "UEV", allow_negative_numbers = true)]
        delta: f64,
    },

    /// g2(tau) over the whole detuning grid, row-major CSV
    #[command(name = "g2map")]
    G2Map,

    /// Quantum-jump photon counting: click stream, coincidence histogram, g2(0)
    /// estimate, and the long-delay blinking tail
    #[command(name = "hbt")]
    Hbt,

    /// Spin-tagged polarization correlations: same/cross coincidences, correlation
    /// degree, and the exponential memory fit
    #[command(name = "polcorr")]
    Polcorr,

    /// Fit the cavity background to the modulation targets, then the detected-field
    /// calibration to the g2(0) anchors
    #[command(name = "fit")]
    Fit,

    /// Print the resolved configuration (defaults plus any overrides) as TOML
    #[command(name = "dump-defaults")]
    DumpDefaults,
}

enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            // Usage errors are config problems; everything else the library reports is
            // a numerical or fit failure.
            Failure::Lib(Error::InvalidParam(_)) | Failure::Lib(Error::Grid(_)) => 2,
            Failure::Lib(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => e.fmt(f),
            Failure::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = execute(cli) {
        eprintln!("error: {failure}");
        std::process::exit(failure.code());
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.config {
        Some(path) => Config::from_file(Path::new(path))?,
        None => Config::default(),
    };
    for spec in &cli.set {
        config.apply_set(spec)?;
    }
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.run.out_dir = out.clone();
    }
    config.validate()?;

    match cli.command {
        Command::DumpDefaults => {
            print!("{}", config.to_toml_string());
            Ok(())
        }
        Command::Spectrum { no_charge } => cmd_spectrum(&config, no_charge),
        Command::G2 { delta } => cmd_g2(&config, delta),
        Command::G2Map => cmd_g2map(&config),
        Command::Hbt => cmd_hbt(&config),
        Command::Polcorr => cmd_polcorr(&config),
        Command::Fit => cmd_fit(&config),
    }
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn shape_name(shape: G2Shape) -> &'static str {
    match shape {
        G2Shape::Antibunched => "antibunched",
        G2Shape::WShaped => "w_shaped",
        G2Shape::Bunched => "bunched",
        G2Shape::Poissonian => "poissonian",
        G2Shape::Unclassified => "unclassified",
    }
}

fn cmd_spectrum(config: &Config, no_charge: bool) -> Result<(), Failure> {
    let started = now_unix();
    let t0 = Instant::now();
    let p = config.emitter()?;
    let c = config.cavity()?;
    let grid = config.detuning_grid()?;
    let inactive = reflectivity_spectrum(&grid, &p, &c, false)?;
    let active =
        if no_charge { inactive.clone() } else { reflectivity_spectrum(&grid, &p, &c, true)? };
    let (response_re, response_im) = response_components(&grid, &p)?;
    let (metrics, excluded) = modulation_metrics(&active, &inactive)?;

    #[derive(Serialize)]
    struct Summary {
        no_charge: bool,
        modulation: ModulationMetrics,
        excluded_points: usize,
    }

    let mut out = OutputDir::create(Path::new(&config.run.out_dir))?;
    out.write_text("spectrum_active.csv", &spectrum_csv(&active))?;
    out.write_text("spectrum_inactive.csv", &spectrum_csv(&inactive))?;
    out.write_text("response_real.csv", &spectrum_csv(&response_re))?;
    out.write_text("response_imag.csv", &spectrum_csv(&response_im))?;
    out.write_json(
        "summary.json",
        &Summary { no_charge, modulation: metrics, excluded_points: excluded.len() },
    )?;
    out.finish(config, "spectrum", started, t0.elapsed().as_secs_f64())?;

    println!(
        "modulation: enhancement {:.1}% at {:+.2} ueV, suppression {:.1}% at {:+.2} ueV, total {:.1}%",
        metrics.enhancement_pct,
        metrics.enhancement_at_uev,
        metrics.suppression_pct,
        metrics.suppression_at_uev,
        metrics.total_pct
    );
    println!("wrote spectra to {}", config.run.out_dir);
    Ok(())
}

fn cmd_g2(config: &Config, delta_uev: f64) -> Result<(), Failure> {
    let started = now_unix();
    let t0 = Instant::now();
    let cavity = config.cavity()?;
    let calib = config.field_calibration()?;
    let base = config.drive()?;
    let taus = config.tau_grid()?;
    // One-row map: the background follows the cavity at this detuning, the emitter
    // sits at delta minus the calibration offset.
    let map = g2_map(&cavity, &calib, &base, &[delta_uev], &taus)?;
    let curve = G2Curve::new(map.taus_ns.clone(), map.rows[0].clone())?;
    let shape = classify_g2_shape(&curve, SHAPE_EPSILON)?;

    #[derive(Serialize)]
    struct Summary {
        delta_uev: f64,
        g2_zero: f64,
        shape: G2Shape,
    }

    let mut out = OutputDir::create(Path::new(&config.run.out_dir))?;
    out.write_text("g2_curve.csv", &g2_curve_csv(&curve))?;
    out.write_json(
        "summary.json",
        &Summary { delta_uev, g2_zero: curve.values()[0], shape },
    )?;
    out.finish(config, "g2", started, t0.elapsed().as_secs_f64())?;

    println!(
        "g2(0) = {:.4} at {:+.2} ueV, {}",
        curve.values()[0],
        delta_uev,
        shape_name(shape)
    );
    println!("wrote g2 curve to {}", config.run.out_dir);
    Ok(())
}

fn cmd_g2map(config: &Config) -> Result<(), Failure> {
    let started = now_unix();
    let t0 = Instant::now();
    let cavity = config.cavity()?;
    let calib = config.field_calibration()?;
    let base = config.drive()?;
    let detunings = config.detuning_grid()?;
    let taus = config.tau_grid()?;
    let map = g2_map(&cavity, &calib, &base, &detunings, &taus)?;

    let mut antibunched = 0usize;
    let mut w_shaped = 0usize;
    let mut bunched = 0usize;
    let mut poissonian = 0usize;
    let mut unclassified = 0usize;
    for row in &map.rows {
        let curve = G2Curve::new(map.taus_ns.clone(), row.clone())?;
        match classify_g2_shape(&curve, SHAPE_EPSILON)? {
            G2Shape::Antibunched => antibunched += 1,
            G2Shape::WShaped => w_shaped += 1,
            G2Shape::Bunched => bunched += 1,
            G2Shape::Poissonian => poissonian += 1,
            G2Shape::Unclassified => unclassified += 1,
        }
    }

    #[derive(Serialize)]
    struct Summary {
        detunings: usize,
        taus: usize,
        antibunched: usize,
        w_shaped: usize,
        bunched: usize,
        poissonian: usize,
        unclassified: usize,
    }

    let mut out = OutputDir::create(Path::new(&config.run.out_dir))?;
    out.write_text("g2_map.csv", &g2_map_csv(&map))?;
    out.write_json(
        "summary.json",
        &Summary {
            detunings: map.detunings_uev.len(),
            taus: map.taus_ns.len(),
            antibunched,
            w_shaped,
            bunched,
            poissonian,
            unclassified,
        },
    )?;
    out.finish(config, "g2map", started, t0.elapsed().as_secs_f64())?;

    println!(
        "map {} detunings x {} delays: {} antibunched, {} w_shaped, {} bunched, {} poissonian",
        map.detunings_uev.len(),
        map.taus_ns.len(),
        antibunched,
        w_shaped,
        bunched,
        poissonian
    );
    println!("wrote g2 map to {}", config.run.out_dir);
    Ok(())
}

fn cmd_hbt(config: &Config) -> Result<(), Failure> {
    let started = now_unix();
    let t0 = Instant::now();
    let field = config.hbt_field()?;
    let drive = config.drive()?;
    let mc = config.mc_params()?;
    let gate = if config.hbt.blinking { Some(config.gate()?) } else { None };

    let (hist, n_clicks) = hbt_sharded(
        &field,
        &drive,
        gate.as_ref(),
        &mc,
        config.hbt.shards,
        config.hbt.bin_width_ns,
        config.hbt.tau_max_ns,
    )?;
    let (g2_zero, g2_zero_stderr) = g2_zero_estimate(&hist)?;

    // Shard 0 regenerated for the stream artifact and the long-delay autocorrelation.
    let stream = match &gate {
        Some(g) => mc_gated_clicks(&field, &drive, g, &mc)?,
        None => mc_jump_clicks(&field, &drive, &mc)?,
    };
    let coarse = binned_autocorrelation(&stream, config.hbt.coarse_bin_ns, config.hbt.coarse_lags)?;

    #[derive(Serialize)]
    struct Summary {
        blinking: bool,
        shards: usize,
        duration_ns_per_shard: f64,
        total_clicks: u64,
        g2_zero: f64,
        g2_zero_stderr: f64,
    }

    let mut out = OutputDir::create(Path::new(&config.run.out_dir))?;
    out.write_text("clicks.csv", &click_stream_csv(&stream))?;
    out.write_text("hbt_fine.csv", &hbt_histogram_csv(&hist))?;
    out.write_text("hbt_coarse.csv", &hbt_histogram_csv(&coarse))?;
    if let Some(g) = &gate {
        // Closed-form telegraph envelope on the coarse grid, for overlaying the tail.
        let i_on = detected_intensity(&field, &bloch_steady_state(&drive));
        let i_off = field.background.norm_sqr();
        let centers: Vec<f64> =
            (0..coarse.counts().len()).map(|k| coarse.tau_center(k)).collect();
        let overlay = telegraph_bunching(i_on, i_off, g, &centers)?;
        out.write_text("blinking_overlay.csv", &g2_curve_csv(&overlay))?;
    }
    out.write_json(
        "summary.json",
        &Summary {
            blinking: config.hbt.blinking,
            shards: config.hbt.shards,
            duration_ns_per_shard: config.hbt.duration_ns,
            total_clicks: n_clicks,
            g2_zero,
            g2_zero_stderr,
        },
    )?;
    out.finish(config, "hbt", started, t0.elapsed().as_secs_f64())?;

    println!("g2(0) = {g2_zero:.4} +/- {g2_zero_stderr:.4} from {n_clicks} clicks");
    println!("wrote photon-counting run to {}", config.run.out_dir);
    Ok(())
}

fn cmd_polcorr(config: &Config) -> Result<(), Failure> {
    let started = now_unix();
    let t0 = Instant::now();
    let p = config.charge_spin()?;
    let (result, n_clicks) = pol_correlation_sharded(
        &p,
        config.polcorr.duration_ns,
        config.run.seed,
        config.polcorr.shards,
        config.polcorr.bin_width_ns,
        config.polcorr.tau_max_ns,
    )?;
    let fit = fit_exponential(&result)?;
    let centers: Vec<f64> = (0..result.len()).map(|k| result.tau_center(k)).collect();
    let overlay: Vec<f64> = centers.iter().map(|&t| analytic_degree(&p, t)).collect();

    #[derive(Serialize)]
    struct Summary {
        total_clicks: u64,
        degree_first_bin: f64,
        fit: ExpFit,
    }

    let mut out = OutputDir::create(Path::new(&config.run.out_dir))?;
    out.write_text("polcorr.csv", &pol_correlation_csv(&result))?;
    out.write_text("degree_overlay.csv", &degree_overlay_csv(&centers, &overlay))?;
    out.write_json(
        "summary.json",
        &Summary { total_clicks: n_clicks, degree_first_bin: result.degree()[0], fit },
    )?;
    out.finish(config, "polcorr", started, t0.elapsed().as_secs_f64())?;

    println!(
        "degree amplitude {:.4} +/- {:.4}, memory {:.1} +/- {:.1} ns{}",
        fit.amplitude,
        fit.amplitude_stderr,
        fit.timescale_ns,
        fit.timescale_stderr,
        if fit.unreliable { " (unreliable)" } else { "" }
    );
    println!("wrote polarization correlation to {}", config.run.out_dir);
    Ok(())
}

fn cmd_fit(config: &Config) -> Result<(), Failure> {
    let started = now_unix();
    let t0 = Instant::now();
    let p = config.emitter()?;
    let targets = config.modulation_targets()?;
    let side = config.enhancement_side()?;
    let cavity = fit_modulation(&targets, &p, side)?;

    let base = config.drive()?;
    let g2_targets = config.g2_targets()?;
    let calib = fit_g2_map(&g2_targets, &cavity, &base)?;

    // Achieved values, recomputed from the fitted models.
    let grid = config.detuning_grid()?;
    let active = reflectivity_spectrum(&grid, &p, &cavity, true)?;
    let inactive = reflectivity_spectrum(&grid, &p, &cavity, false)?;
    let (metrics, _) = modulation_metrics(&active, &inactive)?;
    let target_dets: Vec<f64> = g2_targets.iter().map(|t| t.0).collect();
    let achieved_map = g2_map(&cavity, &calib, &base, &target_dets, &[0.0])?;
    let g2_achieved: Vec<(f64, f64)> =
        target_dets.iter().zip(&achieved_map.rows).map(|(d, row)| (*d, row[0])).collect();

    // A config carrying the fitted values, ready to rerun every other command.
    let mut fitted = config.clone();
    fitted.cavity = CavitySection {
        r_background: cavity.r_background,
        dip_depth: cavity.dip_depth,
        center_uev: cavity.center.uev(),
        kappa_fwhm_uev: cavity.kappa_fwhm.uev(),
        phase_offset: cavity.phase_offset,
    };
    fitted.field =
        FieldSection { coupling: calib.coupling, delta_offset_uev: calib.delta_offset.uev() };

    #[derive(Serialize)]
    struct Summary {
        r_background: f64,
        phase_offset: f64,
        coupling: f64,
        delta_offset_uev: f64,
        g2_residual: f64,
        modulation_achieved: ModulationMetrics,
        g2_achieved: Vec<(f64, f64)>,
    }

    let mut out = OutputDir::create(Path::new(&config.run.out_dir))?;
    out.write_text("fitted_config.toml", &fitted.to_toml_string())?;
    out.write_json(
        "summary.json",
        &Summary {
            r_background: cavity.r_background,
            phase_offset: cavity.phase_offset,
            coupling: calib.coupling,
            delta_offset_uev: calib.delta_offset.uev(),
            g2_residual: calib.residual,
            modulation_achieved: metrics,
            g2_achieved: g2_achieved.clone(),
        },
    )?;
    out.finish(config, "fit", started, t0.elapsed().as_secs_f64())?;

    println!(
        "cavity: r_background {:.6}, phase {:.4} rad; field: coupling {:.6}, offset {:+.4} ueV (residual {:.2e})",
        cavity.r_background, cavity.phase_offset, calib.coupling, calib.delta_offset.uev(), calib.residual
    );
    println!(
        "achieved modulation {:.1}/{:.1}/{:.1}%, g2(0) at anchors: {}",
        metrics.enhancement_pct,
        metrics.suppression_pct,
        metrics.total_pct,
        g2_achieved
            .iter()
            .map(|(d, g)| format!("{d:+.1} ueV -> {g:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("wrote fit results to {}", config.run.out_dir);
    Ok(())
}
