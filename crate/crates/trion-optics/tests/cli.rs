//! Contract tests of the command-line front end: exit codes, config loading and
//! overrides, artifact layout, and the reproducibility promise that every data file
//! is a pure function of the resolved configuration.

use std::collections::BTreeSet;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_trion-optics")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn trion-optics")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn summary(dir: &TempDir) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.path().join("run/summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn out_arg(dir: &TempDir) -> String {
    dir.path().join("run").to_str().unwrap().to_string()
}

#[test]
fn exit_codes_partition_failure_modes() {
    // 0: success.
    assert_eq!(code(&run(&["dump-defaults"])), 0);

    // 2: usage and configuration problems, whoever detects them.
    assert_eq!(code(&run(&[])), 2, "missing subcommand is a usage error");
    let out = run(&["dump-defaults", "--set", "hbt.shards"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("section.key=value"), "{}", stderr(&out));
    let out = run(&["dump-defaults", "--set", "hbt.shards=banana"]);
    assert_eq!(code(&out), 2);
    let out = run(&["dump-defaults", "--set", "emitter.r0=2.0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("r0"), "{}", stderr(&out));
    let out = run(&["dump-defaults", "--config", "/nonexistent/config.toml"]);
    assert_eq!(code(&out), 2);

    // 3: the run itself fails numerically. Modulation targets far outside the
    // reachable range leave the fit with a residual above its contract threshold.
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "fit",
        "--set",
        "fit.enhancement_pct=100000",
        "--set",
        "fit.total_pct=100026",
        "--out",
        &out_arg(&dir),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("not fittable"), "{}", stderr(&out));

    // 4: the output directory cannot be created.
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let under_file = blocker.join("sub").to_str().unwrap().to_string();
    let out = run(&["spectrum", "--out", &under_file]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).starts_with("error: i/o"), "{}", stderr(&out));
}

#[test]
fn dump_defaults_round_trips_and_reflects_overrides() {
    let out = run(&["dump-defaults"]);
    assert_eq!(code(&out), 0);
    let dumped = String::from_utf8(out.stdout).unwrap();
    for section in
        ["[emitter]", "[cavity]", "[drive]", "[field]", "[grid]", "[hbt]", "[charge_spin]", "[polcorr]", "[fit]", "[run]"]
    {
        assert!(dumped.contains(section), "dump missing {section}");
    }

    // Feeding the dump back as a config file reproduces it byte for byte.
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("defaults.toml");
    std::fs::write(&path, &dumped).unwrap();
    let out2 = run(&["dump-defaults", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out2), 0);
    assert_eq!(dumped, String::from_utf8(out2.stdout).unwrap());

    // Overrides surface in the dump.
    let out3 = run(&["dump-defaults", "--set", "hbt.shards=3", "--set", "drive.delta_uev=-1.5", "--seed", "42"]);
    let text = String::from_utf8(out3.stdout).unwrap();
    assert!(text.contains("shards = 3"));
    assert!(text.contains("delta_uev = -1.5"));
    assert!(text.contains("seed = 42"));
}

#[test]
fn unknown_config_key_is_rejected_with_location() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[emitter]\nnonsense = 1\n").unwrap();
    let out = run(&["dump-defaults", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("nonsense"), "{msg}");
    assert!(msg.contains("line 2"), "location missing: {msg}");
}

#[test]
fn far_detuned_g2_is_poissonian_and_anchor_reproduces() {
    let dir = TempDir::new().unwrap();
    let out = run(&["g2", "--delta", "200", "--out", &out_arg(&dir)]);
    assert_eq!(code(&out), 0);
    let s = summary(&dir);
    assert_eq!(s["shape"], "poissonian");
    assert!((s["g2_zero"].as_f64().unwrap() - 1.0).abs() < 0.01);

    let dir = TempDir::new().unwrap();
    let out = run(&["g2", "--delta=-8.7", "--out", &out_arg(&dir)]);
    assert_eq!(code(&out), 0);
    let s = summary(&dir);
    assert_eq!(s["shape"], "antibunched");
    assert!((s["g2_zero"].as_f64().unwrap() - 0.75).abs() < 1e-9);
}

#[test]
fn fit_writes_a_config_that_reruns_the_modulation() {
    let dir = TempDir::new().unwrap();
    let out = run(&["fit", "--out", &out_arg(&dir)]);
    assert_eq!(code(&out), 0);
    let s = summary(&dir);
    assert!(s["g2_residual"].as_f64().unwrap() < 1e-9);
    for (anchor, want) in s["g2_achieved"].as_array().unwrap().iter().zip([0.75, 1.75]) {
        assert!((anchor[1].as_f64().unwrap() - want).abs() < 1e-9);
    }
    let m = &s["modulation_achieved"];
    assert!((m["enhancement_pct"].as_f64().unwrap() / 210.0 - 1.0).abs() < 0.01);
    assert!((m["suppression_pct"].as_f64().unwrap() / 26.0 - 1.0).abs() < 0.01);

    // The fitted config is a complete, rerunnable configuration.
    let fitted = dir.path().join("run/fitted_config.toml");
    let dir2 = TempDir::new().unwrap();
    let out = run(&["spectrum", "--config", fitted.to_str().unwrap(), "--out", &out_arg(&dir2)]);
    assert_eq!(code(&out), 0);
    let s2 = summary(&dir2);
    let m2 = &s2["modulation"];
    assert!((m2["enhancement_pct"].as_f64().unwrap() / 210.0 - 1.0).abs() < 0.01);
    assert!((m2["suppression_pct"].as_f64().unwrap() / 26.0 - 1.0).abs() < 0.01);
    assert!((m2["total_pct"].as_f64().unwrap() / 236.0 - 1.0).abs() < 0.01);
}

#[test]
fn manifest_checksums_every_data_file() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["spectrum", "--out", &out_arg(&dir)])), 0);
    let run_dir = dir.path().join("run");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "spectrum");

    let listed: BTreeSet<String> = manifest["files"]
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    let mut present: BTreeSet<String> = BTreeSet::new();
    for entry in std::fs::read_dir(&run_dir).unwrap() {
        present.insert(entry.unwrap().file_name().to_string_lossy().into_owned());
    }
    // Everything in the directory is checksummed except the manifest itself.
    present.remove("manifest.json");
    assert_eq!(listed, present);
    for name in &listed {
        let bytes = std::fs::read(run_dir.join(name)).unwrap();
        assert_eq!(
            manifest["files"][name].as_str().unwrap(),
            trion_optics::output::sha256_hex(&bytes),
            "checksum mismatch for {name}"
        );
    }
}

#[test]
fn rerun_from_resolved_config_reproduces_data_files() {
    let dir1 = TempDir::new().unwrap();
    let out = run(&[
        "g2",
        "--delta",
        "3",
        "--set",
        "grid.tau_linear_points=40",
        "--seed",
        "9",
        "--out",
        &out_arg(&dir1),
    ]);
    assert_eq!(code(&out), 0);

    // No --set, no --seed: the resolved config alone carries the whole run.
    let resolved = dir1.path().join("run/resolved_config.toml");
    let dir2 = TempDir::new().unwrap();
    let out = run(&["g2", "--delta", "3", "--config", resolved.to_str().unwrap(), "--out", &out_arg(&dir2)]);
    assert_eq!(code(&out), 0);

    for name in ["g2_curve.csv", "summary.json"] {
        let a = std::fs::read(dir1.path().join("run").join(name)).unwrap();
        let b = std::fs::read(dir2.path().join("run").join(name)).unwrap();
        assert_eq!(a, b, "{name} not reproduced from the resolved config");
    }
}
