//! Data emission: CSV builders, JSON summaries, and the run manifest.
//!
//! Every table is UTF-8 with LF newlines, a header row, `.` as the decimal separator,
//! and floats printed with 17 significant digits so the values round-trip through an
//! IEEE double exactly. Figures are emitted as data, never as rendered images.
//!
//! A run writes its artifacts through [`OutputDir`], which checksums each file and
//! finishes with `resolved_config.toml` (the full configuration the run actually used)
//! and `manifest.json`. Re-running a command with the manifest's config and seed
//! reproduces every data file byte for byte; the manifest itself carries the wall
//! clock of the run and is the one file excluded from that guarantee.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bloch::{G2Curve, G2Map};
use crate::config::Config;
use crate::scatter::Spectrum;
use crate::spin::PolCorrResult;
use crate::trajectory::{ClickStream, HbtHistogram, PolTag};

/// Shortest text that reconstructs the exact double: 17 significant digits.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// `detuning_ueV,value` rows.
pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("detuning_ueV,value\n");
    for (d, v) in s.detunings_uev().iter().zip(s.values()) {
        out.push_str(&fmt_g17(*d));
        out.push(',');
        out.push_str(&fmt_g17(*v));
        out.push('\n');
    }
    out
}

/// `tau_ns,g2` rows.
pub fn g2_curve_csv(g: &G2Curve) -> String {
    let mut out = String::from("tau_ns,g2\n");
    for (t, v) in g.taus_ns().iter().zip(g.values()) {
        out.push_str(&fmt_g17(*t));
        out.push(',');
        out.push_str(&fmt_g17(*v));
        out.push('\n');
    }
    out
}

/// `detuning_ueV,tau_ns,g2` rows, row-major by detuning.
pub fn g2_map_csv(m: &G2Map) -> String {
    let mut out = String::from("detuning_ueV,tau_ns,g2\n");
    for (d, row) in m.detunings_uev.iter().zip(&m.rows) {
        for (t, v) in m.taus_ns.iter().zip(row) {
            out.push_str(&fmt_g17(*d));
            out.push(',');
            out.push_str(&fmt_g17(*t));
            out.push(',');
            out.push_str(&fmt_g17(*v));
            out.push('\n');
        }
    }
    out
}

/// `time_ns` rows, with a `tag` column (`L`/`R`) when the stream is polarized.
pub fn click_stream_csv(s: &ClickStream) -> String {
    let mut out = String::new();
    match s.tags() {
        Some(tags) => {
            out.push_str("time_ns,tag\n");
            for (t, tag) in s.times_ns().iter().zip(tags) {
                out.push_str(&fmt_g17(*t));
                out.push(',');
                out.push(match tag {
                    PolTag::Left => 'L',
                    PolTag::Right => 'R',
                });
                out.push('\n');
            }
        }
        None => {
            out.push_str("time_ns\n");
            for t in s.times_ns() {
                out.push_str(&fmt_g17(*t));
                out.push('\n');
            }
        }
    }
    out
}

/// `tau_ns,counts,g2_normalized` rows; `tau_ns` is the bin center.
pub fn hbt_histogram_csv(h: &HbtHistogram) -> String {
    let mut out = String::from("tau_ns,counts,g2_normalized\n");
    let g2 = h.g2();
    for (k, (c, g)) in h.counts().iter().zip(&g2).enumerate() {
        out.push_str(&fmt_g17(h.tau_center(k)));
        out.push(',');
        out.push_str(&c.to_string());
        out.push(',');
        out.push_str(&fmt_g17(*g));
        out.push('\n');
    }
    out
}

/// `tau_ns,n_same,n_cross,degree` rows; `tau_ns` is the bin center.
pub fn pol_correlation_csv(r: &PolCorrResult) -> String {
    let mut out = String::from("tau_ns,n_same,n_cross,degree\n");
    for (k, &deg) in r.degree().iter().enumerate() {
        out.push_str(&fmt_g17(r.tau_center(k)));
        out.push(',');
        out.push_str(&r.n_same()[k].to_string());
        out.push(',');
        out.push_str(&r.n_cross()[k].to_string());
        out.push(',');
        out.push_str(&fmt_g17(deg));
        out.push('\n');
    }
    out
}

/// `tau_ns,degree` rows for an analytic overlay on a measured correlation.
pub fn degree_overlay_csv(taus_ns: &[f64], degrees: &[f64]) -> String {
    let mut out = String::from("tau_ns,degree\n");
    for (t, d) in taus_ns.iter().zip(degrees) {
        out.push_str(&fmt_g17(*t));
        out.push(',');
        out.push_str(&fmt_g17(*d));
        out.push('\n');
    }
    out
}

/// Run manifest: what ran, when, with which resolved configuration, and the checksum
/// of every data file it produced.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub artifact_version: &'a str,
    pub command: &'a str,
    pub wall_clock_utc: String,
    pub unix_seconds: u64,
    pub elapsed_seconds: f64,
    pub config: &'a Config,
    /// File name to SHA-256 (hex) of the file content.
    pub files: BTreeMap<String, String>,
}

/// Output directory session: write files through it so the manifest can record their
/// checksums. Call [`OutputDir::finish`] last.
pub struct OutputDir {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write one file and record its checksum for the manifest.
    pub fn write_text(&mut self, name: &str, content: &str) -> io::Result<()> {
        std::fs::write(self.root.join(name), content)?;
        self.files.insert(name.to_string(), sha256_hex(content.as_bytes()));
        Ok(())
    }

    /// Serialize a summary as pretty JSON and write it like any data file.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        self.write_text(name, &(text + "\n"))
    }

    /// Write `resolved_config.toml` and `manifest.json`, consuming the session. The
    /// resolved config is checksummed like a data file; the manifest is not, since it
    /// cannot contain its own hash.
    pub fn finish(
        mut self,
        config: &Config,
        command: &str,
        started_unix: u64,
        elapsed_seconds: f64,
    ) -> io::Result<()> {
        self.write_text("resolved_config.toml", &config.to_toml_string())?;
        let manifest = RunManifest {
            artifact_version: crate::VERSION,
            command,
            wall_clock_utc: format_utc(started_unix),
            unix_seconds: started_unix,
            elapsed_seconds,
            config,
            files: self.files,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        std::fs::write(self.root.join("manifest.json"), text + "\n")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        use std::fmt::Write;
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// ISO-8601 UTC from unix seconds, proleptic Gregorian, no leap seconds.
pub fn format_utc(unix_seconds: u64) -> String {
    let days = unix_seconds / 86_400;
    let secs = unix_seconds % 86_400;
    let (y, m, d) = civil_from_days(days as i64);
    format!(
        "{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z",
        secs / 3600,
        (secs % 3600) / 60,
        secs % 60
    )
}

// Howard Hinnant's civil-from-days: era = 400-year cycle of 146097 days.
fn civil_from_days(z: i64) -> (i64, u64, u64) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097) as u64;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i64 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (if m <= 2 { y + 1 } else { y }, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::G2Curve;
    use crate::scatter::Spectrum;

    #[test]
    fn g17_round_trips_exactly() {
        for v in [0.1, 7.7, 1.0 / 3.0, 1e-17, -2.59, 6.02214076e23, f64::MIN_POSITIVE] {
            let parsed: f64 = fmt_g17(v).parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits(), "{v} vs {}", fmt_g17(v));
        }
    }

    #[test]
    fn csv_tables_have_headers_and_lf_only() {
        let s = Spectrum::new(vec![-1.0, 0.0, 1.0], vec![0.9, 0.4, 0.8]).unwrap();
        let csv = spectrum_csv(&s);
        assert!(csv.starts_with("detuning_ueV,value\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(!csv.contains('\r'));
        let g = G2Curve::new(vec![0.0, 0.5], vec![0.28, 0.9]).unwrap();
        let csv = g2_curve_csv(&g);
        assert!(csv.starts_with("tau_ns,g2\n"));
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.28);
    }

    #[test]
    fn map_csv_is_row_major_by_detuning() {
        let m = G2Map {
            detunings_uev: vec![-8.7, 6.8],
            taus_ns: vec![0.0, 1.0],
            rows: vec![vec![0.75, 0.9], vec![1.75, 1.1]],
        };
        let csv = g2_map_csv(&m);
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 5);
        assert!(rows[1].starts_with(&fmt_g17(-8.7)));
        assert!(rows[2].starts_with(&fmt_g17(-8.7)));
        assert!(rows[3].starts_with(&fmt_g17(6.8)));
    }

    #[test]
    fn tagged_stream_csv_carries_the_polarization_column() {
        let s = ClickStream::new(
            vec![1.0, 2.0, 3.5],
            Some(vec![PolTag::Left, PolTag::Right, PolTag::Left]),
            10.0,
            1,
        )
        .unwrap();
        let csv = click_stream_csv(&s);
        assert!(csv.starts_with("time_ns,tag\n"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",L"));
        assert!(csv.lines().nth(2).unwrap().ends_with(",R"));
        let bare = ClickStream::new(vec![1.0], None, 10.0, 1).unwrap();
        assert!(click_stream_csv(&bare).starts_with("time_ns\n"));
    }

    #[test]
    fn utc_formatting_matches_known_instants() {
        assert_eq!(format_utc(0), "1970-01-01T00:00:00Z");
        assert_eq!(format_utc(946_684_800), "2000-01-01T00:00:00Z");
        assert_eq!(format_utc(1_000_000_000), "2001-09-09T01:46:40Z");
    }

    #[test]
    fn manifest_records_checksums_of_every_data_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write_text("a.csv", "x,y\n1,2\n").unwrap();
        #[derive(Serialize)]
        struct S {
            value: f64,
        }
        out.write_json("summary.json", &S { value: 0.28 }).unwrap();
        let config = Config::default();
        out.finish(&config, "spectrum", 946_684_800, 1.25).unwrap();

        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(manifest["command"], "spectrum");
        assert_eq!(manifest["wall_clock_utc"], "2000-01-01T00:00:00Z");
        let files = manifest["files"].as_object().unwrap();
        assert_eq!(files["a.csv"], sha256_hex(b"x,y\n1,2\n"));
        assert!(files.contains_key("summary.json"));
        assert!(files.contains_key("resolved_config.toml"));
        assert!(!files.contains_key("manifest.json"));
        // The resolved config loads back to the one the run used.
        let reloaded = Config::from_file(&dir.path().join("resolved_config.toml")).unwrap();
        assert_eq!(reloaded, config);
        // Sanity anchor for the checksum helper itself.
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
