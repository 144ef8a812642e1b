//! CSV, gnuplot and manifest output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use protomn::density::Method;
use protomn::{Error, Result};

use crate::campaign::ResultRow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub rate: f64,
    pub omega: f64,
    pub gamma_star_db: f64,
    pub shannon_db: f64,
    pub gap_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub method: Method,
    pub rows: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubRow {
    pub snr_db: f64,
    pub tub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
}

pub fn thresholds_csv(rows: &[ThresholdRow]) -> String {
    let mut s = String::from("rate,omega,gamma_star_db,shannon_db,gap_db\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.6},{:.4},{:.4},{:.4}",
            r.rate, r.omega, r.gamma_star_db, r.shannon_db, r.gap_db
        );
    }
    s
}

pub fn tub_csv(rows: &[TubRow]) -> String {
    let mut s = String::from("snr_db,tub\n");
    for r in rows {
        let _ = writeln!(s, "{},{:.6e}", r.snr_db, r.tub);
    }
    s
}

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut s = String::from("alpha,beta,G\n");
    for r in rows {
        if r.g.is_finite() {
            let _ = writeln!(s, "{},{},{:.10e}", r.alpha, r.beta, r.g);
        } else if r.g == f64::NEG_INFINITY {
            // no codewords with these weights
            let _ = writeln!(s, "{},{},-inf", r.alpha, r.beta);
        } else {
            let _ = writeln!(s, "{},{},nan", r.alpha, r.beta);
        }
    }
    s
}

/// FER table. Wall-clock times are only written when `timing` is set, so
/// that the default output is reproducible.
pub fn fer_csv(rows: &[ResultRow], timing: bool) -> String {
    let mut s = String::from(
        "rate,realized_rate,omega,snr_db,frames,frame_errors,fer,avg_iterations,undetected_errors,composition_failures,completed",
    );
    s.push_str(if timing { ",wall_time\n" } else { "\n" });
    for r in rows {
        let _ = write!(
            s,
            "{},{:.6},{:.6},{},{},{},{:.6e},{:.4},{},{},{}",
            r.rate,
            r.realized_rate,
            r.omega,
            r.snr_db,
            r.frames,
            r.frame_errors,
            r.fer,
            r.avg_iterations,
            r.undetected_errors,
            r.composition_failures,
            r.completed
        );
        if timing {
            let _ = write!(s, ",{:.3}", r.wall_time);
        }
        s.push('\n');
    }
    s
}

/// Gnuplot data: one block per rate for the FER, then the bound, separated
/// by two blank lines so `index` can pick them.
pub fn curves_dat(rows: &[ResultRow], tub: &[TubRow]) -> String {
    let mut s = String::new();
    let mut rates: Vec<f64> = Vec::new();
    for r in rows {
        if !rates.contains(&r.rate) {
            rates.push(r.rate);
        }
    }
    let mut first = true;
    let mut sep = |s: &mut String| {
        if !first {
            s.push_str("\n\n");
        }
        first = false;
    };
    for rate in rates {
        sep(&mut s);
        let _ = writeln!(s, "# fer rate={rate}");
        for r in rows.iter().filter(|r| r.rate == rate && r.completed && r.frame_errors > 0) {
            let _ = writeln!(s, "{} {:.6e}", r.snr_db, r.fer);
        }
    }
    if !tub.is_empty() {
        sep(&mut s);
        s.push_str("# tub\n");
        for t in tub {
            let _ = writeln!(s, "{} {:.6e}", t.snr_db, t.tub);
        }
    }
    s
}

#[derive(Debug, Clone, Default)]
pub struct ReportInputs<'a> {
    pub results: Option<&'a [ResultRow]>,
    pub thresholds: Vec<ThresholdTable>,
    pub tub: Option<&'a [TubRow]>,
    pub growth: Option<&'a [GrowthRow]>,
    pub timing: bool,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    inputs: &'a serde_json::Value,
    files: Vec<String>,
    warnings: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ReportSummary {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes one CSV per dataset, an optional `curves.dat`, and
/// `manifest.json` describing `inputs` (configuration, seeds).
pub fn emit_reports(dir: &Path, data: &ReportInputs<'_>, inputs: &serde_json::Value) -> Result<ReportSummary> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut out = ReportSummary::default();
    let put = |name: &str, text: String, out: &mut ReportSummary| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &text)?;
        out.files.push(path);
        Ok(())
    };
    if let Some(rows) = data.results.filter(|r| !r.is_empty()) {
        put("fer.csv", fer_csv(rows, data.timing), &mut out)?;
    }
    for t in &data.thresholds {
        put(&format!("thresholds_{}.csv", t.method), thresholds_csv(&t.rows), &mut out)?;
    }
    if let Some(rows) = data.tub.filter(|r| !r.is_empty()) {
        put("tub.csv", tub_csv(rows), &mut out)?;
    }
    if let Some(rows) = data.growth.filter(|r| !r.is_empty()) {
        put("growth.csv", growth_csv(rows), &mut out)?;
    }
    let fer = data.results.unwrap_or(&[]);
    let tub = data.tub.unwrap_or(&[]);
    if !fer.is_empty() || !tub.is_empty() {
        put("curves.dat", curves_dat(fer, tub), &mut out)?;
    }
    if out.files.is_empty() {
        out.warnings.push("no results to report; wrote the manifest only".into());
    }
    let manifest = Manifest {
        tool: "protomn",
        version: env!("CARGO_PKG_VERSION"),
        inputs,
        files: out
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
        warnings: out.warnings.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    put("manifest.json", text, &mut out)?;
    Ok(out)
}
