//! Runs a small configured scan and writes CSV, JSON, SVG and the manifest
//! into a directory (default ./scan-out).

use std::path::PathBuf;

use thermocorr::cli::{self, emit, fit_decay, RunConfig, Suite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("scan-out"));
    let mut cfg = RunConfig::example(6);
    cfg.suites = vec![Suite::Qc, Suite::Skew, Suite::Fisher, Suite::Ppt, Suite::Lr];
    cfg.validate()?;
    let res = cli::run_scan(&cfg)?;
    std::fs::create_dir_all(&out)?;
    for p in emit::emit_outputs(&res.records, &cfg.formats, &out)? {
        println!("wrote {}", p.display());
    }
    println!("wrote {}", emit::write_manifest(&res.manifest, &out)?.display());
    println!("{} records, {} failed, {} errors", res.manifest.records, res.manifest.failed, res.manifest.errors.len());
    if let Ok(fit) = fit_decay(&res.records, "qc_certificate:zz") {
        println!("qc_certificate:zz decays with xi = {:.3} (r^2 {:.3})", fit.xi_measured, fit.r_squared);
    }
    Ok(())
}
