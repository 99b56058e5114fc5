//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{Format, RunConfig, Suite};
use super::decay::fit_decay;
use super::emit::{emit_outputs, read_records, to_json, write_manifest};
use super::scan::{lr_for_model, run_scan};
use crate::error::{io_err, Error, Result};
use crate::model;
use crate::thermal;

pub const EXIT_OK: i32 = 0;
/// A pass flag was false or a suite errored.
pub const EXIT_FAILED: i32 = 1;
/// Bad arguments, configuration or IO.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "thermocorr",
    version,
    about = "Exact-diagonalization checks of correlation, coherence and entanglement bounds in thermal spin lattices",
    after_help = "Exit status: 0 when every record passes, 1 when a pass flag is false or a suite errored, 2 on usage, configuration or IO errors.\nEvery flag can also be set through the THERMOCORR_* variable shown next to it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured suites and write records, manifest and plots.
    Scan(ScanArgs),
    /// Fit an exponential decay in R to one quantity of a records file.
    Fit(FitArgs),
    /// Re-emit CSV/JSON/SVG outputs from a records file.
    Emit(EmitArgs),
    /// Sample commutator norms for the configured model and fit Lieb-Robinson parameters.
    LrFit(LrFitArgs),
    /// Parse and check a configuration file.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Run configuration (JSON).
    #[arg(long, env = "THERMOCORR_CONFIG")]
    pub config: PathBuf,
    /// Output directory; overrides out_dir in the config.
    #[arg(long, env = "THERMOCORR_OUT")]
    pub out: Option<PathBuf>,
    /// Seed for randomized searches; overrides the config.
    #[arg(long, env = "THERMOCORR_SEED")]
    pub seed: Option<u64>,
    /// Comma-separated suites (qc,skew,fisher,ppt,bp,lr); overrides the config.
    #[arg(long, env = "THERMOCORR_SUITES")]
    pub suites: Option<String>,
    /// Largest Hilbert-space dimension to diagonalize.
    #[arg(long, env = "THERMOCORR_MAX_DIM")]
    pub max_dim: Option<usize>,
    /// Worker threads for independent scan points.
    #[arg(long, env = "THERMOCORR_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Directory holding records.json; decay_fit.json is written there.
    #[arg(long, env = "THERMOCORR_OUT")]
    pub out: PathBuf,
    /// Records file, if not <out>/records.json.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Quantity to fit, e.g. correlation:zz.
    #[arg(long)]
    pub quantity: String,
    /// Only use records at this beta.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    /// Output directory.
    #[arg(long, env = "THERMOCORR_OUT")]
    pub out: PathBuf,
    /// Records file, if not <out>/records.json.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Comma-separated formats (csv,json,svg).
    #[arg(long, default_value = "csv,json,svg")]
    pub formats: String,
}

#[derive(Debug, Args)]
pub struct LrFitArgs {
    #[arg(long, env = "THERMOCORR_CONFIG")]
    pub config: PathBuf,
    #[arg(long, env = "THERMOCORR_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "THERMOCORR_MAX_DIM")]
    pub max_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, env = "THERMOCORR_CONFIG")]
    pub config: PathBuf,
}

fn parse_formats(s: &str) -> Result<Vec<Format>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| match x.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            o => Err(Error::Config(format!("unknown format '{o}'"))),
        })
        .collect()
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(io_err(p))?;
    }
    std::fs::write(path, body).map_err(io_err(path))
}

/// Applies command-line overrides to a loaded configuration.
pub fn apply_overrides(
    mut cfg: RunConfig,
    seed: Option<u64>,
    suites: Option<&str>,
    max_dim: Option<usize>,
    workers: Option<usize>,
) -> Result<RunConfig> {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(s) = suites {
        cfg.suites = Suite::parse_list(s)?;
    }
    if let Some(m) = max_dim {
        cfg.max_dim = m;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn scan(a: ScanArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    let cfg = apply_overrides(cfg, a.seed, a.suites.as_deref(), a.max_dim, a.workers)?;
    let dir = out_dir(a.out, &cfg);
    let res = run_scan(&cfg)?;
    emit_outputs(&res.records, &cfg.formats, &dir)?;
    write_manifest(&res.manifest, &dir)?;
    for e in &res.manifest.errors {
        eprintln!("error: {e}");
    }
    for r in res.records.iter().filter(|r| !r.pass && r.error.is_none()) {
        eprintln!(
            "fail: {} beta={} A={:?} B={:?} value={:?} bound={:?}",
            r.quantity, r.beta, r.a, r.b, r.value, r.bound
        );
    }
    println!(
        "{} records, {} failed, {} errors -> {}",
        res.manifest.records,
        res.manifest.failed,
        res.manifest.errors.len(),
        dir.display()
    );
    Ok(if res.manifest.ok() { EXIT_OK } else { EXIT_FAILED })
}

fn fit(a: FitArgs) -> Result<i32> {
    let path = a.records.unwrap_or_else(|| a.out.join("records.json"));
    let mut recs = read_records(&path)?;
    if let Some(b) = a.beta {
        recs.retain(|r| (r.beta - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    let f = fit_decay(&recs, &a.quantity)?;
    let body = to_json(&f)?;
    write_file(&a.out.join("decay_fit.json"), &body)?;
    print!("{body}");
    Ok(EXIT_OK)
}

fn emit(a: EmitArgs) -> Result<i32> {
    let path = a.records.unwrap_or_else(|| a.out.join("records.json"));
    let recs = read_records(&path)?;
    let formats = parse_formats(&a.formats)?;
    for p in emit_outputs(&recs, &formats, &a.out)? {
        println!("{}", p.display());
    }
    Ok(if recs.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_FAILED })
}

fn lr_fit(a: LrFitArgs) -> Result<i32> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(m) = a.max_dim {
        cfg.max_dim = m;
    }
    let dim = 1usize.checked_shl(cfg.n_sites() as u32).unwrap_or(usize::MAX);
    if dim > cfg.max_dim {
        return Err(Error::SizeCap(format!("dimension {dim} exceeds max_dim {}", cfg.max_dim)));
    }
    let h = model::build_model(&cfg.model)?;
    let spec = thermal::spectral_decompose_mat(&h.matrix()?, h.space.clone())?;
    let summary = lr_for_model(&cfg, &h, &spec, true)?;
    let body = to_json(&summary)?;
    let dir = out_dir(a.out, &cfg);
    write_file(&dir.join("lr_fit.json"), &body)?;
    match summary.params {
        Some(p) => println!("C = {:.6e}, v = {:.6e}, mu = {:.6e} -> {}", p.c, p.v, p.mu, dir.display()),
        None => println!("no propagation between the sampled sites -> {}", dir.display()),
    }
    Ok(EXIT_OK)
}

fn validate(a: ValidateArgs) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    println!("ok {}", cfg.hash());
    Ok(EXIT_OK)
}

pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Scan(a) => scan(a),
        Command::Fit(a) => fit(a),
        Command::Emit(a) => emit(a),
        Command::LrFit(a) => lr_fit(a),
        Command::ValidateConfig(a) => validate(a),
    }
}

/// Parses arguments, runs the verb and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Io { .. } | Error::Json(_) | Error::SizeCap(_) => EXIT_USAGE,
                _ => EXIT_FAILED,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_apply() {
        let c = apply_overrides(RunConfig::example(4), Some(9), Some("fisher"), Some(64), Some(2)).unwrap();
        assert_eq!((c.seed, c.max_dim, c.workers), (9, 64, 2));
        assert_eq!(c.suites, vec![Suite::Fisher]);
        assert!(apply_overrides(RunConfig::example(4), None, Some("bogus"), None, None).is_err());
    }
}
