//! Run configuration, scans, decay fits and output files.

pub mod app;
pub mod config;
pub mod decay;
pub mod emit;
pub mod scan;

pub use app::run;
pub use config::{Format, ObservableSpec, RegionPair, RunConfig, Suite};
pub use decay::{fit_decay, DecayFit};
pub use emit::emit_outputs;
pub use scan::{lr_for_model, run_scan, LrSummary, Manifest, ScanOutput, ScanRecord, PASS_TOL};
