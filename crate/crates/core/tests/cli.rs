use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use thermocorr::cli::{self, emit, fit_decay, DecayFit, Format, RegionPair, RunConfig, ScanRecord, Suite};
use thermocorr::kernels::LrParams;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn schema() -> Value {
    let s = std::fs::read_to_string(manifest_dir().join("schema/run_config.schema.json")).unwrap();
    serde_json::from_str(&s).unwrap()
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_thermocorr"));
    for k in ["CONFIG", "OUT", "SEED", "SUITES", "MAX_DIM", "WORKERS"] {
        c.env_remove(format!("THERMOCORR_{k}"));
    }
    c
}

fn small_config() -> RunConfig {
    let mut c = RunConfig::example(5);
    c.betas = vec![0.5, 1.0];
    c.observables.push(cli::ObservableSpec { name: "xx".into(), a: "X".into(), b: "X".into() });
    c.suites = vec![Suite::Qc, Suite::Skew, Suite::Fisher, Suite::Ppt];
    c.lr.pinned = Some(LrParams { c: 2.0, v: 4.0, mu: 1.0 });
    c
}

fn write_config(dir: &Path, c: &RunConfig) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, c.to_json()).unwrap();
    p
}

fn scan(config: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    bin()
        .args(["scan", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn shipped_configs_match_the_schema() {
    let v = jsonschema::validator_for(&schema()).unwrap();
    let mut seen = 0;
    for e in std::fs::read_dir(manifest_dir().join("configs")).unwrap() {
        let p = e.unwrap().path();
        if p.extension().and_then(|x| x.to_str()) != Some("json") {
            continue;
        }
        let inst: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        let errs: Vec<String> = v.iter_errors(&inst).map(|e| e.to_string()).collect();
        assert!(errs.is_empty(), "{}: {errs:?}", p.display());
        RunConfig::load(&p).unwrap();
        seen += 1;
    }
    assert!(seen > 0);
    for n in [3, 6, 10] {
        let inst: Value = serde_json::from_str(&RunConfig::example(n).to_json()).unwrap();
        assert!(v.is_valid(&inst));
    }
    let mut bad: Value = serde_json::from_str(&small_config().to_json()).unwrap();
    bad["tolerance"] = Value::from(1e-9);
    assert!(!v.is_valid(&bad));
    let mut bad: Value = serde_json::from_str(&small_config().to_json()).unwrap();
    bad["suites"] = serde_json::json!(["qc", "magic"]);
    assert!(!v.is_valid(&bad));
}

#[test]
fn schema_lists_exactly_the_config_fields() {
    let s = schema();
    let schema_keys: BTreeSet<String> = s["properties"].as_object().unwrap().keys().cloned().collect();
    let inst: Value = serde_json::from_str(&RunConfig::example(4).to_json()).unwrap();
    let config_keys: BTreeSet<String> = inst.as_object().unwrap().keys().cloned().collect();
    assert_eq!(schema_keys, config_keys);
}

#[test]
fn empty_suites_give_a_manifest_only() {
    let mut c = small_config();
    c.suites.clear();
    let out = cli::run_scan(&c).unwrap();
    assert!(out.records.is_empty());
    assert!(out.manifest.ok());
    assert_eq!(out.manifest.records, 0);
}

#[test]
fn validate_config_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), &small_config());
    let o = bin().args(["validate-config", "--config"]).arg(&good).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.trim(), format!("ok {}", small_config().hash()));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"model": {"preset": "tfi", "geometry": {"kind": "chain", "n": 4}}, "betas": [-1]}"#).unwrap();
    let o = bin().args(["validate-config", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["validate-config", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn size_cap_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let o = scan(&cfg, &dir.path().join("out"), &["--max-dim", "16"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_is_deterministic_and_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = scan(&cfg, &a, &["--seed", "3"]);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    let ob = scan(&cfg, &b, &["--seed", "3", "--workers", "3"]);
    assert_eq!(ob.status.code(), Some(0));
    for f in ["records.csv", "records.json", "decay.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    // the worker count is part of the hashed config and nothing else
    let strip = |d: &Path| {
        let mut m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
        m.as_object_mut().unwrap().remove("config_hash");
        m
    };
    assert_eq!(strip(&a), strip(&b));

    let recs = emit::read_records(&a.join("records.json")).unwrap();
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| r.pass == r.recompute_pass()));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["records"].as_u64(), Some(recs.len() as u64));
    assert_eq!(manifest["seed"].as_u64(), Some(3));

    // CSV rows carry the same numbers as the JSON records
    let mut rdr = csv::Reader::from_path(a.join("records.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.join(","), emit::CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), recs.len());
    let num = |s: &str| if s.is_empty() { None } else { Some(s.parse::<f64>().unwrap()) };
    let sites = |s: &str| s.split(';').filter(|x| !x.is_empty()).map(|x| x.parse::<usize>().unwrap()).collect::<Vec<_>>();
    for (row, r) in rows.iter().zip(&recs) {
        assert_eq!(&row[0], r.model_hash);
        assert_eq!(row[1].parse::<usize>().unwrap(), r.n);
        assert_eq!(row[2].parse::<f64>().unwrap(), r.beta);
        assert_eq!(sites(&row[3]), r.a);
        assert_eq!(sites(&row[4]), r.b);
        assert_eq!(row[5].parse::<usize>().unwrap(), r.r);
        assert_eq!(&row[6], r.quantity);
        assert_eq!(num(&row[7]), r.value);
        assert_eq!(num(&row[8]), r.bound);
        assert_eq!(row[9].parse::<bool>().unwrap(), r.pass);
    }

    // one polyline per quantity with a positive value
    let svg = std::fs::read_to_string(a.join("decay.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    let quantities: BTreeSet<&str> = recs
        .iter()
        .filter(|r| r.value.is_some_and(|v| v.is_finite() && v > 0.0))
        .map(|r| r.quantity.as_str())
        .collect();
    assert_eq!(polylines, quantities.len());

    // emit reproduces the files from records.json
    let c = dir.path().join("c");
    let o = bin().args(["emit", "--out"]).arg(&c).arg("--records").arg(a.join("records.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    for f in ["records.csv", "records.json", "decay.svg"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(c.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn suites_env_override_and_failing_suite_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small_config());
    let out = dir.path().join("env");
    let o = scan(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let o = bin()
        .env("THERMOCORR_SUITES", "")
        .env("THERMOCORR_CONFIG", &cfg)
        .env("THERMOCORR_OUT", &out)
        .arg("scan")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(csv, format!("{}\n", emit::CSV_HEADER));

    // the pipeline needs |A|, |B| >= 3 ell; single-site pairs produce error records
    let o = scan(&cfg, &dir.path().join("bp"), &["--suites", "bp"]);
    assert_eq!(o.status.code(), Some(1));
    let recs = emit::read_records(&dir.path().join("bp/records.json")).unwrap();
    assert!(!recs.is_empty() && recs.iter().all(|r| r.error.is_some() && !r.pass));
}

#[test]
fn fit_verb_writes_decay_fit() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_config();
    c.model = thermocorr::model::ModelSpec::tfi_chain(6, 1.0, 1.0);
    c.pairs = (2..6).map(|r| RegionPair { a: vec![0], b: vec![r] }).collect();
    c.suites = vec![Suite::Qc];
    c.search.max_dim = 16;
    c.formats = vec![Format::Json];
    let cfg = write_config(dir.path(), &c);
    let out = dir.path().join("o");
    assert_eq!(scan(&cfg, &out, &[]).status.code(), Some(0));
    let o = bin()
        .args(["fit", "--quantity", "correlation:zz", "--beta", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let written: DecayFit = serde_json::from_str(&std::fs::read_to_string(out.join("decay_fit.json")).unwrap()).unwrap();
    let mut recs = emit::read_records(&out.join("records.json")).unwrap();
    recs.retain(|r| r.beta == 1.0);
    assert_eq!(written, fit_decay(&recs, "correlation:zz").unwrap());
    assert_eq!(written.points, 4);
    assert!(written.xi_measured > 0.0);

    let o = bin().args(["fit", "--quantity", "no_such_quantity", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

/// The measured correlation length of the connected ZZ correlation stays below
/// xi_beta built from the fitted Lieb-Robinson parameters.
#[test]
fn measured_decay_is_within_xi_beta() {
    let mut c = RunConfig::example(8);
    c.betas = vec![1.0];
    c.suites = vec![Suite::Qc];
    c.pairs = (1..8).map(|r| RegionPair { a: vec![0], b: vec![r] }).collect();
    let out = cli::run_scan(&c).unwrap();
    assert!(out.manifest.ok(), "{:?}", out.manifest.errors);
    let lr = out.manifest.lr.as_ref().unwrap();
    assert_eq!(lr.source, "fitted");
    let xi_beta = out.manifest.constants[0].xi;
    let recs: Vec<ScanRecord> = out.records;
    let f = fit_decay(&recs, "correlation:zz").unwrap();
    assert!(f.points >= 4);
    assert!(f.xi_measured > 0.0 && f.xi_measured <= xi_beta, "{} vs {xi_beta}", f.xi_measured);
}
