//! Scan orchestration: suites over betas and region pairs, one record per checked inequality.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::config::{short_hash, ObservableSpec, RegionPair, RunConfig, Suite};
use crate::bp;
use crate::coherence;
use crate::entangle::{self, PptInput};
use crate::error::{Error, Result};
use crate::hilbert::{self, pauli, OperatorMatrix};
use crate::kernels::{self, BoundConstants, LrParams, ModelParams};
use crate::linalg;
use crate::lr::{self, LrFit, LrSample};
use crate::model::{self, Hamiltonian};
use crate::qcorr;
use crate::thermal::{self, GibbsState, SpectralDecomposition};

/// Slack used for every pass flag.
pub const PASS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub model_hash: String,
    pub n: usize,
    pub beta: f64,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub r: usize,
    pub quantity: String,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub inputs_hash: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScanRecord {
    /// value <= bound + PASS_TOL; false when either side is missing.
    pub fn recompute_pass(&self) -> bool {
        match (self.value, self.bound) {
            (Some(v), Some(b)) => v.is_finite() && !b.is_nan() && v <= b + PASS_TOL,
            _ => false,
        }
    }

    pub fn cmp_key(&self, o: &Self) -> Ordering {
        self.quantity
            .cmp(&o.quantity)
            .then(self.beta.total_cmp(&o.beta))
            .then(self.a.cmp(&o.a))
            .then(self.b.cmp(&o.b))
            .then(self.r.cmp(&o.r))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrSummary {
    /// "pinned" or "fitted".
    pub source: String,
    pub params: Option<LrParams>,
    pub fit: Option<LrFit>,
    /// Samples taken alongside pinned parameters; a fit carries its own.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<LrSample>,
}

impl LrSummary {
    pub fn samples(&self) -> &[LrSample] {
        match &self.fit {
            Some(f) => &f.samples,
            None => &self.samples,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub linalg: String,
    pub config_hash: String,
    pub model_hash: String,
    pub seed: u64,
    pub site_ordering: String,
    pub n: usize,
    pub dim: usize,
    pub suites: Vec<Suite>,
    pub model_params: Option<ModelParams>,
    pub lr: Option<LrSummary>,
    pub constants: Vec<BoundConstants>,
    pub records: usize,
    pub failed: usize,
    pub errors: Vec<String>,
}

impl Manifest {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.errors.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ScanOutput {
    pub records: Vec<ScanRecord>,
    pub manifest: Manifest,
}

pub const SITE_ORDERING: &str = "site 0 is the leftmost Kronecker factor";

struct Ctx<'a> {
    cfg: &'a RunConfig,
    h: &'a Hamiltonian,
    spec: Arc<SpectralDecomposition>,
    model_hash: String,
    lr: Option<std::result::Result<LrSummary, String>>,
    /// Per beta, in config order.
    constants: Vec<std::result::Result<BoundConstants, String>>,
}

#[derive(Clone, Copy, Debug)]
enum Task {
    Pair { beta: usize, pair: usize },
    Bp { beta: usize, pair: usize },
    Global { beta: usize },
    Lr,
}

fn needs_constants(s: Suite) -> bool {
    !matches!(s, Suite::Lr)
}

fn model_params(h: &Hamiltonian) -> ModelParams {
    ModelParams {
        g: h.g,
        k: h.k as f64,
        d0: h.space.d0() as f64,
        gamma: h.lattice.gamma().gamma,
        dim: h.lattice.dim as f64,
    }
}

impl Ctx<'_> {
    fn record(
        &self,
        beta: f64,
        a: &[usize],
        b: &[usize],
        r: usize,
        quantity: String,
        value: f64,
        bound: f64,
        k: Option<&BoundConstants>,
    ) -> ScanRecord {
        let inputs_hash = short_hash(&(k, a, b, r, &quantity, self.h.n()));
        let mut rec = ScanRecord {
            model_hash: self.model_hash.clone(),
            n: self.h.n(),
            beta,
            a: a.to_vec(),
            b: b.to_vec(),
            r,
            quantity,
            value: Some(value),
            bound: Some(bound),
            inputs_hash,
            pass: false,
            error: None,
        };
        rec.pass = rec.recompute_pass();
        rec
    }

    fn error_record(&self, beta: f64, a: &[usize], b: &[usize], quantity: &str, msg: String) -> ScanRecord {
        ScanRecord {
            model_hash: self.model_hash.clone(),
            n: self.h.n(),
            beta,
            a: a.to_vec(),
            b: b.to_vec(),
            r: if a.is_empty() || b.is_empty() { 0 } else { self.h.lattice.set_dist(a, b) },
            quantity: quantity.to_string(),
            value: None,
            bound: None,
            inputs_hash: short_hash(&(quantity, a, b, self.h.n())),
            pass: false,
            error: Some(msg),
        }
    }

    fn constants(&self, beta: usize) -> Result<&BoundConstants> {
        self.constants[beta].as_ref().map_err(|e| Error::Refused(e.clone()))
    }

    fn gibbs(&self, beta: usize) -> Result<GibbsState> {
        thermal::gibbs_state(&self.spec, self.cfg.betas[beta])
    }

    fn observable(&self, word: &str, sites: &[usize]) -> Result<OperatorMatrix> {
        let w = ObservableSpec::word_for(word, sites.len())?;
        let m = pauli::word(&w).ok_or_else(|| Error::Config(format!("bad Pauli word {w}")))?;
        hilbert::embed_local(&m, sites, &self.h.space)
    }

    fn run(&self, task: Task) -> Vec<ScanRecord> {
        match task {
            Task::Pair { beta, pair } => {
                let mut out = Vec::new();
                let p = &self.cfg.pairs[pair];
                let (a, b) = sorted_pair(p);
                let bv = self.cfg.betas[beta];
                for suite in [Suite::Qc, Suite::Skew, Suite::Ppt] {
                    if !self.cfg.suites.contains(&suite) {
                        continue;
                    }
                    let res = match suite {
                        Suite::Qc => self.qc(beta, pair, &a, &b),
                        Suite::Skew => self.skew_pair(beta, &a, &b),
                        _ => self.ppt(beta, pair, &a, &b),
                    };
                    match res {
                        Ok(mut v) => out.append(&mut v),
                        Err(e) => out.push(self.error_record(bv, &a, &b, suite.name(), e.to_string())),
                    }
                }
                out
            }
            Task::Bp { beta, pair } => {
                let (a, b) = sorted_pair(&self.cfg.pairs[pair]);
                self.bp(beta, &a, &b)
                    .unwrap_or_else(|e| vec![self.error_record(self.cfg.betas[beta], &a, &b, "bp", e.to_string())])
            }
            Task::Global { beta } => {
                self.global(beta).unwrap_or_else(|e| vec![self.error_record(self.cfg.betas[beta], &[], &[], "global", e.to_string())])
            }
            Task::Lr => self.lr_records().unwrap_or_else(|e| vec![self.error_record(0.0, &[], &[], "lr", e.to_string())]),
        }
    }

    fn qc(&self, beta: usize, pair: usize, a: &[usize], b: &[usize]) -> Result<Vec<ScanRecord>> {
        let k = self.constants(beta)?;
        let g = self.gibbs(beta)?;
        let bv = self.cfg.betas[beta];
        let mut out = Vec::new();
        for obs in &self.cfg.observables {
            let oa = self.observable(&obs.a, a)?;
            let ob = self.observable(&obs.b, b)?;
            let (cert, _) = qcorr::qc_certificate(&g, &self.h.lattice, &oa, &ob, None)?;
            let t1 = qcorr::theorem1_rhs(Some(k), &self.h.lattice, a, b, Some(&cert))?;
            let r = t1.r;
            let name = |q: &str| format!("{q}:{}", obs.name);
            // the theorem bounds the convex roof, not the state correlation: only |C| <= 2 applies here
            out.push(self.record(bv, a, b, r, name("correlation"), cert.state_correlation, 2.0, None));
            out.push(self.record(bv, a, b, r, name("qc_certificate"), cert.bound, t1.rhs, Some(k)));
            out.push(self.record(bv, a, b, r, name("qc_average"), cert.decomposition_average, t1.rhs, Some(k)));
            if self.h.space.dim() <= self.cfg.search.max_dim {
                let mut search = self.cfg.search.clone();
                search.seed = self.cfg.seed.wrapping_mul(1_000_003).wrapping_add((beta * 1000 + pair) as u64);
                let est = qcorr::qc_heuristic(&g.spectrum.matrix(), &oa, &ob, &search, &[])?;
                out.push(self.record(bv, a, b, r, name("qc_estimate"), est.value, t1.rhs, Some(k)));
            }
        }
        Ok(out)
    }

    fn skew_pair(&self, beta: usize, a: &[usize], b: &[usize]) -> Result<Vec<ScanRecord>> {
        let k = self.constants(beta)?;
        let g = self.gibbs(beta)?;
        let bv = self.cfg.betas[beta];
        let lat = &self.h.lattice;
        let r = lat.set_dist(a, b);
        let rhs = k.theorem3_rhs(lat.surface(a).len(), lat.surface(b).len(), r);
        let mut out = Vec::new();
        for obs in &self.cfg.observables {
            let oa = self.observable(&obs.a, a)?;
            let ob = self.observable(&obs.b, b)?;
            let qs = coherence::q_alpha_many(&g.spectrum, &oa.mat, &ob.mat, &self.cfg.alphas)?;
            for (alpha, q) in self.cfg.alphas.iter().zip(qs) {
                out.push(self.record(bv, a, b, r, format!("q_alpha_{alpha}:{}", obs.name), q.norm(), rhs, Some(k)));
            }
        }
        Ok(out)
    }

    fn ppt(&self, beta: usize, pair: usize, a: &[usize], b: &[usize]) -> Result<Vec<ScanRecord>> {
        let k = self.constants(beta)?;
        let g = self.gibbs(beta)?;
        let bv = self.cfg.betas[beta];
        let mut ab: Vec<usize> = a.iter().chain(b).copied().collect();
        ab.sort_unstable();
        let (rho, sub) = hilbert::partial_trace_mat(&g.spectrum.matrix(), &self.h.space, &ab)?;
        let rho = linalg::hermitian_part(&rho);
        let r = self.h.lattice.set_dist(a, b);
        let dab = rho.nrows();
        let da = sub.sub_dim(a.len());
        let trivial = (da.min(dab / da) as f64).ln();
        let rep = entangle::ppt_analysis(&rho, &sub, a)?;
        let mut out = vec![self.record(bv, a, b, r, "negativity".into(), rep.negativity, trivial, Some(k))];
        // any PPT state gives an upper estimate of the PPT relative entropy
        let upper = if dab <= self.cfg.solver.max_dim {
            let mut solver = self.cfg.solver.clone();
            solver.seed = self.cfg.seed.wrapping_mul(1_000_003).wrapping_add((beta * 1000 + pair) as u64);
            entangle::ppt_relative_exact(&rho, &sub, a, &solver, &[])?.value
        } else {
            let up = entangle::ppt_relative_upper(&rho, &sub, a, PptInput::Delta(rep.delta))?;
            match (up.relative_entropy, up.sigma_is_ppt) {
                (Some(s), Some(true)) => s.min(trivial),
                _ => trivial,
            }
        };
        let rhs = k.theorem2_rhs(dab as f64, r);
        out.push(self.record(bv, a, b, r, "ppt_relative".into(), upper, rhs, Some(k)));
        Ok(out)
    }

    fn bp(&self, beta: usize, a: &[usize], b: &[usize]) -> Result<Vec<ScanRecord>> {
        let k = self.constants(beta)?;
        let bv = self.cfg.betas[beta];
        let rep = bp::theorem2_pipeline(self.h, bv, a, b, self.cfg.bp.ell, k, &self.cfg.bp.pipeline)?;
        let r = rep.r;
        let mut out = vec![
            self.record(bv, a, b, r, "bp_relative_entropy".into(), rep.relative_entropy, rep.rhs, Some(k)),
            self.record(bv, a, b, r, "bp_phi_norm".into(), rep.phi_norm, rep.phi_norm_bound, Some(k)),
            self.record(bv, a, b, r, "bp_sigma_negativity".into(), rep.sigma_prime_ppt.negativity, 0.0, Some(k)),
        ];
        if let Some(e) = rep.identity_error {
            out.push(self.record(bv, a, b, r, "bp_identity".into(), e, rep.lemma7_rhs, Some(k)));
        }
        if let Some(o) = &rep.oracle {
            out.push(self.record(bv, a, b, r, "bp_oracle".into(), o.value, rep.relative_entropy, Some(k)));
        }
        Ok(out)
    }

    fn global(&self, beta: usize) -> Result<Vec<ScanRecord>> {
        let k = self.constants(beta)?;
        let g = self.gibbs(beta)?;
        let bv = self.cfg.betas[beta];
        let n = self.h.n();
        let d = self.h.space.dim();
        let mut kz = linalg::zeros(d, d);
        for i in 0..n {
            hilbert::embed_add(&pauli::z(), &[i], &self.h.space, &mut kz)?;
        }
        let mut out = Vec::new();
        if self.cfg.suites.contains(&Suite::Skew) {
            let rhs = k.corollary2_skew_rhs(n);
            for &alpha in &self.cfg.alphas {
                let v = coherence::skew_information(&g.spectrum, &kz, alpha)?;
                out.push(self.record(bv, &[], &[], 0, format!("skew_alpha_{alpha}"), v, rhs, Some(k)));
            }
        }
        if self.cfg.suites.contains(&Suite::Fisher) {
            let f = coherence::fisher_information(&g.spectrum, &kz);
            out.push(self.record(bv, &[], &[], 0, "fisher".into(), f, k.corollary2_fisher_rhs(n), Some(k)));
            let half = coherence::skew_information(&g.spectrum, &kz, 0.5)?;
            out.push(self.record(bv, &[], &[], 0, "fisher_quarter".into(), f / 4.0, 2.0 * half, None));
        }
        Ok(out)
    }

    fn lr_records(&self) -> Result<Vec<ScanRecord>> {
        let summary = match &self.lr {
            Some(Ok(s)) => s,
            Some(Err(e)) => return Err(Error::Refused(e.clone())),
            None => return Err(Error::Invalid("Lieb-Robinson data not prepared".into())),
        };
        let params = summary
            .params
            .ok_or_else(|| Error::Refused("no propagation between the sampled sites".into()))?;
        Ok(summary
            .samples()
            .iter()
            .map(|s| {
                let bound = lr::lr_bound(&params, s.t, s.r, s.surface);
                self.record(0.0, &[], &[], s.r, format!("lr_t={:.6}", s.t), s.value, bound, None)
            })
            .collect())
    }
}

fn sorted_pair(p: &RegionPair) -> (Vec<usize>, Vec<usize>) {
    let mut a = p.a.clone();
    a.sort_unstable();
    let mut b = p.b.clone();
    b.sort_unstable();
    (a, b)
}

/// Lieb-Robinson parameters for the model, either pinned or fitted from exact samples.
/// With pinned parameters the samples are only taken when `sample` is set.
pub fn lr_for_model(cfg: &RunConfig, h: &Hamiltonian, spec: &SpectralDecomposition, sample: bool) -> Result<LrSummary> {
    if let Some(p) = cfg.lr.pinned {
        let samples = if sample { lr::lr_samples(h, spec, &cfg.lr.samples)? } else { vec![] };
        return Ok(LrSummary { source: "pinned".into(), params: Some(p), fit: None, samples });
    }
    let samples = lr::lr_samples(h, spec, &cfg.lr.samples)?;
    let fit = lr::fit_lr_params(&samples, &cfg.lr.fit)?;
    Ok(LrSummary { source: "fitted".into(), params: fit.params(), fit: Some(fit), samples: vec![] })
}

fn check_cap(cfg: &RunConfig) -> Result<usize> {
    let n = cfg.n_sites();
    let dim = if n >= usize::BITS as usize - 1 { usize::MAX } else { 1usize << n };
    if dim > cfg.max_dim {
        return Err(Error::SizeCap(format!("2^{n} = {dim} exceeds max_dim {}", cfg.max_dim)));
    }
    Ok(dim)
}

pub fn run_scan(cfg: &RunConfig) -> Result<ScanOutput> {
    cfg.validate()?;
    let dim = check_cap(cfg)?;
    let h = model::build_model(&cfg.model)?;
    let model_hash = short_hash(&cfg.model);
    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        linalg: "faer 0.24".into(),
        config_hash: cfg.hash(),
        model_hash: model_hash.clone(),
        seed: cfg.seed,
        site_ordering: SITE_ORDERING.into(),
        n: h.n(),
        dim,
        suites: cfg.suites.clone(),
        model_params: None,
        lr: None,
        constants: vec![],
        records: 0,
        failed: 0,
        errors: vec![],
    };
    if cfg.suites.is_empty() {
        return Ok(ScanOutput { records: vec![], manifest });
    }

    let spec = Arc::new(thermal::spectral_decompose_mat(&h.matrix()?, h.space.clone())?);
    let need_k = cfg.suites.iter().any(|&s| needs_constants(s));
    let lr_summary = (need_k || cfg.suites.contains(&Suite::Lr))
        .then(|| lr_for_model(cfg, &h, &spec, cfg.suites.contains(&Suite::Lr)).map_err(|e| format!("Lieb-Robinson fit failed: {e}")));
    if let Some(Ok(s)) = &lr_summary {
        manifest.lr = Some(s.clone());
    }
    let mut constants: Vec<std::result::Result<BoundConstants, String>> =
        vec![Err("bound constants not requested".into()); cfg.betas.len()];
    if need_k {
        let mp = model_params(&h);
        manifest.model_params = Some(mp);
        let lr_params: std::result::Result<LrParams, String> = if !h.short_range {
            Err("model is outside the short-range theory; bounds refused".into())
        } else {
            match &lr_summary {
                Some(Ok(s)) => s.params.ok_or_else(|| "Lieb-Robinson fit found no propagation".to_string()),
                Some(Err(e)) => Err(e.clone()),
                None => unreachable!(),
            }
        };
        if let Err(e) = &lr_params {
            manifest.errors.push(e.clone());
        }
        constants = cfg
            .betas
            .iter()
            .map(|&b| match &lr_params {
                Ok(p) => kernels::bound_constants(b, *p, mp).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            })
            .collect();
        manifest.constants = constants.iter().filter_map(|c| c.as_ref().ok().copied()).collect();
    }

    let mut tasks = Vec::new();
    let pair_suites = [Suite::Qc, Suite::Skew, Suite::Ppt].iter().any(|s| cfg.suites.contains(s));
    for beta in 0..cfg.betas.len() {
        if cfg.suites.contains(&Suite::Skew) || cfg.suites.contains(&Suite::Fisher) {
            tasks.push(Task::Global { beta });
        }
        for pair in 0..cfg.pairs.len() {
            if pair_suites {
                tasks.push(Task::Pair { beta, pair });
            }
            if cfg.suites.contains(&Suite::Bp) {
                tasks.push(Task::Bp { beta, pair });
            }
        }
    }
    if cfg.suites.contains(&Suite::Lr) {
        tasks.push(Task::Lr);
    }

    let ctx = Ctx { cfg, h: &h, spec, model_hash, lr: lr_summary, constants };
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<ScanRecord>> = Mutex::new(Vec::new());
    let workers = cfg.workers.min(tasks.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, AtomicOrdering::SeqCst);
                let Some(&task) = tasks.get(i) else { break };
                let recs = ctx.run(task);
                results.lock().expect("result lock").extend(recs);
            });
        }
    });
    let mut records = results.into_inner().expect("result lock");
    records.sort_by(|x, y| x.cmp_key(y));
    for r in &records {
        if let Some(e) = &r.error {
            manifest.errors.push(format!("{} beta={} A={:?} B={:?}: {e}", r.quantity, r.beta, r.a, r.b));
        }
    }
    manifest.records = records.len();
    manifest.failed = records.iter().filter(|r| !r.pass).count();
    Ok(ScanOutput { records, manifest })
}

