//! Correlation functions, the L_O filter, dressed operators, commuting local
//! approximations and upper bounds on the convex-roof quantum correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, OperatorMatrix, EIG_FLOOR};
use crate::kernels::{self, BoundConstants, KernelSpec, QuadConfig};
use crate::linalg::{self, c64, cx, CMat};
use crate::model::Lattice;
use crate::random;
use crate::roof::{self, RefineConfig, RoofObjective};
use crate::thermal::{GibbsState, StateSpectrum};

fn check_disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::Refused(format!("supports {a:?} and {b:?} overlap; A and B must be disjoint")));
    }
    Ok(())
}

/// tr(rho O_A O_B) - tr(rho O_A) tr(rho O_B).
pub fn correlation_fn(rho: &CMat, oa: &OperatorMatrix, ob: &OperatorMatrix) -> Result<c64> {
    check_disjoint(&oa.support, &ob.support)?;
    if rho.nrows() != oa.dim() || rho.nrows() != ob.dim() {
        return Err(Error::Dimension("state and observables differ in dimension".into()));
    }
    let ab = &oa.mat * &ob.mat;
    Ok(linalg::trace_prod(rho, &ab) - linalg::trace_prod(rho, &oa.mat) * linalg::trace_prod(rho, &ob.mat))
}

/// Correlation of an unnormalized vector: <AB> - <A><B> with p = <v|v>.
fn vector_correlation(v: &[c64], a: &CMat, b: &CMat) -> c64 {
    let p = linalg::inner(v, v).re;
    let av = linalg::matvec(a, v);
    let bv = linalg::matvec(b, v);
    let abv = linalg::matvec(a, &bv);
    (linalg::inner(v, &abv) - linalg::inner(v, &av) * linalg::inner(v, &bv) / p) / p
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LMode {
    Spectral,
    Integral,
    Localized { r: usize },
}

#[derive(Clone, Debug)]
pub struct LOperator {
    pub op: OperatorMatrix,
    pub mode: LMode,
    /// Quadrature error estimate (integral mode) or zero.
    pub quad_error: f64,
}

/// Weight 2 sqrt(p_i p_j) / (p_i + p_j) written through energies, 1 / cosh(beta w / 2).
fn gibbs_weight(beta: f64, ei: f64, ej: f64) -> f64 {
    1.0 / (0.5 * beta * (ei - ej)).cosh()
}

/// L_O for an arbitrary state from its spectrum.
pub fn l_spectral_state(st: &StateSpectrum, o: &CMat) -> CMat {
    let oe = st.to_eigenbasis(o);
    let p = &st.probs;
    let m = CMat::from_fn(oe.nrows(), oe.ncols(), |i, j| {
        let s = p[i] + p[j];
        let w = if s <= 0.0 { 1.0 } else { 2.0 * (p[i] * p[j]).sqrt() / s };
        oe[(i, j)] * w
    });
    st.from_eigenbasis(&m)
}

/// L_O in the Gibbs eigenbasis, input and output in that basis.
pub fn l_gibbs_eigenbasis(g: &GibbsState, oe: &CMat) -> CMat {
    let e = &g.hamiltonian.values;
    CMat::from_fn(oe.nrows(), oe.ncols(), |i, j| oe[(i, j)] * gibbs_weight(g.beta, e[i], e[j]))
}

/// tr_{X^c}(M) / D_{X^c} tensored with the identity on X^c.
pub fn localize(m: &CMat, space: &hilbert::SiteSpace, region: &[usize]) -> Result<OperatorMatrix> {
    let mut keep: Vec<usize> = space.labels().iter().copied().filter(|l| region.contains(l)).collect();
    if keep.len() == space.n() {
        return OperatorMatrix::with_support(m.clone(), space.clone(), keep);
    }
    if keep.is_empty() {
        let t = linalg::trace(m) / space.dim() as f64;
        return OperatorMatrix::with_support(linalg::scale(&linalg::identity(space.dim()), t), space.clone(), vec![]);
    }
    let (red, sub) = hilbert::partial_trace_mat(m, space, &keep)?;
    let dc = (space.dim() / sub.dim()) as f64;
    keep = sub.labels().to_vec();
    hilbert::embed_local(&linalg::scale_re(&red, 1.0 / dc), &keep, space)
}

pub fn l_operator(
    g: &GibbsState,
    o: &OperatorMatrix,
    mode: LMode,
    lattice: &Lattice,
    quad: &QuadConfig,
) -> Result<LOperator> {
    match mode {
        LMode::Spectral => {
            let oe = g.spectrum.to_eigenbasis(&o.mat);
            let m = g.spectrum.from_eigenbasis(&l_gibbs_eigenbasis(g, &oe));
            Ok(LOperator { op: OperatorMatrix::new(m, o.space.clone())?, mode, quad_error: 0.0 })
        }
        LMode::Integral => {
            if g.beta == 0.0 {
                return Ok(LOperator { op: o.clone(), mode, quad_error: 0.0 });
            }
            let r = kernels::weighted_operator_integral(&KernelSpec::FBeta { beta: g.beta }, &g.hamiltonian, &o.mat, quad)?;
            Ok(LOperator { op: OperatorMatrix::new(r.value, o.space.clone())?, mode, quad_error: r.error_estimate })
        }
        LMode::Localized { r } => {
            let full = l_operator(g, o, LMode::Spectral, lattice, quad)?;
            let region = lattice.ball(&o.support, r);
            Ok(LOperator { op: localize(&full.op.mat, &o.space, &region)?, mode, quad_error: 0.0 })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DressSign {
    /// rho^{1/2} L rho^{-1/2}
    Plus,
    /// rho^{-1/2} L rho^{1/2}
    Minus,
}

#[derive(Clone, Debug)]
pub struct Dressed {
    /// Matrix-power route.
    pub direct: CMat,
    /// O -+ integral g_beta(t) O(t) dt.
    pub kernel: CMat,
    pub discrepancy: f64,
    pub quad_error: f64,
    pub norm: f64,
    /// ||O|| ln(1 + beta ||ad_H O|| / ||O||) + 2 ||O||.
    pub claim_bound: f64,
}

/// Dressed L_O along both routes. The kernel route for `Plus` is O - int g_beta O(t) dt
/// and for `Minus` is O + int g_beta O(t) dt.
pub fn dressed_operator(g: &GibbsState, o: &OperatorMatrix, sign: DressSign, quad: &QuadConfig) -> Result<Dressed> {
    if !g.spectrum.is_full_rank() {
        return Err(Error::Singular("dressing needs a full-rank state".into()));
    }
    let l = g.spectrum.from_eigenbasis(&l_gibbs_eigenbasis(g, &g.spectrum.to_eigenbasis(&o.mat)));
    let half = g.spectrum.power(0.5)?;
    let mhalf = g.spectrum.power(-0.5)?;
    let direct = match sign {
        DressSign::Plus => &(&half * &l) * &mhalf,
        DressSign::Minus => &(&mhalf * &l) * &half,
    };
    let (kernel, quad_error) = if g.beta == 0.0 {
        (o.mat.clone(), 0.0)
    } else {
        let r = kernels::weighted_operator_integral(&KernelSpec::GBeta { beta: g.beta }, &g.hamiltonian, &o.mat, quad)?;
        let k = match sign {
            DressSign::Plus => linalg::sub(&o.mat, &r.value),
            DressSign::Minus => linalg::add(&o.mat, &r.value),
        };
        (k, r.error_estimate)
    };
    let discrepancy = linalg::op_norm(&linalg::sub(&direct, &kernel))?;
    let pmax = g.spectrum.probs.iter().fold(0.0f64, |a, &p| a.max(p));
    let pmin = g.spectrum.probs.iter().fold(1.0f64, |a, &p| a.min(p));
    let on = linalg::op_norm(&o.mat)?;
    // roundoff of the matrix-power route grows with the condition number of rho^{1/2}
    let tol = 10.0 * quad_error + 1e-12 * (pmax / pmin).sqrt() * on * (o.dim() as f64).sqrt() + 1e-9 * on;
    if discrepancy > tol {
        return Err(Error::Quadrature(format!(
            "dressed routes disagree by {discrepancy:e} (allowed {tol:e})"
        )));
    }
    let ad = linalg::op_norm(&linalg::commutator(&g.hamiltonian.apply(|e| cx(e, 0.0)), &o.mat))?;
    let claim_bound = if on == 0.0 { 0.0 } else { on * (1.0 + g.beta * ad / on).ln() + 2.0 * on };
    let norm = linalg::op_norm(&direct)?;
    Ok(Dressed { direct, kernel, discrepancy, quad_error, norm, claim_bound })
}

#[derive(Clone, Debug)]
pub struct CommutingApprox {
    pub la: OperatorMatrix,
    pub lb: OperatorMatrix,
    pub delta1: f64,
    pub delta2: f64,
    pub r1: usize,
    pub r2: usize,
    /// ||[L~_A, L~_B]||, zero up to roundoff.
    pub commutator: f64,
    /// Lieb-Robinson bounds on delta1, delta2 when constants are given.
    pub lr_bounds: Option<(f64, f64)>,
}

/// Default localization radius ceil(R / 2 - 1).
pub fn default_radius(r: usize) -> usize {
    ((r as f64) / 2.0 - 1.0).ceil().max(0.0) as usize
}

pub fn commuting_approx(
    g: &GibbsState,
    lattice: &Lattice,
    oa: &OperatorMatrix,
    ob: &OperatorMatrix,
    r1: usize,
    r2: usize,
    constants: Option<&BoundConstants>,
) -> Result<CommutingApprox> {
    check_disjoint(&oa.support, &ob.support)?;
    let dist = lattice.set_dist(&oa.support, &ob.support);
    if r1 + r2 >= dist {
        return Err(Error::Invalid(format!("r1 + r2 = {} must be below d(A, B) = {dist}", r1 + r2)));
    }
    let space = &oa.space;
    let la_e = l_gibbs_eigenbasis(g, &g.spectrum.to_eigenbasis(&oa.mat));
    let lb_e = l_gibbs_eigenbasis(g, &g.spectrum.to_eigenbasis(&ob.mat));
    let la = g.spectrum.from_eigenbasis(&la_e);
    let lb = g.spectrum.from_eigenbasis(&lb_e);
    let ta = localize(&la, space, &lattice.ball(&oa.support, r1))?;
    let tb = localize(&lb, space, &lattice.ball(&ob.support, r2))?;
    let delta1 = linalg::op_norm(&linalg::sub(&la, &ta.mat))?;
    let delta2 = linalg::op_norm(&linalg::sub(&lb, &tb.mat))?;
    let commutator = linalg::op_norm(&linalg::commutator(&ta.mat, &tb.mat))?;
    let lr_bounds = constants.map(|c| {
        (
            c.lemma4_delta_bound(lattice.surface(&oa.support).len(), dist),
            c.lemma4_delta_bound(lattice.surface(&ob.support).len(), dist),
        )
    });
    Ok(CommutingApprox { la: ta, lb: tb, delta1, delta2, r1, r2, commutator, lr_bounds })
}

/// Orthonormal basis diagonalizing two commuting Hermitian matrices.
/// Returns the basis and the largest off-diagonal residual.
pub fn joint_eigenbasis(a: &CMat, b: &CMat) -> Result<(CMat, f64)> {
    let scale = linalg::max_abs(a).max(linalg::max_abs(b)).max(1.0);
    let mix = linalg::add(a, &linalg::scale_re(b, std::f64::consts::PI));
    let e = linalg::eigh(&linalg::hermitian_part(&mix))?;
    let res = offdiag_residual(&e.vectors, a).max(offdiag_residual(&e.vectors, b));
    if res <= 1e-9 * scale {
        return Ok((e.vectors, res));
    }
    // two-stage: eigenspaces of a, then b inside each block
    let ea = linalg::eigh(&linalg::hermitian_part(a))?;
    let d = a.nrows();
    let mut basis = linalg::zeros(d, d);
    let tol = 1e-9 * scale;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && ea.values[end] - ea.values[end - 1] <= tol {
            end += 1;
        }
        let k = end - start;
        let block = CMat::from_fn(d, k, |i, j| ea.vectors[(i, start + j)]);
        let bb = &(block.adjoint() * b) * &block;
        let eb = linalg::eigh(&linalg::hermitian_part(&bb))?;
        let rot = &block * &eb.vectors;
        for j in 0..k {
            for i in 0..d {
                basis[(i, start + j)] = rot[(i, j)];
            }
        }
        start = end;
    }
    let res = offdiag_residual(&basis, a).max(offdiag_residual(&basis, b));
    if res > 1e-8 * scale {
        return Err(Error::Eigen(format!("joint diagonalization residual {res:e}")));
    }
    Ok((basis, res))
}

fn offdiag_residual(u: &CMat, m: &CMat) -> f64 {
    let t = linalg::to_basis(u, m);
    let mut r = 0.0f64;
    for j in 0..t.ncols() {
        for i in 0..t.nrows() {
            if i != j {
                r = r.max(t[(i, j)].norm());
            }
        }
    }
    r
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QcCertificate {
    pub delta1: f64,
    pub delta2: f64,
    pub dressed_commutator: f64,
    /// 3 (delta1 + delta2) / 2 + commutator / 4 before clamping.
    pub raw_bound: f64,
    /// min(raw_bound, 1).
    pub bound: f64,
    /// sum_m p_m |C_{phi_m}(O_A, O_B)| of the constructed decomposition.
    pub decomposition_average: f64,
    pub state_correlation: f64,
    pub r1: usize,
    pub r2: usize,
    pub joint_residual: f64,
    pub reconstruction_error: f64,
}

impl QcCertificate {
    pub fn recompute_raw(&self) -> f64 {
        1.5 * (self.delta1 + self.delta2) + 0.25 * self.dressed_commutator
    }
}

#[derive(Clone, Debug)]
pub struct ConvexDecomposition {
    pub probs: Vec<f64>,
    /// Normalized pure states as columns.
    pub states: CMat,
    /// The orthonormal basis the states were generated from.
    pub source_basis: CMat,
}

impl ConvexDecomposition {
    pub fn reconstruct(&self) -> CMat {
        let d = self.states.nrows();
        let scaled = CMat::from_fn(d, self.probs.len(), |i, m| self.states[(i, m)] * self.probs[m].sqrt());
        &scaled * scaled.adjoint()
    }
}

fn unit_normalize(o: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !o.hermitian {
        return Err(Error::Invalid("observables must be Hermitian".into()));
    }
    let n = linalg::op_norm(&o.mat)?;
    if n == 0.0 {
        return Err(Error::Invalid("zero observable".into()));
    }
    OperatorMatrix::with_support(linalg::scale_re(&o.mat, 1.0 / n), o.space.clone(), o.support.clone())
}

/// Constructive certificate. Radii default to ceil(R/2 - 1).
pub fn qc_certificate(
    g: &GibbsState,
    lattice: &Lattice,
    oa: &OperatorMatrix,
    ob: &OperatorMatrix,
    radii: Option<(usize, usize)>,
) -> Result<(QcCertificate, ConvexDecomposition)> {
    check_disjoint(&oa.support, &ob.support)?;
    let oa = unit_normalize(oa)?;
    let ob = unit_normalize(ob)?;
    let dist = lattice.set_dist(&oa.support, &ob.support);
    let (r1, r2) = radii.unwrap_or((default_radius(dist), default_radius(dist)));
    let ca = commuting_approx(g, lattice, &oa, &ob, r1, r2, None)?;

    // [rho^{-1/2} L_A rho^{1/2}, rho^{1/2} L_B rho^{-1/2}] in the eigenbasis
    let e = &g.hamiltonian.values;
    let beta = g.beta;
    let oae = g.spectrum.to_eigenbasis(&oa.mat);
    let obe = g.spectrum.to_eigenbasis(&ob.mat);
    let d = oae.nrows();
    let da = CMat::from_fn(d, d, |i, j| oae[(i, j)] * (1.0 + (0.5 * beta * (e[i] - e[j])).tanh()));
    let db = CMat::from_fn(d, d, |i, j| obe[(i, j)] * (1.0 - (0.5 * beta * (e[i] - e[j])).tanh()));
    let dressed_commutator = linalg::op_norm(&linalg::commutator(&da, &db))?;

    let (psi, joint_residual) = joint_eigenbasis(&ca.la.mat, &ca.lb.mat)?;
    let sqrt_rho = g.spectrum.power(0.5)?;
    let phi = &sqrt_rho * &psi;
    let a_phi = &oa.mat * &phi;
    let b_phi = &ob.mat * &phi;
    let ab_phi = &oa.mat * &b_phi;
    let mut probs = Vec::with_capacity(d);
    let mut avg = 0.0;
    for m in 0..d {
        let mut p = 0.0;
        let (mut xa, mut xb, mut xab) = (cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0));
        for i in 0..d {
            let c = phi[(i, m)].conj();
            p += phi[(i, m)].norm_sqr();
            xa += c * a_phi[(i, m)];
            xb += c * b_phi[(i, m)];
            xab += c * ab_phi[(i, m)];
        }
        probs.push(p);
        if p > 1e-300 {
            avg += (xab - xa * xb / p).norm();
        }
    }
    let states = CMat::from_fn(d, d, |i, m| if probs[m] > 1e-300 { phi[(i, m)] / probs[m].sqrt() } else { cx(0.0, 0.0) });
    let decomp = ConvexDecomposition { probs, states, source_basis: psi };
    let rho = g.spectrum.matrix();
    let reconstruction_error = linalg::trace_norm(&linalg::sub(&decomp.reconstruct(), &rho))?;
    let state_correlation = correlation_fn(&rho, &oa, &ob)?.norm();
    let mut cert = QcCertificate {
        delta1: ca.delta1,
        delta2: ca.delta2,
        dressed_commutator,
        raw_bound: 0.0,
        bound: 0.0,
        decomposition_average: avg,
        state_correlation,
        r1,
        r2,
        joint_residual,
        reconstruction_error,
    };
    cert.raw_bound = cert.recompute_raw();
    cert.bound = cert.raw_bound.min(1.0);
    Ok((cert, decomp))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem1Check {
    pub rhs: f64,
    pub surface_a: usize,
    pub surface_b: usize,
    pub size_ab: usize,
    pub r: usize,
    pub certificate_ok: bool,
    pub average_ok: bool,
}

/// C_beta (|dA| + |dB|)(1 + ln|AB|) e^{-R / xi_beta} with natural log.
pub fn theorem1_rhs(
    constants: Option<&BoundConstants>,
    lattice: &Lattice,
    a: &[usize],
    b: &[usize],
    cert: Option<&QcCertificate>,
) -> Result<Theorem1Check> {
    let c = constants.ok_or_else(|| Error::Invalid("Lieb-Robinson parameters missing".into()))?;
    let surface_a = lattice.surface(a).len();
    let surface_b = lattice.surface(b).len();
    let r = lattice.set_dist(a, b);
    let size_ab = a.len() + b.len();
    let rhs = c.theorem1_rhs(surface_a, surface_b, size_ab, r);
    let (certificate_ok, average_ok) = match cert {
        Some(q) => (q.bound <= rhs + 1e-12, q.decomposition_average <= rhs + 1e-12),
        None => (true, true),
    };
    Ok(Theorem1Check { rhs, surface_a, surface_b, size_ab, r, certificate_ok, average_ok })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoofMode {
    Pure,
    Mixed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_dim: usize,
    pub mode: RoofMode,
    pub max_sweeps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { seed: 7, restarts: 4, max_dim: 64, mode: RoofMode::Mixed, max_sweeps: 30 }
    }
}

/// An extra candidate decomposition: mixed components as unnormalized matrices.
#[derive(Clone, Debug)]
pub struct MixedSeed(pub Vec<CMat>);

#[derive(Clone, Debug)]
pub struct QcEstimate {
    pub value: f64,
    pub state_correlation: f64,
    /// Best ensemble (columns sqrt(p_k)|phi_k>) and its grouping into mixed components.
    pub ensemble: Option<CMat>,
    pub groups: Vec<Vec<usize>>,
    pub candidates: usize,
}

impl QcEstimate {
    /// Components sum_{k in g} v_k v_k^dagger of the best decomposition.
    pub fn components(&self) -> Vec<CMat> {
        let Some(v) = &self.ensemble else { return vec![] };
        self.groups
            .iter()
            .map(|g| {
                let cols = CMat::from_fn(v.nrows(), g.len(), |i, j| v[(i, g[j])]);
                &cols * cols.adjoint()
            })
            .collect()
    }
}

/// Heuristic upper estimate of the convex-roof correlation. Seeded and deterministic.
pub fn qc_heuristic(
    rho: &CMat,
    oa: &OperatorMatrix,
    ob: &OperatorMatrix,
    cfg: &SearchConfig,
    seeds: &[MixedSeed],
) -> Result<QcEstimate> {
    check_disjoint(&oa.support, &ob.support)?;
    let d = rho.nrows();
    if d > cfg.max_dim {
        return Err(Error::SizeCap(format!("dimension {d} above heuristic cap {}", cfg.max_dim)));
    }
    let obj = RoofObjective::correlation(&oa.mat, &ob.mat);
    let state_correlation = correlation_fn(rho, oa, ob)?.norm();
    let space = &oa.space;
    let rcfg = RefineConfig { max_sweeps: cfg.max_sweeps, ..Default::default() };

    let e = linalg::eigh(&linalg::hermitian_part(rho))?;
    let rank_cols: Vec<usize> = (0..d).filter(|&k| e.values[k] > EIG_FLOOR * 1e-3).collect();
    let v0 = CMat::from_fn(d, rank_cols.len(), |i, j| e.vectors[(i, rank_cols[j])] * e.values[rank_cols[j]].sqrt());

    let mut starts: Vec<CMat> = vec![v0.clone()];
    // product of marginal eigenbases, when A and B cover the space
    let mut ab: Vec<usize> = oa.support.iter().chain(&ob.support).copied().collect();
    ab.sort_unstable();
    if let Some(v) = product_basis_ensemble(rho, space, &oa.support)? {
        starts.push(v);
    }
    if d == 4 && space.n() == 2 {
        starts.push(crate::entangle::wootters_ensemble(rho)?);
    }
    let mut r = random::rng(cfg.seed);
    for k in 0..cfg.restarts {
        let cols = if k % 2 == 0 { d } else { 2 * d };
        starts.push(roof::random_mixing(&v0, cols, &mut r));
    }

    let mut best = QcEstimate { value: state_correlation, state_correlation, ensemble: None, groups: vec![], candidates: 0 };
    if cfg.mode == RoofMode::Mixed {
        // the trivial decomposition {rho} itself
        best.ensemble = Some(v0.clone());
        best.groups = vec![(0..v0.ncols()).collect()];
    } else {
        best.value = f64::INFINITY;
    }
    for s in seeds {
        best.candidates += 1;
        let val: f64 = s
            .0
            .iter()
            .map(|m| {
                let f: Vec<c64> = std::iter::once(linalg::trace(m))
                    .chain(obj.ops.iter().map(|x| linalg::trace_prod(m, x)))
                    .collect();
                obj.value(&f)
            })
            .sum();
        if val < best.value {
            best.value = val;
            // seed components are not kept as an ensemble
            best.ensemble = None;
            best.groups = vec![];
        }
    }
    for mut v in starts {
        best.candidates += 1;
        let pure = roof::refine(&obj, &mut v, &rcfg);
        let (val, groups) = match cfg.mode {
            RoofMode::Pure => (pure, (0..v.ncols()).map(|k| vec![k]).collect()),
            RoofMode::Mixed => {
                let forms = (0..v.ncols()).map(|k| obj.forms_of(&linalg::column(&v, k))).collect();
                roof::merge_greedy(&obj, forms)
            }
        };
        if val < best.value {
            best.value = val;
            best.ensemble = Some(v);
            best.groups = groups;
        }
    }
    Ok(best)
}

/// Ensemble in the product of the eigenbases of rho_A and rho_{A^c}.
fn product_basis_ensemble(rho: &CMat, space: &hilbert::SiteSpace, a: &[usize]) -> Result<Option<CMat>> {
    let a: Vec<usize> = space.labels().iter().copied().filter(|l| a.contains(l)).collect();
    let rest = space.complement(&a);
    if a.is_empty() || rest.is_empty() {
        return Ok(None);
    }
    let (ra, _) = hilbert::partial_trace_mat(rho, space, &a)?;
    let (rb, _) = hilbert::partial_trace_mat(rho, space, &rest)?;
    let ua = linalg::eigh(&linalg::hermitian_part(&ra))?.vectors;
    let ub = linalg::eigh(&linalg::hermitian_part(&rb))?.vectors;
    let sites: Vec<usize> = a.iter().chain(&rest).copied().collect();
    let u = hilbert::embed_local(&linalg::kron(&ua, &ub), &sites, space)?.mat;
    // columns sqrt(rho) u_k give rho = sum_k sqrt(rho)|u_k><u_k| sqrt(rho)
    let st = StateSpectrum::from_density(rho)?;
    let s = st.power(0.5)?;
    Ok(Some(&s * &u))
}

/// Correlation averaged over a pure ensemble given as columns sqrt(p)|phi>.
pub fn ensemble_average(v: &CMat, a: &CMat, b: &CMat) -> f64 {
    (0..v.ncols())
        .map(|k| {
            let col = linalg::column(v, k);
            let p = linalg::inner(&col, &col).re;
            if p <= 1e-300 {
                0.0
            } else {
                p * vector_correlation(&col, a, b).norm()
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed_local, pauli, SiteSpace};
    use crate::model::{build_model, ModelSpec};
    use crate::thermal::{gibbs_state, spectral_decompose_mat};
    use std::sync::Arc;

    fn tfi(n: usize, beta: f64) -> (GibbsState, Lattice) {
        let h = build_model(&ModelSpec::tfi_chain(n, 1.0, 1.0)).unwrap();
        let s = Arc::new(spectral_decompose_mat(&h.matrix().unwrap(), h.space.clone()).unwrap());
        (gibbs_state(&s, beta).unwrap(), h.lattice.clone())
    }

    #[test]
    fn ghz_correlation_is_one() {
        let sp = SiteSpace::new(2, 2).unwrap();
        let mut psi = vec![cx(0.0, 0.0); 4];
        psi[0] = cx(0.5f64.sqrt(), 0.0);
        psi[3] = cx(0.5f64.sqrt(), 0.0);
        let rho = linalg::outer(&psi, &psi);
        let za = embed_local(&pauli::z(), &[0], &sp).unwrap();
        let zb = embed_local(&pauli::z(), &[1], &sp).unwrap();
        assert!((correlation_fn(&rho, &za, &zb).unwrap().re - 1.0).abs() < 1e-14);
        assert!(correlation_fn(&rho, &za, &za).is_err());
    }

    #[test]
    fn spectral_and_integral_agree() {
        let (g, lat) = tfi(4, 1.0);
        let o = embed_local(&pauli::x(), &[1], &g.hamiltonian.space).unwrap();
        let q = QuadConfig::default();
        let a = l_operator(&g, &o, LMode::Spectral, &lat, &q).unwrap();
        let b = l_operator(&g, &o, LMode::Integral, &lat, &q).unwrap();
        assert!(linalg::op_norm(&linalg::sub(&a.op.mat, &b.op.mat)).unwrap() < 1e-6);
    }

    #[test]
    fn localized_support_and_commuting() {
        let (g, lat) = tfi(6, 1.0);
        let sp = g.hamiltonian.space.clone();
        let oa = embed_local(&pauli::z(), &[0], &sp).unwrap();
        let ob = embed_local(&pauli::z(), &[5], &sp).unwrap();
        let ca = commuting_approx(&g, &lat, &oa, &ob, 1, 2, None).unwrap();
        assert_eq!(ca.la.support, vec![0, 1]);
        assert!(ca.commutator < 1e-13);
        assert!(commuting_approx(&g, &lat, &oa, &ob, 3, 2, None).is_err());
    }

    #[test]
    fn dressed_routes_agree() {
        let (g, _) = tfi(4, 1.0);
        let o = embed_local(&pauli::x(), &[2], &g.hamiltonian.space).unwrap();
        for sign in [DressSign::Plus, DressSign::Minus] {
            let d = dressed_operator(&g, &o, sign, &QuadConfig::default()).unwrap();
            assert!(d.discrepancy < 1e-6);
            assert!(d.norm <= d.claim_bound);
        }
    }

    #[test]
    fn certificate_dominates_its_decomposition() {
        let (g, lat) = tfi(6, 1.0);
        let sp = g.hamiltonian.space.clone();
        let oa = embed_local(&pauli::z(), &[0], &sp).unwrap();
        let ob = embed_local(&pauli::z(), &[4], &sp).unwrap();
        let (c, dec) = qc_certificate(&g, &lat, &oa, &ob, None).unwrap();
        assert!(c.decomposition_average <= c.raw_bound + 1e-8);
        assert!(c.reconstruction_error < 1e-9);
        assert!((dec.probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((c.recompute_raw() - c.raw_bound).abs() < 1e-15);
    }

    #[test]
    fn heuristic_zero_on_classical_mixture() {
        let sp = SiteSpace::new(2, 2).unwrap();
        let mut rho = linalg::zeros(4, 4);
        rho[(0, 0)] = cx(0.5, 0.0);
        rho[(3, 3)] = cx(0.5, 0.0);
        let za = embed_local(&pauli::z(), &[0], &sp).unwrap();
        let zb = embed_local(&pauli::z(), &[1], &sp).unwrap();
        let est = qc_heuristic(&rho, &za, &zb, &SearchConfig::default(), &[]).unwrap();
        assert!(est.value < 1e-6);
        assert!((est.state_correlation - 1.0).abs() < 1e-12);
    }
}
