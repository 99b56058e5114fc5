//! Empirical Lieb-Robinson parameters from exact commutator norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, OperatorMatrix, SiteSpace};
use crate::kernels::LrParams;
use crate::linalg::{self, CMat};
use crate::model::Hamiltonian;
use crate::qcorr;
use crate::random;
use crate::thermal::{self, SpectralDecomposition};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthSample {
    pub t: f64,
    /// ||[O_X(t), O_Y]||.
    pub commutator: f64,
    /// ||O_X(t) - O_X(t, X[r])|| when a radius was given.
    pub approx_error: Option<f64>,
}

fn check_disjoint(ox: &OperatorMatrix, oy: &OperatorMatrix) -> Result<()> {
    if ox.support.is_empty() || oy.support.is_empty() {
        return Err(Error::Invalid("observables need explicit supports".into()));
    }
    if ox.support.iter().any(|s| oy.support.contains(s)) {
        return Err(Error::Invalid("commutator growth needs disjoint supports".into()));
    }
    Ok(())
}

/// ||[A, Y]|| with Y local, via Y A and (Y A)^dagger = A Y for Hermitian A, Y.
fn local_commutator_norm(a: &CMat, y: &OperatorMatrix) -> Result<f64> {
    let local = hilbert::partial_trace_mat(&y.mat, &y.space, &y.support)?.0;
    let dr = (y.space.dim() / local.nrows()) as f64;
    let ya = hilbert::local_left_multiply(&linalg::scale_re(&local, 1.0 / dr), &y.support, &y.space, a)?;
    let c = &linalg::adjoint(&ya) - &ya;
    linalg::op_norm(&c)
}

pub fn commutator_growth(
    spec: &SpectralDecomposition,
    lattice: &crate::model::Lattice,
    ox: &OperatorMatrix,
    oy: &OperatorMatrix,
    radius: Option<usize>,
    times: &[f64],
) -> Result<Vec<GrowthSample>> {
    check_disjoint(ox, oy)?;
    if !ox.hermitian || !oy.hermitian {
        return Err(Error::Invalid("commutator growth takes Hermitian observables".into()));
    }
    let oe = spec.to_eigenbasis(&ox.mat);
    let region = radius.map(|r| lattice.ball(&ox.support, r));
    times
        .iter()
        .map(|&t| {
            if !t.is_finite() {
                return Err(Error::Invalid("non-finite time".into()));
            }
            let ot = linalg::hermitian_part(&spec.from_eigenbasis(&thermal::evolve_in_eigenbasis(&oe, &spec.values, t)));
            let commutator = local_commutator_norm(&ot, oy)?;
            let approx_error = match &region {
                Some(reg) => {
                    let loc = qcorr::localize(&ot, &spec.space, reg)?;
                    Some(linalg::op_norm(&linalg::hermitian_part(&(&ot - &loc.mat)))?)
                }
                None => None,
            };
            Ok(GrowthSample { t, commutator, approx_error })
        })
        .collect()
}

/// max over `samples` random unitaries U on the complement of `region` of ||[O, U]||.
pub fn sampled_unitary_commutator(o: &CMat, space: &SiteSpace, region: &[usize], samples: usize, seed: u64) -> Result<f64> {
    let comp = space.complement(region);
    if comp.is_empty() {
        return Ok(0.0);
    }
    let mut r = random::rng(seed);
    let dc = space.sub_dim(comp.len());
    let mut best = 0.0f64;
    for _ in 0..samples {
        let u = random::unitary(dc, &mut r);
        let uo = hilbert::local_left_multiply(&u, &comp, space, o)?;
        // O U = (U^dagger O)^dagger
        let ud = linalg::adjoint(&u);
        let ou = linalg::adjoint(&hilbert::local_left_multiply(&ud, &comp, space, o)?);
        best = best.max(linalg::op_norm(&(&ou - &uo))?);
    }
    Ok(best)
}

/// One point of the (t, R) grid used for fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrSample {
    pub t: f64,
    pub r: usize,
    /// min(|dX|, |dY|).
    pub surface: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Single-site Pauli labels used on both ends; the sample is the maximum.
    pub paulis: String,
    pub distances: Vec<usize>,
    /// Times; empty means an automatic grid up to n / (2 v_rough).
    pub times: Vec<f64>,
    pub auto_points: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { paulis: "Z".into(), distances: vec![], times: vec![], auto_points: 16 }
    }
}

/// Automatic time grid: `points` equally spaced times in (0, n / (2 v_rough)],
/// v_rough = 2 max_x J(x) from the interaction profile.
pub fn auto_times(h: &Hamiltonian, points: usize) -> Vec<f64> {
    let (_, env) = h.interaction_profile();
    let j = env.get(1).copied().unwrap_or(0.0).max(env.first().copied().unwrap_or(0.0)).max(1e-3);
    let t_max = h.n() as f64 / (2.0 * 2.0 * j);
    (1..=points.max(1)).map(|k| t_max * k as f64 / points.max(1) as f64).collect()
}

/// Exact commutator norms between single-site Paulis at each distance, using
/// the lowest-indexed site pair at that distance.
pub fn lr_samples(h: &Hamiltonian, spec: &SpectralDecomposition, cfg: &SampleConfig) -> Result<Vec<LrSample>> {
    let n = h.n();
    let lat = &h.lattice;
    let distances: Vec<usize> = if cfg.distances.is_empty() {
        (1..=lat.diameter()).collect()
    } else {
        cfg.distances.clone()
    };
    let times = if cfg.times.is_empty() { auto_times(h, cfg.auto_points) } else { cfg.times.clone() };
    let ops: Vec<CMat> = cfg
        .paulis
        .chars()
        .map(|c| hilbert::pauli::by_name(c).ok_or_else(|| Error::Config(format!("unknown Pauli label {c}"))))
        .collect::<Result<_>>()?;
    if ops.is_empty() {
        return Err(Error::Config("no Pauli labels for LR sampling".into()));
    }
    let mut out = Vec::new();
    for &rr in &distances {
        let Some((x, y)) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| lat.dist(i, j) == rr) else {
            continue;
        };
        let surface = lat.surface(&[x]).len().max(1).min(lat.surface(&[y]).len().max(1));
        let mut best = vec![0.0f64; times.len()];
        for a in &ops {
            let ox = hilbert::embed_local(a, &[x], &h.space)?;
            for b in &ops {
                let oy = hilbert::embed_local(b, &[y], &h.space)?;
                let g = commutator_growth(spec, lat, &ox, &oy, None, &times)?;
                for (k, s) in g.iter().enumerate() {
                    best[k] = best[k].max(s.commutator);
                }
            }
        }
        for (k, &t) in times.iter().enumerate() {
            out.push(LrSample { t, r: rr, surface, value: best[k] });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Samples at or above this norm are kept as constraints but not fitted.
    pub saturation: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub grid: usize,
    pub golden_iters: usize,
    /// Values at or below this floor carry no information.
    pub floor: f64,
    pub mu_min: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { saturation: 1.5, v_min: 1e-2, v_max: 100.0, grid: 48, golden_iters: 60, floor: 1e-13, mu_min: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Every commutator vanished: no propagation between the sampled sites.
    NoPropagation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrFit {
    pub status: FitStatus,
    pub c: f64,
    pub v: f64,
    pub mu: f64,
    /// ln(bound / value) per fitted sample.
    pub residuals: Vec<f64>,
    pub samples: Vec<LrSample>,
    pub objective: f64,
    pub fitted: usize,
    pub saturated: usize,
    pub censored: usize,
    /// Largest value / bound over the samples above the floor (<= 1 up to the tolerance).
    pub worst_ratio: f64,
}

impl LrFit {
    pub fn params(&self) -> Option<LrParams> {
        (self.status == FitStatus::Fitted).then_some(LrParams { c: self.c, v: self.v, mu: self.mu })
    }

    pub fn bound(&self, t: f64, r: usize, surface: usize) -> f64 {
        lr_bound(&LrParams { c: self.c, v: self.v, mu: self.mu }, t, r, surface)
    }
}

pub fn lr_bound(p: &LrParams, t: f64, r: usize, surface: usize) -> f64 {
    p.c * surface as f64 * (p.v * t.abs()).exp_m1() * (-p.mu * r as f64).exp()
}

/// Domination margin used in every check.
pub const DOMINATION_TOL: f64 = 1e-9;

struct Prepared {
    /// ln(value) - ln(surface (e^{vt} - 1)) needs v, so keep raw pieces.
    fit: Vec<(f64, f64, f64, f64)>,
    cons: Vec<(f64, f64, f64, f64)>,
}

/// For fixed v: minimize ln C - mu mean(R) subject to ln C - mu R_i >= b_i.
/// The objective is convex piecewise linear in mu, so a breakpoint is optimal.
fn solve_fixed_v(p: &Prepared, v: f64, mu_min: f64) -> Option<(f64, f64, f64)> {
    let b = |(t, r, s, y): (f64, f64, f64, f64)| (y.ln() - (s * (v * t).exp_m1()).ln(), r);
    let cons: Vec<(f64, f64)> = p.cons.iter().map(|&q| b(q)).collect();
    let fit: Vec<(f64, f64)> = p.fit.iter().map(|&q| b(q)).collect();
    let rbar = fit.iter().map(|x| x.1).sum::<f64>() / fit.len() as f64;
    let bbar = fit.iter().map(|x| x.0).sum::<f64>() / fit.len() as f64;
    let lnc = |mu: f64| cons.iter().map(|&(bi, ri)| bi + mu * ri).fold(f64::NEG_INFINITY, f64::max);
    let obj = |mu: f64| lnc(mu) - mu * rbar - bbar;
    let mut cands = vec![mu_min];
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let (bi, ri) = cons[i];
            let (bj, rj) = cons[j];
            if ri != rj {
                let mu = (bj - bi) / (ri - rj);
                if mu > mu_min && mu.is_finite() {
                    cands.push(mu);
                }
            }
        }
    }
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    let mut best: Option<(f64, f64, f64)> = None;
    for mu in cands {
        let o = obj(mu);
        if o.is_finite() && best.map_or(true, |bst| o < bst.0) {
            best = Some((o, mu, lnc(mu)));
        }
    }
    best
}

/// Conservative fit of C (e^{v|t|} - 1) e^{-mu R} min(|dX|, |dY|) dominating
/// every sample. Only unsaturated samples enter the objective (mean log slack).
pub fn fit_lr_params(samples: &[LrSample], cfg: &FitConfig) -> Result<LrFit> {
    let informative: Vec<&LrSample> = samples.iter().filter(|s| s.value > cfg.floor && s.t != 0.0).collect();
    let censored = samples.len() - informative.len();
    if informative.is_empty() {
        return Ok(LrFit {
            status: FitStatus::NoPropagation,
            c: 0.0,
            v: 0.0,
            mu: f64::INFINITY,
            residuals: vec![],
            samples: samples.to_vec(),
            objective: f64::NAN,
            fitted: 0,
            saturated: 0,
            censored,
            worst_ratio: 0.0,
        });
    }
    let as_tuple = |s: &LrSample| (s.t.abs(), s.r as f64, s.surface as f64, s.value);
    let fit: Vec<_> = informative.iter().filter(|s| s.value < cfg.saturation).map(|s| as_tuple(s)).collect();
    let saturated = informative.len() - fit.len();
    if fit.is_empty() {
        return Err(Error::Invalid("infeasible fitting window: every sample is saturated".into()));
    }
    let mut rs: Vec<usize> = informative.iter().filter(|s| s.value < cfg.saturation).map(|s| s.r).collect();
    rs.sort_unstable();
    rs.dedup();
    let mut ts: Vec<u64> = informative.iter().filter(|s| s.value < cfg.saturation).map(|s| s.t.abs().to_bits()).collect();
    ts.sort_unstable();
    ts.dedup();
    if rs.len() < 3 || ts.len() < 5 {
        return Err(Error::Invalid(format!(
            "fitting window needs >= 3 distances and >= 5 times, got {} and {}",
            rs.len(),
            ts.len()
        )));
    }
    let prep = Prepared { fit, cons: informative.iter().map(|s| as_tuple(s)).collect() };
    let eval = |lv: f64| solve_fixed_v(&prep, lv.exp(), cfg.mu_min).map(|x| x.0).unwrap_or(f64::INFINITY);
    // coarse scan in ln v, then golden section around the best cell
    let (lo, hi) = (cfg.v_min.ln(), cfg.v_max.ln());
    let n = cfg.grid.max(3);
    let grid: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&g| eval(g)).collect();
    let k = (0..n).min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap()).unwrap();
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(n - 1)]);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..cfg.golden_iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval(x2);
        }
    }
    let mut best_lv = grid[k];
    let mut best_f = vals[k];
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < best_f {
            best_f = f;
            best_lv = x;
        }
    }
    let v = best_lv.exp();
    let (objective, mu, lnc) = solve_fixed_v(&prep, v, cfg.mu_min)
        .ok_or_else(|| Error::NoConvergence("LR fit found no feasible (C, mu)".into()))?;
    // nudge C so roundoff in ln/exp cannot break domination
    let c = lnc.exp() * (1.0 + 1e-12);
    let p = LrParams { c, v, mu };
    let residuals = prep
        .fit
        .iter()
        .map(|&(t, r, s, y)| (lr_bound(&p, t, r as usize, s as usize) / y).ln())
        .collect();
    let worst_ratio = informative
        .iter()
        .map(|s| s.value / lr_bound(&p, s.t, s.r, s.surface).max(f64::MIN_POSITIVE))
        .filter(|x| x.is_finite())
        .fold(0.0f64, f64::max);
    Ok(LrFit {
        status: FitStatus::Fitted,
        c,
        v,
        mu,
        residuals,
        samples: samples.to_vec(),
        objective,
        fitted: prep.fit.len(),
        saturated,
        censored,
        worst_ratio,
    })
}

/// Samples violating the bound by more than the domination tolerance.
pub fn violations(p: &LrParams, samples: &[LrSample]) -> Vec<LrSample> {
    samples
        .iter()
        .filter(|s| s.value > lr_bound(p, s.t, s.r, s.surface) + DOMINATION_TOL)
        .cloned()
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub train: usize,
    pub holdout: usize,
    pub violations: Vec<LrSample>,
    pub fit: LrFit,
}

/// Fits on every other time point and checks domination on the rest.
pub fn holdout_check(samples: &[LrSample], cfg: &FitConfig) -> Result<HoldoutReport> {
    let mut times: Vec<u64> = samples.iter().map(|s| s.t.to_bits()).collect();
    times.sort_by(|a, b| f64::from_bits(*a).partial_cmp(&f64::from_bits(*b)).unwrap());
    times.dedup();
    let train_times: Vec<u64> = times.iter().step_by(2).copied().collect();
    let (train, hold): (Vec<LrSample>, Vec<LrSample>) =
        samples.iter().cloned().partition(|s| train_times.contains(&s.t.to_bits()));
    let fit = fit_lr_params(&train, cfg)?;
    let violations = match fit.params() {
        Some(p) => violations(&p, &hold),
        None => hold.iter().filter(|s| s.value > DOMINATION_TOL).cloned().collect(),
    };
    Ok(HoldoutReport { train: train.len(), holdout: hold.len(), violations, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::pauli;
    use crate::model::{self, ModelSpec};
    use std::sync::Arc;

    fn setup(n: usize) -> (Hamiltonian, Arc<SpectralDecomposition>) {
        let h = model::build_model(&ModelSpec::tfi_chain(n, 1.0, 1.0)).unwrap();
        let s = Arc::new(thermal::spectral_decompose_mat(&h.matrix().unwrap(), h.space.clone()).unwrap());
        (h, s)
    }

    #[test]
    fn growth_starts_at_zero_and_stays_below_two() {
        let (h, s) = setup(6);
        let ox = hilbert::embed_local(&pauli::z(), &[0], &h.space).unwrap();
        let oy = hilbert::embed_local(&pauli::x(), &[3], &h.space).unwrap();
        let g = commutator_growth(&s, &h.lattice, &ox, &oy, Some(1), &[0.0, 0.3, 1.0, 3.0]).unwrap();
        assert!(g[0].commutator < 1e-12);
        assert!(g[0].approx_error.unwrap() < 1e-12);
        assert!(g.iter().all(|x| x.commutator <= 2.0 + 1e-12));
        assert!(g[3].commutator > g[0].commutator);
    }

    #[test]
    fn local_approximation_below_sampled_unitary_commutators() {
        let (h, s) = setup(6);
        let ox = hilbert::embed_local(&pauli::z(), &[2], &h.space).unwrap();
        let oy = hilbert::embed_local(&pauli::z(), &[5], &h.space).unwrap();
        for r in 1..3 {
            let g = commutator_growth(&s, &h.lattice, &ox, &oy, Some(r), &[0.7]).unwrap();
            let ot = thermal::heisenberg_evolve(&ox.mat, &s, 0.7).unwrap();
            let region = h.lattice.ball(&[2], r);
            let sup = sampled_unitary_commutator(&ot, &h.space, &region, 12, 3).unwrap();
            assert!(g[0].approx_error.unwrap() <= sup + 1e-9);
        }
    }

    #[test]
    fn overlapping_supports_refused() {
        let (h, s) = setup(4);
        let ox = hilbert::embed_local(&pauli::z(), &[1], &h.space).unwrap();
        assert!(commutator_growth(&s, &h.lattice, &ox, &ox, None, &[0.1]).is_err());
    }

    #[test]
    fn fit_dominates_and_recovers_synthetic_parameters() {
        let truth = LrParams { c: 0.5, v: 2.0, mu: 1.3 };
        let mut samples = vec![];
        for r in 1..5 {
            for k in 1..9 {
                let t = 0.1 * k as f64;
                samples.push(LrSample { t, r, surface: 1, value: lr_bound(&truth, t, r, 1) });
            }
        }
        let fit = fit_lr_params(&samples, &FitConfig::default()).unwrap();
        assert!(violations(&fit.params().unwrap(), &samples).is_empty());
        assert!((fit.v - truth.v).abs() < 1e-3 * truth.v, "{fit:?}");
        assert!((fit.mu - truth.mu).abs() < 1e-3);
        assert!(fit.worst_ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn fit_needs_window_and_reports_no_propagation() {
        let zero: Vec<LrSample> = (1..6).map(|k| LrSample { t: k as f64, r: 2, surface: 1, value: 0.0 }).collect();
        assert_eq!(fit_lr_params(&zero, &FitConfig::default()).unwrap().status, FitStatus::NoPropagation);
        let sat: Vec<LrSample> = (1..6).map(|k| LrSample { t: k as f64, r: 2, surface: 1, value: 2.0 }).collect();
        assert!(fit_lr_params(&sat, &FitConfig::default()).is_err());
    }

    #[test]
    fn tfi_fit_dominates_samples() {
        let (h, s) = setup(8);
        let samples = lr_samples(&h, &s, &SampleConfig::default()).unwrap();
        let fit = fit_lr_params(&samples, &FitConfig::default()).unwrap();
        let p = fit.params().unwrap();
        assert!(violations(&p, &samples).is_empty());
        assert!(p.c > 0.0 && p.v > 0.0 && p.mu > 0.0);
    }
}
