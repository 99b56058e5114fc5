//! Partial-transpose analytics, PPT-relative entanglement bounds and a
//! Frank-Wolfe solver, two-qubit entanglement of formation, Pinsker slack.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, OperatorMatrix, SiteSpace, EIG_FLOOR};
use crate::linalg::{self, c64, cx, CMat};
use crate::random;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PptReport {
    pub is_ppt: bool,
    /// -min eigenvalue of rho^{T_A}, or 0.
    pub delta: f64,
    /// ln ||rho^{T_A}||_1.
    pub negativity: f64,
    pub negative_count: usize,
    pub trace_norm: f64,
    /// | ||rho^T||_1 - (1 + 2 sum |negative eigenvalues|) |.
    pub identity_residual: f64,
}

/// Eigenvalues of rho^{T_A} above -tol count as nonnegative.
pub const PPT_TOL: f64 = 1e-12;

pub fn ppt_analysis(rho: &CMat, space: &SiteSpace, a: &[usize]) -> Result<PptReport> {
    let op = OperatorMatrix::new(rho.clone(), space.clone())?;
    let pt = hilbert::partial_transpose(&op, a)?;
    let ev = linalg::eigvalsh(&linalg::hermitian_part(&pt.mat))?;
    let neg: Vec<f64> = ev.iter().copied().filter(|&x| x < -PPT_TOL).collect();
    let trace_norm: f64 = ev.iter().map(|x| x.abs()).sum();
    let tr: f64 = ev.iter().sum();
    let neg_sum: f64 = neg.iter().map(|x| x.abs()).sum();
    let all_neg: f64 = ev.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    let identity_residual = (trace_norm - (tr + 2.0 * all_neg)).abs();
    let delta = if neg.is_empty() { 0.0 } else { -ev[0] };
    Ok(PptReport {
        is_ppt: neg.is_empty(),
        delta,
        negativity: if neg.is_empty() { 0.0 } else { (tr + 2.0 * neg_sum).ln().max(0.0) },
        negative_count: neg.len(),
        trace_norm,
        identity_residual,
    })
}

pub fn is_ppt(rho: &CMat, space: &SiteSpace, a: &[usize]) -> Result<bool> {
    Ok(ppt_analysis(rho, space, a)?.is_ppt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PptInput {
    /// Bound on the quantum correlation; the shift is 4 eps min(D_A, D_B).
    Epsilon(f64),
    /// Shift used directly.
    Delta(f64),
}

#[derive(Clone, Debug)]
pub struct PptUpper {
    pub delta_bar: f64,
    /// 4 D delta_bar ln(1/delta_bar) when delta_bar <= 1/e, else the trivial ln min(D_A, D_B).
    pub bound: f64,
    pub closed_form_applies: bool,
    /// (1 - D delta_bar) rho + delta_bar 1, absent when D delta_bar > 1.
    pub sigma: Option<CMat>,
    pub relative_entropy: Option<f64>,
    pub sigma_is_ppt: Option<bool>,
    pub within_bound: bool,
}

fn xlogx_inv(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (1.0 / x).ln()
    }
}

pub fn ppt_relative_upper(rho: &CMat, space: &SiteSpace, a: &[usize], input: PptInput) -> Result<PptUpper> {
    let d = rho.nrows();
    let da = space.sub_dim(a.len());
    let db = d / da;
    let delta_bar = match input {
        PptInput::Epsilon(e) => 4.0 * e * da.min(db) as f64,
        PptInput::Delta(x) => x,
    };
    if !(delta_bar >= 0.0) || !delta_bar.is_finite() {
        return Err(Error::Invalid(format!("shift {delta_bar} must be >= 0")));
    }
    let closed_form_applies = delta_bar <= (-1.0f64).exp();
    let trivial = (da.min(db) as f64).ln();
    let bound = if closed_form_applies { 4.0 * d as f64 * xlogx_inv(delta_bar) } else { trivial };
    let shift = d as f64 * delta_bar;
    if shift > 1.0 {
        return Ok(PptUpper {
            delta_bar,
            bound,
            closed_form_applies,
            sigma: None,
            relative_entropy: None,
            sigma_is_ppt: None,
            within_bound: true,
        });
    }
    let sigma = linalg::add(&linalg::scale_re(rho, 1.0 - shift), &linalg::scale_re(&linalg::identity(d), delta_bar));
    let s = hilbert::relative_entropy(rho, &sigma)?;
    let ppt = is_ppt(&sigma, space, a)?;
    Ok(PptUpper {
        delta_bar,
        bound,
        closed_form_applies,
        within_bound: s <= bound + 1e-12,
        sigma: Some(sigma),
        relative_entropy: Some(s),
        sigma_is_ppt: Some(ppt),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_dim: usize,
    pub max_iter: usize,
    pub gap_tol: f64,
    pub lmo_restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_dim: 16, max_iter: 4000, gap_tol: 1e-6, lmo_restarts: 8, seed: 11 }
    }
}

#[derive(Clone, Debug)]
pub struct PptExact {
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub sigma: CMat,
    /// Objective after each iteration (nonincreasing).
    pub trace: Vec<f64>,
}

/// Bipartite index maps: basis index = oa[i] + ob[j].
struct Split {
    oa: Vec<usize>,
    ob: Vec<usize>,
}

impl Split {
    fn product(&self, a: &[c64], b: &[c64]) -> Vec<c64> {
        let mut v = vec![cx(0.0, 0.0); self.oa.len() * self.ob.len()];
        for (i, &x) in self.oa.iter().enumerate() {
            for (j, &y) in self.ob.iter().enumerate() {
                v[x + y] = a[i] * b[j];
            }
        }
        v
    }

    /// <a (x) .| G |a (x) .> as a d_B x d_B matrix.
    fn contract_a(&self, g: &CMat, a: &[c64]) -> CMat {
        let nb = self.ob.len();
        CMat::from_fn(nb, nb, |j, l| {
            let mut s = cx(0.0, 0.0);
            for (i, &x) in self.oa.iter().enumerate() {
                for (k, &y) in self.oa.iter().enumerate() {
                    s += a[i].conj() * g[(x + self.ob[j], y + self.ob[l])] * a[k];
                }
            }
            s
        })
    }

    fn contract_b(&self, g: &CMat, b: &[c64]) -> CMat {
        let na = self.oa.len();
        CMat::from_fn(na, na, |i, k| {
            let mut s = cx(0.0, 0.0);
            for (j, &x) in self.ob.iter().enumerate() {
                for (l, &y) in self.ob.iter().enumerate() {
                    s += b[j].conj() * g[(self.oa[i] + x, self.oa[k] + y)] * b[l];
                }
            }
            s
        })
    }
}

fn min_eigvec(m: &CMat) -> Result<Vec<c64>> {
    let e = linalg::eigh(&linalg::hermitian_part(m))?;
    Ok(linalg::column(&e.vectors, 0))
}

/// Minimizes <a b|G|a b> over product unit vectors by alternating eigenvectors.
fn product_lmo<R: rand::Rng>(g: &CMat, split: &Split, restarts: usize, r: &mut R) -> Result<(Vec<c64>, f64)> {
    let na = split.oa.len();
    let nb = split.ob.len();
    let mut best: Option<(Vec<c64>, f64)> = None;
    for k in 0..restarts.max(1) {
        let mut b = if k == 0 {
            // reduced min eigenvector of G as a starting point
            let v = min_eigvec(g)?;
            let mut bb = vec![cx(0.0, 0.0); nb];
            for (j, &y) in split.ob.iter().enumerate() {
                for &x in &split.oa {
                    bb[j] += v[x + y] * v[x + y].conj();
                }
            }
            let mut b0 = random::pure_vector(nb, r);
            for (j, z) in b0.iter_mut().enumerate() {
                *z = *z * 1e-3 + bb[j].sqrt();
            }
            let n = linalg::inner(&b0, &b0).re.sqrt();
            b0.into_iter().map(|z| z / n).collect()
        } else {
            random::pure_vector(nb, r)
        };
        let mut a = vec![cx(0.0, 0.0); na];
        let mut val = f64::INFINITY;
        for _ in 0..100 {
            a = min_eigvec(&split.contract_b(g, &b))?;
            b = min_eigvec(&split.contract_a(g, &a))?;
            let v = linalg::expect_vec(g, &split.product(&a, &b)).re;
            if val - v < 1e-15 {
                val = val.min(v);
                break;
            }
            val = v;
        }
        if best.as_ref().map_or(true, |(_, bv)| val < *bv) {
            best = Some((split.product(&a, &b), val));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// -D log(sigma)[rho] via divided differences in the eigenbasis of sigma.
fn gradient(rho: &CMat, sigma: &CMat) -> Result<CMat> {
    let e = linalg::eigh(sigma)?;
    let mu: Vec<f64> = e.values.iter().map(|&m| m.max(EIG_FLOOR)).collect();
    let rt = linalg::to_basis(&e.vectors, rho);
    let d = mu.len();
    let m = CMat::from_fn(d, d, |i, j| {
        let (a, b) = (mu[i], mu[j]);
        // the objective ignores the kernel of sigma, so does its gradient
        if a <= EIG_FLOOR && b <= EIG_FLOOR {
            return cx(0.0, 0.0);
        }
        let w = if (a - b).abs() <= 1e-12 * a.max(b) { 1.0 / a.max(b) } else { (a.ln() - b.ln()) / (a - b) };
        -rt[(i, j)] * w
    });
    Ok(linalg::from_basis(&e.vectors, &m))
}

/// Fraction of the away atom's weight a pairwise step may move. Emptying the
/// atom outright can leave sigma singular on the support of rho.
const PAIR_KEEP: f64 = 1.0 - 1e-6;

/// Golden section on [0, gmax], also trying the endpoint.
fn line_search(f: impl Fn(f64) -> f64, gmax: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, gmax);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let best = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    let fend = f(gmax);
    if fend <= best.1 {
        (gmax, fend)
    } else {
        best
    }
}

fn objective(rho: &CMat, sigma: &CMat) -> f64 {
    match hilbert::relative_entropy(rho, sigma) {
        Ok(v) => v,
        Err(_) => f64::INFINITY,
    }
}

/// min S(rho || sigma) over sigma in the hull of product states and the given
/// PPT warm starts, by pairwise Frank-Wolfe. For 2x2 and 2x3 splits this hull
/// is the PPT set; otherwise the result is an upper bound.
pub fn ppt_relative_exact(
    rho: &CMat,
    space: &SiteSpace,
    a: &[usize],
    cfg: &SolverConfig,
    warm: &[CMat],
) -> Result<PptExact> {
    let d = rho.nrows();
    if d > cfg.max_dim {
        return Err(Error::SizeCap(format!("dimension {d} above solver cap {}", cfg.max_dim)));
    }
    if is_ppt(rho, space, a)? {
        return Ok(PptExact { value: 0.0, gap: 0.0, iterations: 0, converged: true, sigma: rho.clone(), trace: vec![0.0] });
    }
    let (oa, ob) = space.split_offsets(a)?;
    let split = Split { oa, ob };
    let mut r = random::rng(cfg.seed);

    // active set: (weight, atom)
    let mut atoms: Vec<(f64, CMat)> = Vec::new();
    let mixed = linalg::scale_re(&linalg::identity(d), 1.0 / d as f64);
    let mut start = (objective(rho, &mixed), mixed);
    for w in warm {
        if !is_ppt(w, space, a)? {
            return Err(Error::Invalid("warm start is not PPT".into()));
        }
        let v = objective(rho, w);
        if v < start.0 {
            start = (v, w.clone());
        }
    }
    atoms.push((1.0, start.1.clone()));
    let mut sigma = start.1;
    let mut fval = start.0;
    let mut trace = vec![fval];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let g = gradient(rho, &sigma)?;
        let gs = linalg::trace_prod(&g, &sigma).re;
        let (s_vec, s_val) = product_lmo(&g, &split, cfg.lmo_restarts, &mut r)?;
        gap = gs - s_val;
        if gap <= cfg.gap_tol {
            break;
        }
        // away atom
        let (ia, away_val) = atoms
            .iter()
            .enumerate()
            .map(|(i, (_, m))| (i, linalg::trace_prod(&g, m).re))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let s_atom = linalg::outer(&s_vec, &s_vec);
        // pairwise step (weight moves from the away atom to the new atom) when it
        // decreases the objective, plain Frank-Wolfe step otherwise
        let pair = (atoms.len() > 1 && away_val > gs).then(|| (linalg::sub(&s_atom, &atoms[ia].1), atoms[ia].0 * PAIR_KEEP));
        let mut chosen = None;
        for (dir, gmax, fw) in pair.map(|(d, g)| (d, g, false)).into_iter().chain([(linalg::sub(&s_atom, &sigma), 1.0, true)]) {
            let (step, fnew) = line_search(|gm| objective(rho, &linalg::add(&sigma, &linalg::scale_re(&dir, gm))), gmax);
            if fnew < fval {
                chosen = Some((dir, step, fnew, fw));
                break;
            }
        }
        let Some((dir, step, fnew, fw)) = chosen else {
            break;
        };
        sigma = linalg::hermitian_part(&linalg::add(&sigma, &linalg::scale_re(&dir, step)));
        if fw {
            for at in atoms.iter_mut() {
                at.0 *= 1.0 - step;
            }
        } else {
            atoms[ia].0 -= step;
        }
        atoms.push((step, s_atom));
        atoms.retain(|at| at.0 > 1e-14);
        fval = fnew;
        trace.push(fval);
        // merge nearly identical product atoms to keep the active set small
        if atoms.len() > 4 * d * d {
            atoms.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            let dropped: f64 = atoms[4 * d * d..].iter().map(|x| x.0).sum();
            let tail = atoms.split_off(4 * d * d);
            let mut merged = linalg::zeros(d, d);
            for (w, m) in tail {
                merged = linalg::add(&merged, &linalg::scale_re(&m, w / dropped));
            }
            atoms.push((dropped, merged));
        }
    }
    Ok(PptExact { value: fval, gap, iterations, converged: gap <= cfg.gap_tol, sigma, trace })
}

fn sigma_y2() -> CMat {
    let mut m = linalg::zeros(4, 4);
    m[(0, 3)] = cx(-1.0, 0.0);
    m[(1, 2)] = cx(1.0, 0.0);
    m[(2, 1)] = cx(1.0, 0.0);
    m[(3, 0)] = cx(-1.0, 0.0);
    m
}

fn check_two_qubit(rho: &CMat) -> Result<()> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::Dimension(format!("two-qubit state needs 4x4, got {}x{}", rho.nrows(), rho.ncols())));
    }
    Ok(())
}

/// V with rho = V V^dagger, columns sqrt(lambda) |lambda>.
fn sqrt_factor(rho: &CMat) -> Result<CMat> {
    let e = linalg::eigh(&linalg::hermitian_part(rho))?;
    Ok(CMat::from_fn(rho.nrows(), rho.nrows(), |i, j| e.vectors[(i, j)] * e.values[j].max(0.0).sqrt()))
}

/// Takagi factorization of a complex symmetric 4x4 matrix: tau conj(u_k) = s_k u_k.
/// Returns (U, s) with s descending.
fn takagi(tau: &CMat) -> Result<(CMat, Vec<f64>)> {
    let n = tau.nrows();
    let m = CMat::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let t = tau[(i % n, j % n)];
        let v = match (bi, bj) {
            (0, 0) => t.re,
            (0, 1) | (1, 0) => t.im,
            _ => -t.re,
        };
        cx(v, 0.0)
    });
    let e = linalg::eigh(&m)?;
    let scale = e.values.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let mut cols: Vec<Vec<c64>> = Vec::new();
    let mut svals = Vec::new();
    for k in (0..2 * n).rev() {
        if cols.len() == n || e.values[k] <= 1e-12 * scale {
            break;
        }
        let u: Vec<c64> = (0..n).map(|i| cx(e.vectors[(i, k)].re, e.vectors[(i + n, k)].re)).collect();
        let nrm = linalg::inner(&u, &u).re.sqrt();
        cols.push(u.into_iter().map(|z| z / nrm).collect());
        svals.push(e.values[k]);
    }
    // complete with an orthonormal complement (Takagi value zero)
    for basis in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = vec![cx(0.0, 0.0); n];
        v[basis] = cx(1.0, 0.0);
        for c in &cols {
            let p = linalg::inner(c, &v);
            for i in 0..n {
                v[i] -= c[i] * p;
            }
        }
        let nrm = linalg::inner(&v, &v).re.sqrt();
        if nrm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / nrm).collect());
            svals.push(0.0);
        }
    }
    Ok((CMat::from_fn(n, n, |i, j| cols[j][i]), svals))
}

/// Two-qubit concurrence from the Takagi values of V^T (Y (x) Y) V.
pub fn concurrence(rho: &CMat) -> Result<f64> {
    check_two_qubit(rho)?;
    let v = sqrt_factor(rho)?;
    let tau = &(v.transpose().to_owned() * sigma_y2()) * &v;
    let s = linalg::singular_values(&tau)?;
    let mut s = s;
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

/// Entanglement of formation in nats.
pub fn eof_two_qubit(rho: &CMat) -> Result<f64> {
    let c = concurrence(rho)?.min(1.0);
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    let h = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.ln() };
    Ok(h(x) + h(1.0 - x))
}

/// Ensemble (columns sqrt(p)|z>) where every member has concurrence zero when
/// rho is separable, and sum_k p_k c_k equals the concurrence otherwise.
pub fn wootters_ensemble(rho: &CMat) -> Result<CMat> {
    check_two_qubit(rho)?;
    let v = sqrt_factor(rho)?;
    let tau = &(v.transpose().to_owned() * sigma_y2()) * &v;
    let (u, l) = takagi(&tau)?;
    let x = &v * &u.conjugate().to_owned();
    // y_1 = x_1, y_j = i x_j: tau_Y = diag(l1, -l2, -l3, -l4)
    let y = CMat::from_fn(4, 4, |i, j| if j == 0 { x[(i, j)] } else { x[(i, j)] * cx(0.0, 1.0) });
    let mut phases = [0.0f64; 4];
    if l[0] <= l[1] + l[2] + l[3] {
        phases = closing_phases(l[0], l[1], l[2], l[3]);
    }
    let h = [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, 1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];
    Ok(CMat::from_fn(4, 4, |i, k| {
        let mut s = cx(0.0, 0.0);
        for j in 0..4 {
            let th = 0.5 * phases[j];
            s += y[(i, j)] * cx(th.cos(), th.sin()) * h[k][j];
        }
        s * 0.5
    }))
}

/// Angles with l1 = l2 e^{i p2} + l3 e^{i p3} + l4 e^{i p4}, given l1 <= l2 + l3 + l4
/// and l1 >= l2 >= l3 >= l4 >= 0.
fn closing_phases(l1: f64, l2: f64, l3: f64, l4: f64) -> [f64; 4] {
    if l1 <= 0.0 {
        return [0.0; 4];
    }
    let d = (l1 - l4).max(l2 - l3).max(0.0);
    let p4 = if l4 > 0.0 {
        ((l1 * l1 + l4 * l4 - d * d) / (2.0 * l1 * l4)).clamp(-1.0, 1.0).acos()
    } else {
        0.0
    };
    let w = cx(l1, 0.0) - cx(p4.cos(), p4.sin()) * l4;
    let (p2, p3) = if l2 <= 0.0 {
        (0.0, 0.0)
    } else if w.norm() <= 1e-15 * l1 {
        (0.0, std::f64::consts::PI)
    } else {
        let dn = w.norm();
        let alpha = ((l2 * l2 + dn * dn - l3 * l3) / (2.0 * l2 * dn)).clamp(-1.0, 1.0).acos();
        let p2 = w.arg() + alpha;
        let rest = w - cx(p2.cos(), p2.sin()) * l2;
        (p2, if l3 > 0.0 { rest.arg() } else { 0.0 })
    };
    [0.0, p2, p3, p4]
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PinskerGap {
    /// sqrt(2 S(rho || sigma)).
    pub lhs: f64,
    /// ||rho - sigma||_1.
    pub rhs: f64,
    pub slack: f64,
}

pub fn pinsker_gap(rho: &CMat, sigma: &CMat) -> Result<PinskerGap> {
    let s = hilbert::relative_entropy(rho, sigma)?.max(0.0);
    let lhs = (2.0 * s).sqrt();
    let rhs = linalg::trace_norm(&linalg::sub(rho, sigma))?;
    Ok(PinskerGap { lhs, rhs, slack: lhs - rhs })
}

/// Minimum eigenvalue floor used when deciding support for relative entropy.
pub fn support_floor() -> f64 {
    EIG_FLOOR
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> CMat {
        let h = 0.5f64.sqrt();
        let psi = vec![cx(h, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(h, 0.0)];
        linalg::outer(&psi, &psi)
    }

    #[test]
    fn bell_ppt_numbers() {
        let sp = SiteSpace::new(2, 2).unwrap();
        let r = ppt_analysis(&bell(), &sp, &[0]).unwrap();
        assert!((r.delta - 0.5).abs() < 1e-10);
        assert!((r.negativity - 2f64.ln()).abs() < 1e-10);
        assert_eq!(r.negative_count, 1);
        assert!(r.identity_residual < 1e-12);
    }

    #[test]
    fn bell_formation_and_concurrence() {
        assert!((concurrence(&bell()).unwrap() - 1.0).abs() < 1e-10);
        assert!((eof_two_qubit(&bell()).unwrap() - 2f64.ln()).abs() < 1e-10);
        let prod = linalg::kron(&linalg::outer(&[cx(1.0, 0.0), cx(0.0, 0.0)], &[cx(1.0, 0.0), cx(0.0, 0.0)]), &linalg::scale_re(&linalg::identity(2), 0.5));
        assert!(eof_two_qubit(&prod).unwrap().abs() < 1e-10);
    }

    #[test]
    fn wootters_ensemble_reconstructs() {
        let mut r = random::rng(2);
        for _ in 0..10 {
            let rho = random::density(4, 4, &mut r);
            let z = wootters_ensemble(&rho).unwrap();
            let back = &z * z.adjoint();
            assert!(linalg::max_abs(&linalg::sub(&back, &rho)) < 1e-10);
            if concurrence(&rho).unwrap() == 0.0 {
                for k in 0..4 {
                    let col = linalg::column(&z, k);
                    let t = linalg::matvec(&sigma_y2(), &col.iter().map(|c| c.conj()).collect::<Vec<_>>());
                    let c = linalg::inner(&col, &t).norm();
                    assert!(c < 1e-10, "member {k} concurrence {c}");
                }
            }
        }
    }

    #[test]
    fn bell_relative_entropy_is_ln2() {
        let sp = SiteSpace::new(2, 2).unwrap();
        let r = ppt_relative_exact(&bell(), &sp, &[0], &SolverConfig::default(), &[]).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-4, "{} gap {}", r.value, r.gap);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
