//! Skew correlations and skew information, quantum Fisher information and
//! its matrix, and the bound evaluators that consume them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;
use crate::kernels::{self, BoundConstants, KernelSpec, QuadConfig};
use crate::linalg::{self, c64, cx, CMat};
use crate::qcorr;
use crate::thermal::{power, GibbsState, StateSpectrum};

/// Order of the Gauss-Legendre rule for the alpha average.
pub const ALPHA_ORDER: usize = 32;

/// Fisher terms with lambda_s + lambda_s' below this are skipped.
pub const FISHER_FLOOR: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Refused(format!(
            "alpha = {alpha} outside [0, 1]: no bound of this kind can be obtained in general"
        )));
    }
    Ok(())
}

/// tr(rho^{1-alpha} A rho^alpha B) from eigenbasis matrices.
fn skew_trace(p: &[f64], ae: &CMat, be: &CMat, alpha: f64) -> c64 {
    let d = p.len();
    let pl: Vec<f64> = p.iter().map(|&x| power(x, 1.0 - alpha)).collect();
    let pr: Vec<f64> = p.iter().map(|&x| power(x, alpha)).collect();
    let mut s = cx(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            s += ae[(i, j)] * be[(j, i)] * (pl[i] * pr[j]);
        }
    }
    s
}

fn plain_trace(p: &[f64], ae: &CMat, be: &CMat) -> c64 {
    let d = p.len();
    let mut s = cx(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            s += ae[(i, j)] * be[(j, i)] * p[i];
        }
    }
    s
}

/// Q^(alpha)(A, B) = tr(rho A B) - tr(rho^{1-alpha} A rho^alpha B).
pub fn q_alpha(st: &StateSpectrum, a: &CMat, b: &CMat, alpha: f64) -> Result<c64> {
    check_alpha(alpha)?;
    let ae = st.to_eigenbasis(a);
    let be = st.to_eigenbasis(b);
    Ok(plain_trace(&st.probs, &ae, &be) - skew_trace(&st.probs, &ae, &be, alpha))
}

/// Several alphas sharing one basis change.
pub fn q_alpha_many(st: &StateSpectrum, a: &CMat, b: &CMat, alphas: &[f64]) -> Result<Vec<c64>> {
    for &al in alphas {
        check_alpha(al)?;
    }
    let ae = st.to_eigenbasis(a);
    let be = st.to_eigenbasis(b);
    let base = plain_trace(&st.probs, &ae, &be);
    Ok(alphas.iter().map(|&al| base - skew_trace(&st.probs, &ae, &be, al)).collect())
}

/// Integral of Q^(alpha) over alpha in [0, 1] with a fixed 32-point rule.
pub fn q_alpha_bar(st: &StateSpectrum, a: &CMat, b: &CMat) -> Result<c64> {
    let (x, w) = kernels::gl_on(0.0, 1.0, ALPHA_ORDER);
    let vals = q_alpha_many(st, a, b, &x)?;
    Ok(vals.iter().zip(&w).map(|(v, w)| v * *w).sum())
}

/// Q^(alpha) for a Gibbs state through the real-time kernel:
/// tr(rho [int g_{alpha,beta}(t) A(t) dt + c A, B]) where c is the delta weight.
pub fn q_alpha_kernel(g: &GibbsState, a: &CMat, b: &CMat, alpha: f64, quad: &QuadConfig) -> Result<(c64, f64)> {
    check_alpha(alpha)?;
    if g.beta == 0.0 || alpha == 0.0 {
        return Ok((cx(0.0, 0.0), 0.0));
    }
    let spec = KernelSpec::GAlphaBeta { alpha, beta: g.beta };
    let r = kernels::weighted_operator_integral(&spec, &g.hamiltonian, a, quad)?;
    let rho = g.spectrum.matrix();
    let c = linalg::commutator(&r.value, b);
    let err = r.error_estimate * linalg::op_norm(b)? * 2.0;
    Ok((linalg::trace_prod(&rho, &c), err))
}

/// I^(alpha)(K) = tr(rho K^2) - tr(rho^{1-alpha} K rho^alpha K).
pub fn skew_information(st: &StateSpectrum, k: &CMat, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if linalg::hermiticity_defect(k) > 1e-12 * linalg::max_abs(k).max(1.0) {
        return Err(Error::Invalid("K must be Hermitian".into()));
    }
    Ok(q_alpha(st, k, k, alpha)?.re)
}

/// F(O_i, O_j) = sum 2 (l_s - l_s')^2 / (l_s + l_s') <s|O_i|s'><s'|O_j|s>.
pub fn fisher_matrix_entry(st: &StateSpectrum, oi: &CMat, oj: &CMat) -> c64 {
    let ie = st.to_eigenbasis(oi);
    let je = st.to_eigenbasis(oj);
    fisher_from_eigenbasis(&st.probs, &ie, &je)
}

fn fisher_from_eigenbasis(p: &[f64], ie: &CMat, je: &CMat) -> c64 {
    let d = p.len();
    let mut s = cx(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            let sum = p[a] + p[b];
            if sum < FISHER_FLOOR {
                continue;
            }
            let diff = p[a] - p[b];
            s += ie[(a, b)] * je[(b, a)] * (2.0 * diff * diff / sum);
        }
    }
    s
}

pub fn fisher_information(st: &StateSpectrum, k: &CMat) -> f64 {
    fisher_matrix_entry(st, k, k).re
}

/// Full matrix F(O_i, O_j).
pub fn fisher_matrix(st: &StateSpectrum, ops: &[CMat]) -> Vec<Vec<c64>> {
    let es: Vec<CMat> = ops.iter().map(|o| st.to_eigenbasis(o)).collect();
    es.iter().map(|x| es.iter().map(|y| fisher_from_eigenbasis(&st.probs, x, y)).collect()).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FisherReport {
    pub fisher: f64,
    /// (alpha, I^(alpha)).
    pub skew: Vec<(f64, f64)>,
}

pub fn fisher_report(st: &StateSpectrum, k: &CMat, alphas: &[f64]) -> Result<FisherReport> {
    let skew = alphas.iter().map(|&a| Ok((a, skew_information(st, k, a)?))).collect::<Result<Vec<_>>>()?;
    Ok(FisherReport { fisher: fisher_information(st, k), skew })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Theorem3,
    Corollary2Skew,
    Corollary2Fisher,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub kind: BoundKind,
    pub measured: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Geometry entering the bounds: boundary sizes, distance and system size.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundGeometry {
    pub surface_a: usize,
    pub surface_b: usize,
    pub r: usize,
    pub n: usize,
}

pub fn bound_rhs(kind: BoundKind, constants: Option<&BoundConstants>, geo: &BoundGeometry) -> Result<f64> {
    let c = constants.ok_or_else(|| Error::Invalid("bound constants missing".into()))?;
    Ok(match kind {
        BoundKind::Theorem3 => c.theorem3_rhs(geo.surface_a, geo.surface_b, geo.r),
        BoundKind::Corollary2Skew => c.corollary2_skew_rhs(geo.n),
        BoundKind::Corollary2Fisher => c.corollary2_fisher_rhs(geo.n),
    })
}

pub fn bound_check(
    kind: BoundKind,
    constants: Option<&BoundConstants>,
    geo: &BoundGeometry,
    measured: f64,
    tol: f64,
) -> Result<BoundCheck> {
    let rhs = bound_rhs(kind, constants, geo)?;
    Ok(BoundCheck { kind, measured, rhs, pass: measured <= rhs + tol })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FisherIdentity {
    /// sum_m p_m (<AB>_m - <A>_m <B>_m) over the constructed decomposition.
    pub lhs: f64,
    /// F(O_A, O_B) / 4.
    pub rhs: f64,
    pub residual: f64,
}

/// Checks the decomposition identity when L_A and L_B commute exactly.
pub fn fisher_decomposition_identity(g: &GibbsState, oa: &OperatorMatrix, ob: &OperatorMatrix) -> Result<FisherIdentity> {
    if oa.support.iter().any(|x| ob.support.contains(x)) {
        return Err(Error::Refused("supports overlap".into()));
    }
    let scale = linalg::op_norm(&oa.mat)?.max(linalg::op_norm(&ob.mat)?).max(1.0);
    if linalg::op_norm(&linalg::commutator(&oa.mat, &ob.mat))? > 1e-10 * scale {
        return Err(Error::Refused("observables do not commute".into()));
    }
    let ae = g.spectrum.to_eigenbasis(&oa.mat);
    let be = g.spectrum.to_eigenbasis(&ob.mat);
    let lae = qcorr::l_gibbs_eigenbasis(g, &ae);
    let lbe = qcorr::l_gibbs_eigenbasis(g, &be);
    if linalg::op_norm(&linalg::commutator(&lae, &lbe))? > 1e-10 * scale * scale {
        return Err(Error::Refused("L_A and L_B do not commute; the identity is not claimed".into()));
    }
    // work in the eigenbasis: sqrt(rho) is diagonal there
    let (psi, _) = qcorr::joint_eigenbasis(&lae, &lbe)?;
    let d = psi.nrows();
    let sq: Vec<f64> = g.spectrum.probs.iter().map(|p| p.sqrt()).collect();
    let phi = CMat::from_fn(d, d, |i, m| psi[(i, m)] * sq[i]);
    let aphi = &ae * &phi;
    let bphi = &be * &phi;
    let abphi = &ae * &bphi;
    let mut lhs = 0.0;
    for m in 0..d {
        let (mut p, mut xa, mut xb, mut xab) = (0.0, cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0));
        for i in 0..d {
            let c = phi[(i, m)].conj();
            p += phi[(i, m)].norm_sqr();
            xa += c * aphi[(i, m)];
            xb += c * bphi[(i, m)];
            xab += c * abphi[(i, m)];
        }
        if p > 1e-300 {
            lhs += (xab - xa * xb / p).re;
        }
    }
    let rhs = fisher_from_eigenbasis(&g.spectrum.probs, &ae, &be).re / 4.0;
    Ok(FisherIdentity { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{embed_local, pauli, SiteSpace};
    use crate::random;
    use std::sync::Arc;

    #[test]
    fn alpha_zero_and_pure_state() {
        let mut r = random::rng(4);
        let rho = random::density(4, 4, &mut r);
        let st = StateSpectrum::from_density(&rho).unwrap();
        let a = random::unit_hermitian(4, &mut r);
        let b = random::unit_hermitian(4, &mut r);
        assert!(q_alpha(&st, &a, &b, 0.0).unwrap().norm() < 1e-14);
        assert!(q_alpha(&st, &a, &b, 1.3).is_err());
        let psi = random::pure_vector(4, &mut r);
        let pst = StateSpectrum::from_density(&linalg::outer(&psi, &psi)).unwrap();
        let rho_p = pst.matrix();
        let c = linalg::trace_prod(&rho_p, &(&a * &b)) - linalg::trace_prod(&rho_p, &a) * linalg::trace_prod(&rho_p, &b);
        // rho^0 is the identity, so the pure-state identity holds on the open interval
        for al in [0.25, 0.5, 0.75] {
            let q = q_alpha(&pst, &a, &b, al).unwrap();
            assert!((q - c).norm() < 1e-10);
        }
    }

    #[test]
    fn fisher_of_pure_state_is_four_variances() {
        let mut r = random::rng(8);
        let psi = random::pure_vector(4, &mut r);
        let st = StateSpectrum::from_density(&linalg::outer(&psi, &psi)).unwrap();
        let k = random::hermitian(4, &mut r);
        let var = linalg::expect_vec(&(&k * &k), &psi).re - linalg::expect_vec(&k, &psi).re.powi(2);
        assert!((fisher_information(&st, &k) - 4.0 * var).abs() < 1e-9);
    }

    #[test]
    fn kernel_route_matches_direct() {
        use crate::model::{build_model, ModelSpec};
        use crate::thermal::{gibbs_state, spectral_decompose_mat};
        let h = build_model(&ModelSpec::tfi_chain(4, 1.0, 1.0)).unwrap();
        let s = Arc::new(spectral_decompose_mat(&h.matrix().unwrap(), h.space.clone()).unwrap());
        let g = gibbs_state(&s, 1.0).unwrap();
        let a = embed_local(&pauli::x(), &[0], &h.space).unwrap().mat;
        let b = embed_local(&pauli::x(), &[2], &h.space).unwrap().mat;
        for al in [0.25, 0.5, 0.75, 1.0] {
            let direct = q_alpha(&g.spectrum, &a, &b, al).unwrap();
            let (k, _) = q_alpha_kernel(&g, &a, &b, al, &QuadConfig::default()).unwrap();
            assert!((direct - k).norm() < 1e-8, "alpha {al}: {direct} vs {k}");
        }
    }

    #[test]
    fn product_state_identity_holds() {
        use crate::thermal::{gibbs_state, spectral_decompose_mat};
        let sp = SiteSpace::new(2, 2).unwrap();
        let h = linalg::add(
            &embed_local(&linalg::add(&pauli::z(), &linalg::scale_re(&pauli::x(), 0.4)), &[0], &sp).unwrap().mat,
            &embed_local(&linalg::scale_re(&pauli::x(), 0.7), &[1], &sp).unwrap().mat,
        );
        let s = Arc::new(spectral_decompose_mat(&h, sp.clone()).unwrap());
        let g = gibbs_state(&s, 0.8).unwrap();
        let oa = embed_local(&pauli::x(), &[0], &sp).unwrap();
        let ob = embed_local(&pauli::z(), &[1], &sp).unwrap();
        let id = fisher_decomposition_identity(&g, &oa, &ob).unwrap();
        assert!(id.residual < 1e-8);
    }
}
