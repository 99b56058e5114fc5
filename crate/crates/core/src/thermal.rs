//! Spectral decompositions, Gibbs states, matrix functions, real-time
//! evolution and Bohr-frequency resolved operators.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, OperatorMatrix, SiteSpace, EIG_FLOOR};
use crate::linalg::{self, c64, cx, CMat};

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Arc<CMat>,
    pub space: SiteSpace,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// U^dagger O U.
    pub fn to_eigenbasis(&self, o: &CMat) -> CMat {
        linalg::to_basis(&self.vectors, o)
    }

    /// U M U^dagger.
    pub fn from_eigenbasis(&self, m: &CMat) -> CMat {
        linalg::from_basis(&self.vectors, m)
    }

    pub fn apply(&self, f: impl Fn(f64) -> c64) -> CMat {
        let fv: Vec<c64> = self.values.iter().map(|&e| f(e)).collect();
        linalg::from_spectrum(&self.vectors, &fv)
    }
}

pub fn spectral_decompose(h: &OperatorMatrix) -> Result<SpectralDecomposition> {
    spectral_decompose_mat(&h.mat, h.space.clone())
}

pub fn spectral_decompose_mat(h: &CMat, space: SiteSpace) -> Result<SpectralDecomposition> {
    let scale = linalg::max_abs(h).max(1.0);
    if linalg::hermiticity_defect(h) > 1e-10 * scale {
        return Err(Error::Invalid("spectral_decompose needs a Hermitian operator".into()));
    }
    let e = linalg::eigh(h)?;
    Ok(SpectralDecomposition { values: e.values, vectors: Arc::new(e.vectors), space })
}

pub const SPECTRUM_NOISE: f64 = 1e-14;

/// A normalized state that is diagonal in a known basis.
#[derive(Clone, Debug)]
pub struct StateSpectrum {
    pub probs: Vec<f64>,
    pub vectors: Arc<CMat>,
}

impl StateSpectrum {
    /// Eigenvalues at or below `SPECTRUM_NOISE` are roundoff of the solver and set to zero;
    /// fractional powers would otherwise amplify them.
    pub fn from_density(rho: &CMat) -> Result<Self> {
        let e = linalg::eigh(rho)?;
        let probs = e.values.iter().map(|&p| if p <= SPECTRUM_NOISE { 0.0 } else { p }).collect();
        Ok(Self { probs, vectors: Arc::new(e.vectors) })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    /// rho^alpha; negative powers need every eigenvalue above the floor.
    pub fn power(&self, alpha: f64) -> Result<CMat> {
        if alpha < 0.0 {
            if let Some(p) = self.probs.iter().find(|&&p| p <= EIG_FLOOR) {
                return Err(Error::Singular(format!("rho^{alpha} with eigenvalue {p:e}")));
            }
        }
        let f: Vec<f64> = self.probs.iter().map(|&p| power(p, alpha)).collect();
        Ok(linalg::from_spectrum_re(&self.vectors, &f))
    }

    pub fn matrix(&self) -> CMat {
        linalg::from_spectrum_re(&self.vectors, &self.probs)
    }

    pub fn to_eigenbasis(&self, o: &CMat) -> CMat {
        linalg::to_basis(&self.vectors, o)
    }

    pub fn from_eigenbasis(&self, m: &CMat) -> CMat {
        linalg::from_basis(&self.vectors, m)
    }

    pub fn is_full_rank(&self) -> bool {
        self.probs.iter().all(|&p| p > EIG_FLOOR)
    }
}

/// p^alpha with 0^0 = 1 and 0^alpha = 0 for alpha > 0.
pub fn power(p: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else if p <= 0.0 {
        0.0
    } else {
        p.powf(alpha)
    }
}

#[derive(Clone, Debug)]
pub struct GibbsState {
    pub beta: f64,
    pub ln_z: f64,
    pub spectrum: StateSpectrum,
    pub hamiltonian: Arc<SpectralDecomposition>,
}

/// Normalized Gibbs state; ln Z kept separately.
pub fn gibbs_state(spec: &Arc<SpectralDecomposition>, beta: f64) -> Result<GibbsState> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Invalid(format!("beta = {beta} must be finite and >= 0")));
    }
    let e0 = spec.values.first().copied().unwrap_or(0.0);
    let w: Vec<f64> = spec.values.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let zs: f64 = w.iter().sum();
    let probs = w.iter().map(|x| x / zs).collect();
    Ok(GibbsState {
        beta,
        ln_z: -beta * e0 + zs.ln(),
        spectrum: StateSpectrum { probs, vectors: spec.vectors.clone() },
        hamiltonian: spec.clone(),
    })
}

impl GibbsState {
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::trusted(self.spectrum.matrix(), self.hamiltonian.space.clone(), Some(self.ln_z))
    }

    pub fn space(&self) -> &SiteSpace {
        &self.hamiltonian.space
    }
}

/// exp(iHt) O exp(-iHt) given O already in the eigenbasis.
pub fn evolve_in_eigenbasis(o_eig: &CMat, values: &[f64], t: f64) -> CMat {
    let ph: Vec<c64> = values.iter().map(|&e| cx((e * t).cos(), (e * t).sin())).collect();
    CMat::from_fn(o_eig.nrows(), o_eig.ncols(), |i, j| o_eig[(i, j)] * ph[i] * ph[j].conj())
}

pub fn heisenberg_evolve(o: &CMat, spec: &SpectralDecomposition, t: f64) -> Result<CMat> {
    if !t.is_finite() {
        return Err(Error::Invalid("non-finite time".into()));
    }
    let oe = spec.to_eigenbasis(o);
    Ok(spec.from_eigenbasis(&evolve_in_eigenbasis(&oe, &spec.values, t)))
}

#[derive(Clone, Debug)]
pub struct OmegaComponent {
    pub omega: f64,
    pub mat: CMat,
}

/// O = sum_w O_w with ad_H(O_w) = w O_w; Bohr frequencies closer than
/// `bin_tol` are merged (single linkage on the sorted gaps).
pub fn omega_decompose(o: &CMat, spec: &SpectralDecomposition, bin_tol: f64) -> Result<Vec<OmegaComponent>> {
    if !(bin_tol > 0.0) {
        return Err(Error::Invalid("bin_tol must be positive".into()));
    }
    let d = spec.dim();
    let oe = spec.to_eigenbasis(o);
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for j in 0..d {
        for i in 0..d {
            if oe[(i, j)].norm() > 0.0 {
                entries.push((spec.values[i] - spec.values[j], i, j));
            }
        }
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let mut end = start + 1;
        while end < entries.len() && entries[end].0 - entries[end - 1].0 <= bin_tol {
            end += 1;
        }
        let group = &entries[start..end];
        let omega = group.iter().map(|e| e.0).sum::<f64>() / group.len() as f64;
        let mut m = linalg::zeros(d, d);
        for &(_, i, j) in group {
            m[(i, j)] = oe[(i, j)];
        }
        out.push(OmegaComponent { omega, mat: spec.from_eigenbasis(&m) });
        start = end;
    }
    Ok(out)
}

/// Default Bohr-frequency bin width 1e-9 ||H||.
pub fn default_bin_tol(spec: &SpectralDecomposition) -> f64 {
    1e-9 * spec.norm().max(1.0)
}

/// rho proportional to sum_i a_i exp(-t_i H), a completely monotone mixture of Gibbs states.
pub fn passive_mixture(spec: &Arc<SpectralDecomposition>, weights: &[(f64, f64)]) -> Result<StateSpectrum> {
    if weights.is_empty() {
        return Err(Error::Invalid("empty passive mixture".into()));
    }
    for &(t, a) in weights {
        if a < 0.0 || t < 0.0 || !t.is_finite() {
            return Err(Error::Invalid(format!("weight ({t}, {a}) must be nonnegative")));
        }
    }
    let e0 = spec.values[0];
    // a e^{-tH} = a Z_t rho_t, with the a Z_t factors rescaled in log space
    let parts: Vec<(f64, Vec<f64>, f64)> = weights
        .iter()
        .filter(|w| w.1 > 0.0)
        .map(|&(t, a)| {
            let w: Vec<f64> = spec.values.iter().map(|&e| (-t * (e - e0)).exp()).collect();
            let z: f64 = w.iter().sum();
            (a.ln() - t * e0 + z.ln(), w, z)
        })
        .collect();
    let top = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut probs = vec![0.0; spec.dim()];
    let mut total = 0.0;
    for (ls, w, z) in &parts {
        let scale = (ls - top).exp();
        for (p, wi) in probs.iter_mut().zip(w) {
            *p += scale * wi / z;
        }
        total += scale;
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Invalid("passive mixture normalization not finite".into()));
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(StateSpectrum { probs, vectors: spec.vectors.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::pauli;

    fn qubit(m: CMat) -> Arc<SpectralDecomposition> {
        Arc::new(spectral_decompose_mat(&m, SiteSpace::new(1, 2).unwrap()).unwrap())
    }

    #[test]
    fn single_spin_population() {
        let s = qubit(linalg::scale_re(&pauli::z(), -1.0));
        let g = gibbs_state(&s, 1.0).unwrap();
        let rho = g.density();
        let e = std::f64::consts::E;
        assert!((rho.mat()[(0, 0)].re - e / (e + 1.0 / e)).abs() < 1e-15);
        assert!((g.ln_z - (e + 1.0 / e).ln()).abs() < 1e-14);
    }

    #[test]
    fn beta_zero_is_maximally_mixed_and_negative_refused() {
        let s = qubit(pauli::x());
        let g = gibbs_state(&s, 0.0).unwrap();
        assert!(g.spectrum.probs.iter().all(|&p| (p - 0.5).abs() < 1e-15));
        assert!(gibbs_state(&s, -1.0).is_err());
    }

    #[test]
    fn power_requires_full_rank() {
        let st = StateSpectrum { probs: vec![1.0, 0.0], vectors: Arc::new(linalg::identity(2)) };
        assert!(st.power(-0.5).is_err());
        assert!(linalg::max_abs(&(&st.power(0.0).unwrap() - &linalg::identity(2))) < 1e-15);
    }

    #[test]
    fn omega_components_of_commuting_operator() {
        let s = qubit(pauli::z());
        let comps = omega_decompose(&pauli::z(), &s, 1e-9).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].omega, 0.0);
        let comps = omega_decompose(&pauli::x(), &s, 1e-9).unwrap();
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn passive_single_weight_is_gibbs() {
        let s = qubit(pauli::word("X").unwrap());
        let p = passive_mixture(&s, &[(0.7, 3.0)]).unwrap();
        let g = gibbs_state(&s, 0.7).unwrap();
        for (a, b) in p.probs.iter().zip(&g.spectrum.probs) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(passive_mixture(&s, &[(1.0, -1.0)]).is_err());
    }
}
