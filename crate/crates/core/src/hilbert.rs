//! Tensor-product bookkeeping and operator calculus on d0^n dimensional spaces.
//!
//! Sites are stored as a list of labels. The first label is the leftmost
//! Kronecker factor, so with two qubits `Z` on label 0 is `diag(1, 1, -1, -1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, cx, CMat};

/// Eigenvalues below this are treated as zero before taking logarithms.
pub const EIG_FLOOR: f64 = 1e-12;

/// Default hard cap on n * log2(d0).
pub const DEFAULT_MAX_LOG2_DIM: f64 = 14.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteSpace {
    d0: usize,
    labels: Vec<usize>,
}

impl SiteSpace {
    pub fn new(n: usize, d0: usize) -> Result<Self> {
        Self::with_cap(n, d0, DEFAULT_MAX_LOG2_DIM)
    }

    pub fn with_cap(n: usize, d0: usize, max_log2_dim: f64) -> Result<Self> {
        if d0 < 2 {
            return Err(Error::Invalid(format!("local dimension {d0} < 2")));
        }
        let log2 = n as f64 * (d0 as f64).log2();
        if log2 > max_log2_dim + 1e-12 {
            return Err(Error::SizeCap(format!(
                "n = {n}, d0 = {d0} gives log2(dim) = {log2:.2} > {max_log2_dim}"
            )));
        }
        Ok(Self { d0, labels: (0..n).collect() })
    }

    /// A space over an explicit label list (used for reduced states).
    pub fn from_labels(d0: usize, labels: Vec<usize>) -> Result<Self> {
        if d0 < 2 {
            return Err(Error::Invalid(format!("local dimension {d0} < 2")));
        }
        let mut s = labels.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != labels.len() {
            return Err(Error::Invalid("duplicate site labels".into()));
        }
        Ok(Self { d0, labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d0(&self) -> usize {
        self.d0
    }

    pub fn dim(&self) -> usize {
        self.d0.pow(self.labels.len() as u32)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Dimension of a subset of `k` sites.
    pub fn sub_dim(&self, k: usize) -> usize {
        self.d0.pow(k as u32)
    }

    /// Subspace keeping `keep`, ordered as in `self`.
    pub fn restrict(&self, keep: &[usize]) -> Result<SiteSpace> {
        let pos = self.positions(keep)?;
        let mut pos = pos;
        pos.sort_unstable();
        Ok(SiteSpace { d0: self.d0, labels: pos.iter().map(|&p| self.labels[p]).collect() })
    }

    fn stride(&self, pos: usize) -> usize {
        self.d0.pow((self.n() - 1 - pos) as u32)
    }

    fn positions(&self, sites: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(sites.len());
        for &s in sites {
            let p = self
                .position(s)
                .ok_or_else(|| Error::Invalid(format!("site {s} not in space {:?}", self.labels)))?;
            if out.contains(&p) {
                return Err(Error::Invalid(format!("duplicate site {s}")));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Offsets of every digit assignment of `positions` (first = most significant).
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let mut offs = vec![0usize];
        for &p in positions {
            let st = self.stride(p);
            let mut next = Vec::with_capacity(offs.len() * self.d0);
            for &o in &offs {
                for d in 0..self.d0 {
                    next.push(o + d * st);
                }
            }
            offs = next;
        }
        offs
    }

    /// Index offsets for (`sites` in given order, complement in space order):
    /// basis index = first[i] + second[j].
    pub fn split_offsets(&self, sites: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let pos = self.positions(sites)?;
        let rest: Vec<usize> = (0..self.n()).filter(|p| !pos.contains(p)).collect();
        Ok((self.offsets(&pos), self.offsets(&rest)))
    }

    /// Sites of `self` not in `x`.
    pub fn complement(&self, x: &[usize]) -> Vec<usize> {
        self.labels.iter().copied().filter(|l| !x.contains(l)).collect()
    }
}

/// Dense operator on a [`SiteSpace`] with a declared support.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub mat: CMat,
    pub space: SiteSpace,
    pub support: Vec<usize>,
    pub hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps a full matrix with full support.
    pub fn new(mat: CMat, space: SiteSpace) -> Result<Self> {
        let support = space.labels().to_vec();
        Self::with_support(mat, space, support)
    }

    pub fn with_support(mat: CMat, space: SiteSpace, mut support: Vec<usize>) -> Result<Self> {
        if mat.nrows() != space.dim() || mat.ncols() != space.dim() {
            return Err(Error::Dimension(format!(
                "matrix {}x{} on space of dim {}",
                mat.nrows(),
                mat.ncols(),
                space.dim()
            )));
        }
        support.sort_unstable();
        support.dedup();
        let hermitian = linalg::hermiticity_defect(&mat) <= 1e-12;
        Ok(Self { mat, space, support, hermitian })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: linalg::adjoint(&self.mat),
            space: self.space.clone(),
            support: self.support.clone(),
            hermitian: self.hermitian,
        }
    }
}

/// A normalized state, optionally carrying ln Z when thermal.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub op: OperatorMatrix,
    pub ln_z: Option<f64>,
}

impl DensityMatrix {
    /// Validates trace and positivity (eigenvalues >= -1e-10).
    pub fn new(mat: CMat, space: SiteSpace) -> Result<Self> {
        let op = OperatorMatrix::new(mat, space)?;
        let tr = linalg::trace(&op.mat);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::Invalid(format!("trace {tr} != 1")));
        }
        if linalg::hermiticity_defect(&op.mat) > 1e-10 {
            return Err(Error::Invalid("density matrix not Hermitian".into()));
        }
        let ev = linalg::eigvalsh(&op.mat)?;
        if ev.first().copied().unwrap_or(0.0) < -1e-10 {
            return Err(Error::Invalid(format!("negative eigenvalue {}", ev[0])));
        }
        Ok(Self { op, ln_z: None })
    }

    /// Skips the spectral check; callers guarantee positivity.
    pub(crate) fn trusted(mat: CMat, space: SiteSpace, ln_z: Option<f64>) -> Self {
        let support = space.labels().to_vec();
        Self { op: OperatorMatrix { mat, space, support, hermitian: true }, ln_z }
    }

    pub fn mat(&self) -> &CMat {
        &self.op.mat
    }

    pub fn space(&self) -> &SiteSpace {
        &self.op.space
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Pure state |psi><psi| (normalizes psi).
    pub fn pure(psi: &[c64], space: SiteSpace) -> Result<Self> {
        let nrm = linalg::inner(psi, psi).re.sqrt();
        if nrm == 0.0 {
            return Err(Error::Invalid("zero vector".into()));
        }
        let v: Vec<c64> = psi.iter().map(|z| z / nrm).collect();
        if v.len() != space.dim() {
            return Err(Error::Dimension("state vector length".into()));
        }
        Ok(Self::trusted(linalg::outer(&v, &v), space, None))
    }

    pub fn maximally_mixed(space: SiteSpace) -> Self {
        let d = space.dim();
        Self::trusted(linalg::scale_re(&linalg::identity(d), 1.0 / d as f64), space, None)
    }

    pub fn expect(&self, o: &CMat) -> c64 {
        linalg::trace_prod(&self.op.mat, o)
    }
}

/// Embeds a local operator acting on `sites` (listed order = local Kronecker order).
pub fn embed_local(local: &CMat, sites: &[usize], space: &SiteSpace) -> Result<OperatorMatrix> {
    let d = space.dim();
    let mut m = linalg::zeros(d, d);
    embed_add(local, sites, space, &mut m)?;
    OperatorMatrix::with_support(m, space.clone(), sites.to_vec())
}

/// Adds the embedding of a local operator into `m` in place.
pub fn embed_add(local: &CMat, sites: &[usize], space: &SiteSpace, m: &mut CMat) -> Result<()> {
    let dl = space.sub_dim(sites.len());
    if local.nrows() != dl || local.ncols() != dl {
        return Err(Error::Dimension(format!(
            "local operator {}x{} on {} sites needs {dl}",
            local.nrows(),
            local.ncols(),
            sites.len()
        )));
    }
    if m.nrows() != space.dim() || m.ncols() != space.dim() {
        return Err(Error::Dimension("embedding target has the wrong size".into()));
    }
    let (offl, offr) = space.split_offsets(sites)?;
    for (b, &ob) in offl.iter().enumerate() {
        for (a, &oa) in offl.iter().enumerate() {
            let v = local[(a, b)];
            if v != cx(0.0, 0.0) {
                for &r in &offr {
                    m[(oa + r, ob + r)] += v;
                }
            }
        }
    }
    Ok(())
}

/// (L on `sites`) times a full matrix, without forming the embedding.
pub fn local_left_multiply(local: &CMat, sites: &[usize], space: &SiteSpace, m: &CMat) -> Result<CMat> {
    let (offl, offr) = space.split_offsets(sites)?;
    let dl = offl.len();
    let mut out = linalg::zeros(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        for &r in &offr {
            for a in 0..dl {
                let mut s = cx(0.0, 0.0);
                for b in 0..dl {
                    s += local[(a, b)] * m[(offl[b] + r, c)];
                }
                out[(offl[a] + r, c)] = s;
            }
        }
    }
    Ok(out)
}

/// Partial trace of a full matrix onto `keep` (result ordered as in `space`).
pub fn partial_trace_mat(m: &CMat, space: &SiteSpace, keep: &[usize]) -> Result<(CMat, SiteSpace)> {
    if keep.is_empty() {
        return Err(Error::Invalid("empty keep set".into()));
    }
    let sub = space.restrict(keep)?;
    let (offk, offr) = space.split_offsets(sub.labels())?;
    let dk = offk.len();
    let mut out = linalg::zeros(dk, dk);
    for b in 0..dk {
        for a in 0..dk {
            let mut s = cx(0.0, 0.0);
            for &r in &offr {
                s += m[(offk[a] + r, offk[b] + r)];
            }
            out[(a, b)] = s;
        }
    }
    Ok((out, sub))
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let (m, sub) = partial_trace_mat(rho.mat(), rho.space(), keep)?;
    Ok(DensityMatrix::trusted(linalg::hermitian_part(&m), sub, None))
}

/// Partial transpose on the factor `subset_a`.
pub fn partial_transpose(op: &OperatorMatrix, subset_a: &[usize]) -> Result<OperatorMatrix> {
    let space = &op.space;
    let (offa, offr) = space.split_offsets(subset_a)?;
    let d = space.dim();
    let mut out = linalg::zeros(d, d);
    for &r2 in &offr {
        for &a2 in &offa {
            for &r in &offr {
                for &a in &offa {
                    out[(a + r, a2 + r2)] = op.mat[(a2 + r, a + r2)];
                }
            }
        }
    }
    OperatorMatrix::with_support(out, space.clone(), op.support.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schatten {
    TraceNorm,
    OpNorm,
    HsNorm,
}

pub fn schatten(m: &CMat, kind: Schatten) -> Result<f64> {
    if !linalg::is_finite(m) {
        return Err(Error::Invalid("non-finite entries".into()));
    }
    match kind {
        Schatten::TraceNorm => linalg::trace_norm(m),
        Schatten::OpNorm => linalg::op_norm(m),
        Schatten::HsNorm => Ok(linalg::hs_norm(m)),
    }
}

pub fn von_neumann_entropy(m: &CMat) -> Result<f64> {
    let ev = linalg::eigvalsh(m)?;
    Ok(ev.iter().filter(|&&x| x > EIG_FLOOR).map(|&x| -x * x.ln()).sum())
}

/// S(rho || sigma) in nats.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.nrows() != sigma.nrows() {
        return Err(Error::Dimension("relative entropy operands".into()));
    }
    let er = linalg::eigvalsh(rho)?;
    let s_rho: f64 = er.iter().filter(|&&x| x > EIG_FLOOR).map(|&x| x * x.ln()).sum();
    let es = linalg::eigh(sigma)?;
    let diag = linalg::to_basis(&es.vectors, rho);
    let mut cross = 0.0;
    for (k, &mu) in es.values.iter().enumerate() {
        let w = diag[(k, k)].re;
        if mu <= EIG_FLOOR {
            if w > 1e-10 {
                return Err(Error::InfiniteRelativeEntropy);
            }
            continue;
        }
        cross += w * mu.ln();
    }
    Ok(s_rho - cross)
}

/// I(A:B) = S(A) + S(B) - S(AB).
pub fn mutual_information(rho: &DensityMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    let mut ab: Vec<usize> = a.iter().chain(b).copied().collect();
    ab.sort_unstable();
    let (rab, _) = partial_trace_mat(rho.mat(), rho.space(), &ab)?;
    let (ra, _) = partial_trace_mat(rho.mat(), rho.space(), a)?;
    let (rb, _) = partial_trace_mat(rho.mat(), rho.space(), b)?;
    Ok(von_neumann_entropy(&ra)? + von_neumann_entropy(&rb)? - von_neumann_entropy(&rab)?)
}

pub mod pauli {
    use super::*;

    pub fn i2() -> CMat {
        linalg::identity(2)
    }

    pub fn x() -> CMat {
        CMat::from_fn(2, 2, |i, j| if i != j { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
    }

    pub fn y() -> CMat {
        CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => cx(0.0, -1.0),
            (1, 0) => cx(0.0, 1.0),
            _ => cx(0.0, 0.0),
        })
    }

    pub fn z() -> CMat {
        CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => cx(1.0, 0.0),
            (1, 1) => cx(-1.0, 0.0),
            _ => cx(0.0, 0.0),
        })
    }

    /// Pauli by letter (`I`, `X`, `Y`, `Z`), case-insensitive.
    pub fn by_name(c: char) -> Option<CMat> {
        match c.to_ascii_uppercase() {
            'I' => Some(i2()),
            'X' => Some(x()),
            'Y' => Some(y()),
            'Z' => Some(z()),
            _ => None,
        }
    }

    /// Kronecker product of a Pauli word such as `"XZ"`.
    pub fn word(w: &str) -> Option<CMat> {
        let mut acc: Option<CMat> = None;
        for c in w.chars() {
            let p = by_name(c)?;
            acc = Some(match acc {
                None => p,
                Some(a) => linalg::kron(&a, &p),
            });
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_on_site_zero_is_leftmost_factor() {
        let sp = SiteSpace::new(2, 2).unwrap();
        let z0 = embed_local(&pauli::z(), &[0], &sp).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| z0.mat[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(z0.support, vec![0]);
    }

    #[test]
    fn size_cap_enforced() {
        assert!(SiteSpace::new(15, 2).is_err());
        assert!(SiteSpace::new(7, 4).is_ok());
        assert!(SiteSpace::new(8, 4).is_err());
        assert!(SiteSpace::new(3, 1).is_err());
    }

    #[test]
    fn embed_errors() {
        let sp = SiteSpace::new(3, 2).unwrap();
        assert!(matches!(embed_local(&pauli::z(), &[0, 1], &sp), Err(Error::Dimension(_))));
        assert!(embed_local(&pauli::word("ZZ").unwrap(), &[1, 1], &sp).is_err());
        assert!(embed_local(&pauli::z(), &[3], &sp).is_err());
    }

    #[test]
    fn embed_reversed_site_order() {
        let sp = SiteSpace::new(2, 2).unwrap();
        let zx = pauli::word("ZX").unwrap();
        let a = embed_local(&zx, &[1, 0], &sp).unwrap();
        let b = linalg::kron(&pauli::x(), &pauli::z());
        assert!(linalg::max_abs(&(&a.mat - &b)) == 0.0);
    }

    #[test]
    fn bell_reduced_and_transposed() {
        let sp = SiteSpace::new(2, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let psi = [cx(s, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(s, 0.0)];
        let rho = DensityMatrix::pure(&psi, sp).unwrap();
        let r0 = partial_trace(&rho, &[0]).unwrap();
        assert!(linalg::max_abs(&(r0.mat() - &linalg::scale_re(&linalg::identity(2), 0.5))) < 1e-15);
        let pt = partial_transpose(&rho.op, &[0]).unwrap();
        let mut ev = linalg::eigvalsh(&pt.mat).unwrap();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 0.5).abs() < 1e-14 && (ev[3] - 0.5).abs() < 1e-14);
        let mi = mutual_information(&rho, &[0], &[1]).unwrap();
        assert!((mi - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_support_violation() {
        let p0 = CMat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { cx(1.0, 0.0) } else { cx(0.0, 0.0) });
        let p1 = CMat::from_fn(2, 2, |i, j| if i == 1 && j == 1 { cx(1.0, 0.0) } else { cx(0.0, 0.0) });
        assert!(matches!(relative_entropy(&p0, &p1), Err(Error::InfiniteRelativeEntropy)));
        assert!(relative_entropy(&p0, &p0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn local_left_multiply_matches_embedding() {
        let sp = SiteSpace::new(3, 2).unwrap();
        let m = CMat::from_fn(8, 8, |i, j| cx((i * 3 + j) as f64, (i as f64) - 2.0 * j as f64));
        let l = pauli::word("XY").unwrap();
        let full = embed_local(&l, &[2, 0], &sp).unwrap();
        let a = &full.mat * &m;
        let b = local_left_multiply(&l, &[2, 0], &sp, &m).unwrap();
        assert!(linalg::max_abs(&(&a - &b)) < 1e-12);
    }
}
