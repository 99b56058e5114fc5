//! Dense linear-algebra helpers over `faer` complex matrices.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

pub use faer::c64;

pub type CMat = Mat<c64>;

#[inline]
pub fn cx(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
}

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::zeros(r, c)
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub fn trace(m: &CMat) -> c64 {
    let mut t = cx(0.0, 0.0);
    for i in 0..m.nrows().min(m.ncols()) {
        t += m[(i, i)];
    }
    t
}

/// tr(A B) without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> c64 {
    let mut t = cx(0.0, 0.0);
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            t += a[(j, i)] * b[(i, j)];
        }
    }
    t
}

pub fn scale(m: &CMat, s: c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn scale_re(m: &CMat, s: f64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn add(a: &CMat, b: &CMat) -> CMat {
    a + b
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    a - b
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Largest entry of |M - M^dagger|.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMat) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut w = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            w = w.max(m[(i, j)].norm());
        }
    }
    w
}

pub fn is_finite(m: &CMat) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return false;
            }
        }
    }
    true
}

fn is_real(m: &CMat) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)].im != 0.0 {
                return false;
            }
        }
    }
    true
}

fn real_part(m: &CMat) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

/// Eigenpairs of a Hermitian matrix, ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Hermitian eigendecomposition. Real symmetric input takes the real solver.
/// Each eigenvector is rephased so its largest-magnitude entry (first on ties)
/// is real and positive.
pub fn eigh(m: &CMat) -> Result<Eigh> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("eigh on {}x{}", m.nrows(), m.ncols())));
    }
    if !is_finite(m) {
        return Err(Error::Invalid("non-finite entries".into()));
    }
    let h = hermitian_part(m);
    let (values, mut vectors) = if is_real(&h) {
        let r = real_part(&h);
        let e = r
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let u = e.U();
        let vals: Vec<f64> = (0..r.nrows()).map(|i| e.S()[i]).collect();
        (vals, Mat::from_fn(u.nrows(), u.ncols(), |i, j| cx(u[(i, j)], 0.0)))
    } else {
        let e = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let vals: Vec<f64> = (0..h.nrows()).map(|i| e.S()[i].re).collect();
        (vals, e.U().to_owned())
    };
    fix_phases(&mut vectors);
    Ok(Eigh { values, vectors })
}

pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    let h = hermitian_part(m);
    if is_real(&h) {
        real_part(&h)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))
    } else {
        h.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))
    }
}

fn fix_phases(u: &mut CMat) {
    for j in 0..u.ncols() {
        let mut best = 0usize;
        let mut mag = -1.0f64;
        for i in 0..u.nrows() {
            let a = u[(i, j)].norm();
            if a > mag * (1.0 + 1e-12) {
                mag = a;
                best = i;
            }
        }
        if mag <= 0.0 {
            continue;
        }
        let ph = u[(best, j)].conj() / mag;
        for i in 0..u.nrows() {
            u[(i, j)] *= ph;
        }
    }
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    if !is_finite(m) {
        return Err(Error::Invalid("non-finite entries".into()));
    }
    m.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))
}

fn normal_kind(m: &CMat) -> Option<bool> {
    // Some(true) hermitian, Some(false) anti-hermitian, None otherwise
    let scale = max_abs(m).max(1e-300);
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    let mut herm = 0.0f64;
    let mut anti = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            herm = herm.max((m[(i, j)] - m[(j, i)].conj()).norm());
            anti = anti.max((m[(i, j)] + m[(j, i)].conj()).norm());
        }
    }
    if herm <= 1e-13 * scale {
        Some(true)
    } else if anti <= 1e-13 * scale {
        Some(false)
    } else {
        None
    }
}

/// Spectral (largest singular value) norm.
pub fn op_norm(m: &CMat) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    match normal_kind(m) {
        Some(true) => Ok(eigvalsh(m)?.iter().fold(0.0f64, |a, x| a.max(x.abs()))),
        Some(false) => {
            let im = scale(m, cx(0.0, 1.0));
            Ok(eigvalsh(&im)?.iter().fold(0.0f64, |a, x| a.max(x.abs())))
        }
        None => Ok(singular_values(m)?.first().copied().unwrap_or(0.0)),
    }
}

pub fn trace_norm(m: &CMat) -> Result<f64> {
    match normal_kind(m) {
        Some(true) => Ok(eigvalsh(m)?.iter().map(|x| x.abs()).sum()),
        Some(false) => Ok(eigvalsh(&scale(m, cx(0.0, 1.0)))?.iter().map(|x| x.abs()).sum()),
        None => Ok(singular_values(m)?.iter().sum()),
    }
}

pub fn hs_norm(m: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// U diag(f) U^dagger.
pub fn from_spectrum(u: &CMat, f: &[c64]) -> CMat {
    let uf = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * f[j]);
    mul_adj_right(&uf, u)
}

pub fn from_spectrum_re(u: &CMat, f: &[f64]) -> CMat {
    let uf = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * f[j]);
    mul_adj_right(&uf, u)
}

/// U^dagger M U.
pub fn to_basis(u: &CMat, m: &CMat) -> CMat {
    mul_adj_left(u, &mul(m, u))
}

/// U M U^dagger.
pub fn from_basis(u: &CMat, m: &CMat) -> CMat {
    mul_adj_right(&mul(u, m), u)
}

/// Products where one or both factors have vanishing imaginary parts run in
/// real arithmetic (where adjoint and transpose coincide).
fn real_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Option<CMat> {
    let real = |m: MatRef<'_, c64>| (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0));
    if a.nrows() * b.ncols() < 64 * 64 {
        return None;
    }
    let re = |m: MatRef<'_, c64>| Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
    let im = |m: MatRef<'_, c64>| Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im);
    match (real(a), real(b)) {
        (true, true) => {
            let p = &re(a) * &re(b);
            Some(Mat::from_fn(p.nrows(), p.ncols(), |i, j| cx(p[(i, j)], 0.0)))
        }
        (true, false) => {
            let ra = re(a);
            let (pr, pi) = (&ra * &re(b), &ra * &im(b));
            Some(Mat::from_fn(pr.nrows(), pr.ncols(), |i, j| cx(pr[(i, j)], pi[(i, j)])))
        }
        (false, true) => {
            let rb = re(b);
            let (pr, pi) = (&re(a) * &rb, &im(a) * &rb);
            Some(Mat::from_fn(pr.nrows(), pr.ncols(), |i, j| cx(pr[(i, j)], pi[(i, j)])))
        }
        (false, false) => None,
    }
}

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    real_product(a.as_ref(), b.as_ref()).unwrap_or_else(|| a * b)
}

/// A^dagger B.
pub fn mul_adj_left(a: &CMat, b: &CMat) -> CMat {
    let owned = (!is_real(a)).then(|| adjoint(a));
    let ar = owned.as_ref().map_or(a.transpose(), |m| m.as_ref());
    real_product(ar, b.as_ref()).unwrap_or_else(|| a.adjoint() * b)
}

/// A B^dagger.
pub fn mul_adj_right(a: &CMat, b: &CMat) -> CMat {
    let owned = (!is_real(b)).then(|| adjoint(b));
    let br = owned.as_ref().map_or(b.transpose(), |m| m.as_ref());
    real_product(a.as_ref(), br).unwrap_or_else(|| a * b.adjoint())
}

/// exp(s M) for Hermitian M.
pub fn expm_hermitian(m: &CMat, s: f64) -> Result<CMat> {
    let e = eigh(m)?;
    let f: Vec<f64> = e.values.iter().map(|&x| (s * x).exp()).collect();
    Ok(from_spectrum_re(&e.vectors, &f))
}

/// Elementwise product with a weight table.
pub fn hadamard(m: &CMat, w: impl Fn(usize, usize) -> c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * w(i, j))
}

/// `<v| M |v>` for a column vector v.
pub fn expect_vec(m: &CMat, v: &[c64]) -> c64 {
    let mut acc = cx(0.0, 0.0);
    for i in 0..v.len() {
        let mut row = cx(0.0, 0.0);
        for j in 0..v.len() {
            row += m[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc
}

pub fn matvec(m: &CMat, v: &[c64]) -> Vec<c64> {
    (0..m.nrows())
        .map(|i| {
            let mut s = cx(0.0, 0.0);
            for j in 0..v.len() {
                s += m[(i, j)] * v[j];
            }
            s
        })
        .collect()
}

pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn outer(a: &[c64], b: &[c64]) -> CMat {
    Mat::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

pub fn column(m: &CMat, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_reconstructs_complex_input() {
        let m = Mat::from_fn(3, 3, |i, j| {
            let re = (i + j) as f64;
            let im = i as f64 - j as f64;
            cx(re, im)
        });
        let e = eigh(&m).unwrap();
        let back = from_spectrum_re(&e.vectors, &e.values);
        assert!(max_abs(&(&back - &m)) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn phase_convention_positive_real_peak() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { cx(0.0, 0.0) } else if i < j { cx(0.0, -1.0) } else { cx(0.0, 1.0) });
        let e = eigh(&m).unwrap();
        for j in 0..2 {
            let col = column(&e.vectors, j);
            let mag = col.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            let peak = col.iter().find(|z| z.norm() >= mag * (1.0 - 1e-12)).unwrap();
            assert!(peak.im.abs() < 1e-14 && peak.re > 0.0);
        }
    }

    #[test]
    fn norms_of_pauli_y() {
        let y = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => cx(0.0, -1.0),
            (1, 0) => cx(0.0, 1.0),
            _ => cx(0.0, 0.0),
        });
        assert!((op_norm(&y).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_norm(&y).unwrap() - 2.0).abs() < 1e-14);
        assert!((hs_norm(&y) - 2f64.sqrt()).abs() < 1e-14);
        let non_normal = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { cx(3.0, 0.0) } else { cx(0.0, 0.0) });
        assert!((op_norm(&non_normal).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = Mat::from_fn(2, 2, |i, j| cx((i * 2 + j) as f64, 0.0));
        let b = identity(3);
        let k = kron(&a, &b);
        assert_eq!(k.nrows(), 6);
        assert_eq!(k[(4, 1)], a[(1, 0)]);
        assert_eq!(k[(4, 2)], cx(0.0, 0.0));
    }
}
