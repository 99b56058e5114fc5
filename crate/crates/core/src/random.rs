//! Seeded random states, observables and unitaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c64, cx, CMat};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_c64<R: Rng + ?Sized>(r: &mut R) -> c64 {
    let a: f64 = r.sample(StandardNormal);
    let b: f64 = r.sample(StandardNormal);
    cx(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, r: &mut R) -> CMat {
    let mut m = linalg::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = normal_c64(r);
        }
    }
    m
}

/// Induced-measure density matrix of the given rank (rank = dim gives Hilbert-Schmidt).
pub fn density<R: Rng + ?Sized>(dim: usize, rank: usize, r: &mut R) -> CMat {
    let g = ginibre(dim, rank.max(1), r);
    let m = &g * g.adjoint();
    let t = linalg::trace(&m).re;
    linalg::hermitian_part(&linalg::scale_re(&m, 1.0 / t))
}

pub fn pure_vector<R: Rng + ?Sized>(dim: usize, r: &mut R) -> Vec<c64> {
    let v: Vec<c64> = (0..dim).map(|_| normal_c64(r)).collect();
    let n = linalg::inner(&v, &v).re.sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn hermitian<R: Rng + ?Sized>(dim: usize, r: &mut R) -> CMat {
    let g = ginibre(dim, dim, r);
    linalg::hermitian_part(&g)
}

/// Hermitian with unit operator norm.
pub fn unit_hermitian<R: Rng + ?Sized>(dim: usize, r: &mut R) -> CMat {
    let h = hermitian(dim, r);
    let n = linalg::op_norm(&h).expect("finite");
    linalg::scale_re(&h, 1.0 / n)
}

/// Haar unitary: GUE eigenvectors with independent uniform phases.
pub fn unitary<R: Rng + ?Sized>(dim: usize, r: &mut R) -> CMat {
    let e = linalg::eigh(&hermitian(dim, r)).expect("finite");
    let phases: Vec<c64> = (0..dim)
        .map(|_| {
            let t: f64 = r.random::<f64>() * std::f64::consts::TAU;
            cx(t.cos(), t.sin())
        })
        .collect();
    CMat::from_fn(dim, dim, |i, j| e.vectors[(i, j)] * phases[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary_and_seeded() {
        let u = unitary(5, &mut rng(3));
        let id = &u * u.adjoint();
        assert!(linalg::max_abs(&(&id - &linalg::identity(5))) < 1e-12);
        let u2 = unitary(5, &mut rng(3));
        assert_eq!(linalg::max_abs(&(&u - &u2)), 0.0);
    }

    #[test]
    fn density_is_state() {
        let rho = density(6, 2, &mut rng(1));
        assert!((linalg::trace(&rho).re - 1.0).abs() < 1e-14);
        let ev = linalg::eigvalsh(&rho).unwrap();
        assert!(ev[0] > -1e-14);
        assert!(ev[3] < 1e-12);
    }
}
