//! Local search over ensemble decompositions of a fixed state.
//!
//! An ensemble is a matrix V with rho = V V^dagger; column k is the
//! unnormalized pure state sqrt(p_k)|phi_k>. Every other ensemble of the same
//! size is V W for a unitary W, so pairwise Givens rotations of columns reach
//! all of them. Objectives are functions of the quadratic forms v^dagger X v.

use rand::Rng;

use crate::linalg::{self, c64, cx, CMat};
use crate::random;

/// Forms below this norm are treated as empty ensemble members.
const TINY: f64 = 1e-300;

pub struct RoofObjective {
    /// Operators whose quadratic forms enter the objective; the norm form is implicit.
    pub ops: Vec<CMat>,
    /// Value of one member from [p, v^dagger ops[0] v, ...].
    pub member: Box<dyn Fn(&[c64]) -> f64 + Send + Sync>,
}

impl RoofObjective {
    /// |<AB> p - <A><B>| per member, i.e. p |C_phi(A, B)|.
    pub fn correlation(a: &CMat, b: &CMat) -> Self {
        let ab = a * b;
        Self {
            ops: vec![a.clone(), b.clone(), ab],
            member: Box::new(|q: &[c64]| {
                if q[0].re <= TINY {
                    return 0.0;
                }
                (q[3] - q[1] * q[2] / q[0].re).norm()
            }),
        }
    }

    /// 4 p Var_phi(K) per member.
    pub fn variance(k: &CMat) -> Self {
        let k2 = k * k;
        Self {
            ops: vec![k.clone(), k2],
            member: Box::new(|q: &[c64]| {
                if q[0].re <= TINY {
                    return 0.0;
                }
                4.0 * (q[2].re - q[1].norm_sqr() / q[0].re)
            }),
        }
    }

    pub fn forms_of(&self, v: &[c64]) -> Vec<c64> {
        let mut out = vec![linalg::inner(v, v)];
        for x in &self.ops {
            out.push(linalg::expect_vec(x, v));
        }
        out
    }

    /// Value of a mixed component given by its summed forms.
    pub fn value(&self, forms: &[c64]) -> f64 {
        (self.member)(forms)
    }

    pub fn ensemble_value(&self, v: &CMat) -> f64 {
        (0..v.ncols()).map(|k| self.value(&self.forms_of(&linalg::column(v, k)))).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RefineConfig {
    pub max_sweeps: usize,
    pub tol: f64,
    pub grid: usize,
    pub polish_rounds: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self { max_sweeps: 30, tol: 1e-12, grid: 8, polish_rounds: 3 }
    }
}

struct Pair<'a> {
    obj: &'a RoofObjective,
    grams: Vec<[[c64; 2]; 2]>,
}

impl Pair<'_> {
    fn forms(&self, w: [c64; 2]) -> Vec<c64> {
        self.grams
            .iter()
            .map(|g| {
                let mut s = cx(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        s += w[a].conj() * g[a][b] * w[b];
                    }
                }
                s
            })
            .collect()
    }

    fn eval(&self, theta: f64, phi: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let e = cx(phi.cos(), phi.sin());
        let w1 = [cx(c, 0.0), e * s];
        let w2 = [-e.conj() * s, cx(c, 0.0)];
        self.obj.value(&self.forms(w1)) + self.obj.value(&self.forms(w2))
    }
}

fn golden(f: impl Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Pairwise rotation descent; returns the final objective value.
pub fn refine(obj: &RoofObjective, v: &mut CMat, cfg: &RefineConfig) -> f64 {
    let k = v.ncols();
    let mut xs: Vec<CMat> = obj.ops.iter().map(|x| x * &*v).collect();
    let col_forms = |v: &CMat, xs: &[CMat], a: usize, b: usize| -> Vec<c64> {
        let va = linalg::column(v, a);
        let mut out = vec![linalg::inner(&va, &linalg::column(v, b))];
        for x in xs {
            out.push(linalg::inner(&va, &linalg::column(x, b)));
        }
        out
    };
    let mut total = obj.ensemble_value(v);
    for _ in 0..cfg.max_sweeps {
        let start = total;
        for a in 0..k {
            for b in a + 1..k {
                let faa = col_forms(v, &xs, a, a);
                let fbb = col_forms(v, &xs, b, b);
                if faa[0].re <= TINY && fbb[0].re <= TINY {
                    continue;
                }
                let fab = col_forms(v, &xs, a, b);
                let fba = col_forms(v, &xs, b, a);
                let grams: Vec<[[c64; 2]; 2]> =
                    (0..faa.len()).map(|o| [[faa[o], fab[o]], [fba[o], fbb[o]]]).collect();
                let pair = Pair { obj, grams };
                let current = pair.eval(0.0, 0.0);
                let n = cfg.grid.max(2);
                let (mut bt, mut bp, mut best) = (0.0, 0.0, current);
                for i in 0..n {
                    let th = (i as f64 + 0.5) * std::f64::consts::FRAC_PI_2 / n as f64;
                    for j in 0..n {
                        let ph = j as f64 * std::f64::consts::TAU / n as f64;
                        let val = pair.eval(th, ph);
                        if val < best {
                            best = val;
                            bt = th;
                            bp = ph;
                        }
                    }
                }
                if best >= current - 1e-15 * (1.0 + current) {
                    continue;
                }
                let hth = std::f64::consts::FRAC_PI_2 / n as f64;
                let hph = std::f64::consts::TAU / n as f64;
                for _ in 0..cfg.polish_rounds {
                    let (t, ft) = golden(|t| pair.eval(t, bp), bt - hth, bt + hth, 40);
                    if ft < best {
                        best = ft;
                        bt = t;
                    }
                    let (p, fp) = golden(|p| pair.eval(bt, p), bp - hph, bp + hph, 40);
                    if fp < best {
                        best = fp;
                        bp = p;
                    }
                }
                rotate(v, a, b, bt, bp);
                for x in xs.iter_mut() {
                    rotate(x, a, b, bt, bp);
                }
                total += best - current;
            }
        }
        if start - total <= cfg.tol * (1.0 + start.abs()) {
            break;
        }
    }
    // recompute to shed accumulated drift
    obj.ensemble_value(v)
}

/// v_a <- c v_a + s e^{i phi} v_b, v_b <- -s e^{-i phi} v_a + c v_b.
fn rotate(m: &mut CMat, a: usize, b: usize, theta: f64, phi: f64) {
    let (s, c) = theta.sin_cos();
    let e = cx(phi.cos(), phi.sin());
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, a)], m[(i, b)]);
        m[(i, a)] = x * c + e * s * y;
        m[(i, b)] = -e.conj() * s * x + y * c;
    }
}

/// V padded with zero columns to `k` columns and mixed by a Haar unitary.
pub fn random_mixing<R: Rng + ?Sized>(v: &CMat, k: usize, r: &mut R) -> CMat {
    let k = k.max(v.ncols());
    let mut p = linalg::zeros(v.nrows(), k);
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            p[(i, j)] = v[(i, j)];
        }
    }
    let u = random::unitary(k, r);
    &p * &u
}

/// Greedy merging of members into mixed components while the objective drops.
/// Returns the value and the member groups.
pub fn merge_greedy(obj: &RoofObjective, forms: Vec<Vec<c64>>) -> (f64, Vec<Vec<usize>>) {
    let mut groups: Vec<(Vec<usize>, Vec<c64>)> =
        forms.into_iter().enumerate().map(|(i, f)| (vec![i], f)).collect();
    loop {
        let mut best = (0.0, 0, 0);
        for a in 0..groups.len() {
            let va = obj.value(&groups[a].1);
            for b in a + 1..groups.len() {
                let vb = obj.value(&groups[b].1);
                let sum: Vec<c64> = groups[a].1.iter().zip(&groups[b].1).map(|(x, y)| x + y).collect();
                let gain = va + vb - obj.value(&sum);
                if gain > best.0 {
                    best = (gain, a, b);
                }
            }
        }
        if best.0 <= 1e-15 {
            break;
        }
        let (_, a, b) = best;
        let (ib, fb) = groups.remove(b);
        groups[a].0.extend(ib);
        for (x, y) in groups[a].1.iter_mut().zip(fb) {
            *x += y;
        }
    }
    let value = groups.iter().map(|g| obj.value(&g.1)).sum();
    (value, groups.into_iter().map(|g| g.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::pauli;

    #[test]
    fn refinement_never_increases_and_keeps_state() {
        let mut r = random::rng(5);
        let rho = random::density(4, 4, &mut r);
        let e = linalg::eigh(&rho).unwrap();
        let v0 = CMat::from_fn(4, 4, |i, j| e.vectors[(i, j)] * e.values[j].max(0.0).sqrt());
        let mut v = random_mixing(&v0, 6, &mut r);
        let a = linalg::kron(&pauli::z(), &pauli::i2());
        let b = linalg::kron(&pauli::i2(), &pauli::x());
        let obj = RoofObjective::correlation(&a, &b);
        let before = obj.ensemble_value(&v);
        let after = refine(&obj, &mut v, &RefineConfig::default());
        assert!(after <= before + 1e-12);
        let back = &v * v.adjoint();
        assert!(linalg::max_abs(&(&back - &rho)) < 1e-12);
    }

    #[test]
    fn merging_full_ensemble_recovers_state_correlation() {
        let a = linalg::kron(&pauli::z(), &pauli::i2());
        let b = linalg::kron(&pauli::i2(), &pauli::z());
        let obj = RoofObjective::correlation(&a, &b);
        // |00> and |11> with equal weight: members have zero correlation already
        let mut v = linalg::zeros(4, 2);
        v[(0, 0)] = cx(0.5f64.sqrt(), 0.0);
        v[(3, 1)] = cx(0.5f64.sqrt(), 0.0);
        let forms = (0..2).map(|k| obj.forms_of(&linalg::column(&v, k))).collect();
        let (val, groups) = merge_greedy(&obj, forms);
        assert_eq!(groups.len(), 2);
        assert!(val.abs() < 1e-15);
    }
}
