//! Lattices, k-local Hamiltonians and their geometric parameters.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, pauli, SiteSpace};
use crate::linalg::{self, CMat};
use crate::random;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Chain { n: usize, #[serde(default)] periodic: bool },
    Grid { lx: usize, ly: usize, #[serde(default)] periodic: bool },
}

#[derive(Clone, Debug)]
pub struct Lattice {
    /// Spatial dimension D.
    pub dim: usize,
    pub coords: Vec<Vec<i64>>,
    pub adjacency: Vec<Vec<usize>>,
    dist: Vec<Vec<usize>>,
}

impl Lattice {
    pub fn from_geometry(g: &Geometry) -> Result<Self> {
        match *g {
            Geometry::Chain { n, periodic } => Self::chain(n, periodic),
            Geometry::Grid { lx, ly, periodic } => Self::grid(lx, ly, periodic),
        }
    }

    pub fn chain(n: usize, periodic: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("empty chain".into()));
        }
        let mut adj = vec![Vec::new(); n];
        for i in 0..n.saturating_sub(1) {
            adj[i].push(i + 1);
            adj[i + 1].push(i);
        }
        if periodic && n > 2 {
            adj[0].push(n - 1);
            adj[n - 1].push(0);
        }
        Ok(Self::finish(1, (0..n as i64).map(|i| vec![i]).collect(), adj))
    }

    pub fn grid(lx: usize, ly: usize, periodic: bool) -> Result<Self> {
        if lx == 0 || ly == 0 {
            return Err(Error::Invalid("empty grid".into()));
        }
        let idx = |x: usize, y: usize| y * lx + x;
        let n = lx * ly;
        let mut adj = vec![Vec::new(); n];
        let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        };
        for y in 0..ly {
            for x in 0..lx {
                if x + 1 < lx {
                    link(idx(x, y), idx(x + 1, y), &mut adj);
                } else if periodic && lx > 2 {
                    link(idx(x, y), idx(0, y), &mut adj);
                }
                if y + 1 < ly {
                    link(idx(x, y), idx(x, y + 1), &mut adj);
                } else if periodic && ly > 2 {
                    link(idx(x, y), idx(x, 0), &mut adj);
                }
            }
        }
        let coords = (0..n).map(|i| vec![(i % lx) as i64, (i / lx) as i64]).collect();
        Ok(Self::finish(2, coords, adj))
    }

    fn finish(dim: usize, coords: Vec<Vec<i64>>, mut adjacency: Vec<Vec<usize>>) -> Self {
        for a in adjacency.iter_mut() {
            a.sort_unstable();
        }
        let n = coords.len();
        let mut dist = vec![vec![usize::MAX; n]; n];
        for s in 0..n {
            let mut q = VecDeque::from([s]);
            dist[s][s] = 0;
            while let Some(u) = q.pop_front() {
                for &v in &adjacency[u] {
                    if dist[s][v] == usize::MAX {
                        dist[s][v] = dist[s][u] + 1;
                        q.push_back(v);
                    }
                }
            }
        }
        Self { dim, coords, adjacency, dist }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn dist(&self, i: usize, j: usize) -> usize {
        self.dist[i][j]
    }

    /// d(X, Y) = min over pairs; 0 iff the sets overlap.
    pub fn set_dist(&self, x: &[usize], y: &[usize]) -> usize {
        let mut d = usize::MAX;
        for &i in x {
            for &j in y {
                d = d.min(self.dist[i][j]);
            }
        }
        d
    }

    pub fn diameter(&self) -> usize {
        self.dist.iter().flatten().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0)
    }

    /// X[r] = {i : d(X, i) <= r}, sorted.
    pub fn ball(&self, x: &[usize], r: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| x.iter().any(|&j| self.dist[j][i] <= r)).collect()
    }

    /// Surface {i in X : d(i, X^c) = 1}.
    pub fn surface(&self, x: &[usize]) -> Vec<usize> {
        let mut s: Vec<usize> = x
            .iter()
            .copied()
            .filter(|&i| self.adjacency[i].iter().any(|j| !x.contains(j)))
            .collect();
        s.sort_unstable();
        s
    }

    /// Smallest gamma >= 1 satisfying both ball inequalities for r = 1..diameter.
    pub fn gamma(&self) -> GammaReport {
        let d = self.dim as i32;
        let mut gs = 0.0f64;
        let mut gv = 0.0f64;
        for r in 1..=self.diameter().max(1) {
            let rf = r as f64;
            for i in 0..self.n() {
                let b = self.ball(&[i], r);
                gs = gs.max(self.surface(&b).len() as f64 / rf.powi(d - 1));
                gv = gv.max(b.len() as f64 / rf.powi(d));
            }
        }
        GammaReport { gamma: gs.max(gv).max(1.0), gamma_surface: gs, gamma_volume: gv }
    }

    /// zeta_{s, xi} = max_i sum_j d_ij^s exp(-d_ij / xi).
    pub fn zeta(&self, s: u32, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::Invalid(format!("xi = {xi} must be positive")));
        }
        let mut best = 0.0f64;
        for i in 0..self.n() {
            let mut acc = 0.0;
            for j in 0..self.n() {
                let dij = self.dist[i][j];
                if dij == usize::MAX {
                    continue;
                }
                let df = dij as f64;
                acc += df.powi(s as i32) * (-df / xi).exp();
            }
            best = best.max(acc);
        }
        Ok(best)
    }

    /// 1 + gamma e^{1/xi} xi^{s+D} (s+D)!.
    pub fn zeta_bound(&self, s: u32, xi: f64, gamma: f64) -> f64 {
        let m = s as usize + self.dim;
        let fact: f64 = (1..=m).map(|k| k as f64).product();
        1.0 + gamma * (1.0 / xi).exp() * xi.powi(m as i32) * fact
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub gamma: f64,
    pub gamma_surface: f64,
    pub gamma_volume: f64,
}

#[derive(Clone, Debug)]
pub struct LocalTerm {
    /// Sites in the order of the local Kronecker factors.
    pub support: Vec<usize>,
    pub mat: CMat,
    pub norm: f64,
}

impl LocalTerm {
    pub fn new(support: Vec<usize>, mat: CMat) -> Result<Self> {
        if linalg::hermiticity_defect(&mat) > 1e-12 {
            return Err(Error::Invalid(format!("term on {support:?} not Hermitian")));
        }
        let norm = linalg::op_norm(&mat)?;
        Ok(Self { support, mat, norm })
    }

    pub fn touches(&self, x: &[usize]) -> bool {
        self.support.iter().any(|s| x.contains(s))
    }

    pub fn within(&self, x: &[usize]) -> bool {
        self.support.iter().all(|s| x.contains(s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset {
    /// -J sum Z Z - hx sum X - hz sum Z
    Tfi {
        #[serde(default = "one")]
        j: f64,
        #[serde(default = "one")]
        hx: f64,
        #[serde(default)]
        hz: f64,
    },
    /// J sum (X X + Y Y + delta Z Z) - hz sum Z
    Xxz {
        #[serde(default = "one")]
        j: f64,
        #[serde(default = "one")]
        delta: f64,
        #[serde(default)]
        hz: f64,
    },
    /// Random Hermitian bond and site terms scaled to the given norms.
    RandomTwoLocal {
        #[serde(default = "one")]
        bond_norm: f64,
        #[serde(default = "half")]
        field_norm: f64,
    },
    /// Ising couplings g0 / (x + 1)^alpha between all pairs, transverse field hx.
    /// Outside the short-range theory; bound evaluators refuse it.
    PowerLawIsing {
        #[serde(default = "one")]
        g0: f64,
        #[serde(default = "three")]
        alpha: f64,
        #[serde(default = "one")]
        hx: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn three() -> f64 {
    3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub preset: Preset,
    pub geometry: Geometry,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_log2_dim")]
    pub max_log2_dim: f64,
}

fn default_max_log2_dim() -> f64 {
    hilbert::DEFAULT_MAX_LOG2_DIM
}

impl ModelSpec {
    pub fn tfi_chain(n: usize, j: f64, hx: f64) -> Self {
        Self {
            preset: Preset::Tfi { j, hx, hz: 0.0 },
            geometry: Geometry::Chain { n, periodic: false },
            seed: 0,
            max_log2_dim: hilbert::DEFAULT_MAX_LOG2_DIM,
        }
    }

    pub fn xxz_chain(n: usize, j: f64, delta: f64) -> Self {
        Self {
            preset: Preset::Xxz { j, delta, hz: 0.0 },
            geometry: Geometry::Chain { n, periodic: false },
            seed: 0,
            max_log2_dim: hilbert::DEFAULT_MAX_LOG2_DIM,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub space: SiteSpace,
    pub lattice: Lattice,
    pub terms: Vec<LocalTerm>,
    pub k: usize,
    pub g: f64,
    pub short_range: bool,
}

pub fn build_model(spec: &ModelSpec) -> Result<Hamiltonian> {
    let lattice = Lattice::from_geometry(&spec.geometry)?;
    let n = lattice.n();
    let space = SiteSpace::with_cap(n, 2, spec.max_log2_dim)?;
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| lattice.adjacency[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
        .collect();
    let mut terms = Vec::new();
    let mut short_range = true;
    let zz = pauli::word("ZZ").unwrap();
    match spec.preset {
        Preset::Tfi { j, hx, hz } => {
            for &(a, b) in &edges {
                if j != 0.0 {
                    terms.push(LocalTerm::new(vec![a, b], linalg::scale_re(&zz, -j))?);
                }
            }
            for i in 0..n {
                let f = linalg::scale_re(&pauli::x(), -hx) + linalg::scale_re(&pauli::z(), -hz);
                if hx != 0.0 || hz != 0.0 {
                    terms.push(LocalTerm::new(vec![i], f)?);
                }
            }
        }
        Preset::Xxz { j, delta, hz } => {
            let bond = linalg::scale_re(
                &(pauli::word("XX").unwrap() + pauli::word("YY").unwrap() + linalg::scale_re(&zz, delta)),
                j,
            );
            for &(a, b) in &edges {
                terms.push(LocalTerm::new(vec![a, b], bond.clone())?);
            }
            if hz != 0.0 {
                for i in 0..n {
                    terms.push(LocalTerm::new(vec![i], linalg::scale_re(&pauli::z(), -hz))?);
                }
            }
        }
        Preset::RandomTwoLocal { bond_norm, field_norm } => {
            let mut r = random::rng(spec.seed);
            for &(a, b) in &edges {
                let h = random::unit_hermitian(4, &mut r);
                terms.push(LocalTerm::new(vec![a, b], linalg::scale_re(&h, bond_norm))?);
            }
            for i in 0..n {
                let h = random::unit_hermitian(2, &mut r);
                terms.push(LocalTerm::new(vec![i], linalg::scale_re(&h, field_norm))?);
            }
        }
        Preset::PowerLawIsing { g0, alpha, hx } => {
            short_range = false;
            for a in 0..n {
                for b in a + 1..n {
                    let x = lattice.dist(a, b) as f64;
                    let c = g0 / (x + 1.0).powf(alpha);
                    terms.push(LocalTerm::new(vec![a, b], linalg::scale_re(&zz, -c))?);
                }
            }
            for i in 0..n {
                terms.push(LocalTerm::new(vec![i], linalg::scale_re(&pauli::x(), -hx))?);
            }
        }
    }
    let mut h = Hamiltonian::from_terms(space, lattice, terms);
    h.short_range = short_range;
    Ok(h)
}

impl Hamiltonian {
    pub fn from_terms(space: SiteSpace, lattice: Lattice, terms: Vec<LocalTerm>) -> Self {
        let k = terms.iter().map(|t| t.support.len()).max().unwrap_or(0);
        let g = site_load(&terms, lattice.n());
        Self { space, lattice, terms, k, g, short_range: true }
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    /// Dense matrix of the whole Hamiltonian.
    pub fn matrix(&self) -> Result<CMat> {
        terms_matrix(&self.terms, &self.space)
    }

    /// H_L: terms with support inside L.
    pub fn subset_hamiltonian(&self, l: &[usize]) -> Hamiltonian {
        let terms = self.terms.iter().filter(|t| t.within(l)).cloned().collect();
        let mut h = Hamiltonian::from_terms(self.space.clone(), self.lattice.clone(), terms);
        h.short_range = self.short_range;
        h
    }

    /// Terms touching both X and Y.
    pub fn boundary_terms(&self, x: &[usize], y: &[usize]) -> Result<Vec<LocalTerm>> {
        if x.iter().any(|i| y.contains(i)) {
            return Err(Error::Invalid("boundary_terms needs disjoint X, Y".into()));
        }
        Ok(self.terms.iter().filter(|t| t.touches(x) && t.touches(y)).cloned().collect())
    }

    /// Copy without the listed terms (matched by support and matrix).
    pub fn without(&self, removed: &[LocalTerm]) -> Hamiltonian {
        let terms = self
            .terms
            .iter()
            .filter(|t| {
                !removed
                    .iter()
                    .any(|r| r.support == t.support && linalg::max_abs(&(&r.mat - &t.mat)) == 0.0)
            })
            .cloned()
            .collect();
        let mut h = Hamiltonian::from_terms(self.space.clone(), self.lattice.clone(), terms);
        h.short_range = self.short_range;
        h
    }

    /// Raw pair profile j(x) = max over pairs at distance x of sum_{Z >= {i,j}} ||h_Z||,
    /// and its nonincreasing envelope J(x) = max_{y >= x} j(y).
    pub fn interaction_profile(&self) -> (Vec<f64>, Vec<f64>) {
        let diam = self.lattice.diameter();
        let mut raw = vec![0.0f64; diam + 1];
        let n = self.n();
        for i in 0..n {
            for jj in i..n {
                let s: f64 = self
                    .terms
                    .iter()
                    .filter(|t| t.support.contains(&i) && t.support.contains(&jj))
                    .map(|t| t.norm)
                    .sum();
                let d = self.lattice.dist(i, jj);
                if d <= diam {
                    raw[d] = raw[d].max(s);
                }
            }
        }
        let mut env = raw.clone();
        for x in (0..diam).rev() {
            env[x] = env[x].max(env[x + 1]);
        }
        (raw, env)
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| {
            (0..t.mat.nrows()).all(|i| (0..t.mat.ncols()).all(|j| t.mat[(i, j)].im == 0.0))
        })
    }
}

pub fn site_load(terms: &[LocalTerm], n: usize) -> f64 {
    (0..n)
        .map(|i| terms.iter().filter(|t| t.support.contains(&i)).map(|t| t.norm).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn terms_matrix(terms: &[LocalTerm], space: &SiteSpace) -> Result<CMat> {
    let d = space.dim();
    let mut m = linalg::zeros(d, d);
    for t in terms {
        hilbert::embed_add(&t.mat, &t.support, space, &mut m)?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_distances_and_balls() {
        let l = Lattice::chain(10, false).unwrap();
        assert_eq!(l.dist(2, 7), 5);
        assert_eq!(l.ball(&[4], 0), vec![4]);
        assert_eq!(l.ball(&[4], 2), vec![2, 3, 4, 5, 6]);
        assert_eq!(l.surface(&[2, 3, 4, 5, 6]), vec![2, 6]);
        let p = Lattice::chain(10, true).unwrap();
        assert_eq!(p.dist(0, 9), 1);
        assert_eq!(p.diameter(), 5);
    }

    #[test]
    fn gamma_open_chain() {
        let g = Lattice::chain(10, false).unwrap().gamma();
        assert_eq!(g.gamma_surface, 2.0);
        assert_eq!(g.gamma_volume, 3.0);
        assert_eq!(g.gamma, 3.0);
    }

    #[test]
    fn grid_neighbours() {
        let l = Lattice::grid(3, 3, false).unwrap();
        assert_eq!(l.adjacency[4], vec![1, 3, 5, 7]);
        assert_eq!(l.dist(0, 8), 4);
        assert_eq!(l.dim, 2);
    }

    #[test]
    fn tfi_two_sites_ground_energy() {
        let h = build_model(&ModelSpec::tfi_chain(2, 1.0, 1.0)).unwrap();
        let ev = linalg::eigvalsh(&h.matrix().unwrap()).unwrap();
        assert!((ev[0] + 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(h.k, 2);
        assert!((h.g - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_terms_single_bond() {
        let h = build_model(&ModelSpec::tfi_chain(8, 1.0, 1.0)).unwrap();
        let b = h.boundary_terms(&[0, 1, 2, 3], &[4, 5, 6, 7]).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].support, vec![3, 4]);
        assert!(h.boundary_terms(&[0, 1], &[1, 2]).is_err());
    }

    #[test]
    fn random_model_is_seeded() {
        let spec = ModelSpec {
            preset: Preset::RandomTwoLocal { bond_norm: 1.0, field_norm: 0.5 },
            geometry: Geometry::Chain { n: 4, periodic: false },
            seed: 9,
            max_log2_dim: 14.0,
        };
        let a = build_model(&spec).unwrap().matrix().unwrap();
        let b = build_model(&spec).unwrap().matrix().unwrap();
        assert_eq!(linalg::max_abs(&(&a - &b)), 0.0);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ModelSpec::xxz_chain(6, 1.0, 0.5);
        let s = serde_json::to_string(&spec).unwrap();
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
    }
}
