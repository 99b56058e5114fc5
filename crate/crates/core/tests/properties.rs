use std::sync::Arc;

use proptest::prelude::*;

use thermocorr::cli::{RunConfig, ScanRecord};
use thermocorr::coherence;
use thermocorr::entangle;
use thermocorr::hilbert::{self, DensityMatrix, SiteSpace};
use thermocorr::linalg::{self, cx, CMat};
use thermocorr::model::{self, Geometry, ModelSpec, Preset};
use thermocorr::qcorr::{self, SearchConfig};
use thermocorr::random;
use thermocorr::thermal::{self, StateSpectrum};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn random_model(n: usize, seed: u64) -> Arc<thermal::SpectralDecomposition> {
    let spec = ModelSpec {
        preset: Preset::RandomTwoLocal { bond_norm: 1.0, field_norm: 0.5 },
        geometry: Geometry::Chain { n, periodic: false },
        seed,
        max_log2_dim: 14.0,
    };
    let h = model::build_model(&spec).unwrap();
    Arc::new(thermal::spectral_decompose_mat(&h.matrix().unwrap(), h.space.clone()).unwrap())
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn partial_trace_is_dual_to_embedding(n in 2usize..=4, mask in 1u32..15, seed in any::<u64>()) {
        let keep: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!keep.is_empty() && keep.len() < n);
        let mut r = random::rng(seed);
        let space = SiteSpace::new(n, 2).unwrap();
        let rho = DensityMatrix::new(random::density(1 << n, 1 << n, &mut r), space.clone()).unwrap();
        let o = random::hermitian(1 << keep.len(), &mut r);
        let red = hilbert::partial_trace(&rho, &keep).unwrap();
        let lhs = linalg::trace_prod(red.mat(), &o);
        let rhs = linalg::trace_prod(rho.mat(), &hilbert::embed_local(&o, &keep, &space).unwrap().mat);
        prop_assert!((lhs - rhs).norm() <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn pinsker_inequality(dim in 2usize..=8, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let rho = random::density(dim, dim, &mut r);
        let sigma = random::density(dim, dim, &mut r);
        let g = entangle::pinsker_gap(&rho, &sigma).unwrap();
        prop_assert!(g.rhs <= g.lhs + 1e-10, "{g:?}");
    }

    #[test]
    fn omega_components_resolve_the_operator(n in 2usize..=3, model_seed in 0u64..1000, seed in any::<u64>()) {
        let spec = random_model(n, model_seed);
        let hm = spec.apply(|x| cx(x, 0.0));
        let mut r = random::rng(seed);
        let o = random::hermitian(spec.dim(), &mut r);
        let comps = thermal::omega_decompose(&o, &spec, thermal::default_bin_tol(&spec)).unwrap();
        let mut sum = linalg::zeros(spec.dim(), spec.dim());
        for c in &comps {
            sum += &c.mat;
        }
        prop_assert!(linalg::max_abs(&(&sum - &o)) <= 1e-10);
        let beta = 0.8;
        let e = spec.apply(|x| cx((-beta * (x - spec.values[0])).exp(), 0.0));
        for c in &comps {
            // [H, O_w] = w O_w and [e^{-beta H}, O_w] = (1 - e^{beta w}) e^{-beta H} O_w
            let ad = linalg::sub(&linalg::commutator(&hm, &c.mat), &linalg::scale_re(&c.mat, c.omega));
            prop_assert!(linalg::max_abs(&ad) <= 1e-8 * linalg::max_abs(&o).max(1.0));
            let lhs = linalg::commutator(&e, &c.mat);
            let rhs = linalg::scale_re(&(&e * &c.mat), 1.0 - (beta * c.omega).exp());
            prop_assert!(linalg::max_abs(&(&lhs - &rhs)) <= 1e-8 * linalg::max_abs(&o).max(1.0));
        }
        // Hermitian O: (O_w)^dagger = O_{-w}
        for c in &comps {
            let partner = comps.iter().find(|d| (d.omega + c.omega).abs() <= 1e-9 * spec.norm().max(1.0));
            prop_assert!(partner.is_some());
            prop_assert!(linalg::max_abs(&(&linalg::adjoint(&c.mat) - &partner.unwrap().mat)) <= 1e-10);
        }
    }

    #[test]
    fn skew_information_is_convex_in_the_state(dim in 2usize..=8, p in 0.0f64..=1.0, alpha in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let r1 = random::density(dim, 1 + seed as usize % dim, &mut r);
        let r2 = random::density(dim, dim, &mut r);
        let k = random::hermitian(dim, &mut r);
        let mix = linalg::add(&linalg::scale_re(&r1, p), &linalg::scale_re(&r2, 1.0 - p));
        let skew = |m: &CMat| coherence::skew_information(&StateSpectrum::from_density(m).unwrap(), &k, alpha).unwrap();
        let lhs = skew(&mix);
        let rhs = p * skew(&r1) + (1.0 - p) * skew(&r2);
        prop_assert!(lhs <= rhs + 1e-10 * linalg::max_abs(&k).powi(2).max(1.0), "{lhs} > {rhs}");
    }

    #[test]
    fn l_operator_is_a_contraction(dim in 2usize..=16, rank in 1usize..=16, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let rho = random::density(dim, rank.min(dim), &mut r);
        let o = random::hermitian(dim, &mut r);
        let st = StateSpectrum::from_density(&rho).unwrap();
        let l = qcorr::l_spectral_state(&st, &o);
        prop_assert!(linalg::op_norm(&l).unwrap() <= linalg::op_norm(&o).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn mixed_real_complex_products_match(rows in 60usize..80, inner in 60usize..80, cols in 60usize..80, kind in 0u8..4, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let realify = |m: CMat| CMat::from_fn(m.nrows(), m.ncols(), |i, j| cx(m[(i, j)].re, 0.0));
        let mut a = random::ginibre(rows, inner, &mut r);
        let mut b = random::ginibre(inner, cols, &mut r);
        if kind & 1 != 0 { a = realify(a); }
        if kind & 2 != 0 { b = realify(b); }
        let reference = &a * &b;
        prop_assert!(linalg::max_abs(&(&linalg::mul(&a, &b) - &reference)) <= 1e-12 * inner as f64);
        let c = random::ginibre(rows, inner, &mut r);
        let c = if kind & 1 != 0 { realify(c) } else { c };
        prop_assert!(linalg::max_abs(&(&linalg::mul_adj_left(&c, &a) - &(c.adjoint() * &a))) <= 1e-12 * rows as f64);
        prop_assert!(linalg::max_abs(&(&linalg::mul_adj_right(&a, &c) - &(&a * c.adjoint()))) <= 1e-12 * inner as f64);
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn qc_heuristic_is_continuous(t in 1e-5f64..1e-2, seed in any::<u64>()) {
        let mut r = random::rng(seed);
        let space = SiteSpace::new(2, 2).unwrap();
        let rho = random::density(4, 4, &mut r);
        let tau = random::density(4, 4, &mut r);
        let sigma = linalg::add(&linalg::scale_re(&rho, 1.0 - t), &linalg::scale_re(&tau, t));
        let oa = hilbert::embed_local(&random::unit_hermitian(2, &mut r), &[0], &space).unwrap();
        let ob = hilbert::embed_local(&random::unit_hermitian(2, &mut r), &[1], &space).unwrap();
        let search = SearchConfig::default();
        let h = |m: &CMat| qcorr::qc_heuristic(m, &oa, &ob, &search, &[]).unwrap().value;
        let dist = linalg::trace_norm(&linalg::sub(&sigma, &rho)).unwrap();
        let diff = (h(&sigma) - h(&rho)).abs();
        prop_assert!(diff <= 7.0 * 2f64.sqrt() * dist.sqrt() + 1e-6, "{diff} at distance {dist}");
    }

    #[test]
    fn config_round_trips(
        n in 3usize..=8,
        betas in prop::collection::vec(0.01f64..4.0, 1..4),
        seed in any::<u64>(),
        workers in 1usize..8,
    ) {
        let mut c = RunConfig::example(n);
        c.betas = betas;
        c.seed = seed;
        c.workers = workers;
        let s = c.to_json();
        let back = RunConfig::from_json(&s).unwrap();
        prop_assert_eq!(back.to_json(), s);
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn record_pass_flag_survives_serialization(
        value in prop::option::of(-1e3f64..1e3),
        bound in prop::option::of(-1e3f64..1e3),
        beta in 0.01f64..10.0,
    ) {
        let mut rec = ScanRecord {
            model_hash: "m".into(),
            n: 4,
            beta,
            a: vec![0],
            b: vec![3],
            r: 3,
            quantity: "q".into(),
            value,
            bound,
            inputs_hash: "h".into(),
            pass: false,
            error: None,
        };
        rec.pass = rec.recompute_pass();
        let back: ScanRecord = serde_json::from_str(&serde_json::to_string(&rec).unwrap()).unwrap();
        prop_assert_eq!(back.value, rec.value);
        prop_assert_eq!(back.bound, rec.bound);
        prop_assert_eq!(back.beta, rec.beta);
        prop_assert_eq!(back.recompute_pass(), rec.pass);
    }
}

/// Passive mixtures of Gibbs states: the mixture is the Z-weighted average of
/// its constituents, skew information stays below the weighted average, and
/// Q^(alpha) stays below the bound built at the largest constituent beta.
#[test]
fn passive_states_inherit_gibbs_bounds() {
    use thermocorr::cli::lr_for_model;
    use thermocorr::kernels::{self, ModelParams};

    let cfg = RunConfig::example(6);
    let h = model::build_model(&cfg.model).unwrap();
    let spec = Arc::new(thermal::spectral_decompose_mat(&h.matrix().unwrap(), h.space.clone()).unwrap());
    let lr = lr_for_model(&cfg, &h, &spec, false).unwrap().params.unwrap();
    let mp = ModelParams { g: h.g, k: h.k as f64, d0: 2.0, gamma: h.lattice.gamma().gamma, dim: 1.0 };
    let betas = [0.5, 1.0, 2.0];
    let k = kernels::bound_constants(2.0, lr, mp).unwrap();
    let zop = hilbert::pauli::z();
    let mut r = random::rng(5);
    let mut checks = 0;
    for _ in 0..10 {
        let a: Vec<f64> = (0..3).map(|_| rand::Rng::random::<f64>(&mut r) + 0.05).collect();
        let weights: Vec<(f64, f64)> = betas.iter().copied().zip(a.iter().copied()).collect();
        let mix = thermal::passive_mixture(&spec, &weights).unwrap();
        let gibbs: Vec<_> = betas.iter().map(|&b| thermal::gibbs_state(&spec, b).unwrap()).collect();
        let top = gibbs.iter().map(|g| g.ln_z).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = gibbs.iter().zip(&a).map(|(g, ai)| ai * (g.ln_z - top).exp()).collect();
        let wsum: f64 = w.iter().sum();
        let mut avg = linalg::zeros(spec.dim(), spec.dim());
        for (g, wi) in gibbs.iter().zip(&w) {
            avg += linalg::scale_re(&g.spectrum.matrix(), wi / wsum);
        }
        assert!(linalg::max_abs(&(&mix.matrix() - &avg)) < 1e-12);

        let kk = {
            let mut m = linalg::zeros(spec.dim(), spec.dim());
            for i in 0..6 {
                m += &hilbert::embed_local(&zop, &[i], &h.space).unwrap().mat;
            }
            m
        };
        for &alpha in &cfg.alphas {
            let lhs = coherence::skew_information(&mix, &kk, alpha).unwrap();
            let rhs: f64 = gibbs
                .iter()
                .zip(&w)
                .map(|(g, wi)| wi / wsum * coherence::skew_information(&g.spectrum, &kk, alpha).unwrap())
                .sum();
            assert!(lhs <= rhs + 1e-10, "alpha {alpha}: {lhs} > {rhs}");
            checks += 1;
            for rr in 2..6 {
                let oa = hilbert::embed_local(&zop, &[0], &h.space).unwrap();
                let ob = hilbert::embed_local(&zop, &[rr], &h.space).unwrap();
                let q = coherence::q_alpha(&mix, &oa.mat, &ob.mat, alpha).unwrap().norm();
                assert!(q <= k.theorem3_rhs(1, 1, rr) + 1e-12, "alpha {alpha}, R {rr}: {q}");
                checks += 1;
            }
        }
    }
    assert_eq!(checks, 10 * 5 * 5);
}
