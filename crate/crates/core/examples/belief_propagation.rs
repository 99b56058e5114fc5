//! Belief-propagation operators for a boundary cut and the one-dimensional
//! PPT construction between the two ends of a chain.

use thermocorr::bp::{self, BpConfig, BpMode, FilterIntegration, Theorem2Config};
use thermocorr::kernels::{self, LrParams, ModelParams};
use thermocorr::model::{self, ModelSpec};

fn main() -> thermocorr::Result<()> {
    let h = model::build_model(&ModelSpec::tfi_chain(8, 1.0, 1.0))?;
    let cfg = BpConfig { tau_steps: 16, integration: FilterIntegration::Symbol };
    let beta = 0.5;

    let cut = bp::chain_cut(&h, 3, 1)?;
    let sd = bp::step_doubling(&h, beta, &[cut.clone()], &cfg)?;
    println!("full mode, step doubling ratio {:.3}", sd.ratio);
    for ell in 1..=3 {
        let cut = bp::chain_cut(&h, 3, ell)?;
        let op = bp::belief_propagation_operator(&h, beta, &[cut.clone()], BpMode::Localized, &cfg)?;
        let id = bp::bp_identity_error(&h, beta, &cut.terms, &op.phi)?;
        println!("localized ell {ell}: identity error {:.3e}, ||Phi|| {:.4} <= {:.4}", id.trace_error, op.norm, op.norm_bound);
    }

    let lr = LrParams { c: 2.0, v: 4.0, mu: 1.0 };
    let mp = ModelParams { g: h.g, k: h.k as f64, d0: 2.0, gamma: h.lattice.gamma().gamma, dim: 1.0 };
    let k = kernels::bound_constants(beta, lr, mp)?;
    let rep = bp::theorem2_pipeline(&h, beta, &[0, 1, 2], &[5, 6, 7], 1, &k, &Theorem2Config::default())?;
    println!(
        "A=[0,1,2] B=[5,6,7]: S(rho_AB || sigma') = {:.4e} <= {:.3e}, sigma' PPT {}, mixing weight {:.3e}",
        rep.relative_entropy, rep.rhs, rep.sigma_prime_ppt.is_ppt, rep.mixing_weight
    );
    match rep.oracle {
        Some(o) => println!("exact PPT relative entropy {:.4e} (gap {:.1e})", o.value, o.gap),
        None => println!("oracle skipped: {}", rep.oracle_skipped.unwrap_or_default()),
    }
    Ok(())
}
