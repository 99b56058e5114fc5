//! Fits Lieb-Robinson parameters to exact commutator norms and prints the
//! resulting correlation lengths.

use thermocorr::kernels::{self, ModelParams};
use thermocorr::lr::{self, FitConfig, SampleConfig};
use thermocorr::model::{self, ModelSpec};
use thermocorr::thermal;

fn main() -> thermocorr::Result<()> {
    let h = model::build_model(&ModelSpec::tfi_chain(8, 1.0, 1.0))?;
    let spec = thermal::spectral_decompose_mat(&h.matrix()?, h.space.clone())?;
    let samples = lr::lr_samples(&h, &spec, &SampleConfig::default())?;
    let fit = lr::fit_lr_params(&samples, &FitConfig::default())?;
    println!(
        "{} samples: C = {:.4}, v = {:.4}, mu = {:.4}, worst value/bound {:.4}",
        samples.len(),
        fit.c,
        fit.v,
        fit.mu,
        fit.worst_ratio
    );
    for s in samples.iter().filter(|s| s.r == 3).step_by(4) {
        println!("  t {:.3} R {}: {:.3e} <= {:.3e}", s.t, s.r, s.value, fit.bound(s.t, s.r, s.surface));
    }
    let params = fit.params().expect("commutators grow");
    let mp = ModelParams { g: h.g, k: h.k as f64, d0: 2.0, gamma: h.lattice.gamma().gamma, dim: 1.0 };
    for beta in [0.5, 1.0, 2.0] {
        let k = kernels::bound_constants(beta, params, mp)?;
        println!("beta {beta}: xi = {:.3}, xi' = {:.3}, C_beta = {:.3e}", k.xi, k.xi_prime, k.c_beta);
    }
    Ok(())
}
