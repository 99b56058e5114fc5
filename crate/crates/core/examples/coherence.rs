//! Skew and Fisher information of the total magnetization in thermal states.

use std::sync::Arc;

use thermocorr::coherence;
use thermocorr::hilbert::{self, pauli};
use thermocorr::linalg;
use thermocorr::model::{self, ModelSpec};
use thermocorr::thermal;

fn main() -> thermocorr::Result<()> {
    let n = 8;
    let h = model::build_model(&ModelSpec::tfi_chain(n, 1.0, 1.0))?;
    let spec = Arc::new(thermal::spectral_decompose_mat(&h.matrix()?, h.space.clone())?);
    let mut mz = linalg::zeros(h.space.dim(), h.space.dim());
    for i in 0..n {
        mz += &hilbert::embed_local(&pauli::z(), &[i], &h.space)?.mat;
    }
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    println!("{:>5} {:>10} {}", "beta", "F/n", alphas.map(|a| format!("{:>10}", format!("I^{a}/n"))).join(""));
    for beta in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let g = thermal::gibbs_state(&spec, beta)?;
        let rep = coherence::fisher_report(&g.spectrum, &mz, &alphas)?;
        let skew: String = rep.skew.iter().map(|(_, v)| format!("{:>10.4}", v / n as f64)).collect();
        println!("{beta:>5} {:>10.4}{skew}", rep.fisher / n as f64);
    }
    Ok(())
}
