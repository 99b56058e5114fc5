//! Fourier symbols of the filter kernels, checked against quadrature.

use thermocorr::kernels::{self, KernelSpec, QuadConfig};

fn main() -> thermocorr::Result<()> {
    let beta = 1.0;
    let cfg = QuadConfig::default();
    let omegas: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.5).collect();
    let specs = [
        ("f_beta", KernelSpec::FBeta { beta }),
        ("g_beta", KernelSpec::GBeta { beta }),
        ("g_1/2,beta", KernelSpec::GAlphaBeta { alpha: 0.5, beta }),
        ("F_beta", KernelSpec::BigFBeta { beta }),
    ];
    println!("{:>12} {:>6} {:>14} {:>14} {:>10}", "kernel", "w", "quadrature", "symbol", "diff");
    for (name, spec) in specs {
        let tr = kernels::kernel_transform(&spec, &omegas, beta, &cfg)?;
        for (w, v) in omegas.iter().zip(&tr.values).step_by(4) {
            let s = kernels::symbol(&spec, *w)? - spec.delta_weight();
            println!("{name:>12} {w:>6.2} {:>14.10} {:>14.10} {:>10.2e}", v.re, s.re, (v - s).norm());
        }
        println!("{name:>12} error estimate {:.2e}, {} doublings", tr.error_estimate, tr.doublings);
    }
    println!("time cutoff for eps 1e-10 at beta {beta}: {:.2}", kernels::t_max(beta, 1e-10));
    Ok(())
}
