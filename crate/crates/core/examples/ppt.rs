//! Negativity, the closed-form PPT shift and the exact PPT relative entropy
//! along the Werner family.

use thermocorr::entangle::{self, PptInput, SolverConfig};
use thermocorr::hilbert::SiteSpace;
use thermocorr::linalg::{self, cx};

fn main() -> thermocorr::Result<()> {
    let space = SiteSpace::new(2, 2)?;
    let s = 0.5f64.sqrt();
    let phi = [cx(s, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(s, 0.0)];
    let bell = linalg::outer(&phi, &phi);
    let solver = SolverConfig::default();
    println!("{:>5} {:>8} {:>10} {:>12} {:>12} {:>10} {:>10}", "p", "delta", "E_N", "upper S", "exact E_R", "gap", "closed");
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let rho = linalg::add(&linalg::scale_re(&bell, p), &linalg::scale_re(&linalg::identity(4), (1.0 - p) / 4.0));
        let rep = entangle::ppt_analysis(&rho, &space, &[0])?;
        let up = entangle::ppt_relative_upper(&rho, &space, &[0], PptInput::Delta(rep.delta))?;
        let ex = entangle::ppt_relative_exact(&rho, &space, &[0], &solver, &[])?;
        // fidelity F = (1 + 3p) / 4; E_R = ln 2 + F ln F + (1 - F) ln(1 - F) above F = 1/2
        let f = (1.0 + 3.0 * p) / 4.0;
        let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
        let closed = if f > 0.5 { 2f64.ln() + xlnx(f) + xlnx(1.0 - f) } else { 0.0 };
        let upper = up.relative_entropy.map_or("-".to_string(), |v| format!("{v:.6}"));
        println!("{p:>5.1} {:>8.4} {:>10.6} {upper:>12} {:>12.6} {:>10.1e} {closed:>10.6}", rep.delta, rep.negativity, ex.value, ex.gap);
    }
    Ok(())
}
