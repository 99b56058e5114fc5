//! Real-time kernels, their frequency symbols, kernel-weighted operator
//! quadrature and the bound constants built from Lieb-Robinson data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, cx, CMat};
use crate::thermal::SpectralDecomposition;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// 1 / (beta cosh(pi |t| / beta)); symbol 1 / cosh(beta w / 2).
    FBeta { beta: f64 },
    /// -i / (beta sinh(pi t / beta)); symbol tanh(beta w / 2).
    GBeta { beta: f64 },
    /// Residue series of (1 - e^{a beta w}) / (1 - e^{beta w}).
    GAlphaBeta { alpha: f64, beta: f64 },
    /// (2 / (beta pi)) ln coth(pi |t| / (2 beta)); symbol tanh(beta w / 2) / (beta w / 2).
    BigFBeta { beta: f64 },
}

impl KernelSpec {
    pub fn beta(&self) -> f64 {
        match *self {
            KernelSpec::FBeta { beta }
            | KernelSpec::GBeta { beta }
            | KernelSpec::GAlphaBeta { beta, .. }
            | KernelSpec::BigFBeta { beta } => beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.beta();
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Invalid(format!("kernel needs beta > 0, got {b}")));
        }
        if let KernelSpec::GAlphaBeta { alpha, .. } = *self {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Refused(format!(
                    "alpha = {alpha} outside [0, 1]: the kernel no longer decays and the skew quantity is unbounded"
                )));
            }
        }
        Ok(())
    }

    /// Kernels singular at t = 0 (odd 1/t or logarithmic).
    pub fn singular_at_zero(&self) -> bool {
        match *self {
            KernelSpec::FBeta { .. } => false,
            KernelSpec::GAlphaBeta { alpha, .. } => alpha > 0.0 && alpha < 1.0,
            _ => true,
        }
    }

    /// Weight of the delta function at t = 0 that the closed-form series omits:
    /// the symbol tends to different constants at w -> +-inf for g_{alpha,beta}.
    pub fn delta_weight(&self) -> f64 {
        match *self {
            KernelSpec::GAlphaBeta { alpha, .. } => {
                if alpha == 0.0 {
                    0.0
                } else if alpha == 1.0 {
                    1.0
                } else {
                    0.5
                }
            }
            _ => 0.0,
        }
    }
}

/// Closed-form kernel value.
pub fn eval_kernel(spec: &KernelSpec, t: f64) -> Result<c64> {
    spec.validate()?;
    if !t.is_finite() {
        return Err(Error::Invalid("non-finite t".into()));
    }
    let beta = spec.beta();
    match *spec {
        KernelSpec::FBeta { .. } => {
            let x = PI * t.abs() / beta;
            let e = (-x).exp();
            Ok(cx(2.0 * e / (1.0 + e * e) / beta, 0.0))
        }
        KernelSpec::GBeta { .. } => {
            if t == 0.0 {
                return Err(Error::Invalid("g_beta is singular at t = 0".into()));
            }
            let x = PI * t.abs() / beta;
            // 1/sinh(x) = 2 e^{-x} / (1 - e^{-2x})
            let inv_sinh = 2.0 * (-x).exp() / (-(-2.0 * x).exp_m1());
            Ok(cx(0.0, -t.signum() * inv_sinh / beta))
        }
        KernelSpec::BigFBeta { .. } => {
            if t == 0.0 {
                return Err(Error::Invalid("F_beta is singular at t = 0".into()));
            }
            let x = PI * t.abs() / beta;
            let u = (-x).exp();
            let v = u.ln_1p() - (-(-x).exp_m1()).ln();
            Ok(cx(2.0 * v / (beta * PI), 0.0))
        }
        KernelSpec::GAlphaBeta { alpha, .. } => {
            if alpha == 0.0 || alpha == 1.0 {
                return Ok(cx(0.0, 0.0));
            }
            if t == 0.0 {
                return Err(Error::Invalid("g_alpha_beta is singular at t = 0".into()));
            }
            let s = t.signum();
            let a = 2.0 * PI * t.abs() / beta;
            let x = (-a).exp();
            let one_minus_x = -(-a).exp_m1();
            let ph = cx((2.0 * PI * alpha * s).cos(), -(2.0 * PI * alpha * s).sin());
            let y = ph * x;
            let sum = cx(-x / one_minus_x, 0.0) + y / (cx(1.0, 0.0) - y);
            Ok(cx(0.0, -s / beta) * sum)
        }
    }
}

/// Frequency-domain symbol, sym(w) = integral k(t) e^{iwt} dt (+ delta part).
pub fn symbol(spec: &KernelSpec, w: f64) -> Result<c64> {
    spec.validate()?;
    let beta = spec.beta();
    let x = beta * w;
    Ok(match *spec {
        KernelSpec::FBeta { .. } => cx(1.0 / (x / 2.0).cosh(), 0.0),
        KernelSpec::GBeta { .. } => cx((x / 2.0).tanh(), 0.0),
        KernelSpec::BigFBeta { .. } => {
            if x.abs() < 1e-6 {
                cx(1.0 - x * x / 12.0, 0.0)
            } else {
                cx((x / 2.0).tanh() / (x / 2.0), 0.0)
            }
        }
        KernelSpec::GAlphaBeta { alpha, .. } => cx(alpha_symbol(alpha, x), 0.0),
    })
}

/// (1 - e^{a x}) / (1 - e^{x}) evaluated stably.
pub fn alpha_symbol(alpha: f64, x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return alpha * (1.0 + (alpha - 1.0) * x / 2.0);
    }
    if x > 0.0 {
        // multiply through by e^{-x}
        let num = (-x).exp() - ((alpha - 1.0) * x).exp();
        let den = (-x).exp() - 1.0;
        num / den
    } else {
        (alpha * x).exp_m1() / x.exp_m1()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = -z;
        xs[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gl_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    (x.iter().map(|u| m + h * u).collect(), w.iter().map(|v| v * h).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub eps_quad: f64,
    /// Panels on the outer region at the first refinement level.
    pub base_panels: usize,
    pub max_doublings: usize,
    /// Points per panel.
    pub order: usize,
    /// Override for the inner split radius of odd singular kernels.
    pub delta_t: Option<f64>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { eps_quad: 1e-10, base_panels: 16, max_doublings: 6, order: 16, delta_t: None }
    }
}

/// Truncation radius (beta / pi) ln(1 / eps) + beta.
pub fn t_max(beta: f64, eps: f64) -> f64 {
    beta / PI * (1.0 / eps).ln() + beta
}

/// A fixed node set on t > 0 for the symmetrized integrand.
#[derive(Clone, Debug)]
struct Layout {
    inner: (Vec<f64>, Vec<f64>),
    outer: (Vec<f64>, Vec<f64>),
}

fn layout(spec: &KernelSpec, cfg: &QuadConfig, level: usize, split: f64, max_omega: f64) -> Layout {
    let beta = spec.beta();
    let tm = t_max(beta, cfg.eps_quad);
    let split = split.min(tm * 0.5);
    // graded panels toward t = 0 inside [0, split]
    let mut inner = (Vec::new(), Vec::new());
    let grades = 24 + 4 * level;
    let mut hi = split;
    for _ in 0..grades {
        let lo = hi * 0.5;
        let (x, w) = gl_on(lo, hi, cfg.order);
        inner.0.extend(x);
        inner.1.extend(w);
        hi = lo;
    }
    let (x, w) = gl_on(0.0, hi, cfg.order);
    inner.0.extend(x);
    inner.1.extend(w);
    // uniform panels on [split, t_max], refined with the oscillation scale
    let osc = (max_omega * (tm - split) / PI).ceil() as usize;
    let panels = (cfg.base_panels.max(osc / 4 + 1)) << level;
    let mut outer = (Vec::new(), Vec::new());
    let width = (tm - split) / panels as f64;
    for p in 0..panels {
        let (x, w) = gl_on(split + p as f64 * width, split + (p + 1) as f64 * width, cfg.order);
        outer.0.extend(x);
        outer.1.extend(w);
    }
    Layout { inner, outer }
}

/// integral_{-T}^{T} k(t) e^{iwt} dt on a fixed layout, with the inner region
/// written as k(t)(e^{iwt} - 1) + k(-t)(e^{-iwt} - 1) for odd singular kernels.
fn transform_on(spec: &KernelSpec, lay: &Layout, kv: &KernelValues, w: f64) -> c64 {
    let odd = matches!(spec, KernelSpec::GBeta { .. });
    let mut acc = cx(0.0, 0.0);
    for (q, (&t, &wt)) in lay.inner.0.iter().zip(&lay.inner.1).enumerate() {
        let (kp, km) = kv.inner[q];
        let e = cx((w * t).cos(), (w * t).sin());
        if odd {
            acc += (kp * (e - 1.0) + km * (e.conj() - 1.0)) * wt;
        } else {
            acc += (kp * e + km * e.conj()) * wt;
        }
    }
    for (q, (&t, &wt)) in lay.outer.0.iter().zip(&lay.outer.1).enumerate() {
        let (kp, km) = kv.outer[q];
        let e = cx((w * t).cos(), (w * t).sin());
        acc += (kp * e + km * e.conj()) * wt;
    }
    acc
}

struct KernelValues {
    inner: Vec<(c64, c64)>,
    outer: Vec<(c64, c64)>,
}

fn kernel_values(spec: &KernelSpec, lay: &Layout) -> Result<KernelValues> {
    let f = |ts: &[f64]| -> Result<Vec<(c64, c64)>> {
        ts.iter().map(|&t| Ok((eval_kernel(spec, t)?, eval_kernel(spec, -t)?))).collect()
    };
    Ok(KernelValues { inner: f(&lay.inner.0)?, outer: f(&lay.outer.0)? })
}

/// Result of a kernel transform with its panel-doubling error estimate.
#[derive(Clone, Debug)]
pub struct TransformResult {
    pub values: Vec<c64>,
    pub error_estimate: f64,
    pub doublings: usize,
    pub split: f64,
}

/// Numerical integral_{-inf}^{inf} k(t) e^{iwt} dt for each w (delta part excluded).
pub fn kernel_transform(spec: &KernelSpec, omegas: &[f64], split: f64, cfg: &QuadConfig) -> Result<TransformResult> {
    spec.validate()?;
    let max_omega = omegas.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    let eval = |level: usize| -> Result<Vec<c64>> {
        let lay = layout(spec, cfg, level, split, max_omega);
        let kv = kernel_values(spec, &lay)?;
        Ok(omegas.iter().map(|&w| transform_on(spec, &lay, &kv, w)).collect())
    };
    let mut prev = eval(0)?;
    let mut prev_err = f64::INFINITY;
    for level in 1..=cfg.max_doublings {
        let cur = eval(level)?;
        let err = prev.iter().zip(&cur).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        if err <= cfg.eps_quad.max(1e-13) * 10.0 {
            return Ok(TransformResult { values: cur, error_estimate: err, doublings: level, split });
        }
        if level > 1 && err > prev_err / 2.0 {
            return Err(Error::Quadrature(format!(
                "panel doubling stalled at level {level}: error {err:e} after {prev_err:e}"
            )));
        }
        prev_err = err;
        prev = cur;
    }
    Err(Error::Quadrature(format!("no convergence after {} doublings (last error {prev_err:e})", cfg.max_doublings)))
}

/// Kernel-weighted operator integral integral k(t) O(t) dt with O(t) = e^{iHt} O e^{-iHt}.
///
/// O(t) is evaluated in the eigenbasis of H, where the integral factorizes into
/// one scalar quadrature per Bohr frequency; the panel schedule is the same as
/// summing O(t_q) over the nodes.
#[derive(Clone, Debug)]
pub struct OperatorIntegral {
    pub value: CMat,
    /// HS norm of the change under the last panel doubling.
    pub error_estimate: f64,
    pub doublings: usize,
    pub split: f64,
}

pub fn weighted_operator_integral(
    spec: &KernelSpec,
    h: &SpectralDecomposition,
    o: &CMat,
    cfg: &QuadConfig,
) -> Result<OperatorIntegral> {
    let oe = h.to_eigenbasis(o);
    let r = weighted_integral_eigenbasis(spec, &h.values, &oe, o, cfg)?;
    Ok(OperatorIntegral { value: h.from_eigenbasis(&r.value), ..r })
}

/// Same as [`weighted_operator_integral`] but input and output stay in the eigenbasis.
/// `o_full` is only used to size the inner split for odd kernels.
pub fn weighted_integral_eigenbasis(
    spec: &KernelSpec,
    values: &[f64],
    oe: &CMat,
    o_full: &CMat,
    cfg: &QuadConfig,
) -> Result<OperatorIntegral> {
    let d = values.len();
    let beta = spec.beta();
    let mut split = beta;
    if matches!(spec, KernelSpec::GBeta { .. }) {
        // delta t = min(beta, ||O|| / ||ad_H O||) from the eigenbasis entries
        let on = linalg::hs_norm(o_full).max(1e-300);
        let ad = linalg::hs_norm(&CMat::from_fn(d, d, |i, j| oe[(i, j)] * (values[i] - values[j])));
        if ad > 0.0 {
            split = split.min(on / ad);
        }
    }
    if let Some(dt) = cfg.delta_t {
        split = dt;
    }
    // distinct Bohr frequencies of nonzero entries
    let mut omegas: Vec<f64> = Vec::new();
    for j in 0..d {
        for i in 0..d {
            if oe[(i, j)].norm() > 0.0 {
                omegas.push(values[i] - values[j]);
            }
        }
    }
    omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    omegas.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    let tr = kernel_transform(spec, &omegas, split, cfg)?;
    let lookup = |w: f64| -> c64 {
        let idx = omegas.partition_point(|&x| x < w - 1e-14 * (1.0 + w.abs()));
        let idx = idx.min(omegas.len() - 1);
        tr.values[idx]
    };
    let dw = spec.delta_weight();
    let value = CMat::from_fn(d, d, |i, j| {
        let v = oe[(i, j)];
        if v.norm() == 0.0 {
            cx(0.0, 0.0)
        } else {
            v * (lookup(values[i] - values[j]) + dw)
        }
    });
    // propagate the scalar estimate through the entries (HS norm bound)
    let err = tr.error_estimate * linalg::hs_norm(oe);
    Ok(OperatorIntegral { value, error_estimate: err, doublings: tr.doublings, split: tr.split })
}

/// Lieb-Robinson parameters ||[O_X(t), O_Y]|| <= C min(|dX|, |dY|)(e^{v|t|} - 1) e^{-mu R}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub c: f64,
    pub v: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub k: f64,
    pub d0: f64,
    pub gamma: f64,
    pub dim: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub beta: f64,
    pub xi: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_beta: f64,
    pub c_prime: f64,
    pub xi_prime: f64,
    pub c_tilde: f64,
    pub c_bar: f64,
    pub c_tilde_prime: f64,
    pub lr: LrParams,
    pub model: ModelParams,
}

pub fn bound_constants(beta: f64, lr: LrParams, model: ModelParams) -> Result<BoundConstants> {
    let all = [beta, lr.c, lr.v, lr.mu, model.g, model.k, model.d0, model.gamma, model.dim];
    if all.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::Invalid(format!("bound constants need positive finite inputs: {all:?}")));
    }
    let LrParams { c, v, mu } = lr;
    let vb = v * beta;
    let xi = (4.0 / mu) * (1.0 + vb / PI);
    let pre = (2.0 / xi).exp();
    let c1 = pre * (12.0 / PI + 6.0 * c / vb);
    let c2 = pre * ((12.0 + 3.0 * c) / PI + 3.0 * c / vb) * (3.0 + (1.0 + 2.0 * model.g * beta).ln());
    let c_beta = c1 + c2;
    let c_prime = (12.0 + 2.0 * c) / PI + 4.0 * c / vb;
    let xi_prime = (2.0 + vb / PI) / mu;
    let emk = (mu * model.k).exp();
    let inner = (5.0 + 2.0 * c * emk) / (PI * PI) + 2.0 * c * emk / (PI * vb);
    let c_tilde = 1280.0 * inner * inner;
    let c_bar = 20.0 * (c_tilde + 16.0 * model.d0.powi(4) * c_beta).sqrt();
    let d = model.dim;
    let fact: f64 = (1..=d.round() as usize).map(|k| k as f64).product();
    let c_tilde_prime = c_prime * ((mu / 2.0).powf(d) + model.gamma * (mu / 2.0).exp() * fact);
    Ok(BoundConstants { beta, xi, c1, c2, c_beta, c_prime, xi_prime, c_tilde, c_bar, c_tilde_prime, lr, model })
}

impl BoundConstants {
    /// C_beta (|dA| + |dB|)(1 + ln|AB|) e^{-R / xi}.
    pub fn theorem1_rhs(&self, surface_a: usize, surface_b: usize, size_ab: usize, r: usize) -> f64 {
        self.c_beta
            * (surface_a + surface_b) as f64
            * (1.0 + (size_ab as f64).ln())
            * (-(r as f64) / self.xi).exp()
    }

    /// C'_beta min(|dA|, |dB|) e^{-R / xi'}.
    pub fn theorem3_rhs(&self, surface_a: usize, surface_b: usize, r: usize) -> f64 {
        self.c_prime * surface_a.min(surface_b) as f64 * (-(r as f64) / self.xi_prime).exp()
    }

    /// C~'_beta xi'^D n.
    pub fn corollary2_skew_rhs(&self, n: usize) -> f64 {
        self.c_tilde_prime * self.xi_prime.powf(self.model.dim) * n as f64
    }

    pub fn corollary2_fisher_rhs(&self, n: usize) -> f64 {
        8.0 * self.corollary2_skew_rhs(n)
    }

    /// C~_beta e^{-2 l / xi + 14 g k beta}.
    pub fn lemma7_rhs(&self, ell: usize) -> f64 {
        self.c_tilde * (-2.0 * ell as f64 / self.xi + 14.0 * self.model.g * self.model.k * self.beta).exp()
    }

    /// C-bar_beta ln(D_AB) e^{-R / (16 ln(d0) xi^2) + 7 g k beta}.
    pub fn theorem2_rhs(&self, dim_ab: f64, r: usize) -> f64 {
        let ld = self.model.d0.ln();
        self.c_bar
            * dim_ab.ln()
            * (-(r as f64) / (16.0 * ld * self.xi * self.xi) + 7.0 * self.model.g * self.model.k * self.beta).exp()
    }

    /// l = ceil(R / (16 ln(d0) xi)).
    pub fn theorem2_ell(&self, r: usize) -> usize {
        ((r as f64) / (16.0 * self.model.d0.ln() * self.xi)).ceil().max(1.0) as usize
    }

    /// e^{mu / (2 + 2 v beta / pi)} (8 / pi + 4 C / (v beta)) |dX| e^{-mu R / (4 (1 + v beta / pi))}.
    pub fn lemma4_delta_bound(&self, surface_x: usize, r: usize) -> f64 {
        let LrParams { c, v, mu } = self.lr;
        let vb = v * self.beta;
        (mu / (2.0 + 2.0 * vb / PI)).exp()
            * (8.0 / PI + 4.0 * c / vb)
            * surface_x as f64
            * (-mu * r as f64 / (4.0 * (1.0 + vb / PI))).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        let (x, w) = gl_on(0.0, 2.0, 5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn kernel_values_at_reference_points() {
        let f = eval_kernel(&KernelSpec::FBeta { beta: 2.0 }, 0.0).unwrap();
        assert!((f.re - 0.5).abs() < 1e-15);
        let g = KernelSpec::GBeta { beta: 1.0 };
        assert!(eval_kernel(&g, 0.0).is_err());
        let a = eval_kernel(&g, 0.3).unwrap();
        let b = eval_kernel(&g, -0.3).unwrap();
        assert!((a + b).norm() < 1e-15);
        assert!((a.im + 1.0 / (PI * 0.3).sinh()).abs() < 1e-13);
    }

    #[test]
    fn alpha_refused_outside_unit_interval() {
        let k = KernelSpec::GAlphaBeta { alpha: 1.5, beta: 1.0 };
        assert!(matches!(eval_kernel(&k, 0.2), Err(Error::Refused(_))));
    }

    #[test]
    fn alpha_symbol_limits() {
        for &x in &[-3.0, -1e-9, 0.0, 2.0, 40.0] {
            assert!(alpha_symbol(0.0, x).abs() < 1e-12);
            assert!((alpha_symbol(1.0, x) - 1.0).abs() < 1e-12);
        }
        let direct = (1.0 - (0.3f64 * 2.0).exp()) / (1.0 - 2f64.exp());
        assert!((alpha_symbol(0.3, 2.0) - direct).abs() < 1e-14);
    }

    #[test]
    fn constants_reference_values() {
        let lr = LrParams { c: 1.0, v: PI, mu: 4.0 };
        let m = ModelParams { g: 2.0, k: 2.0, d0: 2.0, gamma: 3.0, dim: 1.0 };
        let b = bound_constants(1.0, lr, m).unwrap();
        assert!((b.xi - 2.0).abs() < 1e-14);
        let b = bound_constants(2.0, LrParams { c: 1.0, v: PI, mu: 2.0 }, m).unwrap();
        assert!((b.xi_prime - 2.0).abs() < 1e-14);
        assert!(bound_constants(1.0, LrParams { c: 0.0, v: 1.0, mu: 1.0 }, m).is_err());
    }

    #[test]
    fn transforms_match_symbols() {
        let cfg = QuadConfig::default();
        for &beta in &[0.5, 1.0, 2.0, 5.0] {
            let ws: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.5 / beta).collect();
            for spec in [
                KernelSpec::FBeta { beta },
                KernelSpec::GBeta { beta },
                KernelSpec::GAlphaBeta { alpha: 0.3, beta },
                KernelSpec::BigFBeta { beta },
            ] {
                let tr = kernel_transform(&spec, &ws, beta, &cfg).unwrap();
                for (w, v) in ws.iter().zip(&tr.values) {
                    let s = symbol(&spec, *w).unwrap() - spec.delta_weight();
                    assert!((v - s).norm() < 1e-6, "{spec:?} w={w} got {v} want {s}");
                }
            }
        }
    }
}
