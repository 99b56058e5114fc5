//! Exponential decay fits of scan records against distance.

use serde::{Deserialize, Serialize};

use super::scan::ScanRecord;
use crate::error::{Error, Result};

pub const DECAY_FLOOR: f64 = 1e-12;
pub const MIN_DISTANCES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub quantity: String,
    /// Fitted correlation length: value ~ e^{intercept - R / xi}.
    pub xi_measured: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Points at or below the floor, left out of the fit.
    pub censored: usize,
}

/// Least squares of ln(value) on R over the records carrying `quantity`.
pub fn fit_decay(records: &[ScanRecord], quantity: &str) -> Result<DecayFit> {
    let mut pts = Vec::new();
    let mut censored = 0;
    for r in records.iter().filter(|r| r.quantity == quantity) {
        match r.value {
            Some(v) if v.is_finite() && v > DECAY_FLOOR => pts.push((r.r as f64, v.ln())),
            Some(_) => censored += 1,
            None => {}
        }
    }
    let mut dists: Vec<f64> = pts.iter().map(|p| p.0).collect();
    dists.sort_by(f64::total_cmp);
    dists.dedup();
    if dists.len() < MIN_DISTANCES {
        return Err(Error::Invalid(format!(
            "'{quantity}' has {} distances above the floor ({censored} censored); need {MIN_DISTANCES}",
            dists.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(DecayFit {
        quantity: quantity.to_string(),
        xi_measured: -1.0 / slope,
        intercept,
        r_squared,
        points: pts.len(),
        censored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(r: usize, v: f64) -> ScanRecord {
        ScanRecord {
            model_hash: "m".into(),
            n: 8,
            beta: 1.0,
            a: vec![0],
            b: vec![r],
            r,
            quantity: "c".into(),
            value: Some(v),
            bound: Some(1.0),
            inputs_hash: "h".into(),
            pass: true,
            error: None,
        }
    }

    #[test]
    fn exact_exponential_recovered() {
        let recs: Vec<_> = (1..7).map(|r| rec(r, 0.3 * (-(r as f64) / 2.0).exp())).collect();
        let f = fit_decay(&recs, "c").unwrap();
        assert!((f.xi_measured - 2.0).abs() < 1e-6);
        assert!((f.intercept - 0.3f64.ln()).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn censored_points_counted_and_insufficient_refused() {
        let mut recs: Vec<_> = (1..5).map(|r| rec(r, (-(r as f64)).exp())).collect();
        recs.push(rec(5, 0.0));
        let f = fit_decay(&recs, "c").unwrap();
        assert_eq!(f.censored, 1);
        let all: Vec<_> = (1..6).map(|r| rec(r, 1e-13)).collect();
        assert!(fit_decay(&all, "c").is_err());
        assert!(fit_decay(&recs, "other").is_err());
    }
}
