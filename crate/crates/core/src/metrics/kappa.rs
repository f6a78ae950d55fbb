use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    /// Both raters used one and the same class throughout, so the chance
    /// agreement is 1 and the ratio is 0/0. Reported as 1.0 when they agree
    /// everywhere (always the case here).
    pub degenerate: bool,
}

/// Cohen's kappa for two binary raters.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64, MetricsError> {
    cohen_kappa_detailed(a, b).map(|k| k.kappa)
}

pub fn cohen_kappa_detailed(a: &[bool], b: &[bool]) -> Result<KappaEstimate, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricsError::EmptyLabels);
    }
    let n = a.len();
    let (mut agree, mut a_yes, mut b_yes) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        agree += usize::from(x == y);
        a_yes += usize::from(x);
        b_yes += usize::from(y);
    }
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let pa = a_yes as f64 / nf;
    let pb = b_yes as f64 / nf;
    let p_e = pa * pb + (1.0 - pa) * (1.0 - pb);

    let a_const = a_yes == 0 || a_yes == n;
    let b_const = b_yes == 0 || b_yes == n;
    if a_const && b_const && a_yes == b_yes {
        let kappa = if agree == n { 1.0 } else { 0.0 };
        return Ok(KappaEstimate { kappa, observed_agreement: p_o, expected_agreement: 1.0, degenerate: true });
    }
    Ok(KappaEstimate {
        kappa: (p_o - p_e) / (1.0 - p_e),
        observed_agreement: p_o,
        expected_agreement: p_e,
        degenerate: false,
    })
}
