//! Reference implementations written independently of the library code.

use statrs::function::gamma::ln_gamma;

/// Add-half mixture capital in closed form:
/// `Σ_a [lnΓ(c_a + ½) − lnΓ(½)] + lnΓ(A/2) − lnΓ(n + A/2) − Σ_a c_a ln p_a`.
pub fn kt_log_capital(counts: &[u64], odds: &[f64]) -> f64 {
    assert_eq!(counts.len(), odds.len());
    let a = counts.len() as f64;
    let n: u64 = counts.iter().sum();
    let mut total = ln_gamma(a / 2.0) - ln_gamma(n as f64 + a / 2.0);
    for (&c, &p) in counts.iter().zip(odds) {
        total += ln_gamma(c as f64 + 0.5) - ln_gamma(0.5) - c as f64 * p.ln();
    }
    total
}

/// `Σ_a r_a ln(r_a / p_a)`.
pub fn kl(r: &[f64], p: &[f64]) -> f64 {
    r.iter()
        .zip(p)
        .filter(|(r, _)| **r > 0.0)
        .map(|(r, p)| r * (r / p).ln())
        .sum()
}
