//! Closed forms for Gaussian forecasts: per-observation scores, entropies and
//! expected scores under a Gaussian truth.

use std::f64::consts::{PI, SQRT_2};

use crate::distributions::GaussianDist;
use crate::error::{Error, Result};
use crate::kernels::{e_function_unchecked, gaussian_abs_moment};
use crate::numerics::{erf, std_normal_pdf, SQRT_PI};

use super::Rule;

/// `2 Phi(z) - 1` without cancellation near zero.
#[inline]
fn two_phi_minus_one(z: f64) -> f64 {
    erf(z / SQRT_2)
}

/// Positively oriented CRPS of `N(mu, sigma^2)` at `y`.
pub fn crps(g: &GaussianDist, y: f64) -> f64 {
    let z = (y - g.mu) / g.sigma;
    g.sigma / SQRT_PI - 2.0 * g.sigma * std_normal_pdf(z) - (y - g.mu) * two_phi_minus_one(z)
}

pub fn scrps(g: &GaussianDist, y: f64) -> f64 {
    let z = (g.mu - y) / g.sigma;
    -SQRT_PI * std_normal_pdf(z) - 0.5 * SQRT_PI * z * two_phi_minus_one(z) - 0.5 * (2.0 * g.sigma / SQRT_PI).ln()
}

pub fn rcrps(g: &GaussianDist, y: f64, c: f64) -> f64 {
    0.5 * e_function_unchecked(0.0, SQRT_2 * g.sigma, c) - e_function_unchecked(g.mu - y, g.sigma, c)
}

pub fn rscrps(g: &GaussianDist, y: f64, c: f64) -> f64 {
    let e_pp = e_function_unchecked(0.0, SQRT_2 * g.sigma, c);
    -e_function_unchecked(g.mu - y, g.sigma, c) / e_pp - 0.5 * e_pp.ln()
}

pub fn log_score(g: &GaussianDist, y: f64) -> f64 {
    g.log_pdf(y)
}

pub fn dss(g: &GaussianDist, y: f64) -> f64 {
    let v = g.sigma * g.sigma;
    -(y - g.mu).powi(2) / (2.0 * v) - 0.5 * v.ln()
}

/// Expected score `E_{Y ~ truth} S(forecast, Y)`.
///
/// Kernel-type rules are affine in `E_P g(X, y)`, so their expectation only
/// needs `E g(X, Y)` for independent `X ~ forecast`, `Y ~ truth`, which is the
/// kernel expectation of `N(mu_d, sigma_d^2)` with `mu_d = mu - mu_hat` and
/// `sigma_d^2 = sigma_hat^2 + sigma^2`.
pub fn expected_score(rule: &Rule, forecast: &GaussianDist, truth: &GaussianDist) -> Result<f64> {
    let mu_d = truth.mu - forecast.mu;
    let v_hat = forecast.sigma * forecast.sigma;
    let spread = truth.sigma * truth.sigma + mu_d * mu_d;
    match rule {
        Rule::Logs => Ok(-0.5 * (2.0 * PI * v_hat).ln() - spread / (2.0 * v_hat)),
        Rule::Dss => Ok(-spread / (2.0 * v_hat) - 0.5 * v_hat.ln()),
        _ => {
            let (h, k, offset) = rule.kernel_form().expect("non-kernel rules handled above");
            let sigma_d = (v_hat + truth.sigma * truth.sigma).sqrt();
            let (e_pp, cross) = match (k.alpha(), k.trunc()) {
                (a, None) if a == 1.0 => (2.0 * forecast.sigma / SQRT_PI, gaussian_abs_moment(mu_d, sigma_d)),
                (a, Some(c)) if a == 1.0 => {
                    (e_function_unchecked(0.0, SQRT_2 * forecast.sigma, c), e_function_unchecked(mu_d, sigma_d, c))
                }
                (a, None) if a == 2.0 => (2.0 * v_hat, sigma_d * sigma_d + mu_d * mu_d),
                _ => {
                    return Err(Error::Unsupported {
                        rule: rule.to_string(),
                        kind: "closed-form expected gaussian scores".into(),
                    })
                }
            };
            Ok(h.score(e_pp, cross)? + offset)
        }
    }
}
