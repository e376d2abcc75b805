//! Stochastic volatility: `X_t = a X_{t-1} + eps_X`, `y_t = eps_Y exp(X_t)`,
//! with `X_t` observed and `y_t` predicted by `N(0, sigma_Y_hat^2 exp(2 X_t))`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ensure, Validate};
use super::gaussian_score;
use super::selection::{tally, true_model_wins, SelectionCurve};
use crate::distributions::GaussianDist;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::scores::Rule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolatilityConfig {
    pub seed: u64,
    /// AR coefficient.
    pub a: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub series_len: usize,
    pub replicates: usize,
    pub delta_grid: Vec<f64>,
    pub rules: Vec<Rule>,
}

impl Default for VolatilityConfig {
    fn default() -> Self {
        VolatilityConfig {
            seed: 20_190_601,
            a: 0.95,
            sigma_x: 0.5,
            sigma_y: 1.0,
            series_len: 600,
            replicates: 200,
            delta_grid: vec![0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45],
            rules: vec![Rule::Crps, Rule::Scrps, Rule::Logs],
        }
    }
}

impl Validate for VolatilityConfig {
    fn validate(&self) -> Result<()> {
        ensure(self.a.abs() < 1.0, || format!("|a| must be < 1, got {}", self.a))?;
        ensure(self.sigma_x >= 0.0 && self.sigma_x.is_finite(), || {
            format!("sigma_x must be >= 0, got {}", self.sigma_x)
        })?;
        ensure(self.sigma_y > 0.0 && self.sigma_y.is_finite(), || {
            format!("sigma_y must be > 0, got {}", self.sigma_y)
        })?;
        ensure(self.series_len > 0 && self.replicates > 0, || "series_len and replicates must be positive".into())?;
        ensure(!self.rules.is_empty(), || "rules must not be empty".into())?;
        for &d in &self.delta_grid {
            ensure(d > 0.0 && d < self.sigma_y, || format!("delta {d} must lie in (0, sigma_y)"))?;
        }
        for r in &self.rules {
            r.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// One series `(x_t, y_t)`, with `x_0` drawn from the stationary law.
pub fn simulate_volatility(cfg: &VolatilityConfig, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(cfg.series_len);
    let mut y = Vec::with_capacity(cfg.series_len);
    let mut state = cfg.sigma_x / (1.0 - cfg.a * cfg.a).sqrt() * rng.std_normal();
    for _ in 0..cfg.series_len {
        state = cfg.a * state + cfg.sigma_x * rng.std_normal();
        x.push(state);
        y.push(cfg.sigma_y * state.exp() * rng.std_normal());
    }
    (x, y)
}

fn mean_score(rule: &Rule, sigma_hat: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (xt, yt) in x.iter().zip(y) {
        total += gaussian_score(rule, GaussianDist::new(0.0, sigma_hat * xt.exp())?, *yt)?;
    }
    Ok(total / x.len() as f64)
}

/// Probability that `sigma_Y_hat = sigma_Y` beats both `sigma_Y +- delta`.
pub fn run_volatility(cfg: &VolatilityConfig) -> Result<SelectionCurve> {
    cfg.validate()?;
    let wins: Vec<Vec<Vec<bool>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let (x, y) = simulate_volatility(cfg, &mut RngStream::new(cfg.seed, rep as u64));
            cfg.rules
                .iter()
                .map(|rule| {
                    let truth = mean_score(rule, cfg.sigma_y, &x, &y)?;
                    cfg.delta_grid
                        .iter()
                        .map(|d| {
                            let up = mean_score(rule, cfg.sigma_y + d, &x, &y)?;
                            let down = mean_score(rule, cfg.sigma_y - d, &x, &y)?;
                            Ok(true_model_wins(truth, &[up, down]))
                        })
                        .collect::<Result<Vec<bool>>>()
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.at_replicate(rep))
        })
        .collect::<Result<_>>()?;
    Ok(tally("clean", &cfg.rules, &cfg.delta_grid, &wins))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_variance_of_volatility() {
        let cfg = VolatilityConfig { series_len: 200_000, ..Default::default() };
        let (x, _) = simulate_volatility(&cfg, &mut RngStream::new(1, 0));
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let want = 0.25 / (1.0 - 0.95f64.powi(2));
        // AR(1) with a = 0.95 has an effective sample size of about n / 39
        assert!((var / want - 1.0).abs() < 0.1, "{var} vs {want}");
    }

    #[test]
    fn small_delta_rarely_selects_truth() {
        let cfg = VolatilityConfig { replicates: 100, delta_grid: vec![1e-4], ..Default::default() };
        let curve = run_volatility(&cfg).unwrap();
        for row in &curve.rows {
            assert!(row.prob_correct <= 0.1, "{row:?}");
        }
    }

    #[test]
    fn constant_volatility_rules_agree() {
        let cfg = VolatilityConfig { sigma_x: 0.0, replicates: 200, delta_grid: vec![0.05, 0.1], ..Default::default() };
        let curve = run_volatility(&cfg).unwrap();
        for &d in &cfg.delta_grid {
            let rows: Vec<_> = curve.rows.iter().filter(|r| r.delta == d).collect();
            for a in &rows {
                for b in &rows {
                    assert!(a.overlaps(b), "{a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(VolatilityConfig { a: 1.0, ..Default::default() }.validate().is_err());
        assert!(VolatilityConfig { delta_grid: vec![1.5], ..Default::default() }.validate().is_err());
    }
}
