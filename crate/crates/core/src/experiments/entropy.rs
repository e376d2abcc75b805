//! Per-time-point split of the score into entropy and residual along one
//! stochastic-volatility series, forecast by the true model.

use serde::{Deserialize, Serialize};

use super::config::{ensure, Validate};
use super::volatility::{simulate_volatility, VolatilityConfig};
use crate::distributions::PredictiveDistribution;
use crate::error::{Error, Result};
use crate::kernels::MonteCarlo;
use crate::numerics::RngStream;
use crate::scores::{evaluate, Rule};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub seed: u64,
    pub a: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub series_len: usize,
    pub rules: Vec<Rule>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            seed: 20_190_604,
            a: 0.95,
            sigma_x: 0.5,
            sigma_y: 1.0,
            series_len: 2000,
            rules: vec![Rule::Crps, Rule::Scrps, Rule::Logs],
        }
    }
}

impl EntropyConfig {
    fn volatility(&self) -> VolatilityConfig {
        VolatilityConfig {
            seed: self.seed,
            a: self.a,
            sigma_x: self.sigma_x,
            sigma_y: self.sigma_y,
            series_len: self.series_len,
            replicates: 1,
            delta_grid: Vec::new(),
            rules: self.rules.clone(),
        }
    }
}

impl Validate for EntropyConfig {
    fn validate(&self) -> Result<()> {
        self.volatility().validate()?;
        ensure(self.series_len >= 4, || "series_len must be at least 4".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyRow {
    pub t: usize,
    pub rule: Rule,
    /// Predictive standard deviation.
    pub sd: f64,
    pub y: f64,
    pub score: f64,
    pub entropy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyTrace {
    pub rows: Vec<EntropyRow>,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

impl EntropyTrace {
    pub fn for_rule(&self, rule: &Rule) -> Vec<&EntropyRow> {
        self.rows.iter().filter(|r| r.rule == *rule).collect()
    }

    /// Least-squares slope of the entropy against the predictive SD, or
    /// against its logarithm when `log_sd` is set.
    pub fn entropy_slope(&self, rule: &Rule, log_sd: bool) -> f64 {
        let rows = self.for_rule(rule);
        let x: Vec<f64> = rows.iter().map(|r| if log_sd { r.sd.ln() } else { r.sd }).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.entropy).collect();
        ls_slope(&x, &y)
    }

    /// SD of residuals above the median predictive SD over the SD of those below.
    pub fn residual_sd_ratio(&self, rule: &Rule) -> f64 {
        let rows = self.for_rule(rule);
        let mut sds: Vec<f64> = rows.iter().map(|r| r.sd).collect();
        sds.sort_by(f64::total_cmp);
        let median = sds[sds.len() / 2];
        let high: Vec<f64> = rows.iter().filter(|r| r.sd >= median).map(|r| r.residual).collect();
        let low: Vec<f64> = rows.iter().filter(|r| r.sd < median).map(|r| r.residual).collect();
        sd(&high) / sd(&low)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("entropy_trace", &["t", "rule", "sd", "y", "score", "entropy", "residual"]);
        for r in &self.rows {
            t.push(vec![
                r.t.into(),
                r.rule.to_string().into(),
                r.sd.into(),
                r.y.into(),
                r.score.into(),
                r.entropy.into(),
                r.residual.into(),
            ]);
        }
        t
    }
}

/// Score, entropy `H(P_t)` and `S(P_t, y_t) - H(P_t)` at every time point.
pub fn entropy_decomposition_trace(cfg: &EntropyConfig) -> Result<EntropyTrace> {
    cfg.validate()?;
    let vol = cfg.volatility();
    let (x, y) = simulate_volatility(&vol, &mut RngStream::new(cfg.seed, 0));
    let mc = MonteCarlo::default();
    let mut rows = Vec::with_capacity(x.len() * cfg.rules.len());
    for rule in &cfg.rules {
        for (t, (xt, yt)) in x.iter().zip(&y).enumerate() {
            let sd = cfg.sigma_y * xt.exp();
            let p = PredictiveDistribution::gaussian(0.0, sd)?;
            let ev = evaluate(rule, &p, *yt, &mc.with_stream(t as u64)).map_err(|e: Error| e.at_observation(t))?;
            rows.push(EntropyRow {
                t,
                rule: *rule,
                sd,
                y: *yt,
                score: ev.score.value,
                entropy: ev.entropy.value,
                residual: ev.residual(),
            });
        }
    }
    Ok(EntropyTrace { rows })
}
