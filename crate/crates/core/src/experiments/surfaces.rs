//! Expected average score `S(P_1, Q_1)/2 + S(P_2, Q_2)/2` for two independent
//! zero-mean Gaussian targets with different scales.

use serde::{Deserialize, Serialize};

use super::config::{ensure, Validate};
use crate::distributions::GaussianDist;
use crate::error::{Error, Result};
use crate::numerics::std_normal_quantile;
use crate::scores::{expected_gaussian_score, Rule};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    /// Range of `sigma_hat_i / sigma_i`, sampled geometrically.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Range of `p_i` with `mu_hat_i = sigma_i Phi^-1(p_i)`.
    pub p_min: f64,
    pub p_max: f64,
    /// Points per axis.
    pub n_grid: usize,
    pub rules: Vec<Rule>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            sigma1: 0.1,
            sigma2: 1.0,
            ratio_min: 0.5,
            ratio_max: 2.0,
            p_min: 0.05,
            p_max: 0.95,
            n_grid: 41,
            rules: vec![Rule::Crps, Rule::Logs, Rule::Scrps],
        }
    }
}

impl Validate for SurfaceConfig {
    fn validate(&self) -> Result<()> {
        ensure(self.sigma1 > 0.0 && self.sigma2 > 0.0, || "sigmas must be positive".into())?;
        ensure(0.0 < self.ratio_min && self.ratio_min < 1.0 && self.ratio_max > 1.0, || {
            "ratio range must contain 1 in its interior".into()
        })?;
        ensure(0.0 < self.p_min && self.p_min < 0.5 && 0.5 < self.p_max && self.p_max < 1.0, || {
            "p range must lie in (0, 1) and contain 0.5 in its interior".into()
        })?;
        ensure(self.n_grid >= 3, || "n_grid must be at least 3".into())?;
        ensure(!self.rules.is_empty(), || "rules must not be empty".into())?;
        for r in &self.rules {
            r.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// Surface over one panel: `values[i][j]` at `(axis[i], axis[j])` for the
/// first and second target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceGrid {
    pub rule: Rule,
    /// `"sigma"` (relative scale errors) or `"mu"` (mean errors as probabilities).
    pub panel: &'static str,
    pub axis: Vec<f64>,
    /// Index of the correctly specified grid value.
    pub center: usize,
    pub values: Vec<Vec<f64>>,
}

impl SurfaceGrid {
    /// Loss relative to the correctly specified forecast.
    pub fn drop(&self, i: usize, j: usize) -> f64 {
        self.values[self.center][self.center] - self.values[i][j]
    }

    /// `max |D(i,j) - D(j,i)| / max(D(i,j), D(j,i))` over the grid.
    pub fn max_swap_asymmetry(&self) -> f64 {
        let n = self.axis.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (self.drop(i, j), self.drop(j, i));
                let denom = a.abs().max(b.abs());
                if denom > 1e-12 {
                    worst = worst.max((a - b).abs() / denom);
                }
            }
        }
        worst
    }

    /// Drop from misspecifying only the second target by grid value `k`,
    /// divided by the drop from misspecifying only the first by the same amount.
    pub fn swap_ratio(&self, k: usize) -> f64 {
        self.drop(self.center, k) / self.drop(k, self.center)
    }

    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v > self.values[best.0][best.1] {
                    best = (i, j);
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Surfaces {
    pub grids: Vec<SurfaceGrid>,
}

impl Surfaces {
    pub fn get(&self, rule: &Rule, panel: &str) -> Option<&SurfaceGrid> {
        self.grids.iter().find(|g| g.rule == *rule && g.panel == panel)
    }

    /// One table per rule with both panels, named `surface_<rule>`.
    pub fn tables(&self) -> Vec<Table> {
        let mut out: Vec<Table> = Vec::new();
        for g in &self.grids {
            let name = format!("surface_{}", g.rule.to_string().replace([':', '='], "_"));
            let idx = match out.iter().position(|t| t.name == name) {
                Some(i) => i,
                None => {
                    out.push(Table::new(name, &["panel", "x1", "x2", "expected_score"]));
                    out.len() - 1
                }
            };
            for (i, x1) in g.axis.iter().enumerate() {
                for (j, x2) in g.axis.iter().enumerate() {
                    out[idx].push(vec![g.panel.into(), (*x1).into(), (*x2).into(), g.values[i][j].into()]);
                }
            }
        }
        out
    }
}

/// Expected-average-score surfaces over relative scale errors (`sigma`
/// panel, correct means) and over mean errors (`mu` panel, correct scales).
pub fn expected_score_surfaces(cfg: &SurfaceConfig) -> Result<Surfaces> {
    cfg.validate()?;
    let n = cfg.n_grid;
    let center = n / 2;
    let frac = |k: usize| -> f64 {
        if k < center {
            k as f64 / center as f64 - 1.0
        } else {
            (k - center) as f64 / (n - 1 - center) as f64
        }
    };
    // piecewise so that the center lands exactly on the correct forecast
    let ratio_axis: Vec<f64> = (0..n)
        .map(|k| {
            let f = frac(k);
            if f < 0.0 {
                cfg.ratio_min.powf(-f)
            } else {
                cfg.ratio_max.powf(f)
            }
        })
        .collect();
    let p_axis: Vec<f64> = (0..n)
        .map(|k| {
            let f = frac(k);
            if f < 0.0 {
                0.5 + (0.5 - cfg.p_min) * f
            } else {
                0.5 + (cfg.p_max - 0.5) * f
            }
        })
        .collect();
    let q1 = GaussianDist::new(0.0, cfg.sigma1)?;
    let q2 = GaussianDist::new(0.0, cfg.sigma2)?;
    let mut grids = Vec::new();
    for rule in &cfg.rules {
        let eval = |f1: GaussianDist, f2: GaussianDist| -> Result<f64> {
            Ok(0.5 * expected_gaussian_score(rule, &f1, &q1)? + 0.5 * expected_gaussian_score(rule, &f2, &q2)?)
        };
        let mut sigma_vals = vec![vec![0.0; n]; n];
        let mut mu_vals = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                sigma_vals[i][j] = eval(
                    GaussianDist::new(0.0, cfg.sigma1 * ratio_axis[i])?,
                    GaussianDist::new(0.0, cfg.sigma2 * ratio_axis[j])?,
                )?;
                let m = |p: f64, s: f64| if p == 0.5 { 0.0 } else { s * std_normal_quantile(p) };
                mu_vals[i][j] = eval(
                    GaussianDist::new(m(p_axis[i], cfg.sigma1), cfg.sigma1)?,
                    GaussianDist::new(m(p_axis[j], cfg.sigma2), cfg.sigma2)?,
                )?;
            }
        }
        grids.push(SurfaceGrid { rule: *rule, panel: "sigma", axis: ratio_axis.clone(), center, values: sigma_vals });
        grids.push(SurfaceGrid { rule: *rule, panel: "mu", axis: p_axis.clone(), center, values: mu_vals });
    }
    Ok(Surfaces { grids })
}
