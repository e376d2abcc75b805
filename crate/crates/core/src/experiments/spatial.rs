//! Leave-one-out kriging of a Matérn field on random locations in the unit
//! square, optionally with an injected outlier.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ensure, Validate};
use super::gaussian_score;
use super::selection::{tally, true_model_wins, SelectionCurve};
use crate::distributions::GaussianDist;
use crate::error::{Error, Result};
use crate::numerics::{bessel_k_scaled_general, cholesky_jittered, ln_gamma, RngStream, SymMatrix};
use crate::scores::Rule;

/// Matérn covariance `sigma^2 / (2^(nu-1) Gamma(nu)) (kappa h)^nu K_nu(kappa h)`.
pub fn matern_cov(h: f64, kappa: f64, sigma: f64, nu: f64) -> Result<f64> {
    if !(kappa > 0.0 && sigma > 0.0 && nu > 0.0) {
        return Err(Error::domain(format!(
            "Matérn parameters must be positive: kappa={kappa}, sigma={sigma}, nu={nu}"
        )));
    }
    if !(h >= 0.0) {
        return Err(Error::domain(format!("distance must be >= 0, got {h}")));
    }
    let var = sigma * sigma;
    let x = kappa * h;
    if x == 0.0 {
        return Ok(var);
    }
    if x > 745.0 + nu * x.ln() {
        return Ok(0.0);
    }
    let log_scale = nu * x.ln() - ln_gamma(nu) - (nu - 1.0) * std::f64::consts::LN_2 - x;
    let v = var * log_scale.exp() * bessel_k_scaled_general(nu, x)?;
    Ok(v.min(var))
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn covariance_matrix(locations: &[(f64, f64)], kappa: f64, sigma: f64, nu: f64) -> Result<SymMatrix> {
    let n = locations.len();
    let mut err = None;
    let m = SymMatrix::from_fn(n, |i, j| match matern_cov(distance(locations[i], locations[j]), kappa, sigma, nu) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

/// Leave-one-out predictive distributions of the precision matrix
/// `Q = Sigma^-1`: `mu_i = y_i - (Q y)_i / Q_ii`, `sigma_i^2 = 1 / Q_ii`.
/// These equal the usual kriging formulas with `Sigma` restricted to `y_-i`.
struct LooPredictor {
    precision: SymMatrix,
    sigma: f64,
}

impl LooPredictor {
    fn new(locations: &[(f64, f64)], kappa: f64, sigma: f64, nu: f64) -> Result<Self> {
        let cov = covariance_matrix(locations, kappa, sigma, nu)?;
        let (l, _) = cholesky_jittered(&cov)?;
        Ok(LooPredictor { precision: l.inverse(), sigma })
    }

    fn predict(&self, values: &[f64]) -> Result<Vec<GaussianDist>> {
        let qy = self.precision.mul_vec(values)?;
        (0..values.len())
            .map(|i| {
                let qii = self.precision.get(i, i);
                let var = (1.0 / qii).min(self.sigma * self.sigma);
                GaussianDist::new(values[i] - qy[i] / qii, var.sqrt())
            })
            .collect()
    }
}

/// Conditional law of each value given all the others under a Matérn field.
pub fn loo_kriging(
    locations: &[(f64, f64)],
    values: &[f64],
    kappa: f64,
    sigma: f64,
    nu: f64,
) -> Result<Vec<GaussianDist>> {
    if locations.len() < 2 {
        return Err(Error::domain("leave-one-out kriging needs at least two locations"));
    }
    if locations.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: locations.len(), got: values.len() });
    }
    LooPredictor::new(locations, kappa, sigma, nu)?.predict(values)
}

/// Zero-mean Matérn field at `locations`, via the Cholesky factor of its covariance.
pub fn simulate_field(
    locations: &[(f64, f64)],
    kappa: f64,
    sigma: f64,
    nu: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let (l, _) = cholesky_jittered(&covariance_matrix(locations, kappa, sigma, nu)?)?;
    l.mul_vec(&rng.std_normals(locations.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutlierConfig {
    pub count: usize,
    pub noise_sd: f64,
}

impl Default for OutlierConfig {
    fn default() -> Self {
        OutlierConfig { count: 1, noise_sd: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialConfig {
    pub seed: u64,
    pub n_obs: usize,
    pub kappa: f64,
    pub sigma: f64,
    pub nu: f64,
    pub delta_grid: Vec<f64>,
    pub replicates: usize,
    /// When set, studies also run a scenario with noise added to `count`
    /// uniformly chosen observations.
    pub outlier: Option<OutlierConfig>,
    pub rules: Vec<Rule>,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        SpatialConfig {
            seed: 20_190_602,
            n_obs: 100,
            kappa: 50.0,
            sigma: 1.0,
            nu: 3.0,
            delta_grid: vec![2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 25.0],
            replicates: 300,
            outlier: Some(OutlierConfig::default()),
            rules: vec![Rule::Crps, Rule::Rcrps { c: 2.0 }, Rule::Scrps, Rule::Rscrps { c: 2.0 }, Rule::Logs],
        }
    }
}

impl Validate for SpatialConfig {
    fn validate(&self) -> Result<()> {
        ensure(self.kappa > 0.0 && self.sigma > 0.0 && self.nu > 0.0, || "Matérn parameters must be positive".into())?;
        ensure(self.n_obs >= 2, || format!("n_obs must be at least 2, got {}", self.n_obs))?;
        ensure(self.replicates > 0, || "replicates must be positive".into())?;
        ensure(!self.rules.is_empty(), || "rules must not be empty".into())?;
        for &d in &self.delta_grid {
            ensure(d > 0.0 && d < self.kappa, || format!("delta {d} must lie in (0, kappa)"))?;
        }
        if let Some(o) = &self.outlier {
            ensure(o.count >= 1 && o.count <= self.n_obs, || format!("outlier count {} out of range", o.count))?;
            ensure(o.noise_sd > 0.0, || "outlier noise_sd must be positive".into())?;
        }
        for r in &self.rules {
            r.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// Adds `N(0, noise_sd^2)` to `count` distinct uniformly chosen entries.
fn inject_outliers(values: &mut [f64], o: &OutlierConfig, rng: &mut RngStream) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    for k in 0..o.count {
        let j = k + ((rng.uniform() * (n - k) as f64) as usize).min(n - k - 1);
        idx.swap(k, j);
        values[idx[k]] += o.noise_sd * rng.std_normal();
    }
}

fn mean_score(rule: &Rule, preds: &[GaussianDist], values: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (p, y) in preds.iter().zip(values) {
        total += gaussian_score(rule, *p, *y)?;
    }
    Ok(total / values.len() as f64)
}

fn run_scenarios(cfg: &SpatialConfig, with_outlier: &[bool]) -> Result<SelectionCurve> {
    cfg.validate()?;
    // wins[rep][scenario][rule][delta]
    let wins: Vec<Vec<Vec<Vec<bool>>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let inner = || -> Result<Vec<Vec<Vec<bool>>>> {
                let mut rng = RngStream::new(cfg.seed, rep as u64);
                let locs: Vec<(f64, f64)> = (0..cfg.n_obs).map(|_| (rng.uniform(), rng.uniform())).collect();
                let clean = simulate_field(&locs, cfg.kappa, cfg.sigma, cfg.nu, &mut rng)?;
                let mut dirty = clean.clone();
                if let Some(o) = &cfg.outlier {
                    inject_outliers(&mut dirty, o, &mut rng);
                }
                let truth = LooPredictor::new(&locs, cfg.kappa, cfg.sigma, cfg.nu)?;
                let alts: Vec<[LooPredictor; 2]> = cfg
                    .delta_grid
                    .iter()
                    .map(|d| {
                        Ok([
                            LooPredictor::new(&locs, cfg.kappa + d, cfg.sigma, cfg.nu)?,
                            LooPredictor::new(&locs, cfg.kappa - d, cfg.sigma, cfg.nu)?,
                        ])
                    })
                    .collect::<Result<_>>()?;
                with_outlier
                    .iter()
                    .map(|&dirty_run| {
                        let values = if dirty_run { &dirty } else { &clean };
                        let p_truth = truth.predict(values)?;
                        let p_alts: Vec<[Vec<GaussianDist>; 2]> = alts
                            .iter()
                            .map(|[a, b]| Ok([a.predict(values)?, b.predict(values)?]))
                            .collect::<Result<_>>()?;
                        cfg.rules
                            .iter()
                            .map(|rule| {
                                let s_truth = mean_score(rule, &p_truth, values)?;
                                p_alts
                                    .iter()
                                    .map(|[a, b]| {
                                        let alts = [mean_score(rule, a, values)?, mean_score(rule, b, values)?];
                                        Ok(true_model_wins(s_truth, &alts))
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            };
            inner().map_err(|e| e.at_replicate(rep))
        })
        .collect::<Result<_>>()?;
    let mut curve = SelectionCurve::default();
    for (si, &dirty_run) in with_outlier.iter().enumerate() {
        let per_rep: Vec<Vec<Vec<bool>>> = wins.iter().map(|w| w[si].clone()).collect();
        let name = if dirty_run { "outlier" } else { "clean" };
        curve.rows.extend(tally(name, &cfg.rules, &cfg.delta_grid, &per_rep).rows);
    }
    Ok(curve)
}

/// Probability that `kappa` beats both `kappa +- delta`, for the scenario
/// the config describes (with the outlier when one is configured).
pub fn run_spatial(cfg: &SpatialConfig) -> Result<SelectionCurve> {
    run_scenarios(cfg, &[cfg.outlier.is_some()])
}

/// Clean scenario and, when configured, the outlier scenario on the same
/// simulated fields.
pub fn run_spatial_study(cfg: &SpatialConfig) -> Result<SelectionCurve> {
    if cfg.outlier.is_some() {
        run_scenarios(cfg, &[false, true])
    } else {
        run_scenarios(cfg, &[false])
    }
}
