//! Simulation studies of model selection under different scoring rules, plus
//! expected-score surfaces and entropy traces.
//!
//! Every study is a pure function of its config. Replicate `i` draws from
//! `RngStream::new(seed, i)` and runs on the rayon pool; results are gathered
//! in replicate order, so reruns are bit-identical regardless of scheduling.

mod checks;
mod config;
mod entropy;
mod nbreg;
mod selection;
mod spatial;
mod surfaces;
mod volatility;

pub use crate::table::{Cell, Table};
pub use checks::{check_entropy, check_nbreg, check_spatial, check_surfaces, check_volatility};
pub use config::{load_config, parse_config, Validate};
pub use entropy::{entropy_decomposition_trace, EntropyConfig, EntropyRow, EntropyTrace};
pub use nbreg::{fit_negbin, run_nbreg, simulate_nbreg, spearman, NbFit, NbRegConfig, NbRegResult, NbRow};
pub use selection::{wilson_interval, CheckOutcome, SelectionCurve, SelectionRow, WILSON_Z};
pub use spatial::{
    loo_kriging, matern_cov, run_spatial, run_spatial_study, simulate_field, OutlierConfig, SpatialConfig,
};
pub use surfaces::{expected_score_surfaces, SurfaceConfig, SurfaceGrid, Surfaces};
pub use volatility::{run_volatility, simulate_volatility, VolatilityConfig};

use crate::distributions::{GaussianDist, PredictiveDistribution};
use crate::error::Result;
use crate::kernels::MonteCarlo;
use crate::scores::{score, Rule};

/// `S(N(mu, sigma^2), y)` through the closed forms where they exist.
pub(crate) fn gaussian_score(rule: &Rule, g: GaussianDist, y: f64) -> Result<f64> {
    score(rule, &PredictiveDistribution::Gaussian(g), y, &MonteCarlo::default()).map(|s| s.value)
}
