//! Special functions, dense SPD linear algebra and reproducible random streams.

mod bessel;
mod linalg;
mod rng;
mod special;

pub use bessel::{bessel_k, bessel_k_general, bessel_k_half_integer, bessel_k_scaled_general};
pub use linalg::{chol_solve, cholesky, cholesky_jittered, LowerTriangular, SymMatrix};
pub use rng::RngStream;
pub use special::{
    erf, erfc, gamma, ln_gamma, std_normal_cdf, std_normal_pdf, std_normal_quantile, FRAC_1_SQRT_2PI, SQRT_PI,
};
