//! Estimates reported for the 385-sector Japanese linked input-output tables
//! (2000, 2005 and 2010 averaged into two periods). They depend on proprietary
//! data and serve as documentation only.

/// Household exponent from weighted 2SLS, and its standard error.
pub const LAMBDA_HAT: f64 = 1.09631;
pub const LAMBDA_SE: f64 = 0.35218;
pub const INTERCEPT_HAT: f64 = 0.00561;
pub const INTERCEPT_SE: f64 = 0.00850;
/// First-stage F statistic with (2, 265) degrees of freedom.
pub const FIRST_STAGE_F: f64 = 119.57;

/// Price elasticity of fixed capital formation.
pub const ETA_K: f64 = -0.80;

/// SROP of the simultaneous imposition and the sum of sectoral SROPs.
pub const SROP_ALL: f64 = 0.727;
pub const SROP_SUM: f64 = 0.694;

/// Moments (mean, sd, skewness, excess kurtosis) of the kind minus
/// Cobb-Douglas aggregate fluctuation at 10% annual volatility, 300 draws.
pub const MOMENTS_SIMPLE_CD: [f64; 4] = [12.552, 244.697, -0.076, -0.545];
pub const MOMENTS_LEONTIEF_CD: [f64; 4] = [-0.768, 0.149, -0.745, 0.393];
pub const MOMENTS_CCES_CD: [f64; 4] = [-1.006, 1.783, 0.642, 4.077];
