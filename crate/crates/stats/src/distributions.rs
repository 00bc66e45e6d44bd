//! Thin wrappers over `statrs` for the distribution functions the tests need.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

/// P(Z <= z) for a standard normal variable.
pub fn normal_cdf(z: f64) -> f64 {
    standard_normal().cdf(z)
}

/// P(Z >= z) for a standard normal variable.
pub fn normal_sf(z: f64) -> f64 {
    standard_normal().sf(z)
}

/// P(X >= x) for a chi-squared variable with `df` degrees of freedom.
pub fn chi_squared_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("df must be positive").sf(x)
}

/// P(X <= x) for a chi-squared variable with `df` degrees of freedom.
pub fn chi_squared_cdf(x: f64, df: f64) -> f64 {
    1.0 - chi_squared_sf(x, df)
}

/// P(T <= t) for Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df must be positive").cdf(t)
}

/// P(T >= t) for Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df must be positive").sf(t)
}
