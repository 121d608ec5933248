//! Tolerances and small float helpers shared by every module.

/// Absolute tolerance for comparisons against zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Slack allowed on feasibility checks after floating-point scaling.
pub const FEAS_TOL: f64 = 1e-9;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// MWU threshold `ln(m) / eps^2`, clamped below at 1 so that a single row
/// still yields a well-defined final scaling.
pub fn mwu_threshold(rows: usize, epsilon: f64) -> f64 {
    let raw = ln(rows as f64) / (epsilon * epsilon);
    if raw < 1.0 {
        1.0
    } else {
        raw
    }
}

/// `m * ceil(threshold)`: the iteration bound of the covering MWU loop.
///
/// Equals `m * ceil(ln(m) / eps^2)` whenever that threshold is at least 1,
/// which holds for every `m >= 2` and `eps <= 1/2`.
pub fn mwu_iteration_bound(rows: usize, epsilon: f64) -> usize {
    if rows == 0 {
        return 0;
    }
    rows * ceil(mwu_threshold(rows, epsilon)) as usize
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
