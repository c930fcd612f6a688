//! Squared error of one-dimensional intervals, actual versus as-if untruncated.

/// RSE of the interval `[a, b]` about `r`: `(a²+ab+b²)/3 − r(a+b) + r²`.
pub fn rse_interval_actual(r: f64, a: f64, b: f64) -> f64 {
    (a * a + a * b + b * b) / 3.0 - r * (a + b) + r * r
}

/// RSE of the as-if interval `[a, 2 r_ml − a]` centred at the ML estimate.
pub fn rse_interval_categorical(r: f64, a: f64, r_ml: f64) -> f64 {
    (a * a - 2.0 * r_ml * (a + 3.0 * r) + 3.0 * r * r + 4.0 * r_ml * r_ml) / 3.0
}

/// Closed form of `actual − categorical`: `(a+b−2 r_ml)(b−3r+2 r_ml)/3`.
pub fn rse_interval_difference(r: f64, a: f64, b: f64, r_ml: f64) -> f64 {
    (a + b - 2.0 * r_ml) * (b - 3.0 * r + 2.0 * r_ml) / 3.0
}
