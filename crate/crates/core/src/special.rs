//! Bessel function of the first kind, order zero, for the disc eigenmode.

/// First positive zero of `J_0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// `J_0(x)` by its power series; accurate to rounding for `|x| <= 8`.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}
