//! Finite-difference derivatives used by the residual checks.

/// Fourth-order central difference `f′(x)` with step `h`.
pub fn central5<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Second-order central difference `f′(x)` with step `h`.
pub fn central3<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_error_order() {
        let d = central5(libm::sin, 0.7, 1e-3);
        assert!((d - libm::cos(0.7)).abs() < 1e-12);
        let d2 = central3(libm::sin, 0.7, 1e-5);
        assert!((d2 - libm::cos(0.7)).abs() < 1e-9);
    }
}
