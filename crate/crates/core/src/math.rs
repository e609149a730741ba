//! Float math routed through `libm` so numerics match exactly between
//! `std` and `no_std` builds.

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + exp(-x))
}

/// Max over a non-empty slice, ignoring nothing: NaN inputs are a caller bug.
pub fn max_of(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_symmetry() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_of_picks_largest() {
        assert_eq!(max_of(&[-2.0, 7.5, 3.0]), 7.5);
        assert_eq!(max_of(&[f64::NEG_INFINITY, -1.0]), -1.0);
    }
}
