//! Default tolerance handling.
//!
//! Every default tolerance in the crate passes through [`scaled`], which
//! multiplies the built-in value by the `SADDLESCAPE_TOL_SCALE` environment
//! variable (default 1). The knob exists for platforms with unusual
//! floating-point behavior; on ordinary IEEE-754 hardware it stays at 1 and
//! the built-in values apply verbatim.

use std::sync::OnceLock;

use crate::Scalar;

static TOL_SCALE: OnceLock<f64> = OnceLock::new();

/// Global tolerance multiplier, read once from `SADDLESCAPE_TOL_SCALE`.
///
/// Non-positive or unparseable values fall back to 1.
pub fn tol_scale() -> f64 {
    *TOL_SCALE.get_or_init(|| {
        std::env::var("SADDLESCAPE_TOL_SCALE")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
            .unwrap_or(1.0)
    })
}

/// A default tolerance, scaled by [`tol_scale`] and lifted into `T`.
pub fn scaled<T: Scalar>(base: f64) -> T {
    T::real(base * tol_scale())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scale_is_one() {
        // The test binary does not set the env var.
        assert_eq!(tol_scale(), 1.0);
        assert_eq!(scaled::<f64>(1e-8), 1e-8);
    }
}
