//! Algebraic map from the collocation interval `x ∈ [-1, 1]` onto the radial
//! box `r ∈ [0, r_max]`:
//!
//! ```text
//! r(x) = L (1 + x) / (1 - x + α),    r'(x) = L (2 + α) / (1 - x + α)^2
//! ```
//!
//! The scale `L` and the shape parameter `α` are tied by `r_max = 2L / α`,
//! so the last node sits exactly on the box edge.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingSpec {
    alpha: f64,
    r_max: f64,
    scale: f64,
}

impl MappingSpec {
    /// Map with shape parameter `alpha` and box size `r_max`; `L = α r_max / 2`.
    pub fn new(alpha: f64, r_max: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("r_max", r_max)?;
        Ok(Self {
            alpha,
            r_max,
            scale: alpha * r_max / 2.0,
        })
    }

    /// Map with scale `L` and box size `r_max`; `α = 2L / r_max`.
    pub fn with_scale(scale: f64, r_max: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        check_positive("r_max", r_max)?;
        Ok(Self {
            alpha: 2.0 * scale / r_max,
            r_max,
            scale,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn r(&self, x: f64) -> f64 {
        map_r(x, self)
    }

    pub fn jacobian(&self, x: f64) -> f64 {
        map_jacobian(x, self)
    }

    /// Inverse map `x(r)`.
    pub fn x_of_r(&self, r: f64) -> f64 {
        (r * (1.0 + self.alpha) - self.scale) / (self.scale + r)
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Mapping(format!(
            "{name} must be finite and positive, got {value}"
        )))
    }
}

pub fn map_r(x: f64, spec: &MappingSpec) -> f64 {
    if x == 1.0 {
        return spec.r_max;
    }
    spec.scale * (1.0 + x) / (1.0 - x + spec.alpha)
}

pub fn map_jacobian(x: f64, spec: &MappingSpec) -> f64 {
    let d = 1.0 - x + spec.alpha;
    spec.scale * (2.0 + spec.alpha) / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha_25() -> MappingSpec {
        MappingSpec::new(25.0, 150.0).unwrap()
    }

    #[test]
    fn endpoints() {
        let m = alpha_25();
        assert_eq!(m.r(-1.0), 0.0);
        assert!((m.r(1.0) - 150.0).abs() <= 150.0 * 1e-12);
        assert_eq!(m.scale(), 1875.0);

        let m = MappingSpec::with_scale(25.0, 300.0).unwrap();
        assert_eq!(m.r(-1.0), 0.0);
        assert!((m.r(1.0) - 300.0).abs() <= 300.0 * 1e-12);
        assert!((m.alpha() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn midpoint_and_jacobian_values() {
        let m = alpha_25();
        assert!((m.r(0.0) - 1875.0 / 26.0).abs() < 1e-12);
        assert!((m.r(0.0) - 72.115384615).abs() < 1e-9);
        assert!((m.jacobian(-1.0) - 1875.0 / 27.0).abs() < 1e-12);
        assert!((m.jacobian(-1.0) - 69.4444444).abs() < 1e-7);
    }

    #[test]
    fn inverse_map() {
        let m = MappingSpec::with_scale(25.0, 150.0).unwrap();
        for k in 0..=20 {
            let x = -1.0 + 0.1 * k as f64;
            assert!((m.x_of_r(m.r(x)) - x).abs() < 1e-13);
        }
    }

    #[test]
    fn large_alpha_flattens_jacobian() {
        // Hold L(2+α)/α² fixed; the spread of r'(x) over [-1, 1] shrinks.
        let spread = |alpha: f64| {
            let scale = alpha * alpha / (2.0 + alpha);
            let m = MappingSpec::new(alpha, 2.0 * scale / alpha).unwrap();
            (m.jacobian(1.0) - m.jacobian(-1.0)) / m.jacobian(1.0)
        };
        let s: Vec<f64> = [10.0, 100.0, 1000.0, 10000.0]
            .iter()
            .map(|&a| spread(a))
            .collect();
        assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
        assert!(s[3] < 1e-3);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(MappingSpec::new(0.0, 150.0).is_err());
        assert!(MappingSpec::new(25.0, -1.0).is_err());
        assert!(MappingSpec::with_scale(f64::NAN, 150.0).is_err());
    }
}
